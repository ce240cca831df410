import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zeroset.measures import ZeroSequence
from zeroset.oracle import Builtin
from zeroset.radial import (LogPowerQ, PowerMajorant, PowerQ, SampledMajorant, SampledQ,
                            check_q_admissible, constant_q, integral_test_qM, left_derivative,
                            log_mean_stieltjes, tail_Q, weight_from_json, zero_tail_sum)


def test_admissibility_examples():
    pw = check_q_admissible(PowerQ(1.5))
    assert pw.ok and pw.integral == pytest.approx(2.0 / 3.0)
    lp = check_q_admissible(LogPowerQ(2.0, 1.0, math.e))
    assert lp.ok and lp.integral == pytest.approx(1.0)
    assert check_q_admissible(constant_q(2.0)).status == "rejected"
    assert check_q_admissible(LogPowerQ(1.0)).status == "rejected"


def test_sampled_weight_gates():
    assert check_q_admissible(SampledQ([1.0, 2.0, 4.0], [1.0, 0.5, 0.25], 1.0, None)).status \
        == "inconclusive"
    assert check_q_admissible(SampledQ([1.0, 2.0], [1.0, 2.0], 1.0, 1.0)).status == "rejected"
    ok = check_q_admissible(SampledQ([1.0, 2.0, 4.0], [1.0, 0.5, 0.25], 1.0, 1.0))
    # steps: log 2 * (1 + 0.5) plus the tail 0.25 * 4^1 * 4^-1 / 1
    assert ok.ok and ok.integral == pytest.approx(1.5 * math.log(2.0) + 0.25)


@given(st.floats(0.2, 4.0), st.floats(1.0, 1e4))
def test_Q_is_antiderivative(alpha, s):
    q = PowerQ(alpha)
    h = 1e-6 * s
    deriv = -(tail_Q(q, s + h) - tail_Q(q, s - h)) / (2 * h) if s - h >= 1.0 else None
    if deriv is not None:
        assert deriv == pytest.approx(float(q(s)) / s, rel=1e-6)
    assert tail_Q(q, 2 * s) <= tail_Q(q, s)


def test_left_derivative_examples():
    assert left_derivative(PowerMajorant.linear(math.pi), 3.0) == pytest.approx(math.pi)
    assert left_derivative(lambda t: t * t, 3.0) == pytest.approx(6.0, abs=1e-6)
    kink = SampledMajorant([0.0, 1.0, 2.0], [0.0, 1.0, 3.0])
    assert left_derivative(kink, 1.0) == pytest.approx(1.0)
    assert left_derivative(kink, 1.5) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        left_derivative(lambda t: t, 0.5, h0=1.0, r0=0.0)


def test_sampled_majorant_needs_convexity():
    with pytest.raises(ValueError):
        SampledMajorant([0.0, 1.0, 2.0], [0.0, 2.0, 3.0])


def test_integral_examples():
    q = PowerQ(1.5)
    m = PowerMajorant.linear(math.pi)
    assert integral_test_qM(q, m).value == pytest.approx(2 * math.pi, abs=1e-6)
    assert integral_test_qM(q, m, method="numeric").value == pytest.approx(2 * math.pi, abs=1e-6)
    assert integral_test_qM(LogPowerQ(2.0, 1.0, math.e), m, method="numeric").divergent
    sq = integral_test_qM(PowerQ(3.0), PowerMajorant(1.0, 2.0), method="numeric")
    assert sq.convergent and sq.value == pytest.approx(2.0, abs=1e-6)
    with pytest.raises(ValueError):
        integral_test_qM(constant_q(1.0), m)


def test_zero_tail_sums():
    q = PowerQ(1.5)
    ints = zero_tail_sum(ZeroSequence.generate("integers", 0, symmetric=False), q)
    from scipy.special import zeta
    exact = 2.0 / 3.0 * (zeta(1.5) - 1.0)
    assert ints.convergent and ints.value == pytest.approx(exact, rel=2e-2)
    assert zero_tail_sum(ZeroSequence.generate("power", 0, gamma=0.5), q).divergent
    finite = zero_tail_sum(ZeroSequence([2.0, 4.0j, 0.5]), q)
    assert finite.convergent
    assert finite.value == pytest.approx(2 / 3 * (2**-1.5 + 4**-1.5))


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(1.1, 100.0), min_size=1, max_size=8), st.floats(1.1, 100.0))
def test_tail_sum_monotone_under_supersets(mods, extra):
    q = PowerQ(2.0)
    small = zero_tail_sum(ZeroSequence(mods), q).value
    large = zero_tail_sum(ZeroSequence(mods + [extra]), q).value
    assert large >= small


def test_log_mean_constant_function_is_zero():
    one = Builtin("exp_poly", coeffs=(0.0,))
    res, _ = log_mean_stieltjes(one, PowerQ(3.0))
    assert res.convergent and res.value == 0.0


@pytest.mark.slow
def test_log_mean_for_cos_matches_closed_form():
    from scipy.special import zeta
    res, stats = log_mean_stieltjes(Builtin("cos_pi"), PowerQ(3.0))
    # circle means of log|cos pi z| against dq = -3 t^-4 dt on [1, inf)
    closed = -2.0 * (math.log(2.0) + 1.0 / 3.0 + (7.0 * zeta(3.0) - 8.0) / 3.0)
    assert res.convergent and res.value == pytest.approx(closed, abs=1e-5)
    assert stats["circle_means"] > 0


def test_weight_json():
    q = weight_from_json({"variant": "sampled", "breakpoints": [1, 2], "values": [1, 0.5],
                          "r0": 1.0, "tail_alpha": 2.0})
    assert weight_from_json(q.to_json()).to_json() == q.to_json()
    assert weight_from_json({"variant": "constant", "c": 2.0}).alpha == 0.0
    with pytest.raises(ValueError):
        weight_from_json({"variant": "nope"})
