import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zeroset.measures import ZeroSequence
from zeroset.oracle import (Builtin, CanonicalProduct, TruncationWarning, circle_mean_log,
                            jensen_check, log_abs_primary, oracle_from_json,
                            product_vs_cos_residual, selftest)


def test_cos_values():
    cos = Builtin("cos_pi")
    assert cos(0.0) == 0.0
    assert cos(50j) == pytest.approx(50 * math.pi - math.log(2.0), abs=1e-12)
    assert cos(0.5) == -math.inf and cos(-3.5) == -math.inf
    assert Builtin("sin_pi")(2.0) == -math.inf


@given(st.floats(-20, 20), st.floats(-3, 3))
def test_cos_matches_numpy(x, y):
    z = complex(x, y)
    if y == 0.0 and (x - 0.5) == round(x - 0.5):
        # exact zero; numpy returns a rounding residue here
        assert Builtin("cos_pi")(z) == -math.inf
        return
    direct = math.log(abs(np.cos(math.pi * z)))
    assert Builtin("cos_pi")(z) == pytest.approx(direct, abs=1e-9)


def test_constant_function():
    c = Builtin("exp_poly", coeffs=(math.log(3.0),))
    assert circle_mean_log(c, 4.0) == pytest.approx(math.log(3.0))
    assert jensen_check(c, 2.0)["gap"] < 1e-14


def test_cos_circle_mean_at_two():
    closed = 2 * math.log(3.0) + 4 * math.log(4.0 / 3.0)
    assert circle_mean_log(Builtin("cos_pi"), 2.0) == pytest.approx(closed, abs=1e-12)
    assert jensen_check(Builtin("cos_pi"), 2.0)["gap"] < 1e-8


def test_zero_on_circle_is_offset():
    # r = 0.5 puts zeros of cos(pi z) exactly on nodes at angles 0 and pi
    mean, info = circle_mean_log(Builtin("cos_pi"), 0.5, full_output=True)
    assert info["offsets"] >= 1 and math.isfinite(mean)


def test_jensen_rejects_zero_at_origin():
    with pytest.raises(ValueError):
        jensen_check(Builtin("sin_pi"), 1.0)


def test_small_product_jensen():
    f = CanonicalProduct(ZeroSequence([2.0, 3.0, 4.0]))
    assert f.genus == 0
    assert jensen_check(f, 5.0)["gap"] < 1e-8


@given(st.complex_numbers(max_magnitude=0.49, allow_nan=False, allow_infinity=False),
       st.integers(0, 3))
def test_primary_factor_against_direct_formula(w, p):
    direct = math.log(abs((1 - w) * np.exp(sum(w**j / j for j in range(1, p + 1))))) \
        if w != 1 else -math.inf
    got = float(log_abs_primary(np.array([w]), p)[0])
    assert got == pytest.approx(direct, abs=1e-12)


def test_genus_too_small_is_rejected():
    with pytest.raises(ValueError):
        CanonicalProduct(ZeroSequence.generate("integers", 32), genus=0)


def test_truncation_warning_and_bound():
    f = CanonicalProduct(ZeroSequence.generate("half_integers", 64))
    assert f.genus == 1
    with pytest.warns(TruncationWarning):
        f.log_abs(np.array([40.0 + 1.0j]))
    # 2 |z|^2 * sum_{k > 64} 2 (k - 1/2)^-2 is about 0.06 at |z| = 1 and scales like |z|^2
    b1 = float(f.truncation_bound(1.0 + 0.0j))
    assert 0.05 < b1 < 0.07
    assert float(f.truncation_bound(0.1 + 0.0j)) == pytest.approx(b1 / 100, rel=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        f.log_abs(np.array([0.1j]), warn=False)


def test_product_tracks_cos():
    # log|P_K| - log|cos pi z| is close to an affine function for a long truncation
    assert product_vs_cos_residual(K=2**12, n_points=30) < 1e-4


def test_oracle_json():
    f = oracle_from_json({"product": {"zeros": {"kind": "explicit",
                                                "points": [[1.0, 1.0], [2.0, 0.0, 2]]}}})
    again = oracle_from_json(f.to_json())
    assert again.log_abs(3.0 + 1.0j) == pytest.approx(f.log_abs(3.0 + 1.0j))
    assert oracle_from_json({"builtin": "cos_pi"}) == Builtin("cos_pi")
    with pytest.raises(ValueError):
        oracle_from_json({"builtin": "tan"})


@settings(max_examples=10, deadline=None)
@given(st.floats(0.3, 30.0))
def test_jensen_holds_for_shifted_cos(r):
    f = Builtin("cos_pi", shift=0.25 + 0.1j)
    if np.any(np.abs(np.abs(f.zeros_within(r + 1.0)[0]) - r) < 1e-3):
        return
    assert jensen_check(f, r)["gap"] < 1e-8


def test_selftest_passes():
    rep = selftest()
    assert rep["passed"], [c for c in rep["checks"] if not c["passed"]]
