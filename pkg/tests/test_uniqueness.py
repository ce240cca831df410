import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import zeta

from zeroset.criteria import MajorantSpec
from zeroset.measures import ZeroSequence, riesz_radial_counting
from zeroset.oracle import Builtin
from zeroset.radial import PowerMajorant
from zeroset.uniqueness import (PowerV, SampledV, must_vanish_verdict, tail_sum_verdict,
                                v_inequality_components, v_from_json, verify_v_membership,
                                zero_sum)


def test_power_v_membership():
    assert verify_v_membership(PowerV(1.0, 1.0, 2.0)).passed
    low = verify_v_membership(PowerV(1.0, 1.0, 2.0, declared_b=0.5))
    assert not low.passed and low.boundary_sup == pytest.approx(1.0)


def test_sampled_v_bump_fails_submean():
    bump = SampledV([1.0, 2.0, 4.0, 8.0], [1.0, 0.5, 0.9, 0.0], declared_b=1.0)
    rep = verify_v_membership(bump)
    assert not rep.passed and rep.submean_violation > 1e-3


def test_sampled_v_decreasing_convex_passes():
    # v = 1 - log(t)/log 8 on [1, 8], then 0: harmonic pieces joined with a convex kink
    v = SampledV([1.0, 8.0, 16.0], [1.0, 0.0, 0.0])
    assert verify_v_membership(v).passed
    locs, masses = v.riesz_atoms()
    assert masses[0] == pytest.approx(1.0 / math.log(8.0))


@given(st.floats(1.0, 50.0), st.floats(1.0, 50.0), st.floats(0.5, 4.0))
def test_power_v_annulus_mass_matches_density(r1, r2, beta):
    lo, hi = sorted((r1, r2))
    v = PowerV(1.5, 1.0, beta)
    from scipy import integrate
    dens = integrate.quad(lambda t: float(v.riesz_density(t)), lo, hi, epsrel=1e-12)[0]
    assert v.riesz_mass(lo, hi) == pytest.approx(dens, rel=1e-8, abs=1e-14)
    assert v.riesz_mass(1.0, 1e12) <= v.total_mass


def test_zero_sum_routes_agree():
    v = PowerV(1.0, 1.0, 3.0)
    target = 2.0 * (7.0 * zeta(3.0) - 8.0)
    via_oracle = zero_sum(Builtin("cos_pi"), v, 1.0)
    via_rule = zero_sum(ZeroSequence.generate("half_integers", 0), v, 1.0)
    assert via_oracle.value == pytest.approx(target, abs=1e-9)
    assert via_rule.value == pytest.approx(target, abs=1e-9)


def test_inequality_components_for_cos():
    M = MajorantSpec("radial", profile=PowerMajorant.linear(math.pi))
    comps = v_inequality_components(PowerV(1.0, 1.0, 2.0), Builtin("cos_pi"), M)
    assert comps.lhs.value == pytest.approx(math.pi**2 - 8.0, abs=1e-8)
    assert comps.rhs_integral.value == pytest.approx(math.pi, rel=1e-6)
    assert comps.rhs_alternative.value == pytest.approx(4 * math.pi, rel=1e-6)
    assert comps.u_at_z0 == 0.0
    assert comps.to_dict()["lhs"]["finite"]


def test_inequality_rejects_u_above_m():
    M = MajorantSpec("radial", profile=PowerMajorant.linear(1.0))
    with pytest.raises(ValueError):
        v_inequality_components(PowerV(1.0, 1.0, 2.0), Builtin("cos_pi"), M)


def test_no_zeros_gives_zero_lhs():
    c = Builtin("exp_poly", coeffs=(math.log(2.0),))
    M = MajorantSpec("radial", profile=PowerMajorant(1.0, 1.0, b=1.0))
    comps = v_inequality_components(PowerV(1.0, 1.0, 2.0), c, M)
    assert comps.lhs.value == 0.0 and comps.rhs_integral.value > 0


def test_must_vanish_verdicts():
    nu = riesz_radial_counting(PowerMajorant(1.0, 1.0))
    v = PowerV(1.0, 1.0, 2.0)
    assert must_vanish_verdict(ZeroSequence.generate("power", 0, gamma=0.5), v, nu).verdict \
        == "MustVanish"
    assert must_vanish_verdict(ZeroSequence.generate("integers", 0, symmetric=False), v, nu).verdict \
        == "NoConclusion"
    assert must_vanish_verdict(ZeroSequence([2.0, 3.0]), v, nu).verdict == "NoConclusion"


def test_tail_sum_verdicts():
    one = tail_sum_verdict(Builtin("exp_poly", coeffs=(0.0,)), PowerV(1.0, 1.0, 3.0))
    assert one.verdict == "TailSumFinite" and one.details["value"] == 0.0
    assert tail_sum_verdict(Builtin("cos_pi"), PowerV(1.0, 1.0, 1.0)).verdict == "HypothesisFails"


def test_v_json():
    for v in (PowerV(1.0, 2.0, 3.0), SampledV([1.0, 2.0], [1.0, 0.0])):
        assert v_from_json(v.to_json()) == v
