import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zeroset._doubling import doubling_limit
from zeroset.measures import (GridFunction, LineMeasure, RadialMeasure, ZeroSequence,
                              build_distribution, riesz_fd, riesz_radial_counting,
                              stieltjes_line, stieltjes_line_tail, stieltjes_radial)
from zeroset.radial import PowerMajorant


def test_generated_sequences():
    Z = ZeroSequence.generate("half_integers", 3)
    assert sorted(np.abs(Z.points)) == [0.5, 0.5, 1.5, 1.5, 2.5, 2.5]
    pts, mult = Z.within(10.0)
    assert len(pts) == 20 and np.all(mult == 1)
    roots = ZeroSequence.generate("power", 0, gamma=0.5)
    assert not roots.rule.symmetric
    assert roots.counting(3.0) == 9.0


def test_scaled_multiplicity_and_counting():
    Z = ZeroSequence.generate("integers", 0).scaled_multiplicity(2)
    assert Z.counting(2.5) == 8.0
    F = ZeroSequence([1.0, 2.0j], [1, 3]).scaled_multiplicity(2)
    assert list(F.multiplicities) == [2, 6]


def test_csv_and_json_roundtrip(tmp_path):
    path = tmp_path / "z.csv"
    path.write_text("re,im,mult\r\n1.0,0.0,2\r\n0.0,-3.0,1\r\n", encoding="utf-8")
    Z = ZeroSequence.from_csv(path)
    assert list(Z.multiplicities) == [2, 1]
    again = ZeroSequence.from_json(Z.to_json())
    assert np.array_equal(again.points, Z.points)
    rel = ZeroSequence.from_json({"kind": "csv", "path": "z.csv"}, tmp_path)
    assert len(rel) == 2


def test_bad_sequences():
    with pytest.raises(ValueError):
        ZeroSequence([1.0, 2.0], [1])
    with pytest.raises(ValueError):
        ZeroSequence([1.0], [0])
    with pytest.raises(ValueError):
        ZeroSequence.generate("power", 0, gamma=-1.0)


@given(st.floats(0.1, 50.0), st.floats(0.1, 50.0))
def test_counting_is_monotone(a, b):
    Z = ZeroSequence.generate("power", 0, gamma=0.7, symmetric=True)
    lo, hi = sorted((a, b))
    assert Z.counting(lo) <= Z.counting(hi)


@given(st.integers(1, 40), st.floats(0.3, 3.0))
def test_tail_power_sum_bounds_tail(K, s):
    rule = ZeroSequence.generate("integers", 0).rule
    bound = rule.tail_power_sum(K, s + 1.0)
    k = np.arange(K + 1, K + 20001, dtype=float)
    assert 2.0 * np.sum(k ** -(s + 1.0)) <= bound * (1 + 1e-12)


def test_line_measure_two_branches():
    mu = build_distribution(masses=[(-1.0, 2.0), (0.5, 1.0)], density=0.25)
    # nu(t) = -mu([t, 0)) for t < 0 and mu([0, t]) for t >= 0
    assert mu(np.array(-2.0)) == pytest.approx(-(2.0 + 0.5))
    assert mu(np.array(1.0)) == pytest.approx(1.0 + 0.25)
    assert mu(np.array(0.0)) == 0.0


def test_measure_json_roundtrip():
    spec = {"kind": "line", "breakpoints": [-1.0, 1.0], "values": [-1.0, 1.0],
            "interp": "linear", "mass": "growing"}
    mu = LineMeasure.from_json(spec)
    assert LineMeasure.from_json(mu.to_json())(np.array(7.0)) == pytest.approx(7.0)
    rad = RadialMeasure.from_json({"kind": "radial", "breakpoints": [1.0, 2.0],
                                   "values": [1.0, 3.0], "interp": "step"})
    assert rad(np.array([0.5, 1.5, 2.5])).tolist() == [0.0, 1.0, 3.0]


def test_stieltjes_line_atoms_and_density():
    mu = build_distribution(masses=[(0.3, 2.0)], density=1.0)
    val = stieltjes_line(lambda x: x * x, mu, (-1.0, 1.0))
    assert val == pytest.approx(2.0 * 0.09 + 2.0 / 3.0, abs=1e-10)


def test_stieltjes_line_log_singularity():
    mu = build_distribution(density=1.0)
    # int_{-1}^{1} log(1/|x|) dx = 2
    val = stieltjes_line(lambda x: -math.log(abs(x)) if x else math.inf, mu, (-1.0, 1.0),
                         points=(0.0,))
    assert val == pytest.approx(2.0, abs=1e-8)


def test_stieltjes_line_tail_classifies():
    mu = build_distribution(density=1.0)
    conv = stieltjes_line_tail(lambda x: 1.0 / (x * x), mu, 1.0)
    assert conv.convergent and conv.value == pytest.approx(2.0, rel=1e-6)
    div = stieltjes_line_tail(lambda x: 1.0 / abs(x), mu, 1.0)
    assert div.divergent


def test_stieltjes_radial_against_counting():
    nu = riesz_radial_counting(PowerMajorant(1.0, 2.0))  # n(t) = 2 t^2
    val = stieltjes_radial(lambda t: 1.0, nu, (1.0, 3.0))
    assert val == pytest.approx(2 * 9.0 - 2 * 1.0, rel=1e-8)


def test_riesz_fd_point_mass():
    a = 0.3 + 0.2j
    u = GridFunction.sample(lambda z: np.log(np.abs(z - a)), (-2.0, 2.0), (-2.0, 2.0), 1 / 32)
    grid = riesz_fd(u)
    assert not grid.singular
    # off-node zero: second-order discretization error only
    assert grid.disk_mass(0.5, a) == pytest.approx(1.0, abs=1e-4)


def test_riesz_fd_zero_on_node():
    a = 0.25 + 0.25j
    u = GridFunction.sample(lambda z: 2.0 * np.log(np.abs(z - a)), (-2.0, 2.0), (-2.0, 2.0),
                            1 / 32)
    grid = riesz_fd(u)
    assert len(grid.singular) == 1
    # box and neighbouring cell masses telescope to the flux through a far boundary
    assert grid.singular[0]["mass"] == pytest.approx(2.0, rel=0.02)
    assert grid.disk_mass(0.5, a) == pytest.approx(2.0, abs=1e-4)


def test_riesz_fd_quadratic_density():
    u = GridFunction.sample(lambda z: np.abs(z) ** 2, (-1.0, 1.0), (-1.0, 1.0), 1 / 16)
    dens = riesz_fd(u).density()
    assert np.nanmax(np.abs(dens - 2.0 / math.pi)) < 1e-9


def test_riesz_fd_coarse_warning():
    u = GridFunction.sample(lambda z: np.abs(z.imag), (-1.0, 1.0), (-1.0, 1.0), 0.25)
    assert riesz_fd(u, feature_scale=0.1).warnings


def test_grid_function_rejects_uneven_spacing():
    with pytest.raises(ValueError):
        GridFunction([0.0, 1.0, 3.0], [0.0, 1.0, 2.0], np.zeros((3, 3)))


def test_doubling_limit_verdicts():
    geo = doubling_limit(lambda i: 0.5**i, tol=1e-12)
    assert geo.convergent and geo.value == pytest.approx(2.0, rel=1e-9)
    assert doubling_limit(lambda i: 1.0, tol=1e-8).divergent


@settings(max_examples=25)
@given(st.floats(0.05, 0.7))
def test_doubling_limit_geometric_property(r):
    res = doubling_limit(lambda i: r**i, tol=1e-10, max_doublings=80)
    assert res.convergent
    assert res.value == pytest.approx(1.0 / (1.0 - r), rel=1e-8)
