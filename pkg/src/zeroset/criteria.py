"""Sup-functionals for zero subsets, their scan over test families, and smoothing.

Two functionals are evaluated for a candidate zero sequence Z and the
Riesz measure ``nu`` of a majorant M:

* ``jensen_functional``: ``sum_k V(z_k) - int V dnu`` for a Jensen potential V;
* ``cartwright_functional``: ``sum_k (P phi)(z_k) - int phi dnu_R`` for a test
  function phi on the line and its Poisson extension.

:func:`estimate_sup` scans the support radius ``R = R0 2^i`` and maximizes
over the remaining family parameters.  The result is a lower bound for the
supremum over the whole class, with a Bounded / Diverging / Inconclusive
verdict drawn from the growth of the scan.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._numeric import trapezoid_circle_mean
from .measures import (GridFunction, LineMeasure, RadialMeasure, RieszGrid, ZeroSequence,
                       build_distribution, riesz_fd, riesz_radial_counting, stieltjes_line,
                       stieltjes_radial)
from .potentials import AveragedGreen, RadialLog, verify_jensen_membership
from .radial import majorant_from_json
from .testfns import LogCusp, poisson_extend, verify_rp0_membership
from .tolerances import Tolerances, TOL_QUAD

VERDICTS = ("Bounded", "Diverging", "Inconclusive")
SCAN_WINDOW = 5
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# --------------------------------------------------------------------------
# majorants
# --------------------------------------------------------------------------

class MajorantSpec:
    """A majorant M together with its Riesz measure.

    ``kind`` is ``radial`` (profile m with ``M(z) = m(|z|)``),
    ``cartwright_imabs`` (``M(z) = sigma |Im z|``), ``grid`` (samples on a
    :class:`GridFunction`) or ``closed_form`` (a vectorized callable, with
    the measure supplied by the caller).
    """

    KINDS = ("radial", "cartwright_imabs", "grid", "closed_form")

    def __init__(self, kind: str, *, profile=None, sigma: float | None = None,
                 grid: GridFunction | None = None, func=None, measure=None,
                 feature_scale: float | None = None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown majorant kind {kind!r}")
        self.kind = kind
        self.profile = profile
        self.sigma = sigma
        self.grid = grid
        self.func = func
        self._measure = measure
        self._feature_scale = feature_scale
        if kind == "radial" and profile is None:
            raise ValueError("radial majorant needs a profile")
        if kind == "cartwright_imabs" and not (sigma is not None and sigma >= 0):
            raise ValueError("cartwright majorant needs sigma >= 0")
        if kind == "grid" and grid is None:
            raise ValueError("grid majorant needs a GridFunction")
        if kind == "closed_form" and func is None:
            raise ValueError("closed-form majorant needs a callable")

    @classmethod
    def cartwright(cls, sigma: float = math.pi) -> MajorantSpec:
        return cls("cartwright_imabs", sigma=sigma)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "radial":
            return np.asarray(self.profile(np.abs(z)), dtype=float)
        if self.kind == "cartwright_imabs":
            return self.sigma * np.abs(z.imag)
        if self.kind == "grid":
            return self.grid(z)
        return np.asarray(self.func(z), dtype=float)

    def measure(self):
        if self._measure is None:
            if self.kind == "radial":
                self._measure = riesz_radial_counting(self.profile)
            elif self.kind == "cartwright_imabs":
                self._measure = build_distribution(density=self.sigma / math.pi)
            elif self.kind == "grid":
                self._measure = riesz_fd(self.grid, feature_scale=self._feature_scale)
            else:
                raise ValueError("closed-form majorant: supply the Riesz measure explicitly")
        return self._measure

    def circle_mean(self, t: float, *, tol: float = TOL_QUAD) -> float:
        if self.kind == "radial":
            return float(self.profile(t))
        if self.kind == "cartwright_imabs":
            return 2.0 * self.sigma * t / math.pi
        return trapezoid_circle_mean(self, 0.0, t, tol=tol)[0]

    def growth_sample(self, radii=(1e1, 1e2, 1e3, 1e4), n_ang: int = 16) -> float:
        """``max M(z)/|z|`` over sampled circles (finite for at most linear growth)."""
        a = 2.0 * math.pi * (np.arange(n_ang) + 0.5) / n_ang
        z = (np.asarray(radii)[:, None] * np.exp(1j * a)[None, :]).ravel()
        return float(np.max(self(z) / np.abs(z)))

    def to_json(self) -> dict:
        if self.kind == "radial":
            return {"kind": "radial", "profile": self.profile.to_json()}
        if self.kind == "cartwright_imabs":
            return {"kind": "cartwright_imabs", "sigma": self.sigma}
        if self.kind == "grid":
            return {"kind": "grid", "shape": list(self.grid.values.shape), "h": self.grid.h}
        return {"kind": "closed_form"}


def majorant_spec_from_json(spec: dict) -> MajorantSpec:
    kind = spec.get("kind")
    if kind == "radial":
        return MajorantSpec("radial", profile=majorant_from_json(spec["profile"]))
    if kind == "cartwright_imabs":
        return MajorantSpec.cartwright(spec.get("sigma", math.pi))
    raise ValueError(f"majorant kind {kind!r} is not available from JSON")


# --------------------------------------------------------------------------
# functionals
# --------------------------------------------------------------------------

@dataclass
class FunctionalValue:
    value: float
    sum_part: float
    integral_part: float
    n_terms: int
    tail_bound: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def j(x):
            return x if math.isfinite(x) else str(x)
        return {"value": j(self.value), "sum": j(self.sum_part),
                "integral": j(self.integral_part), "terms": self.n_terms,
                "tail_bound": j(self.tail_bound), **self.diagnostics}


@lru_cache(maxsize=256)
def _jensen_member(V, tol: float) -> tuple:
    if isinstance(V, RadialLog) and V.provably_member:
        return True, 1.0 - V.weight
    rep = verify_jensen_membership(V, tol=tol)
    return rep.passed, rep.slack


@lru_cache(maxsize=256)
def _rp0_member(phi, tol: float) -> tuple:
    # log-cusp members are scale invariant: phi_R(x) = phi_1(x / R), and the
    # kernel inequality at (x0, r) maps to (x0 / R, r / R)
    if isinstance(phi, LogCusp) and phi.R != 1.0:
        return _rp0_member(LogCusp(phi.lam, 1.0), tol)
    rep = verify_rp0_membership(phi, tol=tol)
    return rep.passed, rep.min_slack


def jensen_member(V, tol: float = 1e-6) -> tuple:
    """``(passed, slack)`` for a Jensen potential, cached."""
    return _jensen_member(V, tol)


def rp0_member(phi, tol: float = 1e-6) -> tuple:
    """``(passed, slack)`` for a test function, cached (log cusps are normalized to R = 1)."""
    return _rp0_member(phi, tol)


def _check_zeros(Z: ZeroSequence):
    if Z.contains_origin():
        raise ValueError("the zero sequence must avoid the origin")


def _off_origin(func):
    def g(t):
        return 0.0 if t == 0 else float(func(t))
    return g


def jensen_functional(V, Z: ZeroSequence, nu, *, check_membership: bool = True,
                      tol: float = TOL_QUAD, tol_member: float = 1e-6) -> FunctionalValue:
    """``sum_k m_k V(z_k) - int V dnu`` for a radial, line or grid Riesz measure.

    V vanishes for ``|z| >= R_V``, so only zeros with ``|z_k| < R_V`` enter
    the sum and the integral runs over ``D(R_V)`` minus the origin.
    """
    _check_zeros(Z)
    if check_membership:
        ok, slack = jensen_member(V, tol_member)
        if not ok:
            raise ValueError(f"potential fails Jensen membership (slack {slack:.3g})")
    R_V = float(V.R_V)
    pts, mult = Z.within(R_V)
    s = float(np.sum(mult * np.asarray(V(pts), dtype=float))) if len(pts) else 0.0
    radii = tuple(getattr(V, "critical_radii", ()))
    if isinstance(nu, RadialMeasure):
        g = V.circle_mean
        integral, info = stieltjes_radial(lambda t: float(g(t)), nu, (0.0, R_V), tol=tol,
                                          points=radii, full_output=True)
        diag = info.to_dict()
    elif isinstance(nu, LineMeasure):
        hints = radii + tuple(-r for r in radii)
        integral, info = stieltjes_line(_off_origin(V), nu, (-R_V, R_V), tol=tol, points=hints,
                                        full_output=True)
        diag = info.to_dict()
    elif isinstance(nu, RieszGrid):
        apts, w = nu.atoms()
        keep = (apts != 0) & (np.abs(apts) < R_V)
        integral = float(np.sum(w[keep] * np.asarray(V(apts[keep]), dtype=float)))
        diag = {"grid_cells": int(keep.sum()), "grid_warnings": list(nu.warnings)}
    else:
        raise TypeError(f"unsupported measure {type(nu).__name__}")
    return FunctionalValue(float(s - integral), s, float(integral), int(np.sum(mult)), 0.0, diag)


def cartwright_functional(phi, Z: ZeroSequence, nu: LineMeasure, *,
                          check_membership: bool = True, tol: float = TOL_QUAD,
                          tol_member: float = 1e-6) -> FunctionalValue:
    """``sum_k m_k (P phi)(z_k) - int phi dnu_R``.

    Zeros with ``|z_k| > 2 R_phi`` are not summed; there
    ``(P phi)(z) <= (4/pi) (int phi) |Im z| / |z|^2``, and the resulting
    bound on the omitted part is reported as ``tail_bound``.
    """
    _check_zeros(Z)
    if check_membership:
        ok, slack = rp0_member(phi, tol_member)
        if not ok:
            raise ValueError(f"test function fails the kernel inequality (slack {slack:.3g})")
    lo, hi = phi.support
    R = max(-lo, hi)
    cutoff = 2.0 * R
    pts, mult = Z.within(cutoff, closed=True)
    real = pts.imag == 0
    s = float(np.sum(mult[real] * np.asarray(phi(pts.real[real]), dtype=float)))
    for z, m in zip(pts[~real], mult[~real]):
        s += float(m) * poisson_extend(phi, z, tol=tol)

    mass = float(phi.integral)
    if Z.rule is None:
        far = np.abs(Z.points) > cutoff
        weight = float(np.sum(Z.multiplicities[far] * np.abs(Z.points[far].imag)
                              / np.abs(Z.points[far]) ** 2))
    else:
        rule = Z.rule
        sin = abs(rule.direction.imag)
        k_cut = rule.index_bound(cutoff)
        weight = 0.0 if sin == 0 else sin * rule.tail_power_sum(k_cut, 1.0)
    tail = 4.0 / math.pi * mass * weight if weight else 0.0

    integral, info = stieltjes_line(phi, nu, (lo, hi), tol=tol, full_output=True)
    return FunctionalValue(float(s - integral), s, float(integral), int(np.sum(mult)), tail,
                           info.to_dict())


# --------------------------------------------------------------------------
# families and the scan
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Family:
    """Test family scanned by :func:`estimate_sup`.

    * ``log_cusp``: ``lam log+(R/|x|)``, ``lam`` in [0, 1];
    * ``radial_log``: ``sum_j lam_j log+(R r_j/|z|)`` over ``ratios`` r_j,
      weights in the simplex ``sum lam_j <= 1``;
    * ``avg_green``: ring averages of Green functions of ``D(R)``, with
      the center modulus, ring radius and weight searched coordinate-wise.
    """

    variant: str
    ratios: tuple = (1.0,)
    restarts: int = 3

    def __post_init__(self):
        if self.variant not in ("log_cusp", "radial_log", "avg_green"):
            raise ValueError(f"unknown family {self.variant!r}")
        ratios = tuple(float(r) for r in self.ratios)
        if not ratios or any(not 0 < r <= 1 for r in ratios):
            raise ValueError("ratios must lie in (0, 1]")
        object.__setattr__(self, "ratios", ratios)
        if self.restarts < 1:
            raise ValueError("restarts must be positive")

    @property
    def functional(self) -> str:
        return "cartwright" if self.variant == "log_cusp" else "jensen"

    def param_names(self) -> tuple:
        if self.variant == "log_cusp":
            return ("lambda",)
        if self.variant == "radial_log":
            return tuple(f"lambda_{j}" for j in range(len(self.ratios)))
        return ("center", "rho", "lambda")

    def to_json(self) -> dict:
        return {"variant": self.variant, "ratios": list(self.ratios), "restarts": self.restarts}


def golden_max(f, a: float, b: float, *, iters: int = 40, xtol: float = 1e-10):
    """Golden-section search for a max on [a, b]; the endpoints are compared too."""
    best = max(((f(a), a), (f(b), b)), key=lambda p: p[0])
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a <= xtol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    inner = (fc, c) if fc >= fd else (fd, d)
    v, x = max(best, inner, key=lambda p: p[0])
    return float(v) + 0.0, float(x)


def simplex_ascent(f, n: int, *, restarts: int = 3, sweeps: int = 20, tol: float = 1e-12):
    """Projected coordinate ascent of f over ``{lam >= 0, sum lam <= 1}``."""
    starts = [np.full(n, 1.0 / n)]
    starts += [np.eye(n)[j % n] for j in range(restarts - 1)]
    best_val, best_lam = -math.inf, None
    for lam0 in starts[:restarts]:
        lam = lam0.copy()
        val = f(lam)
        for _ in range(sweeps):
            improved = False
            for j in range(n):
                room = 1.0 - (lam.sum() - lam[j])

                def along(x, j=j):
                    trial = lam.copy()
                    trial[j] = x
                    return f(trial)

                v, x = golden_max(along, 0.0, max(room, 0.0))
                if v > val + tol:
                    lam[j], val, improved = x, v, True
            if not improved:
                break
        if val > best_val:
            best_val, best_lam = val, lam
    return best_val, best_lam


@dataclass
class CriterionReport:
    functional: str
    family: dict
    rows: list
    sup_so_far: list
    slope: float
    verdict: str
    diagnostics: dict

    @property
    def sup(self) -> float:
        return self.sup_so_far[-1] if self.sup_so_far else -math.inf

    def values(self) -> np.ndarray:
        return np.array([r["value"] for r in self.rows], dtype=float)

    def to_dict(self) -> dict:
        def j(x):
            return x if isinstance(x, float) and math.isfinite(x) else str(x)
        return {"functional": self.functional, "family": self.family, "verdict": self.verdict,
                "slope": j(self.slope), "sup": j(self.sup),
                "sup_so_far": [j(x) for x in self.sup_so_far],
                "rows": [{k: (j(v) if isinstance(v, float) else v) for k, v in r.items()}
                         for r in self.rows],
                "diagnostics": self.diagnostics}

    def csv_columns(self) -> list:
        params = self.family.get("params", [])
        return ["R", *params, "value", "slack"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        cols = self.csv_columns()
        w.writerow(cols)
        for r in self.rows:
            w.writerow([repr(float(r[c])) if isinstance(r.get(c), float) else r.get(c, "")
                        for c in cols])
        return buf.getvalue()


def _scan_point(functional: str, family: Family, Z, nu, R: float, tols: Tolerances) -> dict:
    """Inner maximization at one support radius."""
    row = {"R": R}
    if family.variant == "log_cusp":
        phi = LogCusp(1.0, R)
        ok, slack = rp0_member(phi, tols.tol_member)
        if not ok:
            return {**row, "lambda": math.nan, "value": math.nan, "slack": slack,
                    "value_unit": math.nan, "error": "LogCusp fails membership"}
        fv = cartwright_functional(phi, Z, nu, check_membership=False, tol=tols.tol_quad)
        # linear in lambda
        val, lam = golden_max(lambda x: x * fv.value, 0.0, 1.0)
        return {**row, "lambda": lam, "value": val, "slack": slack, "value_unit": fv.value,
                "tail_bound": fv.tail_bound, "terms": fv.n_terms}

    if family.variant == "radial_log":
        units = []
        for ratio in family.ratios:
            V = RadialLog(((1.0, R * ratio),), R_V=R)
            units.append(jensen_functional(V, Z, nu, check_membership=False,
                                           tol=tols.tol_quad).value)
        units = np.array(units)
        # the functional is linear in the weights
        val, lam = simplex_ascent(lambda l: float(l @ units), len(units),
                                  restarts=family.restarts)
        out = {**row, "value": val, "slack": 1.0 - float(lam.sum()),
               "value_unit": float(units.max())}
        out.update({f"lambda_{j}": float(x) for j, x in enumerate(lam)})
        return out

    # avg_green: coordinates s = |w|/R, p = rho/(R - |w|), lam
    state = {"s": 0.5, "p": 0.5, "lam": 1.0}
    notes = []

    def evaluate(s, p, lam):
        try:
            V = AveragedGreen(R, R * s, R * (1.0 - s) * p, lam)
        except ValueError:
            return -math.inf
        ok, _ = jensen_member(V, tols.tol_member)
        if not ok:
            return -math.inf
        return jensen_functional(V, Z, nu, check_membership=False, tol=tols.tol_quad).value

    best = evaluate(**state)
    for name, lo, hi in (("s", 0.05, 0.95), ("p", 0.05, 0.95), ("lam", 0.0, 1.0)):
        def along(x, name=name):
            return evaluate(**{**state, name: x})
        v, x = golden_max(along, lo, hi, iters=12, xtol=1e-3)
        if v > best:
            best, state[name] = v, x
    if not math.isfinite(best):
        notes.append("no ring-averaged Green potential passed membership")
    return {**row, "center": state["s"] * R, "rho": state["p"] * R * (1 - state["s"]),
            "lambda": state["lam"], "value": best, "slack": math.nan,
            **({"error": notes[0]} if notes else {})}


def _slope(R: np.ndarray, v: np.ndarray) -> float:
    x = np.log(R)
    x = x - x.mean()
    return float(np.dot(x, v - v.mean()) / np.dot(x, x))


def _classify(R, vals, tols: Tolerances) -> tuple[str, float, str]:
    if len(vals) < SCAN_WINDOW:
        return "Inconclusive", math.nan, f"fewer than {SCAN_WINDOW} scan points"
    v = np.asarray(vals[-SCAN_WINDOW:], dtype=float)
    r = np.asarray(R[-SCAN_WINDOW:], dtype=float)
    if not np.all(np.isfinite(v)):
        return "Inconclusive", math.nan, "non-finite values in the top scan window"
    slope = _slope(r, v)
    if slope > tols.slope_min and np.all(np.diff(v) > 0):
        return "Diverging", slope, "positive slope, strictly increasing"
    if abs(slope) <= tols.slope_tol:
        return "Bounded", slope, "flat slope"
    return "Inconclusive", slope, "slope between the bounded and diverging regimes"


def estimate_sup(functional: str, family: Family, Z: ZeroSequence, nu, *, R0: float = 2.0,
                 i_max: int | None = None, tolerances: Tolerances | None = None,
                 threads: int = 1) -> CriterionReport:
    """Scan ``R = R0 2^i``, ``i = 0..i_max``, maximizing the inner family parameters.

    A Diverging verdict is emitted only after the maximizing member passes
    membership again at a tenth of the membership tolerance.
    """
    tols = tolerances or Tolerances()
    i_max = tols.i_max if i_max is None else int(i_max)
    if functional not in ("jensen", "cartwright"):
        raise ValueError(f"unknown functional {functional!r}")
    if functional != family.functional:
        raise ValueError(f"family {family.variant!r} belongs to the {family.functional} functional")
    _check_zeros(Z)
    radii = [R0 * 2.0**i for i in range(i_max + 1)]

    def run(R):
        try:
            return _scan_point(functional, family, Z, nu, R, tols)
        except (ValueError, ArithmeticError) as exc:
            return {"R": R, "value": math.nan, "slack": math.nan, "error": str(exc)}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, radii))
    else:
        rows = [run(R) for R in radii]

    vals = [r["value"] for r in rows]
    sup, cur = [], -math.inf
    for v in vals:
        if math.isfinite(v):
            cur = max(cur, v)
        sup.append(cur)
    diag = {"errors": [r["error"] for r in rows if "error" in r], "R0": R0, "i_max": i_max,
            "tolerances": tols.to_dict(), "window": SCAN_WINDOW}
    if not any(math.isfinite(v) for v in vals):
        verdict, slope, why = "Inconclusive", math.nan, "no finite functional value"
    else:
        verdict, slope, why = _classify(radii, vals, tols)
    if verdict == "Diverging":
        ok, slack = _recheck(family, rows[-1], tols.tol_member / 10.0)
        diag["recheck"] = {"passed": ok, "slack": slack, "tol": tols.tol_member / 10.0}
        if not ok:
            verdict, why = "Inconclusive", "maximizer failed the tightened membership check"
    diag["reason"] = why
    fam = {**family.to_json(), "params": list(family.param_names())}
    return CriterionReport(functional, fam, rows, sup, slope, verdict, diag)


def _recheck(family: Family, row: dict, tol: float) -> tuple:
    R = row["R"]
    if family.variant == "log_cusp":
        rep = verify_rp0_membership(LogCusp(row["lambda"], 1.0), tol=tol)
        return rep.passed, rep.min_slack
    if family.variant == "radial_log":
        terms = tuple((row[f"lambda_{j}"], R * r) for j, r in enumerate(family.ratios)
                      if row[f"lambda_{j}"] > 0) or ((0.0, R),)
        rep = verify_jensen_membership(RadialLog(terms, R_V=R), tol=tol)
        return rep.passed, rep.slack
    V = AveragedGreen(R, row["center"], row["rho"], row["lambda"])
    rep = verify_jensen_membership(V, tol=tol)
    return rep.passed, rep.slack


# --------------------------------------------------------------------------
# smoothing
# --------------------------------------------------------------------------

def smooth_majorant(M, z: complex, N: float, mode: str = "disk", *,
                    tol: float = TOL_QUAD, full_output: bool = False):
    """Circle mean of M around z with radius ``(1 + |z|^N)^-1`` (disk mode) or,
    in strip mode, radius ``(1 + |Re z|^N)^-1`` unless ``|Im z| >= |Re z|^-N``,
    where M(z) is returned unchanged."""
    if not N > 0:
        raise ValueError("N must be positive")
    z = complex(z)
    if mode == "disk":
        delta = 1.0 / (1.0 + abs(z) ** N)
    elif mode == "strip":
        x = abs(z.real)
        threshold = math.inf if x == 0 else x ** (-N)
        if abs(z.imag) >= threshold:
            val = float(M(z))
            return (val, {"smoothed": False}) if full_output else val
        delta = 1.0 / (1.0 + x**N)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    mean, info = trapezoid_circle_mean(M, z, delta, tol=tol)
    info = {**info, "smoothed": True, "radius": delta, "minus_inf": math.isinf(mean) and mean < 0}
    return (mean, info) if full_output else mean
