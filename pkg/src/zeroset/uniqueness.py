"""Uniqueness sets through subharmonic weights v on the exterior of a disk.

A weight v is nonnegative and subharmonic on ``|z| >= r0``, tends to 0 at
infinity and is bounded by b on ``|z| = r0``.  For ``log|f| <= M`` outside
``D(r0)`` the sum of ``v`` over the zeros of f is controlled by
``int v dnu_M``.  This module reports the pieces of that inequality and
draws the two verdicts built on it:

* :func:`must_vanish_verdict`: a sequence on which ``sum v(z_k)`` diverges while
  ``int v dnu_M`` converges must be a uniqueness set;
* :func:`tail_sum_verdict`: if ``int log|f| dnu_v`` converges, the zeros of f
  have a convergent v-sum.

The existential constants of the underlying inequality are not computed;
only its components are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._doubling import DoublingResult, doubling_limit, finite_sum
from ._numeric import quad_split, trapezoid_circle_mean
from .measures import (GridFunction, LineMeasure, RadialMeasure, RieszGrid, ZeroSequence,
                       riesz_fd, stieltjes_line_tail, stieltjes_radial_tail)
from .radial import _Integrator, circle_mean_stieltjes
from .tolerances import TOL_MEMBER, TOL_QUAD

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
SUM_TOL = 1e-10
SUM_DOUBLINGS = 20
_CHUNK = 2**20


# --------------------------------------------------------------------------
# weights v
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerV:
    """``v(z) = b (r0/|z|)^beta`` on ``|z| >= r0``.

    ``declared_b`` is the class bound checked on the boundary circle; it
    defaults to b.
    """

    b: float
    r0: float
    beta: float
    declared_b: float | None = None

    def __post_init__(self):
        if not self.b > 0 or not self.r0 > 0 or not self.beta > 0:
            raise ValueError("PowerV needs b, r0 and beta positive")
        if self.declared_b is None:
            object.__setattr__(self, "declared_b", float(self.b))

    def radial(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return self.b * (self.r0 / t) ** self.beta

    def __call__(self, z):
        return self.radial(np.abs(np.asarray(z, dtype=complex)))

    def riesz_mass(self, r1: float, r2: float) -> float:
        """``nu_v`` of the annulus ``r1 <= |z| <= r2`` (both at least r0)."""
        if r1 < self.r0 or r2 < r1:
            raise ValueError("annulus must satisfy r0 <= r1 <= r2")
        return self.beta * self.b * self.r0**self.beta * (r1 ** (-self.beta) - r2 ** (-self.beta))

    def riesz_distribution(self, t):
        """Increasing integrator whose increments are the annulus masses."""
        return -self.beta * self.b * self.r0**self.beta * np.asarray(t, dtype=float) ** (-self.beta)

    def riesz_density(self, t):
        t = np.asarray(t, dtype=float)
        return self.beta**2 * self.b * self.r0**self.beta * t ** (-self.beta - 1.0)

    @property
    def total_mass(self) -> float:
        return self.beta * self.b

    def riesz_atoms(self):
        return np.zeros(0), np.zeros(0)

    def to_json(self) -> dict:
        return {"variant": "power", "b": self.b, "r0": self.r0, "beta": self.beta,
                "declared_b": self.declared_b}


@dataclass(frozen=True)
class SampledV:
    """Radial weight, piecewise linear in ``log|z|`` through ``(radii, values)``.

    The first radius is r0; past the last radius v continues with the last
    value, so a weight that decays must end with 0.
    """

    radii: tuple = field(compare=False)
    values: tuple = field(compare=False)
    declared_b: float | None = None

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.shape != v.shape or r.size < 2:
            raise ValueError("need at least two radii with matching values")
        if not r[0] > 0 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be positive and strictly increasing")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)
        if self.declared_b is None:
            object.__setattr__(self, "declared_b", float(v[0]))

    def __hash__(self):
        return hash((self.radii.tobytes(), self.values.tobytes(), self.declared_b))

    def __eq__(self, other):
        return (isinstance(other, SampledV) and self.declared_b == other.declared_b
                and np.array_equal(self.radii, other.radii)
                and np.array_equal(self.values, other.values))

    @property
    def r0(self) -> float:
        return float(self.radii[0])

    def radial(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return np.interp(np.log(t), np.log(self.radii), self.values)

    def __call__(self, z):
        return self.radial(np.abs(np.asarray(z, dtype=complex)))

    def _log_slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(np.log(self.radii))

    def riesz_atoms(self):
        """Riesz mass of the open exterior: jumps of ``t v'(t)`` at interior and last radii."""
        s = np.concatenate([self._log_slopes(), [0.0]])
        return self.radii[1:], np.diff(s)

    def riesz_distribution(self, t):
        locs, masses = self.riesz_atoms()
        t = np.asarray(t, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        return cum[np.searchsorted(locs, t, side="right")]

    def riesz_mass(self, r1: float, r2: float) -> float:
        locs, masses = self.riesz_atoms()
        return float(np.sum(masses[(locs >= r1) & (locs <= r2)]))

    def to_json(self) -> dict:
        return {"variant": "sampled", "radii": self.radii.tolist(),
                "values": self.values.tolist(), "declared_b": self.declared_b}


def v_from_json(spec: dict):
    variant = spec.get("variant")
    if variant == "power":
        return PowerV(spec["b"], spec["r0"], spec["beta"], spec.get("declared_b"))
    if variant == "sampled":
        return SampledV(spec["radii"], spec["values"], spec.get("declared_b"))
    raise ValueError(f"unknown weight variant {variant!r}")


@dataclass
class VMembershipReport:
    min_value: float
    boundary_sup: float
    declared_b: float
    decay_ok: bool
    far_value: float
    submean_violation: float
    worst_circle: tuple
    tol: float

    @property
    def passed(self) -> bool:
        return (self.min_value >= -self.tol and self.boundary_sup <= self.declared_b + self.tol
                and self.decay_ok and self.submean_violation <= self.tol)

    def to_dict(self) -> dict:
        c, r = self.worst_circle
        return {"passed": self.passed, "min_value": self.min_value,
                "boundary_sup": self.boundary_sup, "declared_b": self.declared_b,
                "decay_ok": self.decay_ok, "far_value": self.far_value,
                "submean_violation": self.submean_violation,
                "worst_circle": [c.real, c.imag, r], "tol": self.tol}


def default_v_circles(r0: float, n: int = 32, radii=()) -> list:
    """Generic circles outside ``D(r0)``, plus small circles on each listed radius."""
    mods = r0 * np.geomspace(1.2, 1e3, n)
    out = []
    for k, m in enumerate(mods):
        c = m * complex(math.cos(GOLDEN_ANGLE * k), math.sin(GOLDEN_ANGLE * k))
        out.append((c, 0.5 * (m - r0) * (0.1 + 0.8 * (k % 4) / 3.0)))
    for t in radii:
        for frac in (0.01, 0.1):
            if t * (1 - frac) > r0:
                out.append((complex(t), frac * t))
    return out


def verify_v_membership(v, grid=None, circles=None, *, tol: float = TOL_MEMBER,
                        tol_quad: float = TOL_QUAD) -> VMembershipReport:
    """Nonnegativity, boundary bound, decay along rays, and sub-mean values on circles."""
    r0 = v.r0
    if grid is None:
        t = r0 * np.geomspace(1.0, 1e6, 60)
        a = 2.0 * math.pi * (np.arange(16) + 0.25) / 16
        grid = (t[:, None] * np.exp(1j * a)[None, :]).ravel()
    pts = np.asarray(grid, dtype=complex).ravel()
    if np.any(np.abs(pts) < r0 * (1 - 1e-12)):
        raise ValueError("membership grid must lie outside D(r0)")
    min_value = float(np.min(v(pts)))
    a = 2.0 * math.pi * np.arange(256) / 256
    boundary = float(np.max(v(r0 * np.exp(1j * a))))

    rays = r0 * np.geomspace(1.0, 1e12, 49)
    decay_ok = True
    far = 0.0
    for ang in a[::32]:
        vals = np.asarray(v(rays * np.exp(1j * ang)), dtype=float)
        far = max(far, float(vals[-1]))
        tail = vals[-8:]
        decay_ok &= bool(np.all(np.diff(tail) <= tol) and vals[-1] <= 0.5 * max(vals[0], 0.0)
                         + tol)

    circ = default_v_circles(r0, radii=getattr(v, "radii", ())[1:]) if circles is None \
        else list(circles)
    worst, worst_c = -math.inf, (0j, 0.0)
    for c, r in circ:
        if abs(c) - r < r0 * (1 - 1e-12):
            raise ValueError(f"circle ({c}, {r}) reaches into D(r0)")
        mean, _ = trapezoid_circle_mean(v, complex(c), float(r), tol=tol_quad, n_max=2**16)
        d = float(v(complex(c))) - mean
        if d > worst:
            worst, worst_c = d, (complex(c), float(r))
    return VMembershipReport(min_value, boundary, float(v.declared_b), decay_ok, far, worst,
                             worst_c, tol)


# --------------------------------------------------------------------------
# sums over zeros
# --------------------------------------------------------------------------

def zero_sum(source, func, r0: float, *, tol: float = SUM_TOL,
             max_doublings: int = SUM_DOUBLINGS) -> DoublingResult:
    """``sum m_k func(z_k)`` over zeros with ``|z_k| >= r0``.

    ``source`` is a :class:`ZeroSequence` (generated ones are summed over
    index blocks ``(2^(i-1), 2^i]``) or an oracle with ``zeros_within``
    (summed over radius blocks ``[r0 2^i, r0 2^(i+1))``).
    """
    def weighted(pts, mult):
        keep = np.abs(pts) >= r0
        if not np.any(keep):
            return 0.0
        return float(np.sum(mult[keep] * np.asarray(func(pts[keep]), dtype=float)))

    if isinstance(source, ZeroSequence):
        if source.rule is None:
            return finite_sum(weighted(source.points, source.multiplicities), len(source))

        def block(i):
            k_lo = 0 if i == 0 else 2 ** (i - 1)
            k_hi = 2**i
            total = 0.0
            for a in range(k_lo, k_hi, _CHUNK):
                total += weighted(*source.block(a, min(a + _CHUNK, k_hi)))
            return total

        return doubling_limit(block, tol=tol, max_doublings=max_doublings,
                              min_doublings=max_doublings)

    rule = getattr(source, "zeros", None)
    if isinstance(rule, ZeroSequence):
        # truncated canonical product: its zero set is finite
        pts, mult = source.zeros_within(math.inf)
        return finite_sum(weighted(pts, mult), len(pts))

    def rblock(i):
        lo, hi = r0 * 2.0**i, r0 * 2.0 ** (i + 1)
        pts, mult = source.zeros_within(hi, closed=False)
        sel = np.abs(pts) >= lo
        return weighted(pts[sel], mult[sel])

    return doubling_limit(rblock, tol=tol, max_doublings=max_doublings,
                          min_doublings=max_doublings)


# --------------------------------------------------------------------------
# inequality components
# --------------------------------------------------------------------------

@dataclass
class VInequalityComponents:
    lhs: DoublingResult
    rhs_integral: DoublingResult
    rhs_alternative: DoublingResult | None
    u_at_z0: float
    precondition: dict
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def part(res):
            if res is None:
                return None
            return {**res.to_dict(), "finite": res.convergent}
        return {"lhs": part(self.lhs), "rhs_integral": part(self.rhs_integral),
                "rhs_alternative": part(self.rhs_alternative), "u_at_z0": self.u_at_z0,
                "precondition": self.precondition, "notes": self.notes}


def _sample_exterior(r0: float, r_max: float, n_rad: int = 40, n_ang: int = 32) -> np.ndarray:
    t = np.geomspace(r0 * 1.001, r_max, n_rad)
    a = 2.0 * math.pi * (np.arange(n_ang) + 0.37) / n_ang
    return (t[:, None] * np.exp(1j * a)[None, :]).ravel()


def _v_tail_integral(v, nu, r0: float, tol: float) -> DoublingResult:
    if isinstance(nu, RadialMeasure):
        return stieltjes_radial_tail(lambda t: float(v.radial(t)), nu, r0, tol=tol,
                                     points=tuple(getattr(v, "radii", ())))
    if isinstance(nu, LineMeasure):
        return stieltjes_line_tail(lambda t: float(v.radial(abs(t))), nu, r0, tol=tol)
    if isinstance(nu, RieszGrid):
        pts, w = nu.atoms()
        keep = np.abs(pts) >= r0
        res = finite_sum(float(np.sum(w[keep] * v(pts[keep]))), int(keep.sum()))
        return res
    raise TypeError(f"unsupported measure {type(nu).__name__}")


def _majorant_vs_v(v, M, r0: float, tol: float) -> DoublingResult:
    """``int_{|z| >= r0} M dnu_v``: circle means of M against the radial Riesz measure of v."""
    if isinstance(v, PowerV):
        def block(i):
            lo, hi = r0 * 2.0**i, r0 * 2.0 ** (i + 1)
            return quad_split(lambda t: M.circle_mean(t) * float(v.riesz_density(t)), lo, hi,
                              (), tol)[0]
        return doubling_limit(block, tol=tol)
    locs, masses = v.riesz_atoms()
    sel = locs >= r0
    return finite_sum(float(sum(m * M.circle_mean(t) for t, m in zip(locs[sel], masses[sel]))),
                      int(sel.sum()))


def v_inequality_components(v, u_source, M, r0: float | None = None, z0: complex = 0.0, *,
                            tol: float = TOL_QUAD, check_radius: float | None = None,
                            check_tol: float = 1e-9) -> VInequalityComponents:
    """Components of the v-inequality for ``u = log|f|`` (oracle) or a sampled u (grid).

    ``M`` is a :class:`~zeroset.criteria.MajorantSpec`.  The precondition
    ``u <= M`` is checked on samples of the exterior of ``D(r0)``; a
    violation raises ``ValueError`` carrying the worst point.
    """
    r0 = float(v.r0 if r0 is None else r0)
    if r0 < v.r0:
        raise ValueError("r0 lies below the weight's domain")
    notes = []
    if isinstance(u_source, GridFunction):
        pts = u_source.nodes.ravel()
        pts = pts[np.abs(pts) >= r0]
        u_vals = u_source.values.ravel()[np.abs(u_source.nodes.ravel()) >= r0]
    else:
        pts = _sample_exterior(r0, check_radius or 64.0 * r0)
        u_vals = np.asarray(u_source.log_abs(pts), dtype=float)
    excess = u_vals - np.asarray(M(pts), dtype=float)
    k = int(np.argmax(excess))
    pre = {"samples": int(pts.size), "worst_excess": float(excess[k]),
           "worst_point": [float(pts[k].real), float(pts[k].imag)]}
    if excess[k] > check_tol:
        raise ValueError(f"u exceeds M at {pts[k]} by {excess[k]:.3g}")

    if isinstance(u_source, GridFunction):
        u0 = float(u_source(complex(z0)))
        grid = riesz_fd(u_source)
        apts, w = grid.atoms()
        keep = np.abs(apts) >= r0
        lhs = finite_sum(float(np.sum(w[keep] * v(apts[keep]))), int(keep.sum()))
        notes.append("lhs from grid Laplacian masses, truncated to the grid extent")
        notes.extend(grid.warnings)
    else:
        u0 = float(u_source.log_abs(complex(z0)))
        lhs = zero_sum(u_source, v, r0)
    if not math.isfinite(u0):
        raise ValueError("u(z0) = -inf; choose z0 off the zero set")

    rhs = _v_tail_integral(v, M.measure(), r0, tol)
    alt = _majorant_vs_v(v, M, r0, tol)
    notes.append("existential constants of the inequality are not computed")
    return VInequalityComponents(lhs, rhs, alt, u0, pre, notes)


# --------------------------------------------------------------------------
# verdicts
# --------------------------------------------------------------------------

@dataclass
class Verdict:
    verdict: str
    details: dict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, **self.details}


def _require_member(v, tol: float):
    rep = verify_v_membership(v, tol=tol)
    if not rep.passed:
        raise ValueError(f"weight v fails membership: {rep.to_dict()}")
    return rep


def must_vanish_verdict(Z: ZeroSequence, v, nu_M, *, tol: float = TOL_QUAD,
                 tol_member: float = TOL_MEMBER) -> Verdict:
    """MustVanish when ``int v dnu_M`` converges and ``sum v(z_k)`` diverges."""
    rep = _require_member(v, tol_member)
    integral = _v_tail_integral(v, nu_M, v.r0, tol)
    total = zero_sum(Z, v, v.r0)
    verdict = "MustVanish" if integral.convergent and total.divergent else "NoConclusion"
    return Verdict(verdict, {"integral": integral.to_dict(), "zero_sum": total.to_dict(),
                             "membership": rep.to_dict()})


def tail_sum_verdict(f, v, *, tol: float = 1e-6, tol_member: float = TOL_MEMBER) -> Verdict:
    """TailSumFinite when ``int_{|z| >= r0} log|f| dnu_v`` converges.

    The zero sum of v is then computed and must itself converge; if it does
    not, the verdict is ``Inconsistent`` (a numerical failure: a finite tail
    sum always implies a finite zero sum).
    """
    rep = _require_member(v, tol_member)
    locs, masses = v.riesz_atoms()
    integrator = _Integrator(v.riesz_distribution if isinstance(v, PowerV)
                             else (lambda t: np.zeros(np.shape(t))), (locs, masses))
    hyp, stats = circle_mean_stieltjes(f, integrator, v.r0, tol=tol)
    details = {"hypothesis_integral": hyp.to_dict(), "circle_means": stats["circle_means"],
               "perturbed_radii": stats["perturbed_radii"], "membership": rep.to_dict()}
    if not hyp.convergent:
        return Verdict("HypothesisFails", details)
    total = zero_sum(f, v, v.r0)
    details["zero_sum"] = total.to_dict()
    details["value"] = total.value
    return Verdict("TailSumFinite" if total.convergent else "Inconsistent", details)
