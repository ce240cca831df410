"""Jensen potentials: nonnegative subharmonic functions on the punctured plane
bounded by ``log+(R_V/|z|)``.

Two families are provided.  :class:`RadialLog` is a member by construction
whenever its weights sum to at most one.  :class:`AveragedGreen` is a ring
average of Green functions of a disk; it is only usable after
:func:`verify_jensen_membership` accepts it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numeric import trapezoid_circle_mean
from .tolerances import TOL_MEMBER, TOL_QUAD

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def green_disk(z, w: complex, R: float):
    """Green function of the disk ``D(R)`` with pole at ``w``; 0 outside the disk."""
    w = complex(w)
    if not R > 0 or abs(w) >= R:
        raise ValueError(f"pole {w} must lie inside D({R})")
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        g = np.log(np.abs(R * R - z * np.conj(w))) - np.log(R * np.abs(z - w))
    g = np.where(np.abs(z) >= R, 0.0, g)
    return float(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class RadialLog:
    """``V(z) = sum_j lam_j * log+(R_j / |z|)``."""

    terms: tuple
    R_V: float | None = None

    def __post_init__(self):
        terms = tuple((float(lam), float(R)) for lam, R in self.terms)
        if not terms:
            raise ValueError("RadialLog needs at least one term")
        for lam, R in terms:
            if lam < 0 or not R > 0:
                raise ValueError(f"bad term (lambda={lam}, R={R})")
        object.__setattr__(self, "terms", terms)
        rmax = max(R for _, R in terms)
        if self.R_V is None:
            object.__setattr__(self, "R_V", rmax)
        elif self.R_V < rmax:
            raise ValueError("declared R_V is smaller than a term radius")

    @property
    def weight(self) -> float:
        return sum(lam for lam, _ in self.terms)

    @property
    def provably_member(self) -> bool:
        return self.weight <= 1.0 + 1e-12

    def radial(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        with np.errstate(divide="ignore"):
            for lam, R in self.terms:
                out = out + lam * np.maximum(math.log(R) - np.log(t), 0.0)
        return float(out) if out.ndim == 0 else out

    circle_mean = radial

    def __call__(self, z):
        return self.radial(np.abs(np.asarray(z, dtype=complex)))

    def critical_points(self) -> list[complex]:
        pts = []
        for _, R in self.terms:
            pts += [complex(R), R * complex(math.cos(1.0), math.sin(1.0))]
        return pts

    @property
    def critical_radii(self) -> tuple:
        return tuple(R for _, R in self.terms)

    def to_json(self) -> dict:
        return {"variant": "radial_log", "terms": [list(t) for t in self.terms], "R_V": self.R_V}


@dataclass(frozen=True)
class AveragedGreen:
    """``lam`` times the mean over the ring ``|zeta - w| = rho`` of ``g_{D(R)}(z, zeta)``."""

    R: float
    w: complex
    rho: float
    lam: float = 1.0
    R_V: float | None = None
    n_ring: int = field(default=256, compare=False)

    def __post_init__(self):
        w = complex(self.w)
        object.__setattr__(self, "w", w)
        if not self.R > 0 or not 0 < abs(w) < self.R:
            raise ValueError("center w must lie in D(R) minus the origin")
        if not 0 < self.rho < self.R - abs(w):
            raise ValueError("ring radius must be in (0, dist(w, boundary))")
        if not self.lam > 0:
            raise ValueError("weight lambda must be positive")
        if self.R_V is None:
            object.__setattr__(self, "R_V", float(self.R))
        elif self.R_V < self.R:
            raise ValueError("declared R_V is smaller than R")

    provably_member = False

    def __call__(self, z):
        # closed form of the ring mean: mean log|z - zeta| = log max(|z - w|, rho),
        # and R^2 - z conj(zeta) never comes within rho|z| of 0 inside D(R)
        z = np.asarray(z, dtype=complex)
        R, w = self.R, self.w
        with np.errstate(divide="ignore"):
            g = (np.log(np.abs(R * R - z * np.conj(w))) - math.log(R)
                 - np.log(np.maximum(np.abs(z - w), self.rho)))
        out = self.lam * np.where(np.abs(z) >= R, 0.0, g)
        return float(out) if out.ndim == 0 else out

    def ring_mean_trapezoid(self, z: complex, *, tol: float = TOL_QUAD, n0: int = 64) -> float:
        """Same value as ``self(z)`` by trapezoid averaging of :func:`green_disk`."""
        z = complex(z)
        R = self.R

        def green_at(zeta):
            with np.errstate(divide="ignore"):
                return np.log(np.abs(R * R - z * np.conj(zeta))) - np.log(R * np.abs(z - zeta))

        mean, _ = trapezoid_circle_mean(green_at, self.w, self.rho, tol=tol, n0=n0, n_max=2**18)
        return self.lam * mean

    def circle_mean(self, t):
        """Mean of V over ``|z| = t``: Green means are ``log(R / max(t, |zeta|))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        alpha = 2.0 * math.pi * np.arange(self.n_ring) / self.n_ring
        zeta_mod = np.abs(self.w + self.rho * np.exp(1j * alpha))
        m = np.maximum(t[:, None], zeta_mod[None, :])
        out = self.lam * np.mean(np.log(self.R / m), axis=1)
        out = np.where(t >= self.R, 0.0, out)
        return float(out[0]) if out.size == 1 else out

    radial = circle_mean

    def critical_points(self) -> list[complex]:
        w, rho = self.w, self.rho
        u = w / abs(w)
        return [w + rho * u, w - rho * u, w + 1j * rho * u, self.R * u]

    @property
    def critical_radii(self) -> tuple:
        return (abs(self.w) - self.rho, abs(self.w) + self.rho, self.R)

    def to_json(self) -> dict:
        return {"variant": "avg_green", "R": self.R, "w": [self.w.real, self.w.imag],
                "rho": self.rho, "lambda": self.lam}


def potential_from_json(spec: dict):
    variant = spec.get("variant")
    if variant == "radial_log":
        return RadialLog(tuple(tuple(t) for t in spec["terms"]), spec.get("R_V"))
    if variant == "avg_green":
        w = spec["w"]
        return AveragedGreen(spec["R"], complex(w[0], w[1]), spec["rho"], spec.get("lambda", 1.0),
                             spec.get("R_V"))
    raise ValueError(f"unknown Jensen potential variant {variant!r}")


def eval_jensen(V, z: complex, method: str = "closed") -> float:
    """V(z) for z != 0.  ``method="trapezoid"`` averages AveragedGreen numerically."""
    z = complex(z)
    if z == 0:
        raise ValueError("Jensen potentials are not evaluated at the origin")
    if method == "trapezoid" and isinstance(V, AveragedGreen):
        return 0.0 if abs(z) >= V.R else V.ring_mean_trapezoid(z)
    if method not in ("closed", "trapezoid"):
        raise ValueError(f"unknown method {method!r}")
    return float(V(z))


@dataclass
class JensenMembershipReport:
    bound_violation: float
    worst_bound_point: complex
    submean_violation: float
    worst_circle: tuple
    n_grid: int
    n_circles: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.bound_violation <= self.tol and self.submean_violation <= self.tol

    @property
    def slack(self) -> float:
        return -max(self.bound_violation, self.submean_violation)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "bound_violation": self.bound_violation,
                "worst_bound_point": [self.worst_bound_point.real, self.worst_bound_point.imag],
                "submean_violation": self.submean_violation,
                "worst_circle": [self.worst_circle[0].real, self.worst_circle[0].imag,
                                 self.worst_circle[1]],
                "n_grid": self.n_grid, "n_circles": self.n_circles, "tol": self.tol}


def default_grid(R_V: float, n_rad: int = 48, n_ang: int = 24) -> np.ndarray:
    r = np.geomspace(R_V * 1e-4, 2.0 * R_V, n_rad)
    a = 2.0 * math.pi * (np.arange(n_ang) + 0.5) / n_ang
    return (r[:, None] * np.exp(1j * a[None, :])).ravel()


def default_circles(V, n: int = 32) -> list[tuple[complex, float]]:
    """``n`` generic circles with log-spaced radii, plus circles at critical points."""
    R_V = V.R_V
    mods = np.geomspace(0.02 * R_V, 1.5 * R_V, n)
    fracs = np.geomspace(0.02, 0.6, n)
    circles = [(complex(m * math.cos(GOLDEN_ANGLE * k), m * math.sin(GOLDEN_ANGLE * k)),
                float(m * f)) for k, (m, f) in enumerate(zip(mods, fracs[::-1]))]
    for p in V.critical_points():
        for frac in (0.01, 0.1):
            circles.append((complex(p), frac * abs(p)))
    return circles


def verify_jensen_membership(V, grid=None, circles=None, *, tol: float = TOL_MEMBER,
                             tol_quad: float = TOL_QUAD) -> JensenMembershipReport:
    """Check ``0 <= V <= log+(R_V/|z|)`` on a grid and sub-mean values on circles.

    Circles must avoid the origin.  The report's ``passed`` uses ``tol`` on
    both worst violations.
    """
    pts = default_grid(V.R_V) if grid is None else np.asarray(grid, dtype=complex).ravel()
    if np.any(pts == 0):
        raise ValueError("membership grid must avoid the origin")
    vals = np.asarray(V(pts), dtype=float)
    upper = np.maximum(np.log(V.R_V / np.abs(pts)), 0.0)
    viol = np.maximum(vals - upper, -vals)
    k = int(np.argmax(viol))

    circ = default_circles(V) if circles is None else list(circles)
    worst, worst_c = -math.inf, (0j, 0.0)
    for c, r in circ:
        if abs(c) <= r:
            raise ValueError(f"circle ({c}, {r}) encloses the origin")
        mean, _ = trapezoid_circle_mean(V, complex(c), float(r), tol=tol_quad, n_max=2**16)
        d = float(V(complex(c))) - mean
        if d > worst:
            worst, worst_c = d, (complex(c), float(r))
    return JensenMembershipReport(float(viol[k]), complex(pts[k]), float(worst), worst_c,
                                  int(pts.size), len(circ), tol)
