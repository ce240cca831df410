"""Test functions on the punctured real line, the averaging kernel that defines
their admissibility, and their Poisson extension to the plane.

``kernel_K(., r)`` is the mean over the circle of radius r of the Poisson
kernel, so the admissibility inequality says that the Poisson extension
obeys the sub-mean-value inequality at real points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numeric import quad_split
from .tolerances import TOL_MEMBER, TOL_QUAD


@dataclass(frozen=True)
class LogCusp:
    """``phi(x) = lam * log+(R / |x|)``."""

    lam: float
    R: float

    def __post_init__(self):
        if self.lam < 0 or not self.R > 0:
            raise ValueError("LogCusp needs lam >= 0 and R > 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = self.lam * np.maximum(math.log(self.R) - np.log(np.abs(x)), 0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def support(self) -> tuple:
        return (-self.R, self.R)

    @property
    def breakpoints(self) -> tuple:
        return (-self.R, 0.0, self.R)

    @property
    def integral(self) -> float:
        return 2.0 * self.lam * self.R

    def to_json(self) -> dict:
        return {"variant": "log_cusp", "lambda": self.lam, "R": self.R}


@dataclass(frozen=True)
class SampledTest:
    """Piecewise-linear through ``(xs, vals)``, zero outside ``[xs[0], xs[-1]]``."""

    xs: np.ndarray = field(compare=False)
    vals: np.ndarray = field(compare=False)
    R: float = 1.0

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vals = np.asarray(self.vals, dtype=float)
        if xs.shape != vals.shape or xs.size < 2:
            raise ValueError("need at least two samples with matching values")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("sample abscissae must be strictly increasing")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("sampled test function must be finite and nonnegative")
        if xs[0] < -self.R or xs[-1] > self.R:
            raise ValueError("samples extend beyond the declared support radius")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vals", vals)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.xs, self.vals)
        out = np.where((x < self.xs[0]) | (x > self.xs[-1]), 0.0, out)
        return float(out) if out.ndim == 0 else out

    def __hash__(self):
        return hash((self.xs.tobytes(), self.vals.tobytes(), self.R))

    def __eq__(self, other):
        return (isinstance(other, SampledTest) and self.R == other.R
                and np.array_equal(self.xs, other.xs) and np.array_equal(self.vals, other.vals))

    @property
    def support(self) -> tuple:
        return (-self.R, self.R)

    @property
    def breakpoints(self) -> tuple:
        return tuple(self.xs)

    @property
    def integral(self) -> float:
        return float(np.trapz(self.vals, self.xs))

    @property
    def max(self) -> float:
        return float(np.max(self.vals))

    def to_json(self) -> dict:
        return {"variant": "sampled", "xs": self.xs.tolist(), "vals": self.vals.tolist(),
                "R": self.R}


def testfn_from_json(spec: dict):
    variant = spec.get("variant")
    if variant == "log_cusp":
        return LogCusp(spec.get("lambda", 1.0), spec["R"])
    if variant == "sampled":
        return SampledTest(spec["xs"], spec["vals"], spec["R"])
    raise ValueError(f"unknown test function variant {variant!r}")


def kernel_K(x, r: float):
    """``(1/pi^2) (1/x) log|(x+r)/(x-r)|``; ``2/(pi^2 r)`` at 0 and +inf at ``x = +-r``."""
    if not r > 0:
        raise ValueError("kernel radius must be positive")
    x = np.asarray(x, dtype=float)
    # log|(x+r)/(x-r)| = 2 atanh(min(|x|, r) / max(|x|, r)) * sign(x); stable near 0 and infinity
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(ax < r, ax / r, r / ax)
        out = 2.0 * np.arctanh(ratio) / (math.pi**2 * ax)
    out = np.where(x == 0, 2.0 / (math.pi**2 * r), out)
    out = np.where(np.abs(x) == r, math.inf, out)
    return float(out) if out.ndim == 0 else out


def kernel_average(phi, x0: float, r: float, *, tol: float = TOL_QUAD) -> float:
    """``int phi(x0 + x) K_r(x) dx`` over the support of ``phi``."""
    lo, hi = phi.support
    a, b = lo - x0, hi - x0
    pts = {0.0, r, -r, -x0}
    pts.update(bp - x0 for bp in getattr(phi, "breakpoints", ()))
    val, _, _ = quad_split(lambda x: float(phi(x0 + x)) * kernel_K(x, r), a, b, pts, tol)
    return val


@dataclass
class RP0Report:
    entries: list
    skipped: list
    nonnegative: bool
    support_ok: bool
    cusp_coefficient: float
    tol: float

    @property
    def min_slack(self) -> float:
        return min((e[4] for e in self.entries), default=0.0)

    @property
    def worst(self):
        if not self.entries:
            return None
        return min(self.entries, key=lambda e: e[4])

    @property
    def cusp_ok(self) -> bool:
        return self.cusp_coefficient <= 1.0 + self.tol

    @property
    def passed(self) -> bool:
        return (self.min_slack >= -self.tol and self.nonnegative and self.support_ok
                and self.cusp_ok)

    def to_dict(self) -> dict:
        w = self.worst
        return {"passed": self.passed, "min_slack": self.min_slack,
                "worst": None if w is None else {"x0": w[0], "r": w[1], "phi": w[2],
                                                 "kernel_mean": w[3], "slack": w[4]},
                "pairs": len(self.entries), "skipped": len(self.skipped),
                "nonnegative": self.nonnegative, "support_ok": self.support_ok,
                "cusp_coefficient": self.cusp_coefficient, "tol": self.tol}


def default_x0_samples(R: float, n: int = 8) -> np.ndarray:
    m = R * np.geomspace(1e-3, 0.98, n)
    return np.concatenate([-m[::-1], m])


def verify_rp0_membership(phi, x0_samples=None, r_samples=None, *, tol: float = TOL_MEMBER,
                          tol_quad: float = TOL_QUAD) -> RP0Report:
    """Sampled check of the kernel inequality plus the structural conditions.

    ``r_samples`` is a list aligned with ``x0_samples``, or a callable
    ``x0 -> radii``; by default each x0 gets ``|x0|/4`` and ``|x0|/16``.
    Radii not below ``|x0|`` are skipped and listed.
    """
    lo, hi = phi.support
    R = max(-lo, hi)
    x0s = default_x0_samples(R) if x0_samples is None else np.asarray(x0_samples, dtype=float)
    if np.any(x0s == 0):
        raise ValueError("x0 samples must be nonzero")
    if r_samples is None:
        radii_for = lambda x0: (abs(x0) / 4.0, abs(x0) / 16.0)  # noqa: E731
    elif callable(r_samples):
        radii_for = r_samples
    else:
        table = list(r_samples)
        if len(table) != len(x0s):
            raise ValueError("r_samples must align with x0_samples")
        radii_for = lambda x0, _m=dict(zip(map(float, x0s), table)): _m[float(x0)]  # noqa: E731

    entries, skipped = [], []
    for x0 in map(float, x0s):
        f0 = float(phi(x0))
        for r in radii_for(x0):
            r = float(r)
            if not 0 < r < abs(x0):
                skipped.append((x0, r, "radius must lie in (0, |x0|)"))
                continue
            rhs = kernel_average(phi, x0, r, tol=tol_quad)
            entries.append((x0, r, f0, rhs, rhs - f0))

    xs = np.concatenate([np.linspace(lo, hi, 2001)[1:-1],
                         np.asarray(getattr(phi, "breakpoints", ()), dtype=float)])
    xs = xs[xs != 0]
    nonneg = bool(np.all(np.asarray(phi(xs)) >= -tol))
    outside = np.array([lo, hi]) * (1 + np.array([1e-9, 1e-3, 1.0, 10.0]))[:, None]
    support_ok = bool(np.all(np.asarray(phi(outside.ravel())) == 0.0))
    # growth rate against -log|x| between two tiny scales on both sides
    x1, x2 = 1e-12, 1e-9
    scale = math.log(x2 / x1)
    cusp = max((float(phi(s * x1)) - float(phi(s * x2))) / scale for s in (1.0, -1.0))
    return RP0Report(entries, skipped, nonneg, support_ok, cusp, tol)


def _poisson_sampled(phi: SampledTest, u: float, v: float) -> float:
    # exact for piecewise-linear phi: s = x - u,
    # int (p + q x) |v| / (s^2 + v^2) dx = (p + q u) atan(s/|v|) + q |v|/2 log(s^2 + v^2)
    av = abs(v)
    xs, ys = phi.xs, phi.vals
    q = np.diff(ys) / np.diff(xs)
    p = ys[:-1] - q * xs[:-1]
    sa, sb = xs[:-1] - u, xs[1:] - u
    part = ((p + q * u) * (np.arctan(sb / av) - np.arctan(sa / av))
            + 0.5 * q * av * (np.log(sb * sb + v * v) - np.log(sa * sa + v * v)))
    return float(np.sum(part) / math.pi)


def poisson_extend(phi, z: complex, *, tol: float = TOL_QUAD) -> float:
    """``phi(z)`` for real z; otherwise ``(1/pi) int |Im 1/(x - z)| phi(x) dx``."""
    z = complex(z)
    u, v = z.real, z.imag
    if v == 0.0:
        return float(phi(u))
    if isinstance(phi, SampledTest):
        return _poisson_sampled(phi, u, v)
    lo, hi = phi.support
    av = abs(v)
    pts = {0.0, u}
    pts.update(getattr(phi, "breakpoints", ()))
    for k in (1.0, 10.0, 100.0):
        pts.update((u - k * av, u + k * av))
    val, _, _ = quad_split(lambda x: float(phi(x)) * av / ((x - u) ** 2 + v * v), lo, hi, pts, tol)
    return val / math.pi


def poisson_extend_many(phi, zs, *, tol: float = TOL_QUAD) -> np.ndarray:
    zs = np.asarray(zs, dtype=complex).ravel()
    out = np.empty(zs.shape)
    real = zs.imag == 0
    if np.any(real):
        out[real] = np.asarray(phi(zs.real[real]), dtype=float)
    for i in np.flatnonzero(~real):
        out[i] = poisson_extend(phi, zs[i], tol=tol)
    return out
