"""Point sequences, Riesz measures and Stieltjes integration.

Measures are carried by their monotone distribution functions:

* :class:`LineMeasure`: a measure on the real line through the two-branch
  distribution ``nu(t) = -mu([t, 0))`` for ``t < 0`` and ``mu([0, t])`` for
  ``t >= 0``;
* :class:`RadialMeasure`: a rotation-invariant measure in the plane
  through its counting function ``n(t) = mu({|z| <= t})``.

A measure is a sum of components: atoms (step part), piecewise-linear
distributions, densities and monotone callables.  Every integral against a
measure goes through :func:`stieltjes_line` or :func:`stieltjes_radial`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage
from scipy.interpolate import RectBivariateSpline

from ._doubling import DoublingResult, doubling_limit
from ._numeric import as_vectorized, backward_derivative, quad_split
from .tolerances import MAX_INTERVALS, TOL_DERIV, TOL_QUAD

OVERFLOW_GUARD = 1e300

GENERATOR_KINDS = ("integers", "half_integers", "power")


# --------------------------------------------------------------------------
# zero sequences
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SequenceRule:
    """Generator ``z_k = direction * a_k`` (and ``-z_k`` when symmetric), k >= 1.

    ``a_k`` is ``k`` (integers), ``k - 1/2`` (half_integers) or ``k**gamma``
    (power).  Every point carries the same multiplicity.
    """

    kind: str
    K: int
    gamma: float = 1.0
    multiplicity: int = 1
    symmetric: bool = True
    direction: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if int(self.K) < 0:
            raise ValueError("truncation index K must be nonnegative")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be a positive integer")
        if self.kind == "power" and not self.gamma > 0:
            raise ValueError("power generator needs gamma > 0")
        d = complex(self.direction)
        if abs(d) == 0:
            raise ValueError("direction must be nonzero")
        object.__setattr__(self, "direction", d / abs(d))
        object.__setattr__(self, "K", int(self.K))

    def base(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if self.kind == "integers":
            return k
        if self.kind == "half_integers":
            return k - 0.5
        return k**self.gamma

    def index_bound(self, radius: float) -> int:
        """Number of indices k with ``a_k <= radius``."""
        if radius <= 0:
            return 0
        if self.kind == "integers":
            k = math.floor(radius)
        elif self.kind == "half_integers":
            k = math.floor(radius + 0.5)
        else:
            k = math.floor(radius ** (1.0 / self.gamma))
        # guard against rounding in the closed forms
        while k >= 1 and self.base(k) > radius:
            k -= 1
        while self.base(k + 1) <= radius:
            k += 1
        return int(k)

    def points(self, k_lo: int, k_hi: int) -> tuple[np.ndarray, np.ndarray]:
        """Points for indices ``k_lo < k <= k_hi``."""
        k = np.arange(k_lo + 1, k_hi + 1)
        pts = self.direction * self.base(k)
        if self.symmetric:
            pts = np.concatenate([pts, -pts])
        mult = np.full(pts.shape, self.multiplicity, dtype=np.int64)
        return pts.astype(complex), mult

    def tail_power_sum(self, K: int, s: float) -> float:
        """Upper bound for ``sum_{k > K} mult * |z_k|**(-s)`` over all generated points.

        Decreasing terms: the first one plus the integral from index K+1 on.
        """
        expo = s * (self.gamma if self.kind == "power" else 1.0)
        if expo <= 1.0:
            return math.inf
        first = float(self.base(K + 1)) ** (-s)
        start = K + 0.5 if self.kind == "half_integers" else K + 1.0
        rest = start ** (1.0 - expo) / (expo - 1.0)
        return (first + rest) * self.multiplicity * (2 if self.symmetric else 1)

    def convergence_exponent_genus(self) -> int:
        """Smallest genus p with ``sum |z_k|**-(p+1)`` finite."""
        g = self.gamma if self.kind == "power" else 1.0
        p = 0
        while (p + 1) * g <= 1.0:
            p += 1
        return p

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "K": self.K,
            "gamma": self.gamma,
            "multiplicity": self.multiplicity,
            "symmetric": self.symmetric,
            "direction": [self.direction.real, self.direction.imag],
        }


def _sort_by_modulus(points: np.ndarray, mult: np.ndarray):
    order = np.lexsort((np.angle(points), np.abs(points)))
    return points[order], mult[order]


class ZeroSequence:
    """A point multiset in the plane: finite, or given by a :class:`SequenceRule`.

    For generated sequences ``points`` holds the prefix of the first ``K``
    indices; :meth:`within` and :meth:`block` extend past ``K`` exactly when
    asked for.
    """

    def __init__(self, points=(), multiplicities=None, rule: SequenceRule | None = None):
        pts = np.asarray(points, dtype=complex).ravel()
        if multiplicities is None:
            mult = np.ones(pts.shape, dtype=np.int64)
        else:
            mult = np.asarray(multiplicities).ravel()
            if mult.shape != pts.shape:
                raise ValueError("points and multiplicities differ in length")
            if np.any(mult != np.round(mult)) or np.any(mult < 1):
                raise ValueError("multiplicities must be positive integers")
            mult = mult.astype(np.int64)
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        self.points, self.multiplicities = _sort_by_modulus(pts, mult)
        self.rule = rule

    @classmethod
    def generate(cls, kind: str, K: int, *, gamma: float = 1.0, multiplicity: int = 1,
                 symmetric: bool | None = None, direction: complex = 1.0) -> ZeroSequence:
        if symmetric is None:
            symmetric = kind != "power"
        rule = SequenceRule(kind, K, gamma, multiplicity, symmetric, direction)
        pts, mult = rule.points(0, rule.K)
        return cls(pts, mult, rule)

    @classmethod
    def from_csv(cls, path) -> ZeroSequence:
        """Read RFC-4180 CSV with header ``re,im,mult`` (mult optional)."""
        pts, mult = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = {"re", "im"} - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{path}: missing column(s) {sorted(missing)}")
            for row in reader:
                pts.append(complex(float(row["re"]), float(row["im"])))
                mult.append(int(row.get("mult") or 1))
        return cls(pts, mult)

    @classmethod
    def from_json(cls, spec: dict, base_dir: Path | None = None) -> ZeroSequence:
        kind = spec["kind"]
        if kind == "explicit":
            pts = [complex(p[0], p[1]) for p in spec["points"]]
            mult = [int(p[2]) if len(p) > 2 else 1 for p in spec["points"]]
            return cls(pts, mult)
        if kind == "csv":
            path = Path(spec["path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return cls.from_csv(path)
        direction = spec.get("direction", [1.0, 0.0])
        return cls.generate(kind, spec.get("K", 1024), gamma=spec.get("gamma", 1.0),
                            multiplicity=spec.get("multiplicity", 1),
                            symmetric=spec.get("symmetric"),
                            direction=complex(direction[0], direction[1]))

    def to_json(self) -> dict:
        if self.rule is not None:
            return self.rule.to_json()
        return {"kind": "explicit",
                "points": [[p.real, p.imag, int(m)] for p, m in zip(self.points, self.multiplicities)]}

    @property
    def is_finite(self) -> bool:
        return self.rule is None

    def __len__(self) -> int:
        return len(self.points)

    def scaled_multiplicity(self, factor: int) -> ZeroSequence:
        """Same points, every multiplicity multiplied by ``factor``."""
        if self.rule is not None:
            r = self.rule
            return ZeroSequence.generate(r.kind, r.K, gamma=r.gamma,
                                         multiplicity=r.multiplicity * factor,
                                         symmetric=r.symmetric, direction=r.direction)
        return ZeroSequence(self.points, self.multiplicities * factor)

    def contains_origin(self) -> bool:
        return bool(np.any(self.points == 0))

    def within(self, radius: float, closed: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """All points with ``|z| < radius`` (``<=`` if closed), generated as needed."""
        if self.rule is not None:
            k_hi = self.rule.index_bound(radius)
            pts, mult = self.rule.points(0, k_hi)
        else:
            pts, mult = self.points, self.multiplicities
        mod = np.abs(pts)
        keep = mod <= radius if closed else mod < radius
        return pts[keep], mult[keep]

    def block(self, k_lo: int, k_hi: int) -> tuple[np.ndarray, np.ndarray]:
        if self.rule is None:
            raise TypeError("index blocks are only defined for generated sequences")
        return self.rule.points(k_lo, k_hi)

    def counting(self, t) -> np.ndarray:
        """n(t): number of points (with multiplicity) with ``|z| <= t``."""
        t = np.asarray(t, dtype=float)
        top = float(np.max(t)) if t.size else 0.0
        pts, mult = self.within(top, closed=True)
        mod = np.abs(pts)
        order = np.argsort(mod)
        cum = np.concatenate([[0], np.cumsum(mult[order])])
        return cum[np.searchsorted(mod[order], t, side="right")].astype(float)


# --------------------------------------------------------------------------
# measure components
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Atoms:
    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if loc.shape != w.shape:
            raise ValueError("locations and weights differ in length")
        if np.any(w < 0):
            raise ValueError("negative weight")
        if not np.all(np.isfinite(loc)):
            raise ValueError("atom locations must be finite")
        order = np.argsort(loc, kind="stable")
        object.__setattr__(self, "locations", loc[order])
        object.__setattr__(self, "weights", w[order])


@dataclass(frozen=True)
class Linear:
    """Continuous piecewise-linear distribution through (breakpoints, values).

    Beyond the breakpoints it continues with the end slopes when ``growing``,
    and stays constant otherwise.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    growing: bool = False

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if b.shape != v.shape or b.size < 2:
            raise ValueError("need at least two breakpoints with matching values")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(np.diff(v) < 0):
            raise ValueError("distribution values must be nondecreasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    def cdf(self, t, extend_left: bool = True) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        b, v = self.breakpoints, self.values
        out = np.interp(t, b, v)
        if self.growing:
            s = self.slopes()
            out = np.where(t > b[-1], v[-1] + s[-1] * (t - b[-1]), out)
            if extend_left:
                out = np.where(t < b[0], v[0] + s[0] * (t - b[0]), out)
        return out

    def segments(self, extend_left: bool = True):
        """(lo, hi, slope) for every segment, unbounded ones included."""
        b = self.breakpoints
        s = self.slopes()
        segs = [(b[i], b[i + 1], s[i]) for i in range(len(s))]
        if self.growing:
            if extend_left:
                segs.insert(0, (-math.inf, b[0], s[0]))
            segs.append((b[-1], math.inf, s[-1]))
        return segs


@dataclass(frozen=True)
class Density:
    """Absolutely continuous part with density ``func`` on ``[lo, hi]``."""

    func: object
    lo: float = -math.inf
    hi: float = math.inf
    points: tuple = ()
    label: str = "density"


@dataclass(frozen=True)
class Counting:
    """Monotone distribution given as a callable; integrated by Riemann-Stieltjes sums."""

    func: object
    start: float = 0.0
    label: str = "counting"


# --------------------------------------------------------------------------
# measures
# --------------------------------------------------------------------------

class _Measure:
    kind = ""

    def __init__(self, components=()):
        self.components = tuple(components)
        for c in self.components:
            if not isinstance(c, (Atoms, Linear, Density, Counting)):
                raise TypeError(f"unsupported measure component {type(c).__name__}")

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self.components + other.components)

    def scaled(self, factor: float):
        if factor < 0:
            raise ValueError("measures scale by nonnegative factors only")
        comps = []
        for c in self.components:
            if isinstance(c, Atoms):
                comps.append(Atoms(c.locations, c.weights * factor))
            elif isinstance(c, Linear):
                comps.append(Linear(c.breakpoints, c.values * factor, c.growing))
            elif isinstance(c, Density):
                f = c.func
                comps.append(Density(lambda t, f=f: factor * np.asarray(f(t)), c.lo, c.hi,
                                     c.points, c.label))
            else:
                f = c.func
                comps.append(Counting(lambda t, f=f: factor * np.asarray(f(t)), c.start, c.label))
        return type(self)(comps)

    def to_json(self) -> dict:
        parts = []
        for c in self.components:
            if isinstance(c, Atoms):
                parts.append({"breakpoints": c.locations.tolist(),
                              "values": self._atom_values(c).tolist(), "interp": "step"})
            elif isinstance(c, Linear):
                parts.append({"breakpoints": c.breakpoints.tolist(), "values": c.values.tolist(),
                              "interp": "linear",
                              "mass": "growing" if c.growing else "finite"})
            else:
                raise TypeError(f"{c.label} components are not serializable")
        if len(parts) == 1:
            return {"kind": self.kind, **parts[0]}
        return {"kind": self.kind, "parts": parts}

    @classmethod
    def from_json(cls, spec: dict):
        if spec.get("kind") != cls.kind:
            raise ValueError(f"expected measure kind {cls.kind!r}, got {spec.get('kind')!r}")
        parts = spec.get("parts") or [spec]
        comps = []
        for p in parts:
            b = np.asarray(p["breakpoints"], dtype=float)
            v = np.asarray(p["values"], dtype=float)
            if p.get("interp", "linear") == "step":
                comps.append(Atoms(b, cls._weights_from_values(b, v)))
            else:
                comps.append(Linear(b, v, p.get("mass", "finite") == "growing"))
        return cls(comps)


class LineMeasure(_Measure):
    """Measure on the real line; calling it evaluates the two-branch distribution."""

    kind = "line"

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for c in self.components:
            if isinstance(c, Atoms):
                cum = np.concatenate([[0.0], np.cumsum(c.weights)])
                # mass strictly below 0, and mass in [t, 0) / [0, t]
                neg_total = cum[np.searchsorted(c.locations, 0.0, side="left")]
                left_of_t = cum[np.searchsorted(c.locations, t, side="left")]
                upto_t = cum[np.searchsorted(c.locations, t, side="right")]
                out = out + np.where(t < 0, -(neg_total - left_of_t), upto_t - neg_total)
            elif isinstance(c, Linear):
                out = out + c.cdf(t) - c.cdf(0.0)
            elif isinstance(c, Density):
                f = as_vectorized(c.func)
                vals = [math.copysign(quad_split(f, *sorted((0.0, float(x))))[0], x)
                        if x != 0 else 0.0 for x in t.ravel()]
                out = out + np.asarray(vals).reshape(t.shape)
            else:
                out = out + np.asarray(c.func(t), dtype=float) - float(c.func(0.0))
        return out

    @staticmethod
    def _atom_values(c: Atoms) -> np.ndarray:
        return LineMeasure([c])(c.locations)

    @staticmethod
    def _weights_from_values(b, v) -> np.ndarray:
        w = np.empty_like(v)
        for i, t in enumerate(b):
            if t < 0:
                nxt = v[i + 1] if i + 1 < len(b) and b[i + 1] < 0 else 0.0
                w[i] = nxt - v[i]
            else:
                prv = v[i - 1] if i > 0 and b[i - 1] >= 0 else 0.0
                w[i] = v[i] - prv
        return w


class RadialMeasure(_Measure):
    """Rotation-invariant measure; calling it evaluates the counting function n(t)."""

    kind = "radial"

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for c in self.components:
            if isinstance(c, Atoms):
                cum = np.concatenate([[0.0], np.cumsum(c.weights)])
                out = out + cum[np.searchsorted(c.locations, t, side="right")]
            elif isinstance(c, Linear):
                out = out + c.cdf(t, extend_left=False)
            elif isinstance(c, Density):
                f = as_vectorized(c.func)
                lo = max(c.lo, 0.0)
                vals = [quad_split(f, lo, min(float(x), c.hi))[0] if x > lo else 0.0
                        for x in t.ravel()]
                out = out + np.asarray(vals).reshape(t.shape)
            else:
                out = out + np.where(t >= c.start, np.asarray(c.func(np.maximum(t, c.start)),
                                                              dtype=float), 0.0)
        return out

    @staticmethod
    def _atom_values(c: Atoms) -> np.ndarray:
        return np.cumsum(c.weights)

    @staticmethod
    def _weights_from_values(b, v) -> np.ndarray:
        if np.any(b < 0):
            raise ValueError("radial atoms must sit at nonnegative radii")
        return np.diff(np.concatenate([[0.0], v]))


def build_distribution(masses=None, density=None, support=(-math.inf, math.inf)) -> LineMeasure:
    """Measure on the line from point masses ``[(t_j, w_j), ...]`` and/or a density.

    A constant density (a number) becomes an exact linear distribution;
    a callable density is kept as is and integrated by quadrature.
    """
    comps = []
    if masses is not None:
        masses = list(masses)
        if masses:
            loc, w = zip(*masses)
            comps.append(Atoms(np.array(loc, dtype=float), np.array(w, dtype=float)))
    if density is not None:
        lo, hi = support
        if np.isscalar(density):
            rho = float(density)
            if rho < 0:
                raise ValueError("negative density")
            if math.isinf(lo) and math.isinf(hi):
                comps.append(Linear([-1.0, 1.0], [-rho, rho], growing=True))
            elif math.isfinite(lo) and math.isfinite(hi):
                comps.append(Linear([lo, hi], [rho * lo, rho * hi], growing=False))
            else:
                comps.append(Density(lambda t: np.full(np.shape(t), rho), lo, hi))
        else:
            comps.append(Density(density, lo, hi))
    return LineMeasure(comps)


# --------------------------------------------------------------------------
# Stieltjes integration
# --------------------------------------------------------------------------

@dataclass
class QuadInfo:
    abserr: float = 0.0
    neval: int = 0
    intervals: int = 0
    converged: bool = True
    overflow: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"abserr": self.abserr, "neval": self.neval, "rs_intervals": self.intervals,
                "converged": self.converged, "overflow": self.overflow}


def _rs_sum(g, F, lo: float, hi: float, tol: float, info: QuadInfo) -> float:
    """Riemann-Stieltjes midpoint sums against F on [lo, hi], halving until stable."""
    gv = as_vectorized(g)
    n = 16
    prev = None
    while True:
        t = np.linspace(lo, hi, n + 1)
        dF = np.diff(np.asarray(F(t), dtype=float))
        if np.any(dF < -1e-12 * max(1.0, float(np.max(np.abs(dF))))):
            raise ValueError("distribution is not nondecreasing on the window")
        s = float(np.sum(gv(0.5 * (t[:-1] + t[1:])) * dF))
        info.neval += n
        if prev is not None and abs(s - prev) <= tol * max(1.0, abs(s)):
            info.intervals = max(info.intervals, n)
            return s
        if n >= MAX_INTERVALS:
            info.intervals = n
            info.converged = False
            info.notes.append(f"Riemann-Stieltjes sum not converged on [{lo}, {hi}]")
            return s
        prev = s
        n *= 2


def _check_support(phi, a: float, b: float):
    support = getattr(phi, "support", None)
    if support is not None:
        lo, hi = support
        if lo < a or hi > b:
            raise ValueError(f"window [{a}, {b}] does not cover the support [{lo}, {hi}]")


def _finish(total: float, info: QuadInfo, full_output: bool):
    if not math.isfinite(total) or abs(total) > OVERFLOW_GUARD:
        info.overflow = True
        total = math.copysign(math.inf, total) if not math.isnan(total) else math.inf
    return (total, info) if full_output else total


def _hints(phi, points):
    pts = set(float(p) for p in points)
    pts.update(float(p) for p in getattr(phi, "breakpoints", ()))
    return pts


def stieltjes_line(phi, mu: LineMeasure, window, *, tol: float = TOL_QUAD, points=(),
                   full_output: bool = False):
    """``int_{[a, b]} phi dmu`` for a measure on the line.

    ``phi`` is a scalar callable.  If it exposes ``support`` the window must
    cover it; ``points`` (and ``phi.breakpoints``) mark where the integrand
    is singular or kinked.
    """
    a, b = map(float, window)
    if not (math.isfinite(a) and math.isfinite(b)) or b < a:
        raise ValueError("window must be a finite interval [a, b]")
    _check_support(phi, a, b)
    hints = _hints(phi, points) | {0.0}
    info = QuadInfo()
    total = 0.0
    for c in mu.components:
        if isinstance(c, Atoms):
            sel = (c.locations >= a) & (c.locations <= b) & (c.weights > 0)
            total += sum(float(w) * float(phi(float(t)))
                         for t, w in zip(c.locations[sel], c.weights[sel]))
        elif isinstance(c, Linear):
            for lo, hi, s in c.segments():
                lo, hi = max(lo, a), min(hi, b)
                if hi > lo and s != 0.0:
                    val, err, nev = quad_split(phi, lo, hi, hints, tol)
                    total += s * val
                    info.abserr += abs(s) * err
                    info.neval += nev
        elif isinstance(c, Density):
            lo, hi = max(c.lo, a), min(c.hi, b)
            if hi > lo:
                val, err, nev = quad_split(lambda t: phi(t) * float(c.func(t)), lo, hi,
                                           hints | set(c.points), tol)
                total += val
                info.abserr += err
                info.neval += nev
        else:
            # split at 0 so a cusp of phi never sits inside a panel
            for lo, hi in ((a, min(b, 0.0)), (max(a, 0.0), b)):
                if hi > lo:
                    total += _rs_sum(phi, c.func, lo, hi, tol, info)
        if not math.isfinite(total) or abs(total) > OVERFLOW_GUARD:
            break
    return _finish(total, info, full_output)


def stieltjes_radial(g, mu: RadialMeasure, window, *, tol: float = TOL_QUAD, points=(),
                     full_output: bool = False):
    """``int g(t) dn(t)`` over ``[a, b]``, or ``(0, b]`` when ``a == 0``.

    The origin is never part of the window: integrands of interest live on
    the punctured plane, so a point mass at 0 is excluded.
    """
    a, b = map(float, window)
    if not (math.isfinite(a) and math.isfinite(b)) or b < a or a < 0:
        raise ValueError("window must be a finite interval [a, b] with a >= 0")
    _check_support(g, a, b)
    hints = _hints(g, points)
    info = QuadInfo()
    total = 0.0
    for c in mu.components:
        if isinstance(c, Atoms):
            lower = c.locations > a if a == 0.0 else c.locations >= a
            sel = lower & (c.locations <= b) & (c.weights > 0)
            total += sum(float(w) * float(g(float(t)))
                         for t, w in zip(c.locations[sel], c.weights[sel]))
        elif isinstance(c, Linear):
            for lo, hi, s in c.segments(extend_left=False):
                lo, hi = max(lo, a, 0.0), min(hi, b)
                if hi > lo and s != 0.0:
                    val, err, nev = quad_split(g, lo, hi, hints, tol)
                    total += s * val
                    info.abserr += abs(s) * err
                    info.neval += nev
        elif isinstance(c, Density):
            lo, hi = max(c.lo, a, 0.0), min(c.hi, b)
            if hi > lo:
                f = c.func
                val, err, nev = quad_split(lambda t: g(t) * float(f(t)), lo, hi,
                                           hints | set(c.points), tol)
                total += val
                info.abserr += err
                info.neval += nev
        else:
            lo = max(a, c.start)
            if b > lo:
                total += _rs_sum(g, c.func, lo, b, tol, info)
        if not math.isfinite(total) or abs(total) > OVERFLOW_GUARD:
            break
    return _finish(total, info, full_output)


def stieltjes_radial_tail(g, mu: RadialMeasure, start: float, *, tol: float = TOL_QUAD,
                          points=(), max_doublings: int = 40) -> DoublingResult:
    """Improper ``int_{[start, inf)} g dn``, by doubling windows ``[start 2^i, start 2^(i+1)]``."""
    if not start > 0:
        raise ValueError("start radius must be positive")

    def block(i):
        lo = start * 2.0**i
        hi = 2.0 * lo
        # atoms at the shared endpoint belong to the earlier block only
        val = stieltjes_radial(g, mu, (lo, hi), tol=tol, points=points)
        if i > 0:
            val -= _atom_mass_at(mu, lo) * float(g(lo))
        return val

    return doubling_limit(block, tol=tol, max_doublings=max_doublings)


def stieltjes_line_tail(phi, mu: LineMeasure, start: float, *, tol: float = TOL_QUAD,
                        points=(), max_doublings: int = 40) -> DoublingResult:
    """Improper ``int_{|t| >= start} phi dmu`` over both half-lines."""
    if not start > 0:
        raise ValueError("start must be positive")

    def block(i):
        lo = start * 2.0**i
        hi = 2.0 * lo
        val = stieltjes_line(phi, mu, (lo, hi), tol=tol, points=points)
        val += stieltjes_line(phi, mu, (-hi, -lo), tol=tol, points=points)
        if i > 0:
            val -= _atom_mass_at(mu, lo) * float(phi(lo))
            val -= _atom_mass_at(mu, -lo) * float(phi(-lo))
        return val

    return doubling_limit(block, tol=tol, max_doublings=max_doublings)


def _atom_mass_at(mu, t: float) -> float:
    m = 0.0
    for c in mu.components:
        if isinstance(c, Atoms):
            m += float(np.sum(c.weights[c.locations == t]))
    return m


# --------------------------------------------------------------------------
# Riesz measures
# --------------------------------------------------------------------------

def riesz_radial_counting(m, *, domain_start: float | None = None, t_max: float | None = None,
                          n_samples: int = 200, tol: float = TOL_DERIV) -> RadialMeasure:
    """Counting function ``n(t) = t * m'_left(t)`` of a radial majorant profile.

    ``m`` is either an object with ``left_derivative(t)`` (and optionally
    ``domain_start`` and ``riesz_density``) or a plain increasing callable.
    The mass inside the disk of radius ``domain_start`` is not resolved and
    is lumped at the origin.
    """
    r0 = float(domain_start if domain_start is not None else getattr(m, "domain_start", 0.0))
    if hasattr(m, "left_derivative"):
        dm = m.left_derivative
    else:
        def dm(t):
            h0 = min(1.0, 0.5 * (t - r0)) if t > r0 else 0.5 * t
            return backward_derivative(m, t, h0, tol=tol * 1e-2)

    def n_of(t):
        t = np.asarray(t, dtype=float)
        return np.array([x * dm(x) if x > r0 else math.nan for x in t.ravel()]).reshape(t.shape)

    lo = r0 * (1 + 1e-6) if r0 > 0 else 1e-6
    hi = t_max if t_max is not None else max(1e4, 1e4 * lo)
    ts = np.geomspace(lo, hi, n_samples)
    ns = n_of(ts)
    drops = np.diff(ns) < -tol * np.maximum(1.0, np.abs(ns[:-1]))
    if np.any(drops):
        i = int(np.argmax(drops))
        raise ValueError(f"t*m'_left(t) decreases between t={ts[i]:.6g} ({ns[i]:.6g}) "
                         f"and t={ts[i + 1]:.6g} ({ns[i + 1]:.6g})")
    if np.any(ns < -tol):
        raise ValueError("t*m'_left(t) is negative: profile is not increasing")

    n_start = float(n_of(np.array([lo]))[0])
    comps = []
    if n_start > 0:
        comps.append(Atoms([0.0], [n_start]))
    density = getattr(m, "riesz_density", None)
    if density is not None:
        comps.append(Density(density, lo, math.inf, label="riesz density"))
    else:
        comps.append(Counting(lambda t: np.asarray(n_of(t)) - n_start, start=lo,
                              label="t*m'_left(t)"))
    return RadialMeasure(comps)


@dataclass(frozen=True)
class GridFunction:
    """Real samples on a uniform Cartesian grid; ``values[j, i]`` sits at ``x[i] + 1j*y[j]``."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (y.size, x.size):
            raise ValueError(f"values shape {v.shape} does not match grid ({y.size}, {x.size})")
        if x.size < 3 or y.size < 3:
            raise ValueError("grid needs at least 3 nodes per axis")
        hx, hy = np.diff(x), np.diff(y)
        h = hx[0]
        if not h > 0 or not np.allclose(hx, h, rtol=1e-9) or not np.allclose(hy, h, rtol=1e-9):
            raise ValueError("grid spacing must be uniform, positive and equal in x and y")
        if np.any(np.isnan(v)) or np.any(np.isposinf(v)):
            raise ValueError("grid values must be finite or -inf")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, func, xlim, ylim, h: float) -> GridFunction:
        """Sample a vectorized complex function on the grid with spacing h."""
        if not h > 0:
            raise ValueError("spacing h must be positive")
        nx = int(round((xlim[1] - xlim[0]) / h)) + 1
        ny = int(round((ylim[1] - ylim[0]) / h)) + 1
        x = xlim[0] + h * np.arange(nx)
        y = ylim[0] + h * np.arange(ny)
        X, Y = np.meshgrid(x, y)
        with np.errstate(divide="ignore"):
            vals = np.asarray(func(X + 1j * Y), dtype=float)
        return cls(x, y, vals)

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def nodes(self) -> np.ndarray:
        X, Y = np.meshgrid(self.x, self.y)
        return X + 1j * Y

    def contains(self, z, margin: float = 0.0) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return ((z.real >= self.x[0] + margin) & (z.real <= self.x[-1] - margin)
                & (z.imag >= self.y[0] + margin) & (z.imag <= self.y[-1] - margin))

    def _spline(self):
        spl = self.__dict__.get("_spl")
        if spl is None:
            if np.any(np.isneginf(self.values)):
                raise ValueError("cannot interpolate a grid with -inf samples")
            spl = RectBivariateSpline(self.y, self.x, self.values, kx=3, ky=3, s=0)
            object.__setattr__(self, "_spl", spl)
        return spl

    def __call__(self, z) -> np.ndarray:
        """Bicubic spline interpolant (exact for polynomials of degree <= 3 per axis)."""
        z = np.asarray(z, dtype=complex)
        if not np.all(self.contains(z)):
            raise ValueError("evaluation point outside the grid")
        out = self._spline().ev(z.imag.ravel(), z.real.ravel())
        return out.reshape(z.shape)


@dataclass
class RieszGrid:
    """Cell masses ``(1/2pi) * (five-point Laplacian) * h^2`` on a grid.

    ``masses`` is NaN on the outer ring of nodes and inside aggregation
    boxes around -inf samples; those boxes carry their total mass in
    ``singular`` instead.
    """

    x: np.ndarray
    y: np.ndarray
    h: float
    masses: np.ndarray
    singular: list
    warnings: list

    def density(self) -> np.ndarray:
        return self.masses / self.h**2

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        """Node locations and masses (aggregated boxes at their centers)."""
        X, Y = np.meshgrid(self.x, self.y)
        ok = np.isfinite(self.masses)
        pts = (X + 1j * Y)[ok]
        w = self.masses[ok]
        if self.singular:
            pts = np.concatenate([pts, [s["center"] for s in self.singular]])
            w = np.concatenate([w, [s["mass"] for s in self.singular]])
        return pts, w

    def disk_mass(self, radius: float, center: complex = 0.0) -> float:
        pts, w = self.atoms()
        return float(np.sum(w[np.abs(pts - center) <= radius]))

    def total(self) -> float:
        return float(np.sum(self.atoms()[1]))


def riesz_fd(u: GridFunction, *, feature_scale: float | None = None, pad: int = 2) -> RieszGrid:
    """Riesz measure of sampled data by the five-point Laplacian.

    Clusters of -inf samples (zeros of f for u = log|f|) are enclosed in a box
    padded by ``pad`` nodes; the box mass comes from the discrete divergence
    theorem, i.e. the sum of outward differences across its boundary edges.
    """
    v = u.values
    h = u.h
    warn = []
    if feature_scale is not None and h > feature_scale / 4.0:
        warn.append(f"grid spacing h={h:.4g} is coarse relative to feature scale "
                    f"{feature_scale:.4g}")
    masses = np.full(v.shape, np.nan)
    with np.errstate(invalid="ignore"):
        lap = v[1:-1, 2:] + v[1:-1, :-2] + v[2:, 1:-1] + v[:-2, 1:-1] - 4.0 * v[1:-1, 1:-1]
    masses[1:-1, 1:-1] = lap / (2.0 * math.pi)

    singular = []
    bad = np.isneginf(v)
    if np.any(bad):
        labels, count = ndimage.label(bad, structure=np.ones((3, 3)))
        for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
            j0, j1 = sl[0].start - pad, sl[0].stop + pad
            i0, i1 = sl[1].start - pad, sl[1].stop + pad
            idx = np.argwhere(labels == lab)
            center = complex(u.x[idx[:, 1]].mean(), u.y[idx[:, 0]].mean())
            if j0 < 1 or i0 < 1 or j1 > v.shape[0] - 1 or i1 > v.shape[1] - 1:
                warn.append(f"-inf cluster near {center} too close to the grid edge; unresolved")
                masses[max(j0, 0):j1, max(i0, 0):i1] = np.nan
                continue
            box = v[j0:j1, i0:i1]
            if np.any(np.isneginf(box[[0, -1], :])) or np.any(np.isneginf(box[:, [0, -1]])):
                warn.append(f"-inf cluster near {center} touches its aggregation box")
            flux = (np.sum(v[j0:j1, i0 - 1] - v[j0:j1, i0])
                    + np.sum(v[j0:j1, i1] - v[j0:j1, i1 - 1])
                    + np.sum(v[j0 - 1, i0:i1] - v[j0, i0:i1])
                    + np.sum(v[j1, i0:i1] - v[j1 - 1, i0:i1]))
            masses[j0:j1, i0:i1] = np.nan
            singular.append({"center": center, "mass": float(flux / (2.0 * math.pi)),
                             "box": (float(u.x[i0]), float(u.x[i1 - 1]),
                                     float(u.y[j0]), float(u.y[j1 - 1]))})
    return RieszGrid(u.x, u.y, h, masses, singular, warn)
