"""Radial tests with a weight q and a radial majorant m.

For a bounded positive nonincreasing ``q`` on ``[r0, inf)`` with
``int q(t) dt/t < inf`` and a radial majorant ``m`` the module offers

* the integral test ``int_{r0}^inf q(t) m'_left(t) dt``;
* the tail sum ``sum_k Q(|z_k|)`` with ``Q(s) = int_s^inf q(t) dt/t``;
* the Stieltjes integral of circle means of ``log|f|`` against ``dq``.

Improper integrals and series are classified by
:func:`zeroset._doubling.doubling_limit`; closed forms bypass it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._doubling import DoublingResult, doubling_limit, finite_sum
from ._numeric import backward_derivative, quad_split
from .measures import ZeroSequence
from .oracle import TruncationWarning, circle_mean_log
from .tolerances import TOL_DERIV, TOL_QUAD

_BLOCK_CHUNK = 2**20


# --------------------------------------------------------------------------
# weights q
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerQ:
    """``q(t) = c t^(-alpha)`` on ``[r0, inf)``; ``alpha = 0`` is the constant weight."""

    alpha: float
    c: float = 1.0
    r0: float = 1.0

    def __post_init__(self):
        if self.alpha < 0 or not self.c > 0 or not self.r0 > 0:
            raise ValueError("PowerQ needs alpha >= 0, c > 0 and r0 > 0")

    def __call__(self, t):
        return self.c * np.asarray(t, dtype=float) ** (-self.alpha)

    def Q(self, s):
        s = np.asarray(s, dtype=float)
        if self.alpha == 0:
            return np.full(s.shape, math.inf)
        return self.c * s ** (-self.alpha) / self.alpha

    def dq_density(self, t):
        t = np.asarray(t, dtype=float)
        return -self.alpha * self.c * t ** (-self.alpha - 1.0)

    breakpoints = ()

    def to_json(self) -> dict:
        return {"variant": "power", "alpha": self.alpha, "c": self.c, "r0": self.r0}


@dataclass(frozen=True)
class LogPowerQ:
    """``q(t) = c log(t)^(-beta)`` on ``[r0, inf)`` with ``r0 > 1``."""

    beta: float
    c: float = 1.0
    r0: float = math.e

    def __post_init__(self):
        if self.beta < 0 or not self.c > 0 or not self.r0 > 1:
            raise ValueError("LogPowerQ needs beta >= 0, c > 0 and r0 > 1")

    def __call__(self, t):
        return self.c * np.log(np.asarray(t, dtype=float)) ** (-self.beta)

    def Q(self, s):
        s = np.asarray(s, dtype=float)
        if self.beta <= 1:
            return np.full(s.shape, math.inf)
        return self.c * np.log(s) ** (1.0 - self.beta) / (self.beta - 1.0)

    def dq_density(self, t):
        t = np.asarray(t, dtype=float)
        return -self.beta * self.c * np.log(t) ** (-self.beta - 1.0) / t

    breakpoints = ()

    def to_json(self) -> dict:
        return {"variant": "log_power", "beta": self.beta, "c": self.c, "r0": self.r0}


@dataclass(frozen=True)
class SampledQ:
    """Right-continuous step weight through ``(breakpoints, values)``.

    Past the last breakpoint ``b`` the declared tail model is
    ``q(t) = values[-1] (t / b)^(-tail_alpha)``; without it the weight is
    only known on the sampled range.
    """

    breakpoints: tuple = field(compare=False)
    values: tuple = field(compare=False)
    r0: float = 1.0
    tail_alpha: float | None = None

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.shape != v.shape or b.size < 1:
            raise ValueError("need matching, nonempty breakpoints and values")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not self.r0 > 0 or b[0] > self.r0:
            raise ValueError("first breakpoint must not exceed r0 > 0")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def __hash__(self):
        return hash((self.breakpoints.tobytes(), self.values.tobytes(), self.r0, self.tail_alpha))

    def __eq__(self, other):
        return (isinstance(other, SampledQ) and self.r0 == other.r0
                and self.tail_alpha == other.tail_alpha
                and np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.values, other.values))

    @property
    def _last(self):
        return float(self.breakpoints[-1]), float(self.values[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(self.breakpoints, t, side="right") - 1, 0, None)
        out = self.values[i]
        b, v = self._last
        if self.tail_alpha is None:
            return np.where(t > b, math.nan, out)
        return np.where(t > b, v * (np.maximum(t, b) / b) ** (-self.tail_alpha), out)

    def Q(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        b, v = self._last
        if self.tail_alpha is None:
            return np.full(s.shape, math.nan)
        if self.tail_alpha <= 0:
            return np.full(s.shape, math.inf)
        out = np.empty(s.shape)
        edges = np.append(self.breakpoints, math.inf)
        for n, x in enumerate(s):
            if x >= b:
                out[n] = v * (x / b) ** (-self.tail_alpha) / self.tail_alpha
                continue
            total = v / self.tail_alpha
            for lo, hi, val in zip(edges[:-2], edges[1:-1], self.values[:-1]):
                if hi > x:
                    total += val * math.log(hi / max(lo, x))
            out[n] = total
        return out

    def dq_density(self, t):
        t = np.asarray(t, dtype=float)
        b, v = self._last
        a = self.tail_alpha or 0.0
        return np.where(t > b, -a * v / b * (np.maximum(t, b) / b) ** (-a - 1.0), 0.0)

    def dq_atoms(self):
        """Jumps of the step part: locations and (nonpositive) masses."""
        return self.breakpoints[1:], np.diff(self.values)

    def to_json(self) -> dict:
        return {"variant": "sampled", "breakpoints": self.breakpoints.tolist(),
                "values": self.values.tolist(), "r0": self.r0, "tail_alpha": self.tail_alpha}


def constant_q(c: float, r0: float = 1.0) -> PowerQ:
    return PowerQ(0.0, c, r0)


def weight_from_json(spec: dict):
    variant = spec.get("variant")
    if variant == "power":
        return PowerQ(spec["alpha"], spec.get("c", 1.0), spec.get("r0", 1.0))
    if variant == "constant":
        return constant_q(spec.get("c", 1.0), spec.get("r0", 1.0))
    if variant == "log_power":
        return LogPowerQ(spec["beta"], spec.get("c", 1.0), spec.get("r0", math.e))
    if variant == "sampled":
        return SampledQ(spec["breakpoints"], spec["values"], spec.get("r0", 1.0),
                        spec.get("tail_alpha"))
    raise ValueError(f"unknown weight variant {variant!r}")


@dataclass(frozen=True)
class QAdmissibility:
    status: str
    integral: float
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        val = self.integral if math.isfinite(self.integral) else str(self.integral)
        return {"status": self.status, "integral": val, "reason": self.reason}


def check_q_admissible(q) -> QAdmissibility:
    """Bounded, positive, nonincreasing, and ``int_{r0}^inf q(t) dt/t < inf``."""
    if isinstance(q, PowerQ):
        if q.alpha == 0:
            return QAdmissibility("rejected", math.inf, "constant weight: int c/t dt diverges")
        return QAdmissibility("ok", float(q.Q(q.r0)), "closed form c r0^-alpha / alpha")
    if isinstance(q, LogPowerQ):
        if q.beta <= 1:
            return QAdmissibility("rejected", math.inf,
                                  "int dt/(t log^beta t) diverges for beta <= 1")
        return QAdmissibility("ok", float(q.Q(q.r0)), "closed form c log^(1-beta) r0/(beta-1)")
    if isinstance(q, SampledQ):
        if np.any(q.values <= 0) or not np.all(np.isfinite(q.values)):
            return QAdmissibility("rejected", math.nan, "sampled weight must be finite and positive")
        if np.any(np.diff(q.values) > 0):
            return QAdmissibility("rejected", math.nan, "sampled weight increases")
        if q.tail_alpha is None:
            return QAdmissibility("inconclusive", math.nan,
                                  "no declared tail model past the last breakpoint")
        if q.tail_alpha <= 0:
            return QAdmissibility("rejected", math.inf, "tail exponent must be positive")
        return QAdmissibility("ok", float(q.Q(q.r0)[0]), "step sum plus power tail")
    raise TypeError(f"unsupported weight {type(q).__name__}")


def tail_Q(q, s: float) -> float:
    """``Q(s) = int_s^inf q(t) dt / t``."""
    if s < q.r0:
        raise ValueError(f"s={s} lies below r0={q.r0}")
    return float(np.asarray(q.Q(s)).ravel()[0])


# --------------------------------------------------------------------------
# radial majorants
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerMajorant:
    """``m(t) = a t^rho + b`` on ``(r0, inf)``; ``rho = 1, b = 0`` is ``sigma t``."""

    a: float
    rho: float
    b: float = 0.0
    r0: float = 0.0

    def __post_init__(self):
        if not self.a > 0 or not self.rho > 0 or self.r0 < 0:
            raise ValueError("PowerMajorant needs a > 0, rho > 0 and r0 >= 0")

    @classmethod
    def linear(cls, sigma: float, r0: float = 0.0) -> PowerMajorant:
        return cls(sigma, 1.0, 0.0, r0)

    @property
    def domain_start(self) -> float:
        return self.r0

    def __call__(self, t):
        return self.a * np.asarray(t, dtype=float) ** self.rho + self.b

    def left_derivative(self, t):
        return self.a * self.rho * np.asarray(t, dtype=float) ** (self.rho - 1.0)

    def counting(self, t):
        """``t m'_left(t)``."""
        return self.a * self.rho * np.asarray(t, dtype=float) ** self.rho

    def riesz_density(self, t):
        return self.a * self.rho**2 * np.asarray(t, dtype=float) ** (self.rho - 1.0)

    def to_json(self) -> dict:
        return {"variant": "power", "a": self.a, "rho": self.rho, "b": self.b, "r0": self.r0}


@dataclass(frozen=True)
class SampledMajorant:
    """Piecewise-linear increasing profile, continued with its last slope."""

    ts: tuple = field(compare=False)
    ms: tuple = field(compare=False)

    def __post_init__(self):
        t = np.asarray(self.ts, dtype=float)
        m = np.asarray(self.ms, dtype=float)
        if t.shape != m.shape or t.size < 2:
            raise ValueError("need at least two samples with matching values")
        if np.any(np.diff(t) <= 0) or t[0] < 0:
            raise ValueError("sample radii must be nonnegative and strictly increasing")
        s = np.diff(m) / np.diff(t)
        if np.any(s <= 0):
            raise ValueError("sampled majorant must be strictly increasing")
        # t m'_left jumps from t s_i to t s_{i+1} at each interior sample
        if np.any(np.diff(s) < 0):
            i = int(np.argmax(np.diff(s) < 0)) + 1
            raise ValueError(f"t*m'_left(t) decreases at t={t[i]:.6g}: slope {s[i - 1]:.6g} "
                             f"drops to {s[i]:.6g}")
        object.__setattr__(self, "ts", t)
        object.__setattr__(self, "ms", m)

    def __hash__(self):
        return hash((self.ts.tobytes(), self.ms.tobytes()))

    def __eq__(self, other):
        return (isinstance(other, SampledMajorant) and np.array_equal(self.ts, other.ts)
                and np.array_equal(self.ms, other.ms))

    @property
    def domain_start(self) -> float:
        return float(self.ts[0])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.ms) / np.diff(self.ts)

    @property
    def breakpoints(self) -> tuple:
        return tuple(self.ts)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.ts, self.ms)
        return np.where(t > self.ts[-1], self.ms[-1] + self.slopes[-1] * (t - self.ts[-1]), out)

    def left_derivative(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= self.ts[0]):
            raise ValueError("left derivative needs t above the first sample")
        i = np.clip(np.searchsorted(self.ts, t, side="left") - 1, 0, len(self.ts) - 2)
        return self.slopes[i]

    def counting(self, t):
        return np.asarray(t, dtype=float) * self.left_derivative(t)

    def to_json(self) -> dict:
        return {"variant": "sampled", "ts": self.ts.tolist(), "ms": self.ms.tolist()}


def majorant_from_json(spec: dict):
    variant = spec.get("variant")
    if variant == "power":
        return PowerMajorant(spec["a"], spec["rho"], spec.get("b", 0.0), spec.get("r0", 0.0))
    if variant == "linear":
        return PowerMajorant.linear(spec["sigma"], spec.get("r0", 0.0))
    if variant == "sampled":
        return SampledMajorant(spec["ts"], spec["ms"])
    raise ValueError(f"unknown majorant variant {variant!r}")


def left_derivative(M, t: float, h0: float | None = None, *, tol: float = TOL_DERIV,
                    r0: float | None = None) -> float:
    """``M'_left(t)``: analytic when the majorant provides it, else backward differences."""
    start = float(r0 if r0 is not None else getattr(M, "domain_start", 0.0))
    if not t > start:
        raise ValueError(f"t={t} must exceed the domain start {start}")
    if hasattr(M, "left_derivative"):
        return float(M.left_derivative(t))
    if h0 is None:
        h0 = min(1.0, 0.5 * (t - start)) if start > 0 else min(1.0, 0.5 * t)
    if t - h0 < start:
        raise ValueError(f"coarsest step h0={h0} reaches below the domain start {start}")
    return float(backward_derivative(M, t, h0, tol=tol))


# --------------------------------------------------------------------------
# tests
# --------------------------------------------------------------------------

def _closed(value: float, reason: str) -> DoublingResult:
    if math.isinf(value):
        return DoublingResult("divergent", value, value, value, (), 0, reason)
    return DoublingResult("convergent", value, value, 0.0, (), 0, reason)


def integral_test_qM(q, M, *, method: str = "auto", tol: float = TOL_QUAD,
                     max_doublings: int = 40) -> DoublingResult:
    """``int_{r0}^inf q(t) M'_left(t) dt`` with ``r0`` the weight's start.

    Power weights against power majorants have closed forms; everything
    else integrates block by block over ``[r0 2^i, r0 2^(i+1)]``.
    """
    adm = check_q_admissible(q)
    if not adm.ok:
        raise ValueError(f"weight is not admissible: {adm.reason}")
    r0 = q.r0
    if r0 < getattr(M, "domain_start", 0.0):
        raise ValueError("weight starts before the majorant's domain")
    if method not in ("auto", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and isinstance(M, PowerMajorant):
        if isinstance(q, PowerQ):
            if q.alpha > M.rho:
                val = q.c * M.a * M.rho * r0 ** (M.rho - q.alpha) / (q.alpha - M.rho)
                return _closed(val, "closed form c a rho r0^(rho-alpha)/(alpha-rho)")
            return _closed(math.inf, "closed form: alpha <= rho")
        if isinstance(q, LogPowerQ):
            return _closed(math.inf, "closed form: t^(rho-1) beats any log power")

    hints = tuple(getattr(q, "breakpoints", ())) + tuple(getattr(M, "breakpoints", ()))

    def integrand(t):
        return float(q(t)) * float(M.left_derivative(t)) if hasattr(M, "left_derivative") \
            else float(q(t)) * left_derivative(M, t, tol=tol)

    def block(i):
        lo, hi = r0 * 2.0**i, r0 * 2.0 ** (i + 1)
        return quad_split(integrand, lo, hi, hints, tol)[0]

    return doubling_limit(block, tol=tol, max_doublings=max_doublings)


def zero_tail_sum(Z: ZeroSequence, q, *, tol: float = TOL_QUAD,
                  max_doublings: int = 24) -> DoublingResult:
    """``sum_{|z_k| > r0} m_k Q(|z_k|)``; generated sequences over index blocks ``(2^(i-1), 2^i]``."""
    adm = check_q_admissible(q)
    if not adm.ok:
        raise ValueError(f"weight is not admissible: {adm.reason}")
    r0 = q.r0

    def weighted(pts, mult):
        mod = np.abs(pts)
        keep = mod > r0
        if not np.any(keep):
            return 0.0
        return float(np.sum(mult[keep] * np.asarray(q.Q(mod[keep]), dtype=float)))

    if Z.rule is None:
        return finite_sum(weighted(Z.points, Z.multiplicities), len(Z))

    def block(i):
        k_lo = 0 if i == 0 else 2 ** (i - 1)
        k_hi = 2**i
        total = 0.0
        for a in range(k_lo, k_hi, _BLOCK_CHUNK):
            pts, mult = Z.block(a, min(a + _BLOCK_CHUNK, k_hi))
            total += weighted(pts, mult)
        return total

    return doubling_limit(block, tol=tol, max_doublings=max_doublings)


@dataclass(frozen=True)
class _Integrator:
    """Monotone integrator: continuous part ``F`` plus atoms."""

    F: object
    atoms: tuple = ((), ())


def _weight_integrator(q) -> _Integrator:
    if isinstance(q, SampledQ):
        b, v = q._last
        a = q.tail_alpha
        F = (lambda t: np.where(np.asarray(t) > b,
                                v * (np.maximum(np.asarray(t, dtype=float), b) / b) ** (-a) - v,
                                0.0))
        return _Integrator(F, q.dq_atoms())
    return _Integrator(q)


def circle_mean_stieltjes(f, integrator: _Integrator, start: float, *, tol: float = 1e-6,
                          tol_mean: float = 1e-9, n0: int = 8, n_max: int = 2**12,
                          max_doublings: int = 30) -> tuple[DoublingResult, dict]:
    """``int_{[start, inf)} C(t) dF(t)`` with ``C(t)`` the circle mean of ``log|f|``.

    Each block ``[start 2^i, start 2^(i+1)]`` uses trapezoid Riemann-Stieltjes
    sums ``sum (C(t_j) + C(t_{j+1}))/2 (F(t_{j+1}) - F(t_j))`` on a
    geometric grid, doubled until successive Richardson values agree to
    ``tol``.  A radius whose circle mean is -inf is moved by half a grid
    step and the event is logged.
    """
    cache: dict[float, float] = {}
    events: list = []
    stats = {"circle_means": 0, "max_grid": 0, "unconverged_blocks": 0}

    def C(t: float, step: float) -> float:
        val = cache.get(t)
        if val is None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                val = circle_mean_log(f, t, tol=tol_mean)
                if math.isinf(val) and val < 0:
                    t2 = t + 0.5 * step
                    events.append({"radius": t, "moved_to": t2})
                    val = circle_mean_log(f, t2, tol=tol_mean)
            cache[t] = val
            stats["circle_means"] += 1
        return val

    locs, masses = (np.asarray(x, dtype=float) for x in integrator.atoms)

    def block(i):
        lo, hi = start * 2.0**i, start * 2.0 ** (i + 1)
        n = n0
        prev = None
        while True:
            t = lo * (hi / lo) ** (np.arange(n + 1) / n)
            t[-1] = hi
            dF = np.diff(np.asarray(integrator.F(t), dtype=float))
            step = float(t[1] - t[0])
            cv = np.array([C(float(x), step) for x in t])
            s = float(np.sum(0.5 * (cv[:-1] + cv[1:]) * dF))
            if prev is not None:
                rich = s + (s - prev) / 3.0
                if abs(s - prev) <= tol * max(1.0, abs(s)) or n >= n_max:
                    if n >= n_max and abs(s - prev) > tol * max(1.0, abs(s)):
                        stats["unconverged_blocks"] += 1
                    stats["max_grid"] = max(stats["max_grid"], n)
                    val = rich
                    break
            prev = s
            n *= 2
        sel = (locs > lo if i > 0 else locs >= lo) & (locs <= hi)
        for x, w in zip(locs[sel], masses[sel]):
            val += float(w) * C(float(x), float(x) * 1e-6)
        return val

    res = doubling_limit(block, tol=tol, max_doublings=max_doublings)
    stats["perturbed_radii"] = events
    return res, stats


def log_mean_stieltjes(f, q, r_grid=None, *, tol: float = 1e-6,
                       max_doublings: int = 30) -> tuple[DoublingResult, dict]:
    """``int_{r0}^inf (circle mean of log|f| at t) dq(t)``; dq is nonpositive.

    ``r_grid`` optionally overrides the start radius with ``r_grid[0]`` (it
    must lie at or above r0).
    """
    adm = check_q_admissible(q)
    if not adm.ok:
        raise ValueError(f"weight is not admissible: {adm.reason}")
    start = q.r0
    if r_grid is not None:
        r_grid = np.asarray(r_grid, dtype=float)
        if r_grid.size == 0 or np.any(np.diff(r_grid) <= 0) or r_grid[0] < q.r0:
            raise ValueError("r_grid must be increasing and start at or above r0")
        start = float(r_grid[0])
    return circle_mean_stieltjes(f, _weight_integrator(q), start, tol=tol,
                                 max_doublings=max_doublings)
