"""Entire functions with known zeros, evaluated through ``log|f|`` only.

Two kinds of oracle are available:

* :class:`Builtin`: ``cos(pi (z - s))``, ``sin(pi (z - s))`` and
  ``exp(P(z - s))`` for a polynomial P, in overflow-free closed form;
* :class:`CanonicalProduct`: a Weierstrass product of primary factors
  over a :class:`~zeroset.measures.ZeroSequence`, truncated at index K
  with a reported bound for the neglected factors.

:func:`jensen_check` compares the circle mean of ``log|f|`` with the
counting side of Jensen's formula and is the backbone of :func:`selftest`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._numeric import trapezoid_circle_mean
from .measures import ZeroSequence

BUILTIN_KINDS = ("cos_pi", "sin_pi", "exp_poly")
JENSEN_TOL = 1e-12
_CHUNK = 4096


class TruncationWarning(UserWarning):
    """Neglected canonical-product factors may exceed the requested tolerance."""


def _as_array(z):
    z = np.asarray(z, dtype=complex)
    return z, z.ndim == 0


def _log_abs_trig(w: np.ndarray, sign: float) -> np.ndarray:
    # |cos(pi w)| = e^{pi|y|}/2 * |1 + e^{2 pi i x} e^{-2 pi |y|}|, with -1 for sin
    x, ay = w.real, np.abs(w.imag)
    q = np.exp(2j * math.pi * x - 2.0 * math.pi * ay)
    with np.errstate(divide="ignore"):
        return math.pi * ay - math.log(2.0) + np.log(np.abs(1.0 + sign * q))


@dataclass(frozen=True)
class Builtin:
    kind: str
    shift: complex = 0.0
    coeffs: tuple = ()

    def __post_init__(self):
        if self.kind not in BUILTIN_KINDS:
            raise ValueError(f"unknown builtin {self.kind!r}; expected one of {BUILTIN_KINDS}")
        object.__setattr__(self, "shift", complex(self.shift))
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if self.kind == "exp_poly" and not self.coeffs:
            raise ValueError("exp_poly needs at least one coefficient")

    def _zero_offset(self) -> float | None:
        return {"cos_pi": 0.5, "sin_pi": 0.0}.get(self.kind)

    def log_abs(self, z):
        z, scalar = _as_array(z)
        w = z - self.shift
        if self.kind == "exp_poly":
            acc = np.zeros(w.shape, dtype=complex)
            for c in reversed(self.coeffs):
                acc = acc * w + c
            out = acc.real
        else:
            out = _log_abs_trig(w, 1.0 if self.kind == "cos_pi" else -1.0)
            off = self._zero_offset()
            at_zero = (w.imag == 0.0) & (np.mod(w.real - off, 1.0) == 0.0)
            out = np.where(at_zero, -math.inf, out)
        return float(out) if scalar else out

    __call__ = log_abs

    def zeros_within(self, r: float, closed: bool = True):
        off = self._zero_offset()
        if off is None:
            return np.zeros(0, dtype=complex), np.zeros(0, dtype=np.int64)
        s = self.shift
        lo = math.floor(s.real - r - off) - 1
        hi = math.ceil(s.real + r - off) + 1
        pts = s + (np.arange(lo, hi + 1) + off)
        mod = np.abs(pts)
        keep = mod <= r if closed else mod < r
        return pts[keep].astype(complex), np.ones(int(keep.sum()), dtype=np.int64)

    def log_abs0(self) -> float:
        return float(self.log_abs(0.0))

    def to_json(self) -> dict:
        out = {"builtin": self.kind}
        if self.shift != 0:
            out["shift"] = [self.shift.real, self.shift.imag]
        if self.coeffs:
            out["coeffs"] = [[c.real, c.imag] for c in self.coeffs]
        return out


def log_abs_primary(w: np.ndarray, p: int) -> np.ndarray:
    """``log|E_p(w)|`` with ``E_p(w) = (1 - w) exp(w + ... + w^p / p)``."""
    a, b = w.real, w.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        near = 0.5 * np.log1p(a * a + b * b - 2.0 * a)
        far = np.log(np.abs(1.0 - w))
    out = np.where(np.abs(w) < 0.5, near, far)
    if p:
        poly = np.zeros(w.shape, dtype=complex)
        for j in range(p, 0, -1):
            poly = (poly + 1.0 / j) * w
        out = out + poly.real
    return out


@dataclass(frozen=True)
class CanonicalProduct:
    """``prod_k E_p(z / z_k)^{m_k}`` over the first K indices of ``zeros``.

    ``genus`` defaults to the smallest p for which ``sum |z_k|^{-p-1}``
    converges under the generator's tail model (0 for finite sequences).
    """

    zeros: ZeroSequence = field(compare=False)
    genus: int | None = None
    K: int | None = None
    warn_tol: float = 1e-6

    def __post_init__(self):
        Z = self.zeros
        if Z.contains_origin():
            raise ValueError("canonical products here take zeros off the origin")
        minimal = 0 if Z.rule is None else Z.rule.convergence_exponent_genus()
        genus = minimal if self.genus is None else int(self.genus)
        if genus not in (0, 1, 2):
            raise ValueError("genus must be 0, 1 or 2")
        if genus < minimal:
            raise ValueError(f"genus {genus} is below the convergence exponent genus {minimal} "
                             "of the zero sequence")
        object.__setattr__(self, "genus", genus)
        if Z.rule is None:
            if self.K is not None:
                raise ValueError("truncation K only applies to generated sequences")
            pts, mult = Z.points, Z.multiplicities
        else:
            K = Z.rule.K if self.K is None else int(self.K)
            object.__setattr__(self, "K", K)
            pts, mult = Z.block(0, K)
            order = np.lexsort((np.angle(pts), np.abs(pts)))
            pts, mult = pts[order], mult[order]
        object.__setattr__(self, "_pts", pts)
        object.__setattr__(self, "_mult", mult.astype(float))

    def truncation_bound(self, z) -> np.ndarray:
        """Bound on ``|sum_{k > K} m_k log|E_p(z / z_k)||``; inf where unproven.

        Uses ``|log E_p(w)| <= 2 |w|^{p+1}`` for ``|w| <= 1/2``.
        """
        z = np.abs(np.asarray(z, dtype=complex))
        rule = self.zeros.rule
        if rule is None:
            return np.zeros(z.shape)
        p = self.genus
        tail = rule.tail_power_sum(self.K, p + 1)
        first = float(rule.base(self.K + 1))
        return np.where(z <= 0.5 * first, 2.0 * z ** (p + 1) * tail, math.inf)

    def log_abs(self, z, *, warn: bool = True):
        z, scalar = _as_array(z)
        flat = z.ravel()
        out = np.zeros(flat.shape)
        pts, mult = self._pts, self._mult
        for i in range(0, len(pts), _CHUNK):
            zk = pts[i:i + _CHUNK]
            w = flat[:, None] / zk[None, :]
            terms = log_abs_primary(w, self.genus)
            terms = np.where(flat[:, None] == zk[None, :], -math.inf, terms)
            out = out + np.sum(terms * mult[None, i:i + _CHUNK], axis=1)
        out = out.reshape(z.shape)
        if warn and self.zeros.rule is not None:
            bound = self.truncation_bound(z)
            worst = float(np.max(bound)) if bound.size else 0.0
            if worst > self.warn_tol:
                warnings.warn(f"truncation bound {worst:.3g} exceeds {self.warn_tol:.3g}",
                              TruncationWarning, stacklevel=2)
        return float(out) if scalar else out

    def __call__(self, z):
        return self.log_abs(z)

    def zeros_within(self, r: float, closed: bool = True):
        mod = np.abs(self._pts)
        keep = mod <= r if closed else mod < r
        return self._pts[keep], self._mult[keep].astype(np.int64)

    def log_abs0(self) -> float:
        return 0.0

    def to_json(self) -> dict:
        out = {"zeros": self.zeros.to_json(), "genus": self.genus}
        if self.K is not None:
            out["K"] = self.K
        return {"product": out}


def oracle_from_json(spec: dict, base_dir=None):
    if "builtin" in spec:
        shift = spec.get("shift", [0.0, 0.0])
        coeffs = [complex(*c) if isinstance(c, (list, tuple)) else complex(c)
                  for c in spec.get("coeffs", ())]
        return Builtin(spec["builtin"], complex(shift[0], shift[1]), tuple(coeffs))
    if "product" in spec:
        p = spec["product"]
        zeros = ZeroSequence.from_json(p["zeros"], base_dir)
        return CanonicalProduct(zeros, p.get("genus"), p.get("K"))
    raise ValueError("oracle spec needs a 'builtin' or 'product' key")


def circle_mean_log(f, r: float, n_theta: int | None = None, *, tol: float = JENSEN_TOL,
                    full_output: bool = False):
    """Mean of ``log|f|`` over ``|z| = r`` by the trapezoid rule with doubling nodes.

    A node landing on a zero triggers a deterministic half-step rotation of
    the node set; the count of such events is in the info dict.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    n0 = 64 if n_theta is None else int(n_theta)
    if n0 < 2 or n0 % 2:
        raise ValueError("n_theta must be an even integer >= 2")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        mean, info = trapezoid_circle_mean(f.log_abs, 0.0, float(r), tol=tol, n0=n0)
    return (mean, info) if full_output else mean


def jensen_check(f, r: float, *, tol: float = JENSEN_TOL) -> dict:
    """Both sides of Jensen's formula on ``|z| = r``.

    ``lhs`` is the circle mean, ``rhs = log|f(0)| + sum_{|a| < r} log(r/|a|)``.
    """
    l0 = f.log_abs0()
    if not math.isfinite(l0):
        raise ValueError("f(0) = 0; use a shifted instance")
    lhs, info = circle_mean_log(f, r, tol=tol, full_output=True)
    pts, mult = f.zeros_within(r, closed=False)
    rhs = l0 + float(np.sum(mult * np.log(r / np.abs(pts))))
    return {"r": float(r), "lhs": lhs, "rhs": rhs, "gap": abs(lhs - rhs),
            "nodes": info["nodes"], "last_change": info["last_change"],
            "offsets": info["offsets"]}


SELFTEST_RADII = (0.7, 2.0, 5.0, 20.0)


def selftest_products() -> dict:
    """Finite products whose zero moduli avoid the self-test radii."""
    return {
        "genus0_real": CanonicalProduct(ZeroSequence([1.5, -2.5, 3.25, 4.0])),
        "genus1_complex": CanonicalProduct(
            ZeroSequence([1.1 + 0.3j, -0.4 + 2.9j, 3.3 - 1.2j, -6.1 - 0.5j], [1, 2, 1, 3]),
            genus=1),
        "genus2_lattice": CanonicalProduct(
            ZeroSequence([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j, 3j, 8.5, -12.25 + 4j]), genus=2),
    }


def selftest(*, tol: float = 1e-8) -> dict:
    """Internal consistency suite: Jensen gaps, envelope, zero detection, product vs cos."""
    checks = []

    def record(name, value, ok, **extra):
        checks.append({"check": name, "value": value, "passed": bool(ok), **extra})

    cos = Builtin("cos_pi")
    for r in SELFTEST_RADII:
        j = jensen_check(cos, r)
        record(f"jensen cos_pi r={r}", j["gap"], j["gap"] < tol, nodes=j["nodes"])
    for name, f in selftest_products().items():
        for r in SELFTEST_RADII:
            j = jensen_check(f, r)
            record(f"jensen {name} r={r}", j["gap"], j["gap"] < tol, nodes=j["nodes"])
    j = jensen_check(CanonicalProduct(ZeroSequence([2, 3, 4])), 5.0)
    record("jensen genus0 {2,3,4} r=5", j["gap"], j["gap"] < tol)

    rng = np.random.default_rng(12345)
    zs = rng.uniform(-60, 60, 400) + 1j * rng.uniform(-60, 60, 400)
    excess = float(np.max(cos.log_abs(zs) - math.pi * np.abs(zs.imag)))
    record("envelope log|cos pi z| <= pi|Im z|", excess, excess <= 1e-12)

    y = 50.0
    asym = abs(cos.log_abs(1j * y) - (math.pi * y - math.log(2.0)))
    record("cos_pi at 50i vs pi y - log 2", asym, asym < 1e-12)

    declared = np.array([0.5, -0.5, 7.5, -19.5])
    detect = cos.log_abs(declared)
    record("cos_pi zero detection", float(np.max(detect)), bool(np.all(np.isneginf(detect))))
    prod = selftest_products()["genus1_complex"]
    detect = prod.log_abs(prod.zeros.points)
    record("product zero detection", float(np.max(detect)), bool(np.all(np.isneginf(detect))))

    res = product_vs_cos_residual()
    record("half-integer product vs cos_pi affine residual variance", res, res < 1e-6)
    return {"passed": all(c["passed"] for c in checks), "checks": checks}


def product_vs_cos_residual(K: int = 2**14, n_points: int = 50, seed: int = 7) -> float:
    """Variance of ``log|P| - log|cos pi z|`` after removing an affine fit in (x, y)."""
    prod = CanonicalProduct(ZeroSequence.generate("half_integers", K), genus=1)
    rng = np.random.default_rng(seed)
    z = rng.uniform(-2.0, 2.0, n_points) + 1j * rng.uniform(-2.0, 2.0, n_points)
    diff = prod.log_abs(z, warn=False) - Builtin("cos_pi").log_abs(z)
    A = np.column_stack([np.ones(n_points), z.real, z.imag])
    coef, *_ = np.linalg.lstsq(A, diff, rcond=None)
    return float(np.var(diff - A @ coef))
