"""Small numerical helpers shared across modules."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from .tolerances import MAX_INTERVALS, TOL_DERIV, TOL_QUAD


def as_vectorized(func):
    """Return a callable accepting numpy arrays, falling back to a Python loop."""

    def wrapped(x):
        x = np.asarray(x)
        try:
            out = np.asarray(func(x), dtype=float)
            if out.shape == x.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(func(xi)) for xi in x.ravel()]).reshape(x.shape)

    return wrapped


def quad_split(func, lo: float, hi: float, points=(), tol: float = TOL_QUAD):
    """Adaptive Gauss-Kronrod over [lo, hi], split at every interior point.

    Splitting puts each (integrable) singularity at a panel endpoint, where
    QUADPACK's extrapolation handles log and algebraic behaviour well.
    Returns ``(value, abserr, neval)``.
    """
    if hi <= lo:
        return 0.0, 0.0, 0
    raw = sorted({lo, hi, *(float(p) for p in points if lo < p < hi)})
    # drop cuts closer than a negligible width; such panels only feed nan from endpoint poles
    gap = 1e-13 * (hi - lo)
    cuts = [raw[0]]
    for p in raw[1:-1]:
        if p - cuts[-1] > gap and hi - p > gap:
            cuts.append(p)
    cuts.append(hi)
    total = err = 0.0
    neval = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(cuts, cuts[1:]):
            val, e, info = integrate.quad(func, a, b, epsabs=1e-15, epsrel=tol,
                                          limit=400, full_output=1)[:3]
            total += val
            err += e
            neval += info["neval"]
    return total, err, neval


def trapezoid_circle_mean(func, center: complex, radius: float, *, tol: float = TOL_QUAD,
                          n0: int = 64, n_max: int = MAX_INTERVALS):
    """Mean of ``func`` over the circle ``|z - center| = radius``.

    ``func`` must accept complex arrays.  Nodes are doubled until two
    successive means differ by less than ``tol * max(1, |mean|)``.  If a node
    evaluates to -inf, the whole node set is rotated by half a step
    (deterministic), and the event is counted.

    Returns ``(mean, info)`` where info holds ``nodes``, ``last_change`` and
    ``offsets``.
    """
    n = max(8, int(n0))
    offsets = 0
    prev = None
    change = math.inf
    while True:
        theta = 2.0 * math.pi * np.arange(n) / n
        vals = np.asarray(func(center + radius * np.exp(1j * theta)), dtype=float)
        if np.any(np.isneginf(vals)):
            offsets += 1
            theta = theta + math.pi / n
            vals = np.asarray(func(center + radius * np.exp(1j * theta)), dtype=float)
            if np.any(np.isneginf(vals)):
                return -math.inf, {"nodes": n, "last_change": math.nan, "offsets": offsets,
                                   "converged": False}
        mean = float(np.mean(vals))
        if prev is not None:
            change = abs(mean - prev)
            if change <= tol * max(1.0, abs(mean)):
                return mean, {"nodes": n, "last_change": change, "offsets": offsets,
                              "converged": True}
        if n >= n_max:
            return mean, {"nodes": n, "last_change": change, "offsets": offsets,
                          "converged": False}
        prev = mean
        n *= 2


def backward_derivative(func, t: float, h0: float, *, tol: float = TOL_DERIV,
                        max_halvings: int = 30):
    """Left-hand derivative by backward differences with Richardson extrapolation.

    The step halves from ``h0``; first-order backward differences are
    extrapolated (Neville table, error expansion in powers of h) and the
    iteration stops once two successive diagonal entries differ by less than
    ``tol``.  Only points ``t - h`` with ``h <= h0`` are ever evaluated.
    """
    ft = float(func(t))
    table: list[list[float]] = []
    h = h0
    best = math.nan
    for i in range(max_halvings):
        row = [(ft - float(func(t - h))) / h]
        for j in range(1, i + 1):
            factor = 2.0**j
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (factor - 1.0))
        table.append(row)
        if i >= 1:
            est, prev = row[-1], table[i - 1][-1]
            if abs(est - prev) < tol:
                return est
            # kinks spoil the polynomial error model; fall back to plain differences
            if abs(row[0] - table[i - 1][0]) < tol:
                return row[0]
            best = est
        h *= 0.5
    return best
