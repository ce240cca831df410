"""Convergence classification for improper integrals and series.

Both are evaluated block by block over doubling ranges ([T, 2T] for
integrals, index blocks (K, 2K] for series).  The block increments are
then classified:

* ``divergent``: ``n_div`` consecutive increments of non-decreasing size
  and constant sign;
* ``convergent``: ``n_conv`` consecutive increment ratios at most
  ``ratio_max``; the value is the partial sum plus a geometric tail estimate;
* ``inconclusive``: neither pattern within the doubling budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

RATIO_MAX = 0.8
N_CONV = 3
N_DIV = 4
RATIO_SPREAD = 0.05
MIN_DOUBLINGS = 6

# relative slack allowed when deciding that an increment did not shrink
_NONDECREASE_SLACK = 1e-9


@dataclass(frozen=True)
class DoublingResult:
    verdict: str
    value: float
    partial: float
    tail: float
    increments: tuple = field(repr=False)
    iterations: int
    reason: str = ""

    @property
    def convergent(self) -> bool:
        return self.verdict == "convergent"

    @property
    def divergent(self) -> bool:
        return self.verdict == "divergent"

    @property
    def last_increment(self) -> float:
        return self.increments[-1] if self.increments else 0.0

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "value": _json_float(self.value),
            "partial": _json_float(self.partial),
            "tail_estimate": _json_float(self.tail),
            "iterations": self.iterations,
            "last_increment": _json_float(self.last_increment),
            "reason": self.reason,
        }


def _json_float(x: float):
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _diverging(incs: list, n_div: int) -> bool:
    if len(incs) < n_div + 1:
        return False
    tail = incs[-(n_div + 1):]
    if tail[-1] == 0.0:
        return False
    sign = math.copysign(1.0, tail[-1])
    if any(x * sign <= 0.0 for x in tail):
        return False
    mags = [abs(x) for x in tail]
    return all(b >= a * (1.0 - _NONDECREASE_SLACK) for a, b in zip(mags, mags[1:]))


def _ratios(incs: list, n: int) -> list | None:
    if len(incs) < n + 1:
        return None
    out = []
    for a, b in zip(incs[-(n + 1):-1], incs[-n:]):
        if a == 0.0:
            return None
        out.append(abs(b / a))
    return out


def doubling_limit(
    increment: Callable[[int], float],
    *,
    tol: float = 1e-8,
    max_doublings: int = 40,
    min_doublings: int = MIN_DOUBLINGS,
    ratio_max: float = RATIO_MAX,
    n_conv: int = N_CONV,
    n_div: int = N_DIV,
    ratio_spread: float = RATIO_SPREAD,
) -> DoublingResult:
    """Sum ``increment(0) + increment(1) + ...`` and classify the limit.

    Stops as soon as the increments are classified.  A convergent limit is
    accepted either when the geometric tail estimate drops below
    ``tol * max(1, |partial|)`` or, after ``min_doublings`` blocks, when the
    last ``n_conv`` ratios agree to within ``ratio_spread``.
    """
    incs: list[float] = []
    partial = 0.0
    for i in range(max_doublings):
        d = float(increment(i))
        if math.isnan(d):
            return DoublingResult("inconclusive", math.nan, partial, math.nan,
                                  tuple(incs), i + 1, "non-finite increment")
        if math.isinf(d):
            incs.append(d)
            return DoublingResult("divergent", d, d, 0.0, tuple(incs), i + 1,
                                  "infinite increment")
        incs.append(d)
        partial += d

        if _diverging(incs, n_div):
            inf = math.copysign(math.inf, incs[-1])
            return DoublingResult("divergent", inf, partial, inf, tuple(incs), i + 1,
                                  f"{n_div} non-shrinking increments")

        if len(incs) >= n_conv and all(x == 0.0 for x in incs[-n_conv:]):
            return DoublingResult("convergent", partial, partial, 0.0, tuple(incs),
                                  i + 1, "vanishing increments")

        ratios = _ratios(incs, n_conv)
        if ratios is not None and max(ratios) <= ratio_max:
            rho = ratios[-1]
            tail = incs[-1] * rho / (1.0 - rho)
            scale = max(1.0, abs(partial))
            if abs(tail) <= tol * scale:
                return DoublingResult("convergent", partial + tail, partial, tail,
                                      tuple(incs), i + 1, "geometric tail below tolerance")
            if i + 1 >= min_doublings and max(ratios) - min(ratios) <= ratio_spread:
                return DoublingResult("convergent", partial + tail, partial, tail,
                                      tuple(incs), i + 1, "stable geometric ratios")

    ratios = _ratios(incs, n_conv)
    if ratios is not None and max(ratios) <= ratio_max:
        rho = ratios[-1]
        tail = incs[-1] * rho / (1.0 - rho)
        return DoublingResult("convergent", partial + tail, partial, tail, tuple(incs),
                              len(incs), "doubling budget exhausted, ratios geometric")
    return DoublingResult("inconclusive", partial, partial, math.nan, tuple(incs),
                          len(incs), "no convergence pattern within doubling budget")


def finite_sum(value: float, terms: int) -> DoublingResult:
    """Wrap an exactly computed finite sum in the common result type."""
    return DoublingResult("convergent", float(value), float(value), 0.0, (float(value),),
                          terms, "finite sum")
