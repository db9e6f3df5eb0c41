"""Exact counting of sign vectors in a halfspace.

Directions are snapped to a common dyadic grid ``T / 2**K`` with integer ``T``
so that every comparison is done in exact integer arithmetic.  Counting
splits the coordinates in two halves, walks each half in Gray-code order
(one add/subtract per step) and merges the two sorted tables, so a query over
``{-1, 1}^n`` costs about ``2**(n/2) log`` operations instead of ``2**n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "DEFAULT_ENUM_CAP",
    "EnumerationCapExceeded",
    "SnappedQuery",
    "all_sums",
    "count_at_least",
    "count_equal",
    "gray_walk",
    "snap_query",
]

DEFAULT_ENUM_CAP = 22
_SUM_BITS = 60


class EnumerationCapExceeded(ValueError):
    """Dimension above the enumeration cap; use the Monte Carlo estimator."""


@dataclass(frozen=True)
class SnappedQuery:
    """Integer form of the event <w, X> >= theta: sum(T_i X_i) >= bound.

    ``scale_exp`` is K with the snapped direction w' = T / 2**K; ``bound`` is
    ceil(theta * 2**K) computed exactly from the rational threshold.
    """

    weights: tuple[int, ...]
    bound: int
    scale_exp: int

    @property
    def dim(self) -> int:
        return len(self.weights)

    def snapped_direction(self) -> np.ndarray:
        return np.array([math.ldexp(t, -self.scale_exp) for t in self.weights])


def _exact(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    return Fraction(float(value))


def snap_query(normal, threshold=None, *, through=None) -> SnappedQuery:
    """Snap <normal, X> >= threshold to integers.

    Either ``threshold`` is given, or ``through`` is a point x and the
    threshold is <w', x> computed exactly for the snapped direction w'.
    """
    w = np.asarray(normal, dtype=float)
    if w.ndim != 1 or not np.all(np.isfinite(w)):
        raise ValueError("normal must be a finite 1-d vector")
    total = float(np.sum(np.abs(w)))
    if total == 0.0:
        k = 0
        weights = tuple(0 for _ in w)
    else:
        _, e = math.frexp(total)
        k = _SUM_BITS - e
        weights = tuple(int(round(math.ldexp(float(v), k))) for v in w)
    if through is not None:
        if threshold is not None:
            raise ValueError("give either threshold or through, not both")
        pt = [_exact(v) for v in np.asarray(through, dtype=float)]
        if len(pt) != len(weights):
            raise ValueError("point and normal dimensions differ")
        scaled = sum(Fraction(t) * xi for t, xi in zip(weights, pt))
    else:
        if threshold is None:
            raise ValueError("threshold or through is required")
        scaled = _exact(threshold) * (Fraction(2) ** k)
    bound = math.ceil(scaled)
    return SnappedQuery(weights=weights, bound=bound, scale_exp=k)


def gray_walk(weights) -> tuple[np.ndarray, np.ndarray]:
    """All 2**m signed sums of ``weights`` in Gray-code order.

    Returns (sums, codes): bit i of codes[j] set means X_i = +1 in the j-th
    visited sign vector.  Each step flips one coordinate, so sums are a
    running total of +-2 w_i updates.
    """
    w = np.asarray(weights, dtype=np.int64)
    m = w.size
    if m == 0:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    steps = np.arange(1, 1 << m, dtype=np.int64)
    flipped = np.bitwise_count((steps & -steps) - 1).astype(np.int64)
    codes = steps ^ (steps >> 1)
    up = ((codes >> flipped) & 1).astype(bool)
    deltas = np.where(up, 2 * w[flipped], -2 * w[flipped])
    start = -int(w.sum())
    sums = np.empty(1 << m, dtype=np.int64)
    sums[0] = start
    np.cumsum(deltas, out=sums[1:])
    sums[1:] += start
    return sums, np.concatenate([np.zeros(1, dtype=np.int64), codes])


def _check(q: SnappedQuery, cap: int) -> None:
    if q.dim > cap:
        raise EnumerationCapExceeded(
            f"dimension {q.dim} exceeds enumeration cap {cap}; use Monte Carlo"
        )
    if sum(abs(t) for t in q.weights) >= 1 << 62:
        raise OverflowError("snapped weights exceed the int64 budget")


def _halves(weights) -> tuple[np.ndarray, np.ndarray]:
    half = len(weights) // 2
    left, _ = gray_walk(weights[:half])
    right, _ = gray_walk(weights[half:])
    return left, np.sort(right)


def count_at_least(q: SnappedQuery, cap: int = DEFAULT_ENUM_CAP) -> int:
    """Number of X in {-1,1}^n with sum(T_i X_i) >= bound (ties count as inside)."""
    _check(q, cap)
    if abs(q.bound) >= 1 << 62:
        return (1 << q.dim) if q.bound < 0 else 0
    left, right = _halves(q.weights)
    need = np.int64(q.bound) - left
    idx = np.searchsorted(right, need, side="left")
    return int(right.size * left.size - int(idx.sum()))


def count_equal(q: SnappedQuery, cap: int = DEFAULT_ENUM_CAP) -> int:
    """Number of X with sum(T_i X_i) == bound exactly."""
    _check(q, cap)
    if abs(q.bound) >= 1 << 62:
        return 0
    left, right = _halves(q.weights)
    need = np.int64(q.bound) - left
    lo = np.searchsorted(right, need, side="left")
    hi = np.searchsorted(right, need, side="right")
    return int((hi - lo).sum())


def all_sums(weights, cap: int = DEFAULT_ENUM_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Every sign vector's integer sum, as (sums, codes) of length 2**n.

    Built as the outer sum of the two Gray-code half tables; codes carry the
    full sign pattern (low half in the low bits).
    """
    n = len(weights)
    if n > cap:
        raise EnumerationCapExceeded(f"dimension {n} exceeds enumeration cap {cap}")
    half = n // 2
    ls, lc = gray_walk(weights[:half])
    rs, rc = gray_walk(weights[half:])
    sums = (ls[:, None] + rs[None, :]).ravel()
    codes = (lc[:, None] | (rc[None, :] << half)).ravel()
    return sums, codes
