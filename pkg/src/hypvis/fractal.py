"""Finite unions of closed arcs on a circle, and Minkowski dimension estimates.

An ``ArcSet`` keeps its arcs as sorted, pairwise disjoint pieces inside
[0, period]; an arc crossing the zero angle is stored as two pieces, one
starting at 0 and one ending at ``period``.  ``arcs`` rejoins them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

TWO_PI = 2.0 * math.pi


def _merge(lo: np.ndarray, hi: np.ndarray):
    """Union of closed intervals; touching intervals are merged."""
    if len(lo) == 0:
        return lo, hi
    order = np.argsort(lo)
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    new = np.empty(len(lo), dtype=bool)
    new[0] = True
    new[1:] = lo[1:] > reach[:-1]
    starts = np.flatnonzero(new)
    ends = np.append(starts[1:], len(lo)) - 1
    return lo[starts], reach[ends]


class ArcSet:
    __slots__ = ("lo", "hi", "period")

    def __init__(self, lo, hi, period: float = TWO_PI, *, _canonical: bool = False):
        self.period = float(period)
        lo = np.asarray(lo, dtype=float).reshape(-1)
        hi = np.asarray(hi, dtype=float).reshape(-1)
        if not _canonical:
            lo, hi = self._normalise(lo, hi)
        self.lo, self.hi = lo, hi

    def _normalise(self, lo, hi):
        P = self.period
        if len(lo) != len(hi):
            raise ValueError("arc endpoint arrays differ in length")
        if np.any(hi < lo):
            raise ValueError("arc with negative length")
        if np.any(hi - lo >= P):
            return np.array([0.0]), np.array([P])
        a = np.remainder(lo, P)
        b = a + (hi - lo)
        wrap = b > P
        lo = np.concatenate([a, np.zeros(int(wrap.sum()))])
        hi = np.concatenate([np.minimum(b, P), b[wrap] - P])
        return _merge(lo, hi)

    # construction helpers -------------------------------------------------

    @classmethod
    def empty(cls, period: float = TWO_PI) -> "ArcSet":
        return cls(np.empty(0), np.empty(0), period, _canonical=True)

    @classmethod
    def full(cls, period: float = TWO_PI) -> "ArcSet":
        return cls(np.array([0.0]), np.array([period]), period, _canonical=True)

    @classmethod
    def from_arcs(cls, arcs, period: float = TWO_PI) -> "ArcSet":
        arr = np.asarray(list(arcs), dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], period)

    # queries ----------------------------------------------------------------

    def __len__(self):
        return len(self.arcs)

    @property
    def is_empty(self) -> bool:
        return len(self.lo) == 0

    @property
    def is_full(self) -> bool:
        return len(self.lo) == 1 and self.lo[0] <= 0.0 and self.hi[0] >= self.period

    @property
    def arcs(self) -> list[tuple[float, float]]:
        """Arcs as (a, b) with 0 <= a < period; the wrapping arc has b > period."""
        lo, hi = self.lo.tolist(), self.hi.tolist()
        if len(lo) > 1 and lo[0] <= 0.0 and hi[-1] >= self.period:
            first_hi = hi[0]
            lo, hi = lo[1:], hi[1:]
            hi[-1] = self.period + first_hi
        return list(zip(lo, hi))

    def widths(self) -> np.ndarray:
        return np.array([b - a for a, b in self.arcs])

    def total_length(self) -> float:
        return float(np.sum(self.hi - self.lo))

    def contains(self, theta):
        """Membership of angles (closed arcs)."""
        t = np.remainder(np.asarray(theta, dtype=float), self.period)
        if self.is_empty:
            return np.zeros(t.shape, dtype=bool)
        i = np.searchsorted(self.lo, t, side="right") - 1
        inside = (i >= 0) & (t <= self.hi[np.maximum(i, 0)])
        # angle 0 and period are the same point
        at_zero = (t == 0.0) & (self.hi[-1] >= self.period)
        return inside | at_zero

    def to_rows(self):
        return self.arcs

    def __eq__(self, other):
        return (isinstance(other, ArcSet) and self.period == other.period
                and np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi))

    def allclose(self, other: "ArcSet", atol: float = 1e-9) -> bool:
        a, b = self.arcs, other.arcs
        return len(a) == len(b) and (not a or np.allclose(a, b, rtol=0, atol=atol))

    def __repr__(self):
        shown = ", ".join(f"[{a:.6g}, {b:.6g}]" for a, b in self.arcs[:4])
        more = "" if len(self) <= 4 else f", ... ({len(self)} arcs)"
        return f"ArcSet({shown}{more}; period={self.period:.6g})"

    # algebra ----------------------------------------------------------------

    def complement(self) -> "ArcSet":
        """Closure of the complement."""
        P = self.period
        if self.is_empty:
            return ArcSet.full(P)
        lo = np.concatenate([[0.0], self.hi])
        hi = np.concatenate([self.lo, [P]])
        keep = hi > lo
        return ArcSet(lo[keep], hi[keep], P)

    def fold(self, period: float) -> "ArcSet":
        """Reinterpret a set invariant under rotation by ``period`` on the shorter circle."""
        keep = self.lo <= period
        return ArcSet(self.lo[keep], np.minimum(self.hi[keep], period), period)


def total_length(a: ArcSet) -> float:
    return a.total_length()


def parallel_set(a: ArcSet, delta: float) -> ArcSet:
    """delta-neighbourhood of ``a`` along the circle."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if delta == 0 or a.is_empty:
        return a
    return ArcSet(a.lo - delta, a.hi + delta, a.period)


def rotate(a: ArcSet, phi: float) -> ArcSet:
    if a.is_empty:
        return a
    return ArcSet(a.lo + phi, a.hi + phi, a.period)


def intersect(a: ArcSet, b: ArcSet) -> ArcSet:
    if a.period != b.period:
        raise ValueError("arc sets live on circles of different length")
    if a.is_empty or b.is_empty:
        return ArcSet.empty(a.period)
    # sweep: at equal positions starts come before ends, so closed arcs that
    # only touch still intersect in a point
    x = np.concatenate([a.lo, b.lo, a.hi, b.hi])
    kind = np.concatenate([np.zeros(len(a.lo) + len(b.lo)), np.ones(len(a.hi) + len(b.hi))])
    order = np.lexsort((kind, x))
    x, kind = x[order], kind[order]
    depth = np.cumsum(np.where(kind == 0, 1, -1))
    i = np.flatnonzero(depth == 2)
    return ArcSet(x[i], x[i + 1], a.period)


def union(a: ArcSet, b: ArcSet) -> ArcSet:
    if a.period != b.period:
        raise ValueError("arc sets live on circles of different length")
    return ArcSet(np.concatenate([a.lo, b.lo]), np.concatenate([a.hi, b.hi]), a.period)


def cantor_arcset(depth: int, period: float = TWO_PI) -> ArcSet:
    """Depth-n middle-thirds Cantor construction on the arc [0, 1]."""
    if not 1 <= depth <= 20:
        raise ValueError("cantor depth must be in 1..20")
    idx = np.arange(2**depth)
    left = np.zeros(len(idx))
    for k in range(depth):
        bit = (idx >> (depth - 1 - k)) & 1
        left += 2.0 * bit * 3.0 ** -(k + 1)
    return ArcSet(left, left + 3.0 ** -depth, period)


# --------------------------------------------------------------------------
# dimension estimation

@dataclass(frozen=True)
class DimensionEstimate:
    dimension: float
    slope: float
    intercept: float
    stderr: float
    scales: tuple
    lengths: tuple

    @property
    def raw_dimension(self) -> float:
        return 1.0 - self.slope


def geometric_ladder(delta0: float = 0.25, rungs: int = 8, ratio: float = 2.0) -> list[float]:
    return [delta0 * ratio ** -k for k in range(rungs)]


def check_ladder(ladder) -> np.ndarray:
    d = np.asarray(ladder, dtype=float)
    if d.ndim != 1 or len(d) < 4:
        raise ValueError("need at least 4 scales")
    if np.any(d <= 0) or np.any(np.diff(d) >= 0):
        raise ValueError("scales must be positive and strictly decreasing")
    return d


def minkowski_dimension(a: ArcSet, ladder) -> DimensionEstimate:
    """Slope of log length(a(delta)) against log delta; dimension = 1 - slope."""
    d = check_ladder(ladder)
    if a.is_empty:
        raise ValueError("dimension of an empty arc set is undefined")
    lengths = np.array([parallel_set(a, x).total_length() for x in d])
    fit = stats.linregress(np.log(d), np.log(lengths))
    stderr = float(fit.stderr) if np.isfinite(fit.stderr) else 0.0
    slope = float(fit.slope)
    return DimensionEstimate(
        dimension=float(min(max(1.0 - slope, 0.0), 1.0)),
        slope=slope,
        intercept=float(fit.intercept),
        stderr=stderr,
        scales=tuple(d.tolist()),
        lengths=tuple(lengths.tolist()),
    )
