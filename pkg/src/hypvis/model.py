"""Boolean model: occupied phase (union of grains) and vacant phase (closure of the rest).

Segment queries all concern geodesic segments leaving the origin.  The vacant
visibility set at depth L is computed exactly as the complement of the arcs
of directions blocked by each grain; the occupied one is resolved on a grid
of directions with bisection-refined arc endpoints.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .fractal import ArcSet, intersect, rotate
from .hypgeo import (
    TWO_PI,
    Grain,
    HPoint,
    RaySegment,
    blocking_halfwidth_closed,
    blocking_halfwidth_polar,
    dist_polar,
    dist_to_ray_segment_polar,
    ray_interval_polar,
    wrap_angle,
)
from .sampler import ConfigBatch, Configuration

__all__ = [
    "Phase", "Grain", "Configuration", "contains_point", "segment_in_vacant",
    "segment_in_occupied", "visible_arcs_vacant", "visible_dirs_occupied", "line_arcs",
    "survival_depth", "occupied_reach", "visible_measure_batch", "directions_visible_batch",
    "visible_grid_batch",
]

GAP_TOL = 1e-12


class Phase(enum.Enum):
    VACANT = "vacant"
    OCCUPIED = "occupied"

    @classmethod
    def parse(cls, value) -> "Phase":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def _check_margin(c: Configuration, reach: float):
    if reach + c.r_max > c.complete * (1 + 1e-12):
        raise ValueError(
            f"query reaches {reach + c.r_max:.4g} from o but the configuration is only "
            f"complete up to {c.complete:.4g}"
        )


def contains_point(c: Configuration, phase, p: HPoint) -> bool:
    phase = Phase.parse(phase)
    _check_margin(c, p.rho)
    d = dist_polar(c.rho, c.theta, p.rho, p.theta)
    if phase is Phase.OCCUPIED:
        return bool(np.any(d <= c.radius))
    return not bool(np.any(d < c.radius))


def _near(c: Configuration, L: float):
    # grains that can touch a segment of length L from o
    return np.flatnonzero(c.rho < L + c.radius)


def segment_in_vacant(c: Configuration, seg: RaySegment) -> bool:
    _check_margin(c, seg.length)
    i = _near(c, seg.length)
    d = dist_to_ray_segment_polar(c.rho[i], c.theta[i] - seg.theta0, seg.length)
    return bool(np.all(d >= c.radius[i]))


def _clipped_intervals(rho, delta, radius, L):
    lo, hi, hit = ray_interval_polar(rho, delta, radius)
    lo, hi = np.maximum(lo, 0.0), np.minimum(hi, L)
    keep = hit & (lo <= hi)
    return lo[keep], hi[keep]


def segment_in_occupied(c: Configuration, seg: RaySegment) -> bool:
    _check_margin(c, seg.length)
    L = seg.length
    i = _near(c, L)
    lo, hi = _clipped_intervals(c.rho[i], c.theta[i] - seg.theta0, c.radius[i], L)
    if len(lo) == 0:
        return False
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    if lo[0] > GAP_TOL:
        return False
    reach = np.maximum.accumulate(hi)
    if np.any(lo[1:] > reach[:-1] + GAP_TOL):
        return False
    return bool(reach[-1] >= L)


# ---------------------------------------------------------------------------
# exact vacant visibility

def visible_arcs_vacant(c: Configuration, L: float, chunk: int = 4096,
                        method: str = "closed") -> ArcSet:
    """Directions whose length-L segment from o stays in the vacant phase.

    Grains are processed outward from o so that configurations which are
    already fully blocked near the origin stop early.  ``method="bisect"``
    computes each blocked half-width by bisection instead of the closed form.
    """
    halfwidth = {"closed": blocking_halfwidth_closed, "bisect": blocking_halfwidth_polar}[method]
    _check_margin(c, L)
    if np.any(c.radius >= c.rho):
        return ArcSet.empty()
    i = _near(c, L)
    if len(i) == 0:
        return ArcSet.full()
    i = i[np.argsort(c.rho[i], kind="stable")]
    blocked = ArcSet.empty()
    start = 0
    while start < len(i):
        j = i[start:start + chunk]
        psi = halfwidth(c.rho[j], c.radius[j], L)
        th = c.theta[j]
        blocked = ArcSet(np.concatenate([blocked.lo, th - psi]),
                         np.concatenate([blocked.hi, th + psi]))
        if blocked.is_full:
            return ArcSet.empty()
        start += chunk
        chunk *= 4
    return blocked.complement()


# ---------------------------------------------------------------------------
# occupied visibility

def _propagate_reach(group, lo, hi, n_groups, cap):
    """Per group, the largest t with [0, t] covered by the group's intervals."""
    reach = np.zeros(n_groups)
    if len(lo) == 0:
        return reach
    alive = np.ones(len(lo), dtype=bool)
    while True:
        r = reach[group]
        step = alive & (lo <= r + GAP_TOL) & (hi > r)
        if not np.any(step):
            return np.minimum(reach, cap)
        np.maximum.at(reach, group[step], hi[step])
        alive &= hi > reach[group]


def _ranges_to_pairs(starts, stops):
    """Expand index ranges [starts[k], stops[k]) into (k, index) pairs."""
    counts = np.maximum(stops - starts, 0)
    k = np.repeat(np.arange(len(starts)), counts)
    first = np.repeat(starts - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    return k, first + np.arange(counts.sum())


def occupied_reach(c: Configuration, thetas, L: float) -> np.ndarray:
    """For each direction, how far from o the occupied phase covers the ray (capped at L)."""
    thetas = np.remainder(np.asarray(thetas, dtype=float), TWO_PI)
    i = _near(c, L)
    rho, th, R = c.rho[i], c.theta[i], c.radius[i]
    # a grain meets the ray at offset d iff it covers o or sinh(rho) sin|d| <= sinh(R), cos d > 0
    half = np.where(R >= rho, math.pi, np.arcsin(np.minimum(np.sinh(R) / np.sinh(rho), 1.0)))
    order = np.argsort(thetas, kind="stable")
    st = thetas[order]
    a = th - half
    b = th + half
    ks, js = [], []
    for shift in (-TWO_PI, 0.0, TWO_PI):
        s = np.searchsorted(st, a + shift, side="left")
        e = np.searchsorted(st, b + shift, side="right")
        full = half >= math.pi
        if shift != 0.0:
            e = np.where(full, s, e)
        else:
            s = np.where(full, 0, s)
            e = np.where(full, len(st), e)
        k, j = _ranges_to_pairs(s, e)
        ks.append(k)
        js.append(j)
    k = np.concatenate(ks)
    j = order[np.concatenate(js)]
    lo, hi, hit = ray_interval_polar(rho[k], th[k] - thetas[j], R[k])
    keep = hit & (hi >= 0)
    return _propagate_reach(j[keep], np.maximum(lo[keep], 0.0), np.minimum(hi[keep], L),
                            len(thetas), L)


def visible_dirs_occupied(c: Configuration, L: float, m: int = 2**14, steps: int = 40) -> ArcSet:
    """Grid approximation of the occupied visibility set at depth L."""
    if m < 2**10:
        raise ValueError("grid size must be at least 2**10")
    _check_margin(c, L)
    grid = TWO_PI * np.arange(m) / m
    ok = occupied_reach(c, grid, L) >= L
    if ok.all():
        return ArcSet.full()
    if not ok.any():
        return ArcSet.empty()
    nxt = np.roll(ok, -1)
    rise = np.flatnonzero(~ok & nxt)        # boundary between j (out) and j+1 (in)
    fall = np.flatnonzero(ok & ~nxt)        # boundary between j (in) and j+1 (out)
    step = TWO_PI / m

    def refine(j, inside_left):
        a = grid[j].copy()
        b = a + step
        for _ in range(steps):
            mid = 0.5 * (a + b)
            good = occupied_reach(c, mid, L) >= L
            move_a = good == inside_left
            a = np.where(move_a, mid, a)
            b = np.where(move_a, b, mid)
        return a if inside_left else b

    left = refine(rise, inside_left=False)
    right = refine(fall, inside_left=True)
    # pair each rise with the next fall going counter-clockwise
    k = np.searchsorted(fall, rise, side="left") % len(fall)
    right = right[k]
    right = np.where(right < left, right + TWO_PI, right)
    return ArcSet(left, right)


def line_arcs(a: ArcSet) -> ArcSet:
    """Directions in [0, pi) of lines through o lying in the set: theta and theta + pi both in ``a``."""
    return intersect(a, rotate(a, math.pi)).fold(math.pi)


# ---------------------------------------------------------------------------
# batched survival depth along a fixed direction

def survival_depth(batch: ConfigBatch, phase, theta0: float = 0.0, cap: float = math.inf) -> np.ndarray:
    """For every configuration, the largest L with the length-L segment at ``theta0`` in the phase.

    Vacant: segment [0, L] is contained iff L <= this value.
    Occupied: contained iff L <= this value (capped at ``cap``).
    """
    phase = Phase.parse(phase)
    n = batch.size
    owner = batch.owner
    lo, hi, hit = ray_interval_polar(batch.rho, batch.theta - theta0, batch.radius)
    if phase is Phase.VACANT:
        # blocking needs the open disk to meet t >= 0
        block = hit & (hi > 0.0) & (hi > lo)
        out = np.full(n, math.inf)
        np.minimum.at(out, owner[block], np.maximum(lo[block], 0.0))
        return np.minimum(out, cap)
    if not math.isfinite(cap):
        raise ValueError("occupied survival depth needs a finite cap")
    keep = hit & (hi >= 0.0) & (lo <= cap)
    return _propagate_reach(owner[keep], np.maximum(lo[keep], 0.0), np.minimum(hi[keep], cap), n, cap)


def _blocked_arcs_batch(batch: ConfigBatch, L: float):
    """Blocked half-widths of every grain that can reach depth L, with owners.

    Configurations with a grain covering o are flagged in ``dead``.
    """
    owner = batch.owner
    dead = np.zeros(batch.size, dtype=bool)
    dead[owner[batch.radius >= batch.rho]] = True
    keep = (batch.rho < L + batch.radius) & (batch.radius < batch.rho)
    psi = blocking_halfwidth_closed(batch.rho[keep], batch.radius[keep], L)
    return owner[keep], batch.theta[keep], psi, dead


def visible_measure_batch(batch: ConfigBatch, L: float) -> np.ndarray:
    """Angular measure of ``visible_arcs_vacant`` for every configuration of a batch."""
    own, th, psi, dead = _blocked_arcs_batch(batch, L)
    lo = np.remainder(th - psi, TWO_PI)
    hi = lo + 2.0 * psi
    wrap = hi > TWO_PI
    own = np.concatenate([own, own[wrap]])
    lo = np.concatenate([lo, np.zeros(int(wrap.sum()))])
    hi = np.concatenate([np.minimum(hi, TWO_PI), hi[wrap] - TWO_PI])
    order = np.lexsort((lo, own))
    own, lo, hi = own[order], lo[order], hi[order]
    # segmented running maximum: shift each configuration onto its own stretch of the line
    shift = own * (2.0 * TWO_PI)
    reach = np.maximum.accumulate(hi + shift) - shift
    prev = np.concatenate([[0.0], reach[:-1]])
    first = np.ones(len(own), dtype=bool)
    first[1:] = own[1:] != own[:-1]
    prev = np.where(first, lo, prev)
    covered = np.maximum(hi - np.maximum(lo, prev), 0.0)
    blocked = np.bincount(own, weights=covered, minlength=batch.size)
    out = np.maximum(TWO_PI - blocked, 0.0)
    out[dead] = 0.0
    return out


def directions_visible_batch(batch: ConfigBatch, L: float, phis) -> np.ndarray:
    """Boolean (configurations x directions): is the length-L segment at each angle vacant."""
    phis = np.asarray(phis, dtype=float).reshape(-1)
    own, th, psi, dead = _blocked_arcs_batch(batch, L)
    out = np.ones((batch.size, len(phis)), dtype=bool)
    for k, phi in enumerate(phis):
        hit = np.abs(wrap_angle(th - phi)) < psi
        out[own[hit], k] = False
    out[dead] = False
    return out


def visible_grid_batch(batch: ConfigBatch, L: float, m: int, offset: float = 0.0) -> np.ndarray:
    """Like ``directions_visible_batch`` for the m equally spaced angles offset + 2 pi k / m.

    Each grain's blocked arc is expanded into the grid indices it covers, so
    the cost is the number of (grain, covered angle) pairs rather than grains
    times angles.
    """
    own, th, psi, dead = _blocked_arcs_batch(batch, L)
    step = TWO_PI / m
    # open arc (th - psi, th + psi): integer k with |offset + k step - th| < psi
    a = (th - psi - offset) / step
    b = (th + psi - offset) / step
    start = np.floor(a).astype(np.int64) + 1
    stop = np.ceil(b).astype(np.int64)
    stop = np.minimum(stop, start + m)
    g, k = _ranges_to_pairs(start, stop)
    out = np.ones((batch.size, m), dtype=bool)
    out[own[g], np.remainder(k, m)] = False
    out[dead] = False
    return out
