"""Closed-form geometry of the hyperbolic plane in polar coordinates about o.

Points are stored as (rho, theta): hyperbolic distance from the fixed origin
and an angle.  Every geodesic segment we care about starts at the origin, so
all the formulas below reduce to right-triangle trigonometry.

The array functions (``*_polar``) accept numpy arrays and broadcast; the
dataclass wrappers are thin conveniences for scalar use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
CLAMP_TOL = 1e-12
ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class HPoint:
    rho: float
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho >= 0.0):
            raise ValueError(f"rho must be finite and >= 0, got {self.rho}")
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    def to_poincare(self) -> complex:
        """Poincare-disk coordinate, for plotting only."""
        return math.tanh(self.rho / 2.0) * complex(math.cos(self.theta), math.sin(self.theta))


ORIGIN = HPoint(0.0, 0.0)


@dataclass(frozen=True)
class RaySegment:
    """Geodesic segment of hyperbolic length ``length`` leaving o at angle ``theta0``."""

    theta0: float
    length: float

    def __post_init__(self):
        if not (math.isfinite(self.length) and self.length > 0.0):
            raise ValueError(f"segment length must be finite and > 0, got {self.length}")
        object.__setattr__(self, "theta0", float(self.theta0) % TWO_PI)

    def point_at(self, t: float) -> HPoint:
        return HPoint(t, self.theta0)

    @property
    def endpoint(self) -> HPoint:
        return HPoint(self.length, self.theta0)


@dataclass(frozen=True)
class Grain:
    """Closed hyperbolic disk obstacle."""

    center: HPoint
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"grain radius must be > 0, got {self.radius}")


def wrap_angle(x):
    """Signed angular difference reduced to [-pi, pi]."""
    return np.remainder(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi


# ---------------------------------------------------------------------------
# array kernels

def dist_polar(rho1, th1, rho2, th2):
    """Hyperbolic distance between polar points.

    Uses sinh^2(d/2) = sinh^2((r1-r2)/2) + sinh r1 sinh r2 sin^2(dth/2), which
    is the law of cosines rewritten without the cancellation that ruins it
    for nearby points far from the origin.
    """
    rho1 = np.asarray(rho1, dtype=float)
    rho2 = np.asarray(rho2, dtype=float)
    half = np.sin(0.5 * (np.asarray(th1, dtype=float) - np.asarray(th2, dtype=float)))
    s2 = np.sinh(0.5 * (rho1 - rho2)) ** 2 + np.sinh(rho1) * np.sinh(rho2) * half * half
    return 2.0 * np.arcsinh(np.sqrt(np.maximum(s2, 0.0)))


def _perp_cosh(rho, delta):
    # cosh of the distance from (rho, delta) to the full geodesic line through o at angle 0
    return np.sqrt(1.0 + (np.sinh(rho) * np.sin(delta)) ** 2)


def _foot(rho, delta, coshd):
    # signed arclength of the perpendicular foot on the line: sinh t = sinh(rho) cos(delta) / cosh(d)
    return np.arcsinh(np.sinh(rho) * np.cos(delta) / coshd)


def dist_to_ray_segment_polar(rho, delta, length):
    """Distance from (rho, delta) to the segment [0, length] on the ray at angle 0.

    ``delta`` is the angle of the point relative to the segment direction.
    """
    rho = np.asarray(rho, dtype=float)
    delta = np.asarray(delta, dtype=float)
    length = np.asarray(length, dtype=float)
    coshd = _perp_cosh(rho, delta)
    foot = _foot(rho, delta, coshd)
    perp = np.arcsinh(np.sinh(rho) * np.abs(np.sin(delta)))
    to_end = dist_polar(rho, delta, length, 0.0)
    out = np.where(foot >= length, to_end, perp)
    return np.where(np.cos(delta) <= 0.0, rho, out)


def ray_interval_polar(rho, delta, radius):
    """Parameter interval [t0 - w, t0 + w] where the full line through o meets a disk.

    Returns (lo, hi, hit) arrays; ``hit`` is False where the disk misses the line.
    Not clipped to the segment.
    """
    rho = np.asarray(rho, dtype=float)
    delta = np.asarray(delta, dtype=float)
    radius = np.asarray(radius, dtype=float)
    coshd = _perp_cosh(rho, delta)
    t0 = _foot(rho, delta, coshd)
    ratio = np.cosh(radius) / coshd
    hit = ratio >= 1.0
    w = np.arccosh(np.maximum(ratio, 1.0))
    return t0 - w, t0 + w, hit


def blocking_halfwidth_polar(rho, radius, length, tol=ANGLE_TOL):
    """Vectorised bisection for the half-width of directions a grain blocks.

    The segment distance is nondecreasing in |psi|, so the blocked set of
    offsets is an interval [-psi*, psi*].  Blocked means sinh-perpendicular
    or endpoint distance <= radius; both are also bounded by the infinite-ray
    condition sinh(rho) sin(psi) <= sinh(radius), which gives the bracket.
    Inputs must satisfy radius < rho <= length + radius.
    """
    rho = np.asarray(rho, dtype=float)
    radius = np.asarray(radius, dtype=float)
    length = np.broadcast_to(np.asarray(length, dtype=float), rho.shape)
    lo = np.zeros_like(rho)
    hi = np.arcsin(np.minimum(np.sinh(radius) / np.sinh(rho), 1.0))
    # hi may itself be blocked (perpendicular case attains it exactly)
    done = dist_to_ray_segment_polar(rho, hi, length) <= radius
    lo = np.where(done, hi, lo)
    active = ~done & (hi - lo > tol)
    while np.any(active):
        idx = np.flatnonzero(active)
        mid = 0.5 * (lo[idx] + hi[idx])
        blocked = dist_to_ray_segment_polar(rho[idx], mid, length[idx]) <= radius[idx]
        lo[idx] = np.where(blocked, mid, lo[idx])
        hi[idx] = np.where(blocked, hi[idx], mid)
        active[idx] = hi[idx] - lo[idx] > tol
    return lo


def blocking_halfwidth_closed(rho, radius, length):
    """Closed form of ``blocking_halfwidth_polar``.

    At the perpendicular candidate psi_p = asin(sinh R / sinh rho) the foot of
    the perpendicular is either inside the segment (then psi* = psi_p) or past
    its end, in which case the endpoint is the nearest point for every psi
    near psi* and cosh R = cosh(rho - L) + 2 sinh rho sinh L sin^2(psi/2).
    """
    rho = np.asarray(rho, dtype=float)
    radius = np.asarray(radius, dtype=float)
    length = np.asarray(length, dtype=float)
    sr = np.sinh(rho)
    psi_p = np.arcsin(np.minimum(np.sinh(radius) / sr, 1.0))
    foot = np.arcsinh(sr * np.cos(psi_p) / np.cosh(radius))
    num = np.sinh(0.5 * radius) ** 2 - np.sinh(0.5 * (rho - length)) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s2 = np.clip(num / (sr * np.sinh(length)), 0.0, 1.0)
    psi_e = 2.0 * np.arcsin(np.sqrt(s2))
    return np.where(foot <= length, psi_p, np.minimum(psi_e, psi_p))


# ---------------------------------------------------------------------------
# scalar API

def dist(a: HPoint, b: HPoint) -> float:
    return float(dist_polar(a.rho, a.theta, b.rho, b.theta))


def dist_to_ray_segment(p: HPoint, seg: RaySegment) -> float:
    return float(dist_to_ray_segment_polar(p.rho, p.theta - seg.theta0, seg.length))


def ball_area(R):
    return TWO_PI * (np.cosh(R) - 1.0)


def sausage_area(r, R):
    """Area of the R-neighbourhood of a geodesic segment of length r."""
    return ball_area(R) + 2.0 * r * np.sinh(R)


def ball_ray_interval(g: Grain, seg: RaySegment) -> tuple[float, float] | None:
    """Arclength interval of ``seg`` lying inside the closed disk ``g``, or None."""
    lo, hi, hit = ray_interval_polar(g.center.rho, g.center.theta - seg.theta0, g.radius)
    if not hit:
        return None
    lo, hi = max(float(lo), 0.0), min(float(hi), seg.length)
    if lo > hi:
        return None
    return lo, hi


def blocking_halfwidth(g: Grain, L: float, tol: float = ANGLE_TOL) -> float:
    """Half-width psi* of the arc of directions whose length-L segment meets ``g``.

    Raises ValueError when the grain covers the origin (every direction is
    blocked) or lies out of reach of every segment of length L.
    """
    rho, R = g.center.rho, g.radius
    if R >= rho:
        raise ValueError("grain covers the origin; every direction is blocked")
    if rho > L + R:
        raise ValueError("grain is out of reach of segments of this length")
    return float(blocking_halfwidth_polar(np.array([rho]), np.array([R]), L, tol)[0])
