"""Poisson point processes under hyperbolic area measure, restricted to a disk.

Randomness is counter-based: every stream is a Philox generator keyed by a
``SeedSequence`` built from ``(base, stream)``.  The same pair always yields
the same draws, independent of how work is scheduled across processes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .hypgeo import TWO_PI, Grain, HPoint, ball_area

log = logging.getLogger(__name__)

MAX_MEAN_COUNT = 1e9


@dataclass(frozen=True)
class Window:
    rho_w: float

    def __post_init__(self):
        if not (math.isfinite(self.rho_w) and self.rho_w > 0):
            raise ValueError(f"window radius must be > 0, got {self.rho_w}")

    @property
    def area(self) -> float:
        return float(ball_area(self.rho_w))


@dataclass(frozen=True)
class Seed:
    base: int
    stream: int = 0

    def __post_init__(self):
        for v in (self.base, self.stream):
            if not (0 <= int(v) < 2**64):
                raise ValueError("seed components must be unsigned 64-bit integers")

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.base), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "Seed":
        """Stream for sub-unit ``index`` (e.g. a replicate batch) of this stream.

        Mixes the pair with the SplitMix64 finaliser so children of different
        streams do not collide.
        """
        return Seed(self.base, splitmix64(int(self.stream) * 0x9E3779B97F4A7C15 + int(index) + 1))


def splitmix64(x: int) -> int:
    mask = (1 << 64) - 1
    z = (x + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RadiusLaw:
    """Grain radius distribution.

    kind is one of ``constant`` (params: R), ``two-point`` (params: R1, R2, p
    where p = P(R = R1)) or ``exponential`` (params: rate, q; truncated at the
    q-quantile, default q = 1 - 1e-6).
    """

    kind: str
    params: tuple = field(default_factory=tuple)

    def __post_init__(self):
        kind = self.kind.replace("_", "-").lower()
        object.__setattr__(self, "kind", kind)
        p = tuple(float(x) for x in self.params)
        if kind == "constant":
            if len(p) != 1 or p[0] <= 0:
                raise ValueError("constant law needs one positive radius")
        elif kind == "two-point":
            if len(p) != 3 or min(p[0], p[1]) <= 0 or not 0 <= p[2] <= 1:
                raise ValueError("two-point law needs (R1 > 0, R2 > 0, p in [0, 1])")
        elif kind == "exponential":
            if len(p) == 1:
                p = (p[0], 1.0 - 1e-6)
            if len(p) != 2 or not 0 < p[1] < 1:
                raise ValueError("exponential law needs (rate, q) with q in (0, 1)")
            if p[0] <= 1.0:
                raise ValueError("exponential law needs rate > 1 so that E[e^R] is finite")
        else:
            raise ValueError(f"unknown radius law {self.kind!r}")
        object.__setattr__(self, "params", p)

    @classmethod
    def constant(cls, R: float) -> "RadiusLaw":
        return cls("constant", (R,))

    @property
    def r_max(self) -> float:
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "two-point":
            return max(self.params[0], self.params[1])
        rate, q = self.params
        return -math.log1p(-q) / rate

    @property
    def tail_mass(self) -> float:
        """Probability mass discarded by truncation (0 for bounded laws)."""
        return 1.0 - self.params[1] if self.kind == "exponential" else 0.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(n, self.params[0])
        if self.kind == "two-point":
            R1, R2, p = self.params
            return np.where(rng.random(n) < p, R1, R2)
        rate, q = self.params
        return -np.log1p(-q * rng.random(n)) / rate

    def _exp_moment(self, s: float) -> float:
        # E[e^{sR}] under the truncated exponential density
        rate, q = self.params
        rm = self.r_max
        return rate * -math.expm1(-(rate - s) * rm) / (rate - s) / q

    def mean(self) -> float:
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "two-point":
            R1, R2, p = self.params
            return p * R1 + (1 - p) * R2
        rate, q = self.params
        rm = self.r_max
        # integral of r * rate * exp(-rate r) on [0, rm], normalised by q
        return (1.0 - math.exp(-rate * rm) * (1.0 + rate * rm)) / rate / q

    def mean_sinh(self) -> float:
        if self.kind == "constant":
            return math.sinh(self.params[0])
        if self.kind == "two-point":
            R1, R2, p = self.params
            return p * math.sinh(R1) + (1 - p) * math.sinh(R2)
        return 0.5 * (self._exp_moment(1.0) - self._exp_moment(-1.0))

    def mean_cosh(self) -> float:
        if self.kind == "constant":
            return math.cosh(self.params[0])
        if self.kind == "two-point":
            R1, R2, p = self.params
            return p * math.cosh(R1) + (1 - p) * math.cosh(R2)
        return 0.5 * (self._exp_moment(1.0) + self._exp_moment(-1.0))

    def to_dict(self) -> dict:
        return {"law": self.kind, "params": list(self.params)}


def radial_inverse_cdf(u, rho_w: float):
    """Invert the radial CDF (cosh rho - 1) / (cosh rho_w - 1).

    Written as rho = 2 asinh(sqrt(u) sinh(rho_w / 2)), the same map as
    arccosh(1 + u (cosh rho_w - 1)) without the loss of precision near u = 0.
    """
    return 2.0 * np.arcsinh(np.sqrt(np.asarray(u, dtype=float)) * math.sinh(rho_w / 2.0))


def radial_cdf(rho, rho_w: float):
    # (cosh rho - 1) / (cosh rho_w - 1) in half-angle form
    return (np.sinh(0.5 * np.asarray(rho, dtype=float)) / math.sinh(0.5 * rho_w)) ** 2


def _mean_count(lam: float, rho: float) -> float:
    if lam < 0:
        raise ValueError("intensity must be >= 0")
    mean = lam * float(ball_area(rho))
    if mean > MAX_MEAN_COUNT:
        raise ValueError(f"expected point count {mean:.3g} exceeds the resource guard {MAX_MEAN_COUNT:.0e}")
    return mean


def sample_count(lam: float, w: Window, rng: np.random.Generator | Seed) -> int:
    if isinstance(rng, Seed):
        rng = rng.rng()
    return int(rng.poisson(_mean_count(lam, w.rho_w)))


def sample_points(w: Window, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n`` i.i.d. points uniform under hyperbolic area in the window: (rho, theta)."""
    u = rng.random(n)
    theta = TWO_PI * rng.random(n)
    return radial_inverse_cdf(u, w.rho_w), theta


def sample_point(w: Window, rng: np.random.Generator) -> HPoint:
    rho, theta = sample_points(w, rng, 1)
    return HPoint(float(rho[0]), float(theta[0]))


@dataclass(frozen=True, eq=False)
class Configuration:
    """One realisation of the Boolean model: grain centres and radii in a window.

    ``complete`` is the radius of the disk around o inside which the point
    process was sampled; by default the whole window.  Experiments that only
    probe segments of length L sample the restriction to the disk of radius
    L + r_max, which has the same law there (a Poisson process restricted to
    a subset is Poisson) and is what any segment query can see.
    """

    rho: np.ndarray
    theta: np.ndarray
    radius: np.ndarray
    window: Window
    lam: float = 0.0
    law: RadiusLaw | None = None
    complete: float | None = None

    def __post_init__(self):
        for name in ("rho", "theta", "radius"):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (len(self.rho) == len(self.theta) == len(self.radius)):
            raise ValueError("grain arrays must have equal length")
        if np.any(self.radius <= 0):
            raise ValueError("grain radii must be > 0")
        if np.any(self.rho > self.window.rho_w * (1 + 1e-12)):
            raise ValueError("grain centre outside the window")
        if self.complete is None:
            object.__setattr__(self, "complete", self.window.rho_w)

    def __len__(self):
        return len(self.rho)

    @property
    def grains(self) -> list[Grain]:
        return [Grain(HPoint(r, t), R) for r, t, R in zip(self.rho, self.theta, self.radius)]

    @property
    def r_max(self) -> float:
        if self.law is not None:
            return self.law.r_max
        return float(self.radius.max()) if len(self) else 0.0

    @classmethod
    def from_grains(cls, grains, window: Window, **kw) -> "Configuration":
        grains = list(grains)
        return cls(
            np.array([g.center.rho for g in grains]),
            np.array([g.center.theta for g in grains]),
            np.array([g.radius for g in grains]),
            window, **kw,
        )

    def rotated(self, phi: float) -> "Configuration":
        return Configuration(self.rho, np.remainder(self.theta + phi, TWO_PI), self.radius,
                             self.window, self.lam, self.law, self.complete)

    def to_rows(self):
        return zip(self.rho.tolist(), self.theta.tolist(), self.radius.tolist())

    def save(self, path) -> None:
        """Write one grain per row (rho, theta, radius) after ``#`` metadata lines."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# window={self.window.rho_w!r}\n")
            fh.write(f"# lambda={self.lam!r}\n")
            fh.write(f"# complete={self.complete!r}\n")
            if self.law is not None:
                fh.write(f"# law={self.law.kind}:{','.join(repr(p) for p in self.law.params)}\n")
            fh.write("rho,theta,radius\n")
            for r, t, R in self.to_rows():
                fh.write(f"{r!r},{t!r},{R!r}\n")

    @classmethod
    def load(cls, path) -> "Configuration":
        meta, rows = {}, []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    meta[key] = value
                elif line[0].isalpha():
                    continue
                else:
                    rows.append([float(x) for x in line.split(",")])
        arr = np.array(rows, dtype=float).reshape(-1, 3)
        law = None
        if "law" in meta:
            kind, _, params = meta["law"].partition(":")
            law = RadiusLaw(kind, tuple(float(x) for x in params.split(",") if x))
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], Window(float(meta["window"])),
                   float(meta.get("lambda", 0.0)), law, float(meta.get("complete", meta["window"])))


def sample_configuration(lam: float, w: Window, law: RadiusLaw, seed: Seed,
                         reach: float | None = None) -> Configuration:
    """Grains with i.i.d. centres uniform in the window and i.i.d. radii.

    With ``reach`` set, only the part of the process inside the disk of radius
    ``reach`` is drawn (see ``Configuration``).
    """
    rng = seed.rng()
    sub = w if reach is None or reach >= w.rho_w else Window(reach)
    n = sample_count(lam, sub, rng)
    rho, theta = sample_points(sub, rng, n)
    radius = law.sample(rng, n)
    return Configuration(rho, theta, radius, w, lam, law, sub.rho_w)


@dataclass(frozen=True, eq=False)
class ConfigBatch:
    """Many configurations stored flat; grains of config i are ``offsets[i]:offsets[i+1]``."""

    rho: np.ndarray
    theta: np.ndarray
    radius: np.ndarray
    offsets: np.ndarray
    window: Window
    lam: float
    law: RadiusLaw
    complete: float

    @property
    def size(self) -> int:
        return len(self.offsets) - 1

    @property
    def owner(self) -> np.ndarray:
        """Configuration index of every grain."""
        return np.repeat(np.arange(self.size), np.diff(self.offsets))

    def config(self, i: int) -> Configuration:
        s = slice(self.offsets[i], self.offsets[i + 1])
        return Configuration(self.rho[s], self.theta[s], self.radius[s], self.window,
                             self.lam, self.law, self.complete)

    def __iter__(self):
        return (self.config(i) for i in range(self.size))


def sample_batch(lam: float, w: Window, law: RadiusLaw, seed: Seed, size: int,
                 reach: float | None = None) -> ConfigBatch:
    """``size`` independent configurations drawn from one stream."""
    rng = seed.rng()
    sub = w if reach is None or reach >= w.rho_w else Window(reach)
    mean = _mean_count(lam, sub.rho_w)
    counts = rng.poisson(mean, size=size)
    total = int(counts.sum())
    rho, theta = sample_points(sub, rng, total)
    radius = law.sample(rng, total)
    offsets = np.zeros(size + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return ConfigBatch(rho, theta, radius, offsets, w, lam, law, sub.rho_w)


def sample_strip_batch(lam: float, law: RadiusLaw, length: float, seed: Seed, size: int,
                       theta0: float = 0.0) -> ConfigBatch:
    """Configurations restricted to the part of the plane that can touch one segment.

    Only grains within r_max of the segment of length ``length`` at angle
    ``theta0`` can meet it, and all of them have centres in the Fermi-coordinate
    rectangle t in [-r_max, length + r_max], |d| <= r_max around the line
    (t: foot position along the line, d: signed distance to it).  Area there
    is cosh(d) dd dt, so the rectangle has area 2 sinh(r_max)(length + 2 r_max)
    and d is drawn as asinh(sinh(r_max) (2u - 1)).
    """
    rng = seed.rng()
    rm = law.r_max
    span = length + 2.0 * rm
    mean = lam * 2.0 * math.sinh(rm) * span
    if mean > MAX_MEAN_COUNT:
        raise ValueError("expected point count exceeds the resource guard")
    counts = rng.poisson(mean, size=size)
    total = int(counts.sum())
    t = rng.random(total) * span - rm
    d = np.arcsinh(math.sinh(rm) * (2.0 * rng.random(total) - 1.0))
    radius = law.sample(rng, total)
    # polar coordinates: cosh rho = cosh t cosh d, tan(angle) = tanh d / sinh t
    s2 = np.sinh(0.5 * t) ** 2 * np.cosh(d) + np.sinh(0.5 * d) ** 2
    rho = 2.0 * np.arcsinh(np.sqrt(s2))
    theta = np.remainder(theta0 + np.arctan2(np.tanh(d), np.sinh(t)), TWO_PI)
    offsets = np.zeros(size + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return ConfigBatch(rho, theta, radius, offsets, Window(max(length + rm, 1e-9)), lam, law, length + rm)
