"""alpha-values of the Boolean model and the vacant-phase segment probability.

Vacant phase: a segment of length r lies in the vacant set iff no centre
falls in its R-neighbourhood, so f(r) = exp(-lambda * E[sausage area]) and
alpha = 2 lambda E[sinh R].

Occupied phase: the grains cut a geodesic line in a one-dimensional Boolean
model of chords.  Chords of half-length >= h arrive at rate 2 lambda g(h)
per unit length, with g(h) = sinh(arccosh(cosh R / cosh h)).  The decay
rate of f(r) is the root of

    Phi(alpha) = int_0^{2R} exp(alpha t) k(t) dt = 1,

where, in the default ``density`` mode, k = -d/dt exp(-4 lambda int_0^{t/2} g).
This is the busy-period renewal equation of the M/G/infinity queue formed by
the chords.  ``literal`` mode uses exp(-4 lambda int_0^{t/2} g) itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, stats

from .sampler import RadiusLaw

INNER_TOL = 1e-10
OUTER_TOL = 1e-10
ROOT_TOL = 1e-8
MAX_DOUBLINGS = 60

MODES = ("density", "literal")


class NumericalError(RuntimeError):
    """Quadrature or root bracketing failed."""


@dataclass(frozen=True)
class AlphaValue:
    value: float
    provenance: str
    tolerance: float
    intercept: float | None = None
    stderr: float | None = None

    def __post_init__(self):
        if not self.tolerance >= 0:
            raise ValueError("tolerance must be reported and >= 0")

    def __float__(self):
        return float(self.value)


def _as_law(R) -> RadiusLaw:
    return R if isinstance(R, RadiusLaw) else RadiusLaw.constant(float(R))


def alpha_vacant(lam: float, law) -> AlphaValue:
    if lam < 0:
        raise ValueError("intensity must be >= 0")
    law = _as_law(law)
    return AlphaValue(2.0 * lam * law.mean_sinh(), "closed-form vacant", 1e-10)


def f_vacant(lam: float, R, r):
    """Probability that a fixed segment of length r lies in the vacant phase."""
    law = _as_law(R)
    r = np.asarray(r, dtype=float)
    if lam < 0 or np.any(r < 0):
        raise ValueError("arguments must be >= 0")
    mean_area = 2.0 * math.pi * (law.mean_cosh() - 1.0) + 2.0 * r * law.mean_sinh()
    out = np.exp(-lam * mean_area)
    return float(out) if out.ndim == 0 else out


def g_profile(s: float, R: float) -> float:
    if s < 0 or s > R:
        raise ValueError(f"g_profile needs 0 <= s <= R, got s={s}, R={R}")
    return math.sinh(math.acosh(max(math.cosh(R) / math.cosh(s), 1.0)))


class InnerIntegral:
    """u -> int_0^u g_profile(s, R) ds on [0, R], accumulated over a fixed grid.

    Values at the grid nodes are built once by summing short quadratures; a
    query adds one more short quadrature from the nearest node below.
    """

    def __init__(self, R: float, nodes: int = 64, tol: float = INNER_TOL):
        self.R = float(R)
        self.tol = tol
        self.grid = np.linspace(0.0, self.R, nodes + 1)
        piece_tol = tol / (2 * nodes)
        pieces = [self._quad(a, b, piece_tol) for a, b in zip(self.grid[:-1], self.grid[1:])]
        self.cum = np.concatenate([[0.0], np.cumsum(pieces)])
        self._piece_tol = piece_tol

    def _quad(self, a, b, tol):
        val, err = integrate.quad(g_profile, a, b, args=(self.R,), epsabs=tol, epsrel=0.0, limit=200)
        if err > 10 * tol:
            raise NumericalError(f"inner quadrature error {err:.2e} above tolerance")
        return val

    def __call__(self, u: float) -> float:
        if u <= 0:
            return 0.0
        u = min(u, self.R)
        k = min(int(u / self.R * (len(self.grid) - 1)), len(self.grid) - 2)
        return float(self.cum[k] + self._quad(self.grid[k], u, self._piece_tol))

    @property
    def total(self) -> float:
        return float(self.cum[-1])


class OccupiedEquation:
    """The renewal equation Phi(alpha) = 1 for given (lambda, R, mode)."""

    def __init__(self, lam: float, R: float, mode: str = "density"):
        if lam <= 0 or R <= 0:
            raise ValueError("occupied alpha needs lambda > 0 and R > 0")
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.lam, self.R, self.mode = float(lam), float(R), mode
        self.inner = InnerIntegral(R)

    def kernel(self, t: float) -> float:
        if t < 0 or t > 2 * self.R * (1 + 1e-15):
            raise ValueError("kernel defined on [0, 2R]")
        u = min(0.5 * t, self.R)
        survival = math.exp(-4.0 * self.lam * self.inner(u))
        if self.mode == "literal":
            return survival
        return 2.0 * self.lam * g_profile(u, self.R) * survival

    def phi(self, alpha: float, tol: float = OUTER_TOL) -> tuple[float, float]:
        """(Phi(alpha), quadrature error estimate)."""
        val, err = integrate.quad(lambda t: math.exp(alpha * t) * self.kernel(t),
                                  0.0, 2 * self.R, epsabs=tol, epsrel=0.0, limit=400)
        if err > 10 * tol:
            raise NumericalError(f"outer quadrature error {err:.2e} above tolerance")
        return val, err

    def phi0(self) -> float:
        """Phi(0); in density mode exactly 1 - exp(-4 lambda int_0^R g)."""
        if self.mode == "density":
            return -math.expm1(-4.0 * self.lam * self.inner.total)
        return self.phi(0.0)[0]

    def solve(self, tol: float = ROOT_TOL) -> AlphaValue:
        F = lambda a: self.phi(a)[0] - 1.0
        if F(0.0) >= 0:
            raise NumericalError(f"Phi(0) >= 1 in {self.mode} mode: no root with alpha >= 0")
        hi = 1.0
        for _ in range(MAX_DOUBLINGS):
            if F(hi) > 0:
                break
            hi *= 2.0
        else:
            raise NumericalError("could not bracket the root of Phi(alpha) = 1")
        root = optimize.brentq(F, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
        resid = abs(F(root))
        if resid > tol:
            raise NumericalError(f"|Phi(alpha) - 1| = {resid:.2e} exceeds {tol:.0e}")
        # convert the residual into an error bound on alpha via the slope of Phi
        h = 1e-6
        slope = (F(root + h) - F(root - h)) / (2 * h)
        bound = (resid + OUTER_TOL) / slope if slope > 0 else tol
        return AlphaValue(root, f"integral-equation occupied ({self.mode})", bound)


def occupied_kernel(t: float, lam: float, R: float, mode: str = "density") -> float:
    return OccupiedEquation(lam, R, mode).kernel(t)


def alpha_occupied(lam: float, R: float, mode: str = "density") -> AlphaValue:
    return OccupiedEquation(lam, R, mode).solve()


def convergence_diagnostic(lam: float = 0.3, R: float = 1.0, alpha: float = 0.5,
                           tols=(1e-6, 5e-7, 2.5e-7, 1.25e-7)) -> list[dict]:
    """Quadrature error against a tight reference at a ladder of tolerances.

    Each row holds the requested tolerance, the reported error estimate and
    the actual deviation; both should stay below the request.
    """
    eq = OccupiedEquation(lam, R)
    ref, _ = eq.phi(alpha, tol=1e-13)
    rows = []
    for tol in tols:
        val, est = eq.phi(alpha, tol=tol)
        rows.append({"tol": tol, "estimate": est, "error": abs(val - ref)})
    return rows


def fit_alpha(points) -> AlphaValue:
    """Weighted least-squares slope of -log f against r.

    ``points`` are (r, f, stderr) triples.  Weights are the inverse variances
    of log f from the delta method; if any stderr is zero the fit falls back
    to ordinary least squares with a residual-based slope error.
    """
    arr = np.asarray(list(points), dtype=float).reshape(-1, 3)
    if len(arr) < 4:
        raise ValueError("need at least 4 depths to fit alpha")
    r, f, se = arr.T
    if np.any(f <= 0):
        raise ValueError("f = 0 at some depth: depth too large for the sample size, reduce the depth range")
    y = -np.log(f)
    if np.all(se > 0):
        w = (f / se) ** 2
        W = w.sum()
        rbar = (w * r).sum() / W
        ybar = (w * y).sum() / W
        sxx = (w * (r - rbar) ** 2).sum()
        slope = (w * (r - rbar) * (y - ybar)).sum() / sxx
        intercept = ybar - slope * rbar
        stderr = math.sqrt(1.0 / sxx)
    else:
        fit = stats.linregress(r, y)
        slope, intercept = float(fit.slope), float(fit.intercept)
        stderr = float(fit.stderr) if np.isfinite(fit.stderr) else 0.0
    return AlphaValue(float(slope), "monte-carlo fit", stderr, float(intercept), stderr)
