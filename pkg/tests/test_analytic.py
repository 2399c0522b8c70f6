import math
import random

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypvis.analytic import (
    AlphaValue,
    InnerIntegral,
    NumericalError,
    OccupiedEquation,
    alpha_occupied,
    alpha_vacant,
    convergence_diagnostic,
    f_vacant,
    fit_alpha,
    g_profile,
    occupied_kernel,
)
from hypvis.hypgeo import ball_area
from hypvis.sampler import RadiusLaw

mp.mp.dps = 30


def mp_g(s, R):
    return mp.sqrt((mp.cosh(R) / mp.cosh(s)) ** 2 - 1)


def mp_kernel(t, lam, R, mode="density"):
    u = mp.mpf(t) / 2
    surv = mp.exp(-4 * lam * mp.quad(lambda s: mp_g(s, R), [0, u]))
    return surv if mode == "literal" else 2 * lam * mp_g(u, R) * surv


def test_alpha_vacant_values():
    assert alpha_vacant(0.1, 1.0).value == pytest.approx(0.2350402387, abs=1e-10)
    assert alpha_vacant(0.0, 1.0).value == 0.0
    two = RadiusLaw("two-point", (0.5, 1.0, 0.5))
    assert alpha_vacant(0.2, two).value == pytest.approx(0.2 * (math.sinh(0.5) + math.sinh(1.0)), abs=1e-12)
    assert alpha_vacant(0.2, two).value == pytest.approx(0.3392593, abs=1e-7)


def test_f_vacant_values():
    assert f_vacant(0.0, 1.0, 3.0) == 1.0
    assert f_vacant(0.3, 1.0, 0.0) == pytest.approx(math.exp(-0.3 * ball_area(1.0)))
    ref = mp.exp(-0.2 * (2 * mp.pi * (mp.cosh(0.8) - 1) + 4 * mp.sinh(0.8)))
    assert f_vacant(0.2, 0.8, 2.0) == pytest.approx(float(ref), rel=1e-13)
    assert f_vacant(0.2, 0.8, 2.0) == pytest.approx(0.32158, abs=1e-5)


@given(st.floats(0.01, 1.0), st.floats(0.1, 2.0), st.floats(0.0, 10.0))
def test_f_vacant_decays_at_rate_alpha(lam, R, r):
    a = alpha_vacant(lam, R).value
    assert f_vacant(lam, R, r + 1.0) / f_vacant(lam, R, r) == pytest.approx(math.exp(-a), rel=1e-12)


def test_g_profile():
    assert g_profile(0.0, 1.3) == pytest.approx(math.sinh(1.3))
    assert g_profile(1.3, 1.3) == 0.0
    assert g_profile(0.4, 0.8) == pytest.approx(float(mp_g(0.4, 0.8)), abs=1e-14)
    assert g_profile(0.4, 0.8) == pytest.approx(0.7283603, abs=1e-7)
    with pytest.raises(ValueError):
        g_profile(0.9, 0.8)


def test_inner_integral_against_mpmath():
    inner = InnerIntegral(1.0)
    for u in (0.0, 0.1, 0.37, 0.5, 0.99, 1.0):
        ref = mp.quad(lambda s: mp_g(s, 1.0), [0, u])
        assert inner(u) == pytest.approx(float(ref), abs=1e-10)


def test_kernel_endpoints_and_modes():
    lam, R = 0.3, 1.0
    assert occupied_kernel(0.0, lam, R) == pytest.approx(2 * lam * math.sinh(R))
    assert occupied_kernel(2 * R, lam, R) == pytest.approx(0.0, abs=1e-12)
    assert occupied_kernel(0.0, lam, R, "literal") == pytest.approx(1.0)
    assert occupied_kernel(1.0, lam, R) == pytest.approx(float(mp_kernel(1.0, lam, R)), abs=1e-10)
    assert occupied_kernel(1.0, lam, R, "literal") == pytest.approx(
        float(mp_kernel(1.0, lam, R, "literal")), abs=1e-10)


def test_phi_against_mpmath():
    eq = OccupiedEquation(0.3, 1.0)
    ref = mp.quad(lambda t: mp.exp(mp.mpf("0.5") * t) * mp_kernel(t, 0.3, 1.0), [0, 1, 2])
    val, err = eq.phi(0.5)
    assert val == pytest.approx(float(ref), abs=1e-9)
    assert err <= 1e-10


@given(st.floats(0.05, 2.0), st.floats(0.2, 2.0))
def test_phi0_below_one_in_density_mode(lam, R):
    eq = OccupiedEquation(lam, R)
    p0 = eq.phi0()
    assert 0 < p0 < 1
    assert p0 == pytest.approx(1 - math.exp(-4 * lam * eq.inner.total), rel=1e-12)


def test_occupied_root():
    eq = OccupiedEquation(0.3, 1.0)
    a = eq.solve()
    assert abs(eq.phi(a.value)[0] - 1.0) <= 1e-8
    assert eq.phi0() < 1.0
    assert a.tolerance < 1e-8
    assert a.value == pytest.approx(0.6021351, abs=1e-7)


def test_occupied_alpha_decreases_with_intensity():
    vals = [alpha_occupied(lam, 1.0).value for lam in (0.2, 0.4, 0.8)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_literal_mode_without_root_raises():
    with pytest.raises(NumericalError):
        alpha_occupied(0.3, 1.0, mode="literal")


def test_literal_mode_with_root():
    eq = OccupiedEquation(0.4, 1.0, mode="literal")
    assert eq.phi0() < 1
    a = eq.solve()
    assert abs(eq.phi(a.value)[0] - 1) <= 1e-8


def test_bad_arguments():
    with pytest.raises(ValueError):
        OccupiedEquation(0.0, 1.0)
    with pytest.raises(ValueError):
        OccupiedEquation(0.3, 1.0, mode="other")
    with pytest.raises(ValueError):
        AlphaValue(0.1, "x", -1.0)


def test_convergence_diagnostic_within_tolerance():
    for row in convergence_diagnostic():
        assert row["estimate"] <= row["tol"]
        assert row["error"] <= row["tol"]


def test_fit_exact_exponential():
    pts = [(r, math.exp(-0.3 * r), 0.0) for r in range(1, 7)]
    fit = fit_alpha(pts)
    assert fit.value == pytest.approx(0.3, abs=1e-12)
    assert fit.stderr < 1e-8  # roundoff only


def test_fit_is_order_independent():
    rng = np.random.default_rng(0)
    pts = [(r, math.exp(-0.4 * r) * (1 + 0.05 * rng.standard_normal()), 0.01) for r in range(1, 8)]
    a = fit_alpha(pts)
    random.Random(1).shuffle(pts)
    b = fit_alpha(pts)
    assert a.value == pytest.approx(b.value, abs=1e-12)
    assert a.stderr == pytest.approx(b.stderr, abs=1e-12)


def test_fit_rejects_zero_counts():
    with pytest.raises(ValueError, match="reduce the depth"):
        fit_alpha([(1, 0.5, 0.01), (2, 0.2, 0.01), (3, 0.0, 0.0), (4, 0.0, 0.0)])
