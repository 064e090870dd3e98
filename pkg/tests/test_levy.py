"""Levy density, exponent and moment recursion."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lflab.levy import (ExponentKind, FrechetParams, frechet_exponent, gamma_power_moment,
                        levy_density, patie_exponent, patie_levy_density, patie_psi_closed,
                        psi_closed, psi_integral)

ALPHAS = [0.2, 0.5, 0.8]
TS = [0.4, 1.0, 2.5]


def _mp_compensated_integral(dens, u):
    """int_{-inf}^0 (e^{ux}-1-ux) f(x) dx with mpmath, as an independent oracle."""
    def comp(z):
        if abs(z) < 1e-4:
            return z * z / 2 + z**3 / 6 + z**4 / 24
        return mp.exp(z) - 1 - z

    with mp.workdps(30):
        g = lambda x: comp(u * x) * dens(x)  # noqa: E731
        return float(mp.quad(g, [-mp.inf, -10, -1, -0.1, -1e-3, -1e-6, 0]))


def _mp_frechet_density(a, t):
    def f(x):
        e = mp.exp(x / a)
        om = -mp.expm1(x / a)
        return mp.exp((1 + t / a) * x) * (a + e + t * om) / (a * mp.gamma(1 - a) * om ** (a + 2))
    return f


def test_params_validation():
    with pytest.raises(ValueError):
        FrechetParams(1.0, 1.0)
    with pytest.raises(ValueError):
        FrechetParams(0.5, 0.0)
    assert FrechetParams(0.3, 2.0).xi == -0.3


@pytest.mark.parametrize("a", ALPHAS)
@pytest.mark.parametrize("t", TS)
def test_density_positive(a, t):
    x = -np.geomspace(1e-8, 30, 200)
    assert np.all(levy_density(FrechetParams(a, t), x) > 0)


def test_density_domain():
    with pytest.raises(ValueError):
        levy_density(FrechetParams(0.5, 0.5), 0.0)
    with pytest.raises(ValueError):
        patie_levy_density(0.5, 0.1)


def test_density_small_x_asymptote():
    a = 0.5
    p = FrechetParams(a, 0.5)
    want = (a + 1) * a ** (a + 1) / math.gamma(1 - a)
    assert want == pytest.approx(0.2992063, rel=1e-5)
    x = -1e-6
    assert levy_density(p, x) * abs(x) ** (a + 2) == pytest.approx(want, rel=1e-4)


@pytest.mark.parametrize("a", ALPHAS)
@pytest.mark.parametrize("t", TS)
def test_density_exponential_tail(a, t):
    c = (a + t) / (a * math.gamma(1 - a))
    x = -30.0
    ratio = levy_density(FrechetParams(a, t), x) / (c * math.exp((1 + t / a) * x))
    assert ratio == pytest.approx(1.0, rel=1e-3)


def test_density_matches_mpmath_form():
    a, t = 0.3, 2.0
    f = _mp_frechet_density(a, t)
    for x in (-1e-5, -0.01, -0.7, -4.0):
        assert levy_density(FrechetParams(a, t), x) == pytest.approx(float(f(x)), rel=1e-10)


def test_compensated_integral_oracle():
    a, t = 0.5, 0.5
    got = _mp_compensated_integral(_mp_frechet_density(a, t), 1)
    assert got == pytest.approx(0.3220373, abs=1e-7)
    spec = frechet_exponent(FrechetParams(a, t))
    assert psi_integral(spec, 1.0) - spec.drift_m == pytest.approx(got, rel=1e-9)


def test_levy_measure_integrates_min_one_x2():
    a, t = 0.5, 0.5
    f = _mp_frechet_density(a, t)
    v = mp.quad(lambda x: min(1, x * x) * f(x), [-mp.inf, -1, -1e-3, 0])
    assert math.isfinite(float(v)) and float(v) > 0


@pytest.mark.parametrize("u, want", [(0.0, 0.0), (1.0, 0.8862269255), (2.0, 2.2567583342)])
def test_psi_closed_examples(u, want):
    assert psi_closed(FrechetParams(0.5, 0.5), u) == pytest.approx(want, rel=1e-10, abs=1e-15)


def test_psi_closed_domain():
    with pytest.raises(ValueError):
        psi_closed(FrechetParams(0.5, 0.5), -1.0)
    with pytest.raises(ValueError):
        psi_integral(frechet_exponent(FrechetParams(0.5, 0.5)), 1.0, tol=0.0)


@pytest.mark.parametrize("a", ALPHAS)
@pytest.mark.parametrize("t", TS)
def test_psi_convex_increasing(a, t):
    p = FrechetParams(a, t)
    u = np.linspace(0, 8, 81)
    v = np.array([psi_closed(p, x) for x in u])
    assert v[0] == 0.0
    assert np.all(np.diff(v) > 0)
    assert np.all(np.diff(v, 2) > -1e-12)


@pytest.mark.parametrize("a", ALPHAS)
@pytest.mark.parametrize("t", TS)
def test_drift_is_psi_slope_at_zero(a, t):
    spec = frechet_exponent(FrechetParams(a, t))
    assert spec.kind is ExponentKind.FRECHET_GAMMA
    u = 1e-7
    assert spec.psi_closed(u) / u == pytest.approx(spec.drift_m, rel=1e-5)


@pytest.mark.parametrize("a", ALPHAS)
@pytest.mark.parametrize("t", TS)
def test_psi_integral_matches_closed(a, t):
    p = FrechetParams(a, t)
    spec = frechet_exponent(p)
    for u in (0.5, 1.0, 2.0, 5.0):
        c = psi_closed(p, u)
        assert abs(psi_integral(spec, u) - c) / (1 + abs(c)) <= 1e-6


def test_psi_integral_examples():
    p = FrechetParams(0.3, 2.0)
    assert psi_integral(frechet_exponent(p), 3.0) == pytest.approx(psi_closed(p, 3.0), rel=1e-6)
    assert psi_integral(frechet_exponent(p), 0.0) == 0.0


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.1, 5.0), st.floats(0.05, 6.0))
def test_psi_integral_property(a, t, u):
    p = FrechetParams(a, t)
    c = psi_closed(p, u)
    assert abs(psi_integral(frechet_exponent(p), u) - c) / (1 + c) <= 1e-6


@pytest.mark.parametrize("n, want", [(1, 0.5641896), (2, 0.5), (3, 0.5641896)])
def test_moment_examples(n, want):
    d, r = gamma_power_moment(FrechetParams(0.5, 0.5), n)
    assert d == pytest.approx(want, rel=1e-6)
    assert r == pytest.approx(d, rel=1e-12)


@pytest.mark.parametrize("a", ALPHAS)
@pytest.mark.parametrize("t", TS)
def test_moment_recursion_grid(a, t):
    p = FrechetParams(a, t)
    for n in range(1, 11):
        d, r = gamma_power_moment(p, n)
        assert abs(d - r) / d <= 1e-10


def test_moment_domain_and_overflow():
    with pytest.raises(ValueError):
        gamma_power_moment(FrechetParams(0.5, 0.5), 0)
    with pytest.raises(OverflowError):
        gamma_power_moment(FrechetParams(0.9, 2.0), 400)


# ---------------------------------------------------------------------------
# Stable-law variant
# ---------------------------------------------------------------------------


def test_patie_examples():
    assert patie_psi_closed(0.5, 0.0) == 0.0
    assert patie_psi_closed(0.5, 1.0) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    spec = patie_exponent(0.5)
    assert spec.kind is ExponentKind.PATIE_STABLE
    assert spec.drift_m * patie_psi_closed(0.5, 1.0) == pytest.approx(2.0, rel=1e-12)


def test_patie_compensated_integral_oracle():
    a = 0.5

    def f(x):
        e = mp.exp(x / a)
        om = -mp.expm1(x / a)
        return (1 - a) * e * ((2 - a) * e + om) / (a**2 * mp.gamma(1 + a) * om ** (3 - a))

    got = _mp_compensated_integral(f, 1)
    assert got == pytest.approx(0.6440747, abs=1e-7)
    spec = patie_exponent(a)
    assert psi_integral(spec, 1.0) - spec.drift_m == pytest.approx(got, rel=1e-9)
    for x in (-1e-4, -0.3, -5.0):
        assert patie_levy_density(a, x) == pytest.approx(float(f(x)), rel=1e-10)


@pytest.mark.parametrize("a", ALPHAS)
def test_patie_psi_integral(a):
    spec = patie_exponent(a)
    for u in (0.5, 1.0, 2.0, 5.0):
        c = patie_psi_closed(a, u)
        assert abs(psi_integral(spec, u) - c) / (1 + c) <= 1e-6
    assert patie_psi_closed(a, 1e-8) / 1e-8 == pytest.approx(spec.drift_m, rel=1e-6)


@pytest.mark.parametrize("a", ALPHAS)
def test_patie_moment_recursion(a):
    # m psi(1)...psi(n-1)/(n-1)! = Gamma(1+n)/Gamma(1+a n) = E[S_a^{-n a}]
    m = patie_exponent(a).drift_m
    for n in range(1, 9):
        rec = m * math.prod(patie_psi_closed(a, k) for k in range(1, n)) / math.factorial(n - 1)
        assert rec == pytest.approx(math.gamma(1 + n) / math.gamma(1 + a * n), rel=1e-12)


def test_patie_domain():
    with pytest.raises(ValueError):
        patie_exponent(1.2)
    with pytest.raises(ValueError):
        patie_psi_closed(0.5, -0.1)
