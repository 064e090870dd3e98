"""Special functions against mpmath and closed forms."""

import math

import mpmath as mp
import numpy as np
import pytest

from lflab.specfun import (EULER_GAMMA, bessel_jy, bessel_k, bessel_k_result, euler_gamma,
                           gamma_ratio, ln_gamma, macdonald_ratio)

mp.mp.dps = 30


@pytest.mark.parametrize("x, want", [(1.0, 0.0), (0.5, 0.5723649429247001), (4.0, 1.791759469228055)])
def test_ln_gamma_examples(x, want):
    assert ln_gamma(x) == pytest.approx(want, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("x", [1e-8, 0.03, 0.7, 2.5, 17.3, 150.0, 1e5])
def test_ln_gamma_vs_mpmath(x):
    assert ln_gamma(x) == pytest.approx(float(mp.loggamma(x)), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("x", [0.0, -1.0, math.inf, math.nan])
def test_ln_gamma_domain(x):
    with pytest.raises(ValueError):
        ln_gamma(x)


def test_gamma_ratio_examples():
    assert gamma_ratio(1.5, 1.0) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-12)
    assert gamma_ratio(1.0, 0.5) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)
    for t in (0.1, 3.3, 250.0):
        assert gamma_ratio(t, t) == 1.0


@pytest.mark.parametrize("a", [0.01, 0.4, 1.0, 7.5, 120.0, 900.0])
def test_gamma_ratio_recurrence(a):
    assert gamma_ratio(a + 1.0, a) == pytest.approx(a, rel=1e-12)


def test_gamma_ratio_large_arguments_vs_mpmath():
    a, b = 400.3, 399.1
    want = float(mp.gamma(a) / mp.gamma(b))
    assert gamma_ratio(a, b) == pytest.approx(want, rel=1e-12)


def test_euler_constant():
    assert euler_gamma() == EULER_GAMMA
    assert EULER_GAMMA == pytest.approx(float(mp.euler), rel=1e-16)


def test_bessel_jy_half_order():
    j, y = bessel_jy(0.5, math.pi / 2)
    assert j == pytest.approx(2.0 / math.pi, abs=1e-12)
    assert y == pytest.approx(0.0, abs=1e-12)


def test_bessel_j0_first_zero():
    # root located independently on the mpmath series
    root = float(mp.findroot(lambda x: mp.besselj(0, x), 2.4))
    assert abs(bessel_jy(0.0, root)[0]) < 1e-9
    assert root == pytest.approx(2.4048255577, abs=1e-9)


def test_bessel_modulus_three_halves():
    j, y = bessel_jy(1.5, 1.0)
    assert j * j + y * y == pytest.approx(4.0 / math.pi, rel=1e-12)


@pytest.mark.parametrize("x", np.geomspace(0.1, 50, 9))
def test_half_integer_closed_forms(x):
    c = math.sqrt(2.0 / (math.pi * x))
    j, y = bessel_jy(0.5, x)
    assert j == pytest.approx(c * math.sin(x), rel=1e-12, abs=1e-14)
    assert y == pytest.approx(-c * math.cos(x), rel=1e-12, abs=1e-14)
    k = math.sqrt(math.pi / (2 * x)) * math.exp(-x)
    assert bessel_k(0.5, x) == pytest.approx(k, rel=1e-12)
    assert bessel_k(1.5, x) == pytest.approx(k * (1 + 1 / x), rel=1e-12)


@pytest.mark.parametrize("nu, x", [(0.0, 1.0), (0.3, 0.05), (1.7, 3.0), (2.3, 25.0), (0.5, 700.0)])
def test_bessel_k_vs_mpmath(nu, x):
    want = float(mp.besselk(nu, x))
    assert bessel_k(nu, x) == pytest.approx(want, rel=1e-10)
    assert bessel_k(-nu, x) == bessel_k(nu, x)


def test_bessel_k0_quadrature_oracle():
    want = float(mp.quad(lambda u: mp.exp(-mp.cosh(u)), [0, 2, 5, 10]))
    assert bessel_k(0.0, 1.0) == pytest.approx(want, rel=1e-10)
    assert want == pytest.approx(0.4210244382, rel=1e-9)


@pytest.mark.parametrize("nu, x", [(0.0, 5.0), (1.0, 0.5), (2.5, 10.0), (0.75, 300.0)])
def test_bessel_jy_vs_mpmath(nu, x):
    j, y = bessel_jy(nu, x)
    assert j == pytest.approx(float(mp.besselj(nu, x)), abs=1e-10)
    assert y == pytest.approx(float(mp.bessely(nu, x)), abs=1e-10)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.3, 3.0])
def test_wronskian(nu):
    for x in np.geomspace(0.2, 40, 7):
        j, y = bessel_jy(nu, x)
        j1, y1 = bessel_jy(nu + 1, x)
        # J' = (nu/x) J - J_{nu+1}, same recurrence for Y
        jp = nu / x * j - j1
        yp = nu / x * y - y1
        assert j * yp - jp * y == pytest.approx(2.0 / (math.pi * x), rel=1e-8)


def test_bessel_k_positive_decreasing():
    for nu in (0.0, 0.4, 2.2):
        xs = np.geomspace(0.01, 60, 40)
        ks = np.array([bessel_k(nu, x) for x in xs])
        assert np.all(ks > 0)
        assert np.all(np.diff(ks) < 0)


@pytest.mark.parametrize("bad", [0.0, -2.0])
def test_bessel_domain(bad):
    with pytest.raises(ValueError):
        bessel_k(1.0, bad)
    with pytest.raises(ValueError):
        bessel_jy(1.0, bad)
    with pytest.raises(ValueError):
        bessel_jy(-1.0, 1.0)


def test_bessel_k_result_carries_error():
    r = bessel_k_result(1.0, 2.0)
    assert r.value == bessel_k(1.0, 2.0)
    assert 0 <= r.est_abs_err < 1e-12


@pytest.mark.parametrize("t, lam, want", [(0.5, 4.0, 0.25), (1.5, 1.0, 0.25)])
def test_macdonald_ratio_closed_forms(t, lam, want):
    assert macdonald_ratio(t, lam) == pytest.approx(want, rel=1e-12)


def test_macdonald_ratio_t1():
    # K0(1) / (2 K1(1)) = 0.349741967...; the 7-digit value 0.3497395 is off in the 6th digit
    want = float(mp.besselk(0, 1) / (2 * mp.besselk(1, 1)))
    assert macdonald_ratio(1.0, 1.0) == pytest.approx(want, rel=1e-12)
    assert macdonald_ratio(1.0, 1.0) == pytest.approx(0.3497395, rel=1e-5)


@pytest.mark.parametrize("t", [0.3, 1.0, 2.3, 8.0])
@pytest.mark.parametrize("lam", [1e-3, 0.1, 10.0, 1e4])
def test_macdonald_ratio_vs_mpmath(t, lam):
    r = mp.sqrt(lam)
    want = float(mp.besselk(t - 1, r) / (2 * r * mp.besselk(t, r)))
    assert macdonald_ratio(t, lam) == pytest.approx(want, rel=1e-9)
