"""Shared numerics: KS tests, quadrature, finite differences, Monte Carlo means."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _sint
from scipy import special

_EPS = np.finfo(float).eps


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    est_abs_err: float
    subdivisions: int


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------


def _as_sample(x, name):
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValueError(f"{name} is empty")
    if x.size < 10:
        raise ValueError(f"{name} needs at least 10 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def kolmogorov_sf(d: float, n_eff: float) -> float:
    """Asymptotic p-value of a KS distance with Stephens' effective-n correction."""
    en = math.sqrt(n_eff)
    return float(special.kolmogorov((en + 0.12 + 0.11 / en) * d))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample KS distance and asymptotic p-value."""
    a = np.sort(_as_sample(a, "a"))
    b = np.sort(_as_sample(b, "b"))
    n, m = a.size, b.size
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / n
    fb = np.searchsorted(b, pooled, side="right") / m
    d = float(np.max(np.abs(fa - fb)))
    return d, kolmogorov_sf(d, n * m / (n + m))


def ks_one_sample(x, cdf: Callable[[np.ndarray], np.ndarray], upper: float | None = None):
    """One-sample KS distance against a reference CDF.

    With ``upper`` set, the supremum is restricted to ``(-inf, upper)``; values
    at or beyond ``upper`` count as censored. The p-value is then conservative.
    """
    if upper is not None:
        x = np.asarray(x, dtype=float)
        x = np.where(x >= upper, upper, x)
    x = np.sort(_as_sample(x, "x"))
    n = x.size
    if upper is not None:
        keep = x < upper
        xs = x[keep]
    else:
        xs = x
    if xs.size == 0:
        fu = float(cdf(np.array([upper]))[0])
        d = fu
    else:
        f = np.asarray(cdf(xs), dtype=float)
        i = np.arange(1, xs.size + 1)
        d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
        if upper is not None:
            fu = float(cdf(np.array([upper]))[0])
            d = max(d, abs(xs.size / n - fu))
    return d, kolmogorov_sf(d, n)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _quad(f, a, b, tol, rel, limit, points):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sint.IntegrationWarning)
        kw = {}
        if points is not None and math.isfinite(b):
            pts = [p for p in points if a < p < b]
            if pts:
                kw["points"] = pts
        val, err, info = _sint.quad(f, a, b, epsabs=tol, epsrel=rel, limit=limit,
                                    full_output=1, **kw)[:3]
    return val, err, int(info.get("last", 1))


def integrate(f: Callable[[float], float], a: float, b: float = math.inf, tol: float = 1e-10,
              rel: float = 1e-12, limit: int = 500, points=None) -> QuadratureResult:
    """Adaptive Gauss-Kronrod quadrature on ``[a, b]``, ``b`` possibly infinite.

    Semi-infinite domains are split at a point ``c`` pushed outward until
    ``|f|`` there is negligible against the core estimate; the tail
    ``[c, inf)`` goes through QUADPACK's reciprocal map.

    Raises :class:`QuadratureError` (carrying the partial result) when the
    error estimate exceeds both ``tol`` and ``rel * |value|``.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    a = float(a)
    b = float(b)
    if math.isfinite(b):
        val, err, sub = _quad(f, a, b, tol, rel, limit, points)
    else:
        c = a + 1.0
        core, core_err, sub = _quad(f, a, c, tol / 2, rel, limit, points)
        for _ in range(12):
            fc = abs(f(c))
            if not fc * max(1.0, c - a) > tol * max(abs(core), 1.0):
                break
            nc = a + 2.0 * (c - a)
            extra, extra_err, extra_sub = _quad(f, c, nc, tol / 2, rel, limit, points)
            core += extra
            core_err += extra_err
            sub += extra_sub
            c = nc
        tail, tail_err, tail_sub = _quad(f, c, math.inf, tol / 2, rel, limit, None)
        val = core + tail
        err = core_err + tail_err
        sub += tail_sub
    res = QuadratureResult(float(val), float(err), sub)
    if not math.isfinite(val) or (err > tol and err > rel * abs(val) * 10):
        raise QuadratureError(
            f"quadrature on [{a}, {b}] did not converge: value={val!r}, err={err:.3g}, "
            f"tol={tol:.3g}, subdivisions={sub}",
            partial=res,
        )
    return res


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------


def _central(f, lam, order, h):
    j = np.arange(order + 1)
    w = np.array([(-1) ** (order - k) * math.comb(order, k) for k in j], dtype=float)
    vals = np.array([f(lam + (k - order / 2.0) * h) for k in j], dtype=float)
    return float(np.dot(w, vals) / h**order), float(np.dot(np.abs(w), np.abs(vals)) / h**order)


def finite_diff(f: Callable[[float], float], lam: float, order: int, step: float,
                rel_noise: float = 4 * _EPS) -> tuple[float, float]:
    """Central-difference estimate of the ``order``-th derivative at ``lam``.

    Returns ``(value, noise_floor)``. The floor adds the rounding bound
    (``rel_noise`` times the weighted function magnitudes) at steps ``h`` and
    ``h/2`` to a Richardson estimate of the O(h^2) truncation error.
    """
    if not 1 <= order <= 6:
        raise ValueError("order must be in 1..6")
    if not step > 0:
        raise ValueError("step must be > 0")
    if lam - order * step / 2.0 <= 0:
        raise ValueError("stencil leaves the positive half-line; reduce the step")
    d1, s1 = _central(f, lam, order, step)
    d2, s2 = _central(f, lam, order, step / 2.0)
    rounding = rel_noise * (s1 + s2)
    truncation = 4.0 / 3.0 * abs(d1 - d2)
    return d1, rounding + truncation


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def mc_mean_se(values) -> tuple[float, float]:
    """Sample mean and its standard error."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise ValueError("need at least two values")
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))
