"""Euler schemes for the two diffusion functionals checked against Gamma laws.

* ``int_0^inf exp(B_u - t u / 2) du`` for a standard Brownian motion ``B``;
* the first hitting time of 0 by a squared Bessel process of dimension
  ``2 (1 - t)`` started at 1.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .samplers import RngStream, split_stream

__all__ = ["brownian_exp_integrals", "besq_hitting_times"]

_CHUNK = 500


@njit(cache=True, nogil=True)
def _brownian_integrals(rng, n, t, h, u_min, log_stop, u_cap, out):
    # X = B - t u / 2 has exact Gaussian increments; trapezoid in u.
    drift = -0.5 * t * h
    sd = math.sqrt(h)
    for i in range(n):
        x = 0.0
        ex = 1.0
        u = 0.0
        acc = 0.0
        while True:
            x += drift + sd * rng.standard_normal()
            en = math.exp(x)
            acc += 0.5 * h * (ex + en)
            ex = en
            u += h
            if (u >= u_min and x <= log_stop) or u >= u_cap:
                break
        out[i] = acc


@njit(cache=True, nogil=True)
def _besq_hits(rng, n, delta, h, upper, out):
    sd = 2.0 * math.sqrt(h)
    for i in range(n):
        x = 1.0
        u = 0.0
        out[i] = np.inf
        while u < upper:
            xn = x + delta * h + sd * math.sqrt(x) * rng.standard_normal()
            if xn <= 0.0:
                out[i] = u + h * x / (x - xn)
                break
            x = xn
            u += h


def _chunked(n, s, kernel):
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.empty(n)
    nchunk = (n + _CHUNK - 1) // _CHUNK
    for k, st in enumerate(split_stream(s, nchunk)):
        lo, hi = k * _CHUNK, min(n, (k + 1) * _CHUNK)
        kernel(st.generator(), hi - lo, out[lo:hi])
    return out


def brownian_exp_integrals(t: float, n: int, s: RngStream, step: float = 1e-3,
                           horizon_eps: float = 1e-6, stop_level: float = 1e-6) -> np.ndarray:
    """Draws of ``int_0^inf exp(B_u - t u/2) du`` by an exact-increment trapezoid rule.

    Paths run at least to ``u_max = -2 log(horizon_eps) / t`` and then until
    ``exp(X_u) <= stop_level``, capped at ``10 u_max``.
    """
    if not t > 0 or not step > 0:
        raise ValueError("t and step must be > 0")
    if not 0 < horizon_eps < 1 or not 0 < stop_level < 1:
        raise ValueError("horizon_eps and stop_level must lie in (0, 1)")
    u_min = -2.0 * math.log(horizon_eps) / t
    log_stop = math.log(stop_level)
    return _chunked(n, s, lambda rng, m, o: _brownian_integrals(
        rng, m, float(t), float(step), u_min, log_stop, 10.0 * u_min, o))


def besq_hitting_times(t: float, n: int, s: RngStream, step: float = 1e-4,
                       upper: float = 10.0) -> np.ndarray:
    """Hitting times of 0 for BESQ of dimension ``2(1-t)`` from 1; ``inf`` when censored at ``upper``."""
    if not t > 0 or not step > 0 or not upper > 0:
        raise ValueError("t, step and upper must be > 0")
    delta = 2.0 * (1.0 - t)
    return _chunked(n, s, lambda rng, m, o: _besq_hits(rng, m, delta, float(step), float(upper), o))
