"""Path simulation of a spectrally negative Levy process and its exponential functional.

The process ``Z`` with exponent ``psi(u) = m u + int (e^{ux}-1-ux) f(x) dx`` is
built from

* the drift ``m`` plus the compensator ``s * int_{x <= -eps} (-x) f(x) dx``;
* compound-Poisson jumps of size ``|x| >= eps`` at rate ``int_{-inf}^{-eps} f``;
* a Brownian proxy with variance rate ``int_{-eps}^0 x^2 f(x) dx`` for the
  small jumps (or nothing, when the proxy is off).

Jumps with ``|x| >= exact_jump_level`` are placed at their exact times and the
integral ``int e^{-Z}`` is refined there.  Jumps with
``eps <= |x| < exact_jump_level`` are far too many to draw one by one at
``eps = 1e-3``; their sum over each grid step is drawn in a single inverse-CDF
lookup from the exact compound-Poisson law of that sum, computed once per
configuration by FFT on a fine lattice.  Between events the path is linear
and ``int e^{-Z}`` is integrated in closed form on each linear piece.
"""

from __future__ import annotations

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .levy import LevyExponentSpec
from .samplers import RngStream, as_generator, split_stream
from .stats import integrate

__all__ = [
    "PathConfig",
    "ExpFunctionalSample",
    "ExpFunctionalBatch",
    "SDSplit",
    "SDBatch",
    "HorizonError",
    "JumpTables",
    "jump_tables",
    "simulate_window",
    "sample_exponential_functional",
    "sample_exponential_functionals",
    "sample_sd_composition",
    "sample_sd_compositions",
    "dump_samples",
]

CHUNK = 1000

log = logging.getLogger(__name__)


class HorizonError(RuntimeError):
    """First passage was not reached within ``max_windows * window_T``."""


@dataclass(frozen=True)
class PathConfig:
    eps_jump: float = 1e-3
    window_T: float = 5.0
    grid_h: float = 0.01
    tail_delta: float = 1e-8
    max_windows: int = 200
    use_gaussian_proxy: bool = True
    exact_jump_level: float = 0.05

    def __post_init__(self):
        if not self.eps_jump > 0:
            raise ValueError("eps_jump must be > 0")
        if not self.window_T > 0 or not self.grid_h > 0:
            raise ValueError("window_T and grid_h must be > 0")
        if self.grid_h > self.window_T:
            raise ValueError("grid_h must not exceed window_T")
        if not 0 < self.tail_delta < 1:
            raise ValueError("tail_delta must lie in (0, 1)")
        if int(self.max_windows) < 1:
            raise ValueError("max_windows must be >= 1")
        if not self.exact_jump_level > 0:
            raise ValueError("exact_jump_level must be > 0")

    @property
    def steps_per_window(self) -> int:
        return max(1, int(round(self.window_T / self.grid_h)))


@dataclass(frozen=True)
class ExpFunctionalSample:
    value_I: float
    windows_used: int
    residual_multiplier: float
    truncated: bool = False


@dataclass(frozen=True)
class ExpFunctionalBatch:
    values: np.ndarray
    windows_used: np.ndarray
    residual_multiplier: np.ndarray
    truncated: np.ndarray

    @property
    def n_truncated(self) -> int:
        return int(np.count_nonzero(self.truncated))


@dataclass(frozen=True)
class SDSplit:
    level_y: float
    head_integral: float
    passage_time: float


@dataclass(frozen=True)
class SDBatch:
    level_y: float
    values: np.ndarray
    head_integral: np.ndarray
    passage_time: np.ndarray


# ---------------------------------------------------------------------------
# Jump tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpTables:
    lam_eps: float  # total rate of jumps with |x| >= eps
    mu_eps: float  # compensator drift for those jumps
    sigma2_eps: float  # variance rate of jumps with |x| < eps
    exact_level: float
    lam_exact: float
    exact_logy: np.ndarray  # log jump size on a uniform grid in -log(tail mass)
    exact_dw: float
    exact_ymax: float
    tail_rate: float
    band_quantiles: np.ndarray  # quantiles of the per-step band sum
    band_rate: float


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _gl_segments(g, lo, hi, power=0):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = g(pts) * pts**power * _GL_W[None, :] * half[:, None]
    return vals.sum(axis=1)


def _tail_integrals(spec, eps):
    g = lambda y: float(spec.density(-y))  # noqa: E731
    ls = math.log(eps)
    if eps < 1.0:
        core = integrate(lambda s: g(math.exp(s)) * math.exp(s), ls, 0.0, tol=1e-13, rel=1e-12).value
        core1 = integrate(lambda s: g(math.exp(s)) * math.exp(2 * s), ls, 0.0, tol=1e-13, rel=1e-12).value
        lo = 1.0
    else:
        core = core1 = 0.0
        lo = eps
    far = integrate(g, lo, math.inf, tol=1e-14, rel=1e-12).value
    far1 = integrate(lambda y: y * g(y), lo, math.inf, tol=1e-14, rel=1e-12).value
    return core + far, core1 + far1


def _small_variance(spec, eps):
    g = lambda y: float(spec.density(-y))  # noqa: E731
    s_top = math.log(eps)
    s0 = s_top - 40.0
    h = lambda s: g(math.exp(s)) * math.exp(3 * s)  # noqa: E731
    body = integrate(h, s0, s_top, tol=1e-16, rel=1e-12).value
    g0, g1 = h(s0), h(s0 - 1.0)
    head = g0 / math.log(g0 / g1) if g0 > 0 and g1 > 0 and g0 > g1 else 0.0
    return body + head


def _exact_table(spec, level, nodes=2048, nw=4096):
    g = lambda y: spec.density(-np.asarray(y))  # noqa: E731
    rate = spec.tail_rate
    ymax = level + 45.0 / rate
    ys = np.geomspace(level, ymax, nodes)
    seg = _gl_segments(g, ys[:-1], ys[1:])
    beyond = integrate(lambda y: float(g(y)), ymax, math.inf, tol=1e-300, rel=1e-12).value
    G = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]) + beyond
    lam = float(G[0])
    if lam <= 0.0 or not np.isfinite(lam):
        return 0.0, np.zeros(2), 1.0, ymax
    G = np.maximum(G, lam * 1e-300)
    w = np.log(lam / G)
    wgrid = np.linspace(0.0, w[-1], nw)
    logy = np.interp(wgrid, w, np.log(ys))
    return lam, logy, float(wgrid[1] - wgrid[0]), ymax


def _band_table(spec, eps, level, h, nq=16384):
    """Quantiles of the sum, over one step of length ``h``, of jumps in ``[eps, level)``."""
    g = lambda y: spec.density(-np.asarray(y))  # noqa: E731
    # size the lattice from the band moments first
    probe = np.geomspace(eps, level, 513)
    rate = float(_gl_segments(g, probe[:-1], probe[1:]).sum())
    m1 = float(_gl_segments(g, probe[:-1], probe[1:], 1).sum())
    m2 = float(_gl_segments(g, probe[:-1], probe[1:], 2).sum())
    mean, var = h * m1, h * m2
    dx = min(eps / 10.0, math.sqrt(var) / 400.0)
    top = mean + 14.0 * math.sqrt(var) + level
    while top / dx > 2**22:
        dx *= 2.0
    edges = np.arange(eps, level, dx)
    edges = np.append(edges, level)
    lo, hi = edges[:-1], edges[1:]
    mass = _gl_segments(g, lo, hi)
    mom = _gl_segments(g, lo, hi, 1)
    keep = mass > 0
    mass, mom = mass[keep], mom[keep]
    M = 1 << int(math.ceil(math.log2(top / dx + 2)))
    q = np.zeros(M)
    pos = mom / mass / dx
    k = np.floor(pos).astype(np.int64)
    r = pos - k
    # mean-preserving split of each cell between its neighbouring lattice points
    np.add.at(q, k, mass * (1.0 - r))
    np.add.at(q, k + 1, mass * r)
    total = q.sum()
    q /= total
    p = np.fft.irfft(np.exp(h * total * (np.fft.rfft(q) - 1.0)), n=M)
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    cdf = np.concatenate([[0.0], np.cumsum(p)])
    xs = (np.arange(M + 1) - 0.5) * dx
    xs[0] = 0.0
    # flat CDF segments make np.interp ambiguous; keep strictly increasing knots
    inc = np.concatenate([[True], np.diff(cdf) > 0])
    u = np.linspace(0.0, 1.0, nq + 1)
    quant = np.interp(u, cdf[inc], xs[inc])
    return quant, float(total)


_TABLE_CACHE: dict = {}
_TABLE_LOCK = threading.Lock()


def jump_tables(spec: LevyExponentSpec, eps: float, exact_level: float, h: float) -> JumpTables:
    """Rates, compensator, proxy variance and sampling tables (cached)."""
    key = (spec.key, float(eps), float(exact_level), float(h))
    with _TABLE_LOCK:
        hit = _TABLE_CACHE.get(key)
    if hit is not None:
        return hit
    level = max(float(eps), float(exact_level))
    lam_eps, mu_eps = _tail_integrals(spec, eps)
    sigma2 = _small_variance(spec, eps)
    lam_exact, logy, dw, ymax = _exact_table(spec, level)
    if level > eps:
        quant, band_rate = _band_table(spec, eps, level, h)
    else:
        quant, band_rate = np.zeros(2), 0.0
    tab = JumpTables(lam_eps, mu_eps, sigma2, level, lam_exact, logy, dw, ymax,
                     spec.tail_rate, quant, band_rate)
    with _TABLE_LOCK:
        _TABLE_CACHE[key] = tab
    return tab


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _exact_jump(rng, logy, dw, ymax, tail_rate):
    w = rng.standard_exponential() / dw
    j = int(w)
    if j < logy.shape[0] - 1:
        r = w - j
        return math.exp(logy[j] * (1.0 - r) + logy[j + 1] * r)
    return ymax + rng.standard_exponential() / tail_rate


@njit(cache=True, nogil=True)
def _segment(z, slope, dt):
    """int_0^dt exp(-(z + slope s)) ds."""
    x = slope * dt
    if abs(x) > 1e-6:
        return math.exp(-z) * (-math.expm1(-x)) / slope
    return math.exp(-z) * dt * (1.0 - 0.5 * x + x * x / 6.0)


@njit(cache=True, nogil=True)
def _window(rng, b, sh, quant, lam_exact, logy, dw, ymax, tail_rate, h, nsteps, level):
    """One window started at Z = 0.

    Returns ``(z_end, integral, t_hit)``; when ``level`` is reached the
    window stops there and ``t_hit`` is the crossing time, else ``-1``.
    """
    z = 0.0
    acc = 0.0
    nq = quant.shape[0] - 1
    if lam_exact > 0.0:
        tj = rng.standard_exponential() / lam_exact
    else:
        tj = math.inf
    for k in range(nsteps):
        if nq > 1:
            v = rng.random() * nq
            i = int(v)
            if i >= nq:
                i = nq - 1
            r = v - i
            band = quant[i] * (1.0 - r) + quant[i + 1] * r
        else:
            band = 0.0
        incr = b * h - band
        if sh > 0.0:
            incr += sh * rng.standard_normal()
        slope = incr / h
        tau = 0.0
        while True:
            jump_now = tj < h - tau
            dt = tj if jump_now else h - tau
            if slope > 0.0 and z + slope * dt >= level:
                dc = (level - z) / slope
                acc += _segment(z, slope, dc)
                return level, acc, k * h + tau + dc
            acc += _segment(z, slope, dt)
            z += slope * dt
            tau += dt
            if jump_now:
                z -= _exact_jump(rng, logy, dw, ymax, tail_rate)
                tj = rng.standard_exponential() / lam_exact
            else:
                tj -= dt
                break
    return z, acc, -1.0


@njit(cache=True, nogil=True)
def _functional(rng, b, sh, quant, lam_exact, logy, dw, ymax, tail_rate, h, nsteps,
                max_windows, log_stop):
    total = 0.0
    zc = 0.0
    for w in range(max_windows):
        ze, part, th = _window(rng, b, sh, quant, lam_exact, logy, dw, ymax, tail_rate, h,
                               nsteps, math.inf)
        total += math.exp(-zc) * part
        zc += ze
        if zc > log_stop:
            return total, w + 1, math.exp(-zc), True
    return total, max_windows, math.exp(-zc), False


@njit(cache=True, nogil=True)
def _functional_batch(rng, n, b, sh, quant, lam_exact, logy, dw, ymax, tail_rate, h, nsteps,
                      max_windows, log_stop, values, windows, residual, truncated):
    for p in range(n):
        v, wu, res, ok = _functional(rng, b, sh, quant, lam_exact, logy, dw, ymax, tail_rate, h,
                                     nsteps, max_windows, log_stop)
        values[p] = v
        windows[p] = wu
        residual[p] = res
        truncated[p] = not ok


@njit(cache=True, nogil=True)
def _sd_batch(rng, n, y, b, sh, quant, lam_exact, logy, dw, ymax, tail_rate, h, nsteps,
              max_windows, log_stop, values, heads, passage):
    wt = nsteps * h
    for p in range(n):
        head = 0.0
        zc = 0.0
        tp = -1.0
        for w in range(max_windows):
            ze, part, th = _window(rng, b, sh, quant, lam_exact, logy, dw, ymax, tail_rate, h,
                                   nsteps, y - zc)
            head += math.exp(-zc) * part
            if th >= 0.0:
                tp = w * wt + th
                break
            zc += ze
        if tp < 0.0:
            passage[p] = -1.0
            values[p] = head
            heads[p] = head
            continue
        rest, wu, res, ok = _functional(rng, b, sh, quant, lam_exact, logy, dw, ymax, tail_rate,
                                        h, nsteps, max_windows, log_stop)
        heads[p] = head
        passage[p] = tp
        values[p] = head + math.exp(-y) * rest


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def _kernel_args(spec, cfg):
    if not spec.drift_m > 0:
        raise ValueError("the exponent must have positive mean")
    tab = jump_tables(spec, cfg.eps_jump, cfg.exact_jump_level, cfg.grid_h)
    b = spec.drift_m + tab.mu_eps
    sh = math.sqrt(tab.sigma2_eps * cfg.grid_h) if cfg.use_gaussian_proxy else 0.0
    return (b, sh, tab.band_quantiles, tab.lam_exact, tab.exact_logy, tab.exact_dw,
            tab.exact_ymax, tab.tail_rate, cfg.grid_h, cfg.steps_per_window)


def simulate_window(spec: LevyExponentSpec, T: float, cfg: PathConfig, s) -> tuple[float, float]:
    """One path of ``Z`` on ``[0, T]``: ``(Z_T, int_0^T e^{-Z_s} ds)``."""
    if not T > 0:
        raise ValueError("T must be > 0")
    args = list(_kernel_args(spec, cfg))
    args[-1] = max(1, int(round(T / cfg.grid_h)))
    z, acc, _ = _window(as_generator(s), *args, math.inf)
    return float(z), float(acc)


def _run_chunks(n, s, workers, job):
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not isinstance(s, RngStream):
        raise TypeError("batched sampling needs an RngStream so chunks can be split")
    nchunk = (n + CHUNK - 1) // CHUNK
    streams = split_stream(s, nchunk)
    bounds = [(i * CHUNK, min(n, (i + 1) * CHUNK)) for i in range(nchunk)]
    tasks = [(streams[i], lo, hi) for i, (lo, hi) in enumerate(bounds)]
    if workers and workers > 1 and nchunk > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(lambda a: job(*a), tasks))
    else:
        for a in tasks:
            job(*a)


def sample_exponential_functionals(spec: LevyExponentSpec, n: int, cfg: PathConfig, s: RngStream,
                                   workers: int = 1) -> ExpFunctionalBatch:
    """``n`` independent draws of ``I = int_0^inf e^{-Z_s} ds``.

    Paths are processed in fixed chunks of ``CHUNK`` with one child stream
    each, so the output does not depend on ``workers``. ``truncated`` marks
    paths that exhausted ``max_windows`` before their multiplier fell below
    ``tail_delta``.
    """
    args = _kernel_args(spec, cfg)
    values = np.empty(int(n))
    windows = np.empty(int(n), dtype=np.int64)
    residual = np.empty(int(n))
    truncated = np.zeros(int(n), dtype=np.bool_)
    log_stop = -math.log(cfg.tail_delta)

    def job(stream, lo, hi):
        _functional_batch(stream.generator(), hi - lo, *args, int(cfg.max_windows), log_stop,
                          values[lo:hi], windows[lo:hi], residual[lo:hi], truncated[lo:hi])

    _run_chunks(n, s, workers, job)
    if truncated.any():
        log.warning("%d of %d paths hit max_windows before the tail cut", truncated.sum(), n)
    return ExpFunctionalBatch(values, windows, residual, truncated)


def sample_exponential_functional(spec: LevyExponentSpec, cfg: PathConfig, s) -> ExpFunctionalSample:
    args = _kernel_args(spec, cfg)
    v, wu, res, ok = _functional(as_generator(s), *args, int(cfg.max_windows),
                                 -math.log(cfg.tail_delta))
    return ExpFunctionalSample(float(v), int(wu), float(res), truncated=not ok)


def sample_sd_compositions(spec: LevyExponentSpec, y: float, n: int, cfg: PathConfig, s: RngStream,
                           workers: int = 1) -> SDBatch:
    """Draws of ``int_0^{T_y} e^{-Z} ds + e^{-y} I'`` with ``I'`` independent.

    ``T_y`` is the first passage of ``Z`` above ``y``; since ``Z`` has no
    positive jumps the crossing happens on a continuous piece and is solved
    linearly there.
    """
    y = float(y)
    if not y > 0:
        raise ValueError("y must be > 0")
    args = _kernel_args(spec, cfg)
    values = np.empty(int(n))
    heads = np.empty(int(n))
    passage = np.empty(int(n))
    log_stop = -math.log(cfg.tail_delta)

    def job(stream, lo, hi):
        _sd_batch(stream.generator(), hi - lo, y, *args, int(cfg.max_windows), log_stop,
                  values[lo:hi], heads[lo:hi], passage[lo:hi])

    _run_chunks(n, s, workers, job)
    missed = int(np.count_nonzero(passage < 0))
    if missed:
        raise HorizonError(f"{missed} of {n} paths did not reach level {y} within "
                           f"{cfg.max_windows} windows of length {cfg.window_T}")
    return SDBatch(y, values, heads, passage)


def sample_sd_composition(spec: LevyExponentSpec, y: float, cfg: PathConfig, s) -> float:
    return float(sample_sd_composition_split(spec, y, cfg, s)[0])


def sample_sd_composition_split(spec, y, cfg, s) -> tuple[float, SDSplit]:
    y = float(y)
    if not y > 0:
        raise ValueError("y must be > 0")
    args = _kernel_args(spec, cfg)
    vals, heads, passage = np.empty(1), np.empty(1), np.empty(1)
    _sd_batch(as_generator(s), 1, y, *args, int(cfg.max_windows), -math.log(cfg.tail_delta),
              vals, heads, passage)
    if passage[0] < 0:
        raise HorizonError(f"level {y} not reached within {cfg.max_windows} windows")
    return float(vals[0]), SDSplit(y, float(heads[0]), float(passage[0]))


def dump_samples(values, path) -> None:
    """Write one value per line."""
    with open(path, "w", encoding="ascii") as fh:
        for v in np.asarray(values, dtype=float).ravel():
            fh.write(f"{float(v)!r}\n")
