"""Registry of named distributional-identity checks.

Every check returns a :class:`CheckReport`. A check passes when its
statistic satisfies the registry gate against the registry threshold:
``le`` means ``statistic <= threshold`` and ``ge`` means
``statistic >= threshold``. Checks that combine several gates report the
worst normalised ratio (each gate scaled so that 1.0 is the limit) against
threshold 1.0 under ``le``; the individual values are listed in ``notes``.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from . import ggc
from .diffusions import besq_hitting_times, brownian_exp_integrals
from .expfun import PathConfig, sample_exponential_functionals, sample_sd_compositions
from .levy import (FrechetParams, frechet_exponent, gamma_power_moment, patie_exponent,
                   patie_psi_closed, psi_closed, psi_integral)
from .samplers import DistSpec, RngStream, cdf, sample, split_stream
from .specfun import macdonald_ratio
from .stats import ks_one_sample, ks_two_sample, mc_mean_se

__all__ = ["CheckReport", "CheckEntry", "list_checks", "run_check", "run_check_with_samples",
           "REGISTRY"]


@dataclass
class CheckReport:
    check_id: str
    params: dict
    statistic: float
    threshold: float
    pass_: bool
    n_samples: int
    seed: int
    runtime_ms: int
    notes: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("pass_")
        return {k: d[k] for k in ("check_id", "params", "statistic", "threshold", "pass",
                                  "n_samples", "seed", "runtime_ms", "notes")}

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        return cls(d["check_id"], dict(d["params"]), float(d["statistic"]), float(d["threshold"]),
                   bool(d["pass"]), int(d["n_samples"]), int(d["seed"]), int(d["runtime_ms"]),
                   str(d["notes"]))


@dataclass
class _Outcome:
    statistic: float
    n_samples: int
    details: list  # (name, value) pairs for the notes
    plots: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CheckEntry:
    check_id: str
    description: str
    anchor: str
    gate: str  # "le" or "ge"
    threshold: float
    defaults: dict
    fn: Callable[[dict, RngStream, int], _Outcome] = field(repr=False)
    limits: dict = field(default_factory=dict)


REGISTRY: dict[str, CheckEntry] = {}


def _register(check_id, description, anchor, gate, threshold, defaults, limits=None):
    def deco(fn):
        REGISTRY[check_id] = CheckEntry(check_id, description, anchor, gate, float(threshold),
                                        dict(defaults), fn, dict(limits or {}))
        return fn
    return deco


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _ks_cdf_plot(x, ref_cdf, label):
    return {"kind": "ecdf", "sample": np.asarray(x), "cdf": ref_cdf, "label": label}


def _ks_two_plot(x, y, label):
    return {"kind": "ecdf2", "sample": np.asarray(x), "reference": np.asarray(y), "label": label}


def _pairs(v):
    return [tuple(float(a) for a in p) for p in v]


def _floats(v):
    if isinstance(v, (int, float)):
        return [float(v)]
    return [float(a) for a in v]


# ---------------------------------------------------------------------------
# Analytic checks
# ---------------------------------------------------------------------------


@_register("moment_recursion", "Gamma(t+a n)/Gamma(t) against m psi(1)...psi(n-1)/(n-1)!",
           "moment recursion identifying 1/I",
           "le", 1e-10, {"alpha": [0.2, 0.5, 0.8], "t": [0.4, 1.0, 2.5], "n_max": 10})
def _moment_recursion(p, s, workers):
    worst = 0.0
    count = 0
    for a in _floats(p["alpha"]):
        for t in _floats(p["t"]):
            fp = FrechetParams(a, t)
            for n in range(1, int(p["n_max"]) + 1):
                d, r = gamma_power_moment(fp, n)
                worst = max(worst, abs(d - r) / abs(d))
                count += 1
    return _Outcome(worst, 0, [("cases", count), ("max_rel_err", worst)])


def _psi_grid(closed, spec, us):
    worst = 0.0
    for u in us:
        c = closed(u)
        worst = max(worst, abs(psi_integral(spec, u) - c) / (1.0 + abs(c)))
    return worst


@_register("psi_closed_vs_integral", "closed-form psi against m u + compensated Levy integral",
           "Levy density lemma", "le", 1e-6,
           {"alpha": [0.2, 0.5, 0.8], "t": [0.4, 1.0, 2.5], "u": [0.5, 1.0, 2.0, 5.0]})
def _psi_check(p, s, workers):
    worst = 0.0
    for a in _floats(p["alpha"]):
        for t in _floats(p["t"]):
            fp = FrechetParams(a, t)
            worst = max(worst, _psi_grid(lambda u: psi_closed(fp, u), frechet_exponent(fp),
                                         _floats(p["u"])))
    return _Outcome(worst, 0, [("max_scaled_err", worst)])


@_register("patie_psi_closed_vs_integral", "Patie exponent closed form against its Levy integral",
           "positive stable variant of the exponent", "le", 1e-6,
           {"alpha": [0.2, 0.5, 0.8], "u": [0.5, 1.0, 2.0, 5.0]})
def _patie_psi_check(p, s, workers):
    worst = 0.0
    for a in _floats(p["alpha"]):
        worst = max(worst, _psi_grid(lambda u: patie_psi_closed(a, u), patie_exponent(a),
                                     _floats(p["u"])))
    return _Outcome(worst, 0, [("max_scaled_err", worst)])


@_register("grosswald_stieltjes",
           "Stieltjes transform of the Thorin density against phi' and the Macdonald ratio",
           "Thorin measure of 1/(4 Gamma_t)",
           "le", 1.0, {"t": [0.5, 1.0, 1.5, 2.3], "lam": [0.1, 1.0, 10.0]},
           limits={"phi_vs_macdonald": 1e-6, "stieltjes_vs_phi": 1e-5, "closed_form": 1e-10})
def _grosswald(p, s, workers):
    lim = REGISTRY["grosswald_stieltjes"].limits
    e1 = e2 = 0.0
    for t in _floats(p["t"]):
        for lam in _floats(p["lam"]):
            ph = ggc.phi_prime(t, lam)
            mr = macdonald_ratio(t, lam)
            st = ggc.stieltjes_of_thorin(t, lam)
            e1 = max(e1, abs(ph - mr) / mr)
            e2 = max(e2, abs(st - ph) / ph)
    e3 = max(abs(ggc.phi_prime(0.5, 4.0) - 0.25), abs(ggc.phi_prime(1.5, 1.0) - 0.25))
    stat = max(e1 / lim["phi_vs_macdonald"], e2 / lim["stieltjes_vs_phi"], e3 / lim["closed_form"])
    return _Outcome(stat, 0, [("phi_vs_macdonald", e1), ("stieltjes_vs_phi", e2),
                              ("closed_form_err", e3)])


def _cm_table(rep):
    return {"kind": "cm", "table": rep.table, "violations": rep.violations, "label": rep.label}


@_register("weibull_not_id", "CM probe of -(d/dlam) log E[exp(-lam X)] for Weibull X; expects a violation",
           "Weibull laws are not infinitely divisible", "ge", 1,
           {"xi": 0.5, "grid": [0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0], "max_order": 4})
def _weibull(p, s, workers):
    f = ggc.laplace_exponent_derivative(float(p["xi"]), 1.0)
    rep = ggc.cm_probe(f, _floats(p["grid"]), int(p["max_order"]), label="weibull")
    first = rep.violations[0][:2] if rep.violations else None
    return _Outcome(rep.n_violations, 0, [("violations", rep.n_violations),
                                          ("first_violation", first),
                                          ("noise_floor", rep.noise_floor)],
                    {"cm": _cm_table(rep)})


@_register("frechet_cm_consistency", "CM probe of -(d/dlam) log E[exp(-lam Gamma_t^xi)], xi in (-1, 0)",
           "complete monotonicity for xi in (-1, 0)", "le", 0,
           {"xi": -0.5, "t": 0.5, "grid": [0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0],
            "max_order": 4})
def _frechet_cm(p, s, workers):
    xi = float(p["xi"])
    if not -1.0 < xi < 0.0:
        raise ValueError("xi must lie in (-1, 0)")
    f = ggc.laplace_exponent_derivative(xi, float(p["t"]))
    rep = ggc.cm_probe(f, _floats(p["grid"]), int(p["max_order"]), label="frechet")
    return _Outcome(rep.n_violations, 0, [("violations", rep.n_violations),
                                          ("noise_floor", rep.noise_floor)],
                    {"cm": _cm_table(rep)})


# ---------------------------------------------------------------------------
# Exact-sampler checks
# ---------------------------------------------------------------------------


@_register("identity_2_1", "sqrt(S_1/2) against 1/(2 sqrt(Gamma_1/2)), two-sample KS p-value",
           "square root of S_1/2 identity", "ge", 0.01, {"n": 100000})
def _identity_2_1(p, s, workers):
    n = int(p["n"])
    s1, s2 = split_stream(s, 2)
    a = np.sqrt(sample(DistSpec.positive_stable(0.5), n, s1))
    b = 0.5 / np.sqrt(sample(DistSpec.gamma(0.5), n, s2))
    d, pv = ks_two_sample(a, b)
    return _Outcome(pv, 2 * n, [("ks_D", d), ("p_value", pv)], {"ks": _ks_two_plot(a, b, "identity_2_1")})


@_register("gumbel_max_convergence", "max(L_1..L_n) - log n against the Gumbel law, one-sample KS distance",
           "maxima of exponentials converge to Gumbel", "le", 0.02, {"block": 10000, "n": 20000})
def _gumbel_max(p, s, workers):
    block, n = int(p["block"]), int(p["n"])
    rng = s.generator()
    out = np.empty(n)
    step = max(1, 5_000_000 // block)
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        out[lo:hi] = rng.standard_exponential((hi - lo, block)).max(axis=1)
    x = out - math.log(block)
    g = DistSpec.gumbel()
    d, pv = ks_one_sample(x, lambda v: cdf(g, v))
    return _Outcome(d, n * block, [("ks_D", d), ("p_value", pv)],
                    {"ks": _ks_cdf_plot(x, lambda v: cdf(g, v), "gumbel_max")})


@_register("gumbel_stable_identity", "-a log L + a log S_a against Gumbel draws, two-sample KS p-value",
           "Gumbel as log-ratio of exponential and stable", "ge", 0.01, {"alpha": 0.5, "n": 100000})
def _gumbel_stable(p, s, workers):
    a, n = float(p["alpha"]), int(p["n"])
    s1, s2, s3 = split_stream(s, 3)
    x = -a * np.log(sample(DistSpec.exponential(), n, s1)) + a * np.log(
        sample(DistSpec.positive_stable(a), n, s2))
    y = sample(DistSpec.gumbel(), n, s3)
    d, pv = ks_two_sample(x, y)
    return _Outcome(pv, 3 * n, [("ks_D", d), ("p_value", pv)], {"ks": _ks_two_plot(x, y, "gumbel_stable")})


@_register("gumbel_lt", "E[exp(-lam X_0)] = Gamma(1+lam) by Monte Carlo and by the Levy-Khintchine integral",
           "Gumbel Laplace transform and its Levy-Khintchine form", "le", 1.0,
           {"lam": [0.5, 1.0, 2.0, 5.0], "n": 100000}, limits={"quad": 1e-8, "z": 3.0})
def _gumbel_lt(p, s, workers):
    lim = REGISTRY["gumbel_lt"].limits
    n = int(p["n"])
    x = sample(DistSpec.gumbel(), n, s)
    qerr, zmax = 0.0, 0.0
    for lam in _floats(p["lam"]):
        lhs, rhs = ggc.gumbel_lk_check(lam)
        qerr = max(qerr, abs(lhs - rhs))
        m, se = mc_mean_se(np.exp(-lam * x))
        zmax = max(zmax, abs(m - math.gamma(1.0 + lam)) / se)
    return _Outcome(max(qerr / lim["quad"], zmax / lim["z"]), n,
                    [("quad_abs_err", qerr), ("max_z", zmax)])


@_register("size_biased_formula",
           "E[f(Gamma_t^xi)] against E[f(X) X^u]/E[X^u], u=(t-1)/xi, f=exp(-lam .), within 3 SE",
           "Gamma powers as size-biased extreme-value laws", "le", 3.0,
           {"xi": -0.5, "t": 2.0, "lam": [0.5, 1.0, 2.0], "n": 100000})
def _size_biased(p, s, workers):
    xi, t, n = float(p["xi"]), float(p["t"]), int(p["n"])
    u = (t - 1.0) / xi
    s1, s2 = split_stream(s, 2)
    g = sample(DistSpec.gamma_power(xi, t), n, s1)
    fam = DistSpec.frechet(xi) if xi < 0 else DistSpec.weibull(xi)
    x = sample(fam, n, s2)
    w = x**u
    wbar = w.mean()
    zmax = 0.0
    for lam in _floats(p["lam"]):
        m1, se1 = mc_mean_se(np.exp(-lam * g))
        fw = np.exp(-lam * x) * w
        r = fw.mean() / wbar
        # delta-method standard error of the ratio estimator
        _, se2 = mc_mean_se((fw - r * w) / wbar)
        zmax = max(zmax, abs(m1 - r) / math.hypot(se1, se2))
    return _Outcome(zmax, 2 * n, [("u", u), ("max_z", zmax)])


@_register("subordination_xi_lt_m1",
           "L^(-1/a) against L^-1 S_a (KS p-value) and E[exp(-lam L^xi)] = E[exp(-lam^a L^-a)] by quadrature",
           "subordination for xi < -1", "le", 1.0,
           {"alpha": 0.5, "lam": [0.5, 1.0, 2.0], "n": 100000}, limits={"quad": 1e-8, "p_value": 0.01})
def _subordination(p, s, workers):
    lim = REGISTRY["subordination_xi_lt_m1"].limits
    a, n = float(p["alpha"]), int(p["n"])
    xi = -1.0 / a
    s1, s2, s3 = split_stream(s, 3)
    x = sample(DistSpec.exponential(), n, s1) ** xi
    y = sample(DistSpec.positive_stable(a), n, s3) / sample(DistSpec.exponential(), n, s2)
    d, pv = ks_two_sample(x, y)
    qerr = 0.0
    for lam in _floats(p["lam"]):
        qerr = max(qerr, abs(ggc.laplace_gamma_power(xi, 1.0, lam)
                             - ggc.laplace_gamma_power(-a, 1.0, lam**a)))
    stat = max(qerr / lim["quad"], lim["p_value"] / max(pv, 1e-300))
    return _Outcome(stat, 3 * n, [("ks_D", d), ("p_value", pv), ("quad_abs_err", qerr)],
                    {"ks": _ks_two_plot(np.log(x), np.log(y), "subordination (log scale)")})


@_register("shs_factorization",
           "E[exp(-lam Gamma_t^xi)] E[S_a^(-a t)] against E[exp(-lam S_a / Gamma_at) S_a^(-a t)], xi=-1/a",
           "size-biased stable factorization", "le", 3.0,
           {"alpha": 0.5, "t": 1.5, "lam": [0.5, 1.0, 2.0], "n": 100000})
def _shs(p, s, workers):
    a, t, n = float(p["alpha"]), float(p["t"]), int(p["n"])
    xi = -1.0 / a
    s1, s2 = split_stream(s, 2)
    st = sample(DistSpec.positive_stable(a), n, s1)
    gm = sample(DistSpec.gamma(a * t), n, s2)
    w = st ** (-a * t)
    norm = math.gamma(1.0 + t) / math.gamma(1.0 + a * t)  # E[S_a^(-a t)]
    zmax = 0.0
    for lam in _floats(p["lam"]):
        lhs = ggc.laplace_gamma_power(xi, t, lam) * norm
        m, se = mc_mean_se(np.exp(-lam * st / gm) * w)
        zmax = max(zmax, abs(lhs - m) / se)
    return _Outcome(zmax, 2 * n, [("max_z", zmax)])


# ---------------------------------------------------------------------------
# Simulation checks
# ---------------------------------------------------------------------------


def _path_config(p):
    return PathConfig(eps_jump=float(p["eps"]), window_T=float(p["window_T"]),
                      grid_h=float(p["grid_h"]), tail_delta=float(p["tail_delta"]),
                      use_gaussian_proxy=bool(p["proxy"]))


_PATH_DEFAULTS = {"eps": 1e-3, "window_T": 5.0, "grid_h": 0.01, "tail_delta": 1e-8, "proxy": True}


@_register("main_theorem_expfun",
           "simulated I = int exp(-Z) against direct Gamma_t^-a draws (KS distance) and E[1/I] = m (3 SE)",
           "main theorem: Gamma_t^-a is an exponential functional", "le", 1.0,
           {"cases": [[0.5, 0.5], [0.3, 1.0], [0.7, 2.0]], "n": 20000, **_PATH_DEFAULTS},
           limits={"ks_D": 0.02, "z": 3.0})
def _main_theorem(p, s, workers):
    lim = REGISTRY["main_theorem_expfun"].limits
    n = int(p["n"])
    cfg = _path_config(p)
    cases = _pairs(p["cases"])
    streams = split_stream(s, 2 * len(cases))
    stat, details, plots = 0.0, [], {}
    for k, (a, t) in enumerate(cases):
        fp = FrechetParams(a, t)
        spec = frechet_exponent(fp)
        batch = sample_exponential_functionals(spec, n, cfg, streams[2 * k], workers=workers)
        direct = sample(DistSpec.gamma_power(-a, t), n, streams[2 * k + 1])
        d, _ = ks_two_sample(batch.values, direct)
        m, se = mc_mean_se(1.0 / batch.values)
        z = abs(m - spec.drift_m) / se
        stat = max(stat, d / lim["ks_D"], z / lim["z"])
        details += [(f"ks_D[{a},{t}]", d), (f"z[{a},{t}]", z), (f"truncated[{a},{t}]", batch.n_truncated)]
        plots[f"ks_{a}_{t}"] = _ks_two_plot(batch.values, direct, f"I vs Gamma_t^-a, a={a}, t={t}")
    return _Outcome(stat, 2 * n * len(cases), details, plots)


@_register("sd_split", "head + exp(-y) I' at first passage of y against directly simulated I, KS distance",
           "self-decomposability at first passage", "le", 0.02,
           {"alpha": 0.5, "t": 0.5, "y": 1.0, "n": 10000, "n_direct": 20000, **_PATH_DEFAULTS})
def _sd_split(p, s, workers):
    fp = FrechetParams(float(p["alpha"]), float(p["t"]))
    spec = frechet_exponent(fp)
    cfg = _path_config(p)
    s1, s2 = split_stream(s, 2)
    comp = sample_sd_compositions(spec, float(p["y"]), int(p["n"]), cfg, s1, workers=workers)
    direct = sample_exponential_functionals(spec, int(p["n_direct"]), cfg, s2, workers=workers)
    d, pv = ks_two_sample(comp.values, direct.values)
    return _Outcome(d, int(p["n"]) + int(p["n_direct"]),
                    [("ks_D", d), ("p_value", pv), ("min_passage_time", float(comp.passage_time.min()))],
                    {"ks": _ks_two_plot(comp.values, direct.values, "SD composition vs I")})


@_register("dufresne", "int exp(B_u - t u/2) du against 2/Gamma_t, one-sample KS distance",
           "Dufresne identity", "le", 0.02,
           {"t": [0.5, 1.5], "n": 10000, "step": 1e-3, "horizon_eps": 1e-6})
def _dufresne(p, s, workers):
    ts = _floats(p["t"])
    n = int(p["n"])
    streams = split_stream(s, len(ts))
    stat, details, plots = 0.0, [], {}
    for st, t in zip(streams, ts):
        x = brownian_exp_integrals(t, n, st, step=float(p["step"]),
                                   horizon_eps=float(p["horizon_eps"]))
        ref = DistSpec.gamma_power(-1.0, t)
        f = lambda v, ref=ref: cdf(ref, v / 2.0)  # noqa: E731
        d, pv = ks_one_sample(x, f)
        stat = max(stat, d)
        details += [(f"ks_D[t={t}]", d), (f"p_value[t={t}]", pv)]
        plots[f"ks_t{t}"] = _ks_cdf_plot(x, f, f"Brownian functional vs 2/Gamma_t, t={t}")
    return _Outcome(stat, n * len(ts), details, plots)


@_register("bessel_hitting",
           "BESQ(2(1-t)) hitting time of 0 from 1 against c/Gamma_t, best c in {1/2, 1/4}; convention-sensitive",
           "squared Bessel hitting time", "le", 0.05,
           {"t": [0.5, 0.75], "n": 4000, "step": 1e-4, "upper": 10.0, "c": [0.5, 0.25]})
def _bessel(p, s, workers):
    ts = _floats(p["t"])
    cs = _floats(p["c"])
    n = int(p["n"])
    upper = float(p["upper"])
    streams = split_stream(s, len(ts))
    worst = {c: 0.0 for c in cs}
    details, plots = [], {}
    for st, t in zip(streams, ts):
        if not 0.0 < t < 1.0:
            raise ValueError("t must lie in (0, 1)")
        x = besq_hitting_times(t, n, st, step=float(p["step"]), upper=upper)
        ref = DistSpec.gamma_power(-1.0, t)
        for c in cs:
            d, _ = ks_one_sample(x, lambda v, c=c: cdf(ref, v / c), upper=upper)
            worst[c] = max(worst[c], d)
            details.append((f"ks_D[t={t},c={c}]", d))
        details.append((f"censored[t={t}]", int(np.isinf(x).sum())))
        plots[f"ks_t{t}"] = {"kind": "ecdf", "sample": np.where(np.isinf(x), np.nan, x),
                             "cdf": lambda v, ref=ref: cdf(ref, 2.0 * v),
                             "label": f"BESQ hitting time vs 1/(2 Gamma_t), t={t}"}
    best = min(cs, key=lambda c: (worst[c], c))
    details.insert(0, ("matched_c", best))
    return _Outcome(worst[best], n * len(ts), details, plots)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def list_checks() -> list[tuple[str, str, str]]:
    """``(check_id, description, anchor)`` in registry order."""
    return [(e.check_id, e.description, e.anchor) for e in REGISTRY.values()]


def _resolve(check_id: str, params: dict | None) -> tuple[CheckEntry, dict]:
    try:
        entry = REGISTRY[check_id]
    except KeyError:
        raise LookupError(f"unknown check {check_id!r}") from None
    merged = dict(entry.defaults)
    for k, v in (params or {}).items():
        if k not in entry.defaults:
            raise ValueError(f"check {check_id!r} has no parameter {k!r}")
        merged[k] = v
    return entry, merged


def _execute(check_id, params, s, workers):
    entry, merged = _resolve(check_id, params)
    if s is None:
        s = RngStream(0)
    t0 = time.perf_counter()
    out = entry.fn(merged, s, workers)
    runtime = int(round((time.perf_counter() - t0) * 1000))
    stat = float(out.statistic)
    if not math.isfinite(stat):
        raise ArithmeticError(f"check {check_id!r} produced a non-finite statistic")
    ok = stat <= entry.threshold if entry.gate == "le" else stat >= entry.threshold
    sym = "<=" if entry.gate == "le" else ">="
    notes = f"gate: statistic {sym} threshold; stream_id={s.stream_id}; " + "; ".join(
        f"{k}={_fmt(v)}" for k, v in out.details)
    rep = CheckReport(check_id, merged, stat, entry.threshold, bool(ok), int(out.n_samples),
                      int(s.seed), runtime, notes)
    return rep, out.plots


def run_check(check_id: str, params: dict | None = None, s: RngStream | None = None,
              workers: int = 1) -> CheckReport:
    """Run one registered check. Unknown ids raise ``LookupError``; bad params ``ValueError``."""
    return _execute(check_id, params, s, workers)[0]


def run_check_with_samples(check_id: str, params: dict | None = None, s: RngStream | None = None,
                           workers: int = 1) -> tuple[CheckReport, dict[str, Any]]:
    """As :func:`run_check`, also returning the data behind the check's plots."""
    return _execute(check_id, params, s, workers)
