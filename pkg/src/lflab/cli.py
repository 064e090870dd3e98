"""Command-line front end: ``verify``, ``sample``, ``table`` and ``plot``."""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import checks
from .checks import CheckReport, list_checks, run_check_with_samples
from .expfun import PathConfig, sample_exponential_functionals
from .levy import (FrechetParams, frechet_exponent, gamma_power_moment, patie_exponent,
                   psi_closed, psi_integral)
from .samplers import DistSpec, RngStream, sample, split_stream

__all__ = ["SuiteConfig", "main", "load_config", "load_report", "write_report", "SUITES"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_SIM = {"main_theorem_expfun", "sd_split", "dufresne", "bessel_hitting", "gumbel_max_convergence"}
SUITES = {
    "full": [c[0] for c in list_checks()],
    "quick": [c[0] for c in list_checks() if c[0] not in _SIM],
}

log = logging.getLogger("lflab")


class UsageError(Exception):
    pass


@dataclass
class SuiteConfig:
    checks: list = field(default_factory=list)  # (check_id, params) pairs
    seed: int = 0
    n_default: int | None = None
    output_dir: str = "."
    emit_plots: bool = False
    suite: str = "custom"

    def validate(self):
        known = set(checks.REGISTRY)
        for cid, _ in self.checks:
            if cid not in known:
                raise UsageError(f"unknown check {cid!r}")
        out = Path(self.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise UsageError(f"output directory {out} is not writable")


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        low = text.strip().lower()
        if low in ("true", "yes", "on"):
            return True
        if low in ("false", "no", "off"):
            return False
        return text.strip()


def load_config(path) -> SuiteConfig:
    """Read an INI file with a ``[suite]`` section and optional ``[check:<id>]`` sections.

    ``[suite]`` keys: ``seed``, ``n_default``, ``output_dir``, ``emit_plots``
    and ``checks`` (comma-separated ids, or a suite name such as ``full``).
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    sec = cp["suite"] if cp.has_section("suite") else {}
    cfg = SuiteConfig()
    if "seed" in sec:
        cfg.seed = int(sec["seed"])
    if "n_default" in sec:
        cfg.n_default = int(sec["n_default"])
    cfg.output_dir = sec.get("output_dir", cfg.output_dir)
    if "emit_plots" in sec:
        cfg.emit_plots = cp.getboolean("suite", "emit_plots")
    ids = []
    raw = sec.get("checks", "").strip()
    if raw in SUITES:
        ids, cfg.suite = list(SUITES[raw]), raw
    elif raw:
        ids = [x.strip() for x in raw.split(",") if x.strip()]
    params = {}
    for name in cp.sections():
        if name.startswith("check:"):
            cid = name.split(":", 1)[1].strip()
            params[cid] = {k: _parse_value(v) for k, v in cp[name].items()}
            if cid not in ids:
                ids.append(cid)
    cfg.checks = [(cid, params.get(cid, {})) for cid in ids]
    return cfg


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def report_dict(suite, seed, reports) -> dict:
    return {
        "suite": suite,
        "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "seed": int(seed),
        "checks": [r.to_dict() for r in reports],
        "all_pass": all(r.pass_ for r in reports),
    }


def write_report(path, suite, seed, reports) -> dict:
    body = report_dict(suite, seed, reports)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=2)
        fh.write("\n")
    return body


def load_report(path) -> tuple[dict, list[CheckReport]]:
    with open(path, encoding="utf-8") as fh:
        body = json.load(fh)
    return body, [CheckReport.from_dict(c) for c in body["checks"]]


def _effective_params(cid, params, n_default):
    p = dict(params)
    if n_default is not None and "n" in checks.REGISTRY[cid].defaults and "n" not in p:
        p["n"] = int(n_default)
    return p


def run_suite(cfg: SuiteConfig, workers: int = 1):
    """Run the configured checks; stream ``i`` of the suite seed goes to check ``i`` of the registry."""
    order = list(checks.REGISTRY)
    streams = split_stream(RngStream(cfg.seed), len(order))

    def one(item):
        cid, params = item
        st = streams[order.index(cid)]
        return run_check_with_samples(cid, _effective_params(cid, params, cfg.n_default), st)

    if workers > 1 and len(cfg.checks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(one, cfg.checks))
    else:
        results = [one(item) for item in cfg.checks]
    return results


# ---------------------------------------------------------------------------
# Plots
# ---------------------------------------------------------------------------


def _ecdf(x):
    x = np.sort(x[np.isfinite(x)])
    return x, np.arange(1, x.size + 1) / x.size


def write_plots(check_id, plots, out_dir) -> list[Path]:
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "lflab"
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for key, data in plots.items():
        fig, ax = plt.subplots(figsize=(6, 4))
        kind = data["kind"]
        if kind in ("ecdf", "ecdf2"):
            x, f = _ecdf(np.asarray(data["sample"], dtype=float))
            n_all = np.asarray(data["sample"]).size
            f = f * x.size / n_all
            hi = np.quantile(x, 0.99)
            ax.step(x, f, where="post", label="empirical")
            if kind == "ecdf":
                grid = np.linspace(x[0], hi, 400)
                ax.plot(grid, data["cdf"](grid), "--", label="reference CDF")
            else:
                y, g = _ecdf(np.asarray(data["reference"], dtype=float))
                ax.step(y, g, where="post", linestyle="--", label="reference sample")
            ax.set_xlim(x[0], hi)
            ax.set_ylabel("CDF")
        elif kind == "cm":
            rows = np.array([(k, lam, v) for k, lam, v, _ in data["table"]])
            for k in np.unique(rows[:, 0]):
                sel = rows[:, 0] == k
                ax.plot(rows[sel, 1], np.sign(rows[sel, 2]) * (int(k) + 0.1 * np.sign(rows[sel, 2])),
                        "o-", label=f"order {int(k)}")
            ax.set_xscale("log")
            ax.set_xlabel("lambda")
            ax.set_ylabel("sign of (-1)^k f^(k), offset by order")
        ax.set_title(data.get("label", key))
        ax.legend()
        path = out_dir / f"{check_id}_{key}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _default_seed():
    env = os.environ.get("LFLAB_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"LFLAB_SEED must be an integer, got {env!r}") from None


def cmd_verify(args) -> int:
    cfg = load_config(args.config) if args.config else SuiteConfig(seed=_default_seed())
    if args.seed is not None:
        cfg.seed = args.seed
    if args.n_default is not None:
        cfg.n_default = args.n_default
    if args.out_dir is not None:
        cfg.output_dir = args.out_dir
    if args.plots:
        cfg.emit_plots = True
    if args.check:
        cfg.checks = [(c, {}) for c in args.check]
        cfg.suite = "custom"
    elif args.suite:
        if args.suite not in SUITES:
            raise UsageError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
        cfg.checks = [(c, {}) for c in SUITES[args.suite]]
        cfg.suite = args.suite
    if not cfg.checks:
        cfg.checks = [(c, {}) for c in SUITES["full"]]
        cfg.suite = "full"
    cfg.validate()
    results = run_suite(cfg, workers=args.workers)
    reports = [r for r, _ in results]
    out = args.out or str(Path(cfg.output_dir) / "report.json")
    body = write_report(out, cfg.suite, cfg.seed, reports)
    for r in reports:
        print(f"{'PASS' if r.pass_ else 'FAIL'}  {r.check_id:32s} statistic={r.statistic:.6g} "
              f"threshold={r.threshold:.6g}  ({r.runtime_ms} ms)")
    if cfg.emit_plots:
        for r, plots in results:
            write_plots(r.check_id, plots, Path(cfg.output_dir) / "plots")
    print(f"report written to {out}")
    return EXIT_OK if body["all_pass"] else EXIT_FAIL


def _dist_from_args(args) -> DistSpec:
    tag = args.dist
    need = {"gamma": ["t"], "frechet": ["xi"], "weibull": ["xi"], "positive_stable": ["alpha"],
            "gamma_power": ["xi", "t"]}.get(tag, [])
    for k in need:
        if getattr(args, k) is None:
            raise UsageError(f"--dist {tag} needs --{k}")
    kw = {k: getattr(args, k) for k in need}
    return DistSpec(tag, kw)


def cmd_sample(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    s = RngStream(seed)
    if args.dist == "expfun":
        if args.alpha is None:
            raise UsageError("--dist expfun needs --alpha")
        if args.kind == "patie":
            spec = patie_exponent(args.alpha)
        else:
            if args.t is None:
                raise UsageError("--dist expfun --kind frechet needs --t")
            spec = frechet_exponent(FrechetParams(args.alpha, args.t))
        values = sample_exponential_functionals(spec, args.n, PathConfig(eps_jump=args.eps), s,
                                                workers=args.workers).values
    else:
        values = sample(_dist_from_args(args), args.n, s)
    fh = open(args.out, "w", encoding="ascii") if args.out else sys.stdout
    try:
        for v in values:
            fh.write(f"{float(v)!r}\n")
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_table(args) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    if args.kind == "psi":
        spec_p = FrechetParams(args.alpha, args.t)
        spec = frechet_exponent(spec_p)
        w.writerow(["u", "psi_closed", "psi_integral"])
        for u in _floats(args.grid or "0.5,1,2,5"):
            w.writerow([repr(u), repr(psi_closed(spec_p, u)), repr(psi_integral(spec, u))])
    elif args.kind == "moment":
        p = FrechetParams(args.alpha, args.t)
        w.writerow(["n", "direct", "recursive"])
        for n in range(1, args.n_max + 1):
            d, r = gamma_power_moment(p, n)
            w.writerow([n, repr(d), repr(r)])
    elif args.kind == "thorin":
        from .ggc import thorin_density
        w.writerow(["x", "thorin_density"])
        for x in _floats(args.grid or "0.01,0.1,1,10,100"):
            w.writerow([repr(x), repr(thorin_density(args.t, x))])
    elif args.kind == "phi":
        from .ggc import phi_prime, stieltjes_of_thorin
        from .specfun import macdonald_ratio
        w.writerow(["lambda", "phi_prime", "macdonald_ratio", "stieltjes_of_thorin"])
        for lam in _floats(args.grid or "0.1,1,10"):
            w.writerow([repr(lam), repr(phi_prime(args.t, lam)), repr(macdonald_ratio(args.t, lam)),
                        repr(stieltjes_of_thorin(args.t, lam))])
    return EXIT_OK


def cmd_plot(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = SuiteConfig(checks=[(c, {}) for c in args.check], seed=seed, output_dir=args.out_dir,
                      n_default=args.n_default)
    cfg.validate()
    paths = []
    for rep, plots in run_suite(cfg, workers=args.workers):
        paths += write_plots(rep.check_id, plots, cfg.output_dir)
    for p in paths:
        print(p)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lflab", description="Numerical checks of Gamma-power exponential functionals.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run checks and write a JSON report")
    v.add_argument("--suite", help=f"one of {sorted(SUITES)}")
    v.add_argument("--check", action="append", help="check id (repeatable)")
    v.add_argument("--config", help="INI suite file")
    v.add_argument("--seed", type=int)
    v.add_argument("--n-default", type=int, dest="n_default")
    v.add_argument("--out", help="report path (default <output_dir>/report.json)")
    v.add_argument("--out-dir", dest="out_dir")
    v.add_argument("--plots", action="store_true", help="also write SVG plots")
    v.add_argument("--workers", type=int, default=1)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample", help="print n draws, one per line")
    s.add_argument("--dist", required=True, choices=list(DistSpec.TAGS) + ["expfun"])
    s.add_argument("--xi", type=float)
    s.add_argument("--t", type=float)
    s.add_argument("--alpha", type=float)
    s.add_argument("--kind", choices=["frechet", "patie"], default="frechet")
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sample)

    t = sub.add_parser("table", help="print a CSV table")
    t.add_argument("--kind", required=True, choices=["psi", "moment", "thorin", "phi"])
    t.add_argument("--alpha", type=float, default=0.5)
    t.add_argument("--t", type=float, default=0.5)
    t.add_argument("--n-max", type=int, default=10, dest="n_max")
    t.add_argument("--grid", help="comma-separated abscissae")
    t.set_defaults(func=cmd_table)

    p = sub.add_parser("plot", help="write SVG plots for checks")
    p.add_argument("--check", action="append", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-default", type=int, dest="n_default")
    p.add_argument("--out-dir", dest="out_dir", default="plots")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        ap.print_usage(sys.stderr)
        print(f"lflab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
