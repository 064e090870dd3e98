"""Command-line behaviour, config parsing and report round-trip."""

import csv
import io
import json

import pytest

from lflab.cli import load_config, load_report, main


def test_unknown_check_exit_2(capsys, tmp_path):
    assert main(["verify", "--check", "nope", "--out-dir", str(tmp_path)]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand_and_flag():
    assert main(["frobnicate"]) == 2
    assert main(["verify", "--no-such-flag"]) == 2


def test_sample_reproducible(capsys):
    args = ["sample", "--dist", "gamma_power", "--xi", "-0.5", "--t", "0.5", "--n", "1000", "--seed", "7"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    lines = first.splitlines()
    assert len(lines) == 1000
    assert all(float(v) > 0 for v in lines)


def test_sample_missing_parameter(capsys):
    assert main(["sample", "--dist", "gamma", "--n", "3"]) == 2


def test_sample_expfun_to_file(tmp_path):
    out = tmp_path / "i.txt"
    assert main(["sample", "--dist", "expfun", "--alpha", "0.5", "--t", "0.5", "--n", "20",
                 "--seed", "1", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 20


def test_sample_env_seed(monkeypatch, capsys):
    monkeypatch.setenv("LFLAB_SEED", "123")
    main(["sample", "--dist", "exponential", "--n", "5"])
    a = capsys.readouterr().out
    main(["sample", "--dist", "exponential", "--n", "5", "--seed", "123"])
    assert capsys.readouterr().out == a
    monkeypatch.setenv("LFLAB_SEED", "abc")
    assert main(["sample", "--dist", "exponential", "--n", "5"]) == 2


@pytest.mark.parametrize("kind, header", [
    ("psi", ["u", "psi_closed", "psi_integral"]),
    ("moment", ["n", "direct", "recursive"]),
    ("thorin", ["x", "thorin_density"]),
    ("phi", ["lambda", "phi_prime", "macdonald_ratio", "stieltjes_of_thorin"]),
])
def test_table_csv(kind, header, capsys):
    assert main(["table", "--kind", kind, "--t", "1.5"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == header
    assert len(rows) > 2
    for r in rows[1:]:
        [float(v) for v in r]


CONFIG = """
# quick config
[suite]
seed = 42          ; suite seed
checks = moment_recursion, gumbel_lt
emit_plots = no

[check:gumbel_lt]
n = 2000
lam = [0.5, 1.0]
"""


def test_config_parsing(tmp_path):
    p = tmp_path / "suite.ini"
    p.write_text(CONFIG.replace("emit_plots = no", f"emit_plots = no\noutput_dir = {tmp_path}"))
    cfg = load_config(p)
    assert cfg.seed == 42
    assert str(cfg.output_dir) == str(tmp_path)
    assert cfg.checks == [("moment_recursion", {}), ("gumbel_lt", {"n": 2000, "lam": [0.5, 1.0]})]
    assert cfg.emit_plots is False


def test_verify_report_round_trip(tmp_path, capsys):
    p = tmp_path / "suite.ini"
    p.write_text(CONFIG)
    out = tmp_path / "report.json"
    assert main(["verify", "--config", str(p), "--out", str(out), "--out-dir", str(tmp_path)]) == 0
    body, reports = load_report(out)
    assert set(body) == {"suite", "created_utc", "seed", "checks", "all_pass"}
    assert body["all_pass"] is True and body["seed"] == 42
    assert [r.to_dict() for r in reports] == body["checks"]
    assert reports[1].params["n"] == 2000


def test_flags_override_config_and_failure_exit(tmp_path):
    p = tmp_path / "suite.ini"
    p.write_text("[suite]\nseed = 1\n[check:gumbel_max_convergence]\nblock = 1\nn = 2000\n")
    out = tmp_path / "r.json"
    assert main(["verify", "--config", str(p), "--seed", "5", "--out", str(out),
                 "--out-dir", str(tmp_path)]) == 1
    body = json.loads(out.read_text())
    assert body["seed"] == 5 and body["all_pass"] is False


def test_identical_invocations_identical_bodies(tmp_path):
    bodies = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert main(["verify", "--check", "identity_2_1", "--check", "gumbel_lt", "--seed", "3",
                     "--out", str(out), "--out-dir", str(tmp_path), "--workers", "2"]) == 0
        b = json.loads(out.read_text())
        b.pop("created_utc")
        for c in b["checks"]:
            c.pop("runtime_ms")
        bodies.append(b)
    assert bodies[0] == bodies[1]


def test_plot_command(tmp_path, capsys):
    assert main(["plot", "--check", "identity_2_1", "--check", "weibull_not_id", "--n-default", "2000",
                 "--out-dir", str(tmp_path), "--seed", "1"]) == 0
    svgs = sorted(p.name for p in tmp_path.glob("*.svg"))
    assert svgs == ["identity_2_1_ks.svg", "weibull_not_id_cm.svg"]
    assert (tmp_path / "identity_2_1_ks.svg").read_text().lstrip().startswith("<?xml")


def test_verify_plots_flag(tmp_path):
    assert main(["verify", "--check", "gumbel_stable_identity", "--n-default", "5000", "--plots",
                 "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "plots" / "gumbel_stable_identity_ks.svg").exists()
