"""Check registry and report semantics."""

import pytest

from lflab.checks import REGISTRY, CheckReport, list_checks, run_check, run_check_with_samples
from lflab.samplers import RngStream

MANIFEST = [
    "moment_recursion",
    "psi_closed_vs_integral",
    "patie_psi_closed_vs_integral",
    "grosswald_stieltjes",
    "weibull_not_id",
    "frechet_cm_consistency",
    "identity_2_1",
    "gumbel_max_convergence",
    "gumbel_stable_identity",
    "gumbel_lt",
    "size_biased_formula",
    "subordination_xi_lt_m1",
    "shs_factorization",
    "main_theorem_expfun",
    "sd_split",
    "dufresne",
    "bessel_hitting",
]


def test_registry_matches_manifest():
    assert [c[0] for c in list_checks()] == MANIFEST


def test_every_entry_has_anchor_and_gate():
    for cid, desc, anchor in list_checks():
        assert desc and anchor.strip()
        assert REGISTRY[cid].gate in ("le", "ge")


def test_unknown_check():
    with pytest.raises(LookupError):
        run_check("nope", {}, RngStream(1))


def test_unknown_param():
    with pytest.raises(ValueError):
        run_check("moment_recursion", {"bogus": 1}, RngStream(1))


def test_invalid_param_value():
    with pytest.raises(ValueError):
        run_check("moment_recursion", {"alpha": 1.5}, RngStream(1))


def test_moment_recursion_example():
    r = run_check("moment_recursion", {"alpha": 0.5, "t": 0.5, "n_max": 10}, RngStream(1))
    assert r.pass_
    assert r.statistic <= 1e-10
    assert r.params == {"alpha": 0.5, "t": 0.5, "n_max": 10}


def test_identity_2_1_example():
    r = run_check("identity_2_1", {"n": 100_000}, RngStream(3))
    assert r.pass_ and r.statistic >= 0.01
    assert r.n_samples == 200_000
    assert "gate: statistic >= threshold" in r.notes


@pytest.mark.parametrize("cid, params", [
    ("identity_2_1", {"n": 2000}),
    ("shs_factorization", {"n": 2000}),
    ("bessel_hitting", {"n": 100, "t": 0.5, "upper": 1.0}),
    ("weibull_not_id", {}),
])
def test_deterministic_given_seed(cid, params):
    a = run_check(cid, params, RngStream(5, 9)).to_dict()
    b = run_check(cid, params, RngStream(5, 9)).to_dict()
    a.pop("runtime_ms"), b.pop("runtime_ms")
    assert a == b


def test_report_dict_round_trip():
    r = run_check("gumbel_lt", {"n": 1000}, RngStream(2))
    d = r.to_dict()
    assert list(d) == ["check_id", "params", "statistic", "threshold", "pass", "n_samples", "seed",
                       "runtime_ms", "notes"]
    assert CheckReport.from_dict(d) == r


def test_pass_flag_follows_gate():
    # a Gumbel max over blocks of one is an exponential, far from Gumbel
    r = run_check("gumbel_max_convergence", {"block": 1, "n": 2000}, RngStream(4))
    assert not r.pass_
    assert r.statistic > r.threshold


def test_weibull_report_pins_first_violation():
    r = run_check("weibull_not_id", {}, RngStream(0))
    assert r.pass_
    assert "first_violation=[4, 0.3]" in r.notes


def test_bessel_reports_matched_constant():
    r = run_check("bessel_hitting", {"n": 1500, "t": 0.5}, RngStream(6))
    assert "matched_c=0.5" in r.notes


def test_samples_returned_for_plots():
    r, plots = run_check_with_samples("identity_2_1", {"n": 1000}, RngStream(7))
    assert plots["ks"]["kind"] == "ecdf2"
    assert plots["ks"]["sample"].size == 1000
