"""Experiment configs, trial construction, verification verdicts, sweeps."""
import json

import numpy as np
import pytest
from pydantic import ValidationError

from gradleak import harness, reconstruct, trajectory
from gradleak.harness import (
    ConfigError,
    ConstantPolicyModel,
    ExperimentConfig,
    Tolerances,
    UniformFinitePolicyModel,
)
from gradleak.steps import AgentDependent, Constant, Diminishing, UniformFinite


def config(**kw) -> ExperimentConfig:
    base = dict(mode="constant", n=3, trials=2, seed=7)
    base.update(kw)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------------
# configuration model


def test_config_defaults_per_mode():
    assert isinstance(config(mode="constant").core_policy(), Constant)
    assert isinstance(config(mode="diminishing").core_policy(), Diminishing)
    assert isinstance(config(mode="finite").core_policy(), UniformFinite)
    assert isinstance(config(mode="constrained").core_policy(), UniformFinite)
    assert isinstance(config(mode="agent_dependent").core_policy(), AgentDependent)


def test_config_rejects_mismatched_policy():
    with pytest.raises(ValidationError):
        config(mode="finite", policy=ConstantPolicyModel(alpha=0.1))
    ok = config(mode="finite", policy=UniformFinitePolicyModel(values=[0.1, 0.2]))
    assert ok.core_policy().values == (0.1, 0.2)


def test_config_constrained_flag_coupling():
    assert config(mode="constrained").constrained is True
    assert config(mode="agent_dependent", constrained=True).constrained is True
    with pytest.raises(ValidationError):
        config(mode="constant", constrained=True)


def test_config_validates_ranges():
    with pytest.raises(ValidationError):
        config(n=0)
    with pytest.raises(ValidationError):
        config(trials=0)
    with pytest.raises(ValidationError):
        config(spectrum=(2.0, 1.0))
    with pytest.raises(ValidationError):
        config(sweep=(0, 5))
    with pytest.raises(ValidationError):
        config(sweep=(5, 2))
    with pytest.raises(ValidationError):
        config(bogus=1)


def test_resolved_success_rtol_defaults():
    assert config(mode="constant").resolved_success_rtol() == 1e-8
    assert config(mode="diminishing").resolved_success_rtol() == 1e-8
    assert config(mode="finite").resolved_success_rtol() == 1e-6
    custom = config(tolerances=Tolerances(success_rtol=1e-4))
    assert custom.resolved_success_rtol() == 1e-4


def test_config_schema_mentions_all_fields():
    schema = harness.config_schema()
    for field in ("mode", "n", "policy", "trials", "seed", "sweep", "tolerances"):
        assert field in schema["properties"]


# ---------------------------------------------------------------------------
# trial construction


def test_run_trial_deterministic_and_distinct():
    cfg = config(mode="finite", n=3)
    a = harness.run_trial(cfg, 0, horizon=6)
    b = harness.run_trial(cfg, 0, horizon=6)
    np.testing.assert_array_equal(a.trace.x, b.trace.x)
    other_trial = harness.run_trial(cfg, 1, horizon=6)
    assert not np.array_equal(a.trace.x, other_trial.trace.x)
    other_seed = harness.run_trial(config(mode="finite", n=3, seed=8), 0, horizon=6)
    assert not np.array_equal(a.trace.x, other_seed.trace.x)


def test_run_trial_constrained_geometry_feasible():
    cfg = config(mode="constrained", n=4, trials=1)
    for trial in range(5):
        run = harness.run_trial(cfg, trial, horizon=8)
        instance = run.trace.instance
        assert instance.constrained
        assert instance.constraints.m == cfg.m
        for x in run.trace.x:
            assert instance.constraints.strictly_feasible(x)
        assert 0 < instance.barrier_weight <= cfg.barrier_weight_max


def test_evaluate_result_requires_exact_recovery_for_constant():
    cfg = config(mode="constant", n=3)
    run = harness.run_trial(cfg, 0, horizon=6)
    ms = trajectory.measurements(run.trace)
    good = harness.route_reconstruction(cfg, run.trace.instance, ms)
    success, error = harness.evaluate_result(cfg, run.trace.instance, good)
    assert success and error < 1e-10
    under = harness.route_reconstruction(cfg, run.trace.instance, ms.first(2))
    success, error = harness.evaluate_result(cfg, run.trace.instance, under)
    assert not success and error is None


# ---------------------------------------------------------------------------
# probe counts


def test_sweep_counts_default_centers_on_transition():
    assert harness.sweep_counts(config(mode="constant", n=3)) == [1, 2, 3, 4, 5, 6]
    # finite estimators skip the single-pair count
    assert harness.sweep_counts(config(mode="finite", n=3)) == [2, 3, 4, 5, 6]
    assert harness.sweep_counts(config(mode="constrained", n=2)) == [2, 3, 4, 5, 6, 7]


def test_sweep_counts_explicit_range_and_minimum():
    assert harness.sweep_counts(config(sweep=(2, 5))) == [2, 3, 4, 5]
    assert harness.sweep_counts(config(mode="finite", n=3, sweep=(1, 4))) == [2, 3, 4]
    with pytest.raises(ConfigError):
        harness.sweep_counts(config(mode="finite", n=3, sweep=(1, 1)))


def test_sweep_counts_agent_probe_spread():
    counts = harness.sweep_counts(config(mode="agent_dependent", n=2))
    assert counts == sorted(set(harness.AGENT_PROBE_COUNTS))
    capped = harness.sweep_counts(config(mode="agent_dependent", n=2, horizon=10))
    assert max(capped) == 10


def test_resolve_horizon_guard():
    cfg = config(mode="constant", n=3, horizon=3)
    with pytest.raises(ConfigError):
        harness._resolve_horizon(cfg, [1, 2, 3, 4])


# ---------------------------------------------------------------------------
# verification

def test_verify_rejects_unknown_theorem_and_bad_hypotheses():
    with pytest.raises(ConfigError):
        harness.verify_theorem("T9", config())
    with pytest.raises(ConfigError):
        harness.verify_theorem("T1", config(n=2))  # outside stated hypotheses
    with pytest.raises(ConfigError):
        harness.verify_theorem("T2", config(mode="constant", n=5))  # wrong mode
    with pytest.raises(ConfigError):
        harness.verify_theorem("T3", config(mode="agent_dependent", constrained=True))
    with pytest.raises(ConfigError):
        harness.verify_theorem("T5", config(mode="agent_dependent"))


def test_verify_transition_reports_claim_failure_with_evidence():
    report = harness.verify_theorem("T1", config(mode="constant", n=3, trials=3))
    assert report.verdict == "fail"
    payload = report.payload
    assert payload["thresholds"] == {"required_k": 2, "guarantee_count": 3, "transition_count": 4}
    # Counts below the quoted guarantee stay underdetermined; the claim's own
    # boundary (3 pairs) is where the mismatches concentrate.
    assert all(m["count"] == 3 for m in payload["mismatches"])
    assert any("observed transition" in note for note in payload["notes"])
    by_count = {row["count"]: row for row in payload["counts"]}
    assert by_count[4]["successes"] == 3
    assert by_count[2]["statuses"] == {"underdetermined": 3}
    assert report.wall_clock_seconds > 0


def test_verify_never_identified_passes():
    report = harness.verify_theorem(
        "T3", ExperimentConfig(mode="agent_dependent", n=2, trials=3, seed=5)
    )
    assert report.verdict == "pass"
    assert report.payload["thresholds"]["expected_nullspace_dim"] == 5
    report = harness.verify_theorem(
        "T5", ExperimentConfig(mode="agent_dependent", n=2, constrained=True, trials=3, seed=5)
    )
    assert report.verdict == "pass"
    assert report.payload["thresholds"]["expected_nullspace_dim"] == 6


def test_verify_independence_passes_and_degenerate_fails():
    report = harness.verify_theorem("L1", config(trials=30))
    assert report.verdict == "pass"
    assert report.payload["degenerate_construction_fails"] is True
    assert report.payload["holds_rate"] >= 0.99


def test_verify_convergence_band_versus_divergence():
    cfg = ExperimentConfig(
        mode="agent_dependent", n=3, trials=3, seed=9, spectrum=(1.0, 2.5), horizon=400
    )
    report = harness.verify_theorem("A-convergence", cfg)
    assert report.verdict == "pass"
    assert report.payload["beyond_bound_failure_rate"] >= 0.9


def test_verify_convergence_rejects_wide_spectrum():
    cfg = ExperimentConfig(mode="agent_dependent", n=3, trials=2, seed=9, spectrum=(1.0, 10.0))
    with pytest.raises(ConfigError):
        harness.verify_theorem("A-convergence", cfg)


def test_report_json_canonical_and_timing_out_of_band():
    cfg = ExperimentConfig(mode="agent_dependent", n=2, trials=2, seed=3)
    a = harness.verify_theorem("T3", cfg)
    b = harness.verify_theorem("T3", cfg)
    assert a.to_json() == b.to_json()
    assert "wall_clock" not in a.to_json()
    payload = json.loads(a.to_json())
    assert payload["config_hash"] == payload["config_hash"]
    assert payload["tool_version"]
    assert payload["claim"]
    assert payload["verdict"] == "pass"


# ---------------------------------------------------------------------------
# sweep


def test_sweep_constant_rates_step_at_transition():
    outcome = harness.sweep(config(mode="constant", n=4, trials=3))
    assert outcome.verdict == "pass"
    lines = outcome.csv.strip().split("\n")
    assert lines[0] == "count,k,successes,trials,success_rate"
    rates = {int(line.split(",")[0]): float(line.split(",")[4]) for line in lines[1:]}
    transition = reconstruct.sharp_measurement_count("constant", 4)
    for count, rate in rates.items():
        assert rate == (1.0 if count >= transition else 0.0)
    assert outcome.payload["thresholds"]["transition_count"] == transition


def test_sweep_agent_is_all_zeros():
    outcome = harness.sweep(
        ExperimentConfig(mode="agent_dependent", n=2, trials=2, seed=4, sweep=(1, 8))
    )
    assert outcome.verdict == "pass"
    for row in outcome.payload["rows"]:
        assert row["successes"] == 0


def test_sweep_deterministic_bytes():
    cfg = config(mode="constant", n=3, trials=2)
    a = harness.sweep(cfg)
    b = harness.sweep(cfg)
    assert a.csv == b.csv
    assert a.to_json() == b.to_json()


# ---------------------------------------------------------------------------
# simulation bundles


def test_simulate_bundle_layout_and_determinism(tmp_path):
    cfg = config(mode="finite", n=3, trials=2)
    bundle = harness.simulate(cfg)
    expected = {
        "config.json",
        "summary.json",
        "trial000/trace.csv",
        "trial000/trace.json",
        "trial000/measurements.json",
        "trial001/trace.csv",
        "trial001/trace.json",
        "trial001/measurements.json",
    }
    assert set(bundle.files) == expected
    again = harness.simulate(cfg)
    assert bundle.files == again.files

    sidecar = json.loads(bundle.files["trial000/trace.json"])
    assert "steps" not in sidecar
    exposed = harness.simulate(cfg, expose_steps=True)
    assert "steps" in json.loads(exposed.files["trial000/trace.json"])

    meas = json.loads(bundle.files["trial000/measurements.json"])
    assert len(meas["x"]) == json.loads(bundle.files["summary.json"])["horizon"]

    paths = harness.write_bundle(tmp_path, bundle.files)
    assert len(paths) == len(expected)
    assert (tmp_path / "trial001" / "trace.csv").read_text().startswith("k,x_1")


def test_simulate_summary_embeds_config_hash():
    cfg = config(mode="constant", n=2, trials=1)
    bundle = harness.simulate(cfg)
    summary = bundle.summary
    assert summary["config_hash"] == harness.config_hash(cfg.canonical_dict())
    assert summary["trials"] == 1
