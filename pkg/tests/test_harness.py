import json
from pathlib import Path

import pytest

from symwave.errors import ConfigError, NotConstantVorticity
from symwave.harness import (DEFAULTS, EXPERIMENT_NAMES, ExperimentConfig, config_to_json,
                             default_config, list_experiments, load_config, run_experiment,
                             validate_config)
from symwave.harness.experiments import CRITERIA

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv("SYMWAVE_OUTPUT", str(tmp_path))
    return tmp_path


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_list_is_sorted_with_descriptions():
    entries = list_experiments()
    names = [n for n, _ in entries]
    assert names == sorted(names) == list(EXPERIMENT_NAMES)
    assert len(entries) == 5 and all(d for _, d in entries)


@pytest.mark.parametrize("name", EXPERIMENT_NAMES)
def test_shipped_configs_validate_and_equal_defaults(name):
    path = CONFIGS / f"{name}.json"
    assert validate_config(path) == []
    cfg = load_config(path)
    assert cfg.parameters == DEFAULTS[name]
    assert json.loads(config_to_json(default_config(name))) == json.loads(
        config_to_json(ExperimentConfig(name, {}, f"runs/{name}")))


def test_validate_range_messages(tmp_path):
    assert validate_config(write(tmp_path, {"name": "evolution", "parameters": {"dt": 0}})) == [
        "dt must be positive"]
    msgs = validate_config(write(tmp_path, {"name": "evolution",
                                            "parameters": {"soliton": {"n": 100}}}))
    assert len(msgs) == 1 and "soliton.n" in msgs[0] and "100" in msgs[0]


def test_validate_schema_messages(tmp_path):
    msgs = validate_config(write(tmp_path, {"name": "forward-sl", "parameters": {"bogus": 1}}))
    assert any("bogus" in m for m in msgs)
    assert validate_config(write(tmp_path, {"name": "nope"}))
    assert validate_config(write(tmp_path, [1, 2]))
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert "invalid JSON" in validate_config(bad)[0]
    with pytest.raises(OSError):
        validate_config(tmp_path / "missing.json")


def test_unknown_experiment_and_invalid_parameters():
    with pytest.raises(ConfigError):
        ExperimentConfig("nope")
    with pytest.raises(ConfigError):
        ExperimentConfig("evolution", {"dt": -1.0})


def test_partial_parameters_merge_over_defaults():
    cfg = ExperimentConfig("evolution", {"soliton": {"kappa": 0.5}})
    assert cfg.parameters["soliton"]["kappa"] == 0.5
    assert cfg.parameters["soliton"]["n"] == DEFAULTS["evolution"]["soliton"]["n"]


def test_output_override(out):
    cfg = ExperimentConfig("parity", {}, "somewhere/else")
    assert cfg.resolved_output_dir == out / "parity"
    rep = run_experiment(cfg)
    assert rep.passed
    assert (out / "parity" / "report.json").is_file()
    assert (out / "parity" / "timings.json").is_file()
    assert not Path("somewhere").exists()


def test_explicit_output_dir(tmp_path, monkeypatch):
    monkeypatch.delenv("SYMWAVE_OUTPUT", raising=False)
    cfg = ExperimentConfig("parity", {}, str(tmp_path / "here"))
    run_experiment(cfg)
    assert (tmp_path / "here" / "report.json").is_file()


@pytest.mark.parametrize("name", ["parity", "dispersion"])
def test_reports_are_byte_identical(out, name):
    run_experiment(default_config(name))
    first = (out / name / "report.json").read_bytes()
    run_experiment(default_config(name))
    assert (out / name / "report.json").read_bytes() == first
    data = json.loads(first)
    assert "timings" not in data and "versions" in data
    assert [c["name"] for c in data["criteria"]] == list(CRITERIA[name])


def test_module_errors_become_failed_criteria(out, monkeypatch):
    import symwave.linear_wavefield as lw

    def boom(*a, **k):
        raise NotConstantVorticity("forced")
    monkeypatch.setattr(lw, "dispersion_check", boom)
    rep = run_experiment(default_config("dispersion"))
    assert not rep.passed
    crit = rep.criteria
    assert crit["mode_residuals"].passed
    for name in ("substituted_relation_holds", "printed_relation_discrepancy_flagged"):
        assert not crit[name].passed and "NotConstantVorticity" in crit[name].error
    assert any(line.startswith("[FAIL]") for line in rep.summary_lines())


def test_parity_report_content(out):
    rep = run_experiment(default_config("parity"))
    assert rep.criteria["corpus_hypotheses_met"].passed
    assert rep.criteria["counterexamples_rejected_with_witness"].passed
