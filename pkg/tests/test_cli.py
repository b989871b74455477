import json
import subprocess
import sys
from pathlib import Path

import pytest

from symwave.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture(autouse=True)
def out(tmp_path, monkeypatch):
    monkeypatch.setenv("SYMWAVE_OUTPUT", str(tmp_path))
    return tmp_path


def test_list(capsys):
    assert main(["list"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [l.split()[0] for l in lines] == sorted(l.split()[0] for l in lines)
    assert len(lines) == 5


def test_validate_shipped(capsys):
    paths = sorted(str(p) for p in CONFIGS.glob("*.json"))
    assert main(["validate", *paths]) == 0
    assert capsys.readouterr().out.count(": ok") == 5


def test_validate_bad_and_missing(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "evolution", "parameters": {"dt": 0}}))
    assert main(["validate", str(bad)]) == 1
    assert "dt must be positive" in capsys.readouterr().out
    assert main(["validate", str(tmp_path / "missing.json")]) == 2


def test_config_round_trip(tmp_path, capsys):
    assert main(["config", "dispersion"]) == 0
    path = tmp_path / "d.json"
    path.write_text(capsys.readouterr().out)
    assert main(["validate", str(path)]) == 0


def test_run_config_file(out, capsys):
    assert main(["run", str(CONFIGS / "parity.json")]) == 0
    text = capsys.readouterr().out
    assert "[PASS] parity: corpus_hypotheses_met" in text
    assert (out / "parity" / "report.json").is_file()


def test_run_errors(tmp_path, capsys):
    assert main(["run"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["run", str(bad)]) == 2
    assert main(["run", "-e", "parity", "-e", "parity"]) == 2


def test_run_failure_exit_code(monkeypatch, capsys):
    import symwave.linear_wavefield as lw
    from symwave.errors import NotConstantVorticity

    def boom(*a, **k):
        raise NotConstantVorticity("forced")
    monkeypatch.setattr(lw, "dispersion_check", boom)
    assert main(["run", "-e", "dispersion"]) == 1
    assert "[FAIL]" in capsys.readouterr().out


def test_parity_builtin(capsys):
    assert main(["parity", "--builtin"]) == 0
    rows = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert len(rows) == 4 and all(r["hypotheses_met"] for r in rows)


def test_parity_counterexample_and_errors(capsys):
    assert main(["parity", "u_t = u_xx"]) == 1
    assert json.loads(capsys.readouterr().out)["witness"] == "u_xx"
    assert main(["parity", "u_t = u_x +"]) == 2
    assert "PdeSyntaxError" in capsys.readouterr().out
    assert main(["parity"]) == 2
    assert main(["parity", "--param", "kappa", "u_t = u_x"]) == 2


def test_parity_params_and_files(tmp_path, capsys):
    assert main(["parity", "--param", "a=1/3", "u_t = a*u_xxx"]) == 0
    capsys.readouterr()
    eqs = tmp_path / "eqs.txt"
    eqs.write_text("u_t + u_xxx + 6*u*u_x = 0\n# comment\nu_t = u_xx\n")
    assert main(["parity", str(eqs)]) == 1
    assert len(capsys.readouterr().out.strip().splitlines()) == 2


def test_console_entry_point(out):
    proc = subprocess.run([sys.executable, "-m", "symwave.cli", "list"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "evolution" in proc.stdout
