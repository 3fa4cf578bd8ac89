import json
import math

import pytest

from helmholtz_lab import cli
from helmholtz_lab.nonlinearity import spec_from_dict, spec_to_dict

G2_SPEC = {"family": "defocusing_power", "parameters": {"k": 1.0, "Q": -1.0, "p": 4.0}}


@pytest.fixture
def g2_file(tmp_path):
    path = tmp_path / "g2.json"
    path.write_text(json.dumps(G2_SPEC))
    return path


def run(capsys, *argv):
    code = cli.run([str(a) for a in argv])
    out = capsys.readouterr()
    doc = json.loads(out.out) if out.out.strip() else None
    return code, doc, out.err


def test_solve_oscillating(capsys, g2_file, tmp_path):
    code, doc, _ = run(capsys, "solve", g2_file, "--N", 3, "--alpha", 0.5,
                       "--csv", tmp_path / "t.csv", "--events", tmp_path / "e.csv")
    assert code == 0 and doc["verdicts"][0]["verdict"] == "OscillatingLocalized"
    assert doc["schema"] == cli.SCHEMA and doc["schema_version"] == cli.SCHEMA_VERSION
    assert doc["checks"]["Z"]["passed"] and doc["checks"]["chain"]["passed"]
    assert (tmp_path / "t.csv").read_text().startswith("r,u,du\n")
    assert (tmp_path / "e.csv").read_text().startswith("kind,r,u\n")


def test_solve_zero(capsys, g2_file):
    code, doc, _ = run(capsys, "solve", g2_file, "--N", 3, "--alpha", 0)
    assert code == 0 and doc["verdicts"][0]["verdict"] == "ConstantZero"


def test_damping_rejected(capsys, tmp_path):
    path = tmp_path / "damping.json"
    path.write_text(json.dumps({"family": "pure_damping"}))
    code, doc, err = run(capsys, "solve", path, "--N", 3, "--alpha", 0.5)
    assert code == 2 and doc is None and "non-existence" in err


def test_usage_errors(capsys):
    code, _, err = run(capsys, "solve", "g2", "--N", 3)
    assert code == 2 and "family" in err
    code, _, err = run(capsys, "frobnicate")
    assert code == 2
    code, _, err = run(capsys, "solve", "missing.json", "--N", 3, "--alpha", 0.5)
    assert code == 2 and "no such spec" in err


def test_validate_echo_round_trip(capsys, g2_file, tmp_path):
    echo = tmp_path / "echo.json"
    code, doc, _ = run(capsys, "validate", g2_file, "--echo", echo)
    assert code == 0 and doc["passed"] and doc["results"]["admissible_interval"] == [-1.0, 1.0]
    spec = spec_from_dict(json.loads(echo.read_text()))
    assert spec == spec_from_dict(G2_SPEC)
    assert spec_to_dict(spec_from_dict(json.loads(echo.read_text()))) == json.loads(echo.read_text())


def test_validate_failure_is_exit_1(capsys):
    code, doc, _ = run(capsys, "validate", "damping")
    assert code == 1 and not doc["passed"]


def test_sweep(capsys, tmp_path):
    code, doc, _ = run(capsys, "sweep", "g2", "--N", 3, "--alphas", "0.5,0.1", "1.5",
                       "--csv", tmp_path / "s.csv")
    assert code == 0
    assert doc["verdicts"] == ["OscillatingLocalized", "OscillatingLocalized", "Blowup"]
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 4


def test_decay(capsys):
    code, doc, _ = run(capsys, "decay", "g2", "--N", 2, "--alpha", 0.5, "--rmax", 500)
    assert code == 0 and abs(doc["decay"]["exponent"] + 0.5) < 0.05


def test_threshold(capsys):
    code, doc, _ = run(capsys, "threshold", "g2", "--N", 3)
    assert code == 0 and doc["results"]["alpha_lo"] <= 1.0 <= doc["results"]["alpha_hi"]
    code, doc, _ = run(capsys, "threshold", "g3", "--N", 3)
    assert code == 1 and doc["errors"][0].startswith("NoBracket")


def test_domain(capsys, tmp_path):
    code, doc, _ = run(capsys, "domain", "g2", "--N", 3, "--radii", "4 8", "--mesh-density", 64,
                       "--csv", tmp_path / "d.csv")
    assert code == 0 and len(doc["results"]["rows"]) == 2
    code, doc, _ = run(capsys, "domain", "g2", "--N", 3, "--radii", "2 4")
    assert code == 2


def test_out_file_and_round_trip(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, doc, _ = run(capsys, "solve", "g2", "--N", 3, "--alpha", 0.5, "--out", out)
    assert code == 0 and doc is None
    text = out.read_text()
    summary = cli.RunSummary.from_json(text)
    assert summary.to_json() == text
    assert cli.RunSummary.from_dict(summary.to_dict()) == summary


def test_nonfinite_values_round_trip():
    s = cli.RunSummary("x", {}, {"a": math.inf, "b": -math.inf}, True, results={"c": math.nan})
    back = cli.RunSummary.from_json(s.to_json())
    assert back.config == {"a": math.inf, "b": -math.inf} and math.isnan(back.results["c"])
    assert "Infinity" in s.to_json() and "NaN" in s.to_json()


def test_threads_env(monkeypatch):
    monkeypatch.setenv("HELMHOLTZ_THREADS", "3")
    assert cli.worker_count() == 3
    monkeypatch.setenv("HELMHOLTZ_THREADS", "0")
    assert cli.worker_count() >= 1
    monkeypatch.setenv("HELMHOLTZ_THREADS", "many")
    with pytest.raises(cli.UsageError):
        cli.worker_count()
