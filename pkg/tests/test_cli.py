"""Command-line interface: exit codes and byte-stable output over the generate/verify/decompose pipeline."""

import json

import pytest

from selfsim.cli import EXIT_FAIL, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from selfsim.generator import PRESETS


@pytest.fixture()
def sysfile(tmp_path):
    path = tmp_path / "sys.json"
    path.write_text(json.dumps({"schema": "selfsim/1", "kind": "system", "model": "euler", "mach": 2.0, "epsilon": 0.05}))
    return str(path)


def test_sectors_table(sysfile, capsys):
    assert main(["sectors", "--system", sysfile]) == EXIT_OK
    out = capsys.readouterr().out
    assert "-0.57735027" in out and "+0.00000000" in out and "+0.57735027" in out
    assert "mu = 0.5235988 rad" in out


def test_sectors_json(sysfile, capsys):
    assert main(["sectors", "--system", sysfile, "--json"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert [round(s["center"], 8) for s in doc["sectors"]] == [-0.57735027, 0.0, 0.57735027]


def test_curves(sysfile, tmp_path):
    out = tmp_path / "c.csv"
    assert main(["curves", "--system", sysfile, "--family", "2", "--s-range=-0.01:0.01", "--n", "5", "--out", str(out)]) == EXIT_OK
    rows = [r for r in out.read_text().splitlines() if not r.startswith("#")]
    assert len(rows) == 6


def test_solve(sysfile, tmp_path):
    left = tmp_path / "l.json"
    right = tmp_path / "r.json"
    left.write_text(json.dumps({"primitive": {"rho": 1.0, "u": 2.0, "v": 0.0}}))
    right.write_text(json.dumps({"primitive": {"rho": 1.005, "u": 2.0, "v": 0.003}}))
    out = tmp_path / "p.json"
    assert main(["solve", "--system", sysfile, "--left", str(left), "--right", str(right), "--out", str(out)]) == EXIT_OK
    assert main(["verify", "--profile", str(out)]) == EXIT_OK


def test_solve_out_of_ball_is_numeric_failure(sysfile, tmp_path, capsys):
    left = tmp_path / "l.json"
    right = tmp_path / "r.json"
    left.write_text(json.dumps({"U": [1.0, 2.0, 0.0]}))
    right.write_text(json.dumps({"U": [1.5, 2.0, 0.0]}))
    assert main(["solve", "--system", sysfile, "--left", str(left), "--right", str(right)]) == EXIT_NUMERIC
    assert "OutOfBall" in capsys.readouterr().err


@pytest.mark.parametrize("name", PRESETS)
def test_pipeline(tmp_path, name):
    prof = tmp_path / "p.json"
    assert main(["generate", "--preset", name, "--out", str(prof)]) == EXIT_OK
    assert main(["verify", "--profile", str(prof)]) == EXIT_OK
    assert main(["classify", "--profile", str(prof)]) == EXIT_OK
    dec = tmp_path / "d.json"
    assert main(["decompose", "--profile", str(prof), "--out", str(dec)]) == EXIT_OK
    assert json.loads(dec.read_text())["total_variation"] >= 0


def test_verify_mutated_fails(tmp_path, capsys):
    prof = tmp_path / "p.json"
    assert main(["generate", "--preset", "forward-shock", "--mutate", "duplicate", "--out", str(prof)]) == EXIT_OK
    rep = tmp_path / "r.json"
    assert main(["verify", "--profile", str(prof), "--json", str(rep)]) == EXIT_FAIL
    assert "MultipleForwardWaves" in capsys.readouterr().out
    assert json.loads(rep.read_text())["passed"] is False


def test_deterministic_output(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    csvs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p, c in zip(paths, csvs):
        assert main(["generate", "--preset", "riemann", "--seed", "7", "--out", str(p), "--csv", str(c)]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert csvs[0].read_bytes() == csvs[1].read_bytes()


def test_usage_errors(tmp_path):
    assert main(["bogus"]) == EXIT_USAGE
    assert main(["verify", "--profile", str(tmp_path / "missing.json")]) == EXIT_USAGE
    assert main(["generate", "--preset", "nope"]) == EXIT_USAGE


def test_tolerance_override_env(tmp_path, monkeypatch, capsys):
    tol = tmp_path / "tol.json"
    tol.write_text(json.dumps({"weak_tol": 1e-30}))
    monkeypatch.setenv("SELFSIM_TOL_FILE", str(tol))
    prof = tmp_path / "p.json"
    assert main(["generate", "--preset", "forward-fan", "--out", str(prof)]) == EXIT_OK
    assert main(["verify", "--profile", str(prof)]) == EXIT_FAIL
