from __future__ import annotations

import csv
import json

import pytest

from twophase import cli


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_critical_radii_table(tmp_path):
    assert cli.main(["critical-radii", "--dim", "2", "--mode-k", "1-3", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "critical_radii.csv")
    assert rows[0]["note"] == "no critical radius" and rows[0]["R_star_closed"] == ""
    assert float(rows[1]["R_star_closed"]) == pytest.approx(0.759836, abs=1e-6)
    info = json.loads((tmp_path / "critical_radii.json").read_text())
    assert info["passed"] and info["monotone"]["2"]


def test_seventeen_digits(tmp_path):
    cli.main(["critical-radii", "--dim", "2", "--mode-k", "2", "--out", str(tmp_path)])
    value = _rows(tmp_path / "critical_radii.csv")[0]["R_star_closed"]
    assert value == f"{(1 / 3) ** 0.25:.17g}"


def test_bifurcation_scan(tmp_path):
    code = cli.main(["bifurcation-scan", "--mode-k", "0-2", "--samples", "20",
                     "--sigma-c", "0.5,2", "--out", str(tmp_path)])
    assert code == 0
    rows = _rows(tmp_path / "det_M_scan.csv")
    assert len(rows) == 2 * 3 * 20
    info = json.loads((tmp_path / "det_M_scan.json").read_text())
    assert info["sign_changes"]["N=2,sigma_c=2,k=2"] == 1
    assert info["sign_changes"]["N=2,sigma_c=2,k=1"] == 0


def test_parallel_sweep_is_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["critical-radii", "--dim", "2-3", "--out", str(a)])
    cli.main(["critical-radii", "--dim", "2-3", "--parallel", "2", "--out", str(b)])
    assert (a / "critical_radii.csv").read_bytes() == (b / "critical_radii.csv").read_bytes()


def test_counterexample_default(tmp_path):
    assert cli.main(["counterexample", "--out", str(tmp_path)]) == 0
    info = json.loads((tmp_path / "counterexample.json").read_text())
    assert info["r_0_minus_r_pi"] == pytest.approx(0.13, abs=5e-3)
    assert info["identity_max_relative_residual"] <= 1e-6
    assert len(_rows(tmp_path / "counterexample.csv")) == 64


def test_counterexample_zero_offset(tmp_path):
    assert cli.main(["counterexample", "--epsilon", "0", "--out", str(tmp_path)]) == 0
    info = json.loads((tmp_path / "counterexample.json").read_text())
    assert info["asphericity_origin"] <= 1e-12
    assert info["identity_max_relative_residual"] <= 1e-10


def test_counterexample_auto(tmp_path):
    assert cli.main(["counterexample", "--epsilon", "auto", "--gamma", "auto",
                     "--out", str(tmp_path)]) == 0
    info = json.loads((tmp_path / "counterexample.json").read_text())
    assert info["epsilon"] == 0.25


def test_inadmissible_epsilon_is_validation_error(capsys):
    assert cli.main(["counterexample", "--epsilon", "0.9"]) == cli.EXIT_VALIDATION
    assert "monotonicity or gap" in capsys.readouterr().err


def test_verify_identities(tmp_path):
    assert cli.main(["verify-identities", "--draws", "6", "--out", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "offset_balls.csv")) == 6


def test_trace_branch(tmp_path):
    code = cli.main(["trace-branch", "--t-max", "0.01", "--steps", "2", "--out", str(tmp_path)])
    assert code == 0
    rows = _rows(tmp_path / "branch.csv")
    assert float(rows[0]["t"]) == 0.0
    assert float(rows[0]["residual"]) <= 1e-12
    info = json.loads((tmp_path / "branch.json").read_text())
    assert info["probe"]["relative_error"] <= 0.1
    assert info["certificate"]["passed"]
    assert len(_rows(tmp_path / "boundary.csv")) == 361


@pytest.mark.parametrize(
    "argv",
    [
        ["trace-branch", "--mode-k", "1"],
        ["critical-radii", "--dim", "1"],
        ["critical-radii", "--sigma-c", "1"],
        ["bifurcation-scan", "--samples", "1"],
        ["selftest", "--criteria", "11"],
        ["critical-radii", "--parallel", "0"],
    ],
)
def test_validation_exit_code(argv):
    assert cli.main(argv) == cli.EXIT_VALIDATION


def test_solver_failure_exit_code(monkeypatch, tmp_path):
    from twophase import branch

    def boom(*a, **k):
        raise branch.BranchError("continuation stopped: forced")

    monkeypatch.setattr(branch, "trace_branch", boom)
    assert cli.main(["trace-branch", "--out", str(tmp_path)]) == cli.EXIT_SOLVER


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"dim": "3", "mode_k": "2-3", "sigma-c": 0.5}))
    out = tmp_path / "o"
    assert cli.main(["critical-radii", "--config", str(cfg), "--out", str(out)]) == 0
    rows = _rows(out / "critical_radii.csv")
    assert [r["N"] for r in rows] == ["3", "3"]
    out2 = tmp_path / "o2"
    cli.main(["critical-radii", "--config", str(cfg), "--dim", "4", "--out", str(out2)])
    assert {r["N"] for r in _rows(out2 / "critical_radii.csv")} == {"4"}
    assert json.loads((out / "critical_radii.json").read_text())["sigma_c"] == 0.5


def test_bad_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert cli.main(["critical-radii", "--config", str(cfg)]) == cli.EXIT_VALIDATION


def test_stdout_output(capsys):
    assert cli.main(["critical-radii", "--dim", "2", "--mode-k", "2"]) == 0
    out = capsys.readouterr().out
    assert "# critical_radii.csv" in out and "R_star_closed" in out


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        cli.main(["verify-identities", "--draws", "4", "--seed", "7", "--out", str(d)])
    for name in ("offset_balls.csv", "offset_balls.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_selftest_subset(tmp_path, capsys):
    assert cli.main(["selftest", "--criteria", "1,9", "--out", str(tmp_path)]) == 0
    info = json.loads((tmp_path / "selftest.json").read_text())
    assert info["1"]["passed"] and info["9"]["passed"]
    assert "2/2 criteria passed" in capsys.readouterr().err
