import csv
import io

import pytest

from cee_rmab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_thresholds(capsys):
    code, out, _ = run(capsys, "thresholds", "--scenario", "S")
    assert code == 0
    assert "RCA L_min" in out and "414.8148148" in out
    assert "48.888889" in out


def test_bounds_table_and_curve(capsys):
    code, out, _ = run(capsys, "bounds", "--scenario", "S")
    assert code == 0
    assert "alpha*   421" in out
    tail = out[out.index("n,theorem_bound"):]
    rows = list(csv.reader(io.StringIO(tail)))
    assert rows[0] == ["n", "theorem_bound", "corollary_bound"]
    assert rows[-1][0] == "1000000"


def test_simulate_writes_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", "S", "--policy", "cee,rucb", "--horizon", "2000",
                       "--runs", "2", "--seed", "1", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "cee.csv").exists() and (tmp_path / "rucb-reconstructed.csv").exists()
    assert (tmp_path / "regret_over_ln_n.svg").exists()
    assert "reconstructed baseline" in out


def test_outdir_environment_override(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CEE_RMAB_OUTDIR", str(tmp_path / "env"))
    code, _, _ = run(capsys, "simulate", "--horizon", "500", "--runs", "1", "--no-plots")
    assert code == 0 and (tmp_path / "env" / "cee.csv").exists()


def test_named_error_and_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "bounds", "--scenario", str(tmp_path / "missing.toml"))
    assert code == 9 and err.startswith("ScenarioError:")


def test_bad_policy_name_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--policy", "ucb"])
    assert exc.value.code == 2


def test_validate_small(tmp_path, capsys):
    code, out, _ = run(capsys, "validate", "--seed", "0", "--replications", "2000", "--out", str(tmp_path))
    assert code == 0 and "FAIL" not in out
    assert (tmp_path / "validation.csv").exists()
    assert "markov-deviation" in out


def test_validation_failure_exit_code(monkeypatch, tmp_path, capsys):
    from cee_rmab import cli
    from cee_rmab.concentration import CheckReport

    monkeypatch.setattr(cli, "default_suite", lambda *a, **k: [CheckReport("x", "y", 0.5, 0.1, 0.01, 10)])
    code, out, err = run(capsys, "validate", "--out", str(tmp_path))
    assert code == 11 and err.startswith("ValidationFailure:") and "FAIL" in out
