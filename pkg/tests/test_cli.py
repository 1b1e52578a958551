import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from nonlocal_forms import cli


def run_json(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as e:
        cli.run(["--help"])
    assert e.value.code == 0
    assert "qr-check" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "nonlocal_forms", "toy", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "--p" in res.stdout


def test_unknown_command_is_invalid(capsys):
    with pytest.raises(SystemExit) as e:
        cli.run(["frobnicate"])
    assert e.value.code == cli.EXIT_INVALID


def test_toy_csv_rows_sum_to_one(tmp_path, capsys):
    out = tmp_path / "m.csv"
    code, rep = run_json(["toy", "--p", "0.5", "--t", "1.0", "--out", str(out), "--no-timestamp"], capsys)
    assert code == 0
    M = np.array([[float(x) for x in row] for row in csv.reader(out.open())])
    assert M.shape == (2, 2)
    assert np.max(np.abs(M.sum(axis=1) - 1)) <= 1e-12
    assert rep["result"]["max_abs_diff"] <= 1e-12
    assert rep["config"] == {"p": 0.5, "t": 1.0, "alpha": 0.5}


def test_qr_check_example0_basel(capsys):
    code, rep = run_json(["qr-check", "--preset", "example0", "--lambda", "i^-1", "--no-timestamp"], capsys)
    assert code == cli.EXIT_OK
    assert rep["result"]["verdict"] == "pass"
    lo, hi = rep["result"]["bracket"]
    assert lo <= math.pi**2 / 6 <= hi
    assert rep["result"]["sum"] == pytest.approx(1.644934, abs=2e-6)


def test_qr_check_harmonic_fails(capsys):
    code, rep = run_json(["qr-check", "--preset", "example0", "--lambda", "i^-0.5", "--n-terms", "1000",
                          "--no-timestamp"], capsys)
    assert code == cli.EXIT_FAIL and rep["result"]["verdict"] == "fail"


def test_qr_check_inconclusive(tmp_path, capsys):
    i = np.arange(1, 1001, dtype=float)
    cfg = {"flavor": "lp", "beta": list(i**-1.5), "gamma": list(np.ones(1000)), "n_terms": 1000,
           "tail": {"kind": "bound"}}
    path = tmp_path / "qr.json"
    path.write_text(json.dumps(cfg))
    code, rep = run_json(["qr-check", "--config", str(path), "--no-timestamp"], capsys)
    assert code == cli.EXIT_INCONCLUSIVE and rep["result"]["verdict"] == "inconclusive"


def test_qr_table_output(tmp_path, capsys):
    report = tmp_path / "r.json"
    code = cli.run(["qr-check", "--preset", "example0", "--lambda", "i^-1", "--n-terms", "1000",
                    "--report", str(report)])
    out = capsys.readouterr().out
    assert code == 0 and "verdict" in out and "weighted_tail_sum" in out
    assert json.loads(report.read_text())["result"]["verdict"] == "pass"


def test_reports_byte_identical(tmp_path):
    texts = []
    for k in range(2):
        r = tmp_path / f"r{k}.json"
        assert cli.run(["simulate", "--p", "0.3", "--T", "200", "--seed", "5", "--no-timestamp",
                        "--report", str(r)]) == 0
        texts.append(r.read_bytes())
    assert texts[0] == texts[1]
    rep = json.loads(texts[0])
    assert rep["config"] == {"p": 0.3, "T": 200.0} and rep["seed"] == 5
    r = tmp_path / "ts.json"
    cli.run(["toy", "--report", str(r)])
    assert "timestamp" in json.loads(r.read_text())


@pytest.mark.parametrize("command", ["simulate", "phi4-sample", "form-eval"])
def test_randomized_commands_need_seed(command, capsys):
    assert cli.run([command]) == cli.EXIT_INVALID
    assert "seed" in capsys.readouterr().err


@pytest.mark.parametrize("cfg, field", [
    ({"flavor": "lp", "gamma": [1.0], "n_terms": 1}, "tail"),
    ({"flavor": "lq", "gamma": [1.0], "n_terms": 1, "tail": {"kind": "bound"}}, "qr"),
    ({"flavor": "lp", "gamma": "i^x", "n_terms": 3, "tail": {"kind": "bound"}}, "gamma"),
    ({"flavor": "lp", "gamma": [1.0], "n_terms": 1, "tail": {"kind": "bound", "extra": 1}}, "tail.extra"),
    ({"flavor": "lp", "gamma": [1.0], "n_terms": 1, "tail": {"kind": "empirical",
                                                             "measure": {"type": "gaussian-spectral",
                                                                         "variances": [1.0]}}}, "seed"),
])
def test_validation_errors_name_the_field(cfg, field, tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert cli.run(["qr-check", "--config", str(path)]) == cli.EXIT_INVALID
    assert field in capsys.readouterr().err


def test_bad_inputs(tmp_path, capsys):
    assert cli.run(["toy", "--p", "1.5"]) == cli.EXIT_INVALID
    assert cli.run(["quantize", "--mu", "0.5,0.4"]) == cli.EXIT_INVALID
    assert cli.run(["toy", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_INVALID
    (tmp_path / "bad.json").write_text("{not json")
    assert cli.run(["toy", "--config", str(tmp_path / "bad.json")]) == cli.EXIT_INVALID
    err = capsys.readouterr().err
    assert "p:" in err and "config:" in err


def test_quantize_report(tmp_path, capsys):
    out = tmp_path / "M.csv"
    code, rep = run_json(["quantize", "--mu", "0.2,0.3,0.5", "--out", str(out), "--no-timestamp"], capsys)
    assert code == 0
    assert rep["result"]["invariance_residual"] <= 1e-14
    assert rep["result"]["detailed_balance_residual"] <= 1e-15
    M = np.loadtxt(out, delimiter=",")
    np.testing.assert_allclose(np.array([0.2, 0.3, 0.5]) @ M, [0.2, 0.3, 0.5], atol=1e-14)


def test_form_eval_discrete(tmp_path, capsys):
    cfg = {"measure": {"type": "product", "marginals": [{"kind": "atoms", "values": [0.5, -0.5],
                                                         "weights": [0.3, 0.7]}]},
           "u": {"kind": "projection", "i": 0}, "form": {"kernel_profile": "toy"}}
    path = tmp_path / "f.json"
    path.write_text(json.dumps(cfg))
    code, rep = run_json(["form-eval", "--config", str(path), "--seed", "1", "--no-timestamp"], capsys)
    assert code == 0 and rep["result"]["exact"]
    # (A u, u)_mu with A = 2 [[0.7, -0.7], [-0.3, 0.3]] and u = (1/2, -1/2)
    assert rep["result"]["value"] == pytest.approx(0.42, rel=1e-12)
    assert rep["config"] == cfg


def test_phi4_sample_and_simulate_csv(tmp_path, capsys):
    cfg = {"measure": {"type": "phi4", "side": 4}, "n_sweeps": 200, "burn_in": 50}
    path = tmp_path / "p.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "fields.csv"
    code, rep = run_json(["phi4-sample", "--config", str(path), "--seed", "2", "--out", str(out),
                          "--no-timestamp"], capsys)
    assert code == 0 and rep["result"]["n_samples"] == 200
    assert np.loadtxt(out, delimiter=",").shape == (200, 4)
    assert len(rep["result"]["exact_site_variance"]) == 4
    traj = tmp_path / "traj.csv"
    code, rep = run_json(["simulate", "--p", "0.3", "--T", "50", "--seed", "3", "--out", str(traj),
                          "--format", "csv", "--no-timestamp"], capsys)
    rows = list(csv.reader(traj.open()))
    assert code == 0 and rows[0] == ["t", "state", "x0"] and len(rows) == rep["result"]["n_jumps"] + 2
