"""Command-line interface."""

from __future__ import annotations

import csv
import io
import json

import numpy as np
import pytest

from betagof import __version__
from betagof.cli import Report, main, read_values


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


# ---------------------------------------------------------------- input


def test_read_values_plain_and_csv_header(tmp_path):
    f = tmp_path / "x.txt"
    f.write_text("0.1\n\n# comment\n0.5\n0.9\n")
    assert read_values(f).tolist() == [0.1, 0.5, 0.9]
    f.write_text("humidity\n0.2\n0.4\n")
    assert read_values(f).tolist() == [0.2, 0.4]


def test_empty_file_is_an_error(tmp_path):
    f = tmp_path / "empty.txt"
    f.write_text("")
    code, out, err = run("test", "--file", str(f))
    assert code == 1 and out == "" and "no observations" in err


@pytest.mark.parametrize("content,fragment", [
    ("0.2\n1.5\n", "[0, 1]"),
    ("0.2,0.3\n", "one value per line"),
    ("0.2\nabc\n", "not a number"),
    ("0.0\n0.3\n0.6\n", "strictly inside"),
])
def test_bad_input_files(tmp_path, content, fragment):
    f = tmp_path / "bad.txt"
    f.write_text(content)
    code, _, err = run("test", "--file", str(f), "--B", "20")
    assert code == 1 and fragment in err


def test_missing_file_and_unknown_dataset(tmp_path):
    assert run("test", "--file", str(tmp_path / "nope.txt"))[0] == 1
    code, _, err = run("test", "--data", "june")
    assert code == 1 and "available" in err


def test_usage_errors_exit_1():
    assert run("test")[0] == 1
    assert run("test", "--data", "may2007", "--B", "zero")[0] == 1
    assert run("frobnicate")[0] == 1


def test_bad_settings():
    code, _, err = run("test", "--data", "may2007", "--level", "1.5")
    assert code == 1 and "level" in err
    code, _, err = run("test", "--data", "may2007", "--stat", "chisq")
    assert code == 1 and "unknown statistic" in err


# ---------------------------------------------------------------- test


def test_text_report():
    code, out, _ = run("test", "--data", "may2007", "--stat", "tn,ks", "--B", "60", "--seed", "1")
    assert code == 0
    assert "mle estimate: alpha = 6.356" in out
    assert "moments estimate" in out
    assert "Tn" in out and "KS" in out and "runtime" not in out


def test_json_report_round_trips():
    code, out, _ = run("test", "--data", "may2008", "--stat", "all", "--B", "40", "--format", "json")
    assert code == 0
    report = Report.from_json(out)
    assert report.to_json() + "\n" == out
    assert report.n == 31 and report.minimum == 0.39 and report.maximum == 0.98
    assert [o.statistic for o in report.outcomes] == ["KS", "CM", "AD", "RF_0.25", "RF_2", "RF_5", "Tn"]
    assert report.version == __version__ and report.seed == 0


def test_csv_report():
    code, out, _ = run("test", "--data", "may2007", "--stat", "tn", "--stat", "rf:2", "--B", "40",
                       "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("statistic,statistic_value,critical_value,p_value,reject")
    assert [line.split(",")[0] for line in lines[1:]] == ["Tn", "RF_2"]


def test_gate_exit_code():
    code, _, _ = run("test", "--data", "may2008", "--stat", "tn", "--B", "200", "--gate")
    assert code == 2
    code, _, _ = run("test", "--data", "may2008", "--stat", "tn", "--B", "200")
    assert code == 0


def test_dry_run_does_not_compute():
    code, out, _ = run("test", "--data", "may2007", "--stat", "all", "--dry-run")
    assert code == 0 and "statistics: KS, CM, AD" in out and "p-value" not in out


def test_clip_moves_boundary_values(tmp_path):
    f = tmp_path / "x.txt"
    f.write_text("0\n0.2\n0.35\n0.5\n0.7\n1\n")
    code, out, _ = run("test", "--file", str(f), "--clip", "--B", "30", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert 0 < rep["input"]["min"] and rep["input"]["max"] < 1
    assert "2 boundary observations" in rep["notes"][0]


def test_timing_is_opt_in():
    _, out, _ = run("test", "--data", "may2007", "--B", "20", "--timing", "--format", "json")
    assert json.loads(out)["runtime"] > 0


def test_output_independent_of_threads():
    outs = {run("test", "--data", "may2008", "--stat", "all", "--B", "600", "--format", "json",
                "--threads", str(k))[1] for k in (1, 3)}
    assert len(outs) == 1


# ---------------------------------------------------------------- power


def test_power_dry_run_and_validation(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('alternatives = ["B(1,1)", "LT(3,2)"]\nmc_reps = 4\nB = 20\n')
    code, out, _ = run("power", "--config", str(cfg), "--dry-run")
    assert code == 0 and "total bootstrap tests: 8" in out
    cfg.write_text('alternatives = ["B(1,1)"]\nlevel = 1.5\n')
    code, _, err = run("power", "--config", str(cfg))
    assert code == 1 and "level must lie strictly between 0 and 1" in err


def test_power_csv_output(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"alternatives": ["B(2,2)"], "n": [20], "mc_reps": 3, "B": 20, "statistics": ["tn"]}')
    code, out, _ = run("power", "--config", str(cfg), "--quiet")
    assert code == 0
    assert out.splitlines()[0] == "alternative,statistic,n,reps,B,level,rate,se"
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[1][:6] == ["B(2,2)", "Tn", "20", "3", "20", "0.1"]


# ---------------------------------------------------------------- eigen, simulate, data, qq


def test_eigen_text_and_json():
    code, out, _ = run("eigen", "--alpha", "1", "--beta", "1", "--m", "32", "--k", "4")
    assert code == 0 and out.count("lambda_") == 4 and "PSD check: ok" in out
    code, out, _ = run("eigen", "--alpha", "1", "--beta", "1", "--m", "32", "--method", "plain",
                       "--format", "json")
    d = json.loads(out)
    assert d["sum_eigenvalues"] == pytest.approx(d["trace"], rel=1e-12)
    assert all(x >= y for x, y in zip(d["eigenvalues"], d["eigenvalues"][1:]))
    assert run("eigen", "--alpha", "-1", "--beta", "1")[0] == 1


def test_simulate(tmp_path):
    code, out, _ = run("simulate", "B(2,2)", "--n", "5", "--seed", "7")
    values = [float(v) for v in out.split()]
    assert code == 0 and len(values) == 5 and all(0 < v < 1 for v in values)
    assert run("simulate", "B(2,2)", "--n", "5", "--seed", "7")[1] == out
    f = tmp_path / "lt.txt"
    assert run("simulate", "LT(3,2)", "--n", "50", "--seed", "1", "--out", str(f))[0] == 0
    x = np.loadtxt(f)
    assert x.size == 50 and np.all((x > 0) & (x < 1))
    code, _, err = run("simulate", "BN(0.25)", "--n", "5")
    assert code == 1 and "expects 5 arguments" in err and "position" in err


def test_simulated_file_feeds_the_test_command(tmp_path):
    f = tmp_path / "x.txt"
    run("simulate", "B(2,5)", "--n", "40", "--seed", "3", "--out", str(f))
    assert run("test", "--file", str(f), "--B", "30")[0] == 0


def test_data_command():
    code, out, _ = run("data")
    assert out.split() == ["may2007", "may2008"]
    code, out, _ = run("data", "may2008")
    assert out.split()[:3] == ["0.39", "0.40", "0.42"] and len(out.split()) == 31
    assert run("data", "june")[0] == 1


def test_qq_coordinates():
    code, out, _ = run("qq", "--data", "may2007")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "probability,theoretical,empirical" and len(lines) == 32
    pts = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert np.all(np.diff(pts[:, 1]) > 0)
    assert np.corrcoef(pts[:, 1], pts[:, 2])[0, 1] > 0.95
