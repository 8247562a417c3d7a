import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from qdense.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out)


def test_bound(capsys):
    code, doc = run_json(capsys, "bound", "--d", "2", "--lambdas", "0.894427,0.447214")
    assert code == 0
    assert doc["approximate_bound"] == pytest.approx(0.9, abs=1e-5)
    assert doc["unambiguous_bound"] == pytest.approx(0.4, abs=1e-5)

    code, doc = run_json(capsys, "bound", "--d", "4")
    assert doc["approximate_bound"] == pytest.approx(1) and doc["unambiguous_bound"] == pytest.approx(1)

    code, doc = run_json(capsys, "bound", "--d", "2", "--lambdas", "1,0")
    assert (doc["approximate_bound"], doc["unambiguous_bound"]) == (0.5, 0.0)


def test_bound_squared_and_csv(capsys):
    code, out, _ = run(capsys, "bound", "--d", "2", "--lambdas", "0.8,0.2", "--squared", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["d", "lambda_0", "lambda_1", "approximate_bound", "unambiguous_bound"]
    assert float(rows[1][3]) == pytest.approx(0.9, abs=1e-15)
    # 17 significant digits
    assert rows[1][1] == format(0.8**0.5, ".17g")


def test_bound_from_file(capsys, tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"d": 3, "lambdas": [0.5**0.5, 0.3**0.5, 0.2**0.5]}))
    code, doc = run_json(capsys, "bound", "--input", str(path))
    assert doc["unambiguous_bound"] == pytest.approx(0.6)


@pytest.mark.parametrize(
    "argv",
    [
        ["bound", "--d", "2", "--lambdas", "0.9,0.1"],
        ["bound", "--d", "3", "--lambdas", "1,0"],
        ["bound"],
        ["simulate", "--d", "2", "--lambdas", "1,0", "--kind", "unambiguous"],
        ["sweep", "--d", "2", "--start", "0.2"],
        ["bound", "--input", "/nonexistent/state.json"],
    ],
)
def test_input_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and err and not out


def test_unparseable_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bound", "--d", "2", "--lambdas", "x,y"])
    assert exc.value.code == 2


def test_malformed_file_reports_line(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"d": 2,\n "lambdas": [1 0]}')
    code, out, err = run(capsys, "bound", "--input", str(path))
    assert code == 2 and "line 2" in err


def test_simulate(capsys):
    code, doc = run_json(capsys, "simulate", "--d", "2")
    np.testing.assert_allclose(doc["outcome_matrix"], np.eye(4), atol=1e-12)
    assert doc["summary"]["average_success_probability"] == pytest.approx(1)

    code, doc = run_json(capsys, "simulate", "--d", "2", "--lambdas", "0.8,0.2", "--squared")
    np.testing.assert_allclose(np.diag(doc["outcome_matrix"]), 0.9, atol=1e-12)
    assert doc["summary"]["average_success_probability"] == pytest.approx(0.9)

    code, doc = run_json(capsys, "simulate", "--d", "2", "--lambdas", "0.8,0.2", "--squared", "--kind", "unambiguous")
    p = np.array(doc["outcome_matrix"])
    np.testing.assert_allclose(np.diag(p[:, :4]), 0.4, atol=1e-12)
    np.testing.assert_allclose(p[:, 4], 0.6, atol=1e-12)
    assert doc["summary"]["conclusive_probability"] == pytest.approx(0.4)


def test_verify_builtin(capsys):
    code, doc = run_json(capsys, "verify", "--d", "3", "--lambdas", "0.6,0.3,0.1", "--squared")
    assert code == 0 and doc["passed"]
    code, doc = run_json(capsys, "verify", "--d", "3", "--lambdas", "0.5,0.3,0.2", "--squared", "--kind", "unambiguous")
    assert code == 0
    unamb = next(c for c in doc["checks"] if c["name"] == "unambiguous")
    assert unamb["passed"] and unamb["conclusive_probability"] == pytest.approx(0.6)


@pytest.mark.parametrize("kind", ["approximate", "unambiguous"])
def test_emit_then_verify_round_trip(capsys, tmp_path, kind):
    path = tmp_path / "proto.json"
    code, _ = run_json(capsys, "simulate", "--d", "3", "--lambdas", "0.5,0.3,0.2", "--squared",
                       "--kind", kind, "--emit-protocol", str(path))
    code, imported = run_json(capsys, "verify", "--protocol", str(path))
    assert code == 0 and imported["passed"]
    code, builtin = run_json(capsys, "verify", "--d", "3", "--lambdas", "0.5,0.3,0.2", "--squared", "--kind", kind)
    assert imported == builtin


def _fault(tmp_path, capsys, mutate):
    path = tmp_path / "proto.json"
    run(capsys, "build", "--d", "2", "--lambdas", "0.8,0.2", "--squared", "--kind", "unambiguous",
        "--output", str(path))
    doc = json.loads(path.read_text())
    mutate(doc)
    path.write_text(json.dumps(doc))
    return run_json(capsys, "verify", "--protocol", str(path))


def test_verify_detects_scaled_povm_element(capsys, tmp_path):
    def scale(doc):
        el = doc["measurement"]["elements"][1]
        el["re"] = (1.01 * np.array(el["re"])).tolist()
        el["im"] = (1.01 * np.array(el["im"])).tolist()

    code, doc = _fault(tmp_path, capsys, scale)
    assert code == 1 and not doc["passed"]
    povm = next(c for c in doc["checks"] if c["name"] == "povm")
    assert not povm["passed"] and "sum to identity" in povm["detail"]


def test_verify_detects_zeroed_kraus(capsys, tmp_path):
    def zero(doc):
        k = doc["encodings"][2]["kraus"][0]
        k["re"] = np.zeros_like(k["re"]).tolist()
        k["im"] = np.zeros_like(k["im"]).tolist()

    code, doc = _fault(tmp_path, capsys, zero)
    assert code == 1
    assert not next(c for c in doc["checks"] if c["name"] == "channels")["passed"]


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--d", "2", "--start", "0.5", "--stop", "1.0", "--steps", "3")
    rows = list(csv.DictReader(io.StringIO(out)))
    np.testing.assert_allclose([float(r["unambiguous_bound"]) for r in rows], [1, 0.5, 0], atol=1e-12)
    np.testing.assert_allclose([float(r["approximate_bound"]) for r in rows][0], 1, atol=1e-12)
    for r in rows:
        assert float(r["approximate_achieved"]) == pytest.approx(float(r["approximate_bound"]), abs=1e-9)
        assert float(r["unambiguous_achieved"]) == pytest.approx(float(r["unambiguous_bound"]), abs=1e-9)

    code, out, _ = run(capsys, "sweep", "--d", "2", "--start", "0.8", "--stop", "0.8", "--steps", "1")
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["approximate_bound"]) == pytest.approx(0.9, abs=1e-12)


def test_sweep_higher_d(capsys):
    code, doc = run_json(capsys, "sweep", "--d", "3", "--steps", "4", "--format", "json")
    assert code == 0 and len(doc["rows"]) == 4
    for r in doc["rows"]:
        assert r["approximate_achieved"] == pytest.approx(r["approximate_bound"], abs=1e-9)


def test_search(capsys):
    argv = ["search", "--d", "2", "--lambdas", "0.8,0.2", "--squared", "--trials", "1000", "--seed", "7"]
    code, out1, _ = run(capsys, *argv)
    doc = json.loads(out1)
    assert code == 0 and doc["best_found"] <= 0.9 + 1e-9 and not doc["bound_exceeded"]
    code, out2, _ = run(capsys, *argv)
    assert out1 == out2


def test_montecarlo(capsys):
    code, doc = run_json(capsys, "montecarlo", "--diagonal", "1,1,1,1", "--samples", "1000")
    assert (doc["estimate"], doc["stderr"]) == (1.0, 0.0)
    argv = ["montecarlo", "--diagonal", "1,0.8,0.6,0.4", "--samples", "100000", "--seed", "3"]
    code, out1, _ = run(capsys, *argv)
    doc = json.loads(out1)
    assert abs(doc["estimate"] - 0.7) <= 4 * doc["stderr"]
    assert run(capsys, *argv)[1] == out1

    code, doc = run_json(capsys, "montecarlo", "--d", "2", "--lambdas", "0.8,0.2", "--squared", "--samples", "10")
    assert doc["analytic_average"] == pytest.approx(0.9)


def test_module_entry_point_exit_codes(tmp_path):
    ok = subprocess.run([sys.executable, "-m", "qdense", "bound", "--d", "2"], capture_output=True, text=True)
    assert ok.returncode == 0 and json.loads(ok.stdout)["approximate_bound"] == pytest.approx(1)
    bad = subprocess.run([sys.executable, "-m", "qdense", "bound", "--d", "2", "--lambdas", "0.1,0.1"],
                         capture_output=True, text=True)
    assert bad.returncode == 2 and "sum" in bad.stderr
