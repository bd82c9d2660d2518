import csv
import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from abel_periodic.cli import main

EQUATIONS = Path(__file__).resolve().parent.parent / "equations"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_condition_C(capsys):
    code, out, _ = run(capsys, "check", EQUATIONS / "quartic_cos.json", "--hypothesis", "c")
    data = json.loads(out)
    assert code == 0 and data["schema"] == "abel-report/1"
    assert data["certificate"]["nodes"] == [-2, -1, 1, 3]
    assert data["provenance"]["seed"] == 42


def test_check_curves(capsys):
    code, out, _ = run(capsys, "check", EQUATIONS / "cubic_cos_cubed.json", "--hypothesis", "hprime",
                       "--lambdas=-4,0,1")
    assert code == 0 and json.loads(out)["certificate"]["bound"] == 3


def test_check_uses_file_nodes(capsys):
    code, out, _ = run(capsys, "check", EQUATIONS / "quartic_four_cycles.json")
    cert = json.loads(out)["certificate"]
    assert code == 0 and [ev["mean_value"] for ev in cert["evidence"]] == [-30, 12, -18, 120]


def test_check_refusal_exits_2(capsys):
    code, out, _ = run(capsys, "check", EQUATIONS / "cubic_cos.json", "--lambdas=-1,0,3")
    data = json.loads(out)["certificate"]
    assert code == 2 and data["status"] == "not_certifiable" and data["witness_t"]


def test_check_arity_error_exits_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"degree": 3, "coefficients": [{"const": 1}, {"const": 1}, {"const": 1}]}')
    code, out, err = run(capsys, "check", bad)
    assert code == 1 and out == ""
    assert "degree 3 needs 4 coefficient records" in err


def test_check_reports_json_position(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"degree": 1,\n "coefficients": [}')
    code, _, err = run(capsys, "check", bad)
    assert code == 1 and "line 2" in err


def test_wrong_node_count_is_an_input_error(capsys):
    code, _, err = run(capsys, "check", EQUATIONS / "cubic_cos.json", "--lambdas=-1,1")
    assert code == 1 and "nodes" in err


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as info:
        main(["check"])
    assert info.value.code == 1
    capsys.readouterr()


def test_find_quartic(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "find", EQUATIONS / "quartic_four_cycles.json", "--range=-10:10", "--out", out)
    data = json.loads(out.read_text())
    xs = [s["x0"] for s in data["solutions"]["solutions"]]
    assert code == 0 and np.allclose(xs, [-4, -1, 1, 3], atol=1e-8)


def test_find_cubic_with_nodes_and_csv(capsys, tmp_path):
    out, table = tmp_path / "r.json", tmp_path / "d.csv"
    code, _, _ = run(capsys, "find", EQUATIONS / "cubic_cos.json", "--range=-5:5", "--grid", 401,
                     "--out", out, "--displacement-csv", table)
    data = json.loads(out.read_text())
    assert code == 0 and data["bound_satisfied"] is True
    comps = {s["component"] for s in data["solutions"]["solutions"]}
    assert {"(-1, 1)", "(1, 3)"} <= comps
    with open(table, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["x0", "displacement", "dH", "outcome"]
    assert len(rows) == 401
    x0 = [float(r["x0"]) for r in rows]
    assert all(a < b for a, b in zip(x0, x0[1:]))
    escaped = [r for r in rows if r["outcome"] == "escaped"]
    assert escaped and all(r["displacement"] == "" for r in escaped)


def test_find_zero_equation(capsys):
    code, out, _ = run(capsys, "find", EQUATIONS / "zero.json", "--range=-3:3", "--grid", 101)
    data = json.loads(out)
    assert code == 0 and "bound_satisfied" not in data
    assert data["solutions"]["has_continuum"] and data["solutions"]["count"] == 0


def test_find_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "find", EQUATIONS / "cubic_cos.json", "--out", tmp_path / "missing" / "r.json")
    assert code == 1 and "cannot write" in err


def test_find_bad_range(capsys):
    code, _, err = run(capsys, "find", EQUATIONS / "cubic_cos.json", "--range=3:1")
    assert code == 1 and "lo < hi" in err


def test_reproduce_list(capsys):
    code, out, _ = run(capsys, "reproduce", "--list")
    assert code == 0 and "quartic/solutions" in out and "PASS" not in out


def test_reproduce_passes(capsys):
    code, out, _ = run(capsys, "reproduce")
    assert code == 0 and "FAIL" not in out


def test_reproduce_degraded_tolerance_fails(capsys):
    code, out, _ = run(capsys, "reproduce", "--tol", 1)
    assert code != 0 and "FAIL" in out


@pytest.mark.skipif(shutil.which("abel-periodic") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["abel-periodic", "reproduce", "--list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "curves/certificate" in proc.stdout
