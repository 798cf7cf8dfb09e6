import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from alpha_mst.bnc import CSV_COLUMNS, REPORT_SCHEMA
from alpha_mst.cli import BOUND_COLUMNS, EXIT_FAIL, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, main
from alpha_mst.datasets import synthetic_tsplib


@pytest.fixture
def tsp(tmp_path):
    p = tmp_path / "pts.tsp"
    p.write_text(synthetic_tsplib("pts", 20, 42))
    return p


@pytest.fixture
def amst(tsp, tmp_path, capsys):
    out = tmp_path / "pts-7.amst"
    assert main(["gen", str(tsp), "--n", "7", "-o", str(out)]) == EXIT_OK
    capsys.readouterr()
    return out


def test_gen(amst):
    lines = amst.read_text().splitlines()
    assert lines[:2] == ["alpha-mst v1", "n 7"] and len(lines) == 9


def test_solve_outputs(amst, tmp_path, capsys):
    js, cs, dump, lp = (tmp_path / f for f in ("r.json", "r.csv", "cuts.txt", "m.lp"))
    rc = main(["solve", str(amst), "--alpha", "1/3pi", "--formulation", "fx++", "--json", str(js),
               "--csv", str(cs), "--dump-cuts", str(dump), "--export-lp", str(lp), "--seed", "1"])
    assert rc == EXIT_OK
    assert "status=OPTIMAL" in capsys.readouterr().out
    doc = json.loads(js.read_text())
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert doc["kind"] == "fx++" and doc["alpha"] == "1/3pi" and len(doc["tree"]) == 6
    main(["solve", str(amst), "--alpha", "1/3pi", "--csv", str(cs)])
    rows = list(csv.reader(cs.open()))
    assert rows[0] == CSV_COLUMNS and len(rows) == 3
    for line in dump.read_text().splitlines():
        kind, pairs, rhs, viol = line.split("; ")
        assert kind in ("SEC", "LAC", "ODD_CYCLE") and int(rhs) >= 1 and float(viol) > 0
    text = lp.read_text()
    assert "Minimize" in text and "x_0_1" in text and text.rstrip().endswith("End")


def test_solve_no_timing_is_reproducible(amst, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        main(["solve", str(amst), "--alpha", "1/2pi", "--formulation", "fxy*", "--json", str(p), "--no-timing"])
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors(amst, tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", str(amst), "--alpha", "7/2pi"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["solve", str(amst), "--alpha", "1/2pi", "--formulation", "fz"])
    assert exc.value.code == EXIT_USAGE
    assert main(["solve", str(tmp_path / "missing.amst"), "--alpha", "1/2pi"]) == EXIT_USAGE
    assert "no such instance" in capsys.readouterr().err


def test_infeasible_exit_code(tmp_path, capsys):
    p = tmp_path / "tri.amst"
    p.write_text("alpha-mst v1\nn 3\n0 0\n2 0\n1 1.7320508075688772\n")
    assert main(["solve", str(p), "--alpha", "1/6pi"]) == EXIT_INFEASIBLE


def test_check(amst, tmp_path, capsys):
    star = tmp_path / "star.txt"
    star.write_text("# star at 0\n" + "".join(f"0 {j}\n" for j in range(1, 7)))
    assert main(["check", str(amst), str(star), "--alpha", "2pi"]) == EXIT_OK
    assert main(["check", str(amst), str(star), "--alpha", "1/6pi"]) == EXIT_FAIL
    out = capsys.readouterr().out
    assert "vertex 0" in out and "VIOLATED" in out and "infeasible" in out
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 2\n2 0\n3 4\n4 5\n5 6\n")
    assert main(["check", str(amst), str(bad), "--alpha", "2pi"]) == EXIT_FAIL
    assert "cycle" in capsys.readouterr().out


def test_bounds(amst, capsys):
    assert main(["bounds", str(amst), "--alpha", "1/3pi", "--alpha", "4/5pi"]) == EXIT_OK
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == BOUND_COLUMNS and len(rows) == 3
    rec = dict(zip(rows[0], rows[1]))
    assert float(rec["w_fx"]) <= float(rec["w_fx+"]) + 1e-6
    assert rec["fx+_eq_fxy*"] in ("0", "1")


def test_bench(amst, tmp_path, capsys):
    out, agg = tmp_path / "runs.csv", tmp_path / "agg.csv"
    rc = main(["bench", str(amst), "--n", "6", "--alpha", "1/2pi", "--formulation", "fx",
               "--formulation", "fx+", "--out", str(out), "--aggregate", str(agg)])
    assert rc == EXIT_OK
    assert len(list(csv.reader(out.open()))) == 3
    assert len(list(csv.reader(agg.open()))) == 3


@pytest.mark.parametrize("level,expect", [("debug", True), ("quiet", False)])
def test_module_entry_point_and_log_level(amst, level, expect):
    res = subprocess.run([sys.executable, "-m", "alpha_mst.cli", "solve", str(amst), "--alpha", "1/3pi"],
                         capture_output=True, text=True, env={"ALPHA_MST_LOG": level, "PATH": ""})
    assert res.returncode == 0 and "status=OPTIMAL" in res.stdout
    assert ("DEBUG alpha_mst.bnc" in res.stderr) == expect
