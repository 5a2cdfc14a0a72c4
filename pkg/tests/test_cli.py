import csv
import io
import json
import subprocess
import sys

import pytest

from mpltransient.cli import main
from mpltransient.maxplus import parse_matrices

A_TEXT = "2 2\n2 5\n3 3\n"
B8_TEXT = "3 3\n2 8 eps\n10 5 eps\n3 eps 8\n"
B9_TEXT = "3 3\n2 8 eps\n10 5 eps\n3 eps 9\n"


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {
        "a": A_TEXT,
        "b8": B8_TEXT,
        "b9": B9_TEXT,
        "cone": "3 1\n4\n2\n0\n",
        "region": "(x1 - x3 >= 3) & (x1 - x3 < 5) & (x2 - x3 < 5)\n",
        "empty": "x1 - x2 > 0 & x2 - x1 > 0\n",
    }.items():
        p = tmp_path / f"{name}.txt"
        p.write_text(text)
        paths[name] = str(p)
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_json(capsys, files):
    code, out, _ = run(capsys, "analyze", files["a"])
    assert code == 0
    assert json.loads(out) == {
        "lambda": "4",
        "eigenbasis": [["0", "1"], ["-1", "0"]],
        "cycleTime": ["4", "4"],
        "class": "boundedly periodic",
        "cyclicity": 2,
    }


def test_analyze_reducible(capsys, files):
    data = json.loads(run(capsys, "analyze", files["b8"])[1])
    assert data["class"] == "unboundedly periodic"
    assert data["cyclicity"] is None
    assert data["cycleTime"] == ["9", "9", "9"]


@pytest.mark.parametrize("method", ["power", "smt-cone", "smt-set"])
def test_transient_methods(capsys, files, method):
    code, out, _ = run(capsys, "transient", files["b9"], "--method", method)
    data = json.loads(out)
    assert code == 0
    assert (data["k0"], data["c"], data["status"]) == (2, 2, "found")
    assert set(data) == {"k0", "c", "status", "refinements", "millis"}
    assert (data["refinements"] == []) == (method == "power")


def test_transient_cone_and_region(capsys, files):
    data = json.loads(run(capsys, "transient", files["b8"], "--cone", files["cone"])[1])
    assert (data["k0"], data["c"]) == (3, 2)
    data = json.loads(
        run(capsys, "transient", files["b8"], "--method", "smt-set", "--region", files["region"])[1]
    )
    assert (data["k0"], data["c"]) == (3, 2)


def test_transient_bound(capsys, files):
    data = json.loads(run(capsys, "transient", files["b8"], "--bound", "30")[1])
    assert data["status"] == "bound exceeded" and data["k0"] is None


def test_transient_empty_region_is_an_error(capsys, files):
    code, _, err = run(capsys, "transient", files["a"], "--method", "smt-set", "--region", files["empty"])
    assert code == 1 and "empty" in err


def test_transient_csv(capsys, files):
    out = run(capsys, "transient", files["a"], "--format", "csv")[1]
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["k0"] == "2" and rows[0]["c"] == "2"


def test_synth(capsys, files):
    code, out, _ = run(capsys, "synth", files["b8"], "--p", "3", "--c", "2")
    assert code == 0
    assert "(x1 - x3 >= 3)" in out
    assert "(check-sat)" in out
    assert out.strip().endswith("non-empty")
    data = json.loads(run(capsys, "synth", files["a"], "--p", "5", "--format", "json")[1])
    assert data["empty"] is True


def test_synth_needs_cyclicity_for_reducible(capsys, files):
    code, _, err = run(capsys, "synth", files["b8"], "--p", "3")
    assert code == 1 and "cyclicity" in err


def test_gen_round_trips(capsys):
    out = run(capsys, "gen", "--n", "4", "--m", "2", "--count", "3", "--seed", "7")[1]
    mats = parse_matrices(out)
    assert len(mats) == 3 and all(m.shape == (4, 4) for m in mats)
    assert out == run(capsys, "gen", "--n", "4", "--m", "2", "--count", "3", "--seed", "7")[1]


def test_bench_outputs(capsys, tmp_path):
    out = run(capsys, "bench", "--n", "3", "--m", "2", "--count", "4", "--seed", "1")[1]
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4 and list(rows[0]) == [
        "id", "n", "m", "k0", "c", "k0_plus_c", "t_power_us", "t_smt_us", "refinements"
    ]
    target = tmp_path / "bench.json"
    run(capsys, "bench", "--n", "3", "--m", "2", "--count", "4", "--seed", "1",
        "--format", "json", "--out", str(target))
    assert json.loads(target.read_text())["summary"]["instances"] == 4


def test_external_solver_flag(capsys, files, z3_command):
    data = json.loads(
        run(capsys, "transient", files["a"], "--method", "smt-set", "--external-solver", z3_command)[1]
    )
    assert (data["k0"], data["c"]) == (2, 2)


def test_missing_file(capsys):
    code, _, err = run(capsys, "analyze", "/nonexistent/matrix.txt")
    assert code == 1 and err.startswith("error:")


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "mpltransient.cli", "analyze", "-", "--format", "pretty"],
        input=A_TEXT, capture_output=True, text=True, check=True,
    )
    assert "lambda: 4" in proc.stdout
