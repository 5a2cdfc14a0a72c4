import csv
import io
import json
from pathlib import Path

import pytest

import oracles
from mpltransient import EPS, Matrix, identity, max_cycle_mean
from mpltransient.bench import (
    CSV_HEADER,
    BenchRecord,
    GenerationError,
    GenSpec,
    bench_instance,
    emit_csv,
    emit_json,
    gen_matrices,
    run_bench,
    summarize,
)
from mpltransient.graph import is_irreducible

GOLDEN = Path(__file__).parent / "data" / "bench_golden_n4_m3_seed2020.csv"


def record(idx, k0, c, tp=10, ts=20):
    return BenchRecord(idx, 4, 2, k0, c, tp, ts, 2, "found", "found")


def test_spec_validation():
    with pytest.raises(ValueError):
        GenSpec(3, 0, 1)
    with pytest.raises(ValueError):
        GenSpec(3, 4, 1)


def test_full_matrix_is_irreducible():
    (a,) = gen_matrices(GenSpec(2, 2, 1, seed=5))
    assert a.is_finite() and is_irreducible(a)


def test_generation_invariants_and_determinism():
    spec = GenSpec(5, 2, 30, seed=99)
    first = list(gen_matrices(spec))
    assert first == list(gen_matrices(spec))
    for a in first:
        assert is_irreducible(a)
        for row in a.entries():
            finite = [x for x in row if x != EPS]
            assert len(finite) == 2
            # p/q with 1 <= p <= 100, 1 <= q <= 5, possibly reduced
            assert all(1 <= x.numerator <= 100 and x.denominator <= 5 for x in finite)


def test_single_entry_rows_form_a_cycle():
    for a in gen_matrices(GenSpec(4, 1, 5, seed=1)):
        assert is_irreducible(a)
        cols = sorted(next(j for j, x in enumerate(row) if x != EPS) for row in a.entries())
        assert cols == [0, 1, 2, 3]


def test_generation_gives_up(monkeypatch):
    import mpltransient.bench as bench

    monkeypatch.setattr(bench, "is_irreducible", lambda a: False)
    with pytest.raises(GenerationError):
        list(gen_matrices(GenSpec(3, 1, 1)))


def test_empty_report():
    report = run_bench(GenSpec(3, 2, 0))
    assert report.records == []
    assert report.summary == {"instances": 0, "series": [], "crossover": None, "n_star": None}


def test_reducible_b9_fixture():
    b = Matrix([[2, 8, EPS], [10, 5, EPS], [3, EPS, 9]])
    r = bench_instance(0, b)
    assert (r.k0, r.c) == (2, 2)
    assert r.status_power == r.status_smt == "found"


def test_one_record_csv():
    text = emit_csv([record(0, 2, 2)])
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[0].split(",") == CSV_HEADER
    assert lines[1] == "0,4,2,2,2,4,10,20,2"


def test_duplicate_buckets_are_averaged():
    s = summarize([record(0, 2, 2, 10, 30), record(1, 3, 1, 20, 10), record(2, 5, 1)])
    assert s["series"][0] == {
        "k0_plus_c": 4,
        "count": 2,
        "mean_t_power_us": 15,
        "mean_t_smt_us": 20,
    }
    assert s["n_star"] == 6
    assert s["crossover"] is None


def test_crossover_is_first_bucket_where_smt_wins():
    s = summarize([record(0, 1, 1, 10, 20), record(1, 3, 1, 30, 20), record(2, 5, 1, 10, 40)])
    assert s["crossover"] == 4


def test_json_is_well_formed():
    report = run_bench(GenSpec(3, 2, 4, seed=3))
    data = json.loads(emit_json(report))
    assert data["summary"]["instances"] == 4
    assert len(data["records"]) == 4
    assert {"k0", "c", "k0_plus_c", "t_power_us", "t_smt_us"} <= set(data["records"][0])


def test_parallel_run_matches_serial():
    spec = GenSpec(4, 2, 6, seed=8)
    serial = run_bench(spec, jobs=1).records
    parallel = run_bench(spec, jobs=3).records
    key = lambda r: (r.id, r.k0, r.c, r.refinements)
    assert list(map(key, serial)) == list(map(key, parallel))


def test_golden_csv():
    report = run_bench(GenSpec(4, 3, 10, seed=2020))
    rows = list(csv.reader(io.StringIO(emit_csv(report.records))))
    keep = [i for i, h in enumerate(rows[0]) if not h.startswith("t_")]
    got = "".join(",".join(row[i] for i in keep) + "\n" for row in rows)
    assert got == GOLDEN.read_text()


def test_golden_values_against_bruteforce():
    mats = list(gen_matrices(GenSpec(4, 3, 10, seed=2020)))
    golden = list(csv.DictReader(io.StringIO(GOLDEN.read_text())))
    for a, row in zip(mats, golden):
        pair = oracles.transient_bruteforce(a, identity(4), max_cycle_mean(a), 40)
        assert pair == (int(row["k0"]), int(row["c"]))
