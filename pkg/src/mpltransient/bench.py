"""Random instance generation and the power-vs-SMT benchmark harness."""

from __future__ import annotations

import csv
import io
import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterator

from .dl import TRUE
from .graph import is_irreducible
from .maxplus import EPS, Matrix, format_matrix, identity
from .transient import DEFAULT_BOUND, trans_cone, trans_smt

__all__ = [
    "GenSpec",
    "GenerationError",
    "MethodDisagreement",
    "BenchRecord",
    "BenchReport",
    "gen_matrices",
    "random_matrix",
    "run_bench",
    "bench_instance",
    "summarize",
    "emit_csv",
    "emit_json",
    "CSV_HEADER",
]

MAX_RETRIES = 1000

CSV_HEADER = ["id", "n", "m", "k0", "c", "k0_plus_c", "t_power_us", "t_smt_us", "refinements"]


class GenerationError(RuntimeError):
    """No irreducible matrix was drawn within the retry cap."""


class MethodDisagreement(AssertionError):
    """The two transient algorithms returned different answers."""


@dataclass(frozen=True)
class GenSpec:
    n: int
    m: int
    count: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 1 <= self.m <= self.n:
            raise ValueError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if self.count < 0:
            raise ValueError("count must be non-negative")


def random_matrix(n: int, m: int, rng: random.Random) -> Matrix:
    """One draw: m finite entries per row at random columns, values p/q."""
    rows = []
    for _ in range(n):
        row = [EPS] * n
        for j in rng.sample(range(n), m):
            row[j] = Fraction(rng.randint(1, 100), rng.randint(1, 5))
        rows.append(row)
    return Matrix(rows)


def gen_matrices(spec: GenSpec) -> Iterator[Matrix]:
    """Deterministic stream of irreducible matrices (rejection sampling)."""
    rng = random.Random(spec.seed)
    for k in range(spec.count):
        for _ in range(MAX_RETRIES):
            a = random_matrix(spec.n, spec.m, rng)
            if is_irreducible(a):
                yield a
                break
        else:
            raise GenerationError(
                f"instance {k}: no irreducible {spec.n}x{spec.n} matrix with m={spec.m} "
                f"after {MAX_RETRIES} draws"
            )


@dataclass
class BenchRecord:
    id: int
    n: int
    m: int
    k0: int | None
    c: int | None
    t_power_us: int
    t_smt_us: int
    refinements: int
    status_power: str
    status_smt: str

    @property
    def k0_plus_c(self) -> int | None:
        return None if self.k0 is None else self.k0 + self.c


@dataclass
class BenchReport:
    records: list[BenchRecord]
    summary: dict


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, round((time.perf_counter() - t0) * 1e6)


def _check_monotone(trace: list[tuple[int, int]]):
    sums = [k + c for k, c in trace]
    if any(b <= a for a, b in zip(sums, sums[1:])):
        raise MethodDisagreement(f"refinement trace is not strictly increasing: {trace}")


def bench_instance(
    idx: int, a: Matrix, bound: int = DEFAULT_BOUND, n: int | None = None, m: int | None = None
) -> BenchRecord:
    """Time both algorithms on one matrix and insist that they agree."""
    power, t_power = _timed(trans_cone, a, identity(a.rows), bound)
    smt, t_smt = _timed(trans_smt, a, TRUE, bound)
    if (power.status, power.pair) != (smt.status, smt.pair):
        raise MethodDisagreement(
            f"instance {idx}: power={power.status.value} {power.pair}, "
            f"smt={smt.status.value} {smt.pair}; refinements={smt.refinements}\n"
            + format_matrix(a)
        )
    _check_monotone(smt.refinements)
    if m is None:
        m = max(sum(1 for x in row if x != EPS) for row in a.entries())
    return BenchRecord(
        id=idx,
        n=a.rows if n is None else n,
        m=m,
        k0=power.k0,
        c=power.c,
        t_power_us=t_power,
        t_smt_us=t_smt,
        refinements=len(smt.refinements),
        status_power=power.status.value,
        status_smt=smt.status.value,
    )


def summarize(records: list[BenchRecord]) -> dict:
    """Per-bucket mean timings keyed by k0+c, cross-over point and N*."""
    buckets: dict[int, list[BenchRecord]] = {}
    for r in records:
        if r.k0_plus_c is not None:
            buckets.setdefault(r.k0_plus_c, []).append(r)
    series = []
    for key in sorted(buckets):
        group = buckets[key]
        series.append(
            {
                "k0_plus_c": key,
                "count": len(group),
                "mean_t_power_us": sum(r.t_power_us for r in group) / len(group),
                "mean_t_smt_us": sum(r.t_smt_us for r in group) / len(group),
            }
        )
    crossover = next(
        (s["k0_plus_c"] for s in series if s["mean_t_smt_us"] < s["mean_t_power_us"]), None
    )
    return {
        "instances": len(records),
        "series": series,
        "crossover": crossover,
        "n_star": max(buckets) if buckets else None,
    }


def run_bench(spec: GenSpec, bound: int = DEFAULT_BOUND, jobs: int = 1) -> BenchReport:
    """Benchmark every generated instance; raises on any method disagreement.

    The first instance is run once untimed as a warm-up.
    """
    mats = list(gen_matrices(spec))
    if not mats:
        return BenchReport([], summarize([]))
    bench_instance(-1, mats[0], bound, spec.n, spec.m)
    args = [(i, a, bound, spec.n, spec.m) for i, a in enumerate(mats)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda t: bench_instance(*t), args))
    else:
        records = [bench_instance(*t) for t in args]
    return BenchReport(records, summarize(records))


def emit_csv(records: list[BenchRecord], out: io.TextIOBase | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(
            [r.id, r.n, r.m, _cell(r.k0), _cell(r.c), _cell(r.k0_plus_c), r.t_power_us, r.t_smt_us, r.refinements]
        )
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def _cell(x):
    return "" if x is None else x


def emit_json(report: BenchReport, out: io.TextIOBase | None = None) -> str:
    payload = {
        "summary": report.summary,
        "records": [dict(asdict(r), k0_plus_c=r.k0_plus_c) for r in report.records],
    }
    text = json.dumps(payload, indent=2) + "\n"
    if out is not None:
        out.write(text)
    return text

