"""Command-line front end: ``mpl-transient {gen,analyze,transient,synth,bench}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from .bench import GenSpec, emit_csv, emit_json, gen_matrices, run_bench
from .dl import TRUE, parse_formula, pretty
from .graph import analyze
from .maxplus import format_matrix, format_value, identity, parse_matrix
from .smt import ExternalSolver, solve, to_smtlib
from .transient import DEFAULT_BOUND, Method, synth_sp, synth_spq, trans_cone, trans_cone_smt, trans_smt


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _grid(m):
    return [[format_value(x) for x in row] for row in m.entries()]


def _solver(args):
    if args.external_solver:
        return ExternalSolver(args.external_solver).solve
    return solve


def _emit(args, payload: dict, pretty_lines: list[str]):
    if args.format == "pretty":
        print("\n".join(pretty_lines))
    elif args.format == "csv":
        keys = list(payload)
        print(",".join(keys))
        print(",".join(_csv_cell(payload[k]) for k in keys))
    else:
        print(json.dumps(payload, indent=2))


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (list, dict)):
        return '"' + json.dumps(v).replace('"', '""') + '"'
    return str(v)


def cmd_gen(args):
    spec = GenSpec(args.n, args.m, args.count, args.seed)
    mats = list(gen_matrices(spec))
    if args.format == "json":
        print(json.dumps([_grid(a) for a in mats], indent=2))
    else:
        sys.stdout.write("\n".join(format_matrix(a) for a in mats))


def cmd_analyze(args):
    a = parse_matrix(_read(args.matrix))
    data = analyze(a, args.bound)
    payload = {
        "lambda": format_value(data.lam),
        "eigenbasis": None if data.eigenbasis is None else _grid(data.eigenbasis),
        "cycleTime": [format_value(x) for x in data.cycle_time],
        "class": None if data.klass is None else data.klass.value,
        "cyclicity": data.cyclicity,
    }
    basis = "none" if data.eigenbasis is None else format_matrix(data.eigenbasis).rstrip()
    lines = [
        f"lambda: {payload['lambda']}",
        f"eigenbasis:\n{basis}",
        f"cycle time: {' '.join(payload['cycleTime'])}",
        f"class: {payload['class'] or 'unknown (bound exceeded)'}",
        f"cyclicity: {payload['cyclicity'] if payload['cyclicity'] is not None else 'unknown'}",
    ]
    _emit(args, payload, lines)


def cmd_transient(args):
    a = parse_matrix(_read(args.matrix))
    method = Method(args.method)
    t0 = time.perf_counter()
    if method is Method.MATRIX_POWER:
        if args.region:
            raise SystemExit("--region needs --method smt-set")
        v = parse_matrix(_read(args.cone)) if args.cone else identity(a.rows)
        res = trans_cone(a, v, args.bound, not args.no_graph_cyclicity)
    elif method is Method.SMT_CONE:
        v = parse_matrix(_read(args.cone)) if args.cone else identity(a.rows)
        res = trans_cone_smt(a, v, args.bound, _solver(args))
    else:
        if args.cone:
            raise SystemExit("--cone is not used by --method smt-set")
        region = parse_formula(_read(args.region)) if args.region else TRUE
        res = trans_smt(a, region, args.bound, _solver(args))
    millis = (time.perf_counter() - t0) * 1000
    payload = {
        "k0": res.k0,
        "c": res.c,
        "status": res.status.value,
        "refinements": [list(p) for p in res.refinements],
        "millis": round(millis, 3),
    }
    lines = [
        f"status: {res.status.value}",
        f"k0: {res.k0}",
        f"c: {res.c}",
        f"refinements: {' '.join(f'({k},{c})' for k, c in res.refinements) or '-'}",
        f"millis: {millis:.3f}",
    ]
    _emit(args, payload, lines)


def cmd_synth(args):
    a = parse_matrix(_read(args.matrix))
    if args.q is None:
        f = synth_sp(a, args.p, args.c)
    else:
        if args.c is not None:
            raise SystemExit("--c is only meaningful without --q")
        f = synth_spq(a, args.p, args.q)
    empty = _solver(args)(f) is None
    text, script = pretty(f), to_smtlib(f, a.rows)
    payload = {"p": args.p, "q": args.q, "formula": text, "smtlib": script, "empty": empty}
    lines = [text, "", script.rstrip(), "", "empty" if empty else "non-empty"]
    _emit(args, payload, lines)


def cmd_bench(args):
    spec = GenSpec(args.n, args.m, args.count, args.seed)
    report = run_bench(spec, args.bound, args.jobs)
    out = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        if args.format == "json":
            emit_json(report, out)
        elif args.format == "csv":
            emit_csv(report.records, out)
        else:
            s = report.summary
            out.write(
                f"instances: {s['instances']}\ncross-over: {s['crossover']}\nN*: {s['n_star']}\n"
            )
            for row in s["series"]:
                out.write(
                    f"k0+c={row['k0_plus_c']:>4} count={row['count']:>3} "
                    f"power={row['mean_t_power_us']:.0f}us smt={row['mean_t_smt_us']:.0f}us\n"
                )
    finally:
        if out is not sys.stdout:
            out.close()


def _common(p: argparse.ArgumentParser, fmt: str):
    # Added per subparser: argparse parents share Action objects, so their
    # defaults would leak between subcommands.
    p.add_argument("--seed", type=int, default=0, help="RNG seed (gen, bench)")
    p.add_argument("--bound", type=int, default=DEFAULT_BOUND, help="iteration bound N")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for bench")
    p.add_argument("--external-solver", metavar="CMD", help="SMT-LIB2 solver command, e.g. 'z3 -in'")
    p.add_argument("--format", choices=["json", "csv", "pretty"], default=fmt)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpl-transient", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate random irreducible matrices")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    _common(g, "pretty")
    g.set_defaults(func=cmd_gen)

    a = sub.add_parser("analyze", help="eigenvalue, eigenspace, cycle time, class")
    a.add_argument("matrix", help="matrix file ('-' for stdin)")
    _common(a, "json")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("transient", help="transient and cyclicity")
    t.add_argument("matrix")
    t.add_argument("--method", choices=[m.value for m in Method], default=Method.MATRIX_POWER.value)
    t.add_argument("--cone", metavar="FILE", help="cone generator matrix (default: identity)")
    t.add_argument("--region", metavar="FILE", help="initial-region formula (default: true)")
    t.add_argument("--no-graph-cyclicity", action="store_true", help="do not bound the shift search")
    _common(t, "json")
    t.set_defaults(func=cmd_transient)

    s = sub.add_parser("synth", help="region of states with transient p")
    s.add_argument("matrix")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--q", type=int, help="also fix the local cyclicity")
    s.add_argument("--c", type=int, help="global cyclicity (needed for reducible matrices)")
    _common(s, "pretty")
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("bench", help="compare matrix power against SMT")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--count", type=int, default=100)
    b.add_argument("--out", metavar="FILE")
    _common(b, "csv")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
