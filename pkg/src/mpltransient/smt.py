"""Satisfiability of difference-logic formulas with exact rational models.

The engine is a small DPLL(T): a CDCL SAT core over a Boolean abstraction of
the atoms, and a theory check that looks for negative cycles in the
constraint graph of the asserted atoms.

Constraint graph convention: ``x_v - x_u <= w`` is the edge ``u -> v`` with
weight ``w``.  Weights are pairs ``(c, d)`` meaning ``c + d·δ`` for an
infinitesimal ``δ > 0`` and compare lexicographically, so a strict bound
``x_v - x_u < c`` becomes ``(c, -1)``.
"""

from __future__ import annotations

import logging
import shlex
import subprocess
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .dl import (
    GE,
    GT,
    ZERO,
    And,
    Atom,
    Const,
    Formula,
    Not,
    Or,
    evaluate,
    is_nnf,
    negate,
    nnf,
    variables,
)
from .maxplus import Matrix, vector

__all__ = [
    "Model",
    "SolverError",
    "solve",
    "check_valid",
    "extract_vector",
    "to_smtlib",
    "ExternalSolver",
    "theory_check",
]

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Model:
    """Satisfying assignment; variables absent from ``values`` are 0."""

    values: Mapping[int, Fraction]

    def __getitem__(self, var: int) -> Fraction:
        if var == ZERO:
            return Fraction(0)
        return self.values.get(var, Fraction(0))

    def point(self, n: int) -> tuple[Fraction, ...]:
        return tuple(self[k] for k in range(1, n + 1))

    def satisfies(self, f: Formula) -> bool:
        n = max([0, *variables(f)])
        return evaluate(f, self.point(n))


# -- theory -------------------------------------------------------------------


def _edge(atom: Atom):
    """Constraint-graph edge (u, v, (c, d)) for an asserted atom."""
    # xi - xj >= c   ≡  xj - xi <= -c        : edge i -> j, weight -c
    # xi - xj >  c   ≡  xj - xi <= -c - δ    : edge i -> j, weight (-c, -1)
    return atom.i, atom.j, (-atom.c, -1 if atom.rel == GT else 0)


def _add(w1, w2):
    return w1[0] + w2[0], w1[1] + w2[1]


def theory_check(asserted: Sequence[Atom]):
    """Bellman-Ford over the asserted atoms.

    Returns ``(True, values)`` with a consistent rational assignment, or
    ``(False, cycle)`` where ``cycle`` lists the atoms of a negative cycle.
    """
    nodes = sorted({v for a in asserted for v in (a.i, a.j)} | {ZERO})
    edges = [(*_edge(a), a) for a in asserted]
    dist = {v: (Fraction(0), 0) for v in nodes}
    pred: dict[int, tuple] = {}
    changed_node = None
    for _ in range(len(nodes)):
        changed_node = None
        for u, v, w, a in edges:
            cand = _add(dist[u], w)
            if cand < dist[v]:
                dist[v] = cand
                pred[v] = (u, a)
                changed_node = v
        if changed_node is None:
            break
    if changed_node is not None:
        # walk back n steps to land on the cycle, then collect it
        v = changed_node
        for _ in range(len(nodes)):
            v = pred[v][0]
        cycle, u = [], v
        while True:
            u, a = pred[u]
            cycle.append(a)
            if u == v:
                break
        return False, cycle
    return True, _instantiate(dist, edges)


def _instantiate(dist, edges) -> dict[int, Fraction]:
    """Pick a concrete δ > 0 (half the tightest slack) and anchor x0 at 0."""
    delta = Fraction(1)
    for u, v, w, _ in edges:
        slack_c = w[0] - (dist[v][0] - dist[u][0])
        slack_d = w[1] - (dist[v][1] - dist[u][1])
        if slack_c > 0 and slack_d < 0:
            delta = min(delta, slack_c / (-slack_d) / 2)
    base = dist[ZERO][0] + delta * dist[ZERO][1]
    return {v: c + delta * d - base for v, (c, d) in dist.items() if v != ZERO}


# -- Boolean core ---------------------------------------------------------------


class _Cdcl:
    """CDCL over clauses of DIMACS-style literals, with a theory callback.

    Decisions follow the variable order, positive phase first; no restarts.
    """

    def __init__(self, nvars: int, atom_var: dict[Atom, int]):
        self.nvars = nvars
        self.atom_var = atom_var
        self.theory_atoms = {v: a for a, v in atom_var.items()}
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.value = [None] * (nvars + 1)
        self.level = [0] * (nvars + 1)
        self.reason: list[int | None] = [None] * (nvars + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.units: list[int] = []
        self.empty = False
        self.theory_seen = 0

    def lit_value(self, lit):
        v = self.value[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    def add_clause(self, lits):
        lits = list(dict.fromkeys(lits))
        if any(-l in lits for l in lits):
            return
        if not lits:
            self.empty = True
        elif len(lits) == 1:
            self.units.append(lits[0])
        else:
            self._attach(lits)

    def _attach(self, lits) -> int:
        idx = len(self.clauses)
        self.clauses.append(lits)
        self.watches.setdefault(lits[0], []).append(idx)
        self.watches.setdefault(lits[1], []).append(idx)
        return idx

    def decision_level(self):
        return len(self.trail_lim)

    def enqueue(self, lit, reason):
        var = abs(lit)
        self.value[var] = lit > 0
        self.level[var] = self.decision_level()
        self.reason[var] = reason
        self.trail.append(lit)

    def propagate(self):
        """Unit propagation; returns a conflicting clause index or None."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            watching = self.watches.get(false_lit, [])
            keep = []
            conflict = None
            i = 0
            while i < len(watching):
                ci = watching[i]
                i += 1
                c = self.clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if self.lit_value(c[0]) is True:
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    if self.lit_value(c[k]) is not False:
                        c[1], c[k] = c[k], c[1]
                        self.watches.setdefault(c[1], []).append(ci)
                        break
                else:
                    keep.append(ci)
                    if self.lit_value(c[0]) is False:
                        conflict = ci
                        keep.extend(watching[i:])
                        break
                    self.enqueue(c[0], ci)
            self.watches[false_lit] = keep
            if conflict is not None:
                return conflict
        return None

    def backtrack(self, lvl):
        if self.decision_level() <= lvl:
            return
        start = self.trail_lim[lvl]
        for lit in self.trail[start:]:
            var = abs(lit)
            self.value[var] = None
            self.reason[var] = None
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = min(self.qhead, start)
        self.theory_seen = min(self.theory_seen, start)

    def analyze(self, clause):
        """1-UIP learning; ``clause`` is fully false with a current-level literal."""
        seen = set()
        learnt = []
        counter = 0
        cur = self.decision_level()
        lits = clause
        idx = len(self.trail) - 1
        pivot = None
        while True:
            for lit in lits:
                if pivot is not None and lit == pivot:
                    continue
                var = abs(lit)
                if var in seen or self.level[var] == 0:
                    continue
                seen.add(var)
                if self.level[var] == cur:
                    counter += 1
                else:
                    learnt.append(lit)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            pivot = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            lits = self.clauses[self.reason[abs(pivot)]]
        learnt.insert(0, -pivot)
        back = max((self.level[abs(l)] for l in learnt[1:]), default=0)
        return learnt, back

    def theory_conflict(self):
        """Check newly asserted atoms; returns a falsified clause or None."""
        if self.theory_seen == len(self.trail):
            return None
        new = [l for l in self.trail[self.theory_seen :] if abs(l) in self.theory_atoms]
        self.theory_seen = len(self.trail)
        if not new:
            return None
        ok, cycle = theory_check(self.asserted())
        if ok:
            return None
        lits = []
        for a in cycle:
            var = self.atom_var[a] if a in self.atom_var else self.atom_var[a.negate()]
            lits.append(-var if a in self.atom_var else var)
        return list(dict.fromkeys(lits))

    def asserted(self):
        out = []
        for lit in self.trail:
            a = self.theory_atoms.get(abs(lit))
            if a is not None:
                out.append(a if lit > 0 else a.negate())
        return out

    def handle_conflict(self, clause) -> bool:
        """Learn from a falsified clause; False means unsatisfiable."""
        top = max(self.level[abs(l)] for l in clause)
        if top == 0:
            return False
        self.backtrack(top)
        learnt, back = self.analyze(clause)
        self.backtrack(back)
        if len(learnt) == 1:
            self.enqueue(learnt[0], None)
        else:
            # keep the highest-level false literal in the second watch slot
            k = max(range(1, len(learnt)), key=lambda t: self.level[abs(learnt[t])])
            learnt[1], learnt[k] = learnt[k], learnt[1]
            ci = self._attach(learnt)
            self.enqueue(learnt[0], ci)
        return True

    def solve(self) -> bool:
        if self.empty:
            return False
        for lit in self.units:
            val = self.lit_value(lit)
            if val is False:
                return False
            if val is None:
                self.enqueue(lit, None)
        while True:
            confl = self.propagate()
            if confl is not None:
                if not self.handle_conflict(list(self.clauses[confl])):
                    return False
                continue
            tconf = self.theory_conflict()
            if tconf is not None:
                if not self.handle_conflict(tconf):
                    return False
                continue
            var = next((v for v in range(1, self.nvars + 1) if self.value[v] is None), None)
            if var is None:
                return True
            self.trail_lim.append(len(self.trail))
            self.enqueue(var, None)


def _canonical(atom: Atom):
    """(key atom, polarity): every atom or its negation is a '>=' atom."""
    if atom.rel == GE:
        return atom, True
    return atom.negate(), False


def _encode(f: Formula):
    """Polarity-aware Tseitin encoding of an NNF formula."""
    atom_var: dict[Atom, int] = {}
    clauses: list[list[int]] = []
    counter = [0]

    def fresh():
        counter[0] += 1
        return counter[0]

    def atom_lit(a: Atom) -> int:
        key, pos = _canonical(a)
        if key not in atom_var:
            atom_var[key] = fresh()
        v = atom_var[key]
        return v if pos else -v

    def lit(g) -> int:
        if isinstance(g, Atom):
            return atom_lit(g)
        if isinstance(g, Not):
            return -atom_lit(g.arg)
        t = fresh()
        if isinstance(g, Const):
            clauses.append([t] if g.value else [-t])
        elif isinstance(g, Or):
            clauses.append([-t, *(lit(h) for h in g.args)])
        else:
            for h in g.args:
                clauses.append([-t, lit(h)])
        return t

    root = lit(f)
    clauses.append([root])
    return counter[0], clauses, atom_var


def solve(f: Formula) -> Model | None:
    """A model of ``f``, or None when ``f`` is unsatisfiable.

    Formulas outside negation normal form are normalized first.  Every
    returned model is re-checked against ``f``.
    """
    g = f if is_nnf(f) else nnf(f)
    if isinstance(g, Const):
        return Model({}) if g.value else None
    nvars, clauses, atom_var = _encode(g)
    core = _Cdcl(nvars, atom_var)
    for c in clauses:
        core.add_clause(c)
    if not core.solve():
        return None
    ok, values = theory_check(core.asserted())
    assert ok, "final assignment is theory-inconsistent"
    model = Model(values)
    if not model.satisfies(f):
        raise SolverError("internal error: model does not satisfy the formula")
    return model


def check_valid(f: Formula) -> Model | None:
    """None when ``f`` is valid, otherwise a countermodel falsifying ``f``."""
    return solve(negate(f))


def extract_vector(model: Model, vars: Sequence[int]) -> Matrix:
    """Finite column vector ``[model(x_v) for v in vars]`` (ZERO reads as 0)."""
    return vector([model[v] for v in vars])


# -- SMT-LIB2 -------------------------------------------------------------------


def _smt_num(c: Fraction) -> str:
    c = Fraction(c)
    mag = abs(c)
    s = str(mag.numerator) if mag.denominator == 1 else f"(/ {mag.numerator} {mag.denominator})"
    return f"(- {s})" if c < 0 else s


def _smt(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f"({f.rel} (- x{f.i} x{f.j}) {_smt_num(f.c)})"
    if isinstance(f, Not):
        return f"(not {_smt(f.arg)})"
    op = "and" if isinstance(f, And) else "or"
    return f"({op} {' '.join(_smt(g) for g in f.args)})"


def to_smtlib(f: Formula, nvars: int | None = None) -> str:
    """Deterministic SMT-LIB2 script: declarations, one assert, check-sat, get-model.

    ``x0`` is the ZERO variable; the theory is shift-invariant so it needs no
    pinning.  QF_RDL is declared when all constants are integers.
    """
    from .dl import atoms as _atoms

    used = set(variables(f))
    if nvars is not None:
        used |= set(range(1, nvars + 1))
    ats = _atoms(f)
    if any(ZERO in (a.i, a.j) for a in ats) or not used:
        used.add(ZERO)
    logic = "QF_RDL" if all(a.c.denominator == 1 for a in ats) else "QF_LRA"
    lines = ["(set-option :produce-models true)", f"(set-logic {logic})"]
    lines += [f"(declare-fun x{v} () Real)" for v in sorted(used)]
    lines.append(f"(assert {_smt(f)})")
    lines += ["(check-sat)", "(get-model)", ""]
    return "\n".join(lines)


def _sexprs(text: str):
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    stack = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    return stack[0]


def _smt_value(e) -> Fraction:
    if isinstance(e, str):
        return Fraction(e)
    head, *args = e
    if head == "-" and len(args) == 1:
        return -_smt_value(args[0])
    if head == "-":
        return _smt_value(args[0]) - _smt_value(args[1])
    if head == "/":
        return _smt_value(args[0]) / _smt_value(args[1])
    raise SolverError(f"cannot read model value {e!r}")


class ExternalSolver:
    """Pipe SMT-LIB2 scripts to an external solver command (e.g. ``z3 -in``)."""

    def __init__(self, command: str | Sequence[str], timeout: float = 60):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout

    def solve(self, f: Formula) -> Model | None:
        script = to_smtlib(f)
        proc = subprocess.run(
            self.command,
            input=script,
            capture_output=True,
            text=True,
            timeout=self.timeout,
        )
        out = proc.stdout.strip()
        verdict, _, rest = out.partition("\n")
        verdict = verdict.strip()
        if verdict == "unsat":
            return None
        if verdict != "sat":
            raise SolverError(f"external solver said {out!r} {proc.stderr.strip()!r}")
        values = {}
        for e in _sexprs(rest):
            defs = e if e and e[0] != "model" else e[1:]
            for d in defs:
                if isinstance(d, list) and d and d[0] == "define-fun":
                    name = d[1]
                    if name.startswith("x") and name[1:].isdigit():
                        values[int(name[1:])] = _smt_value(d[4])
        base = values.pop(ZERO, Fraction(0))
        model = Model({v: x - base for v, x in values.items()})
        if not model.satisfies(f):
            raise SolverError("external model does not satisfy the formula")
        return model
