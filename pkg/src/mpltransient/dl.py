"""Difference-logic formulas and the max-plus → DL encoding.

Variables are numbered from 1 (``x1``, ``x2``, ...); variable :data:`ZERO`
(index 0) is pinned to zero and turns ``x_i - x0 >= c`` into the unary bound
``x_i >= c``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .maxplus import EPS, DimensionError, Matrix, format_value, mp_value

__all__ = [
    "ZERO",
    "GE",
    "GT",
    "Atom",
    "Const",
    "Not",
    "And",
    "Or",
    "TRUE",
    "FALSE",
    "Formula",
    "conj",
    "disj",
    "negate",
    "nnf",
    "is_nnf",
    "iff",
    "implies",
    "atoms",
    "variables",
    "evaluate",
    "ReducedIneq",
    "reduce_inequality",
    "reduced_to_dl",
    "encode_inequality",
    "encode_vs_constant",
    "eq_func",
    "pretty",
    "parse_formula",
]

ZERO = 0
GE = ">="
GT = ">"


def _holds(lhs, rel: str, rhs) -> bool:
    return lhs >= rhs if rel == GE else lhs > rhs


@dataclass(frozen=True)
class Atom:
    """x_i - x_j rel c."""

    i: int
    j: int
    rel: str
    c: Fraction

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("atom compares a variable with itself")
        if self.rel not in (GE, GT):
            raise ValueError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "c", Fraction(self.c))

    def negate(self) -> Atom:
        # ¬(xi - xj >= c)  ≡  xj - xi > -c
        return Atom(self.j, self.i, GT if self.rel == GE else GE, -self.c)


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


Formula = Atom | Const | Not | And | Or

TRUE = Const(True)
FALSE = Const(False)


def _junction(cls, absorbing: Const, neutral: Const, args):
    out = []
    seen = set()
    stack = list(args)[::-1]
    while stack:
        f = stack.pop()
        if isinstance(f, cls):
            stack.extend(reversed(f.args))
            continue
        if f == absorbing:
            return absorbing
        if f == neutral or f in seen:
            continue
        seen.add(f)
        out.append(f)
    if not out:
        return neutral
    if len(out) == 1:
        return out[0]
    return cls(tuple(out))


def conj(*args: Formula) -> Formula:
    """Flattened conjunction with constant folding and duplicate removal."""
    return _junction(And, FALSE, TRUE, args)


def disj(*args: Formula) -> Formula:
    return _junction(Or, TRUE, FALSE, args)


def negate(f: Formula) -> Formula:
    """Negation pushed down to the atoms (result is NNF without Not)."""
    if isinstance(f, Atom):
        return f.negate()
    if isinstance(f, Const):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return nnf(f.arg)
    if isinstance(f, And):
        return disj(*(negate(g) for g in f.args))
    if isinstance(f, Or):
        return conj(*(negate(g) for g in f.args))
    raise TypeError(f"not a formula: {f!r}")


def nnf(f: Formula) -> Formula:
    if isinstance(f, (Atom, Const)):
        return f
    if isinstance(f, Not):
        return negate(f.arg)
    if isinstance(f, And):
        return conj(*(nnf(g) for g in f.args))
    if isinstance(f, Or):
        return disj(*(nnf(g) for g in f.args))
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f: Formula) -> bool:
    if isinstance(f, (Atom, Const)):
        return True
    if isinstance(f, Not):
        return isinstance(f.arg, Atom)
    return all(is_nnf(g) for g in f.args)


def implies(f: Formula, g: Formula) -> Formula:
    return disj(negate(f), g)


def iff(f: Formula, g: Formula) -> Formula:
    return conj(implies(f, g), implies(g, f))


def atoms(f: Formula) -> list[Atom]:
    """Atoms in first-occurrence order."""
    out: dict[Atom, None] = {}

    def walk(g):
        if isinstance(g, Atom):
            out.setdefault(g)
        elif isinstance(g, Not):
            walk(g.arg)
        elif isinstance(g, (And, Or)):
            for h in g.args:
                walk(h)

    walk(f)
    return list(out)


def variables(f: Formula) -> list[int]:
    """Non-ZERO variable indices, sorted."""
    return sorted({v for a in atoms(f) for v in (a.i, a.j)} - {ZERO})


def evaluate(f: Formula, point: Sequence) -> bool:
    """Truth value of ``f`` at ``point`` (``point[k-1]`` is the value of x_k)."""

    def val(k):
        return 0 if k == ZERO else point[k - 1]

    def ev(g):
        if isinstance(g, Atom):
            return _holds(val(g.i) - val(g.j), g.rel, g.c)
        if isinstance(g, Const):
            return g.value
        if isinstance(g, Not):
            return not ev(g.arg)
        if isinstance(g, And):
            return all(ev(h) for h in g.args)
        return any(ev(h) for h in g.args)

    return ev(f)


# -- max-plus inequalities ------------------------------------------------------


@dataclass(frozen=True)
class ReducedIneq:
    """max_{i∈S1}(x_i + a_i) rel max_{j∈S2}(x_j + b_j); indices are 1-based."""

    s1: tuple[int, ...]
    s2: tuple[int, ...]
    a: tuple
    b: tuple
    rel: str

    def __post_init__(self):
        assert not set(self.s1) & set(self.s2), "S1 and S2 overlap"


def reduce_inequality(a: Sequence, b: Sequence, rel: str = GE) -> ReducedIneq:
    """Drop the indices that cannot decide max(x+a) rel max(x+b)."""
    a = tuple(mp_value(v) for v in a)
    b = tuple(mp_value(v) for v in b)
    if len(a) != len(b):
        raise DimensionError("coefficient rows differ in length")
    if not a:
        raise ValueError("empty coefficient rows")
    s1 = tuple(k + 1 for k in range(len(a)) if a[k] != EPS and _holds(a[k], rel, b[k]))
    s2 = tuple(
        k + 1 for k in range(len(a)) if b[k] != EPS and not _holds(a[k], rel, b[k])
    )
    return ReducedIneq(s1, s2, a, b, rel)


def reduced_to_dl(r: ReducedIneq) -> Formula:
    """CNF ⋀_{j∈S2} ⋁_{i∈S1} (x_i - x_j rel b_j - a_i)."""
    if not r.s2:
        # right-hand side is ε
        return TRUE if (r.s1 or r.rel == GE) else FALSE
    if not r.s1:
        return FALSE
    return conj(
        *(
            disj(*(Atom(i, j, r.rel, r.b[j - 1] - r.a[i - 1]) for i in r.s1))
            for j in r.s2
        )
    )


def encode_inequality(a: Sequence, b: Sequence, rel: str = GE) -> Formula:
    """DL formula for max_i(x_i + a_i) rel max_j(x_j + b_j)."""
    return reduced_to_dl(reduce_inequality(a, b, rel))


def encode_vs_constant(coeffs: Sequence, const, side: str, rel: str = GE) -> Formula:
    """Compare max_i(x_i + a_i) with a constant.

    ``side="ge"`` encodes ``max_i(x_i + a_i) rel const`` as a disjunction,
    ``side="le"`` encodes ``const rel max_i(x_i + a_i)`` as a conjunction.
    """
    coeffs = [mp_value(v) for v in coeffs]
    const = mp_value(const)
    finite = [(k + 1, v) for k, v in enumerate(coeffs) if v != EPS]
    if side == "ge":
        if const == EPS:
            return TRUE if (finite or rel == GE) else FALSE
        return disj(*(Atom(k, ZERO, rel, const - v) for k, v in finite))
    if side == "le":
        if const == EPS:
            return TRUE if (not finite and rel == GE) else FALSE
        return conj(*(Atom(ZERO, k, rel, v - const) for k, v in finite))
    raise ValueError(f"side must be 'ge' or 'le', not {side!r}")


def eq_func(r: Matrix, s: Matrix) -> Formula:
    """DL formula over x_1..x_p stating R⊗x = S⊗x row by row."""
    if r.shape != s.shape:
        raise DimensionError(f"shape mismatch {r.shape} vs {s.shape}")
    rr, ss = r.entries(), s.entries()
    parts = []
    for rk, sk in zip(rr, ss):
        parts.append(encode_inequality(rk, sk, GE))
        parts.append(encode_inequality(sk, rk, GE))
    return conj(*parts)


# -- pretty printing and parsing ------------------------------------------------


def _fmt_const(c: Fraction) -> str:
    return format_value(c)


def _pretty_atom(a: Atom) -> str:
    if a.j == ZERO:
        return f"x{a.i} {a.rel} {_fmt_const(a.c)}"
    if a.i == ZERO:
        # 0 - xj rel c  ≡  xj rel' -c
        return f"x{a.j} {'<=' if a.rel == GE else '<'} {_fmt_const(-a.c)}"
    return f"x{a.i} - x{a.j} {a.rel} {_fmt_const(a.c)}"


def pretty(f: Formula) -> str:
    """Infix rendering accepted by :func:`parse_formula`."""

    def go(g, nested):
        if isinstance(g, Const):
            return "true" if g.value else "false"
        if isinstance(g, Atom):
            s = _pretty_atom(g)
            return f"({s})" if nested else s
        if isinstance(g, Not):
            return f"!{go(g.arg, True)}"
        op = " & " if isinstance(g, And) else " | "
        s = op.join(go(h, True) for h in g.args)
        return f"({s})" if nested else s

    return go(f, False)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+|\.\d+)?)|(?P<var>x\d+)|(?P<op>>=|<=|>|<|&&?|\|\|?|!|~|\(|\)|-)"
    r"|(?P<word>true|false|and|or|not))",
    re.IGNORECASE,
)


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected input at {text[pos:pos + 20]!r}")
        tok = m.group(m.lastgroup).lower()
        out.append({"and": "&", "&&": "&", "or": "|", "||": "|", "not": "!", "~": "!"}.get(tok, tok))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValueError(f"expected {expected or 'token'}, found {tok!r}")
        self.pos += 1
        return tok

    def formula(self):
        parts = [self.conjunction()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self):
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok in ("true", "false"):
            self.take()
            return Const(tok == "true")
        return self.atom()

    def var(self):
        tok = self.take()
        if not tok.startswith("x"):
            raise ValueError(f"expected a variable, found {tok!r}")
        k = int(tok[1:])
        if k < 1:
            raise ValueError("variables are numbered from x1")
        return k

    def number(self):
        sign = 1
        if self.peek() == "-":
            self.take()
            sign = -1
        tok = self.take()
        try:
            return sign * Fraction(tok)
        except ValueError:
            raise ValueError(f"expected a number, found {tok!r}") from None

    def atom(self):
        i = self.var()
        j = ZERO
        if self.peek() == "-":
            self.take()
            j = self.var()
        rel = self.take()
        c = self.number()
        if rel in (GE, GT):
            return Atom(i, j, rel, c)
        if rel in ("<=", "<"):
            # xi - xj <= c  ≡  xj - xi >= -c
            return Atom(j, i, GE if rel == "<=" else GT, -c)
        raise ValueError(f"unknown relation {rel!r}")


def parse_formula(text: str) -> Formula:
    """Parse the infix grammar produced by :func:`pretty`.

    Atoms are ``x<i> - x<j> REL c`` or ``x<i> REL c`` with REL one of
    ``>=, >, <=, <``; connectives are ``&``, ``|``, ``!`` (or ``and``,
    ``or``, ``not``) and parentheses.
    """
    p = _Parser(_tokenize(text))
    f = p.formula()
    if p.peek() is not None:
        raise ValueError(f"trailing input starting at {p.peek()!r}")
    return f
