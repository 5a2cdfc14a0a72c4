"""Hypothesis strategies and seeded generators shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from mpltransient import EPS, Matrix
from mpltransient.dl import GE, GT, ZERO, And, Atom, Not, Or
from mpltransient.graph import is_irreducible

values = st.one_of(
    st.integers(-20, 20).map(Fraction),
    st.builds(Fraction, st.integers(-40, 40), st.integers(1, 4)),
)
maybe_eps = st.one_of(st.just(EPS), values)


@st.composite
def matrices(draw, rows=None, cols=None, min_size=1, max_size=4, eps=True):
    n = rows if rows is not None else draw(st.integers(min_size, max_size))
    m = cols if cols is not None else draw(st.integers(min_size, max_size))
    elem = maybe_eps if eps else values
    return Matrix([[draw(elem) for _ in range(m)] for _ in range(n)])


@st.composite
def irreducible_matrices(draw, min_size=1, max_size=5):
    n = draw(st.integers(min_size, max_size))
    rows = []
    for i in range(n):
        # a cyclic backbone i -> i+1 keeps the graph strongly connected
        row = [draw(st.one_of(st.just(EPS), values)) for _ in range(n)]
        row[(i - 1) % n] = draw(values)
        rows.append(row)
    a = Matrix(rows)
    assert is_irreducible(a)
    return a


@st.composite
def regular_matrices(draw, min_size=1, max_size=4):
    n = draw(st.integers(min_size, max_size))
    rows = []
    for _ in range(n):
        row = [draw(maybe_eps) for _ in range(n)]
        row[draw(st.integers(0, n - 1))] = draw(values)
        rows.append(row)
    return Matrix(rows)


def random_atom(rng: random.Random, nvars: int, allow_zero=True) -> Atom:
    lo = 0 if allow_zero else 1
    i = rng.randint(lo, nvars)
    j = rng.randint(lo, nvars)
    while j == i:
        j = rng.randint(lo, nvars)
    c = Fraction(rng.randint(-6, 6), rng.choice([1, 1, 1, 2, 3]))
    return Atom(i, j, rng.choice([GE, GT]), c)


def random_formula(rng: random.Random, nvars: int = 4, natoms: int = 6):
    """Random Boolean combination (with Not) over a pool of ``natoms`` atoms."""
    pool = [random_atom(rng, nvars) for _ in range(natoms)]

    def build(depth):
        if depth == 0 or rng.random() < 0.3:
            a = rng.choice(pool)
            return Not(a) if rng.random() < 0.3 else a
        kind = rng.choice([And, Or, Not])
        if kind is Not:
            return Not(build(depth - 1))
        return kind(tuple(build(depth - 1) for _ in range(rng.randint(2, 3))))

    return build(3)


def random_irreducible(rng: random.Random, n: int, m: int) -> Matrix:
    """Rejection-sampled irreducible matrix with m finite entries per row."""
    while True:
        rows = []
        for _ in range(n):
            row = [EPS] * n
            for j in rng.sample(range(n), m):
                row[j] = Fraction(rng.randint(1, 100), rng.randint(1, 5))
            rows.append(row)
        a = Matrix(rows)
        if is_irreducible(a):
            return a


__all__ = [
    "values",
    "maybe_eps",
    "matrices",
    "irreducible_matrices",
    "regular_matrices",
    "random_atom",
    "random_formula",
    "random_irreducible",
    "ZERO",
]
