from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from mpltransient.maxplus import (
    EPS,
    DimensionError,
    Matrix,
    cone_apply,
    format_matrix,
    identity,
    mat_oplus,
    mat_otimes,
    mp_add,
    mp_mul,
    mp_value,
    parse_matrices,
    parse_matrix,
    scalar_otimes,
    vector,
)
from strategies import matrices, maybe_eps

A = Matrix([[2, 5], [3, 3]])


def b_matrix(a):
    return Matrix([[2, 8, EPS], [10, 5, EPS], [3, EPS, a]])


# -- scalars ---------------------------------------------------------------------


def test_scalar_ops():
    assert mp_add(3, EPS) == 3
    assert mp_mul(3, EPS) == EPS
    assert mp_mul(Fraction(1, 2), Fraction(1, 3)) == Fraction(5, 6)
    assert mp_add(EPS, EPS) == EPS


def test_finite_float_rejected():
    with pytest.raises(TypeError):
        mp_value(0.5)
    assert mp_value(float("-inf")) == EPS
    assert mp_value("7/2") == Fraction(7, 2)


@given(maybe_eps, maybe_eps, maybe_eps)
def test_semiring_laws(a, b, c):
    assert mp_add(a, b) == mp_add(b, a)
    assert mp_mul(a, b) == mp_mul(b, a)
    assert mp_add(mp_add(a, b), c) == mp_add(a, mp_add(b, c))
    assert mp_mul(mp_mul(a, b), c) == mp_mul(a, mp_mul(b, c))
    assert mp_mul(a, mp_add(b, c)) == mp_add(mp_mul(a, b), mp_mul(a, c))
    assert mp_add(a, a) == mp_value(a)
    assert mp_add(a, EPS) == mp_value(a)
    assert mp_mul(a, 0) == mp_value(a)
    assert mp_mul(a, EPS) == EPS


# -- matrices --------------------------------------------------------------------


def test_example_products():
    assert mat_otimes(A, vector([0, 0])) == vector([5, 3])
    b8 = b_matrix(8)
    assert b8.power(2) == Matrix([[18, 13, EPS], [15, 18, EPS], [11, 11, 16]])
    assert b8.power(3) == Matrix([[23, 26, EPS], [28, 23, EPS], [21, 19, 24]])


def test_identity_and_zero_power():
    assert A.power(0) == identity(2)
    assert mat_otimes(identity(2), A) == A == mat_otimes(A, identity(2))


def test_dimension_errors():
    with pytest.raises(DimensionError):
        mat_otimes(A, Matrix([[1, 2, 3]]))
    with pytest.raises(DimensionError):
        Matrix([[1, 2], [3]])
    with pytest.raises(DimensionError):
        Matrix([])
    with pytest.raises(DimensionError):
        Matrix([[1, 2]]).power(2)
    with pytest.raises(DimensionError):
        mat_oplus(A, identity(3))


def test_canonical_representation():
    x = Matrix([[Fraction(1, 2), Fraction(3, 2)]])
    y = Matrix([["1/2", "3/2"]])
    assert x == y and hash(x) == hash(y)
    z = scalar_otimes(Fraction(1, 2), x)
    assert z == Matrix([[1, 2]])
    assert z.denominator == 1


def test_scalar_eps():
    assert scalar_otimes(EPS, A) == Matrix([[EPS, EPS], [EPS, EPS]])


def test_cone_apply():
    v = Matrix([[0, 1], [-1, 0]])
    assert cone_apply(v, [0, 0]) == vector([1, 0])
    with pytest.raises(ValueError):
        cone_apply(v, [0, EPS])
    with pytest.raises(ValueError):
        cone_apply(Matrix([[0, EPS], [EPS, EPS]]), [0, 0])


def test_text_round_trip():
    text = format_matrix(b_matrix(Fraction(17, 2)))
    assert text.splitlines()[0] == "3 3"
    assert "eps" in text and "17/2" in text
    assert parse_matrix(text) == b_matrix(Fraction(17, 2))
    two = parse_matrices("# comment\n" + text + "\n" + format_matrix(A))
    assert two == [b_matrix(Fraction(17, 2)), A]
    with pytest.raises(ValueError):
        parse_matrix("2 2\n1 2\n")


@given(matrices(), st.data())
def test_product_matches_naive(a, data):
    b = data.draw(matrices(rows=a.cols))
    assert oracles.grid(mat_otimes(a, b)) == oracles.mul(oracles.grid(a), oracles.grid(b))


@given(matrices(rows=3, cols=3), matrices(rows=3, cols=3), matrices(rows=3, cols=3))
def test_matrix_semiring(a, b, c):
    assert mat_otimes(mat_otimes(a, b), c) == mat_otimes(a, mat_otimes(b, c))
    assert mat_otimes(a, mat_oplus(b, c)) == mat_oplus(mat_otimes(a, b), mat_otimes(a, c))
    assert mat_oplus(a, b) == mat_oplus(b, a)


@given(matrices(rows=3, cols=3), st.integers(0, 6), st.integers(0, 6))
def test_power_additivity(a, s, t):
    assert a.power(s + t) == mat_otimes(a.power(s), a.power(t))


@given(matrices(rows=2, cols=2), st.one_of(st.integers(-5, 5), st.just(EPS)))
def test_scalar_commutes(a, alpha):
    b = Matrix([[1, EPS], [0, 2]])
    assert mat_otimes(scalar_otimes(alpha, a), b) == scalar_otimes(alpha, mat_otimes(a, b))


def test_power_ladder_threadsafe():
    from concurrent.futures import ThreadPoolExecutor

    b = b_matrix(9)
    with ThreadPoolExecutor(4) as pool:
        got = list(pool.map(b.power, [30, 10, 25, 5, 30, 1]))
    ref = oracles.powers(b, 30)
    for t, m in zip([30, 10, 25, 5, 30, 1], got):
        assert oracles.grid(m) == ref[t]
