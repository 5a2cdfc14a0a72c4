"""Exact max-plus arithmetic.

Scalars are either a :class:`fractions.Fraction` or :data:`EPS` (the semiring
zero, ``-inf``).  Matrices store their finite entries as integers over a
single common denominator so that products and comparisons stay exact while
running on plain ``int`` arithmetic.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "EPS",
    "DimensionError",
    "Matrix",
    "is_eps",
    "mp_value",
    "mp_add",
    "mp_mul",
    "mat_otimes",
    "mat_oplus",
    "scalar_otimes",
    "mat_power",
    "cone_apply",
    "identity",
    "vector",
    "parse_value",
    "format_value",
    "parse_matrix",
    "parse_matrices",
    "format_matrix",
]

EPS = float("-inf")


class DimensionError(ValueError):
    """Raised when matrix shapes do not fit the requested operation."""


def is_eps(x) -> bool:
    return x == EPS


def mp_value(x):
    """Coerce ``x`` to a max-plus scalar (``Fraction`` or ``EPS``).

    Finite floats are rejected: every finite value must be exact.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_value(x)
    if isinstance(x, float):
        if x == EPS:
            return EPS
        raise TypeError(f"finite float {x!r} is not exact; use Fraction or str")
    if x is None:
        return EPS
    raise TypeError(f"cannot interpret {x!r} as a max-plus value")


def mp_add(a, b):
    """a ⊕ b = max(a, b), with EPS below every finite value."""
    return max(mp_value(a), mp_value(b))


def mp_mul(a, b):
    """a ⊗ b = a + b, with EPS absorbing."""
    a, b = mp_value(a), mp_value(b)
    if a == EPS or b == EPS:
        return EPS
    return a + b


def parse_value(token: str):
    token = token.strip()
    if token.lower() in ("eps", "ε", "-inf"):
        return EPS
    return Fraction(token)


def format_value(x) -> str:
    if x == EPS:
        return "eps"
    return str(Fraction(x))


def _lcm_den(values) -> int:
    den = 1
    for v in values:
        if v != EPS:
            den = math.lcm(den, Fraction(v).denominator)
    return den


class Matrix:
    """Immutable dense max-plus matrix.

    ``_num[i][j]`` is either ``EPS`` or an ``int`` equal to ``A(i, j) * _den``.
    ``_den`` is kept minimal, so equal matrices have equal internal state.
    """

    __slots__ = ("rows", "cols", "_num", "_den", "_ladder", "_lock")

    def __init__(self, entries: Iterable[Iterable]):
        grid = [[mp_value(x) for x in row] for row in entries]
        if not grid or not grid[0]:
            raise DimensionError("empty matrices are not allowed")
        width = len(grid[0])
        if any(len(row) != width for row in grid):
            raise DimensionError("ragged rows")
        den = _lcm_den(x for row in grid for x in row)
        num = tuple(
            tuple(EPS if x == EPS else int(x * den) for x in row) for row in grid
        )
        self._init(num, den)

    def _init(self, num, den):
        self.rows = len(num)
        self.cols = len(num[0])
        g = den
        for row in num:
            for x in row:
                if x != EPS:
                    g = math.gcd(g, x)
                    if g == 1:
                        break
            if g == 1:
                break
        if g > 1:
            num = tuple(tuple(x if x == EPS else x // g for x in row) for row in num)
            den //= g
        self._num = num
        self._den = den
        self._ladder = None
        self._lock = threading.Lock()

    @classmethod
    def _from_scaled(cls, num, den) -> Matrix:
        m = cls.__new__(cls)
        m._init(tuple(tuple(r) for r in num), den)
        return m

    # -- access ---------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, key):
        i, j = key
        x = self._num[i][j]
        return EPS if x == EPS else Fraction(x, self._den)

    def entries(self) -> tuple[tuple, ...]:
        d = self._den
        return tuple(
            tuple(EPS if x == EPS else Fraction(x, d) for x in row) for row in self._num
        )

    def row(self, i: int) -> tuple:
        return self.entries()[i]

    def column(self, j: int) -> Matrix:
        return Matrix._from_scaled([(row[j],) for row in self._num], self._den)

    def column_values(self, j: int) -> tuple:
        return tuple(self[i, j] for i in range(self.rows))

    def scaled(self, den: int):
        """Integer grid of this matrix over a multiple ``den`` of its denominator."""
        if den % self._den:
            raise ValueError(f"{den} is not a multiple of {self._den}")
        f = den // self._den
        if f == 1:
            return self._num
        return tuple(tuple(x if x == EPS else x * f for x in row) for row in self._num)

    @property
    def denominator(self) -> int:
        return self._den

    # -- predicates -----------------------------------------------------------

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_regular(self) -> bool:
        """Every row holds at least one finite entry."""
        return all(any(x != EPS for x in row) for row in self._num)

    def is_finite(self) -> bool:
        return all(x != EPS for row in self._num for x in row)

    # -- algebra --------------------------------------------------------------

    def __matmul__(self, other: Matrix) -> Matrix:
        return mat_otimes(self, other)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self._den == other._den and self._num == other._num

    def __hash__(self):
        return hash((self._num, self._den))

    def __repr__(self):
        body = "; ".join(" ".join(format_value(x) for x in row) for row in self.entries())
        return f"Matrix[{body}]"

    def power(self, t: int) -> Matrix:
        """A^{⊗t} from a memoized ladder of consecutive powers."""
        if not self.is_square():
            raise DimensionError(f"power of a non-square {self.rows}x{self.cols} matrix")
        if t < 0:
            raise ValueError("negative exponent")
        with self._lock:
            if self._ladder is None:
                self._ladder = [identity(self.rows), self]
            ladder = self._ladder
            while len(ladder) <= t:
                ladder.append(mat_otimes(ladder[-1], self))
            return ladder[t]


def _common(a: Matrix, b: Matrix):
    den = math.lcm(a._den, b._den)
    return a.scaled(den), b.scaled(den), den


def otimes_grid(a, b):
    """(max,+) product of two integer grids (EPS-aware, no rescaling)."""
    cols = list(zip(*b))
    out = []
    for row in a:
        fin = [(k, x) for k, x in enumerate(row) if x != EPS]
        if not fin:
            out.append(tuple(EPS for _ in cols))
            continue
        out.append(tuple(max(x + col[k] for k, x in fin) for col in cols))
    return tuple(out)


def mat_otimes(a: Matrix, c: Matrix) -> Matrix:
    """[A⊗C](i,j) = max_k A(i,k) + C(k,j)."""
    if a.cols != c.rows:
        raise DimensionError(f"cannot multiply {a.rows}x{a.cols} by {c.rows}x{c.cols}")
    x, y, den = _common(a, c)
    return Matrix._from_scaled(otimes_grid(x, y), den)


def mat_oplus(a: Matrix, b: Matrix) -> Matrix:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    x, y, den = _common(a, b)
    return Matrix._from_scaled(
        [[max(p, q) for p, q in zip(r, s)] for r, s in zip(x, y)], den
    )


def scalar_otimes(alpha, a: Matrix) -> Matrix:
    """α ⊗ A: add α to every entry (EPS stays EPS; α = EPS gives all-EPS)."""
    alpha = mp_value(alpha)
    if alpha == EPS:
        return Matrix._from_scaled([[EPS] * a.cols for _ in range(a.rows)], 1)
    den = math.lcm(a._den, alpha.denominator)
    shift = int(alpha * den)
    return Matrix._from_scaled(
        [[x if x == EPS else x + shift for x in row] for row in a.scaled(den)], den
    )


def mat_power(a: Matrix, t: int) -> Matrix:
    return a.power(t)


def identity(n: int) -> Matrix:
    if n < 1:
        raise DimensionError("identity of size < 1")
    return Matrix._from_scaled(
        [[0 if i == j else EPS for j in range(n)] for i in range(n)], 1
    )


def vector(values: Sequence) -> Matrix:
    """Column vector from a sequence of scalars."""
    return Matrix([[v] for v in values])


def cone_apply(v: Matrix, w: Matrix | Sequence) -> Matrix:
    """The member V⊗w of cone(V) for a finite coefficient vector w."""
    if not isinstance(w, Matrix):
        w = vector(w)
    if w.cols != 1:
        raise DimensionError("coefficient vector must have one column")
    if not w.is_finite():
        raise ValueError("cone coefficients must be finite")
    if not v.is_regular():
        raise ValueError("cone generator matrix must be regular")
    return mat_otimes(v, w)


# -- text format ----------------------------------------------------------------


def format_matrix(a: Matrix) -> str:
    lines = [f"{a.rows} {a.cols}"]
    lines += [" ".join(format_value(x) for x in row) for row in a.entries()]
    return "\n".join(lines) + "\n"


def parse_matrices(text: str) -> list[Matrix]:
    """Parse one or more matrices in the ``n m`` + rows format."""
    tokens = [line.split() for line in text.splitlines()]
    tokens = [t for t in tokens if t and not t[0].startswith("#")]
    out = []
    pos = 0
    while pos < len(tokens):
        header = tokens[pos]
        if len(header) != 2:
            raise ValueError(f"bad matrix header {' '.join(header)!r}")
        n, m = int(header[0]), int(header[1])
        if n < 1 or m < 1:
            raise DimensionError("empty matrices are not allowed")
        body = tokens[pos + 1 : pos + 1 + n]
        if len(body) != n or any(len(r) != m for r in body):
            raise ValueError(f"matrix body does not match header {n} {m}")
        out.append(Matrix([[parse_value(t) for t in r] for r in body]))
        pos += 1 + n
    return out


def parse_matrix(text: str) -> Matrix:
    mats = parse_matrices(text)
    if len(mats) != 1:
        raise ValueError(f"expected exactly one matrix, found {len(mats)}")
    return mats[0]
