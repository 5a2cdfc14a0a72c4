"""Transient and cyclicity of max-plus linear systems, and region synthesis.

Three interchangeable routes compute the pair (k0, c):

* :func:`trans_cone` iterates ``A^{⊗k} ⊗ V`` until the sequence repeats up
  to the shift ``λ×m``;
* :func:`trans_cone_smt` and :func:`trans_smt` guess ``(k0, c)``, ask the
  solver for a counterexample to periodicity, and refine the guess with the
  local transient of that counterexample.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .dl import FALSE, TRUE, Formula, conj, eq_func, negate
from .graph import cycle_time_vector, graph_cyclicity, max_cycle_mean
from .maxplus import EPS, DimensionError, Matrix, mat_otimes, otimes_grid, scalar_otimes
from .smt import Model, extract_vector, solve

__all__ = [
    "Status",
    "Method",
    "TransientResult",
    "UnsatisfiableInitialSet",
    "MissingCyclicity",
    "RefinementError",
    "trans_cone",
    "trans_cone_smt",
    "trans_smt",
    "periodicity_formula",
    "divisors",
    "synth_sp",
    "synth_spq",
    "region_empty",
]

log = logging.getLogger(__name__)

DEFAULT_BOUND = 10000

Solver = Callable[[Formula], "Model | None"]


class Status(enum.Enum):
    FOUND = "found"
    BOUND_EXCEEDED = "bound exceeded"
    NO_TRANSIENT = "no transient"


class Method(enum.Enum):
    MATRIX_POWER = "power"
    SMT_CONE = "smt-cone"
    SMT_SET = "smt-set"


@dataclass
class TransientResult:
    k0: int | None
    c: int | None
    method: Method
    status: Status
    refinements: list[tuple[int, int]] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.status is Status.FOUND

    @property
    def pair(self) -> tuple[int, int] | None:
        return (self.k0, self.c) if self.found else None


class UnsatisfiableInitialSet(ValueError):
    """The initial region X has no point, so tr(A, X) is undefined."""


class MissingCyclicity(ValueError):
    pass


class RefinementError(RuntimeError):
    """A counterexample failed to move the (k0, c) guess forward."""


def _check_system(a: Matrix):
    if not a.is_square():
        raise DimensionError(f"system matrix must be square, got {a.rows}x{a.cols}")
    if not a.is_regular():
        raise ValueError("system matrix must be regular")


def _chi_constant(a: Matrix) -> bool:
    return len(set(cycle_time_vector(a))) == 1


def trans_cone(
    a: Matrix,
    v: Matrix,
    bound: int = DEFAULT_BOUND,
    use_graph_cyclicity: bool = True,
    *,
    lam: Fraction | None = None,
    periodic: bool | None = None,
) -> TransientResult:
    """Transient and cyclicity of ``A`` w.r.t. cone(V) by matrix iteration.

    With ``use_graph_cyclicity`` and irreducible ``A`` the shift ``m`` is only
    searched up to the critical-graph cyclicity.  ``lam`` and ``periodic``
    let callers skip recomputing λ and the cycle-time test.
    """
    _check_system(a)
    if v.rows != a.cols:
        raise DimensionError(f"cone basis has {v.rows} rows, system has {a.cols}")
    if periodic is None:
        periodic = _chi_constant(a)
    if not periodic:
        return TransientResult(None, None, Method.MATRIX_POWER, Status.NO_TRANSIENT)
    if lam is None:
        lam = max_cycle_mean(a)
    cyc_bound = graph_cyclicity(a) if use_graph_cyclicity else None

    # M[it] - λ·it on a common integer grid: M[it] = (λ×m) ⊗ M[it-m]
    # iff the normalized entries of it and it-m coincide.
    den = math.lcm(a.denominator, v.denominator, lam.denominator)
    step = int(lam * den)
    grid_a = a.scaled(den)
    cur = v.scaled(den)
    keys = [cur]
    index = {cur: 0}
    it = 0
    while it <= bound:
        cur = otimes_grid(grid_a, cur)
        it += 1
        shift = step * it
        key = tuple(tuple(x if x == EPS else x - shift for x in row) for row in cur)
        if cyc_bound is None:
            prev = index.get(key)
            if prev is not None:
                return TransientResult(prev, it - prev, Method.MATRIX_POWER, Status.FOUND)
            index[key] = it
        else:
            for m in range(1, min(cyc_bound, it) + 1):
                if keys[it - m] == key:
                    return TransientResult(it - m, m, Method.MATRIX_POWER, Status.FOUND)
        keys.append(key)
    log.info("trans_cone: terminated after reaching maximum bound %d", bound)
    return TransientResult(None, None, Method.MATRIX_POWER, Status.BOUND_EXCEEDED)


def periodicity_formula(a: Matrix, k0: int, c: int, lam: Fraction, v: Matrix | None = None) -> Formula:
    """EqFunc(A^{⊗k0+c} ⊗ V, (λ×c) ⊗ A^{⊗k0} ⊗ V); V defaults to the identity."""
    r = a.power(k0 + c)
    s = scalar_otimes(lam * c, a.power(k0))
    if v is not None:
        r, s = mat_otimes(r, v), mat_otimes(s, v)
    return eq_func(r, s)


def _refine(
    a: Matrix,
    lam: Fraction,
    bound: int,
    method: Method,
    counterexample: Callable[[int, int], Matrix | None],
) -> TransientResult:
    """Shared counterexample-guided loop of the SMT-based algorithms."""
    k0, c = 0, 1
    trace: list[tuple[int, int]] = []
    while k0 + c <= bound:
        trace.append((k0, c))
        v = counterexample(k0, c)
        if v is None:
            return TransientResult(k0, c, method, Status.FOUND, trace)
        local = trans_cone(
            a, mat_otimes(a.power(k0), v), bound, False, lam=lam, periodic=True
        )
        if not local.found:
            return TransientResult(None, None, method, local.status, trace)
        nk0, nc = k0 + local.k0, math.lcm(c, local.c)
        if nk0 + nc <= k0 + c:
            raise RefinementError(f"guess did not grow: {(k0, c)} -> {(nk0, nc)}")
        k0, c = nk0, nc
    log.info("%s: terminated after reaching maximum bound %d", method.value, bound)
    return TransientResult(None, None, method, Status.BOUND_EXCEEDED, trace)


def trans_cone_smt(
    a: Matrix, v: Matrix, bound: int = DEFAULT_BOUND, solver: Solver = solve
) -> TransientResult:
    """Transient and cyclicity of ``A`` w.r.t. cone(V) by SMT refinement."""
    _check_system(a)
    if v.rows != a.cols:
        raise DimensionError(f"cone basis has {v.rows} rows, system has {a.cols}")
    if not _chi_constant(a):
        return TransientResult(None, None, Method.SMT_CONE, Status.NO_TRANSIENT)
    lam = max_cycle_mean(a)
    coeffs = list(range(1, v.cols + 1))

    def counterexample(k0, c):
        f = periodicity_formula(a, k0, c, lam, v)
        model = solver(negate(f))
        if model is None:
            return None
        return mat_otimes(v, extract_vector(model, coeffs))

    return _refine(a, lam, bound, Method.SMT_CONE, counterexample)


def trans_smt(
    a: Matrix, region: Formula = TRUE, bound: int = DEFAULT_BOUND, solver: Solver = solve
) -> TransientResult:
    """Transient and cyclicity of ``A`` w.r.t. the states satisfying ``region``.

    ``region`` is a formula over x1..xn; TRUE stands for the whole space.
    Raises :class:`UnsatisfiableInitialSet` if the region is empty.
    """
    _check_system(a)
    if not _chi_constant(a):
        return TransientResult(None, None, Method.SMT_SET, Status.NO_TRANSIENT)
    lam = max_cycle_mean(a)
    states = list(range(1, a.rows + 1))
    first = [True]

    def counterexample(k0, c):
        f = periodicity_formula(a, k0, c, lam)
        model = solver(conj(region, negate(f)))
        if model is None:
            if first[0] and solver(region) is None:
                raise UnsatisfiableInitialSet("the initial region is empty")
            return None
        first[0] = False
        return extract_vector(model, states)

    return _refine(a, lam, bound, Method.SMT_SET, counterexample)


# -- synthesis --------------------------------------------------------------------


def divisors(q: int) -> list[int]:
    if q < 1:
        raise ValueError("q must be positive")
    return [d for d in range(1, q + 1) if q % d == 0]




def synth_sp(a: Matrix, p: int, c: int | None = None) -> Formula:
    """Formula whose models are exactly the states with local transient ``p``.

    ``c`` is the global cyclicity; it is derived from the critical graph when
    ``A`` is irreducible.
    """
    if p < 0:
        raise ValueError("p must be non-negative")
    _check_system(a)
    if c is None:
        c = graph_cyclicity(a)
        if c is None:
            raise MissingCyclicity("reducible matrix: pass the global cyclicity explicitly")
    if not _chi_constant(a):
        return FALSE
    lam = max_cycle_mean(a)
    parts = [periodicity_formula(a, p, c, lam)]
    if p > 0:
        parts.append(negate(periodicity_formula(a, p - 1, c, lam)))
    return conj(*parts)


def synth_spq(a: Matrix, p: int, q: int) -> Formula:
    """Formula for the states with local transient ``p`` and cyclicity ``q``."""
    if p < 0:
        raise ValueError("p must be non-negative")
    if q < 1:
        raise ValueError("q must be positive")
    _check_system(a)
    if not _chi_constant(a):
        return FALSE
    lam = max_cycle_mean(a)
    parts = [periodicity_formula(a, p, q, lam)]
    if p > 0:
        parts.append(negate(periodicity_formula(a, p - 1, q, lam)))
    for d in divisors(q)[:-1]:
        parts.append(negate(periodicity_formula(a, p, d, lam)))
    return conj(*parts)


def region_empty(f: Formula, solver: Solver = solve) -> bool:
    return solver(f) is None
