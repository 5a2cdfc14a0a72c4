"""Transient and cyclicity analysis of max-plus linear systems.

Matrix-power iteration and SMT refinement over difference logic compute the
same pair (k0, c); the synthesis routines describe the initial states that
share a given transient as a difference-logic formula.
"""

from .dl import (
    FALSE,
    TRUE,
    Atom,
    conj,
    disj,
    encode_inequality,
    eq_func,
    evaluate,
    negate,
    parse_formula,
    pretty,
    reduce_inequality,
)
from .graph import (
    BoundExceeded,
    NoCircuit,
    PeriodicityClass,
    analyze,
    classify,
    cycle_time_vector,
    eigenspace_basis,
    graph_cyclicity,
    is_irreducible,
    max_cycle_mean,
)
from .maxplus import (
    EPS,
    DimensionError,
    Matrix,
    identity,
    mat_oplus,
    mat_otimes,
    parse_matrix,
    scalar_otimes,
    vector,
)
from .smt import ExternalSolver, Model, check_valid, solve, to_smtlib
from .transient import (
    Method,
    Status,
    TransientResult,
    synth_sp,
    synth_spq,
    trans_cone,
    trans_cone_smt,
    trans_smt,
)

__version__ = "0.1.0"

__all__ = [
    "EPS",
    "FALSE",
    "TRUE",
    "Atom",
    "BoundExceeded",
    "DimensionError",
    "ExternalSolver",
    "Matrix",
    "Method",
    "Model",
    "NoCircuit",
    "PeriodicityClass",
    "Status",
    "TransientResult",
    "analyze",
    "check_valid",
    "classify",
    "conj",
    "cycle_time_vector",
    "disj",
    "eigenspace_basis",
    "encode_inequality",
    "eq_func",
    "evaluate",
    "graph_cyclicity",
    "identity",
    "is_irreducible",
    "mat_oplus",
    "mat_otimes",
    "max_cycle_mean",
    "negate",
    "parse_formula",
    "parse_matrix",
    "pretty",
    "reduce_inequality",
    "scalar_otimes",
    "solve",
    "synth_sp",
    "synth_spq",
    "to_smtlib",
    "trans_cone",
    "trans_cone_smt",
    "trans_smt",
    "vector",
]
