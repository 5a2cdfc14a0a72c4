"""Spectral and structural analysis of square max-plus matrices.

Node ``j`` of the precedence graph has an edge to node ``i`` whenever
``A(i, j)`` is finite, so ``x_i(k+1)`` depends on every node with an edge
into ``i``.  Nodes are 0-based here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import networkx as nx

from .maxplus import (
    EPS,
    DimensionError,
    Matrix,
    identity,
    mat_oplus,
    mat_otimes,
    otimes_grid,
    scalar_otimes,
)

__all__ = [
    "NoCircuit",
    "BoundExceeded",
    "PeriodicityClass",
    "PrecedenceGraph",
    "CriticalGraph",
    "SpectralData",
    "precedence_graph",
    "is_irreducible",
    "is_regular",
    "strongly_connected_components",
    "max_cycle_mean",
    "scc_cycle_means",
    "eigenspace_basis",
    "cycle_time_vector",
    "critical_graph",
    "critical_cyclicity",
    "graph_cyclicity",
    "entry_rates",
    "column_periodicity",
    "classify",
    "analyze",
]


class NoCircuit(ValueError):
    """The precedence graph (or the relevant part of it) has no circuit."""


class BoundExceeded(RuntimeError):
    def __init__(self, bound: int, what: str = "search"):
        super().__init__(f"{what} exceeded the bound N={bound}")
        self.bound = bound


class PeriodicityClass(enum.Enum):
    NEVER_PERIODIC = "never periodic"
    BOUNDEDLY_PERIODIC = "boundedly periodic"
    UNBOUNDEDLY_PERIODIC = "unboundedly periodic"


@dataclass(frozen=True)
class PrecedenceGraph:
    n: int
    edges: tuple[tuple[int, int, Fraction], ...]  # (source j, target i, A(i, j))

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n))
        for j, i, w in self.edges:
            g.add_edge(j, i, weight=w)
        return g


@dataclass(frozen=True)
class CriticalGraph:
    lam: Fraction
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]


@dataclass(frozen=True)
class SpectralData:
    lam: Fraction
    eigenbasis: Matrix | None
    cycle_time: tuple[Fraction, ...]
    klass: PeriodicityClass | None  # None when the bounded search gave up
    cyclicity: int | None


def _require_square(a: Matrix):
    if not a.is_square():
        raise DimensionError(f"expected a square matrix, got {a.rows}x{a.cols}")


def precedence_graph(a: Matrix) -> PrecedenceGraph:
    _require_square(a)
    edges = tuple(
        (j, i, a[i, j])
        for i in range(a.rows)
        for j in range(a.cols)
        if a[i, j] != EPS
    )
    return PrecedenceGraph(a.rows, edges)


def _digraph(a: Matrix) -> nx.DiGraph:
    return precedence_graph(a).to_networkx()


def is_regular(a: Matrix) -> bool:
    return a.is_regular()


def is_irreducible(a: Matrix) -> bool:
    _require_square(a)
    return nx.is_strongly_connected(_digraph(a))


def strongly_connected_components(a: Matrix) -> list[frozenset[int]]:
    """SCCs sorted by their smallest node."""
    comps = nx.strongly_connected_components(_digraph(a))
    return sorted((frozenset(c) for c in comps), key=min)


def _has_circuit(g: nx.DiGraph, comp) -> bool:
    if len(comp) > 1:
        return True
    (v,) = comp
    return g.has_edge(v, v)


def _karp(g: nx.DiGraph, comp) -> Fraction:
    """Maximum circuit mean of a strongly connected component (Karp)."""
    nodes = sorted(comp)
    s = len(nodes)
    idx = {v: k for k, v in enumerate(nodes)}
    preds = [
        [(idx[u], g[u][v]["weight"]) for u in g.predecessors(v) if u in idx]
        for v in nodes
    ]
    # walks[k][v]: heaviest walk of exactly k edges from nodes[0] to v
    walks = [[EPS] * s for _ in range(s + 1)]
    walks[0][0] = Fraction(0)
    for k in range(1, s + 1):
        prev, cur = walks[k - 1], walks[k]
        for v in range(s):
            best = EPS
            for u, w in preds[v]:
                if prev[u] != EPS and prev[u] + w > best:
                    best = prev[u] + w
            cur[v] = best
    best_mean = None
    for v in range(s):
        if walks[s][v] == EPS:
            continue
        worst = min(
            (walks[s][v] - walks[k][v]) / (s - k)
            for k in range(s)
            if walks[k][v] != EPS
        )
        if best_mean is None or worst > best_mean:
            best_mean = worst
    assert best_mean is not None, "strongly connected component without a circuit"
    return Fraction(best_mean)


def scc_cycle_means(a: Matrix) -> dict[frozenset[int], Fraction]:
    """Maximum circuit mean of every SCC that contains a circuit."""
    _require_square(a)
    g = _digraph(a)
    return {
        c: _karp(g, c)
        for c in strongly_connected_components(a)
        if _has_circuit(g, c)
    }


def max_cycle_mean(a: Matrix) -> Fraction:
    """The maximum eigenvalue λ: largest circuit mean of the precedence graph."""
    means = scc_cycle_means(a)
    if not means:
        raise NoCircuit("the precedence graph has no circuit")
    return max(means.values())


def _kleene_plus(a: Matrix) -> Matrix:
    """⊕_{k=1..n} A^{⊗k} (assumes no circuit of positive weight)."""
    acc = a
    p = a
    for _ in range(a.rows - 1):
        p = mat_otimes(p, a)
        acc = mat_oplus(acc, p)
    return acc


def eigenspace_basis(a: Matrix, lam: Fraction | None = None) -> Matrix | None:
    """Finite generators of E(A), or None when no finite eigenvector exists.

    Columns of A_λ⁺ with a zero diagonal entry, keeping only fully finite
    columns.  Redundant (proportional) columns are kept.
    """
    _require_square(a)
    if lam is None:
        lam = max_cycle_mean(a)
    plus = _kleene_plus(scalar_otimes(-lam, a))
    keep = [
        i
        for i in range(a.rows)
        if plus[i, i] == 0 and all(plus[r, i] != EPS for r in range(a.rows))
    ]
    if not keep:
        return None
    basis = Matrix([[plus[r, i] for i in keep] for r in range(a.rows)])
    for k in range(basis.cols):
        v = basis.column(k)
        assert mat_otimes(a, v) == scalar_otimes(lam, v), "eigenvector check failed"
    return basis


def _condensation(a: Matrix):
    g = _digraph(a)
    cond = nx.condensation(g)
    means = {}
    for c in cond.nodes:
        members = cond.nodes[c]["members"]
        if _has_circuit(g, members):
            means[c] = _karp(g, members)
    return g, cond, means


def cycle_time_vector(a: Matrix) -> tuple[Fraction, ...]:
    """χ_j = largest circuit mean among the SCCs that have a path to node j."""
    _require_square(a)
    if not a.is_regular():
        raise ValueError("cycle-time vector needs a regular matrix")
    _, cond, means = _condensation(a)
    rate = {}
    for c in nx.topological_sort(cond):
        vals = [rate[p] for p in cond.predecessors(c) if rate[p] is not None]
        if c in means:
            vals.append(means[c])
        rate[c] = max(vals) if vals else None
    chi = []
    for j in range(a.rows):
        r = rate[cond.graph["mapping"][j]]
        if r is None:
            raise NoCircuit(f"no circuit reaches node {j}")
        chi.append(r)
    return tuple(chi)


def critical_graph(a: Matrix) -> CriticalGraph:
    """Nodes and edges lying on circuits of mean λ (the global maximum)."""
    _require_square(a)
    lam = max_cycle_mean(a)
    norm = scalar_otimes(-lam, a)
    plus = _kleene_plus(norm)
    star = mat_oplus(plus, identity(a.rows))
    nodes = frozenset(i for i in range(a.rows) if plus[i, i] == 0)
    edges = set()
    for j, i, _ in precedence_graph(a).edges:
        if i in nodes and j in nodes and star[j, i] != EPS and norm[i, j] + star[j, i] == 0:
            edges.add((j, i))
    return CriticalGraph(lam, nodes, frozenset(edges))


def _period(nodes, edges) -> int:
    """gcd of circuit lengths of a strongly connected digraph (BFS levels)."""
    succ = {v: [] for v in nodes}
    for u, v in edges:
        succ[u].append(v)
    start = min(nodes)
    level = {start: 0}
    queue = [start]
    for u in queue:
        for v in succ[u]:
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    g = 0
    for u, v in edges:
        g = math.gcd(g, level[u] + 1 - level[v])
    return g


def critical_cyclicity(a: Matrix) -> int:
    """lcm over critical components of the gcd of their circuit lengths."""
    cg = critical_graph(a)
    h = nx.DiGraph()
    h.add_nodes_from(cg.nodes)
    h.add_edges_from(cg.edges)
    periods = []
    for comp in nx.strongly_connected_components(h):
        sub = [(u, v) for u, v in cg.edges if u in comp and v in comp]
        if sub:
            periods.append(_period(comp, sub))
    return reduce(math.lcm, periods, 1)


def graph_cyclicity(a: Matrix) -> int | None:
    """Cyclicity from the critical graph; None for reducible matrices."""
    if not is_irreducible(a):
        return None
    return critical_cyclicity(a)


def entry_rates(a: Matrix, i: int) -> dict[int, Fraction]:
    """Asymptotic growth rate of each entry of column ``i`` of A^{⊗k}.

    Entry ``(j, i)`` is finite infinitely often iff some circuit lies on a
    path from ``i`` to ``j``; its rate is then the largest mean among the SCCs
    met by such paths.  Entries that end up ε are omitted.
    """
    _require_square(a)
    g, cond, means = _condensation(a)
    mapping = cond.graph["mapping"]
    start = mapping[i]
    reach = nx.descendants(cond, start) | {start}
    rates: dict[int, Fraction] = {}
    for c in reach:
        if c not in means:
            continue
        for d in nx.descendants(cond, c) | {c}:
            for j in cond.nodes[d]["members"]:
                if j not in rates or means[c] > rates[j]:
                    rates[j] = means[c]
    return rates


def column_periodicity(a: Matrix, i: int, bound: int):
    """Track A^{⊗k}(·, i) until it repeats up to a scalar shift.

    Returns ``(k0, c, mu)`` with A^{⊗k+c}(·,i) = (mu×c) ⊗ A^{⊗k}(·,i) for
    k ≥ k0, or None if no repetition shows up within ``bound`` steps (or the
    column is eventually ε).
    """
    den = a.denominator
    grid_a = a.scaled(den)
    cur = a.column(i).scaled(den)
    seen = {}
    for k in range(bound + 1):
        top = max(x[0] for x in cur)
        if top == EPS:
            return None
        key = tuple(x[0] if x[0] == EPS else x[0] - top for x in cur)
        if key in seen:
            k_prev, top_prev = seen[key]
            c = k - k_prev
            return k_prev, c, Fraction(top - top_prev, den * c)
        seen[key] = (k, top)
        cur = otimes_grid(grid_a, cur)
    return None


def classify(a: Matrix, bound: int = 10000) -> PeriodicityClass:
    """Never / boundedly / unboundedly periodic.

    Raises :class:`BoundExceeded` when every column grows at rate λ but the
    global transient is not found within ``bound`` iterations.
    """
    from .transient import Status, trans_cone

    if not a.is_regular():
        raise ValueError("classification needs a regular matrix")
    lam = max_cycle_mean(a)
    if eigenspace_basis(a, lam) is None:
        return PeriodicityClass.NEVER_PERIODIC
    for i in range(a.rows):
        if any(r < lam for r in entry_rates(a, i).values()):
            return PeriodicityClass.UNBOUNDEDLY_PERIODIC
    res = trans_cone(a, identity(a.rows), bound)
    if res.status is Status.FOUND:
        return PeriodicityClass.BOUNDEDLY_PERIODIC
    raise BoundExceeded(bound, "global transient search")


def analyze(a: Matrix, bound: int = 10000) -> SpectralData:
    lam = max_cycle_mean(a)
    try:
        klass = classify(a, bound)
    except BoundExceeded:
        klass = None
    return SpectralData(
        lam=lam,
        eigenbasis=eigenspace_basis(a, lam),
        cycle_time=cycle_time_vector(a),
        klass=klass,
        cyclicity=graph_cyclicity(a),
    )
