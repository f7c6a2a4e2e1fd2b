"""Supremal Holder exponents through extremal cycle means.

The renormalization process is a shift of finite type on pairs (letter,
floor); its graph carries an edge weight measuring how much an atom of the
affine partition shrinks relative to its parent.  The largest and smallest
mean of that weight over elementary cycles (zeta and xi) bound the typical
shrinking rate from above and below and give the exact Holder exponents of
the conjugacy and of its inverse.  Karp's algorithm computes both extremes;
a full enumeration of elementary cycles serves as the oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np

from .dimension import DimensionReport, is_invariant
from .errors import (
    NotHyperbolic,
    NonInvariantOmega,
    NotStronglyConnected,
    NumericalFailure,
)
from .rauzy import SelfSimilarSystem, perron_pair
from .spectral import HyperbolicityCertificate, SlopeDecomposition

_WITNESS_TOL = 1e-12
_ENUMERATION_CAP = 1_000_000


@dataclass(frozen=True)
class RenormGraph:
    """Vertices are (letter rank, floor); an edge joins a vertex to every
    (letter, floor) whose floor interval sits inside the tail's letter."""

    vertices: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int], ...]          # indices into vertices
    weight_minus: np.ndarray                    # per edge; weight_plus = -weight_minus
    rho_c: float

    @property
    def size(self) -> int:
        return len(self.vertices)

    def weight(self, side: str) -> np.ndarray:
        if side == "minus":
            return self.weight_minus
        if side == "plus":
            return -self.weight_minus
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")


@dataclass(frozen=True)
class CycleMeanResult:
    value: float
    witness_cycle: tuple[tuple[int, int], ...]
    method: str


def build_graph(sys: SelfSimilarSystem, omega_c: np.ndarray,
                ell_c: Optional[np.ndarray] = None,
                rho_c: Optional[float] = None) -> RenormGraph:
    """Graph of the renormalization shift with log-shrinkage edge weights.

    The weight of an edge into (a, i) is
        rho_c - S_i(omega_c) - log ell_c[a] + log ell_c[beta(a, i)],
    the negative log of the relative length of the affine atom; it depends
    on the head vertex only.  Requires the invariant slope part.
    """
    omc = np.asarray(omega_c, dtype=float)
    if not is_invariant(sys, omc):
        raise NonInvariantOmega(
            "graph weights are defined through the invariant slope part only")
    if ell_c is None or rho_c is None:
        rho_c, ell_c, _ = perron_pair(sys.weighted(omc))

    vertices: list[tuple[int, int]] = []
    head_weight: list[float] = []
    beta: list[int] = []
    for r, word in enumerate(sys.towers.words):
        S = 0.0
        for i, b in enumerate(word):
            vertices.append((r, i))
            head_weight.append(rho_c - S - math.log(ell_c[r]) + math.log(ell_c[b]))
            beta.append(b)
            S += omc[b]

    index = {v: k for k, v in enumerate(vertices)}
    edges = []
    weights = []
    for head_pos, (r, i) in enumerate(vertices):
        tail_letter = beta[head_pos]
        for j in range(len(sys.towers.words[tail_letter])):
            edges.append((index[(tail_letter, j)], head_pos))
            weights.append(head_weight[head_pos])
    return RenormGraph(tuple(vertices), tuple(edges), np.array(weights), float(rho_c))


def _check_strongly_connected(n: int, edges) -> None:
    fwd = [[] for _ in range(n)]
    bwd = [[] for _ in range(n)]
    for u, v in edges:
        fwd[u].append(v)
        bwd[v].append(u)

    def reach(adj):
        seen = [False] * n
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return all(seen)

    if not (reach(fwd) and reach(bwd)):
        raise NotStronglyConnected("renormalization graph is not strongly connected")


def max_mean_cycle(graph: RenormGraph, side: str = "minus",
                   method: str = "karp") -> CycleMeanResult:
    """Maximum cycle mean with an elementary witness cycle.

    method 'karp' runs Karp's dynamic program; 'enumeration' maximizes over
    all elementary cycles (Johnson-style listing).  The reported value is
    the witness cycle's own mean, so replaying the witness reproduces it
    exactly.
    """
    w = graph.weight(side)
    n = graph.size
    _check_strongly_connected(n, graph.edges)
    if method == "enumeration":
        cyc, mean = _best_cycle_by_enumeration(graph, w)
        return CycleMeanResult(mean, cyc, "enumeration")
    if method != "karp":
        raise ValueError(f"unknown method {method!r}")

    into = [[] for _ in range(n)]
    for e, (u, v) in enumerate(graph.edges):
        into[v].append((u, w[e]))

    NEG = -math.inf
    D = np.full((n + 1, n), NEG)
    D[0, :] = 0.0
    parent = np.full((n + 1, n), -1, dtype=int)
    for k in range(1, n + 1):
        for v in range(n):
            best, arg = NEG, -1
            for u, wt in into[v]:
                cand = D[k - 1, u] + wt
                if cand > best:
                    best, arg = cand, u
            D[k, v] = best
            parent[k, v] = arg

    best_val, best_v = NEG, -1
    for v in range(n):
        worst = math.inf
        for k in range(n):
            worst = min(worst, (D[n, v] - D[k, v]) / (n - k))
        if worst > best_val:
            best_val, best_v = worst, v

    # the optimal n-edge walk into best_v contains a critical cycle; peel
    # elementary cycles off the walk and keep the one matching the value
    walk = [best_v]
    v = best_v
    for k in range(n, 0, -1):
        v = int(parent[k, v])
        walk.append(v)
    walk.reverse()

    chosen = None
    while True:
        seen: dict[int, int] = {}
        repeat = None
        for pos, u in enumerate(walk):
            if u in seen:
                repeat = (seen[u], pos)
                break
            seen[u] = pos
        if repeat is None:
            break
        p, q = repeat
        cycle = walk[p:q]
        mean = _cycle_mean(graph, w, cycle)
        if chosen is None or abs(mean - best_val) < abs(chosen[1] - best_val):
            chosen = (cycle, mean)
        walk = walk[:p] + walk[q:]
    if chosen is None or abs(chosen[1] - best_val) > 1e-9 * max(1.0, abs(best_val)):
        # float pathologies only; the enumeration witness is always valid
        cyc, mean = _best_cycle_by_enumeration(graph, w)
        return CycleMeanResult(mean, cyc, "karp")
    cycle, mean = chosen
    witness = tuple(graph.vertices[v] for v in cycle)
    return CycleMeanResult(mean, witness, "karp")


def min_mean_cycle(graph: RenormGraph, side: str = "minus",
                   method: str = "karp") -> CycleMeanResult:
    flipped = "plus" if side == "minus" else "minus"
    res = max_mean_cycle(graph, flipped, method)
    return CycleMeanResult(-res.value, res.witness_cycle, res.method)


def _cycle_mean(graph: RenormGraph, w: np.ndarray, cycle: list[int]) -> float:
    lookup = {(u, v): wt for (u, v), wt in zip(graph.edges, w)}
    total = 0.0
    for pos, u in enumerate(cycle):
        v = cycle[(pos + 1) % len(cycle)]
        total += lookup[(u, v)]
    return total / len(cycle)


def _best_cycle_by_enumeration(graph: RenormGraph, w: np.ndarray):
    G = nx.DiGraph()
    G.add_nodes_from(range(graph.size))
    lookup = {}
    for (u, v), wt in zip(graph.edges, w):
        G.add_edge(u, v)
        lookup[(u, v)] = wt
    best_cycle, best_mean = None, -math.inf
    count = 0
    for cycle in nx.simple_cycles(G):
        count += 1
        if count > _ENUMERATION_CAP:
            raise NumericalFailure(
                f"more than {_ENUMERATION_CAP} elementary cycles; use Karp")
        total = 0.0
        for pos, u in enumerate(cycle):
            total += lookup[(u, cycle[(pos + 1) % len(cycle)])]
        mean = total / len(cycle)
        if mean > best_mean:
            best_mean, best_cycle = mean, cycle
    if best_cycle is None:
        raise NotStronglyConnected("graph has no cycle")
    return tuple(graph.vertices[v] for v in best_cycle), best_mean


def zeta_xi(sys: SelfSimilarSystem, decomp: SlopeDecomposition,
            graph: Optional[RenormGraph] = None) -> tuple[float, float]:
    """Largest and smallest elementary-cycle mean of the shrinkage weight."""
    graph = graph or build_graph(sys, decomp.omega_c)
    zeta = max_mean_cycle(graph, "minus").value
    xi = min_mean_cycle(graph, "minus").value
    return zeta, xi


@dataclass(frozen=True)
class HolderReport:
    klass: str
    h_exponent: float                 # math.inf for the smooth stable case
    hinv_exponent: Optional[float]    # None when no conjugacy exists (unstable)
    zeta: Optional[float]
    xi: Optional[float]


def holder_exponents(sys: SelfSimilarSystem, cert: HyperbolicityCertificate,
                     decomp: SlopeDecomposition,
                     report: Optional[DimensionReport] = None) -> HolderReport:
    """Supremal Holder exponents of the conjugacy and of its inverse.

    Stable slopes: both equal 1 + alpha/rho_T, degenerating to infinity
    (a smooth conjugacy) when the only contraction present is the Perron
    one.  Central-stable: rho_T/zeta and xi/rho_T.  Unstable: the
    conjugacy is not Holder and has no inverse.
    """
    if not cert.is_hyperbolic:
        raise NotHyperbolic(cert.failure_reason or "not hyperbolic")
    if decomp.klass == "zero":
        return HolderReport("zero", 1.0, 1.0, sys.rho_T, sys.rho_T)
    if decomp.klass == "stable":
        alpha = decomp.alpha_omega
        if alpha is None:
            raise NumericalFailure("stable class without a recorded contraction rate")
        if abs(alpha - sys.rho_T) <= 1e-9 * sys.rho_T:
            return HolderReport("stable", math.inf, math.inf, None, None)
        val = 1.0 + alpha / sys.rho_T
        return HolderReport("stable", val, val, None, None)
    if decomp.klass == "unstable":
        return HolderReport("unstable", 0.0, None, None, None)
    zeta, xi = zeta_xi(sys, decomp)
    return HolderReport("central_stable", sys.rho_T / zeta, xi / sys.rho_T, zeta, xi)
