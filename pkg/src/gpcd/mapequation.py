"""Random-walk flows and the two-level map equation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .graph import Graph

TELEPORT = 0.15
PAGERANK_TOL = 1e-10


def plogp(x):
    """Elementwise ``x * log2(x)`` with ``0 log 0 = 0``."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, x * np.log2(safe), 0.0)


@dataclass(frozen=True)
class FlatPartition:
    assignment: np.ndarray
    module_count: int

    @classmethod
    def from_labels(cls, labels: Sequence) -> "FlatPartition":
        """Relabel arbitrary module labels to ``0..m-1`` in order of first vertex."""
        mapping: dict = {}
        out = np.empty(len(labels), dtype=int)
        for v, lab in enumerate(labels):
            if lab not in mapping:
                mapping[lab] = len(mapping)
            out[v] = mapping[lab]
        return cls(out, len(mapping))

    def modules(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.assignment == m) for m in range(self.module_count)]


@dataclass(frozen=True)
class MapEquationTerms:
    exit_rate_total: float
    index_entropy: float
    module_exit_rates: tuple[float, ...]
    module_rates: tuple[float, ...]
    module_entropies: tuple[float, ...]
    description_length: float


def visit_rates(g: Graph) -> np.ndarray:
    """Stationary visit rates of a random walker.

    Undirected graphs use ``strength / 2W`` exactly; isolated vertices get 0.
    Directed graphs use PageRank with teleportation 0.15, dangling vertices
    teleporting uniformly.
    """
    n = g.num_vertices
    if n == 0:
        return np.zeros(0)
    if not g.directed:
        if g.total_weight == 0:
            return np.full(n, 1.0 / n)
        return g.strength / (2.0 * g.total_weight)

    out_strength = np.zeros(n)
    rows, cols, vals = [], [], []
    for (u, v), w in zip(g.edges, g.weights):
        rows.append(u)
        cols.append(v)
        vals.append(w)
        out_strength[u] += w
    vals = np.array(vals) / out_strength[np.array(rows, dtype=int)] if rows else np.zeros(0)
    transition = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    transition_t = transition.T.tocsr()
    dangling = out_strength == 0

    p = np.full(n, 1.0 / n)
    for _ in range(100_000):
        nxt = (1.0 - TELEPORT) * (transition_t @ p)
        nxt += ((1.0 - TELEPORT) * p[dangling].sum() + TELEPORT) / n
        residual = np.abs(nxt - p).sum()
        p = nxt
        if residual < PAGERANK_TOL:
            break
    return p / p.sum()


def link_flows(g: Graph, rates: np.ndarray | None = None) -> list[dict[int, float]]:
    """Per-vertex outgoing flow ``u -> {v: flow}`` used for exit rates.

    Undirected: each edge carries ``w / 2W`` in each direction. Directed:
    ``p_u * w / out_strength(u)``; teleportation is not recorded as flow.
    """
    n = g.num_vertices
    flows: list[dict[int, float]] = [dict() for _ in range(n)]
    if g.total_weight == 0:
        return flows
    if not g.directed:
        scale = 1.0 / (2.0 * g.total_weight)
        for u in range(n):
            flows[u] = {v: w * scale for v, w in g.neighbors[u].items()}
        return flows
    if rates is None:
        rates = visit_rates(g)
    for u in range(n):
        out = g.out_neighbors[u]
        total = sum(out.values())
        if total > 0:
            flows[u] = {v: rates[u] * w / total for v, w in out.items()}
    return flows


def _entropy(rates: np.ndarray) -> float:
    total = rates.sum()
    if total <= 0:
        return 0.0
    return float(-plogp(rates / total).sum())


def map_equation(g: Graph, partition: FlatPartition | Sequence[int]) -> MapEquationTerms:
    """Description length ``q H(Q) + sum_i p_i H(P_i)`` of a flat partition."""
    if not isinstance(partition, FlatPartition):
        partition = FlatPartition.from_labels(list(partition))
    assignment = partition.assignment
    m = partition.module_count
    rates = visit_rates(g)
    flows = link_flows(g, rates)

    exits = np.zeros(m)
    for u in range(g.num_vertices):
        mu = assignment[u]
        for v, f in flows[u].items():
            if assignment[v] != mu:
                exits[mu] += f
    node_sums = np.bincount(assignment, weights=rates, minlength=m)

    q_total = float(exits.sum())
    index_entropy = _entropy(exits)
    module_rates = exits + node_sums
    module_entropies = []
    for i in range(m):
        members = rates[assignment == i]
        module_entropies.append(_entropy(np.concatenate(([exits[i]], members))))
    module_entropies = np.array(module_entropies)
    length = q_total * index_entropy + float(np.dot(module_rates, module_entropies))
    return MapEquationTerms(
        exit_rate_total=q_total,
        index_entropy=index_entropy,
        module_exit_rates=tuple(exits.tolist()),
        module_rates=tuple(module_rates.tolist()),
        module_entropies=tuple(module_entropies.tolist()),
        description_length=length,
    )
