"""Weighted graph store with the connectivity queries used by the tree builder."""

from __future__ import annotations

import logging
import math
from collections import deque
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Raised when an edge-list file cannot be parsed."""


def as_vertex_set(vertices: Iterable[int]) -> tuple[int, ...]:
    """Sorted, deduplicated tuple of vertex ids."""
    return tuple(sorted(set(int(v) for v in vertices)))


class Graph:
    """Immutable weighted graph over dense vertex ids ``0..n-1``.

    Duplicate ``(src, dst)`` pairs are merged by summing weights; undirected
    edges are stored once as ``(min, max)``. Self-loops are dropped and counted
    in ``skipped_self_loops``.

    Connectivity queries (``neighbors``, ``strength``) always use undirected
    incidence, so for a directed graph ``u->v`` and ``v->u`` add up. The
    directed structure is kept in ``out_neighbors`` for random-walk flows.
    """

    def __init__(
        self,
        num_vertices: int,
        edges: Iterable[tuple[int, int, float]] | Iterable[tuple[int, int]],
        directed: bool = False,
        names: Sequence[str] | None = None,
    ):
        if num_vertices < 0:
            raise ValueError("num_vertices must be non-negative")
        self.num_vertices = int(num_vertices)
        self.directed = bool(directed)
        if names is None:
            names = [str(v) for v in range(self.num_vertices)]
        if len(names) != self.num_vertices:
            raise ValueError("names must have one entry per vertex")
        self.names: tuple[str, ...] = tuple(names)
        self.skipped_self_loops = 0

        merged: dict[tuple[int, int], float] = {}
        for edge in edges:
            if len(edge) == 2:
                u, v = edge
                w = 1.0
            else:
                u, v, w = edge
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{self.num_vertices - 1}")
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"edge ({u}, {v}) has non-positive or non-finite weight {w}")
            if u == v:
                self.skipped_self_loops += 1
                continue
            key = (u, v) if self.directed else (min(u, v), max(u, v))
            merged[key] = merged.get(key, 0.0) + w

        keys = sorted(merged)
        self.edges: tuple[tuple[int, int], ...] = tuple(keys)
        self.weights = np.array([merged[k] for k in keys], dtype=float)
        self.total_weight = float(self.weights.sum())

        self.neighbors: list[dict[int, float]] = [dict() for _ in range(self.num_vertices)]
        self.out_neighbors: list[dict[int, float]] = [dict() for _ in range(self.num_vertices)]
        for (u, v), w in zip(keys, self.weights):
            self.neighbors[u][v] = self.neighbors[u].get(v, 0.0) + w
            self.neighbors[v][u] = self.neighbors[v].get(u, 0.0) + w
            self.out_neighbors[u][v] = w
            if not self.directed:
                self.out_neighbors[v][u] = w
        self.strength = np.array([sum(nb.values()) for nb in self.neighbors], dtype=float)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(self.num_vertices)

    def degree(self, v: int) -> float:
        """Weighted degree (strength) of a single vertex."""
        return float(self.strength[v])

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple["Graph", np.ndarray]:
        """Subgraph on ``vertices`` plus the local-to-global id map."""
        members = np.array(as_vertex_set(vertices), dtype=int)
        local = {int(g): i for i, g in enumerate(members)}
        edges = []
        for (u, v), w in zip(self.edges, self.weights):
            if u in local and v in local:
                edges.append((local[u], local[v], w))
        sub = Graph(len(members), edges, directed=self.directed,
                    names=[self.names[g] for g in members])
        return sub, members

    def connected_components(self) -> list[tuple[int, ...]]:
        """Weakly connected components, ordered by smallest member."""
        seen = np.zeros(self.num_vertices, dtype=bool)
        components = []
        for start in range(self.num_vertices):
            if seen[start]:
                continue
            seen[start] = True
            queue = deque([start])
            comp = []
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in self.neighbors[u]:
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
            components.append(tuple(sorted(comp)))
        return components

    def name_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph({self.num_vertices} vertices, {self.num_edges} edges, {kind})"


def load_graph(path: str | Path, directed: bool = False) -> Graph:
    """Read an edge list of ``src dst [weight]`` lines.

    Fields may be separated by tabs or spaces, lines starting with ``#`` are
    comments, and a missing weight means 1.0. Vertex tokens are external names;
    dense ids are assigned in order of first appearance.
    """
    index: dict[str, int] = {}
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) not in (2, 3):
                raise GraphFormatError(f"{path}:{lineno}: expected 'src dst [weight]', got {line!r}")
            if len(fields) == 3:
                try:
                    w = float(fields[2])
                except ValueError:
                    raise GraphFormatError(f"{path}:{lineno}: weight {fields[2]!r} is not a number") from None
                if not (w > 0 and math.isfinite(w)):
                    raise GraphFormatError(f"{path}:{lineno}: weight must be positive and finite")
            else:
                w = 1.0
            ids = []
            for token in fields[:2]:
                if token not in index:
                    index[token] = len(index)
                ids.append(index[token])
            edges.append((ids[0], ids[1], w))

    names = sorted(index, key=index.get)
    g = Graph(len(names), edges, directed=directed, names=names)
    if g.skipped_self_loops:
        log.warning("%s: skipped %d self-loop line(s)", path, g.skipped_self_loops)
    if g.num_edges == 0:
        raise GraphFormatError(f"{path}: graph has no edges")
    return g


def _check_members(g: Graph, vs: tuple[int, ...]) -> None:
    if vs and (vs[0] < 0 or vs[-1] >= g.num_vertices):
        raise ValueError("vertex set contains ids outside the graph")


def edges_between(g: Graph, a: Iterable[int], b: Iterable[int]) -> float:
    """Total weight of edges with one endpoint in ``a`` and the other in ``b``."""
    a, b = as_vertex_set(a), as_vertex_set(b)
    _check_members(g, a)
    _check_members(g, b)
    if len(a) > len(b):
        a, b = b, a
    bset = set(b)
    if bset.intersection(a):
        raise ValueError("vertex sets must be disjoint")
    return float(sum(w for u in a for v, w in g.neighbors[u].items() if v in bset))


def out_degree(g: Graph, a: Iterable[int]) -> float:
    """Total weight of edges with exactly one endpoint inside ``a``."""
    a = as_vertex_set(a)
    _check_members(g, a)
    aset = set(a)
    return float(sum(w for u in a for v, w in g.neighbors[u].items() if v not in aset))
