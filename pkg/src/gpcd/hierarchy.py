"""Hierarchical community detection by recursive map-equation minimization.

``detect_flat`` is a Louvain-style greedy minimizer of the two-level map
equation: single-vertex moves until a pass changes nothing, then modules are
aggregated into super-vertices and the process repeats. ``detect_hierarchy``
applies it recursively to induced subgraphs.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph import Graph, as_vertex_set
from .mapequation import FlatPartition, link_flows, visit_rates

DEFAULT_MIN_SPLIT_SIZE = 4
_MOVE_TOL = 1e-12


def plogp(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


@dataclass
class CommunityNode:
    vertices: tuple[int, ...]
    children: list[int] = field(default_factory=list)
    parent: int | None = None


@dataclass
class CommunityTree:
    """Hierarchy of nested vertex sets; node 0 is the root."""

    nodes: list[CommunityNode]
    root: int = 0

    @classmethod
    def single(cls, vertices: Iterable[int]) -> "CommunityTree":
        return cls([CommunityNode(as_vertex_set(vertices))])

    def add_child(self, parent: int, vertices: Iterable[int]) -> int:
        self.nodes.append(CommunityNode(as_vertex_set(vertices), parent=parent))
        idx = len(self.nodes) - 1
        self.nodes[parent].children.append(idx)
        return idx

    def depth_of(self, node: int) -> int:
        depth = 0
        while self.nodes[node].parent is not None:
            node = self.nodes[node].parent
            depth += 1
        return depth

    def max_depth(self) -> int:
        return max(self.depth_of(i) for i in range(len(self.nodes)))

    def leaves(self) -> list[int]:
        return [i for i, nd in enumerate(self.nodes) if not nd.children]

    def level_labels(self, depth: int) -> np.ndarray:
        """Vertex labels of the cut at ``depth``; shallower leaves keep their own label."""
        n = len(self.nodes[self.root].vertices)
        labels = np.full(max(self.nodes[self.root].vertices) + 1 if n else 0, -1, dtype=int)
        frontier = [(self.root, 0)]
        while frontier:
            node, d = frontier.pop()
            nd = self.nodes[node]
            if d == depth or not nd.children:
                labels[list(nd.vertices)] = node
            else:
                frontier.extend((c, d + 1) for c in nd.children)
        return labels

    def validate(self) -> None:
        """Raise ``ValueError`` unless every internal node is a disjoint union of its children."""
        for i, nd in enumerate(self.nodes):
            if not nd.vertices:
                raise ValueError(f"node {i} is empty")
            if not nd.children:
                continue
            union: set[int] = set()
            total = 0
            for c in nd.children:
                if self.nodes[c].parent != i:
                    raise ValueError(f"node {c} does not point back to parent {i}")
                union.update(self.nodes[c].vertices)
                total += len(self.nodes[c].vertices)
            if total != len(union):
                raise ValueError(f"children of node {i} overlap")
            if union != set(nd.vertices):
                raise ValueError(f"children of node {i} do not cover it")


class _FlowNetwork:
    """Aggregated flow graph: per-node flow plus directed link flows without self-links."""

    def __init__(self, node_flow: np.ndarray, out_flows: list[dict[int, float]]):
        self.node_flow = node_flow
        self.out_flows = out_flows
        self.in_flows: list[dict[int, float]] = [dict() for _ in range(len(node_flow))]
        for u, out in enumerate(out_flows):
            for v, f in out.items():
                self.in_flows[v][u] = f
        self.out_total = np.array([sum(o.values()) for o in out_flows], dtype=float)
        self.in_total = np.array([sum(i.values()) for i in self.in_flows], dtype=float)

    @property
    def size(self) -> int:
        return len(self.node_flow)

    def aggregate(self, module: np.ndarray) -> "_FlowNetwork":
        m = int(module.max()) + 1
        node_flow = np.bincount(module, weights=self.node_flow, minlength=m)
        out: list[dict[int, float]] = [defaultdict(float) for _ in range(m)]
        for u, links in enumerate(self.out_flows):
            mu = module[u]
            for v, f in links.items():
                mv = module[v]
                if mv != mu:
                    out[mu][mv] += f
        return _FlowNetwork(node_flow, [dict(o) for o in out])


def _local_moves(net: _FlowNetwork, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    n = net.size
    module = np.arange(n)
    exit_flow = net.out_total.copy()
    mod_flow = net.node_flow.copy()
    q_total = float(exit_flow.sum())
    moved_any = False

    while True:
        moved = False
        for u in rng.permutation(n):
            a = module[u]
            out_to: dict[int, float] = defaultdict(float)
            in_from: dict[int, float] = defaultdict(float)
            for v, f in net.out_flows[u].items():
                out_to[module[v]] += f
            for v, f in net.in_flows[u].items():
                in_from[module[v]] += f
            candidates = (set(out_to) | set(in_from)) - {a}
            if not candidates:
                continue
            u_out = net.out_total[u]
            p_u = net.node_flow[u]

            qa_old, fa_old = exit_flow[a], mod_flow[a]
            qa_new = max(qa_old - (u_out - out_to.get(a, 0.0)) + in_from.get(a, 0.0), 0.0)
            fa_new = max(fa_old - p_u, 0.0)
            base_a = -2.0 * (plogp(qa_new) - plogp(qa_old)) + plogp(qa_new + fa_new) - plogp(qa_old + fa_old)

            best, best_delta, best_q = None, -_MOVE_TOL, 0.0
            for b in sorted(candidates):
                qb_old, fb_old = exit_flow[b], mod_flow[b]
                qb_new = max(qb_old + (u_out - out_to.get(b, 0.0)) - in_from.get(b, 0.0), 0.0)
                fb_new = fb_old + p_u
                q_new = q_total - qa_old - qb_old + qa_new + qb_new
                delta = (plogp(q_new) - plogp(q_total) + base_a
                         - 2.0 * (plogp(qb_new) - plogp(qb_old))
                         + plogp(qb_new + fb_new) - plogp(qb_old + fb_old))
                if delta < best_delta:
                    best, best_delta, best_q = b, delta, qb_new
            if best is None:
                continue
            q_total = q_total - qa_old - exit_flow[best] + qa_new + best_q
            exit_flow[a], mod_flow[a] = qa_new, fa_new
            exit_flow[best] = best_q
            mod_flow[best] += p_u
            module[u] = best
            moved = moved_any = True
        if not moved:
            break

    _, relabeled = np.unique(module, return_inverse=True)
    return relabeled, moved_any


def _greedy_partition(net: _FlowNetwork, rng: np.random.Generator) -> np.ndarray:
    assignment = np.arange(net.size)
    while net.size > 1:
        module, moved = _local_moves(net, rng)
        if not moved:
            break
        assignment = module[assignment]
        net = net.aggregate(module)
    return assignment


def detect_flat(g: Graph, seed=0) -> FlatPartition:
    """Greedy two-level map-equation partition of ``g``; deterministic given ``seed``."""
    if g.num_vertices == 0:
        raise ValueError("graph has no vertices")
    rates = visit_rates(g)
    net = _FlowNetwork(rates, link_flows(g, rates))
    assignment = _greedy_partition(net, np.random.default_rng(seed))
    return FlatPartition.from_labels(assignment.tolist())


def detect_hierarchy(g: Graph, seed: int = 0,
                     min_split_size: int = DEFAULT_MIN_SPLIT_SIZE) -> CommunityTree:
    """Build a community tree by recursive flat detection on induced subgraphs.

    A node is split into its weakly connected components when disconnected,
    otherwise into the modules of ``detect_flat``. Nodes smaller than
    ``min_split_size`` and nodes where detection finds a single module are leaves.
    """
    if g.num_vertices == 0:
        raise ValueError("graph has no vertices")
    if min_split_size < 1:
        raise ValueError("min_split_size must be positive")
    tree = CommunityTree.single(g.vertices)
    stack = [tree.root]
    while stack:
        node = stack.pop()
        members = tree.nodes[node].vertices
        if len(members) < min_split_size:
            continue
        sub, gmap = g.induced_subgraph(members)
        components = sub.connected_components()
        if len(components) > 1:
            groups = [gmap[list(c)] for c in components]
        else:
            part = detect_flat(sub, seed=[seed, members[0], len(members)])
            if part.module_count == 1:
                continue
            groups = [gmap[idx] for idx in part.modules()]
        groups.sort(key=lambda grp: int(grp.min()))
        for grp in groups:
            stack.append(tree.add_child(node, grp.tolist()))
    return tree
