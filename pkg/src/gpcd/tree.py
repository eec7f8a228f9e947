"""Binary community tree: pairwise merging of sibling communities and prefix codes."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import Graph, as_vertex_set, edges_between, out_degree
from .hierarchy import CommunityTree

DEFAULT_DEPTH = 10


def sibling(code: str) -> str:
    """Code of the other child of ``code``'s parent."""
    if not code:
        raise ValueError("the root has no sibling")
    return code[:-1] + ("1" if code[-1] == "0" else "0")


def code_order(code: str) -> tuple[int, str]:
    """Sort key: shorter codes first, then lexicographic."""
    return len(code), code


def normalized_linked_weight(g: Graph, a: Iterable[int], b: Iterable[int]) -> float:
    """Linkage between two disjoint sets beyond random expectation, per vertex pair."""
    a, b = as_vertex_set(a), as_vertex_set(b)
    if not a or not b:
        raise ValueError("vertex sets must be non-empty")
    between = edges_between(g, a, b)
    expected = out_degree(g, a) * out_degree(g, b) / (2.0 * g.total_weight) if g.total_weight else 0.0
    return (between - expected) / (len(a) * len(b))


@dataclass
class BinaryNode:
    vertices: np.ndarray
    left: int | None = None
    right: int | None = None
    parent: int | None = None
    code: str = ""
    embedding: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class BinaryCommunityTree:
    """Arena of binary nodes; after ``assign_codes`` node 0 is the root and codes are set."""

    def __init__(self, nodes: list[BinaryNode], root: int, num_vertices: int,
                 depth_bound: int = DEFAULT_DEPTH, vertex_names: Iterable[str] | None = None):
        self.nodes = nodes
        self.root = root
        self.num_vertices = num_vertices
        self.depth_bound = depth_bound
        self.vertex_names = tuple(vertex_names) if vertex_names is not None else tuple(
            str(v) for v in range(num_vertices))
        self.code_index = {nd.code: i for i, nd in enumerate(nodes)}
        self.leaf_of = np.full(num_vertices, -1, dtype=int)
        for i, nd in enumerate(nodes):
            if nd.is_leaf:
                self.leaf_of[nd.vertices] = i

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, code: str) -> BinaryNode:
        return self.nodes[self.code_index[code]]

    def leaf_code(self, v: int) -> str:
        return self.nodes[self.leaf_of[v]].code

    def max_depth(self) -> int:
        return max(len(nd.code) for nd in self.nodes)

    def links(self) -> list[str]:
        return sorted((nd.code for nd in self.nodes if nd.code), key=code_order)

    def validate(self) -> None:
        """Raise ``ValueError`` if any structural invariant fails."""
        if len(self.nodes) > 2 * self.num_vertices:
            raise ValueError("more than 2|V| nodes")
        root = self.nodes[self.root]
        if root.code != "" or len(root.vertices) != self.num_vertices:
            raise ValueError("root must hold all vertices with an empty code")
        if len(self.code_index) != len(self.nodes):
            raise ValueError("codes are not unique")
        for i, nd in enumerate(self.nodes):
            if (nd.left is None) != (nd.right is None):
                raise ValueError(f"node {i} has exactly one child")
            if nd.is_leaf:
                continue
            lv, rv = self.nodes[nd.left], self.nodes[nd.right]
            if lv.code != nd.code + "0" or rv.code != nd.code + "1":
                raise ValueError(f"children of {nd.code!r} are miscoded")
            union = np.union1d(lv.vertices, rv.vertices)
            if len(union) != len(lv.vertices) + len(rv.vertices) or not np.array_equal(union, nd.vertices):
                raise ValueError(f"children of {nd.code!r} do not partition it")


def binarize(g: Graph, tc: CommunityTree, expand_leaves: bool = True,
             depth_bound: int = DEFAULT_DEPTH) -> BinaryCommunityTree:
    """Convert a community tree into a coded binary tree.

    Siblings are merged bottom-up: the smallest node (ties: smallest vertex id)
    joins the sibling with the largest normalized linked weight (same
    tie-break), until two remain and become the parent's children. Single-child
    chains are collapsed. With ``expand_leaves`` every multi-vertex leaf is
    treated as a parent of its single vertices, so each vertex ends up in its
    own leaf.
    """
    nodes: list[BinaryNode] = []
    outdeg_cache: dict[int, float] = {}
    two_e = 2.0 * g.total_weight
    owner = np.full(g.num_vertices, -1, dtype=int)

    def new_node(vertices, left=None, right=None) -> int:
        nodes.append(BinaryNode(np.asarray(vertices, dtype=int), left, right))
        idx = len(nodes) - 1
        if left is not None:
            nodes[left].parent = idx
            nodes[right].parent = idx
        return idx

    def degree_of(idx: int) -> float:
        if idx not in outdeg_cache:
            outdeg_cache[idx] = out_degree(g, nodes[idx].vertices)
        return outdeg_cache[idx]

    def merge_group(items: list[int]) -> int:
        items = list(items)
        for pos, idx in enumerate(items):
            owner[nodes[idx].vertices] = pos
        while True:
            sizes = [(len(nodes[i].vertices), int(nodes[i].vertices[0]), p) for p, i in enumerate(items)
                     if i is not None]
            _, _, pick = min(sizes)
            chosen = items[pick]
            linked: dict[int, float] = {}
            for u in nodes[chosen].vertices:
                for v, w in g.neighbors[u].items():
                    o = owner[v]
                    if o >= 0 and o != pick:
                        linked[o] = linked.get(o, 0.0) + w
            d_chosen = degree_of(chosen)
            best_key, partner = None, None
            for p, i in enumerate(items):
                if i is None or p == pick:
                    continue
                expected = d_chosen * degree_of(i) / two_e if two_e else 0.0
                weight = (linked.get(p, 0.0) - expected) / (len(nodes[chosen].vertices) * len(nodes[i].vertices))
                key = (-weight, int(nodes[i].vertices[0]))
                if best_key is None or key < best_key:
                    best_key, partner = key, p
            merged_vertices = np.union1d(nodes[chosen].vertices, nodes[items[partner]].vertices)
            merged = new_node(merged_vertices, chosen, items[partner])
            outdeg_cache[merged] = d_chosen + degree_of(items[partner]) - 2.0 * linked.get(partner, 0.0)
            items[pick] = None
            items[partner] = merged
            owner[merged_vertices] = partner
            if sum(i is not None for i in items) == 1:
                owner[merged_vertices] = -1
                return merged

    def convert(tc_idx: int) -> int:
        tnode = tc.nodes[tc_idx]
        children = tnode.children
        while len(children) == 1:
            tnode = tc.nodes[children[0]]
            children = tnode.children
        if not children:
            if expand_leaves and len(tnode.vertices) > 1:
                return merge_group([new_node([v]) for v in tnode.vertices])
            return new_node(tnode.vertices)
        return merge_group([convert(c) for c in children])

    root = convert(tc.root)
    if len(nodes[root].vertices) != g.num_vertices:
        raise ValueError("community tree root does not cover every vertex")
    return assign_codes(BinaryCommunityTree(nodes, root, g.num_vertices, depth_bound, g.names))


def assign_codes(tb: BinaryCommunityTree) -> BinaryCommunityTree:
    """Re-index nodes breadth-first from the root and set prefix codes.

    The root gets the empty code; a left child appends "0", a right child "1".
    """
    order = []
    queue = deque([(tb.root, None, "")])
    new_nodes: list[BinaryNode] = []
    while queue:
        old, parent, code = queue.popleft()
        src = tb.nodes[old]
        new_nodes.append(BinaryNode(src.vertices, parent=parent, code=code, embedding=src.embedding))
        idx = len(new_nodes) - 1
        order.append(old)
        if parent is not None:
            if code.endswith("0"):
                new_nodes[parent].left = idx
            else:
                new_nodes[parent].right = idx
        if not src.is_leaf:
            queue.append((src.left, idx, code + "0"))
            queue.append((src.right, idx, code + "1"))
    return BinaryCommunityTree(new_nodes, 0, tb.num_vertices, tb.depth_bound, tb.vertex_names)


def eligible_links(tb: BinaryCommunityTree, d: int | None = None) -> list[str]:
    """Cuttable link codes: every non-root node within depth ``d``, sorted by ``code_order``."""
    d = tb.depth_bound if d is None else d
    return [c for c in tb.links() if len(c) <= d]
