from __future__ import annotations

import numpy as np
import pytest

from gpcd.evaluation import generate_benchmark
from gpcd.graph import Graph
from gpcd.hierarchy import CommunityTree
from gpcd.tree import BinaryCommunityTree, BinaryNode, assign_codes


@pytest.fixture
def abcd():
    """a-b, b-c, c-d, a-c with a..d = 0..3."""
    return Graph(4, [(0, 1), (1, 2), (2, 3), (0, 2)], names=list("abcd"))


def complete_tree(depth: int) -> BinaryCommunityTree:
    """Complete binary tree whose 2**depth leaves are single vertices."""
    n = 2 ** depth
    nodes = []

    def build(lo: int, hi: int) -> int:
        if hi - lo == 1:
            nodes.append(BinaryNode(np.array([lo])))
            return len(nodes) - 1
        mid = (lo + hi) // 2
        left, right = build(lo, mid), build(mid, hi)
        nodes.append(BinaryNode(np.arange(lo, hi), left, right))
        idx = len(nodes) - 1
        nodes[left].parent = nodes[right].parent = idx
        return idx

    root = build(0, n)
    return assign_codes(BinaryCommunityTree(nodes, root, n, depth_bound=depth))


def random_tree(n: int, rng: np.random.Generator) -> BinaryCommunityTree:
    """Random binary tree over ``n`` vertices built by random splits."""
    nodes = []

    def build(vs: np.ndarray) -> int:
        if len(vs) == 1 or (len(vs) < 4 and rng.random() < 0.3):
            nodes.append(BinaryNode(np.sort(vs)))
            return len(nodes) - 1
        perm = rng.permutation(vs)
        cut = int(rng.integers(1, len(vs)))
        left, right = build(perm[:cut]), build(perm[cut:])
        nodes.append(BinaryNode(np.sort(vs), left, right))
        idx = len(nodes) - 1
        nodes[left].parent = nodes[right].parent = idx
        return idx

    root = build(np.arange(n))
    tb = BinaryCommunityTree(nodes, root, n, depth_bound=64)
    return assign_codes(tb)


def random_community_tree(n, rng):
    tc = CommunityTree.single(range(n))
    stack = [0]
    while stack:
        node = stack.pop()
        vs = list(tc.nodes[node].vertices)
        if len(vs) < 2 or rng.random() < 0.2:
            continue
        k = int(rng.integers(2, min(len(vs), 6) + 1))
        labels = rng.permutation(np.arange(len(vs)) % k)
        for j in range(k):
            stack.append(tc.add_child(node, [v for v, lab in zip(vs, labels) if lab == j]))
    return tc


@pytest.fixture(scope="session")
def bench():
    return generate_benchmark(seed=0)
