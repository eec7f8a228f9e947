from __future__ import annotations

import numpy as np
import pytest

from gpcd.graph import Graph
from gpcd.hierarchy import CommunityTree, detect_hierarchy
from gpcd.tree import binarize, eligible_links, normalized_linked_weight, sibling

from conftest import complete_tree, random_community_tree


def test_linked_weight_examples(abcd):
    assert normalized_linked_weight(abcd, {0}, {1, 2}) == pytest.approx(0.625)
    assert normalized_linked_weight(abcd, {1}, {3}) == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        normalized_linked_weight(abcd, set(), {1})


def test_linked_weight_without_edges():
    g = Graph(4, [(0, 1)])
    assert normalized_linked_weight(g, {2}, {3}) == 0


def three_children_case():
    edges = [(0, 1), (2, 3), (3, 4), (4, 5), (5, 6), (7, 8), (8, 9), (1, 7), (0, 8), (0, 2), (6, 9)]
    g = Graph(10, edges)
    tc = CommunityTree.single(range(10))
    for grp in ([0, 1], [2, 3, 4, 5, 6], [7, 8, 9]):
        tc.add_child(0, grp)
    return g, tc


def test_smallest_merges_with_best_linked_sibling():
    g, tc = three_children_case()
    # by hand: ||E|| = 11, D(A)=3, D(B)=2, D(C)=3
    w_ab = (1 - 3 * 2 / 22) / 10
    w_ac = (2 - 3 * 3 / 22) / 6
    assert w_ac > w_ab
    tb = binarize(g, tc, expand_leaves=False)
    tb.validate()
    assert [(nd.code, nd.vertices.tolist()) for nd in tb.nodes] == [
        ("", list(range(10))),
        ("0", [0, 1, 7, 8, 9]),
        ("1", [2, 3, 4, 5, 6]),
        ("00", [0, 1]),
        ("01", [7, 8, 9]),
    ]
    internal = [nd for nd in tb.nodes if not nd.is_leaf]
    assert len(internal) == 2


def test_two_children_adopted():
    g = Graph(4, [(0, 1), (2, 3), (1, 2)])
    tc = CommunityTree.single(range(4))
    tc.add_child(0, [0, 1])
    tc.add_child(0, [2, 3])
    tb = binarize(g, tc, expand_leaves=False)
    assert [nd.vertices.tolist() for nd in tb.nodes] == [[0, 1, 2, 3], [0, 1], [2, 3]]


def test_flat_singletons_give_full_binary_tree():
    g = Graph(7, [(i, i + 1) for i in range(6)])
    tc = CommunityTree.single(range(7))
    for v in range(7):
        tc.add_child(0, [v])
    tb = binarize(g, tc, expand_leaves=False)
    leaves = [nd for nd in tb.nodes if nd.is_leaf]
    assert len(leaves) == 7 and len(tb) == 13


def test_single_child_chain_collapsed():
    g = Graph(4, [(0, 1), (2, 3), (1, 2)])
    tc = CommunityTree.single(range(4))
    mid = tc.add_child(0, range(4))
    tc.add_child(mid, [0, 1])
    tc.add_child(mid, [2, 3])
    tb = binarize(g, tc, expand_leaves=False)
    assert len(tb) == 3


def test_expand_leaves_gives_singleton_leaves(bench):
    tb = binarize(bench.graph, bench.planted_tree)
    tb.validate()
    assert sorted(len(nd.vertices) for nd in tb.nodes if nd.is_leaf) == [1] * 128
    assert len(tb) == 255


def test_codes_follow_children():
    tb = complete_tree(3)
    assert tb.node("").code == ""
    assert tb.nodes[tb.node("00").left].code == "000"
    assert tb.nodes[tb.node("00").right].code == "001"
    assert sorted(nd.code for nd in tb.nodes if nd.is_leaf) == [format(i, "03b") for i in range(8)]


def test_eligible_links():
    tb = complete_tree(3)
    assert eligible_links(tb, 2) == ["0", "1", "00", "01", "10", "11"]
    assert eligible_links(tb, 1) == ["0", "1"]
    assert len(eligible_links(tb, 5)) == 14
    assert sibling("010") == "011"


@pytest.mark.parametrize("seed", range(20))
def test_random_trees_respect_bounds(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 60))
    g = Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.15])
    tc = random_community_tree(n, rng)
    for expand in (False, True):
        tb = binarize(g, tc, expand_leaves=expand)
        tb.validate()
        assert len(tb) <= 2 * n
        codes = [nd.code for nd in tb.nodes]
        assert len(set(codes)) == len(codes)
        for nd in tb.nodes:
            if nd.parent is not None:
                assert nd.code[:-1] == tb.nodes[nd.parent].code
        # every original node is the union of the binary leaves below some binary node
        covered = {tuple(nd.vertices.tolist()) for nd in tb.nodes}
        for node in tc.nodes:
            if node.children or not expand:
                assert tuple(node.vertices) in covered


def test_binarize_deterministic(bench):
    tc = detect_hierarchy(bench.graph, seed=0)
    a = binarize(bench.graph, tc)
    b = binarize(bench.graph, tc)
    assert [nd.vertices.tolist() for nd in a.nodes] == [nd.vertices.tolist() for nd in b.nodes]
