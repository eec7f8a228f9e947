from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpcd.graph import Graph
from gpcd.mapequation import FlatPartition, map_equation, visit_rates

from oracles import brute_map_equation


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def adjacency(g: Graph) -> np.ndarray:
    a = np.zeros((g.num_vertices, g.num_vertices))
    for (u, v), w in zip(g.edges, g.weights):
        a[u, v] += w
    return a


def test_visit_rates_examples():
    assert np.allclose(visit_rates(cycle(4)), 0.25)
    assert np.allclose(visit_rates(Graph(3, [(0, 1), (1, 2)])), [0.25, 0.5, 0.25])
    assert np.allclose(visit_rates(Graph(2, [(0, 1), (1, 0)], directed=True)), 0.5)


def test_isolated_vertex_has_zero_rate():
    rates = visit_rates(Graph(3, [(0, 1)]))
    assert rates[2] == 0 and rates.sum() == pytest.approx(1.0)


def test_four_cycle_one_module_is_two_bits():
    terms = map_equation(cycle(4), [0, 0, 0, 0])
    assert abs(terms.description_length - 2.0) < 1e-12
    assert terms.exit_rate_total == 0


def test_singletons_match_oracle():
    g = Graph(5, [(0, 1), (1, 2, 2.0), (2, 3), (3, 4), (4, 0), (1, 3)])
    labels = list(range(5))
    assert map_equation(g, labels).description_length == pytest.approx(
        brute_map_equation(adjacency(g), labels), abs=1e-12)


def test_two_cliques_split_is_shorter():
    edges = [(u, v) for u, v in itertools.combinations(range(4), 2)]
    edges += [(u + 4, v + 4) for u, v in edges]
    g = Graph(8, edges)
    split = map_equation(g, [0] * 4 + [1] * 4).description_length
    assert split < map_equation(g, [0] * 8).description_length
    assert split == pytest.approx(brute_map_equation(adjacency(g), [0] * 4 + [1] * 4), abs=1e-12)


def test_terms_identity():
    g = Graph(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3, 0.5)])
    t = map_equation(g, FlatPartition.from_labels([0, 0, 0, 1, 1, 1]))
    recomputed = t.exit_rate_total * t.index_entropy + np.dot(t.module_rates, t.module_entropies)
    assert t.description_length == pytest.approx(recomputed, abs=1e-15)
    assert all(0 <= r <= 1 for r in t.module_rates) and min(t.module_entropies) >= 0


def random_case(seed, directed=False):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    edges = [(u, v, float(rng.uniform(0.5, 3))) for u in range(n) for v in range(n)
             if u != v and (directed or u < v) and rng.random() < 0.45]
    if not edges:
        edges = [(0, 1, 1.0)]
    labels = rng.integers(0, int(rng.integers(1, n + 1)), size=n).tolist()
    return Graph(n, edges, directed=directed), labels


@pytest.mark.parametrize("seed", range(100))
def test_random_graphs_match_oracle(seed):
    g, labels = random_case(seed)
    assert abs(map_equation(g, labels).description_length - brute_map_equation(adjacency(g), labels)) < 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_random_directed_graphs_match_oracle(seed):
    g, labels = random_case(seed, directed=True)
    got = map_equation(g, labels).description_length
    assert got == pytest.approx(brute_map_equation(adjacency(g), labels, directed=True), abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_relabeling_invariance(seed):
    g, labels = random_case(seed)
    perm = {lab: 100 - lab for lab in set(labels)}
    a = map_equation(g, labels).description_length
    b = map_equation(g, [perm[x] for x in labels]).description_length
    assert a == pytest.approx(b, abs=1e-12)
