from __future__ import annotations

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpcd.representation import (DocumentStore, EmbeddingFormatError, EmbeddingStore, attach_embeddings,
                                 community_embedding, dirichlet_query_likelihood, load_documents,
                                 load_embeddings, pseudo_ground_truth, text_query_need,
                                 vertex_query_need)
from gpcd.tree import binarize


def test_load_embeddings(tmp_path):
    path = tmp_path / "e.tsv"
    path.write_text("a\t1 0\nb\t0 1\nc\t0.5 0.5\n")
    store = load_embeddings(path, ["a", "b", "c"])
    assert store.dim == 2 and len(store) == 3


@pytest.mark.parametrize("text, fragment", [
    ("a\t1 0\nb\t0 1\n", "missing embeddings for vertices: c"),
    ("a\t1 0\nb\tnan 1\nc\t0 0\n", ":2:"),
    ("a\t1 0\nb\t0 1 2\nc\t0 0\n", ":2: expected 2"),
    ("a\t1 0\nz\t0 1\n", "unknown vertex 'z'"),
])
def test_embedding_errors(tmp_path, text, fragment):
    path = tmp_path / "e.tsv"
    path.write_text(text)
    with pytest.raises(EmbeddingFormatError, match=fragment):
        load_embeddings(path, ["a", "b", "c"])


def test_community_embedding_examples():
    store = EmbeddingStore(np.array([[1.0, 0], [0, 1], [1, 2], [3, 4], [5, 6]]))
    assert np.allclose(community_embedding(store, [0, 1]), [0.5, 0.5])
    assert np.allclose(community_embedding(store, [3]), [3, 4])
    assert np.allclose(community_embedding(store, [2, 3, 4]), [3, 4])
    with pytest.raises(ValueError):
        community_embedding(store, [])


def test_parent_embedding_is_weighted_child_mean(bench):
    tb = binarize(bench.graph, bench.planted_tree)
    attach_embeddings(tb, bench.embeddings)
    for nd in tb.nodes:
        if nd.is_leaf:
            continue
        left, right = tb.nodes[nd.left], tb.nodes[nd.right]
        nl, nr = len(left.vertices), len(right.vertices)
        assert np.allclose(nd.embedding, (nl * left.embedding + nr * right.embedding) / (nl + nr))


def test_vertex_query_examples():
    store = EmbeddingStore(np.array([[1.0, 0], [0, 1]]))
    need = vertex_query_need(store, {0: 3, 1: 1})
    assert np.allclose(need.vector, [0.75, 0.25])
    assert np.allclose(vertex_query_need(store, {1: 5}).vector, [0, 1])
    assert np.allclose(vertex_query_need(store, {0: 2, 1: 2}).vector, [0.5, 0.5])
    assert sum(w for _, w in need.vertex_weights) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        vertex_query_need(store, {})
    with pytest.raises(ValueError):
        vertex_query_need(store, {7: 1})


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 50), min_size=3, max_size=3), st.floats(0.1, 100))
def test_vertex_query_scale_invariant(counts, scale):
    store = EmbeddingStore(np.arange(9, dtype=float).reshape(3, 3))
    a = vertex_query_need(store, dict(enumerate(counts))).vector
    b = vertex_query_need(store, {v: c * scale for v, c in enumerate(counts)}).vector
    assert np.allclose(a, b)


def one_doc_store():
    # vertex 0 has |doc|=10 with tf(w)=2; collection gives p(w|C) = 0.01
    docs = {0: Counter({"w": 2, "x": 8}), 1: Counter({"y": 190})}
    return DocumentStore(docs, mu=2000)


def test_dirichlet_single_term():
    ds = one_doc_store()
    assert ds.collection_prob("w") == pytest.approx(0.01)
    assert dirichlet_query_likelihood(ds, 0, ["w"]) == pytest.approx(22 / 2010)


def test_dirichlet_empty_document_is_collection_prob():
    ds = one_doc_store()
    assert dirichlet_query_likelihood(ds, 5, ["x"]) == pytest.approx(ds.collection_prob("x"))


def test_dirichlet_product_and_floor():
    ds = one_doc_store()
    both = dirichlet_query_likelihood(ds, 0, ["w", "x"])
    assert both == pytest.approx(dirichlet_query_likelihood(ds, 0, ["w"]) * dirichlet_query_likelihood(ds, 0, ["x"]))
    assert ds.collection_prob("unseen") == pytest.approx(1 / (200 + 3))


def test_dirichlet_monotone_in_tf():
    values = [dirichlet_query_likelihood(DocumentStore({0: Counter({"w": tf, "z": 5}), 1: Counter({"w": 1})}), 0, ["w"])
              for tf in range(6)]
    # doc length grows with tf too; the smoothed estimate still rises
    assert all(b > a for a, b in zip(values, values[1:]))


def test_text_query_examples(monkeypatch):
    store = EmbeddingStore(np.array([[1.0, 0], [0, 1], [1, 1]]))
    ds = DocumentStore({0: Counter(a=1), 1: Counter(b=1)})
    fake = {0: math.log(0.03), 1: math.log(0.01)}
    monkeypatch.setattr(ds, "log_likelihood", lambda v, q: fake[v])
    assert np.allclose(text_query_need(store, ds, "a").vector, [0.75, 0.25])
    assert np.allclose(text_query_need(store, ds, "a", t=1).vector, [1, 0])
    uniform = DocumentStore({0: Counter(a=1), 1: Counter(a=1), 2: Counter(a=1)})
    assert np.allclose(text_query_need(store, uniform, "a").vector, [2 / 3, 2 / 3])


def test_text_query_long_query_does_not_underflow():
    store = EmbeddingStore(np.array([[1.0, 0], [0, 1]]))
    ds = DocumentStore({0: Counter(a=50), 1: Counter(b=50)})
    need = text_query_need(store, ds, " ".join(["a"] * 400))
    assert np.all(np.isfinite(need.vector)) and need.vector[0] > 0.99


def test_load_documents(tmp_path):
    path = tmp_path / "d.tsv"
    path.write_text("a\tfoo:2,Bar:1\nb\tfoo:1\n")
    ds = load_documents(path, ["a", "b"])
    assert ds.docs[0] == Counter(foo=2, bar=1)
    path.write_text("a\tfoo\n")
    with pytest.raises(EmbeddingFormatError, match=":1:"):
        load_documents(path, ["a"])


def test_pseudo_ground_truth_examples():
    store = EmbeddingStore(np.array([[1.0, 0], [0.9, 0.1], [0, 1]]))
    gt = pseudo_ground_truth(store, np.array([1.0, 0]), 2)
    assert gt.ranked_vertices == (0, 1) and gt.labels.tolist() == [1, 2]
    assert pseudo_ground_truth(store, np.array([1.0, 0]), 1).ranked_vertices == (0,)
    tied = EmbeddingStore(np.array([[0, 1.0], [1, 0], [2, 0]]))
    assert pseudo_ground_truth(tied, np.array([1.0, 0]), 2).ranked_vertices == (1, 2)


def test_zero_vectors_have_zero_cosine():
    store = EmbeddingStore(np.array([[0.0, 0], [1, 0], [-1, 0]]))
    assert pseudo_ground_truth(store, np.array([1.0, 0]), 3).ranked_vertices == (1, 0, 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 1000), st.floats(0.01, 100))
def test_ranking_invariant_to_need_scale(seed, scale):
    rng = np.random.default_rng(seed)
    store = EmbeddingStore(rng.normal(size=(20, 4)))
    need = rng.normal(size=4)
    assert pseudo_ground_truth(store, need, 5) == pseudo_ground_truth(store, need * scale, 5)
