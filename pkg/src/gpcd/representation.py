"""Vertex and community embeddings, user-need vectors and the pseudo ground truth."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_MU = 2000.0
DEFAULT_TEXT_CANDIDATES = 100


class EmbeddingFormatError(ValueError):
    """Raised when an embedding or document file is malformed or incomplete."""


def _names_of(vertices) -> list[str]:
    # accepts a Graph, a BinaryCommunityTree or a plain name sequence
    names = getattr(vertices, "names", None) or getattr(vertices, "vertex_names", None)
    return list(names if names is not None else vertices)


@dataclass(frozen=True)
class EmbeddingStore:
    vectors: np.ndarray

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=float)
        if vecs.ndim != 2 or vecs.shape[1] == 0:
            raise ValueError("embeddings must form a non-empty (|V|, dim) matrix")
        if not np.all(np.isfinite(vecs)):
            raise ValueError("embeddings must be finite")
        object.__setattr__(self, "vectors", vecs)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def __getitem__(self, v: int) -> np.ndarray:
        return self.vectors[v]


@dataclass(frozen=True)
class UserNeed:
    vector: np.ndarray
    vertex_weights: tuple[tuple[int, float], ...] = ()
    text: str | None = None


@dataclass(frozen=True)
class PseudoGroundTruth:
    ranked_vertices: tuple[int, ...]

    @property
    def labels(self) -> np.ndarray:
        return np.arange(1, len(self.ranked_vertices) + 1)

    def __len__(self) -> int:
        return len(self.ranked_vertices)


def load_embeddings(path: str | Path, vertices) -> EmbeddingStore:
    """Read ``vertex<TAB>f1 f2 ... fdim`` lines for every vertex of ``vertices``.

    ``vertices`` is a Graph, a binary tree, or a sequence of vertex names; file
    tokens are matched against those names.
    """
    names = _names_of(vertices)
    index = {name: i for i, name in enumerate(names)}
    rows: dict[int, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            name, values = fields[0], fields[1:]
            if name not in index:
                raise EmbeddingFormatError(f"{path}:{lineno}: unknown vertex {name!r}")
            try:
                vec = np.array([float(x) for x in values])
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric embedding value") from None
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(f"{path}:{lineno}: non-finite embedding value")
            if dim is None:
                dim = len(vec)
                if dim == 0:
                    raise EmbeddingFormatError(f"{path}:{lineno}: empty embedding")
            elif len(vec) != dim:
                raise EmbeddingFormatError(f"{path}:{lineno}: expected {dim} values, got {len(vec)}")
            rows[index[name]] = vec
    missing = [names[i] for i in range(len(names)) if i not in rows]
    if missing:
        shown = ", ".join(missing[:20]) + (" ..." if len(missing) > 20 else "")
        raise EmbeddingFormatError(f"{path}: missing embeddings for vertices: {shown}")
    return EmbeddingStore(np.vstack([rows[i] for i in range(len(names))]))


def save_embeddings(path: str | Path, store: EmbeddingStore, names: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name, vec in zip(names, store.vectors):
            fh.write(name + "\t" + " ".join(repr(float(x)) for x in vec) + "\n")


def community_embedding(store: EmbeddingStore, vertices: Iterable[int]) -> np.ndarray:
    """Mean embedding of a community."""
    idx = np.fromiter(vertices, dtype=int)
    if idx.size == 0:
        raise ValueError("community is empty")
    return store.vectors[idx].mean(axis=0)


def attach_embeddings(tb, store: EmbeddingStore) -> None:
    """Fill every binary-tree node's embedding with its community mean."""
    for nd in tb.nodes:
        nd.embedding = community_embedding(store, nd.vertices)


def vertex_query_need(store: EmbeddingStore, query: Mapping[int, float] | Sequence[tuple[int, float]]) -> UserNeed:
    """Need vector from a weighted vertex history (e.g. listen counts)."""
    items = list(query.items()) if isinstance(query, Mapping) else list(query)
    if not items:
        raise ValueError("vertex query is empty")
    merged: dict[int, float] = {}
    for v, count in items:
        v, count = int(v), float(count)
        if not 0 <= v < len(store):
            raise ValueError(f"unknown vertex {v}")
        if not count > 0:
            raise ValueError(f"query count for vertex {v} must be positive")
        merged[v] = merged.get(v, 0.0) + count
    total = sum(merged.values())
    weights = tuple((v, c / total) for v, c in sorted(merged.items()))
    vector = np.zeros(store.dim)
    for v, p in weights:
        vector += p * store.vectors[v]
    return UserNeed(vector, vertex_weights=weights)


def tokenize(text: str) -> list[str]:
    return text.lower().split()


@dataclass
class DocumentStore:
    """Per-vertex term counts with Dirichlet-smoothed query likelihood."""

    docs: dict[int, Counter]
    mu: float = DEFAULT_MU
    collection_counts: Counter = field(init=False)
    collection_total: int = field(init=False)

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        self.collection_counts = Counter()
        for tf in self.docs.values():
            self.collection_counts.update(tf)
        self.collection_total = sum(self.collection_counts.values())
        self._doc_len = {v: sum(tf.values()) for v, tf in self.docs.items()}

    @property
    def floor(self) -> float:
        return 1.0 / (self.collection_total + len(self.collection_counts))

    def collection_prob(self, term: str) -> float:
        count = self.collection_counts.get(term, 0)
        if count == 0 or self.collection_total == 0:
            return self.floor
        return count / self.collection_total

    def log_likelihood(self, v: int, query: Sequence[str]) -> float:
        if not query:
            raise ValueError("query is empty")
        tf = self.docs.get(v, Counter())
        denom = math.log(self._doc_len.get(v, 0) + self.mu)
        return sum(math.log(tf.get(w, 0) + self.mu * self.collection_prob(w)) - denom for w in query)


def dirichlet_query_likelihood(ds: DocumentStore, v: int, query: Sequence[str]) -> float:
    """``prod_w (tf(w, v) + mu p(w|C)) / (|doc_v| + mu)`` evaluated in log space."""
    return math.exp(ds.log_likelihood(v, query))


def load_documents(path: str | Path, vertices, mu: float = DEFAULT_MU) -> DocumentStore:
    """Read ``vertex<TAB>term:count,term:count,...`` lines."""
    index = {name: i for i, name in enumerate(_names_of(vertices))}
    docs: dict[int, Counter] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            name, _, body = line.partition("\t")
            name = name.strip()
            if name not in index:
                raise EmbeddingFormatError(f"{path}:{lineno}: unknown vertex {name!r}")
            tf = docs.setdefault(index[name], Counter())
            for item in filter(None, (x.strip() for x in body.split(","))):
                term, sep, count = item.rpartition(":")
                try:
                    n = int(count)
                except ValueError:
                    n = -1
                if not sep or not term or n < 0:
                    raise EmbeddingFormatError(f"{path}:{lineno}: bad term entry {item!r}")
                tf[term.lower()] += n
    return DocumentStore(docs, mu=mu)


def text_query_need(store: EmbeddingStore, ds: DocumentStore, query: str | Sequence[str],
                    t: int = DEFAULT_TEXT_CANDIDATES) -> UserNeed:
    """Likelihood-weighted mean embedding of the top-``t`` documents for a text query."""
    terms = tokenize(query) if isinstance(query, str) else [w.lower() for w in query]
    if not terms:
        raise ValueError("text query is empty")
    candidates = sorted(ds.docs)
    if not candidates:
        raise ValueError("document store is empty")
    logl = np.array([ds.log_likelihood(v, terms) for v in candidates])
    order = np.lexsort((np.array(candidates), -logl))[:t]
    top = np.array(candidates)[order]
    # normalizing in log space keeps long queries from underflowing
    weights = np.exp(logl[order] - logl[order].max())
    if not np.all(np.isfinite(weights)) or weights.sum() <= 0:
        raise ValueError("all query likelihoods are zero")
    weights /= weights.sum()
    vector = weights @ store.vectors[top]
    text = query if isinstance(query, str) else " ".join(query)
    return UserNeed(vector, vertex_weights=tuple(zip(top.tolist(), weights.tolist())), text=text)


def cosine_to_rows(vector: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Cosine of ``vector`` with each row; 0 wherever either norm is 0."""
    norms = np.linalg.norm(matrix, axis=1) * np.linalg.norm(vector)
    dots = matrix @ vector
    out = np.zeros(len(matrix))
    ok = norms > 0
    out[ok] = dots[ok] / norms[ok]
    return out


def pseudo_ground_truth(store: EmbeddingStore, need: UserNeed | np.ndarray, n: int) -> PseudoGroundTruth:
    """Top-``n`` vertices by cosine with the need (ties: smaller id first)."""
    if not 1 <= n <= len(store):
        raise ValueError(f"n must be between 1 and {len(store)}")
    vec = need.vector if isinstance(need, UserNeed) else np.asarray(need, dtype=float)
    cos = cosine_to_rows(vec, store.vectors)
    order = np.lexsort((np.arange(len(store)), -cos))[:n]
    return PseudoGroundTruth(tuple(int(v) for v in order))
