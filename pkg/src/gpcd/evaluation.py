"""Pair-counting partition metrics and the synthetic hierarchical benchmark."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graph import Graph
from .hierarchy import CommunityTree
from .representation import EmbeddingStore, UserNeed, vertex_query_need

log = logging.getLogger(__name__)

MAX_RESAMPLES = 20


@dataclass(frozen=True)
class GroundTruth:
    communities: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        comms = tuple(tuple(sorted(int(v) for v in c)) for c in self.communities)
        seen: set[int] = set()
        for c in comms:
            if not c:
                raise ValueError("ground-truth communities must be non-empty")
            if seen.intersection(c):
                raise ValueError("ground-truth communities overlap")
            seen.update(c)
        object.__setattr__(self, "communities", comms)

    @property
    def vertices(self) -> list[int]:
        return sorted(v for c in self.communities for v in c)

    def labels(self) -> dict[int, int]:
        return {v: i for i, c in enumerate(self.communities) for v in c}


@dataclass(frozen=True)
class MetricsReport:
    f1: float
    rand: float
    jaccard: float
    pair_counts: tuple[int, int, int, int]

    def as_dict(self) -> dict:
        tp, fp, fn, tn = self.pair_counts
        return {"f1": self.f1, "rand": self.rand, "jaccard": self.jaccard,
                "tp": tp, "fp": fp, "fn": fn, "tn": tn}


def _label_lookup(pred) -> Mapping[int, object] | Sequence:
    labels = getattr(pred, "labels", pred)
    return labels if isinstance(labels, Mapping) else list(labels)


def pairwise_metrics(pred, gt: GroundTruth) -> MetricsReport:
    """Pair-counting F1, Rand and Jaccard over the vertices covered by ``gt``.

    ``pred`` is a decoded partition, a vertex->label mapping, or a label
    sequence indexed by vertex id. Ratios whose denominator is zero are 1.
    """
    lookup = _label_lookup(pred)
    truth = gt.labels()
    verts = gt.vertices
    plabels = []
    for v in verts:
        try:
            plabels.append(lookup[v])
        except (KeyError, IndexError):
            raise ValueError(f"ground-truth vertex {v} is missing from the prediction") from None
    _, p = np.unique(np.array(plabels, dtype=object).astype(str), return_inverse=True)
    t = np.array([truth[v] for v in verts])
    table = np.zeros((t.max() + 1 if len(t) else 0, p.max() + 1 if len(p) else 0), dtype=np.int64)
    np.add.at(table, (t, p), 1)

    def pairs(x):
        x = np.asarray(x, dtype=np.int64)
        return int((x * (x - 1) // 2).sum())

    n = len(verts)
    total = n * (n - 1) // 2
    tp = pairs(table)
    same_pred = pairs(table.sum(axis=0))
    same_truth = pairs(table.sum(axis=1))
    fp, fn = same_pred - tp, same_truth - tp
    tn = total - tp - fp - fn
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 1.0
    rand = (tp + tn) / total if total else 1.0
    jaccard = tp / (tp + fp + fn) if tp + fp + fn else 1.0
    return MetricsReport(f1, rand, jaccard, (tp, fp, fn, tn))


@dataclass
class SyntheticBenchmark:
    graph: Graph
    embeddings: EmbeddingStore
    planted_tree: CommunityTree
    need: UserNeed
    personalized_gt: GroundTruth
    block_of: np.ndarray
    subblock_of: np.ndarray
    target_subblock: int

    @property
    def target_block(self) -> int:
        return int(self.block_of[self.subblock_of == self.target_subblock][0])


def generate_benchmark(blocks: int = 4, subblocks_per_block: int = 4, vertices_per_subblock: int = 8,
                       p_in_sub: float = 0.6, p_in_block: float = 0.1, p_cross: float = 0.01,
                       noise: float = 0.05, seed: int = 0, target_subblock: int | None = None
                       ) -> SyntheticBenchmark:
    """Two-level planted block graph with block/sub-block indicator embeddings.

    The user need is the embedding centroid of one sub-block (drawn from the
    seed unless given); the personalized ground truth is the set of sub-blocks
    of that sub-block's block.
    """
    if min(blocks, subblocks_per_block, vertices_per_subblock) < 1:
        raise ValueError("benchmark shape parameters must be positive")
    if not 1 >= p_in_sub > p_in_block > p_cross >= 0:
        raise ValueError("probabilities must satisfy 1 >= p_in_sub > p_in_block > p_cross >= 0")
    if noise < 0:
        raise ValueError("noise must be non-negative")
    n_sub = blocks * subblocks_per_block
    n = n_sub * vertices_per_subblock
    sub_of = np.arange(n) // vertices_per_subblock
    block_of = sub_of // subblocks_per_block
    rng = np.random.default_rng(seed)

    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(sub_of[iu] == sub_of[ju], p_in_sub,
                    np.where(block_of[iu] == block_of[ju], p_in_block, p_cross))
    expected_components = 1 if p_cross > 0 else blocks
    for attempt in range(MAX_RESAMPLES):
        hit = rng.random(len(iu)) < prob
        graph = Graph(n, zip(iu[hit].tolist(), ju[hit].tolist()))
        if len(graph.connected_components()) <= expected_components:
            break
        log.debug("benchmark realization %d disconnected, resampling", attempt)
    else:
        raise RuntimeError(f"no connected realization in {MAX_RESAMPLES} attempts")

    vectors = np.zeros((n, blocks + n_sub))
    vectors[np.arange(n), block_of] = 1.0
    vectors[np.arange(n), blocks + sub_of] = 1.0
    if noise > 0:
        vectors += rng.normal(0.0, noise, size=vectors.shape)
    store = EmbeddingStore(vectors)

    tree = CommunityTree.single(range(n))
    for b in range(blocks):
        bi = tree.add_child(tree.root, np.flatnonzero(block_of == b).tolist())
        for s in range(b * subblocks_per_block, (b + 1) * subblocks_per_block):
            tree.add_child(bi, np.flatnonzero(sub_of == s).tolist())

    target = int(rng.integers(n_sub)) if target_subblock is None else int(target_subblock)
    if not 0 <= target < n_sub:
        raise ValueError(f"target_subblock must lie in 0..{n_sub - 1}")
    need = vertex_query_need(store, {int(v): 1.0 for v in np.flatnonzero(sub_of == target)})
    tb = target // subblocks_per_block
    gt = GroundTruth(tuple(tuple(np.flatnonzero(sub_of == s).tolist())
                           for s in range(tb * subblocks_per_block, (tb + 1) * subblocks_per_block)))
    return SyntheticBenchmark(graph, store, tree, need, gt, block_of, sub_of, target)
