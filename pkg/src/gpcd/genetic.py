"""Cut-link chromosomes over the binary community tree and their genetic operators.

A chromosome is a tuple of K-1 link codes. Cutting a link turns the pointed-to
node into a community; a nested cut carves its vertices out of the enclosing
cut's community, and vertices under no cut form the residual ROOT community.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import kendalltau

from .config import GeneticConfig, InfeasibleConfigError
from .representation import EmbeddingStore, PseudoGroundTruth, UserNeed, cosine_to_rows
from .tree import BinaryCommunityTree, code_order, eligible_links, sibling

ROOT = "ROOT"

# stream roles for keyed random generators
ROLE_INIT = 0
ROLE_SELECT = 1
ROLE_REDUCE = 2

Chromosome = tuple[str, ...]


def stream(seed: int, generation: int, role: int, index: int) -> np.random.Generator:
    """Independent generator for one (seed, generation, role, index) cell."""
    return np.random.default_rng([seed, generation, role, index])


def canonical(genes: Sequence[str]) -> Chromosome:
    return tuple(sorted(genes, key=code_order))


@dataclass(frozen=True)
class Partition:
    labels: tuple[str, ...]
    communities: tuple[tuple[str, np.ndarray], ...]

    def __len__(self) -> int:
        return len(self.communities)

    def as_dict(self) -> dict[int, str]:
        return dict(enumerate(self.labels))


@dataclass(frozen=True)
class ScoredChromosome:
    genes: Chromosome
    fitness: float
    selection_order: tuple[str, ...]


def validate(genes: Sequence[str], tb: BinaryCommunityTree, d: int | None = None) -> bool:
    """True iff every gene is a distinct, in-depth tree link and no two genes are siblings."""
    d = tb.depth_bound if d is None else d
    seen = set()
    for code in genes:
        if not code or len(code) > d or code not in tb.code_index:
            return False
        if code in seen or sibling(code) in seen:
            return False
        seen.add(code)
    return True


def decode(genes: Sequence[str], tb: BinaryCommunityTree, d: int | None = None) -> Partition:
    """Label vertices by applying cuts in ascending code order, later cuts overwriting."""
    if not validate(genes, tb, d):
        raise ValueError(f"invalid chromosome {tuple(genes)!r}")
    cuts = canonical(genes)
    labels = np.full(tb.num_vertices, -1, dtype=int)
    for j, code in enumerate(cuts):
        labels[tb.node(code).vertices] = j
    names = [*cuts, ROOT]
    communities = []
    for j, name in enumerate(names):
        members = np.flatnonzero(labels == (j if j < len(cuts) else -1))
        if members.size:
            communities.append((name, members))
    return Partition(tuple(names[j] for j in labels), tuple(communities))


def link_capacity(links: Sequence[str]) -> int:
    """Largest number of mutually compatible links: at most one per sibling pair."""
    pairs = {code[:-1] for code in links}
    return len(pairs)


def init_population(tb: BinaryCommunityTree, cfg: GeneticConfig) -> list[Chromosome]:
    """``cfg.population`` random valid chromosomes.

    Links are drawn uniformly; a draw equal to or sibling of an accepted gene is
    rejected. Scanning a random permutation of the eligible links does exactly
    that without redrawing rejected links.
    """
    links = eligible_links(tb, cfg.depth)
    capacity = link_capacity(links)
    if cfg.genes > capacity:
        raise InfeasibleConfigError(
            f"K-1={cfg.genes} cut links requested but only {capacity} compatible links exist within depth {cfg.depth}")
    population = []
    for i in range(cfg.population):
        rng = stream(cfg.seed, 0, ROLE_INIT, i)
        genes: list[str] = []
        used: set[str] = set()
        for j in rng.permutation(len(links)):
            if len(genes) == cfg.genes:
                break
            code = links[j]
            if sibling(code) in used:
                continue
            genes.append(code)
            used.add(code)
        population.append(tuple(genes))
    return population


def greedy_order(relevance: np.ndarray, similarity: np.ndarray, lam: float) -> list[int]:
    """Pick order maximizing ``lam * relevance - (1 - lam) * mean similarity to picked``.

    Ties go to the lower index, so callers order candidates by code.
    """
    k = len(relevance)
    picked = np.zeros(k, dtype=bool)
    redundancy = np.zeros(k)
    order = []
    for step in range(k):
        score = lam * relevance
        if step:
            score = score - (1.0 - lam) * redundancy / step
        score = np.where(picked, -np.inf, score)
        i = int(np.argmax(score))
        order.append(i)
        picked[i] = True
        redundancy += similarity[i]
    return order


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return np.divide(matrix, norms, out=np.zeros_like(matrix), where=norms > 0)


def greedy_rank_communities(partition: Partition, need: UserNeed, store: EmbeddingStore,
                            lam: float) -> list[str]:
    """Community codes in the order a relevance-seeking, redundancy-averse user picks them."""
    comms = sorted(partition.communities, key=lambda c: c[0])
    means = np.vstack([store.vectors[members].mean(axis=0) for _, members in comms])
    relevance = cosine_to_rows(need.vector, means)
    unit = _unit_rows(means)
    order = greedy_order(relevance, unit @ unit.T, lam)
    return [comms[i][0] for i in order]


def community_rank_labels(order: Sequence[str], partition: Partition, gt: PseudoGroundTruth) -> np.ndarray:
    """Competition rank of each ground-truth vertex by when its community gets picked."""
    position = {code: i for i, code in enumerate(order)}
    delta = np.array([position[partition.labels[v]] for v in gt.ranked_vertices])
    return competition_ranks(delta)


def competition_ranks(delta: np.ndarray) -> np.ndarray:
    """``rank_k = #{j : delta_j < delta_k} + 1``."""
    return np.searchsorted(np.sort(delta), delta, side="left") + 1


def rank_product_score(community_ranks: np.ndarray, query_ranks: np.ndarray) -> float:
    """``1 - sum(c*q) / (sum(c^2) * sum(q^2))``."""
    c = np.asarray(community_ranks, dtype=float)
    q = np.asarray(query_ranks, dtype=float)
    return float(1.0 - np.dot(c, q) / (np.dot(c, c) * np.dot(q, q)))


def kendall_score(community_ranks: np.ndarray, query_ranks: np.ndarray) -> float:
    """Kendall tau-b; undefined cases (constant input, n=1) score 0."""
    if len(community_ranks) < 2:
        return 0.0
    tau = kendalltau(community_ranks, query_ranks).statistic
    return 0.0 if np.isnan(tau) else float(tau)


class FitnessContext:
    """Precomputed tree/embedding data for scoring chromosomes quickly.

    Community means come from subtree embedding sums: a cut's community is its
    node sum minus the sums of the nearest cuts below it.
    """

    def __init__(self, tb: BinaryCommunityTree, store: EmbeddingStore, need: UserNeed,
                 gt: PseudoGroundTruth, lam: float = 0.6, fitness: str = "eq9"):
        if len(store) != tb.num_vertices:
            raise ValueError("embedding store and tree disagree on the vertex count")
        self.lam = lam
        self.scorer = rank_product_score if fitness == "eq9" else kendall_score
        vectors = store.vectors
        self.node_sum = {nd.code: vectors[nd.vertices].sum(axis=0) for nd in tb.nodes}
        self.node_size = {nd.code: len(nd.vertices) for nd in tb.nodes}
        self.need = need.vector
        self.query_ranks = gt.labels
        # candidate cut codes for each ground-truth vertex, deepest first
        self.gt_prefixes = []
        for v in gt.ranked_vertices:
            leaf = tb.leaf_code(v)
            self.gt_prefixes.append([leaf[:k] for k in range(len(leaf), 0, -1)])

    def communities(self, genes: Sequence[str]) -> tuple[list[str], np.ndarray, np.ndarray]:
        cuts = canonical(genes)
        cutset = set(cuts)
        sums = {ROOT: self.node_sum[""].copy()}
        sizes = {ROOT: self.node_size[""]}
        for code in cuts:
            sums[code] = self.node_sum[code].copy()
            sizes[code] = self.node_size[code]
        for code in cuts:
            parent = next((code[:k] for k in range(len(code) - 1, 0, -1) if code[:k] in cutset), ROOT)
            sums[parent] -= self.node_sum[code]
            sizes[parent] -= self.node_size[code]
        codes = sorted(c for c in sums if sizes[c] > 0)
        counts = np.array([sizes[c] for c in codes], dtype=float)
        means = np.vstack([sums[c] for c in codes]) / counts[:, None]
        return codes, means, counts

    def label_of_gt(self, cutset: set[str]) -> list[str]:
        return [next((p for p in prefixes if p in cutset), ROOT) for prefixes in self.gt_prefixes]

    def score(self, genes: Sequence[str]) -> ScoredChromosome:
        codes, means, _ = self.communities(genes)
        relevance = cosine_to_rows(self.need, means)
        unit = _unit_rows(means)
        order = greedy_order(relevance, unit @ unit.T, self.lam)
        position = {codes[i]: step for step, i in enumerate(order)}
        delta = np.array([position[c] for c in self.label_of_gt(set(genes))])
        fitness = self.scorer(competition_ranks(delta), self.query_ranks)
        return ScoredChromosome(tuple(genes), fitness, tuple(codes[i] for i in order))


def fitness(genes: Sequence[str], tb: BinaryCommunityTree, need: UserNeed, store: EmbeddingStore,
            gt: PseudoGroundTruth, lam: float = 0.6, variant: str = "eq9") -> ScoredChromosome:
    """Score one chromosome by how well its community pick order ranks the pseudo ground truth."""
    if not validate(genes, tb, d=tb.max_depth()):
        raise ValueError(f"invalid chromosome {tuple(genes)!r}")
    return FitnessContext(tb, store, need, gt, lam, variant).score(genes)


def selection_probabilities(fitnesses: Sequence[float]) -> np.ndarray:
    f = np.asarray(fitnesses, dtype=float)
    e = np.exp(f - f.max())
    return e / e.sum()


def select(scored: Sequence[ScoredChromosome], rng: np.random.Generator) -> list[Chromosome]:
    """Softmax fitness-proportionate sampling with replacement; slot 0 keeps the best."""
    fits = [s.fitness for s in scored]
    picks = rng.choice(len(scored), size=len(scored), replace=True, p=selection_probabilities(fits))
    chosen = [scored[i].genes for i in picks]
    chosen[0] = scored[int(np.argmax(fits))].genes
    return chosen


def _blocked(incoming: str, genes: list[str], position: int) -> bool:
    # against the receiver's other genes; the gene at `position` is leaving
    others = set(genes)
    others.discard(genes[position])
    return incoming in others or sibling(incoming) in others


def crossover(a: Sequence[str], b: Sequence[str], rate: float,
              rng: np.random.Generator) -> tuple[Chromosome, Chromosome]:
    """Swap genes at a random subset of positions, skipping swaps that break the cutting rules."""
    k = len(a)
    if k == 0 or rng.random() >= rate:
        return tuple(a), tuple(b)
    m = int(rng.integers(1, k + 1))
    positions = rng.choice(k, size=m, replace=False)
    a, b = list(a), list(b)
    for i in positions:
        ga, gb = a[i], b[i]
        if ga == gb or _blocked(gb, a, i) or _blocked(ga, b, i):
            continue
        a[i], b[i] = gb, ga
    return tuple(a), tuple(b)


def mutate(genes: Sequence[str], links: Sequence[str], rate: float,
           rng: np.random.Generator) -> Chromosome:
    """Replace one gene by a random compatible eligible link."""
    if not genes or rng.random() >= rate:
        return tuple(genes)
    i = int(rng.integers(len(genes)))
    current = genes[i]
    others = set(genes)
    others.discard(current)
    candidates = [c for c in links if c != current and c not in others and sibling(c) not in others]
    if not candidates:
        return tuple(genes)
    out = list(genes)
    out[i] = candidates[int(rng.integers(len(candidates)))]
    return tuple(out)


def breed_pair(pair_index: int, a: Chromosome, b: Chromosome | None, links: Sequence[str],
               cfg: GeneticConfig, generation: int) -> list[Chromosome]:
    """Crossover and mutation for one pair (or a lone trailing chromosome)."""
    rng = stream(cfg.seed, generation, ROLE_REDUCE, pair_index)
    if b is None:
        return [mutate(a, links, cfg.mutation_rate, rng)]
    a, b = crossover(a, b, cfg.crossover_rate, rng)
    return [mutate(a, links, cfg.mutation_rate, rng), mutate(b, links, cfg.mutation_rate, rng)]
