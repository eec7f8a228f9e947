"""Sharded execution of one genetic generation.

The dataflow mirrors a MapReduce job: chromosomes are split into M shards by
content hash, mappers score their shard, a single combiner selects over the
whole population, and M reducers breed the selected pairs. Every random draw
comes from a stream keyed by (seed, generation, role, index), so the result is
identical for any shard count and worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .config import GeneticConfig
from .genetic import (ROLE_SELECT, Chromosome, FitnessContext, ScoredChromosome, breed_pair,
                      canonical, select, stream)
from .tree import eligible_links

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK
    return h


def stable_hash(genes: Sequence[str]) -> int:
    """Order-independent 64-bit hash of a chromosome's gene codes."""
    return fnv1a_64(",".join(canonical(genes)).encode("ascii"))


def shard_plan(population: Sequence[Chromosome], shards: int) -> list[int]:
    return [stable_hash(ch) % shards for ch in population]


@dataclass
class GenerationResult:
    scored: list[ScoredChromosome]
    next_population: list[Chromosome]
    timings: dict[str, float] = field(default_factory=dict)
    evaluations: int = 0


# worker-process state, installed once per pool
_WORKER: dict = {}


def _init_worker(ctx: FitnessContext, links: Sequence[str], cfg: GeneticConfig) -> None:
    _WORKER.update(ctx=ctx, links=list(links), cfg=cfg)


def _map_shard(keys: list[Chromosome]) -> list[ScoredChromosome]:
    ctx = _WORKER["ctx"]
    return [ctx.score(k) for k in keys]


def _reduce_shard(generation: int, jobs: list[tuple[int, Chromosome, Chromosome | None]]):
    links, cfg = _WORKER["links"], _WORKER["cfg"]
    return [(j, breed_pair(j, a, b, links, cfg, generation)) for j, a, b in jobs]


class ShardRuntime:
    """Runs generations with ``cfg.shards`` logical shards on ``workers`` processes.

    Fitness values are cached by canonical gene set for the runtime's lifetime.
    """

    def __init__(self, ctx: FitnessContext, links: Sequence[str], cfg: GeneticConfig, workers: int = 1):
        if workers < 1:
            raise ValueError("workers must be positive")
        self.ctx = ctx
        self.links = list(links)
        self.cfg = cfg
        self.workers = workers
        self.cache: dict[Chromosome, ScoredChromosome] = {}
        self._pool: ProcessPoolExecutor | None = None

    def __enter__(self) -> "ShardRuntime":
        if self.workers > 1:
            self._pool = ProcessPoolExecutor(self.workers, initializer=_init_worker,
                                             initargs=(self.ctx, self.links, self.cfg))
        else:
            _init_worker(self.ctx, self.links, self.cfg)
        return self

    def __exit__(self, *exc) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def _run(self, fn, tasks: list[tuple]) -> list:
        if self._pool is None:
            return [fn(*t) for t in tasks]
        return list(self._pool.map(fn, *zip(*tasks))) if tasks else []

    def evaluate(self, population: Sequence[Chromosome]) -> tuple[list[ScoredChromosome], int]:
        """Map phase: score every chromosome; returns the scores and the fresh evaluation count."""
        plan = shard_plan(population, self.cfg.shards)
        pending: list[list[Chromosome]] = [[] for _ in range(self.cfg.shards)]
        queued: set[Chromosome] = set()
        for ch, shard in zip(population, plan):
            key = canonical(ch)
            if key not in self.cache and key not in queued:
                queued.add(key)
                pending[shard].append(key)
        tasks = [(keys,) for keys in pending if keys]
        fresh = 0
        for results in self._run(_map_shard, tasks):
            for s in results:
                self.cache[s.genes] = s
                fresh += 1
        scored = []
        for ch in population:
            hit = self.cache[canonical(ch)]
            scored.append(ScoredChromosome(tuple(ch), hit.fitness, hit.selection_order))
        return scored, fresh

    def breed(self, selected: Sequence[Chromosome], generation: int) -> list[Chromosome]:
        """Reduce phase: pairs (0,1), (2,3), ... spread round-robin over the reducers."""
        jobs = []
        for j in range((len(selected) + 1) // 2):
            a = selected[2 * j]
            b = selected[2 * j + 1] if 2 * j + 1 < len(selected) else None
            jobs.append((j, a, b))
        reducers: list[list] = [[] for _ in range(self.cfg.shards)]
        for job in jobs:
            reducers[job[0] % self.cfg.shards].append(job)
        tasks = [(generation, r) for r in reducers if r]
        children: dict[int, list[Chromosome]] = {}
        for results in self._run(_reduce_shard, tasks):
            children.update(results)
        return [ch for j in range(len(jobs)) for ch in children[j]]

    def run_generation(self, population: Sequence[Chromosome], generation: int) -> GenerationResult:
        t0 = time.perf_counter()
        scored, fresh = self.evaluate(population)
        t1 = time.perf_counter()
        selected = select(scored, stream(self.cfg.seed, generation, ROLE_SELECT, 0))
        t2 = time.perf_counter()
        offspring = self.breed(selected, generation)
        t3 = time.perf_counter()
        return GenerationResult(scored, offspring,
                                {"map": t1 - t0, "combine": t2 - t1, "reduce": t3 - t2}, fresh)


def run_generation(population, tb, need, store, gt, cfg: GeneticConfig, generation: int = 0,
                   workers: int = 1) -> GenerationResult:
    """One generation from scratch (no fitness cache carried over)."""
    ctx = FitnessContext(tb, store, need, gt, cfg.lam, cfg.fitness)
    with ShardRuntime(ctx, eligible_links(tb, cfg.depth), cfg, workers) as rt:
        return rt.run_generation(population, generation)
