"""The online step: evolve cut-link chromosomes into a personalized partition."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .config import GeneticConfig
from .genetic import FitnessContext, Partition, ScoredChromosome, decode, init_population
from .parallel import ShardRuntime
from .representation import EmbeddingStore, PseudoGroundTruth, UserNeed
from .tree import BinaryCommunityTree, eligible_links


@dataclass
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_ever: float
    evaluations: int
    timings: dict[str, float]


@dataclass
class EvolutionResult:
    best: ScoredChromosome
    partition: Partition
    history: list[GenerationStats] = field(default_factory=list)
    final_population: list[ScoredChromosome] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def fitness(self) -> float:
        return self.best.fitness


def evolve(tb: BinaryCommunityTree, need: UserNeed, store: EmbeddingStore, gt: PseudoGroundTruth,
           cfg: GeneticConfig, workers: int = 1) -> EvolutionResult:
    """Run ``cfg.iterations`` generations and return the best chromosome ever scored.

    Each generation scores the population, selects with elitism and breeds the
    next one; the offspring of the last generation are scored as well before
    the best is reported.
    """
    start = time.perf_counter()
    population = init_population(tb, cfg)
    ctx = FitnessContext(tb, store, need, gt, cfg.lam, cfg.fitness)
    best: ScoredChromosome | None = None
    history: list[GenerationStats] = []

    def track(scored: list[ScoredChromosome]) -> ScoredChromosome:
        nonlocal best
        top = max(scored, key=lambda s: s.fitness)
        if best is None or top.fitness > best.fitness:
            best = top
        return top

    with ShardRuntime(ctx, eligible_links(tb, cfg.depth), cfg, workers) as runtime:
        for generation in range(cfg.iterations):
            result = runtime.run_generation(population, generation)
            top = track(result.scored)
            history.append(GenerationStats(
                generation=generation,
                best_fitness=top.fitness,
                mean_fitness=float(np.mean([s.fitness for s in result.scored])),
                best_ever=best.fitness,
                evaluations=result.evaluations,
                timings=result.timings,
            ))
            population = result.next_population
        final, _ = runtime.evaluate(population)
        track(final)

    return EvolutionResult(best, decode(best.genes, tb, cfg.depth), history, final,
                           time.perf_counter() - start)
