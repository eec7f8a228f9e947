"""Run parameters for the online genetic step."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

# "eq9" selects the normalized rank-product score, "kendall" selects Kendall tau-b
FITNESS_VARIANTS = ("eq9", "kendall")


class InfeasibleConfigError(ValueError):
    """The requested K, d combination admits no valid chromosome on this tree."""


@dataclass(frozen=True)
class GeneticConfig:
    population: int = 100
    communities: int = 50
    depth: int = 10
    iterations: int = 30
    lam: float = 0.6
    crossover_rate: float = 0.95
    mutation_rate: float = 0.01
    shards: int = 50
    top_n: int = 10
    seed: int = 0
    fitness: str = "eq9"

    def __post_init__(self):
        for name in ("population", "communities", "depth", "iterations", "shards", "top_n"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("lam", "crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.fitness not in FITNESS_VARIANTS:
            raise ValueError(f"fitness must be one of {FITNESS_VARIANTS}")

    @property
    def genes(self) -> int:
        return self.communities - 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GeneticConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    def replace(self, **changes) -> "GeneticConfig":
        return GeneticConfig(**{**asdict(self), **changes})
