"""Personalized community detection by genetic pruning of a binary community tree."""

from .config import GeneticConfig, InfeasibleConfigError
from .engine import EvolutionResult, evolve
from .genetic import ROOT, Partition, ScoredChromosome, decode, validate
from .graph import Graph, edges_between, load_graph, out_degree
from .hierarchy import CommunityTree, detect_flat, detect_hierarchy
from .mapequation import FlatPartition, map_equation, visit_rates
from .representation import (DocumentStore, EmbeddingStore, PseudoGroundTruth, UserNeed,
                             load_embeddings, pseudo_ground_truth, text_query_need,
                             vertex_query_need)
from .tree import BinaryCommunityTree, binarize, eligible_links

__version__ = "0.1.0"

__all__ = [
    "ROOT", "BinaryCommunityTree", "CommunityTree", "DocumentStore", "EmbeddingStore", "EvolutionResult",
    "FlatPartition", "GeneticConfig", "Graph", "InfeasibleConfigError", "Partition", "PseudoGroundTruth",
    "ScoredChromosome", "UserNeed", "binarize", "decode", "detect_flat", "detect_hierarchy", "edges_between",
    "eligible_links", "evolve", "load_embeddings", "load_graph", "map_equation", "out_degree",
    "pseudo_ground_truth", "text_query_need", "validate", "vertex_query_need", "visit_rates",
]
