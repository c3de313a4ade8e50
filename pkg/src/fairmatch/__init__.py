"""Maxmin-fair one-sided bipartite matching with exact rational probabilities."""

from .blockdist import BlockDistribution, EdgeAssignment, block_distributions, edge_assignment, edge_assignments
from .decomposition import Block, FairDecomposition, fair_decomposition, verify_certificate
from .distribution import MatchingDistribution, coverage, merge_small_support, sample_product
from .graph import BipartiteGraph, Matching, load_edge_list, maximum_matching, reduce_to_one_sided
from .pipeline import FairSolution, solve

__all__ = [
    "BipartiteGraph", "Block", "BlockDistribution", "EdgeAssignment", "FairDecomposition", "FairSolution",
    "Matching", "MatchingDistribution", "block_distributions", "coverage", "edge_assignment",
    "edge_assignments", "fair_decomposition", "load_edge_list", "maximum_matching", "merge_small_support",
    "reduce_to_one_sided", "sample_product", "solve", "verify_certificate",
]
