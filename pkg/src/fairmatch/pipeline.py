"""End-to-end solve on an arbitrary bipartite graph, reported in its own vertex ids."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .blockdist import BlockDistribution, block_distributions
from .decomposition import Block, CertificateReport, FairDecomposition, Violation, fair_decomposition, verify_certificate
from .distribution import CoverageProfile, MatchingDistribution, merge_small_support
from .graph import BipartiteGraph, ReductionCase, ReductionReport, reduce_to_one_sided


@dataclass(eq=False)
class FairSolution:
    """Fair decomposition of ``graph`` plus lazily built distributions.

    ``working_graph`` is the trimmed one-sided instance (relabelled);
    ``left_map``/``right_map`` send its ids back to ``graph``.
    """

    graph: BipartiteGraph
    reduction: ReductionReport
    working_graph: BipartiteGraph
    local: FairDecomposition
    fast: bool = field(default=True, repr=False)

    @property
    def left_map(self) -> np.ndarray:
        return self.reduction.left_map

    @property
    def right_map(self) -> np.ndarray:
        return self.reduction.right_map

    @cached_property
    def decomposition(self) -> FairDecomposition:
        return self.local.relabel(self.left_map, self.right_map)

    @cached_property
    def probabilities(self) -> CoverageProfile:
        """Satisfaction probability of every user; users without edges get 0."""
        prof = dict.fromkeys(range(self.graph.n_left), Fraction(0))
        prof.update(self.decomposition.probability)
        return prof

    @cached_property
    def block_distributions(self) -> list[BlockDistribution]:
        local = block_distributions(self.working_graph, self.local, self.fast)
        return [b.relabel(self.left_map, self.right_map) for b in local]

    @cached_property
    def distribution(self) -> MatchingDistribution:
        return merge_small_support(self.block_distributions)


def _working_graph(graph: BipartiteGraph, report: ReductionReport) -> BipartiteGraph:
    if report.case is ReductionCase.CANONICAL:
        return report.canonical_graph
    return graph.induced(report.left_map, report.right_map)


def solve(graph: BipartiteGraph, fast: bool = True) -> FairSolution:
    report = reduce_to_one_sided(graph)
    work = _working_graph(graph, report)
    if report.case is ReductionCase.ALL_MATCHABLE:
        local = FairDecomposition(
            (Block(frozenset(range(work.n_left)), Fraction(1), frozenset(range(work.n_right))),)
            if work.n_left else ())
    else:
        local = fair_decomposition(work, check=False)
    return FairSolution(graph, report, work, local, fast)


def verify_against_graph(graph: BipartiteGraph, decomposition: FairDecomposition) -> CertificateReport:
    """Certificate check of a decomposition given in ``graph``'s ids.

    The graph is reduced first; vertices outside the reduced instance are
    reported as partition or reserved-set violations.
    """
    report = reduce_to_one_sided(graph)
    work = _working_graph(graph, report)
    inv_l = {int(u): i for i, u in enumerate(report.left_map)}
    inv_r = {int(v): i for i, v in enumerate(report.right_map)}
    out = CertificateReport()
    blocks = []
    for i, b in enumerate(decomposition.blocks):
        bad_l = sorted(u for u in b.members if u not in inv_l)
        bad_r = sorted(v for v in b.reserved_right if v not in inv_r)
        if bad_l:
            out.add(Violation.PARTITION, i, f"users {[u + 1 for u in bad_l]} cannot be matched")
        if bad_r:
            out.add(Violation.RESERVED, i, f"positions {[v + 1 for v in bad_r]} are not covered by a maximum matching")
        members = frozenset(inv_l[u] for u in b.members if u in inv_l)
        if members:
            blocks.append(Block(members, b.lam, frozenset(inv_r[v] for v in b.reserved_right if v in inv_r)))
    if out.findings:
        return out
    return verify_certificate(work, FairDecomposition(tuple(blocks)))
