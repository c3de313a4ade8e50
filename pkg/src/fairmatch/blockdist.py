"""Exact uniform distributions over l matchings for a single block.

A block with |B| members sharing |R'| reserved positions has probability
r/l where g = gcd(|B|, |R'|), r = |R'|/g and l = |B|/g. An integral flow
scaled by l gives edge multiplicities n_uv (row sums r, column sums l).
Padding with |B| - |R'| dummy positions makes the multigraph l-regular, and
peeling l perfect matchings off it yields the distribution.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from . import _kernels
from .decomposition import Block, FairDecomposition
from .graph import BipartiteGraph, Matching
from .maxflow import FlowInconsistencyError, assemble_network, integral_max_flow

log = logging.getLogger(__name__)


class RegularityError(RuntimeError):
    """A multigraph that should be regular is not, or a peel failed."""


@dataclass(frozen=True, eq=False)
class EdgeAssignment:
    """Edge multiplicities ``count`` (so ``x_uv = count / l``) for one block.

    ``members`` and ``reserved`` are sorted vertex ids in the graph the
    assignment was computed on; ``left``/``right`` are edge endpoints in the
    same ids.
    """

    block: int
    members: np.ndarray
    reserved: np.ndarray
    left: np.ndarray
    right: np.ndarray
    count: np.ndarray
    l: int
    r: int
    g: int

    @property
    def lam(self) -> Fraction:
        return Fraction(self.r, self.l)

    @property
    def x(self) -> dict[tuple[int, int], Fraction]:
        return {(u, v): Fraction(c, self.l)
                for u, v, c in zip(self.left.tolist(), self.right.tolist(), self.count.tolist()) if c}


@dataclass(frozen=True)
class RegularMultigraph:
    """Bipartite multigraph in CSR with multiplicities.

    Left rows are block members in ``members`` order. Columns
    ``0..n_real-1`` are the reserved positions, the rest are dummies.
    """

    indptr: np.ndarray
    indices: np.ndarray
    counts: np.ndarray
    n_real: int
    n_dummy: int
    degree: int
    members: np.ndarray = field(repr=False)
    reserved: np.ndarray = field(repr=False)

    @property
    def n_left(self) -> int:
        return int(self.indptr.size - 1)

    @property
    def n_right(self) -> int:
        return self.n_real + self.n_dummy


@dataclass(frozen=True)
class BlockDistribution:
    """Uniform distribution over ``matchings`` (each has weight 1/l)."""

    matchings: tuple[Matching, ...]
    r: int
    fast_path: bool = field(default=False, compare=False)

    @property
    def l(self) -> int:
        return len(self.matchings)

    @property
    def weight(self) -> Fraction:
        return Fraction(1, self.l)

    def relabel(self, left_map, right_map) -> BlockDistribution:
        return BlockDistribution(tuple(m.relabel(left_map, right_map) for m in self.matchings), self.r, self.fast_path)


def _split_sizes(n_members: int, n_reserved: int) -> tuple[int, int, int]:
    g = gcd(n_members, n_reserved)
    return g, n_reserved // g, n_members // g


def edge_assignments(graph: BipartiteGraph, decomposition: FairDecomposition) -> list[EdgeAssignment]:
    """Assignments for every block from one integral flow.

    Edges reaching a position reserved by another block are dropped, so all
    blocks live in separate components of the same network.
    """
    blocks = decomposition.blocks
    tag_l = np.full(graph.n_left, -1, dtype=np.int64)
    tag_r = np.full(graph.n_right, -1, dtype=np.int64)
    members = [np.array(sorted(b.members), dtype=np.int64) for b in blocks]
    reserved = [np.array(sorted(b.reserved_right), dtype=np.int64) for b in blocks]
    lambdas: dict[int, Fraction] = {}
    for i, b in enumerate(blocks):
        tag_l[members[i]] = i
        tag_r[reserved[i]] = i
        g, r, l = _split_sizes(len(b.members), len(b.reserved_right))
        if Fraction(r, l) != b.lam:
            raise FlowInconsistencyError(
                f"block {i}: probability {b.lam} != {len(b.reserved_right)}/{len(b.members)}")
        lambdas[i] = b.lam
    if not blocks:
        return []
    eu, ev = graph.edge_arrays()
    keep = (tag_l[eu] >= 0) & (tag_l[eu] == tag_r[ev])
    left_ids = np.concatenate(members)
    right_ids = np.concatenate(reserved)
    net = assemble_network(left_ids, tag_l[left_ids], right_ids, tag_r[right_ids], eu[keep], ev[keep], lambdas)
    flow = integral_max_flow(net)
    etag = tag_l[flow.left]
    out = []
    for i, b in enumerate(blocks):
        g, r, l = _split_sizes(len(b.members), len(b.reserved_right))
        sel = (etag == i) & (flow.flow > 0)
        out.append(EdgeAssignment(i, members[i], reserved[i], flow.left[sel], flow.right[sel],
                                  flow.flow[sel].astype(np.int64), l, r, g))
    return out


def edge_assignment(graph: BipartiteGraph, lam: Fraction, block: int = 0) -> EdgeAssignment:
    """Assignment for a graph that is exactly one block (all left vertices share ``lam``)."""
    b = Block(frozenset(range(graph.n_left)), Fraction(lam), frozenset(range(graph.n_right)))
    a = edge_assignments(graph, FairDecomposition((b,)))[0]
    return EdgeAssignment(block, a.members, a.reserved, a.left, a.right, a.count, a.l, a.r, a.g)


def _local_edges(a: EdgeAssignment) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lu = np.searchsorted(a.members, a.left)
    lv = np.searchsorted(a.reserved, a.right)
    return lu, lv, a.count


def _csr_counts(n_rows: int, rows: np.ndarray, cols: np.ndarray, counts: np.ndarray):
    order = np.lexsort((cols, rows))
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
    return indptr, cols[order].astype(np.int64), counts[order].astype(np.int64)


def _degrees(indptr, indices, counts, n_right):
    rows = np.repeat(np.arange(indptr.size - 1), np.diff(indptr))
    left = np.bincount(rows, weights=counts, minlength=indptr.size - 1).astype(np.int64)
    right = np.bincount(indices, weights=counts, minlength=n_right).astype(np.int64)
    return left, right


def build_regular_multigraph(assignment: EdgeAssignment) -> RegularMultigraph:
    """l-regular multigraph: n_uv parallel real edges plus the dummy wiring.

    Member ``i`` (position in sorted order) is joined once to dummy ``j``
    whenever ``i = j (mod g)``.
    """
    a = assignment
    nb, nr = a.members.size, a.reserved.size
    n_dummy = nb - nr
    lu, lv, cnt = _local_edges(a)
    if n_dummy:
        i = np.repeat(np.arange(nb, dtype=np.int64), n_dummy // a.g)
        j = (np.tile(np.arange(n_dummy // a.g, dtype=np.int64), nb) * a.g) + i % a.g
        lu = np.concatenate([lu, i])
        lv = np.concatenate([lv, nr + j])
        cnt = np.concatenate([cnt, np.ones(i.size, np.int64)])
    indptr, indices, counts = _csr_counts(nb, lu, lv, cnt)
    left, right = _degrees(indptr, indices, counts, nb)
    if not ((left == a.l).all() and (right == a.l).all()):
        raise RegularityError(f"multigraph of block {a.block} is not {a.l}-regular")
    return RegularMultigraph(indptr, indices, counts, nr, n_dummy, a.l, a.members, a.reserved)


def extract_matchings(mg: RegularMultigraph) -> BlockDistribution:
    """Peel ``degree`` perfect matchings and drop the dummy edges from each.

    Removing a perfect matching from a d-regular multigraph leaves it
    (d-1)-regular, so checking that every peel is perfect keeps the
    residual regular throughout. Each search starts from the previous
    matching minus the edges that ran out.
    """
    n = mg.n_left
    counts = mg.counts.copy()
    ml = np.full(n, -1, dtype=np.int64)
    mr = np.full(n, -1, dtype=np.int64)
    matchings = []
    for k in range(mg.degree):
        _kernels.drop_exhausted(n, mg.indptr, mg.indices, counts, ml, mr)
        size = _kernels.hopcroft_karp(n, n, mg.indptr, mg.indices, counts, ml, mr)
        if size != n:
            raise RegularityError(f"no perfect matching in a {mg.degree - k}-regular residual")
        _kernels.peel_matching(n, mg.indptr, mg.indices, counts, ml)
        real = np.flatnonzero(ml < mg.n_real)
        matchings.append(Matching(zip(mg.members[real].tolist(), mg.reserved[ml[real]].tolist())))
    if counts.any():
        raise RegularityError("edges left over after peeling")
    return BlockDistribution(tuple(matchings), _split_sizes(n, mg.n_real)[1])


def _peel_fast(a: EdgeAssignment) -> BlockDistribution | None:
    """Peel l matchings straight off the real edges, without dummy positions.

    Before peel k every reserved position has residual degree l-k and no
    member exceeds it. Each peel first matches the members at that maximum
    (they must be used in every remaining peel), then extends the matching
    to all reserved positions by augmenting paths, which never unmatch a
    vertex. A bipartite graph always has a matching covering all its
    maximum-degree vertices, so this should not fail; ``None`` is returned
    if it does.
    """
    lu, lv, cnt = _local_edges(a)
    nb, nr = a.members.size, a.reserved.size
    m_ptr, m_idx, m_cnt = _csr_counts(nb, lu, lv, cnt)
    r_ptr, r_idx, r_cnt = _csr_counts(nr, lv, lu, cnt)
    deg_m, deg_r = _degrees(m_ptr, m_idx, m_cnt, nr)
    if not ((deg_m == a.r).all() and (deg_r == a.l).all()):
        raise RegularityError(f"block {a.block}: assignment marginals are off")
    m_rows = np.repeat(np.arange(nb), np.diff(m_ptr))
    matchings = []
    for k in range(a.l):
        left_rounds = a.l - k
        tight = deg_m == left_rounds
        r_of_m = np.full(nb, -1, dtype=np.int64)
        m_of_r = np.full(nr, -1, dtype=np.int64)
        if tight.any():
            got = _kernels.hopcroft_karp(nb, nr, m_ptr, m_idx, m_cnt * tight[m_rows], r_of_m, m_of_r)
            if got != int(tight.sum()):
                return None
        if _kernels.hopcroft_karp(nr, nb, r_ptr, r_idx, r_cnt, m_of_r, r_of_m) != nr:
            return None
        if (r_of_m[tight] < 0).any():
            return None
        _kernels.peel_matching(nr, r_ptr, r_idx, r_cnt, m_of_r)
        _kernels.peel_matching(nb, m_ptr, m_idx, m_cnt, r_of_m)
        deg_m[r_of_m >= 0] -= 1
        matchings.append(Matching(zip(a.members[m_of_r].tolist(), a.reserved.tolist())))
    return BlockDistribution(tuple(matchings), a.r, fast_path=True)


def block_distribution(assignment: EdgeAssignment, fast: bool = True) -> BlockDistribution:
    """Try the direct peel first, then fall back to the padded regular multigraph."""
    if fast:
        dist = _peel_fast(assignment)
        if dist is not None:
            return dist
        log.debug("block %d: direct peel failed, padding to a regular multigraph", assignment.block)
    return extract_matchings(build_regular_multigraph(assignment))


def block_distributions(graph: BipartiteGraph, decomposition: FairDecomposition,
                        fast: bool = True) -> list[BlockDistribution]:
    return [block_distribution(a, fast) for a in edge_assignments(graph, decomposition)]


def member_coverage(dist: BlockDistribution, members: Sequence[int]) -> dict[int, int]:
    """How many of the l matchings cover each member."""
    hits = dict.fromkeys(members, 0)
    for m in dist.matchings:
        for u in m:
            hits[u] += 1
    return hits
