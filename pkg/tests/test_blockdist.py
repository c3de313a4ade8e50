from fractions import Fraction as F

import numpy as np
import pytest

from fairmatch.blockdist import (block_distribution, build_regular_multigraph, edge_assignment, edge_assignments,
                                 extract_matchings, member_coverage)
from fairmatch.decomposition import fair_decomposition
from fairmatch.graph import BipartiteGraph
from fairmatch.maxflow import FlowInconsistencyError
from helpers import canonical_corpus, kite, kite_tail, star3


def check_block(a, dist):
    members = a.members.tolist()
    reserved = set(a.reserved.tolist())
    assert dist.l == a.l
    for m in dist.matchings:
        assert set(m.values()) == reserved
        assert set(m) <= set(members)
    assert set(member_coverage(dist, members).values()) == {a.r}
    # the matchings reproduce the edge multiplicities exactly
    used: dict[tuple[int, int], int] = {}
    for m in dist.matchings:
        for e in m.pairs():
            used[e] = used.get(e, 0) + 1
    assert used == {e: int(c) for e, c in zip(zip(a.left.tolist(), a.right.tolist()), a.count.tolist()) if c}


def test_star3():
    a = edge_assignment(star3(), F(1, 3))
    assert (a.g, a.r, a.l) == (1, 1, 3)
    assert a.x == {(0, 0): F(1, 3), (1, 0): F(1, 3), (2, 0): F(1, 3)}
    dist = block_distribution(a)
    assert sorted(tuple(m.pairs()) for m in dist.matchings) == [((0, 0),), ((1, 0),), ((2, 0),)]


def test_kite_tail_first_block():
    a = edge_assignments(kite_tail(), fair_decomposition(kite_tail()))[0]
    assert a.members.tolist() == [4, 5] and a.reserved.tolist() == [3]
    assert a.x == {(4, 3): F(1, 2), (5, 3): F(1, 2)}


def test_kite_block():
    dec = fair_decomposition(kite())
    a = edge_assignments(kite(), dec)[0]
    assert a.lam == F(2, 3) and (a.r, a.l) == (2, 3)
    assert a.x[(2, 2)] == F(2, 3)
    assert sum(a.x.values()) == 2
    dist = block_distribution(a)
    assert member_coverage(dist, [1, 2, 3])[2] == 2
    check_block(a, dist)


def test_common_divisor_block():
    # four members sharing two positions: g = 2, r = 1, l = 2
    g = BipartiteGraph(4, 2, [(0, 0), (1, 0), (2, 1), (3, 1), (1, 1)])
    a = edge_assignment(g, F(1, 2))
    assert (a.g, a.r, a.l) == (2, 1, 2)
    check_block(a, block_distribution(a))
    check_block(a, block_distribution(a, fast=False))


def test_padded_multigraph_is_regular():
    a = edge_assignment(kite().induced([1, 2, 3], [1, 2]), F(2, 3))
    mg = build_regular_multigraph(a)
    assert mg.degree == a.l and mg.n_dummy == 1
    rows = np.repeat(np.arange(mg.n_left), np.diff(mg.indptr))
    assert (np.bincount(rows, weights=mg.counts, minlength=mg.n_left) == a.l).all()
    assert (np.bincount(mg.indices, weights=mg.counts, minlength=mg.n_right) == a.l).all()


def test_requires_feasible_lambda():
    with pytest.raises(FlowInconsistencyError):
        edge_assignment(star3(), F(1, 2))


@pytest.mark.parametrize("fast", [True, False])
def test_corpus_blocks(fast):
    for g in canonical_corpus()[:250]:
        dec = fair_decomposition(g)
        for a in edge_assignments(g, dec):
            b = dec.blocks[a.block]
            assert a.lam == b.lam
            assert set(a.members.tolist()) == b.members
            dist = block_distribution(a, fast) if fast else extract_matchings(build_regular_multigraph(a))
            assert dist.fast_path == fast
            check_block(a, dist)
