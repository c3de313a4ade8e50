from fractions import Fraction as F

import pytest

from fairmatch.graph import BipartiteGraph
from fairmatch.oracle import (OracleSizeError, brute_force_blocks, enumerate_matchings, lexmax_profile,
                              matchable_sets, max_ratio, min_ratio)
from helpers import kite, kite_tail, star3


def test_blocks_kite_kite_tail():
    assert brute_force_blocks(kite()).probability == {0: 1, 1: F(2, 3), 2: F(2, 3), 3: F(2, 3)}
    assert [(set(b.members), b.lam) for b in brute_force_blocks(kite_tail()).blocks] == [
        ({4, 5}, F(1, 2)), ({1, 2, 3}, F(2, 3)), ({0}, F(1))]


def test_complete_graph_is_one_block():
    k33 = BipartiteGraph(3, 3, [(u, v) for u in range(3) for v in range(3)])
    dec = brute_force_blocks(k33)
    assert len(dec.blocks) == 1 and dec.blocks[0].lam == 1


def test_ratios():
    assert min_ratio(kite_tail()) == F(1, 2)
    assert max_ratio(kite_tail()) == 1
    assert min_ratio(star3()) == max_ratio(star3()) == F(1, 3)


def test_matching_counts():
    assert len(enumerate_matchings(kite())) == 4
    assert len(enumerate_matchings(star3())) == 3
    assert len(enumerate_matchings(BipartiteGraph(1, 1, [(0, 0)]))) == 1
    # all matchings of a single edge: empty and the edge
    assert len(enumerate_matchings(BipartiteGraph(1, 1, [(0, 0)]), maximum_only=False)) == 2


def test_matchable_sets_kite():
    sets = matchable_sets(kite())
    assert set(sets) == {frozenset({0, 1, 2}), frozenset({0, 1, 3}), frozenset({0, 2, 3})}
    assert all(set(m) == s for s, m in sets.items())


def test_size_limits():
    with pytest.raises(OracleSizeError):
        brute_force_blocks(BipartiteGraph(16, 1, [(u, 0) for u in range(16)]))
    with pytest.raises(OracleSizeError):
        enumerate_matchings(BipartiteGraph(9, 1, [(u, 0) for u in range(9)]))


def test_lexmax_examples():
    assert lexmax_profile(kite()) == pytest.approx({0: 1, 1: 2 / 3, 2: 2 / 3, 3: 2 / 3}, abs=1e-7)
    assert lexmax_profile(kite_tail()) == pytest.approx({0: 1, 1: 2 / 3, 2: 2 / 3, 3: 2 / 3, 4: 0.5, 5: 0.5}, abs=1e-7)
