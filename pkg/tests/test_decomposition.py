from fractions import Fraction as F

import pytest

from fairmatch.decomposition import (Block, DecompositionFormatError, FairDecomposition, InstanceError, Violation,
                                     fair_decomposition, format_decomposition, parse_decomposition,
                                     satisfaction_vector, verify_certificate)
from fairmatch.graph import BipartiteGraph
from fairmatch.oracle import brute_force_blocks, max_ratio, min_ratio
from fairmatch.pipeline import solve
from helpers import (canonical_corpus, drop_reserved, kite, kite_tail, kite_tail_alt, move_member, perturb_lambda,
                     star3)


def as_sets(dec):
    return [(set(b.members), b.lam, set(b.reserved_right)) for b in dec.blocks]


def test_star3_single_block():
    assert as_sets(fair_decomposition(star3())) == [({0, 1, 2}, F(1, 3), {0})]


def test_kite_probabilities():
    assert fair_decomposition(kite()).probability == {0: 1, 1: F(2, 3), 2: F(2, 3), 3: F(2, 3)}


def test_kite_tail_blocks():
    assert as_sets(fair_decomposition(kite_tail())) == [
        ({4, 5}, F(1, 2), {3}), ({1, 2, 3}, F(2, 3), {1, 2}), ({0}, F(1), {0})]


def test_kite_tail_alt_variant_agrees_with_oracle():
    dec = solve(kite_tail_alt()).decomposition
    assert as_sets(dec) == as_sets(brute_force_blocks(kite_tail_alt()))
    assert dec.lambdas == [F(1, 2), F(1)]


def test_rejects_unreduced_input():
    with pytest.raises(InstanceError):
        fair_decomposition(BipartiteGraph(2, 2, [(0, 0), (1, 0)]))
    with pytest.raises(InstanceError):
        fair_decomposition(BipartiteGraph(2, 2, [(0, 0), (1, 0), (0, 1)]).induced([0, 1, 1], [0, 1]))


def test_isolated_vertex_rejected():
    with pytest.raises(InstanceError):
        fair_decomposition(BipartiteGraph(3, 1, [(0, 0), (1, 0)]))


def test_satisfaction_vector_is_ascending():
    vec = satisfaction_vector(fair_decomposition(kite_tail()))
    assert vec == [(4, F(1, 2)), (5, F(1, 2)), (1, F(2, 3)), (2, F(2, 3)), (3, F(2, 3)), (0, F(1))]


def test_certificate_accepts_kite_tail():
    assert verify_certificate(kite_tail(), fair_decomposition(kite_tail())).ok


def test_certificate_detects_lowered_lambda():
    dec = fair_decomposition(kite_tail())
    blocks = list(dec.blocks)
    blocks[1] = Block(blocks[1].members, F(1, 2), blocks[1].reserved_right)
    rep = verify_certificate(kite_tail(), FairDecomposition(tuple(blocks)))
    assert any(f.kind is Violation.TIGHTNESS and f.block == 1 for f in rep.findings)
    assert Violation.ORDER in rep.kinds()


def test_certificate_detects_infeasible_single_block():
    claim = FairDecomposition((Block(frozenset(range(4)), F(3, 4), frozenset(range(3))),))
    rep = verify_certificate(kite(), claim)
    assert rep.kinds() == {Violation.FEASIBILITY}


def test_certificate_checks_given_assignment():
    dec = FairDecomposition((Block(frozenset({0, 1, 2}), F(1, 3), frozenset({0})),))
    good = {(u, 0): F(1, 3) for u in range(3)}
    assert verify_certificate(star3(), dec, {0: good}).ok
    bad = {(0, 0): F(2, 3), (1, 0): F(1, 3)}
    assert verify_certificate(star3(), dec, {0: bad}).kinds() == {Violation.FEASIBILITY}


def test_certificate_partition_errors():
    claim = FairDecomposition((Block(frozenset({0, 1}), F(1, 3), frozenset({0})),))
    assert Violation.PARTITION in verify_certificate(star3(), claim).kinds()


@pytest.mark.parametrize("corrupt, kind", [
    (perturb_lambda, Violation.TIGHTNESS),
    (drop_reserved, Violation.RESERVED),
    (move_member, Violation.RATIO),
])
def test_corruptions_are_classified(corrupt, kind):
    dec = fair_decomposition(kite_tail())
    assert kind in verify_certificate(kite_tail(), corrupt(dec)).kinds()


def test_format_kite_tail():
    text = format_decomposition(fair_decomposition(kite_tail()))
    assert text == ("blocks 3\nlambda 1/2 members 5 6\nreserved 4\nlambda 2/3 members 2 3 4\nreserved 2 3\n"
                    "lambda 1/1 members 1\nreserved 1\n")


def test_format_parse_roundtrip_on_corpus():
    for g in canonical_corpus()[:100]:
        dec = fair_decomposition(g)
        assert parse_decomposition(format_decomposition(dec)) == dec


@pytest.mark.parametrize("text, line", [
    ("block 1\n", 1),
    ("blocks two\n", 1),
    ("blocks 1\nlambda 1/2 members\nreserved 1\n", 2),
    ("blocks 1\nlambda x members 1\nreserved 1\n", 2),
    ("blocks 1\nlambda 1/2 members 0\nreserved 1\n", 2),
    ("blocks 1\nlambda 1/2 members 1\nreservd 1\n", 3),
    ("blocks 1\nlambda 1/0 members 1\nreserved 1\n", 2),
])
def test_parse_errors(text, line):
    with pytest.raises(DecompositionFormatError, match=f"line {line}"):
        parse_decomposition(text)


def test_parse_wrong_block_count():
    with pytest.raises(DecompositionFormatError):
        parse_decomposition("blocks 2\nlambda 1/1 members 1\nreserved 1\n")


def test_corpus_properties():
    for g in canonical_corpus():
        dec = fair_decomposition(g)
        lams = dec.lambdas
        assert all(a < b for a, b in zip(lams, lams[1:]))
        assert sum(b.lam * len(b.members) for b in dec.blocks) == g.n_right
        assert lams[0] == min_ratio(g)
        assert lams[-1] == max_ratio(g)
        assert 1 <= dec.rounds <= g.n_left
        assert set().union(*(b.reserved_right for b in dec.blocks)) == set(range(g.n_right))
        assert verify_certificate(g, dec).ok


def test_corpus_corruptions():
    for g in canonical_corpus()[:200]:
        dec = fair_decomposition(g)
        for i in range(len(dec.blocks)):
            assert Violation.TIGHTNESS in verify_certificate(g, perturb_lambda(dec, i)).kinds()
            assert Violation.RESERVED in verify_certificate(g, drop_reserved(dec, i)).kinds()
        for i in range(len(dec.blocks) - 1):
            assert Violation.RATIO in verify_certificate(g, move_member(dec, i, i + 1)).kinds()
            assert Violation.RATIO in verify_certificate(g, move_member(dec, i + 1, i)).kinds()
