"""Shared graphs and the seeded random corpus used across the test modules."""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

from fairmatch.decomposition import Block, FairDecomposition
from fairmatch.graph import BipartiteGraph, ReductionCase, load_edge_list, reduce_to_one_sided

KITE_TEXT = "1 1\n1 2\n2 2\n2 3\n3 3\n4 2\n4 3\n"
# a0..a3/b0..b2 as in KITE, plus a4, a5, b3 and edges a3-b3, a4-b3, a5-b3
KITE_TAIL_TEXT = KITE_TEXT + "4 4\n5 4\n6 4\n"
# like KITE_TAIL but without a3-b1: a3 is adjacent to b2 and b3 only
KITE_TAIL_ALT_TEXT = "1 1\n1 2\n2 2\n2 3\n3 3\n4 3\n4 4\n5 4\n6 4\n"
STAR3_TEXT = "1 1\n2 1\n3 1\n"


def kite() -> BipartiteGraph:
    return load_edge_list(KITE_TEXT)


def kite_tail() -> BipartiteGraph:
    return load_edge_list(KITE_TAIL_TEXT)


def kite_tail_alt() -> BipartiteGraph:
    return load_edge_list(KITE_TAIL_ALT_TEXT)


def star3() -> BipartiteGraph:
    return load_edge_list(STAR3_TEXT)


def random_graph(rng: random.Random, n_left: int, n_right: int, density: float) -> BipartiteGraph:
    edges = [(u, v) for u in range(n_left) for v in range(n_right) if rng.random() < density]
    return BipartiteGraph(n_left, n_right, edges)


@lru_cache(maxsize=None)
def canonical_corpus(size: int = 500) -> tuple[BipartiteGraph, ...]:
    """``size`` one-sided canonical instances with |L| <= 10, |R| <= 8, densities 0.2/0.4/0.6."""
    out = []
    seed = 0
    while len(out) < size:
        rng = random.Random(seed)
        density = (0.2, 0.4, 0.6)[seed % 3]
        seed += 1
        g = random_graph(rng, rng.randint(2, 10), rng.randint(1, 8), density)
        rep = reduce_to_one_sided(g)
        if rep.case is ReductionCase.CANONICAL:
            out.append(rep.canonical_graph)
    return tuple(out)


def filtered_components(graph: BipartiteGraph, partition):
    """Per set: (members, neighbourhood map) after dropping edges into earlier sets' neighbourhoods."""
    owner: dict[int, int] = {}
    for i, (members, _) in enumerate(partition):
        for u in members:
            for v in graph.neighbors(u).tolist():
                owner.setdefault(v, i)
    comps = []
    for i, (members, lam) in enumerate(partition):
        nb = {u: {v for v in graph.neighbors(u).tolist() if owner[v] == i} for u in members}
        comps.append((list(members), nb, lam))
    return comps


def brute_force_cut(members, nb, lam):
    """(min cut value, minimal source side) of one scaled component, by enumerating subsets."""
    num, den = lam.numerator, lam.denominator
    best = None
    sides = []
    for mask in range(1 << len(members)):
        a = {members[i] for i in range(len(members)) if mask >> i & 1}
        gamma = set().union(*(nb[u] for u in a)) if a else set()
        value = num * (len(members) - len(a)) + den * len(gamma)
        if best is None or value < best:
            best, sides = value, [a]
        elif value == best:
            sides.append(a)
    return best, set.intersection(*sides)


def perturb_lambda(dec: FairDecomposition, i: int = 0) -> FairDecomposition:
    blocks = list(dec.blocks)
    b = blocks[i]
    bump = Fraction(1, 1000 * b.lam.denominator)
    blocks[i] = Block(b.members, b.lam - bump if b.lam == 1 else b.lam + bump, b.reserved_right)
    return FairDecomposition(tuple(blocks))


def move_member(dec: FairDecomposition, src: int = 0, dst: int = 1) -> FairDecomposition:
    blocks = list(dec.blocks)
    u = min(blocks[src].members)
    a, b = blocks[src], blocks[dst]
    blocks[src] = Block(a.members - {u}, a.lam, a.reserved_right) if len(a.members) > 1 else None
    blocks[dst] = Block(b.members | {u}, b.lam, b.reserved_right)
    return FairDecomposition(tuple(x for x in blocks if x is not None))


def drop_reserved(dec: FairDecomposition, i: int = 0) -> FairDecomposition:
    blocks = list(dec.blocks)
    b = blocks[i]
    blocks[i] = Block(b.members, b.lam, b.reserved_right - {min(b.reserved_right)})
    return FairDecomposition(tuple(blocks))
