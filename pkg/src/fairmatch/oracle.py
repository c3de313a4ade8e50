"""Exponential-time reference answers for small graphs."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .decomposition import Block, FairDecomposition
from .graph import BipartiteGraph, Matching

BLOCK_LIMIT = 15
MATCHING_LIMIT = 8

OracleDecomposition = FairDecomposition


class OracleSizeError(ValueError):
    pass


def _neighbor_masks(graph: BipartiteGraph) -> list[int]:
    """Bitmask of Gamma(X) for every subset X of the users."""
    n = graph.n_left
    single = [sum(1 << int(v) for v in graph.neighbors(u)) for u in range(n)]
    nb = [0] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        nb[mask] = nb[mask ^ low] | single[low.bit_length() - 1]
    return nb


def _bits(mask: int) -> frozenset[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(out)


def brute_force_blocks(graph: BipartiteGraph) -> OracleDecomposition:
    """Peel the largest set minimising |Gamma(X) - Gamma(S)| / |X| until no user is left.

    The largest minimiser is the union of all minimisers. Works on any
    bipartite graph; a user with no fresh neighbour gets probability 0.
    """
    n = graph.n_left
    if n > BLOCK_LIMIT:
        raise OracleSizeError(f"brute force needs |L| <= {BLOCK_LIMIT}, got {n}")
    nb = _neighbor_masks(graph)
    remaining = (1 << n) - 1
    covered = 0
    blocks: list[Block] = []
    while remaining:
        best: Fraction | None = None
        union = 0
        sub = remaining
        while sub:
            ratio = Fraction((nb[sub] & ~covered).bit_count(), sub.bit_count())
            if best is None or ratio < best:
                best, union = ratio, sub
            elif ratio == best:
                union |= sub
            sub = (sub - 1) & remaining
        fresh = nb[union] & ~covered
        blocks.append(Block(_bits(union), best, _bits(fresh)))
        remaining &= ~union
        covered |= fresh
    for a, b in zip(blocks, blocks[1:]):
        if not a.lam < b.lam:
            raise AssertionError("oracle lambdas not strictly increasing")
    return FairDecomposition(tuple(blocks))


def min_ratio(graph: BipartiteGraph) -> Fraction:
    """min over non-empty X of |Gamma(X)| / |X|, by direct enumeration."""
    n = graph.n_left
    if n > BLOCK_LIMIT:
        raise OracleSizeError(f"enumeration needs |L| <= {BLOCK_LIMIT}, got {n}")
    nb = _neighbor_masks(graph)
    return min(Fraction(nb[x].bit_count(), x.bit_count()) for x in range(1, 1 << n))


def enumerate_matchings(graph: BipartiteGraph, maximum_only: bool = True) -> list[Matching]:
    """Every matching of the graph (default: only those of maximum size)."""
    n = graph.n_left
    if n > MATCHING_LIMIT:
        raise OracleSizeError(f"matching enumeration needs |L| <= {MATCHING_LIMIT}, got {n}")
    adj = [graph.neighbors(u).tolist() for u in range(n)]
    found: list[dict[int, int]] = []
    current: dict[int, int] = {}
    used: set[int] = set()

    def grow(u: int) -> None:
        if u == n:
            found.append(dict(current))
            return
        grow(u + 1)
        for v in adj[u]:
            if v not in used:
                used.add(v)
                current[u] = v
                grow(u + 1)
                del current[u]
                used.discard(v)

    grow(0)
    if maximum_only:
        top = max(len(m) for m in found)
        found = [m for m in found if len(m) == top]
    return [Matching(m) for m in found]


def matchable_sets(graph: BipartiteGraph) -> dict[frozenset[int], Matching]:
    """Maximal matchable user sets, each with one witness matching."""
    out: dict[frozenset[int], Matching] = {}
    for m in enumerate_matchings(graph):
        out.setdefault(frozenset(m), m)
    return out


def lexmax_profile(graph: BipartiteGraph, tol: float = 1e-9) -> dict[int, float]:
    """Lexicographically largest sorted coverage vector, by progressive filling with LPs.

    Variables are probabilities of the maximal matchable sets. Each round
    maximises the common floor of the unfixed users and then fixes every
    user that cannot exceed it. Floating point; compare with a tolerance.
    """
    from scipy.optimize import linprog

    sets = list(matchable_sets(graph))
    n, k = graph.n_left, len(sets)
    cover = np.zeros((n, k))
    for j, s in enumerate(sets):
        for u in s:
            cover[u, j] = 1.0
    fixed: dict[int, float] = {u: 0.0 for u in range(n) if not cover[u].any()}

    def constraints(floor: float | None):
        # variables: p_1..p_k, t
        a_ub, b_ub = [], []
        for u in range(n):
            row = np.zeros(k + 1)
            row[:k] = -cover[u]
            if u in fixed:
                a_ub.append(row)
                b_ub.append(-fixed[u] + tol)
            else:
                if floor is None:
                    row[k] = 1.0
                    a_ub.append(row)
                    b_ub.append(0.0)
                else:
                    a_ub.append(row)
                    b_ub.append(-floor + tol)
        a_eq = [np.r_[np.ones(k), 0.0]]
        return np.array(a_ub).reshape(-1, k + 1), np.array(b_ub), np.array(a_eq), np.array([1.0])

    while len(fixed) < n:
        a_ub, b_ub, a_eq, b_eq = constraints(None)
        c = np.zeros(k + 1)
        c[k] = -1.0
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * (k + 1), method="highs")
        level = -res.fun
        a_ub, b_ub, a_eq, b_eq = constraints(level)
        before = len(fixed)
        for u in [u for u in range(n) if u not in fixed]:
            c = np.zeros(k + 1)
            c[:k] = -cover[u]
            res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                          bounds=[(0, None)] * k + [(0, 0)], method="highs")
            if -res.fun <= level + 1e-7:
                fixed[u] = level
        if len(fixed) == before:
            raise RuntimeError("progressive filling stalled; tolerance too tight")
    return dict(sorted(fixed.items()))


def max_ratio(graph: BipartiteGraph) -> Fraction:
    """max over proper subsets S of (|Gamma(L)| - |Gamma(S)|) / |L - S|, by direct enumeration."""
    n = graph.n_left
    if n > BLOCK_LIMIT:
        raise OracleSizeError(f"enumeration needs |L| <= {BLOCK_LIMIT}, got {n}")
    nb = _neighbor_masks(graph)
    full = (1 << n) - 1
    top = nb[full].bit_count()
    return max(Fraction(top - nb[s].bit_count(), n - s.bit_count()) for s in range(full))
