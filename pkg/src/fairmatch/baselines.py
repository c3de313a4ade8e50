"""Comparison mechanisms: a plain maximum matching, probabilistic serial and random priority."""

from __future__ import annotations

import enum
import itertools
import math
import random
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from .distribution import CoverageProfile
from .graph import BipartiteGraph, Matching, maximum_matching

EXHAUSTIVE_LIMIT = 10


class SizeLimitError(ValueError):
    pass


def unfair_matching(graph: BipartiteGraph) -> Matching:
    return maximum_matching(graph)


# --- probabilistic serial -------------------------------------------------

class PsEventKind(enum.Enum):
    LEFT_SATURATED = "left"
    RIGHT_SATURATED = "right"


@dataclass(frozen=True)
class PsEvent:
    time: Fraction
    kind: PsEventKind
    vertex: int


@dataclass(frozen=True)
class PsResult:
    profile: CoverageProfile
    edge_flow: dict[tuple[int, int], Fraction]
    events: tuple[PsEvent, ...]


def probabilistic_serial(graph: BipartiteGraph) -> PsResult:
    """Exact simultaneous eating.

    Every active user sends flow at unit rate, split evenly over its active
    neighbours. Rates are constant between events, so each event time is
    found exactly. Users left with no active neighbour simply stop.
    """
    adj = [graph.neighbors(u).tolist() for u in range(graph.n_left)]
    out = [Fraction(0)] * graph.n_left
    inflow = [Fraction(0)] * graph.n_right
    right_on = [True] * graph.n_right
    left_on = [bool(a) for a in adj]
    flow: dict[tuple[int, int], Fraction] = {}
    events: list[PsEvent] = []
    t = Fraction(0)
    while True:
        live = {}
        for u in range(graph.n_left):
            if left_on[u]:
                nb = [v for v in adj[u] if right_on[v]]
                if nb:
                    live[u] = nb
                else:
                    left_on[u] = False
        if not live:
            break
        rate: dict[int, Fraction] = {}
        for nb in live.values():
            share = Fraction(1, len(nb))
            for v in nb:
                rate[v] = rate.get(v, Fraction(0)) + share
        dt = min(min(1 - out[u] for u in live), min((1 - inflow[v]) / r for v, r in rate.items()))
        t += dt
        for u, nb in live.items():
            share = dt / len(nb)
            out[u] += dt
            for v in nb:
                flow[u, v] = flow.get((u, v), Fraction(0)) + share
        for v, r in rate.items():
            inflow[v] += dt * r
        for u in live:
            if out[u] == 1:
                left_on[u] = False
                events.append(PsEvent(t, PsEventKind.LEFT_SATURATED, u))
        for v in sorted(rate):
            if inflow[v] == 1:
                right_on[v] = False
                events.append(PsEvent(t, PsEventKind.RIGHT_SATURATED, v))
    return PsResult(dict(enumerate(out)), flow, tuple(events))


# --- random priority ------------------------------------------------------

def _augment(adj: Sequence[Sequence[int]], match_l: dict[int, int], match_r: dict[int, int], root: int) -> bool:
    """Search an alternating path from the free user ``root``; flip it if found."""
    parent: dict[int, int] = {}
    stack = [root]
    seen_r: set[int] = set()
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v in seen_r:
                continue
            seen_r.add(v)
            parent[v] = u
            w = match_r.get(v)
            if w is None:
                while True:
                    u = parent[v]
                    prev = match_l.get(u)
                    match_l[u] = v
                    match_r[v] = u
                    if u == root:
                        return True
                    v = prev
            stack.append(w)
    return False


def priority_matching(graph: BipartiteGraph, order: Sequence[int]) -> Matching:
    """Serial dictatorship: keep each user in ``order`` if the kept set stays matchable."""
    adj = [graph.neighbors(u).tolist() for u in range(graph.n_left)]
    match_l: dict[int, int] = {}
    match_r: dict[int, int] = {}
    for u in order:
        _augment(adj, match_l, match_r, u)
    return Matching(match_l)


def random_priority(graph: BipartiteGraph, rng: random.Random) -> Matching:
    order = list(range(graph.n_left))
    rng.shuffle(order)
    return priority_matching(graph, order)


def _matchable_oracle(graph: BipartiteGraph):
    adj = [graph.neighbors(u).tolist() for u in range(graph.n_left)]
    cache: dict[int, bool] = {0: True}

    def matchable(mask: int) -> bool:
        hit = cache.get(mask)
        if hit is None:
            match_l: dict[int, int] = {}
            match_r: dict[int, int] = {}
            hit = all(_augment(adj, match_l, match_r, u) for u in range(graph.n_left) if mask >> u & 1)
            cache[mask] = hit
        return hit

    return matchable


def rp_exhaustive(graph: BipartiteGraph) -> CoverageProfile:
    """Exact RP probabilities averaged over all |L|! orders.

    Dynamic programme over (processed users, selected users): the number
    of orders of the processed set that select exactly that subset. The
    selection only depends on this pair, so the |L|! orders collapse to at
    most 3^|L| states.
    """
    n = graph.n_left
    if n > EXHAUSTIVE_LIMIT:
        raise SizeLimitError(f"exhaustive random priority needs |L| <= {EXHAUSTIVE_LIMIT}, got {n}")
    matchable = _matchable_oracle(graph)
    layer: dict[tuple[int, int], int] = {(0, 0): 1}
    for _ in range(n):
        nxt: Counter[tuple[int, int]] = Counter()
        for (done, chosen), ways in layer.items():
            for u in range(n):
                bit = 1 << u
                if done & bit:
                    continue
                grown = chosen | bit
                nxt[done | bit, grown if matchable(grown) else chosen] += ways
        layer = nxt
    total = math.factorial(n)
    hits = [0] * n
    for (_, chosen), ways in layer.items():
        for u in range(n):
            if chosen >> u & 1:
                hits[u] += ways
    return {u: Fraction(hits[u], total) for u in range(n)}


def rp_enumerate(graph: BipartiteGraph) -> CoverageProfile:
    """Literal average over every permutation (reference for small |L|)."""
    n = graph.n_left
    if n > 8:
        raise SizeLimitError(f"permutation enumeration needs |L| <= 8, got {n}")
    hits = Counter()
    for order in itertools.permutations(range(n)):
        hits.update(priority_matching(graph, order).keys())
    total = math.factorial(n)
    return {u: Fraction(hits[u], total) for u in range(n)}


def rp_probabilities(graph: BipartiteGraph, mode: str = "exhaustive", runs: int = 1000,
                     rng: random.Random | None = None) -> CoverageProfile:
    """``mode="exhaustive"`` (|L| <= 10) or ``"monte_carlo"`` with ``runs`` seeded draws."""
    if mode == "exhaustive":
        return rp_exhaustive(graph)
    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    if runs <= 0:
        raise ValueError("runs must be positive")
    rng = rng if rng is not None else random.Random()
    hits = Counter()
    for _ in range(runs):
        hits.update(random_priority(graph, rng).keys())
    return {u: Fraction(hits[u], runs) for u in range(graph.n_left)}
