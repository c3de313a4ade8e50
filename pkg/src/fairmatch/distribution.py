"""Weighted lists of matchings: sampling and merging block distributions, and their text format."""

from __future__ import annotations

import io
import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import TextIO

from .blockdist import BlockDistribution
from .graph import Matching

CoverageProfile = dict[int, Fraction]


class DistributionFormatError(ValueError):
    pass


@dataclass(frozen=True, init=False)
class MatchingDistribution:
    """Exact distribution over matchings; equal matchings are coalesced on construction."""

    entries: tuple[tuple[Fraction, Matching], ...]

    def __init__(self, entries: Iterable[tuple[Fraction, Matching]]):
        merged: dict[Matching, Fraction] = {}
        for w, m in entries:
            w = Fraction(w)
            if w <= 0:
                raise ValueError(f"weights must be positive, got {w}")
            merged[m] = merged.get(m, Fraction(0)) + w
        total = sum(merged.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "entries", tuple((w, m) for m, w in merged.items()))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def support(self) -> tuple[Matching, ...]:
        return tuple(m for _, m in self.entries)

    def coverage(self, users: Iterable[int] = ()) -> CoverageProfile:
        return coverage(self, users)

    def sample(self, rng: random.Random) -> Matching:
        x = Fraction(rng.random())
        acc = Fraction(0)
        for w, m in self.entries:
            acc += w
            if x < acc:
                return m
        return self.entries[-1][1]


def sample_product(blocks: Sequence[BlockDistribution], rng: random.Random) -> Matching:
    """Draw one matching per block independently and take their union."""
    pairs: dict[int, int] = {}
    for b in blocks:
        pairs.update(b.matchings[rng.randrange(b.l)])
    return Matching(pairs)


def _couple(left: Sequence[tuple[Fraction, tuple[int, ...]]], right: Sequence[Fraction]):
    """Two-pointer coupling of two weight lists; entries extend ``left``'s index tuples."""
    out = []
    i = j = 0
    a, b = left[0][0], right[0]
    while i < len(left) and j < len(right):
        delta = min(a, b)
        out.append((delta, left[i][1] + (j,)))
        a -= delta
        b -= delta
        if a == 0:
            i += 1
            if i < len(left):
                a = left[i][0]
        if b == 0:
            j += 1
            if j < len(right):
                b = right[j]
    return out


def merge_small_support(blocks: Sequence[BlockDistribution]) -> MatchingDistribution:
    """Couple the block distributions along their cumulative weights, block by block.

    Each fold emits at most ``len(current) + l_i - 1`` entries, so the
    support is at most ``sum(l_i) - (k - 1)``. Per-user coverage matches
    the product distribution because every fold preserves both marginals.
    """
    if not blocks:
        return MatchingDistribution([(Fraction(1), Matching())])
    current = [(blocks[0].weight, (i,)) for i in range(blocks[0].l)]
    for b in blocks[1:]:
        current = _couple(current, [b.weight] * b.l)
    entries = []
    for w, picks in current:
        pairs: dict[int, int] = {}
        for b, i in zip(blocks, picks):
            pairs.update(b.matchings[i])
        entries.append((w, Matching(pairs)))
    return MatchingDistribution(entries)


def coverage(distribution: MatchingDistribution, users: Iterable[int] = ()) -> CoverageProfile:
    """Probability that each user is matched. ``users`` adds explicit zero entries."""
    prof: CoverageProfile = {u: Fraction(0) for u in users}
    for w, m in distribution.entries:
        for u in m:
            prof[u] = prof.get(u, Fraction(0)) + w
    return dict(sorted(prof.items()))


# --- text formats ----------------------------------------------------------

def serialize_distribution(distribution: MatchingDistribution) -> str:
    """``entry p/q`` followed by the ``u v`` pairs of that matching (1-based)."""
    out = io.StringIO()
    for w, m in distribution.entries:
        out.write(f"entry {w.numerator}/{w.denominator}\n")
        for u, v in m.pairs():
            out.write(f"{u + 1} {v + 1}\n")
    return out.getvalue()


def parse_distribution(stream: TextIO | str) -> MatchingDistribution:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    entries: list[tuple[Fraction, dict[int, int]]] = []
    for lineno, line in enumerate(stream, start=1):
        parts = line.split()
        if not parts or parts[0].startswith("%"):
            continue
        if parts[0] == "entry":
            if len(parts) != 2:
                raise DistributionFormatError(f"line {lineno}: expected 'entry p/q'")
            try:
                w = Fraction(parts[1])
            except (ValueError, ZeroDivisionError):
                raise DistributionFormatError(f"line {lineno}: bad weight {parts[1]!r}") from None
            if w <= 0:
                raise DistributionFormatError(f"line {lineno}: weight must be positive")
            entries.append((w, {}))
            continue
        if not entries:
            raise DistributionFormatError(f"line {lineno}: pair before the first 'entry' line")
        try:
            u, v = (int(p) for p in parts)
        except ValueError:
            raise DistributionFormatError(f"line {lineno}: expected 'u v', got {line.strip()!r}") from None
        if u <= 0 or v <= 0:
            raise DistributionFormatError(f"line {lineno}: vertex ids are 1-based")
        pairs = entries[-1][1]
        if u - 1 in pairs or v - 1 in pairs.values():
            raise DistributionFormatError(f"line {lineno}: vertex repeated within one matching")
        pairs[u - 1] = v - 1
    try:
        return MatchingDistribution((w, Matching(p)) for w, p in entries)
    except ValueError as exc:
        raise DistributionFormatError(str(exc)) from None


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def format_coverage(profile: Mapping[int, Fraction]) -> str:
    """TSV rows ``vertex  p/q  decimal`` (1-based vertex, 6 significant digits)."""
    return "".join(f"{u + 1}\t{format_fraction(q)}\t{float(q):.6g}\n" for u, q in sorted(profile.items()))
