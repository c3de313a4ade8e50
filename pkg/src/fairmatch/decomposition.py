"""Fair decomposition of a one-sided instance into blocks of equal satisfaction.

The loop keeps an ordered partition of the users into sets, each a union of
consecutive blocks, and guesses that every unconfirmed set is a single
block with probability |Gamma(T)|/|T|. One merged minimum cut either
confirms a set (all source arcs saturated) or splits it at the users
reachable from the source.
"""

from __future__ import annotations

import enum
import io
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TextIO

import numpy as np

from .graph import BipartiteGraph, _max_matching_arrays
from .maxflow import assemble_network, build_parametric_network, min_cut

log = logging.getLogger(__name__)


class InstanceError(ValueError):
    """Input is not a one-sided instance with rho(L) = |R|; run reduce_to_one_sided first."""


class DecompositionFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    members: frozenset[int]
    lam: Fraction
    reserved_right: frozenset[int]

    def __post_init__(self):
        if not self.members:
            raise ValueError("empty block")


@dataclass(frozen=True)
class FairDecomposition:
    blocks: tuple[Block, ...]
    rounds: int = field(default=0, compare=False)

    @property
    def probability(self) -> dict[int, Fraction]:
        return {u: b.lam for b in self.blocks for u in b.members}

    @property
    def lambdas(self) -> list[Fraction]:
        return [b.lam for b in self.blocks]

    def relabel(self, left_map: Sequence[int] | np.ndarray, right_map: Sequence[int] | np.ndarray) -> FairDecomposition:
        return FairDecomposition(tuple(
            Block(frozenset(int(left_map[u]) for u in b.members), b.lam,
                  frozenset(int(right_map[v]) for v in b.reserved_right))
            for b in self.blocks), self.rounds)


def fair_decomposition(graph: BipartiteGraph, check: bool = True) -> FairDecomposition:
    """Blocks B_1..B_k with strictly increasing satisfaction probabilities.

    ``graph`` must satisfy rho(L) = |R| <= |L| with no isolated vertex;
    ``check=False`` skips the maximum-matching precondition test.
    """
    nl, nr = graph.n_left, graph.n_right
    if check:
        if (graph.left_degrees() == 0).any() or (graph.right_degrees() == 0).any():
            raise InstanceError("graph has isolated vertices")
        if nr > nl or int((_max_matching_arrays(graph) >= 0).sum()) != nr:
            raise InstanceError("rho(L) != |R|; reduce the instance first")
    if nl == 0:
        return FairDecomposition(())

    eu, ev = graph.edge_arrays()
    set_of = np.zeros(nl, dtype=np.int64)
    owner = np.zeros(nr, dtype=np.int64)
    order = [0]
    confirmed: dict[int, Fraction] = {}
    next_id = 1
    rounds = 0
    while len(confirmed) < len(order):
        rounds += 1
        open_ids = [i for i in order if i not in confirmed]
        is_open = np.zeros(next_id, dtype=bool)
        is_open[open_ids] = True
        size_l = np.bincount(set_of, minlength=next_id)
        size_r = np.bincount(owner, minlength=next_id)
        lambdas = {i: Fraction(int(size_r[i]), int(size_l[i])) for i in open_ids}
        lmask = is_open[set_of]
        rmask = is_open[owner]
        emask = (set_of[eu] == owner[ev]) & lmask[eu]
        left_ids = np.flatnonzero(lmask)
        right_ids = np.flatnonzero(rmask)
        net = assemble_network(left_ids, set_of[left_ids], right_ids, owner[right_ids],
                               eu[emask], ev[emask], lambdas)
        cut = min_cut(net)
        reach_l = np.zeros(nl, dtype=bool)
        reach_l[left_ids[cut.reachable_left_mask]] = True
        reach_r = np.zeros(nr, dtype=bool)
        reach_r[right_ids[cut.reachable_right_mask]] = True
        for i in open_ids:
            if cut.saturated[i]:
                confirmed[i] = lambdas[i]
                continue
            low = next_id
            next_id += 1
            set_of[reach_l & (set_of == i)] = low
            owner[reach_r & (owner == i)] = low
            order.insert(order.index(i), low)
        log.debug("round %d: %d sets, %d confirmed", rounds, len(order), len(confirmed))

    members: dict[int, list[int]] = {i: [] for i in order}
    for u, i in enumerate(set_of.tolist()):
        members[i].append(u)
    reserved: dict[int, list[int]] = {i: [] for i in order}
    for v, i in enumerate(owner.tolist()):
        reserved[i].append(v)
    blocks = [Block(frozenset(members[i]), confirmed[i], frozenset(reserved[i])) for i in order]
    blocks.sort(key=lambda b: b.lam)
    for a, b in zip(blocks, blocks[1:]):
        if not a.lam < b.lam:
            raise AssertionError(f"block probabilities not strictly increasing: {a.lam}, {b.lam}")
    return FairDecomposition(tuple(blocks), rounds)


def satisfaction_vector(decomposition: FairDecomposition) -> list[tuple[int, Fraction]]:
    """``(vertex, probability)`` pairs sorted ascending, grouped by block."""
    return [(u, b.lam) for b in sorted(decomposition.blocks, key=lambda b: b.lam) for u in sorted(b.members)]


# --- certificates ---------------------------------------------------------

class Violation(enum.Enum):
    PARTITION = "partition"
    ORDER = "order"
    RESERVED = "reserved"
    RATIO = "ratio"
    TIGHTNESS = "tightness"
    FEASIBILITY = "feasibility"


@dataclass(frozen=True)
class Finding:
    kind: Violation
    block: int | None
    detail: str

    def __str__(self) -> str:
        where = "" if self.block is None else f" at block {self.block + 1}"
        return f"{self.kind.value}{where}: {self.detail}"


@dataclass
class CertificateReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def kinds(self) -> set[Violation]:
        return {f.kind for f in self.findings}

    def add(self, kind: Violation, block: int | None, detail: str) -> None:
        self.findings.append(Finding(kind, block, detail))

    def __bool__(self) -> bool:
        return self.ok


def verify_certificate(
    graph: BipartiteGraph,
    decomposition: FairDecomposition,
    assignments: Mapping[int, Mapping[tuple[int, int], Fraction]] | None = None,
) -> CertificateReport:
    """Check a claimed decomposition of a one-sided instance.

    The blocks must partition the users in increasing order of probability,
    with each reserved set equal to the block's new neighbors. Every prefix
    S_i must be tight (sum of probabilities = |Gamma(S_i)|). Finally each
    block has to realise its probability, checked against
    ``assignments[i]`` (edge -> x_uv) when given and otherwise by a minimum
    cut on the block's own network. Every violation is reported.
    """
    report = CertificateReport()
    blocks = list(decomposition.blocks)
    seen: set[int] = set()
    for i, b in enumerate(blocks):
        dup = seen & b.members
        if dup:
            report.add(Violation.PARTITION, i, f"vertices {sorted(dup)} appear in two blocks")
        bad = [u for u in b.members if not 0 <= u < graph.n_left]
        if bad:
            report.add(Violation.PARTITION, i, f"vertices {bad} are not users")
        seen |= b.members
    missing = set(range(graph.n_left)) - seen
    if missing:
        report.add(Violation.PARTITION, None, f"users {sorted(missing)} belong to no block")
    for i in range(1, len(blocks)):
        if not blocks[i - 1].lam < blocks[i].lam:
            report.add(Violation.ORDER, i, f"{blocks[i - 1].lam} !< {blocks[i].lam}")

    prefix: set[int] = set()
    covered: set[int] = set()
    total = Fraction(0)
    for i, b in enumerate(blocks):
        if not 0 < b.lam <= 1:
            report.add(Violation.RATIO, i, f"probability {b.lam} outside (0, 1]")
        new = graph.neighborhood(u for u in b.members if 0 <= u < graph.n_left) - covered
        if new != set(b.reserved_right):
            report.add(Violation.RESERVED, i,
                       f"reserved {sorted(b.reserved_right)} but new neighbors are {sorted(new)}")
        if b.lam * len(b.members) != len(b.reserved_right):
            report.add(Violation.RATIO, i,
                       f"probability {b.lam} != {len(b.reserved_right)}/{len(b.members)}")
        prefix |= b.members
        covered |= new
        total += b.lam * len(b.members)
        if total != len(covered):
            report.add(Violation.TIGHTNESS, i, f"prefix sum {total} != |Gamma(S_{i + 1})| = {len(covered)}")

    if report.kinds() & {Violation.PARTITION, Violation.RESERVED}:
        return report
    for i, b in enumerate(blocks):
        if assignments is not None and i in assignments:
            problem = _check_assignment(graph, b, assignments[i])
            if problem:
                report.add(Violation.FEASIBILITY, i, problem)
            continue
        if not 0 < b.lam <= 1:
            continue
        net = build_parametric_network(graph.induced(sorted(b.members), sorted(b.reserved_right)),
                                       [(range(len(b.members)), b.lam)])
        if not min_cut(net).saturated[0]:
            report.add(Violation.FEASIBILITY, i, f"no fractional assignment gives every member {b.lam}")
    return report


def _check_assignment(graph: BipartiteGraph, block: Block, x: Mapping[tuple[int, int], Fraction]) -> str | None:
    rows = {u: Fraction(0) for u in block.members}
    cols = {v: Fraction(0) for v in block.reserved_right}
    for (u, v), val in x.items():
        if val < 0:
            return f"negative value on edge ({u}, {v})"
        if val == 0:
            continue
        if u not in rows or v not in cols:
            return f"edge ({u}, {v}) leaves the block"
        if not graph.has_edge(u, v):
            return f"({u}, {v}) is not an edge"
        rows[u] += val
        cols[v] += val
    for u, s in rows.items():
        if s != block.lam:
            return f"row sum of {u} is {s}, expected {block.lam}"
    for v, s in cols.items():
        if s != 1:
            return f"column sum of {v} is {s}, expected 1"
    return None


# --- text format ----------------------------------------------------------

def format_decomposition(decomposition: FairDecomposition) -> str:
    """``blocks k`` then per block ``lambda p/q members ...`` and ``reserved ...`` (1-based)."""
    out = io.StringIO()
    out.write(f"blocks {len(decomposition.blocks)}\n")
    for b in decomposition.blocks:
        members = " ".join(str(u + 1) for u in sorted(b.members))
        reserved = " ".join(str(v + 1) for v in sorted(b.reserved_right))
        out.write(f"lambda {b.lam.numerator}/{b.lam.denominator} members {members}\n")
        out.write(f"reserved {reserved}\n" if reserved else "reserved\n")
    return out.getvalue()


def _parse_fraction(tok: str, where: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise DecompositionFormatError(f"{where}: bad rational {tok!r}") from None


def _parse_ids(toks: Iterable[str], where: str) -> frozenset[int]:
    try:
        ids = [int(t) - 1 for t in toks]
    except ValueError:
        raise DecompositionFormatError(f"{where}: bad vertex id") from None
    if any(i < 0 for i in ids):
        raise DecompositionFormatError(f"{where}: vertex ids are 1-based")
    return frozenset(ids)


def parse_decomposition(stream: TextIO | str) -> FairDecomposition:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = [(n, ln.split()) for n, ln in enumerate(stream, start=1) if ln.strip()]
    if not lines or lines[0][1][0] != "blocks" or len(lines[0][1]) != 2:
        raise DecompositionFormatError("line 1: expected 'blocks k'")
    try:
        k = int(lines[0][1][1])
    except ValueError:
        raise DecompositionFormatError("line 1: block count must be an integer") from None
    if len(lines) != 1 + 2 * k:
        raise DecompositionFormatError(f"expected {2 * k} block lines, found {len(lines) - 1}")
    blocks = []
    for i in range(k):
        (n1, head), (n2, res) = lines[1 + 2 * i], lines[2 + 2 * i]
        if len(head) < 3 or head[0] != "lambda" or head[2] != "members":
            raise DecompositionFormatError(f"line {n1}: expected 'lambda p/q members ...'")
        if len(head) == 3:
            raise DecompositionFormatError(f"line {n1}: block without members")
        if res[0] != "reserved":
            raise DecompositionFormatError(f"line {n2}: expected 'reserved ...'")
        blocks.append(Block(_parse_ids(head[3:], f"line {n1}"), _parse_fraction(head[1], f"line {n1}"),
                            _parse_ids(res[1:], f"line {n2}")))
    return FairDecomposition(tuple(blocks))
