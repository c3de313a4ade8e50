"""Bipartite graphs and matchings, plus edge-list I/O and the reduction to a one-sided instance."""

from __future__ import annotations

import enum
import io
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import NamedTuple, TextIO

import numpy as np

from . import _kernels


class GraphFormatError(ValueError):
    """Malformed edge-list input."""


class Side(enum.Enum):
    LEFT = "L"
    RIGHT = "R"


class VertexId(NamedTuple):
    side: Side
    index: int


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _csr(n_rows: int, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((cols, rows))
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
    return indptr, cols[order].astype(np.int64)


class BipartiteGraph:
    """Immutable bipartite graph with left vertices ``0..n_left-1`` (users)
    and right vertices ``0..n_right-1`` (positions).

    Adjacency is stored in CSR form for both sides; neighbor lists are
    sorted and duplicate-free.
    """

    __slots__ = ("n_left", "n_right", "indptr", "indices", "rindptr", "rindices")

    def __init__(self, n_left: int, n_right: int, edges: Iterable[tuple[int, int]] | np.ndarray = ()):
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        self._init_arrays(n_left, n_right, arr[:, 0], arr[:, 1])

    @classmethod
    def from_arrays(cls, n_left: int, n_right: int, left: np.ndarray, right: np.ndarray) -> BipartiteGraph:
        g = cls.__new__(cls)
        g._init_arrays(n_left, n_right, np.asarray(left, dtype=np.int64), np.asarray(right, dtype=np.int64))
        return g

    def _init_arrays(self, n_left: int, n_right: int, left: np.ndarray, right: np.ndarray) -> None:
        if n_left < 0 or n_right < 0:
            raise ValueError("vertex counts must be non-negative")
        if left.size:
            if left.min() < 0 or left.max() >= n_left or right.min() < 0 or right.max() >= n_right:
                raise ValueError("edge endpoint out of range")
            key = np.unique(left * max(n_right, 1) + right)
            left, right = key // max(n_right, 1), key % max(n_right, 1)
        object.__setattr__(self, "n_left", int(n_left))
        object.__setattr__(self, "n_right", int(n_right))
        indptr, indices = _csr(n_left, left, right)
        rindptr, rindices = _csr(n_right, right, left)
        for name, a in (("indptr", indptr), ("indices", indices), ("rindptr", rindptr), ("rindices", rindices)):
            object.__setattr__(self, name, _frozen(a))

    def __setattr__(self, name, value):
        raise AttributeError("BipartiteGraph is immutable")

    @property
    def n_edges(self) -> int:
        return int(self.indices.size)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def left_neighbors(self, v: int) -> np.ndarray:
        return self.rindices[self.rindptr[v]:self.rindptr[v + 1]]

    def left_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def right_degrees(self) -> np.ndarray:
        return np.diff(self.rindptr)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(left, right)`` endpoint arrays in CSR order."""
        return np.repeat(np.arange(self.n_left, dtype=np.int64), self.left_degrees()), self.indices

    def edges(self) -> Iterator[tuple[int, int]]:
        left, right = self.edge_arrays()
        return zip(left.tolist(), right.tolist())

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def neighborhood(self, left_vertices: Iterable[int]) -> set[int]:
        out: set[int] = set()
        for u in left_vertices:
            out.update(self.neighbors(u).tolist())
        return out

    def induced(self, left: np.ndarray | list[int], right: np.ndarray | list[int]) -> BipartiteGraph:
        """Subgraph on the given vertices, relabelled to ``0..len-1`` in the given order."""
        left = np.asarray(left, dtype=np.int64)
        right = np.asarray(right, dtype=np.int64)
        lpos = np.full(self.n_left, -1, dtype=np.int64)
        lpos[left] = np.arange(left.size)
        rpos = np.full(self.n_right, -1, dtype=np.int64)
        rpos[right] = np.arange(right.size)
        eu, ev = self.edge_arrays()
        keep = (lpos[eu] >= 0) & (rpos[ev] >= 0)
        return BipartiteGraph.from_arrays(left.size, right.size, lpos[eu[keep]], rpos[ev[keep]])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.n_left == other.n_left and self.n_right == other.n_right
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"BipartiteGraph(n_left={self.n_left}, n_right={self.n_right}, n_edges={self.n_edges})"


class Matching(Mapping[int, int]):
    """Immutable partial map left vertex -> right vertex, injective."""

    __slots__ = ("_pairs", "_hash")

    def __init__(self, pairs: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        d = dict(pairs)
        if len(set(d.values())) != len(d):
            raise ValueError("matching must be injective")
        self._pairs = d
        self._hash: int | None = None

    def __getitem__(self, u: int) -> int:
        return self._pairs[u]

    def __iter__(self) -> Iterator[int]:
        return iter(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._pairs.items()))
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Matching):
            return self._pairs == other._pairs
        return NotImplemented

    def __repr__(self) -> str:
        return f"Matching({dict(sorted(self._pairs.items()))})"

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self._pairs.items())

    def relabel(self, left_map: np.ndarray | list[int], right_map: np.ndarray | list[int]) -> Matching:
        return Matching((int(left_map[u]), int(right_map[v])) for u, v in self._pairs.items())

    def union(self, other: Mapping[int, int]) -> Matching:
        d = dict(self._pairs)
        d.update(other)
        return Matching(d)

    def is_valid_in(self, graph: BipartiteGraph) -> bool:
        return all(0 <= u < graph.n_left and graph.has_edge(u, v) for u, v in self._pairs.items())


# --- edge-list I/O --------------------------------------------------------

def load_edge_list(stream: TextIO | str) -> BipartiteGraph:
    """Parse ``u v`` lines (1-based; ``u`` left, ``v`` right). ``%`` starts a comment line.

    >>> g = load_edge_list("1 1\\n2 1\\n3 1")
    >>> (g.n_left, g.n_right, g.n_edges)
    (3, 1, 3)
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    left: list[int] = []
    right: list[int] = []
    for lineno, line in enumerate(stream, start=1):
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        if len(parts) < 2:
            raise GraphFormatError(f"line {lineno}: expected two integers, got {s!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: expected two integers, got {s!r}") from None
        if u <= 0 or v <= 0:
            raise GraphFormatError(f"line {lineno}: vertex indices are 1-based, got {u} {v}")
        left.append(u - 1)
        right.append(v - 1)
    n_left = max(left, default=-1) + 1
    n_right = max(right, default=-1) + 1
    return BipartiteGraph.from_arrays(n_left, n_right, np.array(left, dtype=np.int64), np.array(right, dtype=np.int64))


def serialize_edge_list(graph: BipartiteGraph) -> str:
    """Canonical form: sorted ``u v`` lines, 1-based."""
    return "".join(f"{u + 1} {v + 1}\n" for u, v in graph.edges())


def erdos_renyi(n_left: int, n_right: int, m: int, seed: int | None = None) -> BipartiteGraph:
    """Uniform random bipartite graph with exactly ``m`` distinct edges."""
    total = n_left * n_right
    if m > total:
        raise ValueError(f"cannot place {m} edges in a {n_left}x{n_right} graph")
    rng = np.random.default_rng(seed)
    keys = rng.choice(total, size=m, replace=False)
    return BipartiteGraph.from_arrays(n_left, n_right, keys // n_right, keys % n_right)


# --- preprocessing --------------------------------------------------------

@dataclass(frozen=True)
class Remap:
    """Index remapping produced by :func:`remove_isolated`.

    ``left[i]`` is the original index of new left vertex ``i``; likewise
    ``right``. ``dropped`` lists the removed original vertices.
    """

    left: np.ndarray
    right: np.ndarray
    dropped: tuple[VertexId, ...]

    @property
    def dropped_left(self) -> list[int]:
        return [v.index for v in self.dropped if v.side is Side.LEFT]


def remove_isolated(graph: BipartiteGraph) -> tuple[BipartiteGraph, Remap]:
    keep_l = np.flatnonzero(graph.left_degrees() > 0)
    keep_r = np.flatnonzero(graph.right_degrees() > 0)
    dropped = tuple(
        [VertexId(Side.LEFT, int(u)) for u in np.flatnonzero(graph.left_degrees() == 0)]
        + [VertexId(Side.RIGHT, int(v)) for v in np.flatnonzero(graph.right_degrees() == 0)]
    )
    if not dropped:
        return graph, Remap(np.arange(graph.n_left), np.arange(graph.n_right), ())
    return graph.induced(keep_l, keep_r), Remap(keep_l, keep_r, dropped)


def _max_matching_arrays(graph: BipartiteGraph) -> np.ndarray:
    match_l = np.full(graph.n_left, -1, dtype=np.int64)
    match_r = np.full(graph.n_right, -1, dtype=np.int64)
    ones = np.ones(graph.n_edges, dtype=np.int64)
    _kernels.hopcroft_karp(graph.n_left, graph.n_right, graph.indptr, graph.indices, ones, match_l, match_r)
    return match_l


def maximum_matching(graph: BipartiteGraph) -> Matching:
    """Hopcroft-Karp maximum matching; deterministic for a given graph."""
    match_l = _max_matching_arrays(graph)
    us = np.flatnonzero(match_l >= 0)
    return Matching(zip(us.tolist(), match_l[us].tolist()))


class ReductionCase(enum.Enum):
    ALL_MATCHABLE = "all-matchable"
    CANONICAL = "canonical"


@dataclass(frozen=True)
class ReductionReport:
    """Outcome of :func:`reduce_to_one_sided`.

    In the canonical case ``canonical_graph`` is relabelled; ``left_map`` and
    ``right_map`` give original indices of its vertices. ``isolated_left``
    are users with no edge at all (satisfaction probability 0).
    """

    kept_right: frozenset[int]
    rho: int
    case: ReductionCase
    witness_matching: Matching
    canonical_graph: BipartiteGraph | None
    left_map: np.ndarray
    right_map: np.ndarray
    isolated_left: tuple[int, ...]


def reduce_to_one_sided(graph: BipartiteGraph) -> ReductionReport:
    """Trim right vertices to those covered by a maximum matching.

    Matchable subsets of users are unchanged by the trimming. When every
    user of positive degree can be matched at once the instance is
    ``ALL_MATCHABLE`` and the witness matching is already fair.
    """
    witness = maximum_matching(graph)
    rho = len(witness)
    isolated = tuple(np.flatnonzero(graph.left_degrees() == 0).tolist())
    kept_right = np.array(sorted(witness.values()), dtype=np.int64)
    live_left = np.flatnonzero(graph.left_degrees() > 0)
    if rho == live_left.size:
        return ReductionReport(frozenset(kept_right.tolist()), rho, ReductionCase.ALL_MATCHABLE, witness,
                               None, live_left, kept_right, isolated)
    trimmed = graph.induced(np.arange(graph.n_left), kept_right)
    canonical, remap = remove_isolated(trimmed)
    return ReductionReport(frozenset(kept_right.tolist()), rho, ReductionCase.CANONICAL, witness,
                           canonical, remap.left, kept_right[remap.right], isolated)
