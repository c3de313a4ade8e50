"""Parametric flow networks G(lambda_1..lambda_t; T_1..T_t) and their cuts.

Each left set T_i forms its own component. Members receive a source arc of
capacity lambda_i and right vertices send a unit arc to the sink, with
unbounded arcs along the surviving graph edges in between. Components touch only at
``s`` and ``t``, so every component is scaled independently by the
denominator of its lambda and all capacities stay integral.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import _kernels
from .graph import BipartiteGraph

SOURCE = 0
SINK = 1
_CAP_LIMIT = 1 << 62


class ParameterError(ValueError):
    """A lambda outside (0, 1]."""


class FlowInconsistencyError(RuntimeError):
    """A flow that must saturate every source arc did not."""


@dataclass(frozen=True, eq=False)
class FlowNetwork:
    """Arc-array network; arcs leaving the same node are contiguous.

    ``start[x]:start[x+1]`` indexes the arcs out of node ``x``; ``rev[a]`` is
    the paired reverse arc. Node 0 is the source, node 1 the sink, then the
    left vertices (``left_ids``) and the right vertices (``right_ids``).
    """

    start: np.ndarray
    head: np.ndarray
    cap: np.ndarray
    rev: np.ndarray
    left_ids: np.ndarray
    right_ids: np.ndarray
    left_tag: np.ndarray
    right_tag: np.ndarray
    tags: tuple[int, ...]
    lambdas: dict[int, Fraction]
    targets: dict[int, int]
    edge_arc: np.ndarray = field(repr=False)
    edge_left: np.ndarray = field(repr=False)
    edge_right: np.ndarray = field(repr=False)
    sink_arc: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return int(self.start.size - 1)

    @property
    def n_arcs(self) -> int:
        return int(self.head.size)

    def component_tag(self, left_vertex: int) -> int:
        pos = np.flatnonzero(self.left_ids == left_vertex)
        if not pos.size:
            raise KeyError(left_vertex)
        return int(self.left_tag[pos[0]])


@dataclass(frozen=True)
class CutResult:
    flow_value_per_component: dict[int, int]
    reachable_left: frozenset[int]
    reachable_right: frozenset[int]
    saturated: dict[int, bool]
    reachable_left_mask: np.ndarray = field(repr=False, compare=False)
    reachable_right_mask: np.ndarray = field(repr=False, compare=False)


class EdgeFlow(NamedTuple):
    """Integral flow on each graph edge of a network (graph indices)."""

    left: np.ndarray
    right: np.ndarray
    flow: np.ndarray


def _check_lambda(lam: Fraction) -> Fraction:
    lam = Fraction(lam)
    if not 0 < lam <= 1:
        raise ParameterError(f"lambda must lie in (0, 1], got {lam}")
    return lam


def assemble_network(
    left_ids: np.ndarray,
    left_tag: np.ndarray,
    right_ids: np.ndarray,
    right_tag: np.ndarray,
    edge_left: np.ndarray,
    edge_right: np.ndarray,
    lambdas: dict[int, Fraction],
) -> FlowNetwork:
    """Low-level builder from already-filtered arrays.

    ``edge_left``/``edge_right`` are graph indices and every edge must join a
    left and a right vertex carrying the same tag.
    """
    left_ids = np.asarray(left_ids, dtype=np.int64)
    right_ids = np.asarray(right_ids, dtype=np.int64)
    left_tag = np.asarray(left_tag, dtype=np.int64)
    right_tag = np.asarray(right_tag, dtype=np.int64)
    nl, nr = left_ids.size, right_ids.size
    tags = tuple(sorted(lambdas))
    lambdas = {k: _check_lambda(v) for k, v in lambdas.items()}

    sizes = {k: 0 for k in tags}
    for k, c in zip(*np.unique(left_tag, return_counts=True)):
        sizes[int(k)] = int(c)
    num = {k: lambdas[k].numerator for k in tags}
    den = {k: lambdas[k].denominator for k in tags}
    targets = {k: num[k] * sizes[k] for k in tags}
    inf = {k: targets[k] + 1 for k in tags}
    if (any(v >= _CAP_LIMIT for v in inf.values()) or any(v >= _CAP_LIMIT for v in den.values())
            or sum(targets.values()) >= _CAP_LIMIT):
        raise OverflowError("capacities exceed the 62-bit range")

    tag_pos = {k: i for i, k in enumerate(tags)}
    tag_index = np.zeros(max(tags, default=0) + 1, dtype=np.int64)
    for k, i in tag_pos.items():
        tag_index[k] = i
    num_arr = np.array([num[k] for k in tags], dtype=np.int64)
    den_arr = np.array([den[k] for k in tags], dtype=np.int64)
    inf_arr = np.array([inf[k] for k in tags], dtype=np.int64)

    lnode = np.full(int(max(left_ids.max(initial=-1), edge_left.max(initial=-1))) + 1, -1, dtype=np.int64)
    lnode[left_ids] = 2 + np.arange(nl)
    rnode = np.full(int(max(right_ids.max(initial=-1), edge_right.max(initial=-1))) + 1, -1, dtype=np.int64)
    rnode[right_ids] = 2 + nl + np.arange(nr)
    eu = lnode[edge_left]
    ev = rnode[edge_right]
    if (eu < 0).any() or (ev < 0).any():
        raise ValueError("edge endpoint not in the network")
    etag = left_tag[eu - 2]
    if not np.array_equal(etag, right_tag[ev - 2 - nl]):
        raise ValueError("edge joins two different components; delete cross edges first")

    ne = eu.size
    n_fwd = nl + ne + nr
    tail = np.concatenate([np.zeros(nl, np.int64), eu, 2 + nl + np.arange(nr)])
    head = np.concatenate([2 + np.arange(nl), ev, np.ones(nr, np.int64)])
    cap = np.concatenate([
        num_arr[tag_index[left_tag]],
        inf_arr[tag_index[etag]],
        den_arr[tag_index[right_tag]],
    ]).astype(np.int64)
    all_tail = np.concatenate([tail, head])
    all_head = np.concatenate([head, tail])
    all_cap = np.concatenate([cap, np.zeros(n_fwd, np.int64)])
    order = np.argsort(all_tail, kind="stable")
    pos = np.empty(2 * n_fwd, dtype=np.int64)
    pos[order] = np.arange(2 * n_fwd)
    rev = np.empty(2 * n_fwd, dtype=np.int64)
    rev[pos] = pos[(np.arange(2 * n_fwd) + n_fwd) % (2 * n_fwd)]
    n_nodes = 2 + nl + nr
    start = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(all_tail, minlength=n_nodes), out=start[1:])
    return FlowNetwork(
        start=start,
        head=all_head[order],
        cap=all_cap[order],
        rev=rev,
        left_ids=left_ids,
        right_ids=right_ids,
        left_tag=left_tag,
        right_tag=right_tag,
        tags=tags,
        lambdas=lambdas,
        targets=targets,
        edge_arc=pos[nl:nl + ne],
        edge_left=np.asarray(edge_left, dtype=np.int64),
        edge_right=np.asarray(edge_right, dtype=np.int64),
        sink_arc=pos[nl + ne:n_fwd],
    )


def right_owner(graph: BipartiteGraph, partition: Sequence[Sequence[int]]) -> np.ndarray:
    """Index of the earliest set in ``partition`` adjacent to each right vertex (-1 if none)."""
    owner = np.full(graph.n_right, -1, dtype=np.int64)
    for i, members in enumerate(partition):
        for u in members:
            nb = graph.neighbors(u)
            free = nb[owner[nb] == -1]
            owner[free] = i
    return owner


def build_parametric_network(
    graph: BipartiteGraph,
    partition: Sequence[tuple[Sequence[int], Fraction]],
) -> FlowNetwork:
    """Network for the ordered left sets ``partition = [(T_1, lam_1), ...]``.

    Edges from a member of T_i into the neighborhood of an earlier set are
    dropped, so each right vertex belongs to the first set that reaches it.
    Component ``i`` is tagged ``i``.
    """
    sets = [list(map(int, members)) for members, _ in partition]
    lambdas = {i: _check_lambda(lam) for i, (_, lam) in enumerate(partition)}
    seen: set[int] = set()
    for members in sets:
        if seen.intersection(members):
            raise ValueError("partition sets overlap")
        seen.update(members)
    owner = right_owner(graph, sets)
    left_ids = np.array([u for members in sets for u in members], dtype=np.int64)
    left_tag = np.array([i for i, members in enumerate(sets) for _ in members], dtype=np.int64)
    tag_of = np.full(graph.n_left, -1, dtype=np.int64)
    tag_of[left_ids] = left_tag
    eu, ev = graph.edge_arrays()
    keep = (tag_of[eu] >= 0) & (tag_of[eu] == owner[ev])
    right_ids = np.flatnonzero(owner >= 0)
    return assemble_network(left_ids, left_tag, right_ids, owner[right_ids], eu[keep], ev[keep], lambdas)


def _solve_preflow(network: FlowNetwork, use_gap: bool) -> tuple[np.ndarray, np.ndarray]:
    res = network.cap.copy()
    ex = _kernels.max_preflow(network.n_nodes, SOURCE, SINK, network.start, network.head, res, network.rev, use_gap)
    return res, ex


def min_cut(network: FlowNetwork, use_gap: bool = True) -> CutResult:
    """Maximum preflow plus the minimal source side of a minimum cut.

    Only the first push-relabel phase runs. The source side is every node
    reachable in the residual graph from ``s`` or from a node still holding
    excess, which is what ``s`` reaches once that excess is sent back.
    """
    res, ex = _solve_preflow(network, use_gap)
    seen = _kernels.residual_reach(network.n_nodes, SOURCE, SINK, network.start, network.head, res, ex)
    nl = network.left_ids.size
    lmask = seen[2:2 + nl]
    rmask = seen[2 + nl:]
    into_sink = network.cap[network.sink_arc] - res[network.sink_arc]
    flows = {k: 0 for k in network.tags}
    if into_sink.size:
        uniq, inv = np.unique(network.right_tag, return_inverse=True)
        sums = np.zeros(uniq.size, dtype=np.int64)
        np.add.at(sums, inv, into_sink)
        flows.update(zip(uniq.tolist(), sums.tolist()))
    saturated = {k: flows[k] == network.targets[k] for k in network.tags}
    return CutResult(
        flow_value_per_component=flows,
        reachable_left=frozenset(network.left_ids[lmask].tolist()),
        reachable_right=frozenset(network.right_ids[rmask].tolist()),
        saturated=saturated,
        reachable_left_mask=lmask,
        reachable_right_mask=rmask,
    )


def integral_max_flow(network: FlowNetwork, use_gap: bool = True) -> EdgeFlow:
    """Integral maximum flow that saturates every source arc.

    Raises :class:`FlowInconsistencyError` when some component cannot reach
    its target, which means the lambdas were not a valid block assignment.
    """
    res, ex = _solve_preflow(network, use_gap)
    if int(ex[SINK]) != sum(network.targets.values()):
        raise FlowInconsistencyError(
            f"flow {int(ex[SINK])} below target {sum(network.targets.values())}")
    ok = _kernels.return_excess(network.n_nodes, SOURCE, SINK, network.start, network.head, res, network.rev, ex)
    if not ok:
        raise FlowInconsistencyError("excess could not be returned to the source")
    flow = network.cap[network.edge_arc] - res[network.edge_arc]
    return EdgeFlow(network.edge_left, network.edge_right, flow)
