"""Compiled inner loops: Hopcroft-Karp and highest-label push-relabel.

Everything here works on flat int64 arrays so numba can compile it.
Callers in graph.py and maxflow.py own validation and object wrapping.
"""

import numpy as np
from numba import njit

INF = np.int64(1) << np.int64(62)


@njit(cache=True)
def hopcroft_karp(n_left, n_right, indptr, indices, counts, match_left, match_right):
    """Grow ``match_left``/``match_right`` in place to a maximum matching.

    Edges with ``counts[k] == 0`` are ignored, which lets the same kernel
    run on multigraphs stored with multiplicities. Free left vertices are
    scanned in ascending order, so the result is deterministic.
    """
    unreached = n_left + 1
    dist = np.empty(n_left, np.int64)
    queue = np.empty(n_left, np.int64)
    it = np.empty(n_left, np.int64)
    stack = np.empty(n_left + 1, np.int64)
    size = 0
    for u in range(n_left):
        if match_left[u] != -1:
            size += 1
    while True:
        qt = 0
        for u in range(n_left):
            if match_left[u] == -1:
                dist[u] = 0
                queue[qt] = u
                qt += 1
            else:
                dist[u] = unreached
        found = unreached
        qh = 0
        while qh < qt:
            u = queue[qh]
            qh += 1
            if dist[u] >= found:
                continue
            for k in range(indptr[u], indptr[u + 1]):
                if counts[k] == 0:
                    continue
                w = match_right[indices[k]]
                if w == -1:
                    if found == unreached:
                        found = dist[u] + 1
                elif dist[w] == unreached:
                    dist[w] = dist[u] + 1
                    queue[qt] = w
                    qt += 1
        if found == unreached:
            break
        for u in range(n_left):
            it[u] = indptr[u]
        for root in range(n_left):
            if match_left[root] != -1:
                continue
            sp = 0
            stack[0] = root
            while sp >= 0:
                u = stack[sp]
                moved = False
                augmented = False
                while it[u] < indptr[u + 1]:
                    k = it[u]
                    it[u] += 1
                    if counts[k] == 0:
                        continue
                    w = match_right[indices[k]]
                    if w == -1:
                        if dist[u] + 1 == found:
                            for i in range(sp + 1):
                                x = stack[i]
                                v = indices[it[x] - 1]
                                match_left[x] = v
                                match_right[v] = x
                            size += 1
                            augmented = True
                            break
                    elif dist[w] == dist[u] + 1:
                        sp += 1
                        stack[sp] = w
                        moved = True
                        break
                if augmented:
                    break
                if not moved:
                    dist[u] = unreached
                    sp -= 1
    return size


@njit(cache=True)
def _bucket_remove(u, lab, first, nxt, prv):
    p = prv[u]
    q = nxt[u]
    if p == -1:
        first[lab] = q
    else:
        nxt[p] = q
    if q != -1:
        prv[q] = p


@njit(cache=True)
def _bucket_insert(u, lab, first, nxt, prv):
    q = first[lab]
    nxt[u] = q
    prv[u] = -1
    if q != -1:
        prv[q] = u
    first[lab] = u


@njit(cache=True)
def _global_relabel(n, s, t, start, head, res, rev, d, ex, cur,
                    act_first, act_next, all_first, all_next, all_prev, queue):
    for u in range(n):
        d[u] = n
        cur[u] = start[u]
        act_first[u] = -1
        all_first[u] = -1
    d[t] = 0
    queue[0] = t
    qh = 0
    qt = 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        for a in range(start[v], start[v + 1]):
            u = head[a]
            if d[u] == n and u != s and res[rev[a]] > 0:
                d[u] = d[v] + 1
                queue[qt] = u
                qt += 1
    dmax_all = -1
    dmax_act = -1
    for i in range(1, qt):
        u = queue[i]
        lab = d[u]
        _bucket_insert(u, lab, all_first, all_next, all_prev)
        if lab > dmax_all:
            dmax_all = lab
        if ex[u] > 0:
            act_next[u] = act_first[lab]
            act_first[lab] = u
            if lab > dmax_act:
                dmax_act = lab
    return dmax_all, dmax_act


@njit(cache=True)
def max_preflow(n, s, t, start, head, res, rev, use_gap):
    """Phase one of highest-label push-relabel.

    Saturates the source arcs and discharges active nodes in order of
    decreasing label until no node with label < n holds excess. ``res`` is
    updated in place; returns the excess vector (``ex[t]`` is the flow
    value).
    """
    d = np.zeros(n, np.int64)
    ex = np.zeros(n, np.int64)
    cur = np.empty(n, np.int64)
    act_first = np.empty(n, np.int64)
    act_next = np.empty(n, np.int64)
    all_first = np.empty(n, np.int64)
    all_next = np.empty(n, np.int64)
    all_prev = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)

    for a in range(start[s], start[s + 1]):
        c = res[a]
        if c > 0:
            v = head[a]
            res[a] = 0
            res[rev[a]] += c
            ex[v] += c
            ex[s] -= c
    dmax_all, dmax_act = _global_relabel(
        n, s, t, start, head, res, rev, d, ex, cur,
        act_first, act_next, all_first, all_next, all_prev, queue)
    d[s] = n

    relabels = 0
    while True:
        while dmax_act >= 0 and act_first[dmax_act] == -1:
            dmax_act -= 1
        if dmax_act < 0:
            break
        u = act_first[dmax_act]
        act_first[dmax_act] = act_next[u]
        if d[u] != dmax_act or ex[u] == 0:
            continue
        du = d[u]
        while True:
            a = cur[u]
            end = start[u + 1]
            while a < end:
                if res[a] > 0:
                    v = head[a]
                    if d[v] == du - 1:
                        delta = ex[u] if ex[u] < res[a] else res[a]
                        if v != t and ex[v] == 0:
                            act_next[v] = act_first[d[v]]
                            act_first[d[v]] = v
                            if d[v] > dmax_act:
                                dmax_act = d[v]
                        res[a] -= delta
                        res[rev[a]] += delta
                        ex[u] -= delta
                        ex[v] += delta
                        if ex[u] == 0:
                            break
                a += 1
            cur[u] = a
            if ex[u] == 0:
                break
            relabels += 1
            if use_gap and all_first[du] == u and all_next[u] == -1:
                for lab in range(du, dmax_all + 1):
                    w = all_first[lab]
                    while w != -1:
                        d[w] = n
                        w = all_next[w]
                    all_first[lab] = -1
                dmax_all = du - 1
                break
            newd = n
            best = start[u]
            for b in range(start[u], end):
                if res[b] > 0:
                    cand = d[head[b]] + 1
                    if cand < newd:
                        newd = cand
                        best = b
            _bucket_remove(u, du, all_first, all_next, all_prev)
            if newd >= n:
                d[u] = n
                break
            d[u] = newd
            du = newd
            cur[u] = best
            _bucket_insert(u, du, all_first, all_next, all_prev)
            if du > dmax_all:
                dmax_all = du
        if relabels > n:
            relabels = 0
            dmax_all, dmax_act = _global_relabel(
                n, s, t, start, head, res, rev, d, ex, cur,
                act_first, act_next, all_first, all_next, all_prev, queue)
            d[s] = n
    return ex


@njit(cache=True)
def residual_reach(n, s, t, start, head, res, ex):
    """Nodes reachable in the residual graph from ``s`` or any excess node.

    For a maximum preflow this equals the source side reachable from ``s``
    once the excess is returned, i.e. the minimal minimum-cut source side.
    """
    seen = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    qt = 0
    for u in range(n):
        if u == s or (u != t and ex[u] > 0):
            seen[u] = True
            queue[qt] = u
            qt += 1
    qh = 0
    while qh < qt:
        u = queue[qh]
        qh += 1
        for a in range(start[u], start[u + 1]):
            if res[a] > 0:
                v = head[a]
                if not seen[v]:
                    seen[v] = True
                    queue[qt] = v
                    qt += 1
    return seen


@njit(cache=True)
def return_excess(n, s, t, start, head, res, rev, ex):
    """Phase two: push leftover excess back to ``s``, turning the preflow into a flow.

    FIFO push-relabel with ``s`` as the target; labels start as exact
    residual distances to ``s``. ``t`` is never a push target.
    """
    big = 2 * n + 2
    d = np.full(n, big, np.int64)
    queue = np.empty(n, np.int64)
    d[s] = 0
    queue[0] = s
    qh = 0
    qt = 1
    while qh < qt:
        x = queue[qh]
        qh += 1
        for a in range(start[x], start[x + 1]):
            y = head[a]
            if y != t and d[y] == big and res[rev[a]] > 0:
                d[y] = d[x] + 1
                queue[qt] = y
                qt += 1
    cur = start[:n].copy()
    inq = np.zeros(n, np.bool_)
    ring = np.empty(n, np.int64)
    qh = 0
    cnt = 0
    for u in range(n):
        if u != s and u != t and ex[u] > 0:
            ring[(qh + cnt) % n] = u
            cnt += 1
            inq[u] = True
    while cnt > 0:
        u = ring[qh]
        qh = (qh + 1) % n
        cnt -= 1
        inq[u] = False
        while ex[u] > 0:
            a = cur[u]
            end = start[u + 1]
            while a < end:
                if res[a] > 0:
                    v = head[a]
                    if v != t and d[v] == d[u] - 1:
                        delta = ex[u] if ex[u] < res[a] else res[a]
                        res[a] -= delta
                        res[rev[a]] += delta
                        ex[u] -= delta
                        ex[v] += delta
                        if v != s and not inq[v]:
                            ring[(qh + cnt) % n] = v
                            cnt += 1
                            inq[v] = True
                        if ex[u] == 0:
                            break
                a += 1
            cur[u] = a
            if ex[u] == 0:
                break
            newd = big
            for b in range(start[u], end):
                if res[b] > 0:
                    v = head[b]
                    if v != t and d[v] + 1 < newd:
                        newd = d[v] + 1
            if newd >= big:
                # unreachable for a genuine maximum preflow
                return False
            d[u] = newd
            cur[u] = start[u]
    return True


@njit(cache=True)
def peel_matching(n_left, indptr, indices, counts, match_left):
    """Remove one copy of every matched edge from a multigraph stored with ``counts``."""
    for u in range(n_left):
        v = match_left[u]
        if v == -1:
            continue
        lo = indptr[u]
        hi = indptr[u + 1]
        while lo < hi:
            mid = (lo + hi) // 2
            if indices[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        counts[lo] -= 1


@njit(cache=True)
def drop_exhausted(n_left, indptr, indices, counts, match_left, match_right):
    """Unmatch left vertices whose matched edge has no copies left."""
    for u in range(n_left):
        v = match_left[u]
        if v == -1:
            continue
        lo = indptr[u]
        hi = indptr[u + 1]
        while lo < hi:
            mid = (lo + hi) // 2
            if indices[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        if counts[lo] == 0:
            match_left[u] = -1
            match_right[v] = -1
