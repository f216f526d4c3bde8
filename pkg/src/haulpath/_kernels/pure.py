"""Pure-Python twins of the compiled kernels.

Same algorithms, same tie-breaking, same floating-point evaluation order as
``_fastpath.pyx`` — the two backends must produce bit-identical output.
"""

from __future__ import annotations

import math
from heapq import heappop, heappush

import numpy as np

UNREACHABLE = 8  # first-move symbol: no feasible path to the target
WILDCARD = 9  # first-move symbol: table diagonal, merges into any run

_INF = math.inf


def first_move_rows(nbr: np.ndarray, cost: np.ndarray, sources) -> np.ndarray:
    """First-move symbols of minimum-cost paths from each source to every cell.

    ``nbr``/``cost`` are the (n, 8) neighbor and edge-cost tables; inf cost
    marks absent or infeasible edges. Ties between equal-cost paths are broken
    by smaller first-move index, then smaller predecessor id, and the heap
    orders equal distances by node id, which makes the result deterministic.
    """
    n = nbr.shape[0]
    nbr_l = nbr.tolist()
    cost_l = cost.tolist()
    out = np.empty((len(sources), n), dtype=np.uint8)
    for i, source in enumerate(sources):
        out[i] = _one_row(nbr_l, cost_l, int(source), n)
    return out


def _one_row(nbr_l, cost_l, source, n):
    dist = [_INF] * n
    fm = [UNREACHABLE] * n
    pred = [-1] * n
    settled = [False] * n
    dist[source] = 0.0
    fm[source] = WILDCARD
    heap = [(0.0, source)]
    while heap:
        d, u = heappop(heap)
        if settled[u] or d > dist[u]:
            continue
        settled[u] = True
        row_n = nbr_l[u]
        row_c = cost_l[u]
        fm_u = fm[u]
        for k in range(8):
            v = row_n[k]
            if v < 0:
                continue
            c = row_c[k]
            if c == _INF:
                continue
            nd = d + c
            if nd < dist[v]:
                dist[v] = nd
                fm[v] = k if u == source else fm_u
                pred[v] = u
                heappush(heap, (nd, v))
            elif nd == dist[v] and not settled[v]:
                cand = k if u == source else fm_u
                if cand < fm[v] or (cand == fm[v] and u < pred[v]):
                    fm[v] = cand
                    pred[v] = u
    return fm


def dijkstra_distances(nbr: np.ndarray, cost: np.ndarray, source: int) -> np.ndarray:
    """Minimum cost from ``source`` to every cell (inf where unreachable)."""
    n = nbr.shape[0]
    nbr_l = nbr.tolist()
    cost_l = cost.tolist()
    dist = [_INF] * n
    settled = [False] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heappop(heap)
        if settled[u] or d > dist[u]:
            continue
        settled[u] = True
        row_n = nbr_l[u]
        row_c = cost_l[u]
        for k in range(8):
            v = row_n[k]
            if v < 0:
                continue
            c = row_c[k]
            if c == _INF:
                continue
            nd = d + c
            if nd < dist[v]:
                dist[v] = nd
                heappush(heap, (nd, v))
    return np.array(dist)


def zstar_path(
    nbr: np.ndarray,
    cost: np.ndarray,
    z: np.ndarray,
    ncols: int,
    cellsize: float,
    mgw: float,
    mu: float,
    phi_gamma: float,
    phi_c: float,
    s: int,
    t: int,
):
    """Point-to-point best-first search under the straight-line energy bound.

    Returns ``(path_node_ids, energy, expansions)`` or ``(None, inf, expansions)``
    when no path exists. Heap order is (f, -g, node): best f first, then the
    deeper node, then the smaller id.
    """
    n = nbr.shape[0]
    if s == t:
        return [s], 0.0, 0
    nbr_l = nbr.tolist()
    cost_l = cost.tolist()
    z_l = z.tolist()
    tr, tc = divmod(t, ncols)
    zt = z_l[t]

    def heur(v):
        vr, vc = divmod(v, ncols)
        horiz = math.hypot(tr - vr, tc - vc) * cellsize
        dz = zt - z_l[v]
        theta = math.atan2(dz, horiz)
        if theta > phi_gamma:
            climb = dz if dz > 0.0 else 0.0
            if climb == 0.0:
                return 0.0
            if phi_gamma <= 0.0:
                return _INF
            sin_pg = math.sin(phi_gamma)
            return mgw * (climb / sin_pg) * (mu * math.cos(phi_gamma) + sin_pg)
        if theta < -phi_c:
            return 0.0
        slen = math.hypot(horiz, dz)
        return mgw * slen * (mu * math.cos(theta) + math.sin(theta))

    gbest = [_INF] * n
    pred = [-1] * n
    hcache = [-1.0] * n  # h >= 0, so -1 marks "not computed yet"
    gbest[s] = 0.0
    heap = [(heur(s), -0.0, s)]
    expansions = 0
    while heap:
        f, ng, u = heappop(heap)
        gu = -ng
        if gu > gbest[u]:
            continue
        expansions += 1
        if u == t:
            path = []
            v = t
            while v != -1:
                path.append(v)
                v = pred[v]
            path.reverse()
            return path, gbest[t], expansions
        row_n = nbr_l[u]
        row_c = cost_l[u]
        for k in range(8):
            v = row_n[k]
            if v < 0:
                continue
            c = row_c[k]
            if c == _INF:
                continue
            nd = gu + c
            if nd < gbest[v]:
                gbest[v] = nd
                pred[v] = u
                hv = hcache[v]
                if hv < 0.0:
                    hv = heur(v)
                    hcache[v] = hv
                heappush(heap, (nd + hv, -nd, v))
    return None, _INF, expansions
