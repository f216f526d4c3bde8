# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled hot kernels: all-targets first-move Dijkstra and point-to-point
energy search. Kept in lockstep with ``haulpath._kernels.pure`` — same
tie-breaking, same floating-point evaluation order, bit-identical output."""

import numpy as np

from libc.math cimport INFINITY, atan2, cos, hypot, sin
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memset

UNREACHABLE = 8
WILDCARD = 9

cdef unsigned char C_UNREACHABLE = 8
cdef unsigned char C_WILDCARD = 9

ctypedef unsigned long long u64
cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"


# --- packed (distance, node) heap -------------------------------------------
#
# Distances here are non-negative finite doubles, whose IEEE-754 bit patterns
# order exactly like their values, so (dist, node) packs into a single
# 128-bit key: identical pop order to the pure backend's (dist, node) tuples.

cdef union _bits:
    double d
    u64 u


cdef inline u128 pack_key(double dist, int node) noexcept nogil:
    cdef _bits b
    b.d = dist
    return ((<u128> b.u) << 32) | <u128> (<unsigned int> node)


cdef struct PHeap:
    u128 *key
    Py_ssize_t size
    Py_ssize_t cap


cdef inline bint pheap_init(PHeap *h, Py_ssize_t cap) noexcept nogil:
    h.key = <u128 *> malloc(cap * sizeof(u128))
    h.size = 0
    h.cap = cap
    return h.key != NULL


cdef inline bint pheap_push(PHeap *h, u128 key) noexcept nogil:
    cdef Py_ssize_t i, parent
    cdef u128 *grown
    if h.size == h.cap:
        grown = <u128 *> realloc(h.key, 2 * h.cap * sizeof(u128))
        if grown == NULL:
            return False
        h.key = grown
        h.cap *= 2
    i = h.size
    h.key[i] = key
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if h.key[i] < h.key[parent]:
            key = h.key[i]
            h.key[i] = h.key[parent]
            h.key[parent] = key
            i = parent
        else:
            break
    return True


cdef inline u128 pheap_pop(PHeap *h) noexcept nogil:
    cdef u128 top = h.key[0]
    cdef u128 tmp
    cdef Py_ssize_t i = 0, left, best
    h.size -= 1
    if h.size > 0:
        h.key[0] = h.key[h.size]
        while True:
            left = 2 * i + 1
            if left >= h.size:
                break
            best = left
            if left + 1 < h.size and h.key[left + 1] < h.key[left]:
                best = left + 1
            if h.key[best] < h.key[i]:
                tmp = h.key[i]
                h.key[i] = h.key[best]
                h.key[best] = tmp
                i = best
            else:
                break
    return top


# --- three-key heap for the point-to-point search ----------------------------

cdef struct KHeap:
    double *k1
    double *k2
    int *node
    Py_ssize_t size
    Py_ssize_t cap


cdef inline bint heap_init(KHeap *h, Py_ssize_t cap) noexcept nogil:
    h.k1 = <double *> malloc(cap * sizeof(double))
    h.k2 = <double *> malloc(cap * sizeof(double))
    h.node = <int *> malloc(cap * sizeof(int))
    h.size = 0
    h.cap = cap
    return h.k1 != NULL and h.k2 != NULL and h.node != NULL


cdef inline void heap_free(KHeap *h) noexcept nogil:
    free(h.k1)
    free(h.k2)
    free(h.node)


cdef inline bint heap_grow(KHeap *h) noexcept nogil:
    cdef Py_ssize_t cap = h.cap * 2
    h.k1 = <double *> realloc(h.k1, cap * sizeof(double))
    h.k2 = <double *> realloc(h.k2, cap * sizeof(double))
    h.node = <int *> realloc(h.node, cap * sizeof(int))
    h.cap = cap
    return h.k1 != NULL and h.k2 != NULL and h.node != NULL


cdef inline bint _less(KHeap *h, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    if h.k1[a] != h.k1[b]:
        return h.k1[a] < h.k1[b]
    if h.k2[a] != h.k2[b]:
        return h.k2[a] < h.k2[b]
    return h.node[a] < h.node[b]


cdef inline void _swap(KHeap *h, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef double tk1 = h.k1[a]
    cdef double tk2 = h.k2[a]
    cdef int tn = h.node[a]
    h.k1[a] = h.k1[b]
    h.k2[a] = h.k2[b]
    h.node[a] = h.node[b]
    h.k1[b] = tk1
    h.k2[b] = tk2
    h.node[b] = tn


cdef inline bint heap_push(KHeap *h, double k1, double k2, int node) noexcept nogil:
    cdef Py_ssize_t i, parent
    if h.size == h.cap:
        if not heap_grow(h):
            return False
    i = h.size
    h.k1[i] = k1
    h.k2[i] = k2
    h.node[i] = node
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(h, i, parent):
            _swap(h, i, parent)
            i = parent
        else:
            break
    return True


cdef inline void heap_pop(KHeap *h, double *k1, double *k2, int *node) noexcept nogil:
    cdef Py_ssize_t i = 0, left, right, best
    k1[0] = h.k1[0]
    k2[0] = h.k2[0]
    node[0] = h.node[0]
    h.size -= 1
    if h.size == 0:
        return
    h.k1[0] = h.k1[h.size]
    h.k2[0] = h.k2[h.size]
    h.node[0] = h.node[h.size]
    while True:
        left = 2 * i + 1
        if left >= h.size:
            break
        right = left + 1
        best = left
        if right < h.size and _less(h, right, left):
            best = right
        if _less(h, best, i):
            _swap(h, i, best)
            i = best
        else:
            break


# --- all-targets first-move rows ---------------------------------------------

def first_move_rows(const int[:, ::1] nbr, const double[:, ::1] cost, sources):
    """First-move symbols of minimum-cost paths from each source to every cell.

    Mirrors ``pure.first_move_rows`` exactly (tie-breaking and float order).
    Releases the GIL while computing, so builds parallelize across threads.
    """
    cdef int[::1] src = np.ascontiguousarray(sources, dtype=np.int32)
    cdef Py_ssize_t n = nbr.shape[0]
    cdef Py_ssize_t nsrc = src.shape[0]
    out_arr = np.empty((nsrc, n), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr

    cdef double *dist = <double *> malloc(n * sizeof(double))
    cdef int *pred = <int *> malloc(n * sizeof(int))
    cdef char *settled = <char *> malloc(n * sizeof(char))
    cdef PHeap heap
    cdef bint ok = pheap_init(&heap, 4 * n + 64)
    if dist == NULL or pred == NULL or settled == NULL or not ok:
        free(dist); free(pred); free(settled); free(heap.key)
        raise MemoryError()

    cdef Py_ssize_t i, j
    cdef int source, u, v, k
    cdef unsigned char fm_u, cand
    cdef unsigned char *fm
    cdef const int *nrow
    cdef const double *crow
    cdef u128 key
    cdef double d, c, nd
    with nogil:
        for i in range(nsrc):
            source = src[i]
            fm = &out[i, 0]
            for j in range(n):
                dist[j] = INFINITY
            memset(pred, 0xFF, n * sizeof(int))  # all -1
            memset(settled, 0, n * sizeof(char))
            memset(fm, C_UNREACHABLE, n)
            dist[source] = 0.0
            fm[source] = C_WILDCARD
            heap.size = 0
            pheap_push(&heap, pack_key(0.0, source))
            while heap.size > 0:
                key = pheap_pop(&heap)
                u = <int> (key & <u128> 0xFFFFFFFF)
                if settled[u]:
                    continue
                # A stale entry (node improved after push) always pops after
                # the improved one, so the settled check covers staleness.
                settled[u] = 1
                d = dist[u]
                fm_u = fm[u]
                nrow = &nbr[u, 0]
                crow = &cost[u, 0]
                for k in range(8):
                    v = nrow[k]
                    if v < 0:
                        continue
                    c = crow[k]
                    if c == INFINITY:
                        continue
                    nd = d + c
                    if nd < dist[v]:
                        dist[v] = nd
                        fm[v] = (<unsigned char> k) if u == source else fm_u
                        pred[v] = u
                        if not pheap_push(&heap, pack_key(nd, v)):
                            break
                    elif nd == dist[v] and not settled[v]:
                        cand = (<unsigned char> k) if u == source else fm_u
                        if cand < fm[v] or (cand == fm[v] and u < pred[v]):
                            fm[v] = cand
                            pred[v] = u

    free(dist)
    free(pred)
    free(settled)
    free(heap.key)
    return out_arr


def dijkstra_distances(const int[:, ::1] nbr, const double[:, ::1] cost, int source):
    """Minimum cost from ``source`` to every cell (inf where unreachable)."""
    cdef Py_ssize_t n = nbr.shape[0]
    dist_arr = np.full(n, np.inf)
    cdef double[::1] dist = dist_arr
    cdef char *settled = <char *> malloc(n * sizeof(char))
    cdef PHeap heap
    cdef bint ok = pheap_init(&heap, 4 * n + 64)
    if settled == NULL or not ok:
        free(settled); free(heap.key)
        raise MemoryError()

    cdef int u, v, k
    cdef const int *nrow
    cdef const double *crow
    cdef u128 key
    cdef double d, c, nd
    with nogil:
        memset(settled, 0, n * sizeof(char))
        dist[source] = 0.0
        pheap_push(&heap, pack_key(0.0, source))
        while heap.size > 0:
            key = pheap_pop(&heap)
            u = <int> (key & <u128> 0xFFFFFFFF)
            if settled[u]:
                continue
            settled[u] = 1
            d = dist[u]
            nrow = &nbr[u, 0]
            crow = &cost[u, 0]
            for k in range(8):
                v = nrow[k]
                if v < 0:
                    continue
                c = crow[k]
                if c == INFINITY:
                    continue
                nd = d + c
                if nd < dist[v]:
                    dist[v] = nd
                    if not pheap_push(&heap, pack_key(nd, v)):
                        break
    free(settled)
    free(heap.key)
    return dist_arr


# --- point-to-point energy search --------------------------------------------

cdef inline double _heur(int v, int tr, int tc, double zt, const double[::1] z, int ncols,
                         double cellsize, double mgw, double mu,
                         double phi_gamma, double phi_c) noexcept nogil:
    cdef int vr = v / ncols
    cdef int vc = v % ncols
    cdef double horiz = hypot(<double> (tr - vr), <double> (tc - vc)) * cellsize
    cdef double dz = zt - z[v]
    cdef double theta = atan2(dz, horiz)
    cdef double climb, sin_pg, slen
    if theta > phi_gamma:
        climb = dz if dz > 0.0 else 0.0
        if climb == 0.0:
            return 0.0
        if phi_gamma <= 0.0:
            return INFINITY
        sin_pg = sin(phi_gamma)
        return mgw * (climb / sin_pg) * (mu * cos(phi_gamma) + sin_pg)
    if theta < -phi_c:
        return 0.0
    slen = hypot(horiz, dz)
    return mgw * slen * (mu * cos(theta) + sin(theta))


def zstar_path(const int[:, ::1] nbr, const double[:, ::1] cost, const double[::1] z, int ncols,
               double cellsize, double mgw, double mu, double phi_gamma,
               double phi_c, int s, int t):
    """Point-to-point best-first search under the straight-line energy bound.

    Mirrors ``pure.zstar_path``: heap order (f, -g, node), re-open on strictly
    smaller g. Returns (path list, energy, expansions) or (None, inf, n).
    """
    cdef Py_ssize_t n = nbr.shape[0]
    if s == t:
        return [s], 0.0, 0

    cdef double *gbest = <double *> malloc(n * sizeof(double))
    cdef double *hcache = <double *> malloc(n * sizeof(double))
    cdef int *pred = <int *> malloc(n * sizeof(int))
    cdef KHeap heap
    cdef bint ok = heap_init(&heap, 4 * n + 64)
    if gbest == NULL or hcache == NULL or pred == NULL or not ok:
        free(gbest); free(hcache); free(pred); heap_free(&heap)
        raise MemoryError()

    cdef int tr = t / ncols
    cdef int tc = t % ncols
    cdef double zt = z[t]
    cdef Py_ssize_t j
    cdef int u, v, k
    cdef const int *nrow
    cdef const double *crow
    cdef double f, ng, gu, c, nd, hv
    cdef long expansions = 0
    cdef bint found = False
    with nogil:
        for j in range(n):
            gbest[j] = INFINITY
            hcache[j] = -1.0
            pred[j] = -1
        gbest[s] = 0.0
        heap_push(&heap, _heur(s, tr, tc, zt, z, ncols, cellsize, mgw, mu, phi_gamma, phi_c),
                  -0.0, s)
        while heap.size > 0:
            heap_pop(&heap, &f, &ng, &u)
            gu = -ng
            if gu > gbest[u]:
                continue
            expansions += 1
            if u == t:
                found = True
                break
            nrow = &nbr[u, 0]
            crow = &cost[u, 0]
            for k in range(8):
                v = nrow[k]
                if v < 0:
                    continue
                c = crow[k]
                if c == INFINITY:
                    continue
                nd = gu + c
                if nd < gbest[v]:
                    gbest[v] = nd
                    pred[v] = u
                    hv = hcache[v]
                    if hv < 0.0:
                        hv = _heur(v, tr, tc, zt, z, ncols, cellsize, mgw, mu, phi_gamma, phi_c)
                        hcache[v] = hv
                    if not heap_push(&heap, nd + hv, -nd, v):
                        break

    cdef double energy = gbest[t]
    path = None
    cdef int w
    if found:
        path = []
        w = t
        while w != -1:
            path.append(w)
            w = pred[w]
        path.reverse()
    free(gbest)
    free(hcache)
    free(pred)
    heap_free(&heap)
    if path is None:
        return None, INFINITY, expansions
    return path, energy, expansions


# --- two-level paired pickup search -------------------------------------------
#
# Compiled twin of ``haulpath.pairsearch``'s pure solver: identical queue
# orders (ticks included), identical float evaluation order, identical
# Pareto pruning, so both backends return bit-identical solutions.

from libcpp.pair cimport pair
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

ctypedef pair[double, double] dpair
ctypedef unordered_map[long long, vector[dpair]] front_map


cdef struct CqHeap:
    vector[double] f
    vector[double] ng
    vector[long long] tick
    vector[long long] node


cdef inline bint _cq_less(CqHeap *h, size_t a, size_t b) noexcept:
    if h.f[a] != h.f[b]:
        return h.f[a] < h.f[b]
    if h.ng[a] != h.ng[b]:
        return h.ng[a] < h.ng[b]
    return h.tick[a] < h.tick[b]


cdef inline void _cq_swap(CqHeap *h, size_t a, size_t b) noexcept:
    h.f[a], h.f[b] = h.f[b], h.f[a]
    h.ng[a], h.ng[b] = h.ng[b], h.ng[a]
    h.tick[a], h.tick[b] = h.tick[b], h.tick[a]
    h.node[a], h.node[b] = h.node[b], h.node[a]


cdef void _cq_push(CqHeap *h, double f, double ng, long long tick, long long node) noexcept:
    h.f.push_back(f)
    h.ng.push_back(ng)
    h.tick.push_back(tick)
    h.node.push_back(node)
    cdef size_t i = h.f.size() - 1, parent
    while i > 0:
        parent = (i - 1) >> 1
        if _cq_less(h, i, parent):
            _cq_swap(h, i, parent)
            i = parent
        else:
            break


cdef long long _cq_pop(CqHeap *h) noexcept:
    cdef long long top = h.node[0]
    cdef size_t last = h.f.size() - 1
    cdef size_t i = 0, left, best
    if last > 0:
        _cq_swap(h, 0, last)
    h.f.pop_back()
    h.ng.pop_back()
    h.tick.pop_back()
    h.node.pop_back()
    cdef size_t size = h.f.size()
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        best = left
        if left + 1 < size and _cq_less(h, left + 1, left):
            best = left + 1
        if _cq_less(h, best, i):
            _cq_swap(h, i, best)
            i = best
        else:
            break
    return top


cdef inline int _fm_sym(const long long[::1] rptr, const unsigned int[::1] starts,
                        const unsigned char[::1] syms, const long long[::1] dfs_pos,
                        const long long[::1] id_to_row, int v, int goal) noexcept:
    """First-move symbol 0..7 toward goal, or -1 when unreachable."""
    cdef long long pos1 = dfs_pos[goal] + 1
    cdef long long row = id_to_row[v]
    cdef long long l = rptr[row], r = rptr[row + 1], m
    while l < r:
        m = (l + r) >> 1
        if starts[m] <= pos1:
            l = m + 1
        else:
            r = m
    cdef unsigned char sym = syms[l - 1]
    if sym == C_UNREACHABLE:
        return -1
    return <int> sym


cdef inline bint _dominated(vector[dpair] *front, double gi, double gj) noexcept:
    cdef size_t i
    for i in range(front.size()):
        if front[0][i].first <= gi and front[0][i].second <= gj:
            return True
    return False


cdef inline void _front_add(vector[dpair] *front, double gi, double gj) noexcept:
    cdef vector[dpair] kept
    cdef size_t i
    for i in range(front.size()):
        if not (gi <= front[0][i].first and gj <= front[0][i].second):
            kept.push_back(front[0][i])
    kept.push_back(dpair(gi, gj))
    front[0] = kept


def pair_search(const double[:, ::1] cost_i, const double[:, ::1] cost_j,
                const double[::1] z, int ncols, double cellsize, double mu,
                double mgw_i, double pg_i, double pc_i,
                double mgw_j, double pg_j, double pc_j,
                const long long[::1] dfs_pos, const long long[::1] id_to_row,
                ilo, ihi, jlo, jhi,
                int s, int t, const int[::1] pickups):
    """Two-level paired search; ``ilo``/``ihi``/``jlo``/``jhi`` are the CSR
    triples (row_ptr, starts, syms) for the buckets bracketing each side's
    payload (pass the same triple twice for an exact bucket hit).

    Returns (pickup_index, leg1 nodes, leg2 nodes, g_i, g_j, expansions,
    max_successors, max_successors_one_side_done, histogram[0..4]); a
    pickup_index of -1 means no solution.
    """
    cdef const long long[::1] ilo_ptr = ilo[0]
    cdef const unsigned int[::1] ilo_starts = ilo[1]
    cdef const unsigned char[::1] ilo_syms = ilo[2]
    cdef const long long[::1] ihi_ptr = ihi[0]
    cdef const unsigned int[::1] ihi_starts = ihi[1]
    cdef const unsigned char[::1] ihi_syms = ihi[2]
    cdef const long long[::1] jlo_ptr = jlo[0]
    cdef const unsigned int[::1] jlo_starts = jlo[1]
    cdef const unsigned char[::1] jlo_syms = jlo[2]
    cdef const long long[::1] jhi_ptr = jhi[0]
    cdef const unsigned int[::1] jhi_starts = jhi[1]
    cdef const unsigned char[::1] jhi_syms = jhi[2]
    cdef bint i_same = ilo is ihi or (ilo[0] is ihi[0] and ilo[1] is ihi[1])
    cdef bint j_same = jlo is jhi or (jlo[0] is jhi[0] and jlo[1] is jhi[1])

    cdef long long n = cost_i.shape[0]
    cdef int npk = pickups.shape[0]
    cdef int offs[8]
    offs[0] = -ncols; offs[1] = -ncols + 1; offs[2] = 1; offs[3] = ncols + 1
    offs[4] = ncols; offs[5] = ncols - 1; offs[6] = -1; offs[7] = -ncols - 1

    # node arena
    cdef vector[double] af, agi, agj
    cdef vector[int] avi, avj
    cdef vector[long long] aparent

    cdef vector[CqHeap] cqs = vector[CqHeap](npk)
    cdef vector[front_map] fronts = vector[front_map](npk)

    # global queue: (f, pickup index)
    cdef vector[double] gf
    cdef vector[int] gidx

    cdef long long tick = 0
    cdef long long expansions = 0
    cdef long long max_succ = 0, max_succ_od = 0
    cdef long long hist[5]
    hist[0] = hist[1] = hist[2] = hist[3] = hist[4] = 0

    cdef int idx, p, vi, vj
    cdef double f, hi_est, hj_est
    cdef size_t gq_i, gq_parent, gq_left, gq_best, gq_size
    cdef long long node, key
    cdef vector[dpair] *front

    for idx in range(npk):
        p = pickups[idx]
        hi_est = _heur(s, p // ncols, p % ncols, z[p], z, ncols, cellsize, mgw_i, mu, pg_i, pc_i) if s != p else 0.0
        hj_est = _heur(p, t // ncols, t % ncols, z[t], z, ncols, cellsize, mgw_j, mu, pg_j, pc_j) if p != t else 0.0
        f = hi_est + hj_est
        key = (<long long> s) * n + p
        fronts[idx][key].push_back(dpair(0.0, 0.0))
        if f == INFINITY:
            continue
        af.push_back(f); agi.push_back(0.0); agj.push_back(0.0)
        avi.push_back(s); avj.push_back(p); aparent.push_back(-1)
        node = <long long> af.size() - 1
        _cq_push(&cqs[idx], f, -(0.0 + 0.0), tick, node)
        tick += 1
        # GQ push
        gf.push_back(f); gidx.push_back(idx)
        gq_i = gf.size() - 1
        while gq_i > 0:
            gq_parent = (gq_i - 1) >> 1
            if (gf[gq_i] < gf[gq_parent]) or (gf[gq_i] == gf[gq_parent] and gidx[gq_i] < gidx[gq_parent]):
                gf[gq_i], gf[gq_parent] = gf[gq_parent], gf[gq_i]
                gidx[gq_i], gidx[gq_parent] = gidx[gq_parent], gidx[gq_i]
                gq_i = gq_parent
            else:
                break

    cdef int k, a, b, sym, cnt_i, cnt_j, succ_count
    cdef int cand_i_node[2]
    cdef int cand_j_node[2]
    cdef double cand_i_g[2]
    cdef double cand_j_g[2]
    cdef bint i_done, j_done
    cdef double c, ha, gi_new, gj_new, fnew
    cdef long long goal_node = -1
    cdef int goal_pickup = -1

    while gf.size() > 0:
        # GQ pop
        f = gf[0]; idx = gidx[0]
        gq_size = gf.size() - 1
        if gq_size > 0:
            gf[0] = gf[gq_size]; gidx[0] = gidx[gq_size]
        gf.pop_back(); gidx.pop_back()
        gq_i = 0
        while True:
            gq_left = 2 * gq_i + 1
            if gq_left >= gq_size:
                break
            gq_best = gq_left
            if gq_left + 1 < gq_size and (
                gf[gq_left + 1] < gf[gq_left]
                or (gf[gq_left + 1] == gf[gq_left] and gidx[gq_left + 1] < gidx[gq_left])
            ):
                gq_best = gq_left + 1
            if (gf[gq_best] < gf[gq_i]) or (gf[gq_best] == gf[gq_i] and gidx[gq_best] < gidx[gq_i]):
                gf[gq_i], gf[gq_best] = gf[gq_best], gf[gq_i]
                gidx[gq_i], gidx[gq_best] = gidx[gq_best], gidx[gq_i]
                gq_i = gq_best
            else:
                break

        if cqs[idx].f.size() == 0:
            continue
        if f != cqs[idx].f[0]:
            # stale key: reinsert with the fresh top
            f = cqs[idx].f[0]
            gf.push_back(f); gidx.push_back(idx)
            gq_i = gf.size() - 1
            while gq_i > 0:
                gq_parent = (gq_i - 1) >> 1
                if (gf[gq_i] < gf[gq_parent]) or (gf[gq_i] == gf[gq_parent] and gidx[gq_i] < gidx[gq_parent]):
                    gf[gq_i], gf[gq_parent] = gf[gq_parent], gf[gq_i]
                    gidx[gq_i], gidx[gq_parent] = gidx[gq_parent], gidx[gq_i]
                    gq_i = gq_parent
                else:
                    break
            continue

        p = pickups[idx]
        node = _cq_pop(&cqs[idx])
        vi = avi[node]; vj = avj[node]
        if vi == p and vj == t:
            goal_node = node
            goal_pickup = idx
            break

        i_done = vi == p
        j_done = vj == t
        # side i candidates
        if i_done:
            cnt_i = 1
            cand_i_node[0] = vi
            cand_i_g[0] = agi[node]
        else:
            cnt_i = 0
            sym = _fm_sym(ilo_ptr, ilo_starts, ilo_syms, dfs_pos, id_to_row, vi, p)
            if sym >= 0:
                c = cost_i[vi, sym]
                if c != INFINITY:
                    cand_i_node[cnt_i] = vi + offs[sym]
                    cand_i_g[cnt_i] = agi[node] + c
                    cnt_i += 1
            if not i_same:
                k = _fm_sym(ihi_ptr, ihi_starts, ihi_syms, dfs_pos, id_to_row, vi, p)
                if k >= 0 and k != sym:
                    c = cost_i[vi, k]
                    if c != INFINITY:
                        cand_i_node[cnt_i] = vi + offs[k]
                        cand_i_g[cnt_i] = agi[node] + c
                        cnt_i += 1
        # side j candidates
        if j_done:
            cnt_j = 1
            cand_j_node[0] = vj
            cand_j_g[0] = agj[node]
        else:
            cnt_j = 0
            sym = _fm_sym(jlo_ptr, jlo_starts, jlo_syms, dfs_pos, id_to_row, vj, t)
            if sym >= 0:
                c = cost_j[vj, sym]
                if c != INFINITY:
                    cand_j_node[cnt_j] = vj + offs[sym]
                    cand_j_g[cnt_j] = agj[node] + c
                    cnt_j += 1
            if not j_same:
                k = _fm_sym(jhi_ptr, jhi_starts, jhi_syms, dfs_pos, id_to_row, vj, t)
                if k >= 0 and k != sym:
                    c = cost_j[vj, k]
                    if c != INFINITY:
                        cand_j_node[cnt_j] = vj + offs[k]
                        cand_j_g[cnt_j] = agj[node] + c
                        cnt_j += 1

        succ_count = 0
        if cnt_i > 0 and cnt_j > 0:
            for a in range(cnt_i):
                ha = 0.0 if cand_i_node[a] == p else _heur(
                    cand_i_node[a], p // ncols, p % ncols, z[p], z, ncols, cellsize,
                    mgw_i, mu, pg_i, pc_i)
                for b in range(cnt_j):
                    key = (<long long> cand_i_node[a]) * n + cand_j_node[b]
                    front = &fronts[idx][key]
                    gi_new = cand_i_g[a]
                    gj_new = cand_j_g[b]
                    if _dominated(front, gi_new, gj_new):
                        continue
                    _front_add(front, gi_new, gj_new)
                    hj_est = 0.0 if cand_j_node[b] == t else _heur(
                        cand_j_node[b], t // ncols, t % ncols, z[t], z, ncols, cellsize,
                        mgw_j, mu, pg_j, pc_j)
                    fnew = gi_new + ha + gj_new + hj_est
                    if fnew == INFINITY:
                        continue
                    af.push_back(fnew); agi.push_back(gi_new); agj.push_back(gj_new)
                    avi.push_back(cand_i_node[a]); avj.push_back(cand_j_node[b])
                    aparent.push_back(node)
                    _cq_push(&cqs[idx], fnew, -(gi_new + gj_new), tick,
                             <long long> af.size() - 1)
                    tick += 1
                    succ_count += 1

        expansions += 1
        hist[succ_count if succ_count < 4 else 4] += 1
        if i_done or j_done:
            if succ_count > max_succ_od:
                max_succ_od = succ_count
        else:
            if succ_count > max_succ:
                max_succ = succ_count

        if cqs[idx].f.size() > 0:
            f = cqs[idx].f[0]
            gf.push_back(f); gidx.push_back(idx)
            gq_i = gf.size() - 1
            while gq_i > 0:
                gq_parent = (gq_i - 1) >> 1
                if (gf[gq_i] < gf[gq_parent]) or (gf[gq_i] == gf[gq_parent] and gidx[gq_i] < gidx[gq_parent]):
                    gf[gq_i], gf[gq_parent] = gf[gq_parent], gf[gq_i]
                    gidx[gq_i], gidx[gq_parent] = gidx[gq_parent], gidx[gq_i]
                    gq_i = gq_parent
                else:
                    break

    histogram = [hist[0], hist[1], hist[2], hist[3], hist[4]]
    if goal_node < 0:
        return -1, None, None, 0.0, 0.0, expansions, max_succ, max_succ_od, histogram

    # reconstruct both legs from the pair-parent chain
    leg1, leg2 = [], []
    cdef long long cur = goal_node, par
    while cur != -1:
        par = aparent[cur]
        if par == -1 or avi[cur] != avi[par]:
            leg1.append(avi[cur])
        if par == -1 or avj[cur] != avj[par]:
            leg2.append(avj[cur])
        cur = par
    leg1.reverse()
    leg2.reverse()
    return (goal_pickup, leg1, leg2, agi[goal_node], agj[goal_node],
            expansions, max_succ, max_succ_od, histogram)
