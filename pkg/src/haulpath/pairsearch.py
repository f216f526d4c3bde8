"""Two-level pickup search over precomputed first-move databases.

A global queue ranks pickup candidates by the best f of their child search;
each child runs one paired best-first search whose node tracks two frontiers
at once: start -> pickup (initial payload) and pickup -> target (full
payload). Successor generation consults the two payload buckets bracketing
each side's true payload, so an expansion yields at most four children —
at most two when one side has already reached its goal.

Duplicate joint states are pruned by Pareto dominance on the per-leg costs:
a successor is dropped only when some already-enqueued pair with the same two
frontier cells is at least as cheap on both legs. (Pruning each leg
independently looks tempting but strangles the search: sibling successors
share a frontier cell on one side, so the one expanded second would re-derive
the same move at equal cost and die, taking its other leg's progress with
it.)
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from heapq import heappop, heappush
from itertools import count

import numpy as np

from . import _kernels
from .energy import cost_table, edge_energy, heuristic_energy, slope_limits
from .pathdb import Cpd, Pcpd, first_move
from .search import EnergyPath, PickupQuery, PickupSolution
from .terrain import TerrainGrid, edge_geometry


@dataclass
class SideState:
    """One leg's frontier cell, its accumulated energy, and the parent chain."""

    node: int
    g: float
    parent: "SideState | None"


@dataclass
class PairSearchNode:
    """Joint state of the two legs; f sums both sides' g and heuristic."""

    side_i: SideState  # start -> pickup leg, at the initial payload
    side_j: SideState  # pickup -> target leg, at the full payload
    f: float


@dataclass
class ConcurrentStats:
    expansions: int = 0
    max_successors: int = 0
    max_successors_one_side_done: int = 0
    successor_histogram: Counter = field(default_factory=Counter)


def _side_moves(
    v: int,
    goal: int,
    lo: Cpd,
    hi: Cpd,
    grid: TerrainGrid,
    cfg,
    rho: float,
    limits,
) -> list[tuple[int, float]]:
    """Candidate (next cell, edge cost) extensions for one active side.

    The bracketing buckets each suggest a first move toward the goal; the
    union is kept (one entry when they agree). Every move is screened against
    the side's true payload: the higher bucket's move is feasible there by
    slope monotonicity, but the lower bucket's need not be.
    """
    moves = []
    for cpd in (lo, hi) if hi is not lo else (lo,):
        nxt = first_move(cpd, v, goal)
        if nxt is not None and nxt not in moves:
            moves.append(nxt)
    out = []
    for nxt in moves:
        cost = edge_energy(cfg, rho, edge_geometry(grid, v, nxt), limits)
        if cost == math.inf:
            continue
        out.append((nxt, cost))
    return out


def _dominated(front: list, gi: float, gj: float) -> bool:
    return any(a <= gi and b <= gj for a, b in front)


def _add_to_front(front: list, gi: float, gj: float) -> None:
    front[:] = [(a, b) for a, b in front if not (gi <= a and gj <= b)]
    front.append((gi, gj))


def generate_successors(
    pcpd: Pcpd,
    cfg,
    grid: TerrainGrid,
    node: PairSearchNode,
    pickup: int,
    target: int,
    rho_init: float,
    rho_obj: float,
    seen: dict | None = None,
    limits_i=None,
    limits_j=None,
) -> list[PairSearchNode]:
    """Up to four joint successors of a pair node (two when a side is done).

    ``seen`` maps (cell_i, cell_j) to the Pareto front of enqueued (g_i, g_j)
    values for duplicate pruning; pass None to disable pruning.
    """
    rho_full = rho_init + rho_obj
    if limits_i is None:
        limits_i = slope_limits(cfg, rho_init)
    if limits_j is None:
        limits_j = slope_limits(cfg, rho_full)
    i_done = node.side_i.node == pickup
    j_done = node.side_j.node == target

    if i_done:
        cands_i = [node.side_i]
    else:
        lo, hi = pcpd.bracket(rho_init)
        cands_i = [
            SideState(n, node.side_i.g + c, node.side_i)
            for n, c in _side_moves(node.side_i.node, pickup, lo, hi, grid, cfg, rho_init, limits_i)
        ]
    if j_done:
        cands_j = [node.side_j]
    else:
        lo, hi = pcpd.bracket(rho_full)
        cands_j = [
            SideState(n, node.side_j.g + c, node.side_j)
            for n, c in _side_moves(node.side_j.node, target, lo, hi, grid, cfg, rho_full, limits_j)
        ]
    if not cands_i or not cands_j:
        return []  # an active side has no usable move: the pair dies

    out = []
    for a in cands_i:
        h_a = heuristic_energy(cfg, rho_init, a.node, pickup, grid, limits_i)
        for b in cands_j:
            if seen is not None:
                front = seen.setdefault((a.node, b.node), [])
                if _dominated(front, a.g, b.g):
                    continue
                _add_to_front(front, a.g, b.g)
            f = a.g + h_a + b.g + heuristic_energy(cfg, rho_full, b.node, target, grid, limits_j)
            if f == math.inf:
                continue
            out.append(PairSearchNode(side_i=a, side_j=b, f=f))
    return out


def _side_nodes(state: SideState) -> list[int]:
    nodes = []
    while state is not None:
        nodes.append(state.node)
        state = state.parent
    nodes.reverse()
    return nodes


def solve_concurrent(
    grid: TerrainGrid,
    cfg,
    pcpd: Pcpd,
    query: PickupQuery,
    *,
    stats: ConcurrentStats | None = None,
    backend: str | None = None,
) -> PickupSolution | None:
    """Near-optimal pickup routing via interleaved per-pickup pair searches.

    The first pair to reach both goals wins (no proof of optimality is
    attempted; database pruning already forfeits it). Returns None only after
    every pickup's child queue has been exhausted. ``backend`` overrides the
    import-time kernel choice ("compiled" or "pure"); both produce identical
    solutions.
    """
    query.validate(grid)
    pcpd.check_terrain(grid)
    rho_init, rho_full = query.rho_init, query.rho_full
    if not (pcpd.buckets[0] <= rho_init <= pcpd.buckets[-1]):
        raise ValueError(f"rho_init {rho_init} outside bucket range")
    if not (pcpd.buckets[0] <= rho_full <= pcpd.buckets[-1]):
        raise ValueError(f"rho_init + rho_obj {rho_full} outside bucket range")
    dedup = set()
    pickups = [p for p in query.pickups if not (p in dedup or dedup.add(p))]
    if backend is None:
        backend = _kernels.backend_name()
    if backend == "compiled":
        return _solve_kernel(grid, cfg, pcpd, query, pickups, stats)
    return _solve_pure(grid, cfg, pcpd, query, pickups, stats)


def _solve_kernel(grid, cfg, pcpd, query, pickups, stats):
    rho_init, rho_full = query.rho_init, query.rho_full
    limits_i = slope_limits(cfg, rho_init)
    limits_j = slope_limits(cfg, rho_full)
    lo_i, hi_i = pcpd.bracket(rho_init)
    lo_j, hi_j = pcpd.bracket(rho_full)
    ref = pcpd.cpds[0]
    out = _kernels.get_backend("compiled").pair_search(
        cost_table(grid, cfg, rho_init),
        cost_table(grid, cfg, rho_full),
        grid.elevations.ravel(),
        grid.ncols,
        grid.cellsize,
        cfg.mu,
        (rho_init + cfg.mass_kg) * cfg.g,
        limits_i.phi_gamma,
        limits_i.phi_c,
        (rho_full + cfg.mass_kg) * cfg.g,
        limits_j.phi_gamma,
        limits_j.phi_c,
        ref.dfs_pos,
        ref.id_to_row,
        lo_i.csr(),
        hi_i.csr(),
        lo_j.csr(),
        hi_j.csr(),
        int(query.s),
        int(query.t),
        np.asarray(pickups, dtype=np.int32),
    )
    pidx, leg1, leg2, g_i, g_j, expansions, max_succ, max_succ_od, hist = out
    if stats is not None:
        stats.expansions += expansions
        stats.max_successors = max(stats.max_successors, max_succ)
        stats.max_successors_one_side_done = max(
            stats.max_successors_one_side_done, max_succ_od
        )
        stats.successor_histogram.update({k: v for k, v in enumerate(hist) if v})
    if pidx < 0:
        return None
    nodes = leg1 + leg2[1:]
    return PickupSolution(
        pickup=pickups[pidx],
        path=EnergyPath(nodes=nodes, energy=g_i + g_j),
        leg1_energy=g_i,
        leg2_energy=g_j,
    )


def _solve_pure(grid, cfg, pcpd, query, pickups, stats):
    rho_init, rho_full = query.rho_init, query.rho_full
    limits_i = slope_limits(cfg, rho_init)
    limits_j = slope_limits(cfg, rho_full)
    s, t = query.s, query.t

    tick = count()  # insertion order completes the heap's total order
    child_queues: dict[int, list] = {}
    seen: dict[int, dict] = {}
    global_queue: list = []

    def push_child(p: int, node: PairSearchNode) -> None:
        g_sum = node.side_i.g + node.side_j.g
        heappush(child_queues[p], (node.f, -g_sum, next(tick), node))

    for idx, p in enumerate(pickups):
        f = heuristic_energy(cfg, rho_init, s, p, grid, limits_i) + heuristic_energy(
            cfg, rho_full, p, t, grid, limits_j
        )
        child_queues[p] = []
        seen[p] = {(s, p): [(0.0, 0.0)]}
        if f == math.inf:
            continue  # the climb to this pickup (or onward) is provably impossible
        node = PairSearchNode(SideState(s, 0.0, None), SideState(p, 0.0, None), f)
        push_child(p, node)
        heappush(global_queue, (f, idx, p))

    while global_queue:
        f, idx, p = heappop(global_queue)
        cq = child_queues[p]
        if not cq:
            continue  # exhausted pickup; drop its stale entry
        if f != cq[0][0]:
            heappush(global_queue, (cq[0][0], idx, p))  # stale key: refresh lazily
            continue
        _, _, _, node = heappop(cq)
        if node.side_i.node == p and node.side_j.node == t:
            leg1 = _side_nodes(node.side_i)
            leg2 = _side_nodes(node.side_j)
            nodes = leg1 + leg2[1:]
            return PickupSolution(
                pickup=p,
                path=EnergyPath(nodes=nodes, energy=node.side_i.g + node.side_j.g),
                leg1_energy=node.side_i.g,
                leg2_energy=node.side_j.g,
            )
        succs = generate_successors(
            pcpd, cfg, grid, node, p, t, rho_init, query.rho_obj,
            seen[p], limits_i, limits_j,
        )
        if stats is not None:
            stats.expansions += 1
            stats.successor_histogram[len(succs)] += 1
            if node.side_i.node == p or node.side_j.node == t:
                stats.max_successors_one_side_done = max(
                    stats.max_successors_one_side_done, len(succs)
                )
            else:
                stats.max_successors = max(stats.max_successors, len(succs))
        for succ in succs:
            push_child(p, succ)
        if cq:
            heappush(global_queue, (cq[0][0], idx, p))
    return None
