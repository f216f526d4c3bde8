"""Exact single-pair solvers and the iterate-over-pickups baseline.

``dijkstra_energy`` is the reference implementation: plain Python, computing
edge costs from geometry as it goes. It doubles as the correctness oracle for
everything else, so it deliberately shares no machinery with the kernel
backends used by ``zstar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from . import _kernels
from .energy import (
    INFEASIBLE,
    RobotConfig,
    cost_table,
    edge_energy,
    reverse_cost_table,
    slope_limits,
)
from .terrain import TerrainGrid, edge_geometry, neighbor_table, neighbors


@dataclass
class EnergyPath:
    """A node sequence and its total traversal energy at one payload."""

    nodes: list[int]
    energy: float


@dataclass(frozen=True)
class PickupQuery:
    """One routing task: start, target, candidate pickup cells, payloads."""

    s: int
    t: int
    pickups: tuple[int, ...]
    rho_init: float
    rho_obj: float

    def __post_init__(self):
        if not self.pickups:
            raise ValueError("at least one pickup point is required")
        if self.rho_init < 0 or self.rho_obj < 0:
            raise ValueError("payloads must be non-negative")

    @property
    def rho_full(self) -> float:
        return self.rho_init + self.rho_obj

    def validate(self, grid: TerrainGrid) -> None:
        for v in (self.s, self.t, *self.pickups):
            if not grid.is_valid(v):
                raise ValueError(f"node {v} is not a traversable cell")

    @classmethod
    def from_json(cls, data: dict, grid: TerrainGrid) -> "PickupQuery":
        return cls(
            s=grid.node_id(*data["s"]),
            t=grid.node_id(*data["t"]),
            pickups=tuple(grid.node_id(r, c) for r, c in data["pickups"]),
            rho_init=float(data["rho_init"]),
            rho_obj=float(data["rho_obj"]),
        )

    def to_json(self, grid: TerrainGrid) -> dict:
        return {
            "s": list(grid.node_rc(self.s)),
            "t": list(grid.node_rc(self.t)),
            "pickups": [list(grid.node_rc(p)) for p in self.pickups],
            "rho_init": self.rho_init,
            "rho_obj": self.rho_obj,
        }


@dataclass
class PickupSolution:
    """Chosen pickup plus the full start->pickup->target path.

    ``leg1_energy`` is evaluated at the initial payload, ``leg2_energy`` at
    initial + object payload; ``path.energy`` is the re-evaluated two-leg sum.
    """

    pickup: int
    path: EnergyPath
    leg1_energy: float
    leg2_energy: float

    @property
    def total_energy(self) -> float:
        return self.leg1_energy + self.leg2_energy


@dataclass
class SearchStats:
    expansions: int = 0


def dijkstra_energy(
    grid: TerrainGrid,
    cfg: RobotConfig,
    rho: float,
    source: int,
    target: int | None = None,
    *,
    stats: SearchStats | None = None,
):
    """Exact minimum-energy search over slope-feasible edges.

    With a target: returns the optimal EnergyPath, or None if unreachable.
    Without: returns the full distance map as a float64 array (inf where
    unreachable). Ties are popped in (distance, node id) order.
    """
    limits = slope_limits(cfg, rho)
    n = grid.num_cells
    dist = [math.inf] * n
    pred = [-1] * n
    settled = [False] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    expansions = 0
    while heap:
        d, u = heappop(heap)
        if settled[u] or d > dist[u]:
            continue
        settled[u] = True
        expansions += 1
        if u == target:
            break
        for v in neighbors(grid, u):
            c = edge_energy(cfg, rho, edge_geometry(grid, u, v), limits)
            if c == INFEASIBLE:
                continue
            nd = d + c
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heappush(heap, (nd, v))
    if stats is not None:
        stats.expansions += expansions
    if target is None:
        return np.array(dist)
    if not settled[target]:
        return None
    nodes = []
    v = target
    while v != -1:
        nodes.append(v)
        v = pred[v]
    nodes.reverse()
    return EnergyPath(nodes=nodes, energy=dist[target])


def energy_distance_map(
    grid: TerrainGrid, cfg: RobotConfig, rho: float, source: int, *, reverse: bool = False
) -> np.ndarray:
    """Kernel-backed all-targets distance map.

    ``reverse=True`` runs on the transposed graph, giving the cost of
    reaching ``source`` from every cell.
    """
    table = reverse_cost_table(grid, cfg, rho) if reverse else cost_table(grid, cfg, rho)
    return _kernels.dijkstra_distances(neighbor_table(grid), table, int(source))


def zstar(
    grid: TerrainGrid,
    cfg: RobotConfig,
    rho: float,
    s: int,
    t: int,
    *,
    stats: SearchStats | None = None,
) -> EnergyPath | None:
    """Best-first point-to-point search with the straight-line energy bound.

    Matches ``dijkstra_energy`` whenever the bound is admissible for the
    instance; runs on the selected kernel backend.
    """
    limits = slope_limits(cfg, rho)
    nodes, energy, expansions = _kernels.zstar_path(
        neighbor_table(grid),
        cost_table(grid, cfg, rho),
        grid.elevations.ravel(),
        grid.ncols,
        grid.cellsize,
        (rho + cfg.mass_kg) * cfg.g,
        cfg.mu,
        limits.phi_gamma,
        limits.phi_c,
        int(s),
        int(t),
    )
    if stats is not None:
        stats.expansions += expansions
    if nodes is None:
        return None
    return EnergyPath(nodes=list(nodes), energy=energy)


def join_paths(leg1: EnergyPath, leg2: EnergyPath) -> list[int]:
    """Concatenate two legs sharing an endpoint."""
    if leg1.nodes[-1] != leg2.nodes[0]:
        raise ValueError("legs do not share an endpoint")
    return leg1.nodes + leg2.nodes[1:]


def solve_baseline(
    grid: TerrainGrid,
    cfg: RobotConfig,
    query: PickupQuery,
    *,
    parallel: int | None = None,
    stats: SearchStats | None = None,
) -> PickupSolution | None:
    """Try every pickup with two exact searches and keep the cheapest total.

    Unreachable pickups are skipped; returns None when no pickup admits both
    legs. With ``parallel``, per-pickup searches run in a thread pool but the
    minimum is still reduced in pickup order, so results are identical.
    """
    query.validate(grid)
    seen = set()
    pickups = [p for p in query.pickups if not (p in seen or seen.add(p))]

    def legs_for(p: int):
        leg1 = zstar(grid, cfg, query.rho_init, query.s, p, stats=stats)
        if leg1 is None:
            return None
        leg2 = zstar(grid, cfg, query.rho_full, p, query.t, stats=stats)
        if leg2 is None:
            return None
        return leg1, leg2

    if parallel and parallel > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(legs_for, pickups))
    else:
        results = map(legs_for, pickups)

    best = None
    best_total = math.inf
    for p, legs in zip(pickups, results):
        if legs is None:
            continue
        leg1, leg2 = legs
        total = leg1.energy + leg2.energy
        if total < best_total:
            best_total = total
            best = (p, leg1, leg2)
    if best is None:
        return None
    p, leg1, leg2 = best
    nodes = join_paths(leg1, leg2)
    return PickupSolution(
        pickup=p,
        path=EnergyPath(nodes=nodes, energy=leg1.energy + leg2.energy),
        leg1_energy=leg1.energy,
        leg2_energy=leg2.energy,
    )


def suboptimality(found: float, optimal: float) -> float:
    """Relative excess energy of a found solution over the optimum."""
    if optimal < 0 or found < 0:
        raise ValueError("energies must be non-negative")
    if optimal == 0.0:
        return 0.0 if found == 0.0 else math.inf
    return (found - optimal) / optimal


def solution_to_json(
    sol: PickupSolution | None,
    grid: TerrainGrid,
    algorithm: str,
    *,
    expansions: int | None = None,
    wall_time_ms: float | None = None,
    extra: dict | None = None,
) -> dict:
    """Wire format for solver output; ``sol=None`` encodes no-solution."""
    if sol is None:
        doc = {"algorithm": algorithm, "solution": None}
    else:
        doc = {
            "algorithm": algorithm,
            "solution": {
                "pickup": list(grid.node_rc(sol.pickup)),
                "path": [list(grid.node_rc(v)) for v in sol.path.nodes],
                "leg1_energy_j": sol.leg1_energy,
                "leg2_energy_j": sol.leg2_energy,
                "total_energy_j": sol.total_energy,
            },
        }
    if expansions is not None:
        doc["expansions"] = expansions
    if wall_time_ms is not None:
        doc["wall_time_ms"] = wall_time_ms
    if extra:
        doc.update(extra)
    return doc
