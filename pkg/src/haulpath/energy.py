"""Payload-dependent traversal energy and slope-feasibility limits.

The cost of an edge is ``(rho + m) * g * s * (mu*cos(theta) + sin(theta))``,
gated by two slope limits: climbs steeper than ``phi_gamma`` are infeasible,
descents steeper than ``phi_c`` cost nothing (the robot brakes). Both limits
shrink as the payload ``rho`` grows, which is what makes route choice
payload-dependent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .terrain import TerrainGrid, EdgeGeometry, geometry_tables, neighbor_table

STANDARD_GRAVITY = 9.80665

INFEASIBLE = math.inf  # edge cost marker, not an error


@dataclass(frozen=True)
class RobotConfig:
    """Physical robot parameters. ``mu_s >= mu`` is required: otherwise the
    static-friction slope limit would be negative and no uphill motion is
    possible at any payload."""

    mass_kg: float
    velocity_mps: float
    p_max_w: float
    mu: float
    mu_s: float
    g: float = STANDARD_GRAVITY

    def __post_init__(self):
        for name in ("mass_kg", "velocity_mps", "p_max_w", "mu", "mu_s", "g"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.mu_s < self.mu:
            raise ValueError("mu_s must be >= mu")

    @property
    def f_max(self) -> float:
        """Maximum traction force at constant velocity."""
        return self.p_max_w / self.velocity_mps

    @classmethod
    def from_dict(cls, data: dict) -> "RobotConfig":
        kwargs = {k: float(data[k]) for k in ("mass_kg", "velocity_mps", "p_max_w", "mu", "mu_s")}
        if "g" in data:
            kwargs["g"] = float(data["g"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "RobotConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "mass_kg": self.mass_kg,
            "velocity_mps": self.velocity_mps,
            "p_max_w": self.p_max_w,
            "mu": self.mu,
            "mu_s": self.mu_s,
            "g": self.g,
        }


@dataclass(frozen=True)
class SlopeLimits:
    """Slope angle bounds (radians) at one payload.

    ``phi_f``: traction-limited climb angle; ``phi_s``: static-friction limit;
    ``phi_gamma = min(phi_f, phi_s)``: hardest permissible climb;
    ``phi_c``: steepest descent that still consumes energy.
    """

    phi_f: float
    phi_s: float
    phi_gamma: float
    phi_c: float


def slope_limits(cfg: RobotConfig, rho: float) -> SlopeLimits:
    """Slope bounds for total payload ``rho`` (kg).

    ``phi_gamma <= 0`` is a valid, fully blocking result (the robot cannot
    move on level ground at that payload).
    """
    arg = cfg.f_max / ((rho + cfg.mass_kg) * cfg.g * math.sqrt(cfg.mu * cfg.mu + 1.0))
    if arg <= 1.0:
        phi_f = math.asin(arg) - math.atan(cfg.mu)
    else:
        phi_f = math.pi / 2.0 - math.atan(cfg.mu)  # traction never binding
    phi_s = math.atan(cfg.mu_s - cfg.mu)
    return SlopeLimits(
        phi_f=phi_f,
        phi_s=phi_s,
        phi_gamma=min(phi_f, phi_s),
        phi_c=math.atan(cfg.mu),
    )


def edge_energy(cfg: RobotConfig, rho: float, geom: EdgeGeometry, limits: SlopeLimits) -> float:
    """Joules to traverse one edge, INFEASIBLE if the climb exceeds phi_gamma,
    0.0 on braking descents steeper than phi_c."""
    if geom.theta > limits.phi_gamma:
        return INFEASIBLE
    if geom.theta < -limits.phi_c:
        return 0.0
    return (
        (rho + cfg.mass_kg)
        * cfg.g
        * geom.s
        * (cfg.mu * math.cos(geom.theta) + math.sin(geom.theta))
    )


def _heuristic_scalar(
    mgw: float, mu: float, phi_gamma: float, phi_c: float, horiz: float, dz: float
) -> float:
    """Straight-line energy lower estimate; ``mgw = (rho + m) * g``.

    Kept in exact lockstep (ops and order) with the compiled kernel.
    """
    theta = math.atan2(dz, horiz)
    if theta > phi_gamma:
        # Too steep to go straight: budget a switchback climb at phi_gamma.
        climb = dz if dz > 0.0 else 0.0
        if climb == 0.0:
            return 0.0
        if phi_gamma <= 0.0:
            return math.inf  # no climb is possible at all, so neither is the gain
        sin_pg = math.sin(phi_gamma)
        return mgw * (climb / sin_pg) * (mu * math.cos(phi_gamma) + sin_pg)
    if theta < -phi_c:
        return 0.0
    slen = math.hypot(horiz, dz)
    return mgw * slen * (mu * math.cos(theta) + math.sin(theta))


def heuristic_energy(
    cfg: RobotConfig,
    rho: float,
    v_from: int,
    v_to: int,
    grid: TerrainGrid,
    limits: SlopeLimits,
) -> float:
    """Admissible-by-design estimate of the energy from ``v_from`` to ``v_to``."""
    if v_from == v_to:
        return 0.0
    fr, fc = grid.node_rc(v_from)
    tr, tc = grid.node_rc(v_to)
    horiz = math.hypot(tr - fr, tc - fc) * grid.cellsize
    dz = grid.node_z(v_to) - grid.node_z(v_from)
    return _heuristic_scalar(
        (rho + cfg.mass_kg) * cfg.g, cfg.mu, limits.phi_gamma, limits.phi_c, horiz, dz
    )


def path_energy(cfg: RobotConfig, rho: float, nodes, grid: TerrainGrid) -> float:
    """Total energy of a node sequence; INFEASIBLE if any edge is.

    Raises ValueError when consecutive nodes are not grid neighbors.
    """
    from .terrain import edge_geometry

    limits = slope_limits(cfg, rho)
    total = 0.0
    for vi, vj in zip(nodes, nodes[1:]):
        e = edge_energy(cfg, rho, edge_geometry(grid, vi, vj), limits)
        if e == INFEASIBLE:
            return INFEASIBLE
        total += e
    return total


@lru_cache(maxsize=64)
def cost_table(grid: TerrainGrid, cfg: RobotConfig, rho: float) -> np.ndarray:
    """(num_cells, 8) float64 edge costs aligned with ``neighbor_table``.

    inf marks absent or infeasible edges. Assembled from the cached geometry
    tables with the same operation order as ``edge_energy``, so scalar and
    table-driven evaluation agree bit for bit.
    """
    nbr = neighbor_table(grid)
    s_tab, theta_tab, cos_tab, sin_tab = geometry_tables(grid)
    limits = slope_limits(cfg, rho)
    mgw = (rho + cfg.mass_kg) * cfg.g
    with np.errstate(invalid="ignore"):
        cost = mgw * s_tab * (cfg.mu * cos_tab + sin_tab)
        cost[theta_tab > limits.phi_gamma] = INFEASIBLE
        cost[theta_tab < -limits.phi_c] = 0.0
    cost[nbr < 0] = INFEASIBLE
    cost.flags.writeable = False
    return cost


@lru_cache(maxsize=64)
def reverse_cost_table(grid: TerrainGrid, cfg: RobotConfig, rho: float) -> np.ndarray:
    """Cost of traversing each edge in the reverse direction:
    ``rev[v, k]`` is the cost of moving from ``neighbor_table[v, k]`` to ``v``.
    Used for all-targets distance maps (Dijkstra on the transposed graph)."""
    nbr = neighbor_table(grid)
    fwd = cost_table(grid, cfg, rho)
    rev = np.full_like(fwd, INFEASIBLE)
    n = fwd.shape[0]
    # Opposite direction index: N<->S, NE<->SW, ... is (k + 4) % 8.
    for k in range(8):
        ko = (k + 4) % 8
        w = nbr[:, k]
        ok = w >= 0
        rev[np.flatnonzero(ok), k] = fwd[w[ok], ko]
    rev.flags.writeable = False
    return rev
