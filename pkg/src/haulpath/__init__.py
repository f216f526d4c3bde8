"""Energy-minimal pickup routing on raster terrain.

Plan a route from a start cell to a target cell that collects an object from
one of several candidate pickup cells, minimizing payload-dependent traversal
energy. Ships an exact baseline solver and a fast near-optimal concurrent
solver backed by precomputed, payload-bucketed first-move databases.
"""

from ._kernels import backend_name
from .energy import RobotConfig, SlopeLimits, edge_energy, heuristic_energy, path_energy, slope_limits
from .pathdb import Pcpd, build_pcpd, deserialize_pcpd, serialize_pcpd
from .pairsearch import solve_concurrent
from .search import (
    EnergyPath,
    PickupQuery,
    PickupSolution,
    dijkstra_energy,
    solve_baseline,
    suboptimality,
    zstar,
)
from .terrain import TerrainGrid, edge_geometry, gen_synthetic, load_ascii_grid, neighbors, save_ascii_grid

__version__ = "0.1.0"
