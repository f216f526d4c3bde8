"""Raster terrain model: an 8-connected elevation grid with per-edge geometry.

The grid is immutable after construction and safe for concurrent reads.
Vertices are row-major cell ids (``row * ncols + col``); nodata cells are
hard obstacles with no edges in or out.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Canonical neighbor order, clockwise from north. Everything downstream
# (first-move symbols, DFS preorder, successor generation) indexes
# directions by their position in this tuple.
DIRECTIONS = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")
DIR_OFFSETS = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))
NUM_DIRS = 8

DEFAULT_NODATA = -9999.0

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")
_REQUIRED_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize")


class GridFormatError(ValueError):
    """Malformed ASCII grid file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class EdgeGeometry:
    """Geometry of one directed grid edge.

    ``s`` is the 3-D Euclidean length, ``theta`` the signed slope angle
    (positive uphill), ``delta_z`` the elevation change end minus start.
    """

    s: float
    theta: float
    delta_z: float


@dataclass(eq=False)
class TerrainGrid:
    ncols: int
    nrows: int
    cellsize: float
    elevations: np.ndarray  # (nrows, ncols) float64; 0.0 under the nodata mask
    nodata_mask: np.ndarray  # (nrows, ncols) bool; True = untraversable
    xllcorner: float = 0.0
    yllcorner: float = 0.0

    def __post_init__(self):
        if self.ncols < 2 or self.nrows < 2:
            raise ValueError("grid must be at least 2x2")
        if not self.cellsize > 0:
            raise ValueError("cellsize must be positive")
        elev = np.ascontiguousarray(np.asarray(self.elevations, dtype=np.float64))
        mask = np.ascontiguousarray(np.asarray(self.nodata_mask, dtype=bool))
        if elev.shape != (self.nrows, self.ncols) or mask.shape != elev.shape:
            raise ValueError("elevation/mask shape does not match grid dimensions")
        if not np.all(np.isfinite(elev[~mask])):
            raise ValueError("non-finite elevation on a traversable cell")
        elev = elev.copy()
        elev[mask] = 0.0  # canonical value under the mask; keeps hashing stable
        elev.flags.writeable = False
        mask = mask.copy()
        mask.flags.writeable = False
        self.elevations = elev
        self.nodata_mask = mask

    # -- vertex helpers ----------------------------------------------------

    @property
    def num_cells(self) -> int:
        return self.nrows * self.ncols

    def valid_ids(self) -> np.ndarray:
        """Ids of traversable cells, ascending."""
        return np.flatnonzero(~self.nodata_mask.ravel()).astype(np.int32)

    def is_valid(self, v: int) -> bool:
        return 0 <= v < self.num_cells and not self.nodata_mask.flat[v]

    def node_rc(self, v: int) -> tuple[int, int]:
        return divmod(int(v), self.ncols)

    def node_id(self, row: int, col: int) -> int:
        if not (0 <= row < self.nrows and 0 <= col < self.ncols):
            raise ValueError(f"cell ({row}, {col}) outside grid")
        return row * self.ncols + col

    def node_z(self, v: int) -> float:
        return float(self.elevations.flat[v])

    def fingerprint(self) -> bytes:
        """32-byte content hash of the grid (dims, spacing, heights, mask)."""
        h = hashlib.sha256()
        h.update(struct.pack("<iid", self.nrows, self.ncols, self.cellsize))
        h.update(self.elevations.tobytes())
        h.update(self.nodata_mask.tobytes())
        return h.digest()


def neighbors(grid: TerrainGrid, v: int) -> list[int]:
    """Traversable neighbors of ``v`` in canonical N..NW order."""
    row, col = grid.node_rc(v)
    out = []
    for dr, dc in DIR_OFFSETS:
        r, c = row + dr, col + dc
        if 0 <= r < grid.nrows and 0 <= c < grid.ncols and not grid.nodata_mask[r, c]:
            out.append(r * grid.ncols + c)
    return out


def edge_geometry(grid: TerrainGrid, vi: int, vj: int) -> EdgeGeometry:
    """Geometry of the edge vi -> vj; vj must be a grid neighbor of vi."""
    ri, ci = grid.node_rc(vi)
    rj, cj = grid.node_rc(vj)
    dr, dc = rj - ri, cj - ci
    if (dr, dc) not in DIR_OFFSETS or not grid.is_valid(vi) or not grid.is_valid(vj):
        raise ValueError(f"{vj} is not adjacent to {vi}")
    horiz = math.hypot(dr, dc) * grid.cellsize
    delta_z = grid.elevations[rj, cj] - grid.elevations[ri, ci]
    return EdgeGeometry(
        s=math.hypot(horiz, delta_z),
        theta=math.atan2(delta_z, horiz),
        delta_z=delta_z,
    )


@lru_cache(maxsize=16)
def neighbor_table(grid: TerrainGrid) -> np.ndarray:
    """(num_cells, 8) int32 neighbor ids in canonical order; -1 where absent.

    Rows of nodata cells are all -1.
    """
    n, ncols, nrows = grid.num_cells, grid.ncols, grid.nrows
    mask = grid.nodata_mask
    table = np.full((n, NUM_DIRS), -1, dtype=np.int32)
    for v in grid.valid_ids():
        row, col = divmod(int(v), ncols)
        for k, (dr, dc) in enumerate(DIR_OFFSETS):
            r, c = row + dr, col + dc
            if 0 <= r < nrows and 0 <= c < ncols and not mask[r, c]:
                table[v, k] = r * ncols + c
    table.flags.writeable = False
    return table


@lru_cache(maxsize=16)
def geometry_tables(grid: TerrainGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-edge (s, theta, cos(theta), sin(theta)) tables aligned with
    ``neighbor_table``.

    Built with the same scalar math as ``edge_geometry`` so table-driven
    kernels and the on-the-fly reference path see bit-identical values.
    Absent edges hold nan.
    """
    nbr = neighbor_table(grid)
    n = grid.num_cells
    s_tab = np.full((n, NUM_DIRS), np.nan)
    theta_tab = np.full((n, NUM_DIRS), np.nan)
    cos_tab = np.full((n, NUM_DIRS), np.nan)
    sin_tab = np.full((n, NUM_DIRS), np.nan)
    elev = grid.elevations.ravel()
    cell = grid.cellsize
    horiz_by_dir = [math.hypot(dr, dc) * cell for dr, dc in DIR_OFFSETS]
    for v in grid.valid_ids():
        zi = elev[v]
        for k in range(NUM_DIRS):
            w = nbr[v, k]
            if w < 0:
                continue
            dz = elev[w] - zi
            horiz = horiz_by_dir[k]
            theta = math.atan2(dz, horiz)
            s_tab[v, k] = math.hypot(horiz, dz)
            theta_tab[v, k] = theta
            cos_tab[v, k] = math.cos(theta)
            sin_tab[v, k] = math.sin(theta)
    for t in (s_tab, theta_tab, cos_tab, sin_tab):
        t.flags.writeable = False
    return s_tab, theta_tab, cos_tab, sin_tab


# -- ASCII grid I/O --------------------------------------------------------


def load_ascii_grid(path) -> TerrainGrid:
    """Load an ESRI ASCII grid (.asc). Nodata cells become untraversable."""
    with open(path, "r") as fh:
        lines = fh.read().splitlines()

    header: dict[str, float] = {}
    data_start = None
    for lineno, raw in enumerate(lines, start=1):
        tokens = raw.split()
        if not tokens:
            continue
        key = tokens[0].lower()
        if key[0].isalpha() or key[0] == "_":
            if key not in _HEADER_KEYS:
                raise GridFormatError(f"unknown header key {tokens[0]!r}", lineno)
            if len(tokens) != 2:
                raise GridFormatError(f"header key {tokens[0]!r} needs exactly one value", lineno)
            try:
                header[key] = float(tokens[1])
            except ValueError:
                raise GridFormatError(
                    f"non-numeric value {tokens[1]!r} for header key {tokens[0]!r}", lineno
                ) from None
        else:
            data_start = lineno
            break
    for key in _REQUIRED_KEYS:
        if key not in header:
            raise GridFormatError(f"missing header key {key!r}")
    if data_start is None:
        raise GridFormatError("no elevation data after header")

    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    if ncols != header["ncols"] or nrows != header["nrows"]:
        raise GridFormatError("ncols/nrows must be integers")
    expected = ncols * nrows
    nodata = header.get("nodata_value", DEFAULT_NODATA)

    values = np.empty(expected)
    count = 0
    for lineno in range(data_start, len(lines) + 1):
        for tok in lines[lineno - 1].split():
            if count >= expected:
                raise GridFormatError(
                    f"expected {expected} elevation values, found extra token {tok!r}", lineno
                )
            try:
                values[count] = float(tok)
            except ValueError:
                raise GridFormatError(f"non-numeric elevation token {tok!r}", lineno) from None
            count += 1
    if count != expected:
        raise GridFormatError(
            f"expected {expected} elevation values, got {count}", len(lines)
        )

    elev = values.reshape(nrows, ncols)
    mask = elev == nodata
    return TerrainGrid(
        ncols=ncols,
        nrows=nrows,
        cellsize=header["cellsize"],
        elevations=elev,
        nodata_mask=mask,
        xllcorner=header["xllcorner"],
        yllcorner=header["yllcorner"],
    )


def save_ascii_grid(grid: TerrainGrid, path, nodata_value: float = DEFAULT_NODATA) -> None:
    """Write the grid back out as an ESRI ASCII file; load/save round-trips."""
    with open(path, "w") as fh:
        fh.write(f"ncols {grid.ncols}\n")
        fh.write(f"nrows {grid.nrows}\n")
        fh.write(f"xllcorner {grid.xllcorner!r}\n")
        fh.write(f"yllcorner {grid.yllcorner!r}\n")
        fh.write(f"cellsize {grid.cellsize!r}\n")
        fh.write(f"NODATA_value {nodata_value!r}\n")
        for r in range(grid.nrows):
            row = [
                repr(nodata_value) if grid.nodata_mask[r, c] else repr(float(grid.elevations[r, c]))
                for c in range(grid.ncols)
            ]
            fh.write(" ".join(row) + "\n")


# -- synthetic terrain -----------------------------------------------------

RAMP_RISE = 0.25  # meters of elevation gained per row in the ramp style


def _hash01(ix: np.ndarray, iy: np.ndarray, seed: int) -> np.ndarray:
    """Deterministic lattice hash -> float64 in [0, 1). Pure integer ops."""
    seed_mix = (seed * 0xD6E8FEB86659FD93) & 0xFFFFFFFFFFFFFFFF
    h = ix.astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
    h ^= iy.astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
    h ^= np.uint64(seed_mix)
    h ^= h >> np.uint64(30)
    h *= np.uint64(0xBF58476D1CE4E5B9)
    h ^= h >> np.uint64(27)
    h *= np.uint64(0x94D049BB133111EB)
    h ^= h >> np.uint64(31)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def _value_noise(xs: np.ndarray, ys: np.ndarray, seed: int) -> np.ndarray:
    ix = np.floor(xs).astype(np.int64)
    iy = np.floor(ys).astype(np.int64)
    fx = xs - ix
    fy = ys - iy
    sx = fx * fx * (3.0 - 2.0 * fx)
    sy = fy * fy * (3.0 - 2.0 * fy)
    v00 = _hash01(ix, iy, seed)
    v10 = _hash01(ix + 1, iy, seed)
    v01 = _hash01(ix, iy + 1, seed)
    v11 = _hash01(ix + 1, iy + 1, seed)
    top = v00 + (v10 - v00) * sx
    bot = v01 + (v11 - v01) * sx
    return top + (bot - top) * sy


def gen_synthetic(size: int, seed: int, style: str, cellsize: float = 1.0) -> TerrainGrid:
    """Deterministic size x size test terrain.

    Styles: ``flat`` (all zero), ``ramp`` (constant slope along columns),
    ``fbm`` (multi-octave value noise whose slope distribution straddles the
    climb limits of a mid-size ground robot).
    """
    if size < 2:
        raise ValueError("size must be >= 2")
    if style == "flat":
        elev = np.zeros((size, size))
    elif style == "ramp":
        rows = np.arange(size, dtype=np.float64)
        elev = np.repeat(rows[:, None] * RAMP_RISE, size, axis=1)
    elif style == "fbm":
        rows, cols = np.mgrid[0:size, 0:size].astype(np.float64)
        base_freq = 3.0 / size
        total = np.zeros((size, size))
        amp, freq, norm = 1.0, base_freq, 0.0
        for octave in range(5):
            total += amp * _value_noise(cols * freq, rows * freq, seed + 101 * octave)
            norm += amp
            amp *= 0.5
            freq *= 2.0
        # Relief scaled so most edges stay gently sloped (heavy loads can
        # still route) while the steepest cross the unloaded climb limit.
        elev = (total / norm) * (0.12 * size * cellsize)
    else:
        raise ValueError(f"unknown style {style!r}")
    mask = np.zeros((size, size), dtype=bool)
    return TerrainGrid(ncols=size, nrows=size, cellsize=cellsize, elevations=elev, nodata_mask=mask)
