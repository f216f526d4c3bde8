"""Payload-bucketed compressed first-move databases.

For each payload bucket, a full table of first moves along minimum-energy
paths is built (one constrained Dijkstra per source cell), sorted by a single
global DFS column order shared across all rows and buckets, and run-length
encoded. Queries binary-search the compressed row: ``first_move`` is O(log
runs), and repeating it walks out the whole path.
"""

from __future__ import annotations

import struct
import time
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._kernels import UNREACHABLE, WILDCARD
from .energy import RobotConfig, cost_table, path_energy
from .search import EnergyPath
from .terrain import DIR_OFFSETS, TerrainGrid, neighbor_table

MAGIC = b"PCPD"
VERSION = 1

_RUN_DT = np.dtype([("start", "<u4"), ("sym", "u1")])  # packed, 5 bytes


class PcpdFormatError(ValueError):
    """Corrupt or incompatible path-database file."""


class FingerprintMismatchError(PcpdFormatError):
    """Database was built for a different terrain."""


# -- column order ------------------------------------------------------------


def dfs_preorder(grid: TerrainGrid, root: int | None = None) -> np.ndarray:
    """DFS preorder over traversable cells, neighbors visited in canonical
    N..NW order. Cells unreachable from the root are covered by further DFS
    passes rooted at the smallest unvisited id, ascending. Deterministic."""
    valid = grid.valid_ids()
    if root is None:
        root = int(valid[0])
    elif not grid.is_valid(root):
        raise ValueError(f"root {root} is not a traversable cell")
    nbr = neighbor_table(grid)
    visited = np.zeros(grid.num_cells, dtype=bool)
    order = []

    def dfs(start: int) -> None:
        stack = [start]
        while stack:
            u = stack.pop()
            if visited[u]:
                continue
            visited[u] = True
            order.append(u)
            row = nbr[u]
            for k in range(7, -1, -1):  # reversed, so N pops first
                v = row[k]
                if v >= 0 and not visited[v]:
                    stack.append(v)

    dfs(root)
    for v in valid:
        if not visited[v]:
            dfs(int(v))
    return np.array(order, dtype=np.int32)


# -- rows and run-length encoding ---------------------------------------------


@dataclass
class FirstMoveRow:
    """Per-target first-move symbols for one source, in DFS column order.

    Symbols are neighbor indices 0..7, UNREACHABLE, or WILDCARD (the source's
    own column, which merges into any run).
    """

    source: int
    moves: np.ndarray


def build_row(
    grid: TerrainGrid, cfg: RobotConfig, rho_bucket: float, source: int, dfs_order: np.ndarray
) -> FirstMoveRow:
    """First-move row for one source at one payload bucket."""
    nbr = neighbor_table(grid)
    cost = cost_table(grid, cfg, rho_bucket)
    fm = _kernels.first_move_rows(nbr, cost, np.array([source], dtype=np.int32))[0]
    return FirstMoveRow(source=int(source), moves=fm[dfs_order])


def rle_compress(moves: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Minimal run list for a symbol row; wildcards merge into the enclosing
    run. Returns (starts, symbols) with 1-based starts, first run at 1."""
    moves = np.asarray(moves, dtype=np.uint8)
    keep = moves != WILDCARD
    comp = moves[keep]
    if comp.size == 0:
        return np.array([1], dtype=np.uint32), np.array([UNREACHABLE], dtype=np.uint8)
    pos = np.flatnonzero(keep)
    change = np.flatnonzero(comp[1:] != comp[:-1]) + 1
    starts = np.empty(change.size + 1, dtype=np.uint32)
    starts[0] = 1
    starts[1:] = pos[change] + 1
    syms = np.empty(change.size + 1, dtype=np.uint8)
    syms[0] = comp[0]
    syms[1:] = comp[change]
    return starts, syms


def rle_decompress(
    starts: np.ndarray, syms: np.ndarray, length: int, wildcard_pos: int | None = None
) -> np.ndarray:
    """Expand runs back to a full row; the wildcard column is re-marked from
    the source identity (it is not stored in the runs)."""
    bounds = np.empty(len(starts) + 1, dtype=np.int64)
    bounds[:-1] = starts
    bounds[-1] = length + 1
    out = np.repeat(np.asarray(syms, dtype=np.uint8), np.diff(bounds))
    if wildcard_pos is not None:
        out[wildcard_pos] = WILDCARD
    return out


# -- database objects ----------------------------------------------------------


@dataclass
class Cpd:
    """Compressed first-move table for one payload bucket."""

    rho: float
    row_starts: list  # per source row (ascending source id): uint32 run starts
    row_syms: list  # matching uint8 run symbols
    dfs_pos: np.ndarray  # cell id -> 0-based DFS position (-1 for nodata)
    id_to_row: np.ndarray  # cell id -> row index (-1 for nodata)
    nrows: int
    ncols: int
    _csr: tuple | None = field(default=None, repr=False, compare=False)

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flattened (row_ptr, starts, syms) view for the compiled kernels."""
        if self._csr is None:
            counts = np.fromiter((len(s) for s in self.row_starts), dtype=np.int64)
            row_ptr = np.zeros(len(counts) + 1, dtype=np.int64)
            np.cumsum(counts, out=row_ptr[1:])
            starts = (
                np.concatenate(self.row_starts).astype(np.uint32)
                if self.row_starts
                else np.empty(0, np.uint32)
            )
            syms = (
                np.concatenate(self.row_syms).astype(np.uint8)
                if self.row_syms
                else np.empty(0, np.uint8)
            )
            self._csr = (row_ptr, starts, syms)
        return self._csr


def first_move(cpd: Cpd, s: int, t: int) -> int | None:
    """First cell of the stored minimum-energy path s -> t, or None when t is
    unreachable in this bucket. Looking up s == t is rejected."""
    if s == t:
        raise ValueError("first-move lookup from a node to itself")
    pos1 = int(cpd.dfs_pos[t]) + 1
    row = int(cpd.id_to_row[s])
    if pos1 <= 0 or row < 0:
        raise ValueError("lookup on a nodata cell")
    starts = cpd.row_starts[row]
    idx = int(np.searchsorted(starts, pos1, side="right")) - 1
    sym = int(cpd.row_syms[row][idx])
    if sym == UNREACHABLE:
        return None
    dr, dc = DIR_OFFSETS[sym]
    return s + dr * cpd.ncols + dc


def extract_path(
    cpd: Cpd, grid: TerrainGrid, cfg: RobotConfig, rho: float, s: int, t: int
) -> EnergyPath | None:
    """Follow stored first moves from s to t; energy is evaluated at the
    querying payload ``rho``, which may differ from the bucket payload (the
    result can then be INFEASIBLE). None when the bucket has no path."""
    if s == t:
        return EnergyPath(nodes=[s], energy=0.0)
    nodes = [s]
    cur = s
    limit = len(cpd.row_starts) + 1
    while cur != t:
        nxt = first_move(cpd, cur, t)
        if nxt is None:
            return None
        nodes.append(nxt)
        cur = nxt
        if len(nodes) > limit:
            raise PcpdFormatError("first-move chain does not terminate (corrupt database)")
    return EnergyPath(nodes=nodes, energy=path_energy(cfg, rho, nodes, grid))


@dataclass
class Pcpd:
    """A family of per-bucket compressed path databases over one terrain."""

    buckets: tuple[float, ...]
    cpds: list[Cpd]
    dfs_order: np.ndarray
    fingerprint: bytes
    nrows: int
    ncols: int
    build_seconds: dict = field(default_factory=dict, compare=False)

    def cpd_for(self, rho: float) -> Cpd:
        i = self.buckets.index(rho)
        return self.cpds[i]

    def bracket(self, rho: float) -> tuple[Cpd, Cpd]:
        """The pair (CPD at largest bucket <= rho, CPD at smallest bucket >=
        rho); the same object twice when rho sits exactly on a bucket."""
        if not self.buckets[0] <= rho <= self.buckets[-1]:
            raise ValueError(
                f"payload {rho} outside bucket range [{self.buckets[0]}, {self.buckets[-1]}]"
            )
        i = bisect_right(self.buckets, rho) - 1
        if self.buckets[i] == rho:
            return self.cpds[i], self.cpds[i]
        return self.cpds[i], self.cpds[i + 1]

    def check_terrain(self, grid: TerrainGrid) -> None:
        fp = grid.fingerprint()
        if fp != self.fingerprint:
            raise FingerprintMismatchError(
                f"terrain fingerprint {fp.hex()} does not match database fingerprint "
                f"{self.fingerprint.hex()}"
            )


def build_pcpd(
    grid: TerrainGrid,
    cfg: RobotConfig,
    buckets=(0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0),
    threads: int = 1,
    chunk: int = 256,
) -> Pcpd:
    """Build one compressed table per payload bucket.

    Rows are independent, so any ``threads`` count yields bit-identical
    results; the compiled kernel releases the GIL while it works.
    """
    buckets = tuple(float(b) for b in buckets)
    if len(buckets) == 0 or any(b2 <= b1 for b1, b2 in zip(buckets, buckets[1:])):
        raise ValueError("buckets must be non-empty and strictly ascending")
    nbr = neighbor_table(grid)
    dfs_order = dfs_preorder(grid)
    valid = np.sort(dfs_order)
    dfs_pos = np.full(grid.num_cells, -1, dtype=np.int64)
    dfs_pos[dfs_order] = np.arange(len(dfs_order))
    id_to_row = np.full(grid.num_cells, -1, dtype=np.int64)
    id_to_row[valid] = np.arange(len(valid))

    source_chunks = [valid[i : i + chunk] for i in range(0, len(valid), chunk)]
    cpds = []
    build_seconds = {}
    for rho in buckets:
        t0 = time.perf_counter()
        cost = cost_table(grid, cfg, rho)

        def run(chunk_sources):
            return _kernels.first_move_rows(nbr, cost, chunk_sources)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                fm_blocks = list(pool.map(run, source_chunks))
        else:
            fm_blocks = [run(c) for c in source_chunks]

        row_starts, row_syms = [], []
        for block in fm_blocks:
            for fm in block:
                starts, syms = rle_compress(fm[dfs_order])
                row_starts.append(starts)
                row_syms.append(syms)
        cpds.append(
            Cpd(
                rho=rho,
                row_starts=row_starts,
                row_syms=row_syms,
                dfs_pos=dfs_pos,
                id_to_row=id_to_row,
                nrows=grid.nrows,
                ncols=grid.ncols,
            )
        )
        build_seconds[rho] = time.perf_counter() - t0
    return Pcpd(
        buckets=buckets,
        cpds=cpds,
        dfs_order=dfs_order,
        fingerprint=grid.fingerprint(),
        nrows=grid.nrows,
        ncols=grid.ncols,
        build_seconds=build_seconds,
    )


# -- serialization --------------------------------------------------------------
#
# Little-endian layout:
#   "PCPD" | u32 version | 32-byte terrain fingerprint | u32 nrows | u32 ncols
#   | u32 n_valid | n_valid * u32 dfs order | u32 bucket_count
#   | bucket_count * { f64 rho, u64 row-offset-table position }
#   then per bucket: row blobs (u32 run count + runs of {u32 start, u8 symbol})
#   followed by its row-offset table (n_valid * u64 absolute offsets).


def serialize_pcpd(pcpd: Pcpd, path) -> dict[float, int]:
    """Write the database; returns serialized bytes per bucket (rows + offset
    table), the figure the size-trend checks look at."""
    sizes = {}
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(pcpd.fingerprint)
        n_valid = len(pcpd.dfs_order)
        fh.write(struct.pack("<III", pcpd.nrows, pcpd.ncols, n_valid))
        fh.write(pcpd.dfs_order.astype("<u4").tobytes())
        fh.write(struct.pack("<I", len(pcpd.buckets)))
        dir_pos = fh.tell()
        fh.write(b"\x00" * (16 * len(pcpd.buckets)))  # directory placeholder
        directory = []
        for cpd in pcpd.cpds:
            offsets = np.empty(n_valid, dtype="<u8")
            start_pos = fh.tell()
            for i in range(n_valid):
                offsets[i] = fh.tell()
                starts = cpd.row_starts[i]
                syms = cpd.row_syms[i]
                runs = np.empty(len(starts), dtype=_RUN_DT)
                runs["start"] = starts
                runs["sym"] = syms
                fh.write(struct.pack("<I", len(starts)))
                fh.write(runs.tobytes())
            table_pos = fh.tell()
            fh.write(offsets.tobytes())
            directory.append((cpd.rho, table_pos))
            sizes[cpd.rho] = fh.tell() - start_pos
        fh.seek(dir_pos)
        for rho, table_pos in directory:
            fh.write(struct.pack("<dQ", rho, table_pos))
    return sizes


def deserialize_pcpd(path, grid: TerrainGrid | None = None) -> Pcpd:
    """Load a database; with ``grid`` given, reject fingerprint mismatches."""
    with open(path, "rb") as fh:
        data = fh.read()

    def need(count: int, offset: int, what: str) -> None:
        if offset + count > len(data):
            raise PcpdFormatError(f"truncated file: {what} at offset {offset}")

    need(4, 0, "magic")
    if data[:4] != MAGIC:
        raise PcpdFormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    need(4, 4, "version")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise PcpdFormatError(f"unsupported version {version}, expected {VERSION}")
    need(32, 8, "fingerprint")
    fingerprint = data[8:40]
    need(12, 40, "dimensions")
    nrows, ncols, n_valid = struct.unpack_from("<III", data, 40)
    off = 52
    need(4 * n_valid, off, "dfs order")
    dfs_order = np.frombuffer(data, dtype="<u4", count=n_valid, offset=off).astype(np.int32)
    off += 4 * n_valid
    need(4, off, "bucket count")
    (nbuckets,) = struct.unpack_from("<I", data, off)
    off += 4
    need(16 * nbuckets, off, "bucket directory")
    directory = [struct.unpack_from("<dQ", data, off + 16 * i) for i in range(nbuckets)]

    num_cells = nrows * ncols
    valid = np.sort(dfs_order)
    dfs_pos = np.full(num_cells, -1, dtype=np.int64)
    dfs_pos[dfs_order] = np.arange(n_valid)
    id_to_row = np.full(num_cells, -1, dtype=np.int64)
    id_to_row[valid] = np.arange(n_valid)

    cpds = []
    for rho, table_pos in directory:
        need(8 * n_valid, table_pos, "row-offset table")
        offsets = np.frombuffer(data, dtype="<u8", count=n_valid, offset=table_pos)
        row_starts, row_syms = [], []
        for i in range(n_valid):
            row_off = int(offsets[i])
            need(4, row_off, "row header")
            (nruns,) = struct.unpack_from("<I", data, row_off)
            need(5 * nruns, row_off + 4, "row runs")
            runs = np.frombuffer(data, dtype=_RUN_DT, count=nruns, offset=row_off + 4)
            row_starts.append(runs["start"])
            row_syms.append(runs["sym"])
        cpds.append(
            Cpd(
                rho=rho,
                row_starts=row_starts,
                row_syms=row_syms,
                dfs_pos=dfs_pos,
                id_to_row=id_to_row,
                nrows=nrows,
                ncols=ncols,
            )
        )

    pcpd = Pcpd(
        buckets=tuple(rho for rho, _ in directory),
        cpds=cpds,
        dfs_order=dfs_order,
        fingerprint=fingerprint,
        nrows=nrows,
        ncols=ncols,
    )
    if grid is not None:
        pcpd.check_terrain(grid)
    return pcpd
