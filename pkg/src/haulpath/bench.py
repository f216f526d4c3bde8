"""Desk-scale benchmark protocol for the two solvers.

Queries are generated deterministically from a seed and screened so every
instance is solvable; each solve is timed ``repeats`` times with the best and
worst runs discarded and the rest averaged. Records land in a CSV plus a
JSON summary; an optional sweep varies the pickup count on shared endpoint
pairs (pickup sets are nested prefixes of one pool).
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .pairsearch import ConcurrentStats, solve_concurrent
from .search import PickupQuery, SearchStats, energy_distance_map, solve_baseline, suboptimality

CSV_COLUMNS = (
    "query_id",
    "algorithm",
    "rho_init",
    "rho_obj",
    "pickups",
    "runtime_ms",
    "energy_j",
    "subopt",
    "expansions",
    "max_branch",
)


@dataclass(frozen=True)
class BenchConfig:
    num_queries: int = 100
    num_pickups: int = 50
    rho_init: float = 4.0
    rho_obj: float = 20.0
    # (lo, hi) uniform ranges; overrides the fixed payloads when set
    rho_init_range: tuple[float, float] | None = None
    rho_obj_range: tuple[float, float] | None = None
    repeats: int = 10
    seed: int = 1
    sweep_pickups: tuple[int, ...] = ()

    def __post_init__(self):
        if self.repeats < 3:
            raise ValueError("repeats must be >= 3 (trimmed mean needs a surviving sample)")
        if self.num_queries < 1 or self.num_pickups < 1:
            raise ValueError("num_queries and num_pickups must be positive")


@dataclass
class BenchRecord:
    query_id: int
    algorithm: str
    rho_init: float
    rho_obj: float
    pickups: int
    runtime_ms: float
    energy_j: float
    subopt: float
    expansions: int
    max_branch: int


def trimmed_mean(samples) -> float:
    """Mean after discarding the single best and single worst sample."""
    if len(samples) < 3:
        raise ValueError("need at least 3 samples")
    ordered = sorted(samples)
    return sum(ordered[1:-1]) / (len(ordered) - 2)


def gen_queries(grid, cfg, bench: BenchConfig, pcpd=None) -> list[PickupQuery]:
    """Deterministic solvable query set.

    Endpoints are resampled until start and target are mutually reachable at
    the full payload and at least one pickup in the smallest prefix that any
    configured sweep will use admits both legs. Each query's pickup pool is
    large enough for the largest sweep point; callers slice prefixes.
    """
    pool = max(bench.num_pickups, max(bench.sweep_pickups, default=0))
    ensure = min([bench.num_pickups, *bench.sweep_pickups])
    valid = grid.valid_ids()
    if len(valid) < pool + 2:
        raise ValueError("terrain has too few traversable cells for the requested pickups")

    queries = []
    for qid in range(bench.num_queries):
        for attempt in range(64):
            rng = np.random.default_rng((bench.seed, qid, attempt))
            if bench.rho_init_range is not None:
                rho_init = float(rng.uniform(*bench.rho_init_range))
            else:
                rho_init = bench.rho_init
            if bench.rho_obj_range is not None:
                rho_obj = float(rng.uniform(*bench.rho_obj_range))
            else:
                rho_obj = bench.rho_obj
            rho_full = rho_init + rho_obj
            if pcpd is not None and not (
                pcpd.buckets[0] <= rho_init and rho_full <= pcpd.buckets[-1]
            ):
                continue
            s, t = (int(v) for v in rng.choice(valid, size=2, replace=False))
            fwd_full = energy_distance_map(grid, cfg, rho_full, s)
            if not math.isfinite(fwd_full[t]):
                continue
            rev_full_s = energy_distance_map(grid, cfg, rho_full, s, reverse=True)
            if not math.isfinite(rev_full_s[t]):
                continue
            picks = tuple(int(v) for v in rng.choice(valid, size=pool, replace=False))
            leg1 = energy_distance_map(grid, cfg, rho_init, s)
            leg2 = energy_distance_map(grid, cfg, rho_full, t, reverse=True)
            if not any(
                math.isfinite(leg1[p]) and math.isfinite(leg2[p]) for p in picks[:ensure]
            ):
                continue
            queries.append(
                PickupQuery(s=s, t=t, pickups=picks, rho_init=rho_init, rho_obj=rho_obj)
            )
            break
        else:
            raise RuntimeError(
                f"terrain too disconnected: no solvable instance for query {qid} "
                f"within the retry budget"
            )
    return queries


def _timed(solve, repeats: int):
    """Run a solver ``repeats`` times; returns (first result, trimmed mean ms)."""
    result = None
    samples = []
    for i in range(repeats):
        t0 = time.perf_counter()
        out = solve()
        samples.append((time.perf_counter() - t0) * 1000.0)
        if i == 0:
            result = out
    return result, trimmed_mean(samples)


def run_queries(grid, cfg, pcpd, queries, repeats: int, *, num_pickups: int | None = None):
    """Paired baseline/concurrent runs over a query list -> BenchRecord list.

    Suboptimality is computed from energies against the baseline run of the
    same query, never from runtimes.
    """
    records = []
    for qid, q in enumerate(queries):
        if num_pickups is not None:
            q = replace(q, pickups=q.pickups[:num_pickups])

        def run_base():
            stats = SearchStats()
            return solve_baseline(grid, cfg, q, stats=stats), stats

        (base_sol, base_stats), base_ms = _timed(run_base, repeats)
        if base_sol is None:
            raise RuntimeError(f"screened query {qid} has no baseline solution")

        def run_conc():
            stats = ConcurrentStats()
            return solve_concurrent(grid, cfg, pcpd, q, stats=stats), stats

        (conc_sol, conc_stats), conc_ms = _timed(run_conc, repeats)
        conc_energy = conc_sol.total_energy if conc_sol is not None else math.inf
        npk = len(q.pickups)
        records.append(
            BenchRecord(
                query_id=qid,
                algorithm="baseline",
                rho_init=q.rho_init,
                rho_obj=q.rho_obj,
                pickups=npk,
                runtime_ms=base_ms,
                energy_j=base_sol.total_energy,
                subopt=0.0,
                expansions=base_stats.expansions,
                max_branch=0,
            )
        )
        records.append(
            BenchRecord(
                query_id=qid,
                algorithm="concurrent",
                rho_init=q.rho_init,
                rho_obj=q.rho_obj,
                pickups=npk,
                runtime_ms=conc_ms,
                energy_j=conc_energy,
                subopt=suboptimality(conc_energy, base_sol.total_energy),
                expansions=conc_stats.expansions,
                max_branch=max(
                    conc_stats.max_successors, conc_stats.max_successors_one_side_done
                ),
            )
        )
    return records


def summarize(records) -> dict:
    """Per-algorithm averages in the shape of the runtime/suboptimality table."""
    summary = {}
    for algo in ("baseline", "concurrent"):
        rows = [r for r in records if r.algorithm == algo]
        if not rows:
            continue
        summary[algo] = {
            "queries": len(rows),
            "avg_runtime_ms": sum(r.runtime_ms for r in rows) / len(rows),
            "avg_suboptimality": sum(r.subopt for r in rows) / len(rows),
            "avg_expansions": sum(r.expansions for r in rows) / len(rows),
        }
    return summary


def run_bench(grid, cfg, pcpd, bench: BenchConfig):
    """Full protocol: per-query records, summary, optional pickup-count sweep."""
    queries = gen_queries(grid, cfg, bench, pcpd=pcpd)
    records = run_queries(
        grid, cfg, pcpd, queries, bench.repeats, num_pickups=bench.num_pickups
    )
    summary = {
        "num_queries": bench.num_queries,
        "num_pickups": bench.num_pickups,
        "repeats": bench.repeats,
        "seed": bench.seed,
        "algorithms": summarize(records),
    }
    sweep_rows = []
    for k in bench.sweep_pickups:
        sweep_records = run_queries(grid, cfg, pcpd, queries, bench.repeats, num_pickups=k)
        for algo in ("baseline", "concurrent"):
            rows = [r for r in sweep_records if r.algorithm == algo]
            sweep_rows.append(
                {
                    "pickups": k,
                    "algorithm": algo,
                    "avg_runtime_ms": sum(r.runtime_ms for r in rows) / len(rows),
                    "num_queries": len(rows),
                }
            )
    return records, summary, sweep_rows


def emit_report(records, out_dir, summary: dict | None = None, sweep_rows=None) -> list[Path]:
    """Write results.csv (+ summary.json, sweep.csv); deterministic ordering."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    results = out / "results.csv"
    with open(results, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.query_id,
                    r.algorithm,
                    repr(r.rho_init),
                    repr(r.rho_obj),
                    r.pickups,
                    repr(r.runtime_ms),
                    repr(r.energy_j),
                    repr(r.subopt),
                    r.expansions,
                    r.max_branch,
                ]
            )
    written.append(results)
    if summary is not None:
        path = out / "summary.json"
        with open(path, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    if sweep_rows:
        path = out / "sweep.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=("pickups", "algorithm", "avg_runtime_ms", "num_queries")
            )
            writer.writeheader()
            for row in sweep_rows:
                writer.writerow(row)
        written.append(path)
    return written


def read_results(path) -> list[BenchRecord]:
    """Parse a results.csv back into records (round-trip of emit_report)."""
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                BenchRecord(
                    query_id=int(row["query_id"]),
                    algorithm=row["algorithm"],
                    rho_init=float(row["rho_init"]),
                    rho_obj=float(row["rho_obj"]),
                    pickups=int(row["pickups"]),
                    runtime_ms=float(row["runtime_ms"]),
                    energy_j=float(row["energy_j"]),
                    subopt=float(row["subopt"]),
                    expansions=int(row["expansions"]),
                    max_branch=int(row["max_branch"]),
                )
            )
    return records
