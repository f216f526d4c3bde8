"""Command-line front end.

Subcommands: gen-terrain, build-pcpd, solve, bench, kernel-bench.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import _kernels
from .bench import BenchConfig, emit_report, run_bench
from .energy import RobotConfig, cost_table, slope_limits
from .pairsearch import ConcurrentStats, solve_concurrent
from .pathdb import build_pcpd, deserialize_pcpd, serialize_pcpd
from .search import PickupQuery, SearchStats, solution_to_json, solve_baseline
from .terrain import gen_synthetic, load_ascii_grid, neighbor_table, save_ascii_grid


def _parse_buckets(spec: str) -> tuple[float, ...]:
    """'0:70:10' -> (0, 10, ..., 70); a comma list also works."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("bucket range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError("bucket range must ascend")
        out = []
        v = start
        while v <= stop + 1e-9:
            out.append(round(v, 9))
            v += step
        return tuple(out)
    return tuple(float(p) for p in spec.split(","))


def _parse_int_list(spec: str) -> tuple[int, ...]:
    return tuple(int(p) for p in spec.split(","))


def _parse_range(spec: str) -> tuple[float, float]:
    lo, hi = (float(p) for p in spec.split(":"))
    return lo, hi


def cmd_gen_terrain(args) -> int:
    grid = gen_synthetic(args.size, args.seed, args.style, cellsize=args.cellsize)
    save_ascii_grid(grid, args.out)
    print(f"wrote {args.style} terrain {grid.nrows}x{grid.ncols} to {args.out}")
    return 0


def cmd_build_pcpd(args) -> int:
    grid = load_ascii_grid(args.terrain)
    cfg = RobotConfig.from_json(args.robot)
    pcpd = build_pcpd(grid, cfg, buckets=args.buckets, threads=args.threads)
    sizes = serialize_pcpd(pcpd, args.out)
    print(f"{'bucket_kg':>10} {'build_s':>9} {'bytes':>12}")
    for rho in pcpd.buckets:
        print(f"{rho:>10.1f} {pcpd.build_seconds[rho]:>9.2f} {sizes[rho]:>12d}")
    print(f"wrote {args.out}")
    return 0


def cmd_solve(args) -> int:
    grid = load_ascii_grid(args.terrain)
    cfg = RobotConfig.from_json(args.robot)
    with open(args.query) as fh:
        query = PickupQuery.from_json(json.load(fh), grid)
    extra = {}
    if args.algorithm == "baseline":
        stats = SearchStats()
        t0 = time.perf_counter()
        sol = solve_baseline(grid, cfg, query, stats=stats)
        wall_ms = (time.perf_counter() - t0) * 1000.0
        expansions = stats.expansions
    else:
        if not args.pcpd:
            print("solve --algorithm concurrent requires --pcpd", file=sys.stderr)
            return 2
        pcpd = deserialize_pcpd(args.pcpd, grid)
        cstats = ConcurrentStats()
        t0 = time.perf_counter()
        sol = solve_concurrent(grid, cfg, pcpd, query, stats=cstats)
        wall_ms = (time.perf_counter() - t0) * 1000.0
        expansions = cstats.expansions
        extra["successor_histogram"] = {
            str(k): v for k, v in sorted(cstats.successor_histogram.items())
        }
    doc = solution_to_json(
        sol, grid, args.algorithm, expansions=expansions, wall_time_ms=wall_ms, extra=extra
    )
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    if sol is None:
        print("no solution")
    else:
        r, c = grid.node_rc(sol.pickup)
        print(
            f"pickup ({r}, {c})  total {sol.total_energy:.3f} J  "
            f"(legs {sol.leg1_energy:.3f} + {sol.leg2_energy:.3f})  "
            f"{expansions} expansions  {wall_ms:.2f} ms"
        )
    return 0


def cmd_bench(args) -> int:
    grid = load_ascii_grid(args.terrain)
    cfg = RobotConfig.from_json(args.robot)
    pcpd = deserialize_pcpd(args.pcpd, grid)
    bench = BenchConfig(
        num_queries=args.queries,
        num_pickups=args.pickups,
        rho_init=args.rho_init,
        rho_obj=args.rho_obj,
        rho_init_range=args.random_rho_init,
        rho_obj_range=args.random_rho_obj,
        repeats=args.repeats,
        seed=args.seed,
        sweep_pickups=args.sweep_pickups or (),
    )
    records, summary, sweep_rows = run_bench(grid, cfg, pcpd, bench)
    written = emit_report(records, args.out, summary=summary, sweep_rows=sweep_rows)
    for algo, row in summary["algorithms"].items():
        print(
            f"{algo:>10}: {row['avg_runtime_ms']:9.3f} ms avg, "
            f"subopt {row['avg_suboptimality']:.5f}"
        )
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_kernel_bench(args) -> int:
    """Compare the compiled and pure backends on identical workloads."""
    grid = gen_synthetic(args.size, args.seed, "fbm")
    cfg = RobotConfig(mass_kg=80.0, velocity_mps=1.0, p_max_w=819.2, mu=0.5, mu_s=1.0)
    nbr = neighbor_table(grid)
    cost = cost_table(grid, cfg, args.rho)
    limits = slope_limits(cfg, args.rho)
    z = grid.elevations.ravel()
    mgw = (args.rho + cfg.mass_kg) * cfg.g
    rng = np.random.default_rng(args.seed)
    pairs = rng.integers(0, grid.num_cells, size=(args.searches, 2))
    sources = np.arange(0, grid.num_cells, max(1, grid.num_cells // args.rows), dtype=np.int32)

    backends = []
    for name in ("compiled", "pure"):
        try:
            backends.append((name, _kernels.get_backend(name)))
        except ImportError:
            print(f"{name:>9}: unavailable")

    results = {}
    print(f"terrain {args.size}x{args.size} fbm, payload {args.rho} kg")
    print(f"{'backend':>9} {'fm rows ms/row':>15} {'zstar ms/search':>16}")
    for name, mod in backends:
        t0 = time.perf_counter()
        fm = mod.first_move_rows(nbr, cost, sources)
        row_ms = (time.perf_counter() - t0) * 1000.0 / len(sources)
        t0 = time.perf_counter()
        outs = [
            mod.zstar_path(
                nbr, cost, z, grid.ncols, grid.cellsize, mgw, cfg.mu,
                limits.phi_gamma, limits.phi_c, int(s), int(t),
            )
            for s, t in pairs
        ]
        z_ms = (time.perf_counter() - t0) * 1000.0 / len(pairs)
        results[name] = (fm, outs)
        print(f"{name:>9} {row_ms:>15.3f} {z_ms:>16.3f}")
    if len(results) == 2:
        fm_eq = np.array_equal(results["compiled"][0], results["pure"][0])
        z_eq = all(
            (a[0] is None and b[0] is None)
            or (a[0] is not None and b[0] is not None and list(a[0]) == list(b[0]) and a[1] == b[1])
            for a, b in zip(results["compiled"][1], results["pure"][1])
        )
        print(f"outputs identical: first-move rows {fm_eq}, searches {z_eq}")
        if not (fm_eq and z_eq):
            return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haulpath", description="Energy-minimal pickup routing on raster terrain."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-terrain", help="write a synthetic ESRI ASCII grid")
    p.add_argument("--style", choices=("flat", "ramp", "fbm"), required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cellsize", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_terrain)

    p = sub.add_parser("build-pcpd", help="precompute per-bucket first-move databases")
    p.add_argument("--terrain", required=True)
    p.add_argument("--robot", required=True)
    p.add_argument("--buckets", type=_parse_buckets, default=_parse_buckets("0:70:10"))
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_pcpd)

    p = sub.add_parser("solve", help="solve one pickup-routing query")
    p.add_argument("--algorithm", choices=("baseline", "concurrent"), default="concurrent")
    p.add_argument("--terrain", required=True)
    p.add_argument("--robot", required=True)
    p.add_argument("--pcpd")
    p.add_argument("--query", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run the paired benchmark protocol")
    p.add_argument("--terrain", required=True)
    p.add_argument("--robot", required=True)
    p.add_argument("--pcpd", required=True)
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--pickups", type=int, default=50)
    p.add_argument("--rho-init", type=float, default=4.0)
    p.add_argument("--rho-obj", type=float, default=20.0)
    p.add_argument("--random-rho-init", type=_parse_range, default=None, metavar="LO:HI")
    p.add_argument("--random-rho-obj", type=_parse_range, default=None, metavar="LO:HI")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--sweep-pickups", type=_parse_int_list, default=None, metavar="25,50,75,100")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("kernel-bench", help="compare compiled and pure kernels")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--rows", type=int, default=64, help="first-move rows to build")
    p.add_argument("--searches", type=int, default=50)
    p.set_defaults(func=cmd_kernel_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
