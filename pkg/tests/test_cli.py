import json

import numpy as np
import pytest

from haulpath.cli import _parse_buckets, _parse_int_list, main
from haulpath.energy import RobotConfig
from haulpath.search import PickupQuery, solve_baseline
from haulpath.terrain import load_ascii_grid

from conftest import HUSKY


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    terrain = root / "map.asc"
    robot = root / "robot.json"
    robot.write_text(json.dumps(HUSKY.to_dict()))
    assert main(["gen-terrain", "--style", "fbm", "--size", "20", "--seed", "5",
                 "--out", str(terrain)]) == 0
    pcpd = root / "map.pcpd"
    assert main(["build-pcpd", "--terrain", str(terrain), "--robot", str(robot),
                 "--buckets", "0:70:10", "--threads", "2", "--out", str(pcpd)]) == 0
    return root, terrain, robot, pcpd


def test_parse_buckets():
    assert _parse_buckets("0:70:10") == (0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0)
    assert _parse_buckets("0,15,70") == (0.0, 15.0, 70.0)
    with pytest.raises(Exception):
        _parse_buckets("70:0:10")


def test_parse_int_list():
    assert _parse_int_list("25,50,75") == (25, 50, 75)


def test_gen_terrain_styles(tmp_path):
    out = tmp_path / "flat.asc"
    assert main(["gen-terrain", "--style", "flat", "--size", "8", "--out", str(out)]) == 0
    g = load_ascii_grid(out)
    assert np.all(g.elevations == 0.0)


def test_build_prints_bucket_table(workspace, capsys):
    root, terrain, robot, pcpd = workspace
    assert pcpd.exists()
    assert main(["build-pcpd", "--terrain", str(terrain), "--robot", str(robot),
                 "--buckets", "0,70", "--out", str(root / "two.pcpd")]) == 0
    out = capsys.readouterr().out
    assert "bucket_kg" in out and "bytes" in out


def test_solve_both_algorithms(workspace, capsys):
    root, terrain, robot, pcpd = workspace
    grid = load_ascii_grid(terrain)
    query = {"s": [1, 1], "t": [17, 16], "pickups": [[4, 9], [12, 3], [9, 14]],
             "rho_init": 12.0, "rho_obj": 24.0}
    qpath = root / "q.json"
    qpath.write_text(json.dumps(query))

    out_base = root / "sol_base.json"
    assert main(["solve", "--algorithm", "baseline", "--terrain", str(terrain),
                 "--robot", str(robot), "--query", str(qpath), "--out", str(out_base)]) == 0
    doc_base = json.loads(out_base.read_text())
    assert doc_base["solution"] is not None
    assert doc_base["expansions"] > 0 and doc_base["wall_time_ms"] > 0

    out_conc = root / "sol_conc.json"
    assert main(["solve", "--algorithm", "concurrent", "--terrain", str(terrain),
                 "--robot", str(robot), "--pcpd", str(pcpd), "--query", str(qpath),
                 "--out", str(out_conc)]) == 0
    doc_conc = json.loads(out_conc.read_text())
    assert doc_conc["solution"] is not None
    assert "successor_histogram" in doc_conc

    # the emitted baseline energy matches the library
    q = PickupQuery.from_json(query, grid)
    ref = solve_baseline(grid, RobotConfig.from_json(robot), q)
    assert doc_base["solution"]["total_energy_j"] == pytest.approx(ref.total_energy)
    assert doc_conc["solution"]["total_energy_j"] <= ref.total_energy * 1.05

    # path round-trips through (row, col) pairs
    path_nodes = [grid.node_id(r, c) for r, c in doc_base["solution"]["path"]]
    assert path_nodes == ref.path.nodes


def test_solve_concurrent_requires_pcpd(workspace):
    root, terrain, robot, _ = workspace
    qpath = root / "q2.json"
    qpath.write_text(json.dumps({"s": [0, 0], "t": [2, 2], "pickups": [[1, 1]],
                                 "rho_init": 0.0, "rho_obj": 0.0}))
    rc = main(["solve", "--algorithm", "concurrent", "--terrain", str(terrain),
               "--robot", str(robot), "--query", str(qpath), "--out", str(root / "x.json")])
    assert rc == 2


def test_bench_writes_reports(workspace):
    root, terrain, robot, pcpd = workspace
    out_dir = root / "bench"
    assert main(["bench", "--terrain", str(terrain), "--robot", str(robot),
                 "--pcpd", str(pcpd), "--queries", "3", "--pickups", "5",
                 "--repeats", "3", "--seed", "1", "--sweep-pickups", "3,5",
                 "--out", str(out_dir)]) == 0
    assert (out_dir / "results.csv").exists()
    assert (out_dir / "summary.json").exists()
    assert (out_dir / "sweep.csv").exists()
    summary = json.loads((out_dir / "summary.json").read_text())
    assert set(summary["algorithms"]) == {"baseline", "concurrent"}


def test_gen_terrain_deterministic_files(tmp_path):
    a, b = tmp_path / "a.asc", tmp_path / "b.asc"
    for out in (a, b):
        assert main(["gen-terrain", "--style", "fbm", "--size", "16", "--seed", "3",
                     "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
