import json
import math
import os

import pytest

from mrplan.bench import (
    EmptyCommonSubset,
    InsufficientData,
    ManifestError,
    MetricsRecord,
    capacity_report,
    common_success_aggregate,
    load_manifest,
    makespan,
    read_records_csv,
    run_suite,
    soc,
    write_records_csv,
)
from mrplan.bench.manifest import manifest_from_dict
from mrplan.corpus import movingai_fixture_text
from mrplan.geometry import Point2
from mrplan.plans import ContinuousPlan, GridPlan, RoadmapPlan, RoadmapVisit, Trajectory


class TestSocMakespan:
    def test_grid_unit_moves_meters(self):
        plan = GridPlan(agent_ids=(0,), paths=(((0, 0), (1, 0), (2, 0), (3, 0), (4, 0)),),
                        cell_side=1.0, origin=(0, 0), dt=1.0)
        assert abs(soc(plan) - 4.0) < 1e-12
        assert abs(makespan(plan) - 4.0) < 1e-12

    def test_stationary_agent_zero(self):
        plan = GridPlan(agent_ids=(0,), paths=(((2, 2),),),
                        cell_side=1.0, origin=(0, 0), dt=1.0)
        assert soc(plan) == 0.0
        assert makespan(plan) == 0.0

    def test_roadmap_edge_lengths_sum(self):
        visits = ((RoadmapVisit(0, 0.0, 0.0, Point2(0, 0)),
                   RoadmapVisit(1, 2.4, 2.4, Point2(1.2, 0)),
                   RoadmapVisit(2, 4.0, 4.0, Point2(2.0, 0))),)
        plan = RoadmapPlan(agent_ids=(0,), visits=visits, speed=0.5)
        assert abs(soc(plan) - 2.0) < 1e-12

    def test_makespan_is_max(self):
        trajs = tuple(
            Trajectory(times=(0.0, t), points=(Point2(0, 0), Point2(1, 0)),
                       vels=((0, 0), (0, 0)))
            for t in (3.0, 5.0, 4.0))
        plan = ContinuousPlan(agent_ids=(0, 1, 2), trajectories=trajs,
                              sample_period=1.0)
        assert makespan(plan) == 5.0

    def test_grid_seven_steps(self):
        plan = GridPlan(agent_ids=(0,), paths=((tuple((k, 0) for k in range(8))),),
                        cell_side=1.0, origin=(0, 0), dt=1.0)
        assert makespan(plan) == 7.0


def rec(planner, scenario, status="solved", soc_m=10.0, n=2, seed=0, rtf=5.0,
        mem=50.0, t=0.1):
    return MetricsRecord(map="m", scenario=scenario, planner=planner,
                         representation="grid", n_agents=n, seed=seed, status=status,
                         soc_m=soc_m, makespan_s=soc_m / 2, planning_time_s=t,
                         overhead_s=0.0, rtf=rtf, peak_memory_mb=mem,
                         validator_ok=status == "solved")


class TestCommonSuccessAggregate:
    def test_partial_overlap(self):
        records = [
            rec("A", "s1"), rec("A", "s2"), rec("A", "s3", status="timeout"),
            rec("B", "s1", status="timeout"), rec("B", "s2"), rec("B", "s3"),
        ]
        table = common_success_aggregate(records)
        assert len(table.common_instances) == 1
        assert table.common_instances[0][1] == "s2"
        assert sum(r.n_instances for r in table.rows) == len(records)

    def test_all_solve_all(self):
        records = [rec(p, s) for p in "AB" for s in ("s1", "s2")]
        table = common_success_aggregate(records)
        assert len(table.common_instances) == 2
        for row in table.rows:
            assert row.success_rate_pct == 100.0

    def test_disjoint_success_sets(self):
        records = [rec("A", "s1"), rec("A", "s2", status="timeout"),
                   rec("B", "s1", status="timeout"), rec("B", "s2")]
        with pytest.raises(EmptyCommonSubset):
            common_success_aggregate(records)


class TestCapacityReport:
    def test_exact_linear_memory_fit(self):
        records = []
        for n in (2, 100, 550, 1000):
            for seed in range(3):
                records.append(rec("A", f"s{seed}", n=n, seed=seed,
                                   rtf=2000.0 / n, mem=0.04 + 0.179 * n))
        report = capacity_report(records)
        assert abs(report.memory_slope_mb_per_agent - 0.179) < 1e-9
        assert abs(report.memory_r2 - 1.0) < 1e-12

    def test_rtf10_crossing_between_sizes(self):
        records = [rec("A", "s", n=2, rtf=1288.21, mem=39.0),
                   rec("A", "s", n=550, rtf=10.59, mem=134.0),
                   rec("A", "s", n=1000, rtf=5.41, mem=213.0)]
        report = capacity_report(records)
        assert 550 <= report.n_at_rtf10 <= 1000
        assert report.realtime_saturated  # still above RTF 1 at N=1000

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            capacity_report([rec("A", "s", n=2)])


@pytest.fixture
def demo_dir(tmp_path):
    map_text, scen_text = movingai_fixture_text(width=16, height=16, seed=5,
                                                density=0.05, n_rows=6)
    (tmp_path / "f.map").write_text(map_text)
    (tmp_path / "f.scen").write_text(scen_text)
    manifest = {
        "format_version": 1,
        "suite": "t",
        "scenarios": [{"kind": "movingai", "path": "f.map", "scen_path": "f.scen"}],
        "planners": [{"id": "grid_prioritized", "budget_s": 20.0},
                     {"id": "grid_cbs", "budget_s": 20.0}],
        "representations": ["grid"],
        "agent_counts": [2, 3],
        "seeds": [0],
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    return tmp_path


class TestManifest:
    def test_load_and_cells(self, demo_dir):
        m = load_manifest(demo_dir / "manifest.json")
        assert len(list(m.cells())) == 4  # 1 scenario x 2 planners x 2 sizes x 1 seed

    def test_bad_version(self):
        with pytest.raises(ManifestError):
            manifest_from_dict({"format_version": 99})

    def test_hash_pinning(self, demo_dir):
        doc = json.loads((demo_dir / "manifest.json").read_text())
        doc["scenarios"][0]["sha256"] = "0" * 64
        (demo_dir / "bad.json").write_text(json.dumps(doc))
        with pytest.raises(ManifestError):
            load_manifest(demo_dir / "bad.json")

    def test_unknown_representation(self):
        with pytest.raises(ManifestError):
            manifest_from_dict({"format_version": 1, "suite": "x",
                                "scenarios": [], "planners": [{"id": "p"}],
                                "representations": ["voxels"]})


class TestRunSuite:
    def test_records_produced_and_csv_round_trip(self, demo_dir, tmp_path):
        m = load_manifest(demo_dir / "manifest.json")
        records = run_suite(m)
        assert len(records) == 4
        assert all(r.solved for r in records), [r.detail for r in records]
        assert all(r.validator_ok for r in records)
        # SoC lower bound: sum of straight-line start-goal distances
        from mrplan.scenario import import_movingai
        scenario = import_movingai(demo_dir / "f.map", demo_dir / "f.scen", 1.0, 3)
        for r in records:
            straight = sum(
                math.dist((a.start.x, a.start.y), (a.goal.x, a.goal.y))
                for a in scenario.agents[:r.n_agents])
            assert r.soc_m >= straight - 1e-6
        p = tmp_path / "records.csv"
        write_records_csv(records, p)
        again = read_records_csv(p)
        assert [a.soc_m for a in again] == [r.soc_m for r in records]

    def test_reproducible_modulo_wall_clock(self, demo_dir):
        m = load_manifest(demo_dir / "manifest.json")
        a = run_suite(m)
        b = run_suite(m)
        strip = lambda r: (r.map, r.scenario, r.planner, r.representation, r.n_agents,
                           r.seed, r.status, r.soc_m, r.makespan_s, r.validator_ok)
        assert [strip(r) for r in a] == [strip(r) for r in b]

    def test_timeout_cell_recorded(self, demo_dir):
        doc = json.loads((demo_dir / "manifest.json").read_text())
        doc["planners"] = [{"id": "grid_cbs", "budget_s": 1e-4}]
        doc["agent_counts"] = [3]
        (demo_dir / "tiny.json").write_text(json.dumps(doc))
        m = load_manifest(demo_dir / "tiny.json")
        records = run_suite(m)
        assert len(records) == 1
        assert records[0].status in ("timeout", "solved")
        assert math.isnan(records[0].soc_m) or records[0].solved


class TestCli:
    def test_exit_codes(self, demo_dir, tmp_path):
        from mrplan.bench.cli import main
        out = str(tmp_path / "out")
        assert main(["run", str(demo_dir / "manifest.json"), "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "records.csv"))
        assert os.path.exists(os.path.join(out, "success_vs_agents.png"))
        assert main(["aggregate", os.path.join(out, "records.csv"), "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "aggregate.csv"))
        assert main(["run", "/nonexistent/manifest.json", "--out", out]) == 2

    def test_partial_failure_exit_code(self, demo_dir, tmp_path):
        from mrplan.bench.cli import main
        doc = json.loads((demo_dir / "manifest.json").read_text())
        doc["agent_counts"] = [2, 40]   # 40 agents: not enough scen rows -> error cells
        (demo_dir / "fail.json").write_text(json.dumps(doc))
        out = str(tmp_path / "out2")
        assert main(["run", str(demo_dir / "fail.json"), "--out", out]) == 3
