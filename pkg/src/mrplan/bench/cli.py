"""Benchmark CLI: run suites, aggregate records, summarize capacity.

Exit codes: 0 success, 2 manifest/input error, 3 partial failures present.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .manifest import ManifestError, load_manifest
from .metrics import (
    EmptyCommonSubset,
    InsufficientData,
    capacity_report,
    common_success_aggregate,
    read_records_csv,
    write_records_csv,
)
from .plots import aggregate_figure, capacity_figure, success_curve_figure
from .runner import run_suite

EXIT_OK = 0
EXIT_MANIFEST = 2
EXIT_PARTIAL = 3


def _cmd_run(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
    except ManifestError as e:
        print(f"manifest error: {e}", file=sys.stderr)
        return EXIT_MANIFEST
    if args.budget is not None:
        from .manifest import PlannerRef
        manifest = type(manifest)(**{**manifest.__dict__, "planners": tuple(
            PlannerRef(p.id, args.budget) for p in manifest.planners)})
    if args.seed is not None:
        manifest = type(manifest)(**{**manifest.__dict__, "seeds": (args.seed,)})
    os.makedirs(args.out, exist_ok=True)
    records = run_suite(manifest, workers=args.workers, progress=True)
    csv_path = os.path.join(args.out, "records.csv")
    write_records_csv(records, csv_path)
    success_curve_figure(records, os.path.join(args.out, "success_vs_agents.png"))
    solved = sum(1 for r in records if r.solved)
    print(f"[bench] {solved}/{len(records)} cells solved -> {csv_path}")
    return EXIT_OK if solved == len(records) else EXIT_PARTIAL


def _cmd_aggregate(args) -> int:
    try:
        records = read_records_csv(args.records)
    except OSError as e:
        print(f"cannot read records: {e}", file=sys.stderr)
        return EXIT_MANIFEST
    os.makedirs(args.out, exist_ok=True)
    group_keys = tuple(args.group.split(","))
    try:
        table = common_success_aggregate(records, group_keys=group_keys)
    except EmptyCommonSubset as e:
        print(f"[bench] empty common-success subset: {e}")
        return EXIT_OK
    out_csv = os.path.join(args.out, "aggregate.csv")
    table.to_csv(out_csv)
    aggregate_figure(table, os.path.join(args.out, "aggregate_costs.png"))
    print(f"[bench] common-success subset has {len(table.common_instances)} instances "
          f"-> {out_csv}")
    for row in table.rows:
        print(f"  {' / '.join(map(str, row.group)):<32} "
              f"success {row.success_rate_pct:6.1f}%  "
              f"SoC {row.soc_m_mean:9.3f} ± {row.soc_m_ci95:.3f} m  "
              f"time {row.planning_time_s_mean:7.3f} ± {row.planning_time_s_ci95:.3f} s")
    return EXIT_OK


def _cmd_capacity(args) -> int:
    try:
        records = read_records_csv(args.records)
        report = capacity_report(records)
    except (OSError, InsufficientData) as e:
        print(f"capacity error: {e}", file=sys.stderr)
        return EXIT_MANIFEST
    os.makedirs(args.out, exist_ok=True)
    capacity_figure(report, os.path.join(args.out, "capacity.png"))
    payload = {
        "max_n_realtime": report.max_n_realtime,
        "realtime_saturated_at_max_tested": report.realtime_saturated,
        "n_at_rtf10": report.n_at_rtf10,
        "memory_slope_mb_per_agent": report.memory_slope_mb_per_agent,
        "memory_intercept_mb": report.memory_intercept_mb,
        "memory_r2": report.memory_r2,
        "team_sizes": list(report.team_sizes),
        "median_rtf": list(report.median_rtf),
        "median_peak_mb": list(report.median_peak_mb),
    }
    out_json = os.path.join(args.out, "capacity.json")
    with open(out_json, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
    print(f"[bench] capacity -> {out_json}")
    print(f"  largest real-time team size: {report.max_n_realtime}"
          + (" (still real-time at largest tested size)" if report.realtime_saturated else ""))
    print(f"  RTF=10 crossing: {report.n_at_rtf10}")
    print(f"  memory: {report.memory_slope_mb_per_agent:.3f} MB/agent, "
          f"R^2 = {report.memory_r2:.4f}")
    return EXIT_OK


def _cmd_demo(args) -> int:
    """Write a self-contained demo suite (fixture map + manifest)."""
    from ..corpus import movingai_fixture_text
    os.makedirs(args.out, exist_ok=True)
    map_text, scen_text = movingai_fixture_text(width=24, height=24, seed=7,
                                                density=0.06, n_rows=25)
    map_path = os.path.join(args.out, "fixture.map")
    scen_path = os.path.join(args.out, "fixture.scen")
    with open(map_path, "w") as f:
        f.write(map_text)
    with open(scen_path, "w") as f:
        f.write(scen_text)
    manifest = {
        "format_version": 1,
        "suite": "demo-grid",
        "scenarios": [{"kind": "movingai", "path": "fixture.map",
                       "scen_path": "fixture.scen", "tile_side_m": 1.0}],
        "planners": [{"id": "grid_prioritized", "budget_s": 60.0},
                     {"id": "grid_cbs", "budget_s": 60.0}],
        "representations": ["grid"],
        "agent_counts": [5, 10, 20],
        "seeds": [0],
    }
    mpath = os.path.join(args.out, "manifest.json")
    with open(mpath, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
    print(f"[bench] demo suite written to {mpath}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bench",
                                 description="Multi-robot planning benchmark harness")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a benchmark manifest")
    p_run.add_argument("manifest")
    p_run.add_argument("--out", default="bench_out")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--budget", type=float, default=None,
                       help="override every planner budget [s]")
    p_run.add_argument("--seed", type=int, default=None, help="override the seed sweep")
    p_run.set_defaults(fn=_cmd_run)

    p_agg = sub.add_parser("aggregate", help="aggregate a records CSV")
    p_agg.add_argument("records")
    p_agg.add_argument("--common-subset", action="store_true", default=True,
                       help="average costs over the common-success subset (default)")
    p_agg.add_argument("--group", default="planner",
                       help="comma-separated record fields to group by")
    p_agg.add_argument("--out", default="bench_out")
    p_agg.set_defaults(fn=_cmd_aggregate)

    p_cap = sub.add_parser("capacity", help="capacity summary from records")
    p_cap.add_argument("records")
    p_cap.add_argument("--out", default="bench_out")
    p_cap.set_defaults(fn=_cmd_capacity)

    p_demo = sub.add_parser("demo", help="write a runnable demo suite")
    p_demo.add_argument("--out", default="demo_suite")
    p_demo.set_defaults(fn=_cmd_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
