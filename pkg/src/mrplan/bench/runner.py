"""Suite execution: abstract, plan, validate, re-embed, play back, record."""

from __future__ import annotations

import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional

from ..abstraction import RoadmapParams, to_continuous, to_grid, to_roadmap
from ..plans import PlanRequest
from ..planners import plan as run_planner
from ..scenario import import_movingai, load_scenario
from ..simcore import SimConfig, run_playback
from ..validation import validate
from .manifest import BenchmarkManifest, ScenarioRef
from .metrics import MetricsRecord


def _load_ref(ref: ScenarioRef, n_agents_max: int):
    if ref.kind == "movingai":
        return import_movingai(ref.path, ref.scen_path, tile_side=ref.tile_side_m,
                               n_agents=n_agents_max)
    return load_scenario(ref.path)


def _abstract(scenario, rep, manifest: BenchmarkManifest):
    if rep == "grid":
        return to_grid(scenario, connectivity=manifest.grid_connectivity)
    if rep == "road":
        return to_roadmap(scenario, RoadmapParams(
            n_samples=manifest.roadmap_n_samples,
            connection_radius=manifest.roadmap_connection_radius,
            seed=scenario.seed))
    return to_continuous(scenario)


def run_cell(manifest: BenchmarkManifest, ref: ScenarioRef, rep: str, planner_id: str,
             budget_s: float, n: int, seed: int, n_agents_max: int) -> MetricsRecord:
    """One suite cell; failures are captured in the record, never dropped."""
    rec = MetricsRecord(map=ref.path.split("/")[-1], scenario=ref.kind,
                        planner=planner_id, representation=rep,
                        n_agents=n, seed=seed, status="error")
    t0 = time.perf_counter()
    try:
        scenario = _load_ref(ref, n_agents_max)
        if n > scenario.n_agents():
            rec.detail = f"scenario has {scenario.n_agents()} agents, requested {n}"
            return rec
        sub = scenario.subset(n)
        rec.scenario = sub.name
        instance = _abstract(sub, rep, manifest)
    except Exception as e:
        rec.detail = f"abstraction failed: {e}"
        return rec
    rec.overhead_s = time.perf_counter() - t0
    try:
        outcome = run_planner(PlanRequest(instance=instance, budget_s=budget_s,
                                          seed=seed), planner_id)
    except Exception as e:
        rec.detail = f"planner failed: {e}"
        return rec
    rec.status = outcome.status
    rec.planning_time_s = outcome.planning_time_s
    if outcome.status != "solved":
        rec.detail = outcome.detail
        return rec
    rec.soc_m = outcome.cost.soc_m
    rec.makespan_s = outcome.cost.makespan_s
    report = validate(outcome.plans, instance)
    rec.validator_ok = report.feasible
    if not report.feasible:
        rec.status = "error"
        rec.detail = f"infeasible_output: {report.violations[0].kind}"
        print(f"[bench] WARNING: {planner_id} produced an infeasible plan on "
              f"{rec.map} n={n} seed={seed}: {rec.detail}", file=sys.stderr)
        return rec
    try:
        trace = run_playback(sub, outcome.plans,
                             SimConfig(tick_rate_hz=manifest.tick_rate_hz,
                                       substeps=manifest.substeps, seed=seed,
                                       track_nearest=n <= 64))
        rec.rtf = trace.rtf
        rec.peak_memory_mb = trace.peak_memory_mb
        if trace.contacts:
            rec.detail = f"playback contacts: {len(trace.contacts)}"
    except Exception as e:
        rec.status = "error"
        rec.detail = f"playback failed: {e}"
    return rec


def _cell_args(manifest: BenchmarkManifest):
    n_max = max(manifest.agent_counts)
    for (s_idx, ref, rep, pref, n, seed) in manifest.cells():
        yield (manifest, ref, rep, pref.id, pref.budget_s, n, seed, n_max)


def run_suite(manifest: BenchmarkManifest, workers: int = 1,
              progress: bool = False) -> List[MetricsRecord]:
    """Run every cell of the manifest; records come back in manifest order."""
    args = list(_cell_args(manifest))
    records: List[MetricsRecord] = []
    if workers <= 1:
        for a in args:
            rec = run_cell(*a)
            records.append(rec)
            if progress:
                print(f"[bench] {rec.planner:>18} {rec.representation:>4} "
                      f"n={rec.n_agents:<4} seed={rec.seed:<3} -> {rec.status}",
                      file=sys.stderr)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rec in pool.map(_run_cell_star, args):
                records.append(rec)
                if progress:
                    print(f"[bench] {rec.planner:>18} {rec.representation:>4} "
                          f"n={rec.n_agents:<4} seed={rec.seed:<3} -> {rec.status}",
                          file=sys.stderr)
    return records


def _run_cell_star(a):
    return run_cell(*a)
