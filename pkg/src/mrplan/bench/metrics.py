"""Commensurate metrics, common-success aggregation, capacity summaries."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional, Sequence

import numpy as np


class EmptyCommonSubset(Exception):
    pass


class InsufficientData(Exception):
    pass


def soc(plans) -> float:
    """Sum of costs: total geometric path length of the re-embedded plan in
    meters, post-arrival parking excluded."""
    return plans.soc_meters()


def makespan(plans) -> float:
    """Latest arrival time in seconds (grid: steps times the step period)."""
    return plans.makespan_seconds()


# frozen CSV column order
RECORD_COLUMNS = [
    "map", "scenario", "planner", "representation", "n_agents", "seed",
    "status", "soc_m", "makespan_s", "planning_time_s", "overhead_s",
    "rtf", "peak_memory_mb", "validator_ok", "detail",
]


@dataclass
class MetricsRecord:
    map: str
    scenario: str
    planner: str
    representation: str
    n_agents: int
    seed: int
    status: str
    soc_m: float = math.nan
    makespan_s: float = math.nan
    planning_time_s: float = math.nan
    overhead_s: float = math.nan
    rtf: float = math.nan
    peak_memory_mb: float = math.nan
    validator_ok: bool = False
    detail: str = ""

    @property
    def solved(self) -> bool:
        return self.status == "solved"

    def instance_key(self):
        return (self.map, self.scenario, self.representation, self.n_agents, self.seed)


def write_records_csv(records: Sequence[MetricsRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(RECORD_COLUMNS)
        for r in records:
            d = asdict(r)
            w.writerow([d[c] for c in RECORD_COLUMNS])


def read_records_csv(path) -> List[MetricsRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        for row in reader:
            out.append(MetricsRecord(
                map=row["map"], scenario=row["scenario"], planner=row["planner"],
                representation=row["representation"], n_agents=int(row["n_agents"]),
                seed=int(row["seed"]), status=row["status"],
                soc_m=float(row["soc_m"]), makespan_s=float(row["makespan_s"]),
                planning_time_s=float(row["planning_time_s"]),
                overhead_s=float(row["overhead_s"]), rtf=float(row["rtf"]),
                peak_memory_mb=float(row["peak_memory_mb"]),
                validator_ok=row["validator_ok"] in ("True", "true", "1"),
                detail=row["detail"]))
    return out


def _mean_ci95(values):
    arr = np.asarray([v for v in values if not math.isnan(v)], dtype=float)
    if arr.size == 0:
        return math.nan, math.nan
    mean = float(arr.mean())
    if arr.size == 1:
        return mean, 0.0
    ci = 1.96 * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return mean, ci


@dataclass
class AggregateRow:
    group: tuple
    n_instances: int
    success_rate_pct: float
    soc_m_mean: float
    soc_m_ci95: float
    makespan_s_mean: float
    makespan_s_ci95: float
    planning_time_s_mean: float
    planning_time_s_ci95: float


@dataclass
class AggregateTable:
    group_keys: tuple
    rows: list
    common_instances: tuple     # instance keys in the common-success subset
    total_records: int

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow([*self.group_keys, "n_instances", "success_rate_pct",
                        "soc_m_mean", "soc_m_ci95", "makespan_s_mean", "makespan_s_ci95",
                        "planning_time_s_mean", "planning_time_s_ci95"])
            for r in self.rows:
                w.writerow([*r.group, r.n_instances, f"{r.success_rate_pct:.2f}",
                            f"{r.soc_m_mean:.6g}", f"{r.soc_m_ci95:.6g}",
                            f"{r.makespan_s_mean:.6g}", f"{r.makespan_s_ci95:.6g}",
                            f"{r.planning_time_s_mean:.6g}", f"{r.planning_time_s_ci95:.6g}"])


def common_success_aggregate(records: Sequence[MetricsRecord],
                             group_keys=("planner",)) -> AggregateTable:
    """Average cost metrics only over instances where every planner succeeds.

    Success rates are still reported over all attempted instances per group.
    Aggregation conservation: the per-group record counts sum to the total.
    """
    by_instance: Dict[tuple, dict] = {}
    roster = sorted({r.planner for r in records})
    for r in records:
        by_instance.setdefault(r.instance_key(), {})[r.planner] = r
    common = []
    for key, per_planner in sorted(by_instance.items()):
        if all(p in per_planner and per_planner[p].solved for p in roster):
            common.append(key)
    common_set = set(common)

    def group_of(r: MetricsRecord):
        return tuple(getattr(r, k) for k in group_keys)

    groups: Dict[tuple, list] = {}
    for r in records:
        groups.setdefault(group_of(r), []).append(r)

    rows = []
    for group, recs in sorted(groups.items()):
        solved = [r for r in recs if r.solved]
        subset = [r for r in recs if r.instance_key() in common_set and r.solved]
        soc_mean, soc_ci = _mean_ci95([r.soc_m for r in subset])
        mk_mean, mk_ci = _mean_ci95([r.makespan_s for r in subset])
        pt_mean, pt_ci = _mean_ci95([r.planning_time_s for r in subset])
        rows.append(AggregateRow(
            group=group, n_instances=len(recs),
            success_rate_pct=100.0 * len(solved) / len(recs) if recs else math.nan,
            soc_m_mean=soc_mean, soc_m_ci95=soc_ci,
            makespan_s_mean=mk_mean, makespan_s_ci95=mk_ci,
            planning_time_s_mean=pt_mean, planning_time_s_ci95=pt_ci))
    table = AggregateTable(group_keys=tuple(group_keys), rows=rows,
                           common_instances=tuple(common), total_records=len(records))
    assert sum(r.n_instances for r in rows) == len(records)
    if not common:
        raise EmptyCommonSubset(
            f"no instance solved by every planner in roster {roster}; "
            f"success-only table still available")
    return table


@dataclass
class CapacityReport:
    max_n_realtime: Optional[float]      # largest team size with median RTF >= 1
    realtime_saturated: bool             # RTF >= 1 at the largest tested size
    n_at_rtf10: Optional[float]          # crossing of the median curve with RTF = 10
    memory_slope_mb_per_agent: float
    memory_intercept_mb: float
    memory_r2: float
    team_sizes: tuple
    median_rtf: tuple
    median_peak_mb: tuple


def capacity_report(records: Sequence[MetricsRecord]) -> CapacityReport:
    """Capacity-style summary: RTF >= 1 envelope, RTF = 10 crossing, and a
    linear peak-memory fit (slope MB/agent with R^2)."""
    by_n: Dict[int, list] = {}
    for r in records:
        if not math.isnan(r.rtf):
            by_n.setdefault(r.n_agents, []).append(r)
    sizes = sorted(by_n)
    if len(sizes) < 3:
        raise InsufficientData(f"need >= 3 team sizes with RTF, got {len(sizes)}")
    med_rtf = [float(np.median([r.rtf for r in by_n[n]])) for n in sizes]
    med_mem = [float(np.median([r.peak_memory_mb for r in by_n[n]])) for n in sizes]

    def crossing(level):
        # monotone interpolation on the median curve (RTF falls with N)
        if med_rtf[0] < level:
            return None
        for k in range(len(sizes) - 1):
            r1, r2 = med_rtf[k], med_rtf[k + 1]
            if r1 >= level >= r2:
                if r1 == r2:
                    return float(sizes[k + 1])
                lam = (r1 - level) / (r1 - r2)
                return sizes[k] + lam * (sizes[k + 1] - sizes[k])
        return float(sizes[-1])     # above the level at every tested size

    max_rt = crossing(1.0)
    saturated = med_rtf[-1] >= 1.0
    n10 = crossing(10.0)
    xs = np.asarray(sizes, dtype=float)
    ys = np.asarray(med_mem, dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return CapacityReport(
        max_n_realtime=max_rt, realtime_saturated=saturated, n_at_rtf10=n10,
        memory_slope_mb_per_agent=float(slope), memory_intercept_mb=float(intercept),
        memory_r2=r2, team_sizes=tuple(sizes), median_rtf=tuple(med_rtf),
        median_peak_mb=tuple(med_mem))
