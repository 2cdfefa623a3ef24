"""Figure rendering for benchmark reports (written next to the CSV output)."""

from __future__ import annotations

import math
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import AggregateTable, CapacityReport, MetricsRecord  # noqa: E402


def success_curve_figure(records: Sequence[MetricsRecord], path) -> None:
    """Success rate (%) against team size, one line per (planner, representation)."""
    series: Dict[tuple, Dict[int, list]] = {}
    for r in records:
        series.setdefault((r.planner, r.representation), {}).setdefault(r.n_agents, []) \
            .append(1.0 if r.solved else 0.0)
    fig, ax = plt.subplots(figsize=(6, 4))
    for (planner, rep), by_n in sorted(series.items()):
        ns = sorted(by_n)
        ys = [100.0 * sum(by_n[n]) / len(by_n[n]) for n in ns]
        ax.plot(ns, ys, marker="o", label=f"{planner} ({rep})")
    ax.set_xlabel("agents")
    ax.set_ylabel("success rate [%]")
    ax.set_ylim(-5, 105)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def aggregate_figure(table: AggregateTable, path) -> None:
    """Mean SoC and planning time (95% CI) over the common-success subset."""
    labels = [" / ".join(str(g) for g in r.group) for r in table.rows]
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    x = range(len(labels))
    axes[0].bar(x, [r.soc_m_mean for r in table.rows],
                yerr=[r.soc_m_ci95 for r in table.rows], capsize=4)
    axes[0].set_ylabel("SoC [m]")
    axes[1].bar(x, [r.planning_time_s_mean for r in table.rows],
                yerr=[r.planning_time_s_ci95 for r in table.rows], capsize=4,
                color="tab:orange")
    axes[1].set_ylabel("planning time [s]")
    for ax in axes:
        ax.set_xticks(list(x))
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
        ax.grid(True, axis="y", alpha=0.3)
    fig.suptitle(f"common-success subset: {len(table.common_instances)} instances")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def capacity_figure(report: CapacityReport, path) -> None:
    """Median RTF and peak memory against team size, with the linear fit."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    ns = report.team_sizes
    axes[0].plot(ns, report.median_rtf, marker="o")
    axes[0].axhline(1.0, color="red", lw=0.8, ls="--", label="RTF = 1")
    axes[0].axhline(10.0, color="gray", lw=0.8, ls=":", label="RTF = 10")
    axes[0].set_yscale("log")
    axes[0].set_xlabel("agents")
    axes[0].set_ylabel("median RTF")
    axes[0].legend(fontsize=8)
    axes[0].grid(True, alpha=0.3)
    axes[1].plot(ns, report.median_peak_mb, marker="s", label="median peak memory")
    fit = [report.memory_slope_mb_per_agent * n + report.memory_intercept_mb for n in ns]
    axes[1].plot(ns, fit, ls="--",
                 label=f"fit: {report.memory_slope_mb_per_agent:.3f} MB/agent, "
                       f"R$^2$={report.memory_r2:.3f}")
    axes[1].set_xlabel("agents")
    axes[1].set_ylabel("peak memory [MB]")
    axes[1].legend(fontsize=8)
    axes[1].grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
