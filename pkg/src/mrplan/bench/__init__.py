"""Headless benchmark harness: manifests, suites, metrics, reports."""

from .manifest import BenchmarkManifest, ManifestError, load_manifest
from .metrics import (
    AggregateTable,
    EmptyCommonSubset,
    InsufficientData,
    MetricsRecord,
    capacity_report,
    common_success_aggregate,
    makespan,
    read_records_csv,
    soc,
    write_records_csv,
)
from .runner import run_suite

__all__ = [
    "BenchmarkManifest",
    "ManifestError",
    "load_manifest",
    "MetricsRecord",
    "AggregateTable",
    "EmptyCommonSubset",
    "InsufficientData",
    "soc",
    "makespan",
    "common_success_aggregate",
    "capacity_report",
    "read_records_csv",
    "write_records_csv",
    "run_suite",
]
