"""Unified 2D multi-robot planning simulator and benchmark.

One scenario, three abstraction levels (grid, roadmap, continuous), reference
planners per representation, representation-specific validators, a
deterministic fixed-step execution core, and a benchmark harness with
commensurate metrics.
"""

__version__ = "0.1.0"
