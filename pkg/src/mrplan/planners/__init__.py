"""Unified planner interface and reference planners per representation."""

from .base import (
    PlannerError,
    RepresentationMismatch,
    UnknownPlanner,
    available_planners,
    plan,
    register_planner,
)

from . import grid as _grid            # noqa: F401  (registers built-ins on import)
from . import roadmap as _roadmap      # noqa: F401
from . import continuous as _cont      # noqa: F401
from .external import external_planner  # noqa: F401

__all__ = [
    "PlannerError",
    "RepresentationMismatch",
    "UnknownPlanner",
    "available_planners",
    "plan",
    "register_planner",
    "external_planner",
]
