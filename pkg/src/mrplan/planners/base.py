"""Planner registry and the normalized plan() entry point."""

from __future__ import annotations

import time
from typing import Callable, Dict, Tuple

from ..plans import PlanOutcome, PlanRequest, STATUS_ERROR, STATUS_TIMEOUT


class PlannerError(Exception):
    pass


class UnknownPlanner(PlannerError):
    pass


class RepresentationMismatch(PlannerError):
    pass


class BudgetExceeded(PlannerError):
    """Raised by cooperative deadline checks inside built-in planners."""


_REGISTRY: Dict[str, Tuple[str, Callable]] = {}


def register_planner(planner_id: str, representation: str, fn: Callable) -> None:
    _REGISTRY[planner_id] = (representation, fn)


def available_planners(representation: str = None):
    if representation is None:
        return dict(_REGISTRY)
    return {k: v for k, v in _REGISTRY.items() if v[0] == representation}


def plan(request: PlanRequest, planner_id: str) -> PlanOutcome:
    """Run a registered planner under the request's budget.

    Inputs and outputs are normalized: every planner receives the same request
    shape and returns a PlanOutcome with status, timed plans, and costs.
    """
    if planner_id not in _REGISTRY:
        raise UnknownPlanner(planner_id)
    representation, fn = _REGISTRY[planner_id]
    if representation != request.instance.representation:
        raise RepresentationMismatch(
            f"{planner_id} plans {representation}, instance is "
            f"{request.instance.representation}")
    t0 = time.perf_counter()
    try:
        outcome = fn(request)
    except BudgetExceeded:
        outcome = PlanOutcome(status=STATUS_TIMEOUT, detail="budget exceeded")
    except PlannerError as e:
        outcome = PlanOutcome(status=STATUS_ERROR, detail=str(e))
    outcome.planning_time_s = time.perf_counter() - t0
    return outcome
