"""Subprocess adapter: external planners speak the wire format on stdin/stdout."""

from __future__ import annotations

import shutil
import subprocess
from dataclasses import dataclass, field
from typing import Sequence

from ..plans import PlanOutcome, PlanRequest, STATUS_ERROR, STATUS_TIMEOUT
from .base import PlannerError, register_planner
from .wire import WireError, parse_response, serialize_request


class SpawnError(PlannerError):
    pass


@dataclass(frozen=True)
class AdapterConfig:
    command: tuple            # argv; the executable must exist
    grace_s: float = 2.0      # extra wall time before the child is killed

    def __init__(self, command: Sequence[str], grace_s: float = 2.0):
        object.__setattr__(self, "command", tuple(command))
        object.__setattr__(self, "grace_s", float(grace_s))


def external_planner(request: PlanRequest, config: AdapterConfig) -> PlanOutcome:
    """Run an external planner subprocess under the request budget.

    The instance is serialized onto the child's stdin; its stdout is parsed
    into a PlanOutcome. The child is killed at budget + grace. Protocol
    violations become status=error, never an exception.
    """
    exe = config.command[0]
    if shutil.which(exe) is None:
        raise SpawnError(f"adapter executable not found: {exe}")
    payload = serialize_request(request)
    try:
        proc = subprocess.Popen(
            list(config.command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.PIPE, text=True)
    except OSError as e:
        raise SpawnError(str(e)) from e
    try:
        out, err = proc.communicate(payload, timeout=request.budget_s + config.grace_s)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        return PlanOutcome(status=STATUS_TIMEOUT, detail="adapter exceeded budget, killed")
    if proc.returncode != 0:
        return PlanOutcome(status=STATUS_ERROR,
                           detail=f"adapter exited {proc.returncode}: {err.strip()[:200]}")
    try:
        outcome = parse_response(out, request.instance)
    except WireError as e:
        return PlanOutcome(status=STATUS_ERROR, detail=f"protocol violation: {e}")
    return outcome


def register_external(planner_id: str, representation: str, config: AdapterConfig) -> None:
    register_planner(planner_id, representation,
                     lambda request: external_planner(request, config))
