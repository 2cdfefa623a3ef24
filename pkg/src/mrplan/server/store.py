"""Scenario session store: single-writer transactional edits with optimistic
revision tokens; derived artifacts are invalidated on every revision bump."""

from __future__ import annotations

import itertools
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional

from ..abstraction import RoadmapParams, to_continuous, to_grid, to_roadmap
from ..plans import PlanRequest
from ..planners import UnknownPlanner, available_planners, plan as run_planner
from ..scenario import InvariantViolation, ParseError, scenario_from_dict, scenario_to_dict
from ..simcore import SimConfig, run_playback
from ..validation import validate


class UnknownId(KeyError):
    pass


class RevisionConflict(Exception):
    pass


@dataclass
class _Entry:
    scenario: object
    revision: int = 1
    artifacts: dict = field(default_factory=dict)   # (kind, params) -> object
    job_ids: set = field(default_factory=set)


@dataclass
class Job:
    id: str
    scenario_id: str
    revision: int
    status: str = "queued"          # queued | running | done | failed | stale
    result: Optional[dict] = None
    trace_id: Optional[str] = None
    error: str = ""


class SessionStore:
    """Thread-safe store; writes are serialized, reads see immutable snapshots."""

    def __init__(self, workers: int = 2):
        self._lock = threading.Lock()
        self._scenarios: Dict[str, _Entry] = {}
        self._jobs: Dict[str, Job] = {}
        self._traces: Dict[str, dict] = {}
        self._pool = ThreadPoolExecutor(max_workers=workers)

    # -- scenarios ---------------------------------------------------------
    def create_scenario(self, doc: dict):
        scenario = scenario_from_dict(doc, source="api")
        sid = uuid.uuid4().hex[:12]
        with self._lock:
            self._scenarios[sid] = _Entry(scenario=scenario)
        return sid, 1

    def get_scenario(self, sid: str):
        with self._lock:
            entry = self._scenarios.get(sid)
            if entry is None:
                raise UnknownId(sid)
            return scenario_to_dict(entry.scenario), entry.revision

    def update_scenario(self, sid: str, expected_revision: int, doc: dict) -> int:
        scenario = scenario_from_dict(doc, source="api")      # validate outside lock
        with self._lock:
            entry = self._scenarios.get(sid)
            if entry is None:
                raise UnknownId(sid)
            if entry.revision != expected_revision:
                raise RevisionConflict(
                    f"expected revision {expected_revision}, store at {entry.revision}")
            entry.scenario = scenario
            entry.revision += 1
            entry.artifacts.clear()               # invalidate derived artifacts
            for jid in entry.job_ids:
                job = self._jobs.get(jid)
                if job is not None and job.revision != entry.revision:
                    if job.status in ("queued", "running"):
                        job.status = "stale"
                    elif job.status == "done":
                        job.status = "stale"
                        job.result = None
                    if job.trace_id:
                        self._traces.pop(job.trace_id, None)
                        job.trace_id = None
            return entry.revision

    def snapshot(self, sid: str):
        with self._lock:
            entry = self._scenarios.get(sid)
            if entry is None:
                raise UnknownId(sid)
            return entry.scenario, entry.revision

    # -- abstraction artifacts ----------------------------------------------
    def abstract(self, sid: str, rep: str, **params):
        scenario, revision = self.snapshot(sid)
        key = (rep, tuple(sorted(params.items())), revision)
        with self._lock:
            entry = self._scenarios[sid]
            if key in entry.artifacts:
                return entry.artifacts[key], revision
        if rep == "grid":
            art = to_grid(scenario, **params)
        elif rep == "road":
            art = to_roadmap(scenario, RoadmapParams(seed=scenario.seed, **params))
        elif rep == "cont":
            art = to_continuous(scenario)
        else:
            raise ValueError(f"unknown representation {rep!r}")
        with self._lock:
            entry = self._scenarios.get(sid)
            if entry is not None and entry.revision == revision:
                entry.artifacts[key] = art
        return art, revision

    # -- planning jobs -------------------------------------------------------
    def submit_plan(self, sid: str, rep: str, planner_id: str, budget_s: float,
                    seed: int, expected_revision: Optional[int] = None) -> Job:
        if planner_id not in available_planners():
            raise UnknownPlanner(planner_id)
        scenario, revision = self.snapshot(sid)
        if expected_revision is not None and expected_revision != revision:
            raise RevisionConflict(
                f"expected revision {expected_revision}, store at {revision}")
        job = Job(id=uuid.uuid4().hex[:12], scenario_id=sid, revision=revision)
        with self._lock:
            self._jobs[job.id] = job
            self._scenarios[sid].job_ids.add(job.id)
        self._pool.submit(self._run_job, job, scenario, rep, planner_id, budget_s, seed)
        return job

    def _run_job(self, job: Job, scenario, rep, planner_id, budget_s, seed):
        with self._lock:
            if job.status != "queued":
                return
            job.status = "running"
        try:
            instance, _ = self.abstract(job.scenario_id, rep)
            outcome = run_planner(PlanRequest(instance=instance, budget_s=budget_s,
                                              seed=seed), planner_id)
            result = {
                "status": outcome.status,
                "planner": planner_id,
                "representation": rep,
                "planning_time_s": outcome.planning_time_s,
                "detail": outcome.detail,
                "revision": job.revision,
            }
            trace_id = None
            if outcome.status == "solved":
                report = validate(outcome.plans, instance)
                result["validator_ok"] = report.feasible
                result["soc_m"] = outcome.cost.soc_m
                result["makespan_s"] = outcome.cost.makespan_s
                if report.feasible:
                    trace = run_playback(scenario, outcome.plans, SimConfig())
                    trace_id = uuid.uuid4().hex[:12]
                    result["rtf"] = trace.rtf
                    result["trace_id"] = trace_id
                    with self._lock:
                        self._traces[trace_id] = {
                            "trace": trace,
                            "scenario_id": job.scenario_id,
                            "revision": job.revision,
                            "plans": outcome.plans,
                            "metrics": {
                                "soc_m": outcome.cost.soc_m,
                                "makespan_s": outcome.cost.makespan_s,
                                "planning_time_s": outcome.planning_time_s,
                                "rtf": trace.rtf,
                                "contacts": len(trace.contacts),
                            },
                        }
                else:
                    result["violations"] = [
                        {"kind": v.kind, "agents": list(v.agents), "time": v.time}
                        for v in report.violations[:20]]
            with self._lock:
                if job.status == "stale":
                    if trace_id:
                        self._traces.pop(trace_id, None)
                    return
                job.status = "done"
                job.result = result
                job.trace_id = trace_id
        except Exception as e:                      # surfaced via the job record
            with self._lock:
                if job.status != "stale":
                    job.status = "failed"
                    job.error = f"{type(e).__name__}: {e}"

    def get_job(self, jid: str) -> Job:
        with self._lock:
            job = self._jobs.get(jid)
            if job is None:
                raise UnknownId(jid)
            return job

    def wait_job(self, jid: str, timeout_s: float = 30.0) -> Job:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            job = self.get_job(jid)
            if job.status in ("done", "failed", "stale"):
                return job
            time.sleep(0.01)
        return self.get_job(jid)

    def get_trace(self, tid: str) -> dict:
        with self._lock:
            rec = self._traces.get(tid)
            if rec is None:
                raise UnknownId(tid)
            return rec
