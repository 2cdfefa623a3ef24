"""Plan containers shared by planners, validators, simulator, and benchmark.

Plans are representation-native (timed cell moves, timed graph traversals,
sampled trajectories) and self-contained enough to re-embed into continuous
world coordinates without the environment object.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .geometry import Point2, Pose

OBJECTIVE_SOC = "soc"
OBJECTIVE_MAKESPAN = "makespan"

STATUS_SOLVED = "solved"
STATUS_TIMEOUT = "timeout"
STATUS_INFEASIBLE = "infeasible"
STATUS_ERROR = "error"


class PlanError(Exception):
    pass


class MalformedPlan(PlanError):
    pass


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear time-parameterized path; holds final pose after the end."""

    times: tuple
    points: tuple
    thetas: tuple = ()
    vels: tuple = ()          # optional per-sample (vx, vy)

    def __post_init__(self):
        if len(self.times) != len(self.points) or len(self.times) == 0:
            raise MalformedPlan("trajectory times/points length mismatch or empty")
        for i in range(1, len(self.times)):
            if self.times[i] < self.times[i - 1]:
                raise MalformedPlan("trajectory times must be non-decreasing")

    @property
    def end_time(self) -> float:
        return self.times[-1]

    def pose_at(self, t: float) -> Pose:
        ts, pts = self.times, self.points
        if t <= ts[0]:
            return Pose(pts[0][0], pts[0][1], self.thetas[0] if self.thetas else 0.0)
        if t >= ts[-1]:
            return Pose(pts[-1][0], pts[-1][1], self.thetas[-1] if self.thetas else 0.0)
        lo, hi = 0, len(ts) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ts[mid] <= t:
                lo = mid
            else:
                hi = mid
        t0, t1 = ts[lo], ts[hi]
        lam = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        x = pts[lo][0] + lam * (pts[hi][0] - pts[lo][0])
        y = pts[lo][1] + lam * (pts[hi][1] - pts[lo][1])
        if self.thetas:
            th = self.thetas[lo] + lam * (self.thetas[hi] - self.thetas[lo])
        else:
            th = 0.0
        return Pose(x, y, th)

    def path_length(self) -> float:
        """Geometric arc length, post-arrival parking excluded (it has length 0)."""
        total = 0.0
        for i in range(1, len(self.points)):
            total += math.dist(self.points[i - 1], self.points[i])
        return total


@dataclass(frozen=True)
class GridPlan:
    """Per-agent timed cell sequences; step k is at index k (unit time steps)."""

    agent_ids: tuple
    paths: tuple            # per agent: tuple of (cx, cy) cells
    cell_side: float
    origin: tuple           # world (xmin, ymin)
    dt: float = 1.0

    representation = "grid"

    def __post_init__(self):
        if len(self.agent_ids) != len(self.paths):
            raise MalformedPlan("agent_ids/paths mismatch")
        for path in self.paths:
            if len(path) == 0:
                raise MalformedPlan("empty grid path")

    def horizon_steps(self) -> int:
        return max(len(p) - 1 for p in self.paths)

    def makespan_seconds(self) -> float:
        return self.horizon_steps() * self.dt

    def cell_center(self, cell) -> Point2:
        return Point2(self.origin[0] + (cell[0] + 0.5) * self.cell_side,
                      self.origin[1] + (cell[1] + 0.5) * self.cell_side)

    def soc_steps(self) -> int:
        """Sum over agents of the final-arrival step (trailing goal waits free)."""
        total = 0
        for path in self.paths:
            t = len(path) - 1
            while t > 0 and path[t - 1] == path[-1]:
                t -= 1
            total += t
        return total

    def soc_meters(self) -> float:
        total = 0.0
        for path in self.paths:
            for k in range(1, len(path)):
                dx = (path[k][0] - path[k - 1][0]) * self.cell_side
                dy = (path[k][1] - path[k - 1][1]) * self.cell_side
                total += math.hypot(dx, dy)
        return total


@dataclass(frozen=True)
class RoadmapVisit:
    vertex: int
    arrive: float
    depart: float
    point: Point2


@dataclass(frozen=True)
class RoadmapPlan:
    """Per-agent timed vertex visits; motion between consecutive visits is an
    edge traversal at the common speed, waits happen only at vertices."""

    agent_ids: tuple
    visits: tuple           # per agent: tuple of RoadmapVisit
    speed: float

    representation = "road"

    def __post_init__(self):
        if len(self.agent_ids) != len(self.visits):
            raise MalformedPlan("agent_ids/visits mismatch")
        for vs in self.visits:
            if len(vs) == 0:
                raise MalformedPlan("empty roadmap itinerary")
            t = vs[0].arrive
            for v in vs:
                if v.depart < v.arrive or v.arrive < t:
                    raise MalformedPlan("visit times must be non-decreasing")
                t = v.depart

    def makespan_seconds(self) -> float:
        return max(vs[-1].arrive for vs in self.visits)

    def soc_meters(self) -> float:
        total = 0.0
        for vs in self.visits:
            for i in range(1, len(vs)):
                total += math.dist(vs[i - 1].point, vs[i].point)
        return total


@dataclass(frozen=True)
class ContinuousPlan:
    """Per-agent sampled trajectories at a fixed sample period."""

    agent_ids: tuple
    trajectories: tuple     # per agent: Trajectory (with vels)
    sample_period: float

    representation = "cont"

    def __post_init__(self):
        if len(self.agent_ids) != len(self.trajectories):
            raise MalformedPlan("agent_ids/trajectories mismatch")

    def makespan_seconds(self) -> float:
        return max(tr.end_time for tr in self.trajectories)

    def soc_meters(self) -> float:
        return sum(tr.path_length() for tr in self.trajectories)


PlanSet = object  # GridPlan | RoadmapPlan | ContinuousPlan


@dataclass(frozen=True)
class PlanRequest:
    instance: object        # AbstractInstance
    objective: str = OBJECTIVE_SOC
    budget_s: float = 60.0
    seed: int = 0

    def __post_init__(self):
        if not self.budget_s > 0:
            raise ValueError("budget must be positive")
        if self.objective not in (OBJECTIVE_SOC, OBJECTIVE_MAKESPAN):
            raise ValueError(f"unknown objective {self.objective!r}")


@dataclass(frozen=True)
class PlanCost:
    soc_m: float = math.nan
    makespan_s: float = math.nan


@dataclass
class PlanOutcome:
    status: str
    plans: Optional[object] = None
    planning_time_s: float = 0.0
    cost: PlanCost = field(default_factory=PlanCost)
    detail: str = ""

    def canonical_bytes(self) -> bytes:
        """Deterministic serialization of the outcome.

        planning_time is wall-clock derived and deliberately excluded, in line
        with the benchmark reproducibility contract.
        """
        out = [self.status.encode(), b"|", self.detail.encode(), b"|"]
        out.append(struct.pack("<dd", self.cost.soc_m, self.cost.makespan_s))
        p = self.plans
        if p is None:
            out.append(b"none")
        elif isinstance(p, GridPlan):
            out.append(struct.pack("<dddd", p.cell_side, p.origin[0], p.origin[1], p.dt))
            for aid, path in zip(p.agent_ids, p.paths):
                out.append(struct.pack("<qq", aid, len(path)))
                for c in path:
                    out.append(struct.pack("<qq", c[0], c[1]))
        elif isinstance(p, RoadmapPlan):
            out.append(struct.pack("<d", p.speed))
            for aid, vs in zip(p.agent_ids, p.visits):
                out.append(struct.pack("<qq", aid, len(vs)))
                for v in vs:
                    out.append(struct.pack("<qdddd", v.vertex, v.arrive, v.depart,
                                           v.point.x, v.point.y))
        elif isinstance(p, ContinuousPlan):
            out.append(struct.pack("<d", p.sample_period))
            for aid, tr in zip(p.agent_ids, p.trajectories):
                out.append(struct.pack("<qq", aid, len(tr.times)))
                for i in range(len(tr.times)):
                    th = tr.thetas[i] if tr.thetas else 0.0
                    vx, vy = tr.vels[i] if tr.vels else (0.0, 0.0)
                    out.append(struct.pack("<dddddd", tr.times[i], tr.points[i][0],
                                           tr.points[i][1], th, vx, vy))
        else:
            raise MalformedPlan(f"unknown plan set type {type(p)!r}")
        return b"".join(out)


def solved_outcome(plans, planning_time_s: float, detail: str = "") -> PlanOutcome:
    return PlanOutcome(
        status=STATUS_SOLVED,
        plans=plans,
        planning_time_s=planning_time_s,
        cost=PlanCost(soc_m=plans.soc_meters(), makespan_s=plans.makespan_seconds()),
        detail=detail,
    )
