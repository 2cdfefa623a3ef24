"""Prioritized kinodynamic lattice planner for the continuous representation.

Forward search over piecewise-constant acceleration primitives (double
integrator, velocity clamped to bounds) or stop-go velocity primitives
(single integrator). Candidate motions are checked against static obstacles
with swept discs of the agent's own effective radius and against
earlier-planned agents with exact interval minima on the emitted
piecewise-linear trajectories (disc surrogate plus safety margin).
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..abstraction import ContinuousEnv
from ..geometry import Point2, swept_disc_clear
from ..plans import (
    ContinuousPlan,
    PlanOutcome,
    PlanRequest,
    STATUS_INFEASIBLE,
    Trajectory,
    solved_outcome,
)
from ..scenario import DOUBLE_INTEGRATOR, SINGLE_INTEGRATOR
from .base import BudgetExceeded, PlannerError, register_planner

DELTA_PRIM = 0.25          # primitive duration, seconds
SAMPLE_PERIOD = 1.0 / 60.0  # emitted trajectory sampling
POS_BIN = 0.02
VEL_BIN = 0.02
# rest-to-rest displacements per axis are multiples of a_max * delta^2
# (0.125 m at the default bounds: accel/brake half-steps always pair up), so
# the nearest reachable stop point can sit sqrt(2)/2 * q from the goal; the
# acceptance tolerance scales with that quantum and stays below q so the
# planner can never stop one lattice step early
SNAP_TOL = 1e-6
OBSTACLE_MARGIN = 2e-3     # covers chord-vs-parabola deviation during search
AGENT_MARGIN = 1e-4
MAX_EXPANSIONS = 150_000
H_WEIGHT = 1.05            # bounded-suboptimal inflation keeps the search focused


class NoPath(PlannerError):
    pass


def axis_time_to_rest(d: float, v0: float, vmax: float, amax: float) -> float:
    """Minimum time for a 1D double integrator to reach displacement d at rest."""
    if d < 0:
        return axis_time_to_rest(-d, -v0, vmax, amax)
    if v0 < 0:
        # brake to rest, then solve fresh (v0 moves away from the target)
        return -v0 / amax + axis_time_to_rest(d + v0 * v0 / (2 * amax), 0.0, vmax, amax)
    d_stop = v0 * v0 / (2 * amax)
    if d_stop > d:
        # overshoot: brake past the target, then come back from rest
        return v0 / amax + axis_time_to_rest(d_stop - d, 0.0, vmax, amax)
    v_peak = math.sqrt(amax * d + 0.5 * v0 * v0)
    if v_peak <= vmax:
        return (2.0 * v_peak - v0) / amax
    d_acc = (vmax * vmax - v0 * v0) / (2 * amax)
    d_dec = vmax * vmax / (2 * amax)
    return (vmax - v0) / amax + (d - d_acc - d_dec) / vmax + vmax / amax


def integrate_axis(p: float, v: float, a: float, dt: float,
                   v_min: float, v_max: float) -> tuple:
    """Exact integration with velocity clamping; returns (p', v')."""
    if a == 0.0:
        return p + v * dt, v
    v_target = v + a * dt
    bound = v_max if a > 0 else v_min
    if (a > 0 and v_target <= v_max) or (a < 0 and v_target >= v_min):
        return p + v * dt + 0.5 * a * dt * dt, v_target
    t_hit = (bound - v) / a
    p_hit = p + v * t_hit + 0.5 * a * t_hit * t_hit
    return p_hit + bound * (dt - t_hit), bound


def _interval_min_dist(pa0, pa1, pb0, pb1) -> float:
    """Min distance between two points moving linearly over the same interval."""
    rx, ry = pb0[0] - pa0[0], pb0[1] - pa0[1]
    wx = (pb1[0] - pb0[0]) - (pa1[0] - pa0[0])
    wy = (pb1[1] - pb0[1]) - (pa1[1] - pa0[1])
    if wx == 0.0 and wy == 0.0:
        return math.hypot(rx, ry)
    t = -(rx * wx + ry * wy) / (wx * wx + wy * wy)
    t = min(max(t, 0.0), 1.0)
    return math.hypot(rx + t * wx, ry + t * wy)


@dataclass
class _EarlierAgent:
    radius: float
    times: tuple
    points: tuple

    def pos_at(self, t: float):
        ts, pts = self.times, self.points
        if t <= ts[0]:
            return pts[0]
        if t >= ts[-1]:
            return pts[-1]
        lo, hi = 0, len(ts) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ts[mid] <= t:
                lo = mid
            else:
                hi = mid
        lam = (t - ts[lo]) / (ts[hi] - ts[lo])
        return (pts[lo][0] + lam * (pts[hi][0] - pts[lo][0]),
                pts[lo][1] + lam * (pts[hi][1] - pts[lo][1]))


class _SingleAgentSearch:
    def __init__(self, env: ContinuousEnv, spec, start, goal,
                 earlier: List[_EarlierAgent], deadline: Optional[float]):
        self.env = env
        self.spec = spec
        self.start = start
        self.goal = goal
        self.earlier = earlier
        self.deadline = deadline
        self.r_eff = spec.effective_radius()
        d = spec.dynamics
        if d.kind == DOUBLE_INTEGRATOR:
            self.v_min, self.v_max = d.v_min, d.v_max
            self.a_choices = (d.a_min, 0.0, d.a_max)
            self.single = False
        elif d.kind == SINGLE_INTEGRATOR:
            self.v_min, self.v_max = -d.speed, d.speed
            self.v_choices = (-d.speed, 0.0, d.speed)
            self.single = True
        else:
            raise NoPath(f"unsupported dynamics {d.kind} for continuous planning")
        self.samples_per_prim = max(1, round(DELTA_PRIM / SAMPLE_PERIOD))
        # aim the search at the nearest lattice-reachable stop point
        if self.single:
            q = self.v_max * DELTA_PRIM
        else:
            q = d.a_max * DELTA_PRIM * DELTA_PRIM
        self.pos_tol = 0.8 * q
        self.snapped = (start.x + round((goal.x - start.x) / q) * q,
                        start.y + round((goal.y - start.y) / q) * q)

    # -- primitive integration -------------------------------------------
    def propagate(self, state, choice):
        """Sub-sampled positions/velocities over one primitive (exact)."""
        px, py, vx, vy = state
        pts = [(px, py)]
        vels = [(vx, vy)]
        sub = SAMPLE_PERIOD
        cx, cy, cvx, cvy = px, py, vx, vy
        for _ in range(self.samples_per_prim):
            if self.single:
                cvx, cvy = choice
                cx, cy = cx + cvx * sub, cy + cvy * sub
            else:
                cx, cvx = integrate_axis(cx, cvx, choice[0], sub, self.v_min, self.v_max)
                cy, cvy = integrate_axis(cy, cvy, choice[1], sub, self.v_min, self.v_max)
            pts.append((cx, cy))
            vels.append((cvx, cvy))
        return pts, vels

    def motion_clear(self, pts, t0: float) -> bool:
        r_check = self.r_eff + OBSTACLE_MARGIN
        xmin, ymin, xmax, ymax = self.env.bounds
        for k in range(len(pts) - 1):
            a, b = pts[k], pts[k + 1]
            if not (xmin + r_check <= b[0] <= xmax - r_check
                    and ymin + r_check <= b[1] <= ymax - r_check):
                return False
            if not swept_disc_clear(a, b, r_check, self.env.obstacles):
                return False
            t_a = t0 + k * SAMPLE_PERIOD
            t_b = t_a + SAMPLE_PERIOD
            for other in self.earlier:
                qa = other.pos_at(t_a)
                qb = other.pos_at(t_b)
                if _interval_min_dist(a, b, qa, qb) <= self.r_eff + other.radius + AGENT_MARGIN:
                    return False
        return True

    def parked_clear(self, p, t_from: float) -> bool:
        if not swept_disc_clear(p, p, self.r_eff + OBSTACLE_MARGIN, self.env.obstacles):
            return False
        for other in self.earlier:
            sep = self.r_eff + other.radius + AGENT_MARGIN
            ts = [t for t in other.times if t > t_from] + [max(t_from, other.times[-1])]
            qa = other.pos_at(t_from)
            prev = t_from
            for t in ts:
                qb = other.pos_at(t)
                if _interval_min_dist(p, p, qa, qb) <= sep:
                    return False
                qa, prev = qb, t
        return True

    def braking_choice(self, v):
        """Per-axis acceleration that reaches v=0 within one primitive, or None."""
        if self.single:
            return (0.0, 0.0) if max(abs(v[0]), abs(v[1])) <= 1e-12 else None
        d = self.spec.dynamics
        ax, ay = -v[0] / DELTA_PRIM, -v[1] / DELTA_PRIM
        if d.a_min - 1e-9 <= ax <= d.a_max + 1e-9 and d.a_min - 1e-9 <= ay <= d.a_max + 1e-9:
            return (ax, ay)
        return None

    def brake_samples(self, state):
        px, py, vx, vy = state
        pts = [(px, py)]
        vels = [(vx, vy)]
        sub = SAMPLE_PERIOD
        n = self.samples_per_prim
        ax, ay = -vx / DELTA_PRIM, -vy / DELTA_PRIM
        for k in range(1, n + 1):
            u = k * sub
            pts.append((px + vx * u + 0.5 * ax * u * u, py + vy * u + 0.5 * ay * u * u))
            vels.append((vx + ax * u, vy + ay * u))
        # land exactly at rest
        pts[-1] = (px + vx * DELTA_PRIM / 2.0, py + vy * DELTA_PRIM / 2.0)
        vels[-1] = (0.0, 0.0)
        return pts, vels

    def heuristic(self, state) -> float:
        px, py, vx, vy = state
        if self.single:
            s = self.v_max
            return max(abs(self.snapped[0] - px), abs(self.snapped[1] - py)) / s
        d = self.spec.dynamics
        tx = axis_time_to_rest(self.snapped[0] - px, vx, d.v_max, d.a_max)
        ty = axis_time_to_rest(self.snapped[1] - py, vy, d.v_max, d.a_max)
        return max(tx, ty)

    def key(self, state, step):
        return (round(state[0] / POS_BIN), round(state[1] / POS_BIN),
                round(state[2] / VEL_BIN), round(state[3] / VEL_BIN), step)

    def _stop_ok(self, stop) -> bool:
        if math.hypot(stop[0] - self.snapped[0], stop[1] - self.snapped[1]) <= SNAP_TOL:
            return True
        return math.hypot(stop[0] - self.goal[0], stop[1] - self.goal[1]) <= self.pos_tol

    def goal_candidate(self, state):
        """(stop_point, brake_needed) if the state can park at the goal."""
        px, py, vx, vy = state
        if self.single:
            if max(abs(vx), abs(vy)) > 1e-12:
                return None
            if not self._stop_ok((px, py)):
                return None
            return (px, py), False
        if self.braking_choice((vx, vy)) is None:
            return None
        stop = (px + vx * DELTA_PRIM / 2.0, py + vy * DELTA_PRIM / 2.0)
        if not self._stop_ok(stop):
            return None
        return stop, (abs(vx) > 1e-12 or abs(vy) > 1e-12)

    def choices(self):
        if self.single:
            return [(vx, vy) for vx in self.v_choices for vy in self.v_choices]
        return [(ax, ay) for ax in self.a_choices for ay in self.a_choices]

    def search(self):
        start_state = (self.start.x, self.start.y, 0.0, 0.0)
        h0 = self.heuristic(start_state)
        max_steps = int(math.ceil((max(30.0, 6.0 * h0 + 10.0)
                                   + max((e.times[-1] for e in self.earlier), default=0.0))
                                  / DELTA_PRIM))
        counter = 0
        heap = [(H_WEIGHT * h0, 0, counter, start_state, 0)]  # (f, -step, tiebreak, ...)
        seen = {self.key(start_state, 0)}
        parent: Dict[tuple, tuple] = {}
        expansions = 0
        while heap:
            f, _, _, state, step = heapq.heappop(heap)
            expansions += 1
            if expansions > MAX_EXPANSIONS:
                raise NoPath("expansion budget exhausted")
            if self.deadline is not None and expansions % 64 == 0 \
                    and time.perf_counter() > self.deadline:
                raise BudgetExceeded("continuous planner deadline")
            cand = self.goal_candidate(state)
            if cand is not None:
                stop, needs_brake = cand
                t_now = step * DELTA_PRIM
                if needs_brake:
                    pts, vels = self.brake_samples(state)
                    if self.motion_clear(pts, t_now) and self.parked_clear(stop, t_now + DELTA_PRIM):
                        return self._emit(parent, state, step, brake=(pts, vels))
                else:
                    if self.parked_clear(stop, t_now):
                        return self._emit(parent, state, step, brake=None)
            if step >= max_steps:
                continue
            t_now = step * DELTA_PRIM
            for choice in self.choices():
                pts, vels = self.propagate(state, choice)
                nstate = (pts[-1][0], pts[-1][1], vels[-1][0], vels[-1][1])
                k = self.key(nstate, step + 1)
                if k in seen:
                    continue
                if not self.motion_clear(pts, t_now):
                    continue
                seen.add(k)
                parent[(nstate, step + 1)] = ((state, step), pts, vels)
                counter += 1
                heapq.heappush(heap, ((step + 1) * DELTA_PRIM + H_WEIGHT * self.heuristic(nstate),
                                      -(step + 1), counter, nstate, step + 1))
        raise NoPath("no kinodynamic path to goal")

    def _emit(self, parent, state, step, brake):
        chain = []
        key = (state, step)
        while key in parent:
            pkey, pts, vels = parent[key]
            chain.append((pts, vels))
            key = pkey
        chain.reverse()
        points = [(self.start.x, self.start.y)]
        vels = [(0.0, 0.0)]
        for pts, vv in chain:
            points.extend(pts[1:])
            vels.extend(vv[1:])
        if brake is not None:
            pts, vv = brake
            points.extend(pts[1:])
            vels.extend(vv[1:])
        # integer-indexed times: no float accumulation drift
        times = [k * SAMPLE_PERIOD for k in range(len(points))]
        theta = self.start.theta
        return Trajectory(times=tuple(times), points=tuple(Point2(*p) for p in points),
                          thetas=tuple(theta for _ in times), vels=tuple(vels))


def continuous_kinodynamic_prioritized(request: PlanRequest,
                                       order: Optional[tuple] = None) -> PlanOutcome:
    instance = request.instance
    env: ContinuousEnv = instance.env
    t0 = time.perf_counter()
    deadline = t0 + request.budget_s
    n = len(instance.agents)
    idx_order = list(order if order is not None else range(n))
    earlier: List[_EarlierAgent] = []
    trajectories: List = [None] * n
    for i in idx_order:
        spec = instance.agents[i]
        search = _SingleAgentSearch(env, spec, instance.starts[i], instance.goals[i],
                                    earlier, deadline)
        try:
            traj = search.search()
        except NoPath as e:
            return PlanOutcome(status=STATUS_INFEASIBLE, detail=f"agent {spec.id}: {e}")
        trajectories[i] = traj
        earlier.append(_EarlierAgent(radius=search.r_eff, times=traj.times,
                                     points=tuple((p.x, p.y) for p in traj.points)))
    plan = ContinuousPlan(agent_ids=tuple(a.id for a in instance.agents),
                          trajectories=tuple(trajectories),
                          sample_period=SAMPLE_PERIOD)
    return solved_outcome(plan, time.perf_counter() - t0)


register_planner("cont_lattice", "cont", continuous_kinodynamic_prioritized)
