"""Prioritized safe-interval planning on directed roadmaps.

Agents are discs of the common radius moving at the common speed, waiting only
at vertices. Instead of enumerating the named interaction rules separately,
the planner keeps every candidate motion at distance >= 2*r_com (+ margin)
from all earlier agents; vertex capacity, head-on exclusion, same-edge
headway, and virtual-vertex capacity all follow from that separation.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..abstraction import RoadmapEnv
from ..plans import (
    PlanOutcome,
    PlanRequest,
    RoadmapPlan,
    RoadmapVisit,
    STATUS_INFEASIBLE,
    solved_outcome,
)
from .base import BudgetExceeded, PlannerError, register_planner

SAFETY_MARGIN = 1e-6     # meters added to the 2r separation inside the planner
EPS_T = 1e-9


class NoPath(PlannerError):
    pass


@dataclass(frozen=True)
class Piece:
    """Constant-velocity motion piece of an already-planned agent."""
    t0: float
    t1: float               # math.inf for parked tails
    p0: tuple
    vel: tuple

    def pos(self, t: float) -> tuple:
        return (self.p0[0] + (t - self.t0) * self.vel[0],
                self.p0[1] + (t - self.t0) * self.vel[1])


def visits_to_pieces(visits) -> List[Piece]:
    pieces = []
    for k, v in enumerate(visits):
        if v.depart > v.arrive:
            pieces.append(Piece(v.arrive, v.depart, (v.point.x, v.point.y), (0.0, 0.0)))
        if k + 1 < len(visits):
            nxt = visits[k + 1]
            dt = nxt.arrive - v.depart
            vel = ((nxt.point.x - v.point.x) / dt, (nxt.point.y - v.point.y) / dt)
            pieces.append(Piece(v.depart, nxt.arrive, (v.point.x, v.point.y), vel))
    last = visits[-1]
    pieces.append(Piece(last.arrive, math.inf, (last.point.x, last.point.y), (0.0, 0.0)))
    return pieces


def _interval_below(d0, vel, span, radius):
    """Local times u in [0, span] where |d0 + u*vel| < radius, as an interval."""
    a = vel[0] * vel[0] + vel[1] * vel[1]
    c = d0[0] * d0[0] + d0[1] * d0[1] - radius * radius
    if a == 0.0:
        return (0.0, span) if c < 0.0 else None
    b = 2.0 * (d0[0] * vel[0] + d0[1] * vel[1])
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return None
    sq = math.sqrt(disc)
    u1 = (-b - sq) / (2.0 * a)
    u2 = (-b + sq) / (2.0 * a)
    lo, hi = max(u1, 0.0), min(u2, span)
    if hi <= lo:
        return None
    return lo, hi


def point_unsafe_windows(point, pieces, radius) -> List[tuple]:
    """Absolute-time windows during which a disc parked at `point` is too close."""
    out = []
    for pc in pieces:
        span = pc.t1 - pc.t0
        d0 = (pc.p0[0] - point[0], pc.p0[1] - point[1])
        iv = _interval_below(d0, pc.vel, span, radius)
        if iv is not None:
            out.append((pc.t0 + iv[0], pc.t0 + iv[1]))
    out.sort()
    merged = []
    for lo, hi in out:
        if merged and lo <= merged[-1][1] + EPS_T:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def safe_intervals(point, pieces, radius) -> List[tuple]:
    """Complement of the unsafe windows over [0, inf)."""
    unsafe = point_unsafe_windows(point, pieces, radius)
    out = []
    cur = 0.0
    for lo, hi in unsafe:
        if lo > cur + EPS_T:
            out.append((cur, lo))
        cur = max(cur, hi)
    out.append((cur, math.inf))
    return out


def _edge_motion_conflict(p0, direction, speed, s, tau, piece: Piece, radius):
    """Exact conflict test of an edge traversal departing at s against a piece."""
    lo = max(s, piece.t0)
    hi = min(s + tau, piece.t1)
    if hi < lo:
        return False
    rx = piece.pos(lo)[0] - (p0[0] + (lo - s) * speed * direction[0])
    ry = piece.pos(lo)[1] - (p0[1] + (lo - s) * speed * direction[1])
    wx = piece.vel[0] - speed * direction[0]
    wy = piece.vel[1] - speed * direction[1]
    span = hi - lo
    if wx == 0.0 and wy == 0.0:
        return math.hypot(rx, ry) < radius
    t = -(rx * wx + ry * wy) / (wx * wx + wy * wy)
    t = min(max(t, 0.0), span)
    return math.hypot(rx + t * wx, ry + t * wy) < radius


def earliest_edge_departure(p0, direction, speed, tau, s_lo, s_hi, pieces, radius):
    """Smallest departure s in [s_lo, s_hi] whose whole traversal stays clear.

    Stationary blockers yield exact unsafe windows; moving blockers are
    cleared by advance-and-bisect against the exact conflict test.
    """
    s = s_lo
    for _ in range(600):
        if s > s_hi + EPS_T:
            return None
        blocker = None
        for pc in pieces:
            if _edge_motion_conflict(p0, direction, speed, s, tau, pc, radius):
                blocker = pc
                break
        if blocker is None:
            return s
        if blocker.vel == (0.0, 0.0):
            d0 = (blocker.p0[0] - p0[0], blocker.p0[1] - p0[1])
            iv = _interval_below(d0, (-speed * direction[0], -speed * direction[1]),
                                 tau, radius)
            if iv is None:
                # conflict did not come from proximity along the edge; nudge
                s += radius / (4.0 * speed)
                continue
            if math.isinf(blocker.t1):
                return None          # parked within radius of the corridor forever
            s_next = blocker.t1 - iv[0]
        else:
            # advance until this moving blocker clears, then bisect the boundary
            step = radius / (2.0 * speed)
            s_clear = s + step
            limit = blocker.t1 + EPS_T
            while s_clear <= min(s_hi, limit) and _edge_motion_conflict(
                    p0, direction, speed, s_clear, tau, blocker, radius):
                s_clear += step
            if s_clear > s_hi + EPS_T and s_clear > limit:
                s_next = max(blocker.t1, s + step)
            else:
                lo_b, hi_b = s, s_clear
                for _ in range(60):
                    mid = 0.5 * (lo_b + hi_b)
                    if _edge_motion_conflict(p0, direction, speed, mid, tau, blocker, radius):
                        lo_b = mid
                    else:
                        hi_b = mid
                s_next = hi_b
        s = max(s_next, s + EPS_T)
    return None


@dataclass(frozen=True)
class _Itinerary:
    vertex: int
    arrive: float
    depart: float


def sipp_single_agent(env: RoadmapEnv, start: int, goal: int, pieces: List[Piece],
                      radius: float, deadline: Optional[float] = None):
    """Earliest-arrival safe-interval search for one agent. Returns visit list."""
    speed = env.speed
    verts = env.vertices

    # admissible arrival-time heuristic: static Dijkstra from the goal
    h: Dict[int, float] = {goal: 0.0}
    rev: Dict[int, list] = {}
    for e in env.edges:
        rev.setdefault(e.target, []).append(e)
    hq = [(0.0, goal)]
    while hq:
        d, v = heapq.heappop(hq)
        if d > h.get(v, math.inf):
            continue
        for e in rev.get(v, ()):
            nd = d + e.tau
            if nd < h.get(e.source, math.inf):
                h[e.source] = nd
                heapq.heappush(hq, (nd, e.source))
    if start not in h:
        raise NoPath(f"goal vertex {goal} unreachable from {start}")

    si_cache: Dict[int, list] = {}

    def intervals(v: int):
        if v not in si_cache:
            si_cache[v] = safe_intervals(verts[v], pieces, radius)
        return si_cache[v]

    def interval_of(v: int, t: float):
        for idx, (lo, hi) in enumerate(intervals(v)):
            if lo - EPS_T <= t <= hi + EPS_T:
                return idx
        return None

    start_iv = interval_of(start, 0.0)
    if start_iv is None or intervals(start)[start_iv][0] > EPS_T:
        raise NoPath(f"start vertex {start} not safe at t=0")

    finite_ends = [pc.t1 for pc in pieces if math.isfinite(pc.t1)]
    horizon = (max(finite_ends, default=0.0)
               + sum(e.tau for e in env.edges) / max(1, len(env.edges)) * (len(verts) + 2)
               + 10.0)

    best: Dict[tuple, float] = {(start, start_iv): 0.0}
    parent: Dict[tuple, tuple] = {}
    counter = 0
    heap = [(h[start], 0.0, counter, start, start_iv)]
    expansions = 0
    while heap:
        f, arrive, _, v, iv = heapq.heappop(heap)
        if arrive > best.get((v, iv), math.inf) + EPS_T:
            continue
        expansions += 1
        if deadline is not None and expansions % 64 == 0 and time.perf_counter() > deadline:
            raise BudgetExceeded("SIPP deadline")
        iv_lo, iv_hi = intervals(v)[iv]
        if v == goal and math.isinf(iv_hi):
            return _reconstruct(parent, (v, iv), arrive)
        for e in env.out_edges(v):
            w = e.target
            p0 = verts[v]
            p1 = verts[w]
            direction = ((p1.x - p0.x) / e.length, (p1.y - p0.y) / e.length)
            for widx, (w_lo, w_hi) in enumerate(intervals(w)):
                s_min = max(arrive, w_lo - e.tau)
                s_max = min(iv_hi, w_hi - e.tau, horizon)
                if s_max < s_min - EPS_T:
                    continue
                s = earliest_edge_departure((p0.x, p0.y), direction, speed, e.tau,
                                            s_min, s_max, pieces, radius)
                if s is None:
                    continue
                t_arr = s + e.tau
                key = (w, widx)
                if t_arr < best.get(key, math.inf) - EPS_T:
                    best[key] = t_arr
                    parent[key] = ((v, iv), arrive, s)
                    counter += 1
                    heapq.heappush(heap, (t_arr + h.get(w, math.inf), t_arr, counter, w, widx))
    raise NoPath(f"no safe itinerary {start}->{goal}")


def _reconstruct(parent, key, final_arrive):
    """Walk the parent links into (vertex, arrive, depart) visit tuples."""
    stops = []          # (vertex, arrive), goal first
    departs = []        # departure time of the transition into each stop
    arrive = final_arrive
    while True:
        stops.append((key[0], arrive))
        if key not in parent:
            break
        pkey, p_arrive, depart = parent[key]
        departs.append(depart)
        key, arrive = pkey, p_arrive
    stops.reverse()
    departs.reverse()   # departs[k] leaves stops[k] toward stops[k+1]
    visits = []
    for k, (vid, arr) in enumerate(stops):
        depart = departs[k] if k < len(departs) else arr
        visits.append((vid, arr, max(depart, arr)))
    return visits


def roadmap_sipp_prioritized(request: PlanRequest, order: Optional[tuple] = None) -> PlanOutcome:
    instance = request.instance
    env: RoadmapEnv = instance.env
    t0 = time.perf_counter()
    deadline = t0 + request.budget_s
    radius = 2.0 * env.radius + SAFETY_MARGIN
    n = len(instance.starts)
    idx_order = list(order if order is not None else range(n))
    pieces: List[Piece] = []
    all_visits: List = [None] * n
    for i in idx_order:
        try:
            raw = sipp_single_agent(env, instance.starts[i], instance.goals[i],
                                    pieces, radius, deadline=deadline)
        except NoPath as e:
            return PlanOutcome(status=STATUS_INFEASIBLE, detail=f"agent {i}: {e}")
        visits = tuple(
            RoadmapVisit(vertex=v, arrive=arr, depart=dep, point=env.vertices[v])
            for (v, arr, dep) in raw)
        all_visits[i] = visits
        pieces.extend(visits_to_pieces(visits))
    plan = RoadmapPlan(agent_ids=tuple(a.id for a in instance.agents),
                       visits=tuple(all_visits), speed=env.speed)
    return solved_outcome(plan, time.perf_counter() - t0)


register_planner("roadmap_sipp", "road", roadmap_sipp_prioritized)
