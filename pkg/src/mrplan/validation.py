"""Representation-specific feasibility validators and brute-force oracles.

Grid legality is defined metrically: two simultaneous unit moves conflict when
the linearly interpolated center distance drops below 2*r_com (strictly:
boundary contact at exactly 2*r_com is feasible). This single rule yields the
classic conflict taxonomy: co-occupancy, edge swaps, diagonal crossings, and
corner-meets.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .abstraction import GridEnv, RoadmapEnv, plan_to_trajectories
from .geometry import (
    convex_polygons_distance,
    point_region_distance,
    seg_polygon_distance,
)
from .plans import ContinuousPlan, GridPlan, MalformedPlan, RoadmapPlan
from .scenario import DOUBLE_INTEGRATOR, SE2, ScenarioInstance

# violation kinds
OBSTACLE_OVERLAP = "ObstacleOverlap"
AGENT_OVERLAP = "AgentOverlap"
CO_OCCUPANCY = "CoOccupancy"
EDGE_SWAP = "EdgeSwap"
DIAGONAL_CROSS = "DiagonalCross"
CORNER_MEET = "CornerMeet"
CAPACITY_EXCEEDED = "CapacityExceeded"
HEAD_ON_SWAP = "HeadOnSwap"
HEADWAY_VIOLATION = "HeadwayViolation"
VIRTUAL_VERTEX_CONFLICT = "VirtualVertexConflict"
DYNAMICS_BOUND = "DynamicsBound"
TELEPORT_DISCONTINUITY = "TeleportDiscontinuity"

GRID_TOL = 1e-9          # in cell units, on squared distances
TIME_TOL = 1e-9


class ValidationError(Exception):
    pass


class UnknownEdge(ValidationError):
    pass


class InconsistentSampling(ValidationError):
    pass


class StateSpaceTooLarge(ValidationError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str
    agents: tuple
    time: float
    location: tuple

    def sort_key(self):
        return (self.time, self.kind, self.agents, self.location)


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple

    @property
    def feasible(self) -> bool:
        return not self.violations

    def to_text(self) -> str:
        lines = [f"feasible {int(self.feasible)}"]
        for v in self.violations:
            agents = ",".join(str(a) for a in v.agents)
            loc = ",".join(f"{x:.9g}" for x in v.location)
            lines.append(f"violation {v.kind} agents={agents} t={v.time:.9g} at={loc}")
        return "\n".join(lines) + "\n"


def _report(violations) -> FeasibilityReport:
    return FeasibilityReport(tuple(sorted(violations, key=Violation.sort_key)))


# ---------------------------------------------------------------------------
# Grid move legality
# ---------------------------------------------------------------------------

def min_sq_distance_linear(r0x, r0y, wx, wy):
    """min over t in [0,1] of |r0 + t*w|^2."""
    if wx == 0 and wy == 0:
        return r0x * r0x + r0y * r0y
    denom = wx * wx + wy * wy
    t = -(r0x * wx + r0y * wy) / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    dx, dy = r0x + t * wx, r0y + t * wy
    return dx * dx + dy * dy


def grid_moves_conflict(ua, va, ub, vb, connectivity: int) -> Optional[str]:
    """Conflict kind for two simultaneous unit moves ua->va and ub->vb, or None.

    Works in cell units; the separation threshold is 2*r_com / a(M) = 1/L_max(M).
    """
    tau_sq = 1.0 if connectivity == 4 else 0.5
    if va == vb:
        return CO_OCCUPANCY
    if va == ub and vb == ua:
        return EDGE_SWAP
    r0x, r0y = ub[0] - ua[0], ub[1] - ua[1]
    dax, day = va[0] - ua[0], va[1] - ua[1]
    dbx, dby = vb[0] - ub[0], vb[1] - ub[1]
    wx, wy = dbx - dax, dby - day
    if min_sq_distance_linear(r0x, r0y, wx, wy) >= tau_sq - GRID_TOL:
        return None
    if connectivity == 8 and abs(dax) == 1 and abs(day) == 1 and abs(dbx) == 1 and abs(dby) == 1:
        return DIAGONAL_CROSS
    return CORNER_MEET


def _padded_cell(path, t: int):
    return path[t] if t < len(path) else path[-1]


def validate_grid(plan: GridPlan, env: GridEnv) -> FeasibilityReport:
    """Check cell occupancy plus the full pairwise transition conflict set.

    Parked agents keep occupying their goal cell after arrival.
    """
    actions = set(env.actions)
    for aid, path in zip(plan.agent_ids, plan.paths):
        for k in range(1, len(path)):
            d = (path[k][0] - path[k - 1][0], path[k][1] - path[k - 1][1])
            if d not in actions:
                raise MalformedPlan(f"agent {aid}: step {k} move {d} not in action set")
    violations: List[Violation] = []
    for aid, path in zip(plan.agent_ids, plan.paths):
        for k, cell in enumerate(path):
            if env.blocked(cell):
                violations.append(Violation(OBSTACLE_OVERLAP, (aid,), float(k),
                                            tuple(env.cell_center(cell))))
    horizon = max(len(p) for p in plan.paths)
    n = len(plan.paths)
    last_kind = {}
    for t in range(horizon):
        for i in range(n):
            for j in range(i + 1, n):
                ua = _padded_cell(plan.paths[i], t)
                va = _padded_cell(plan.paths[i], t + 1)
                ub = _padded_cell(plan.paths[j], t)
                vb = _padded_cell(plan.paths[j], t + 1)
                kind = grid_moves_conflict(ua, va, ub, vb, env.connectivity)
                if kind is not None and last_kind.get((i, j)) != (kind, t - 1):
                    violations.append(Violation(
                        kind, (plan.agent_ids[i], plan.agent_ids[j]), float(t + 1),
                        tuple(env.cell_center(va))))
                if kind is not None:
                    last_kind[(i, j)] = (kind, t)
    return _report(violations)


# ---------------------------------------------------------------------------
# Roadmap validation (exact interval arithmetic, then positional check)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Piece:
    """Constant-velocity motion piece: p(t) = p0 + (t - t0) * vel, t in [t0, t1]."""
    agent: int
    t0: float
    t1: float
    p0: tuple
    vel: tuple


def _roadmap_pieces(plan: RoadmapPlan, horizon: float) -> List[_Piece]:
    pieces = []
    for aid, visits in zip(plan.agent_ids, plan.visits):
        for k, v in enumerate(visits):
            if v.depart > v.arrive:
                pieces.append(_Piece(aid, v.arrive, v.depart, tuple(v.point), (0.0, 0.0)))
            if k + 1 < len(visits):
                nxt = visits[k + 1]
                dt = nxt.arrive - v.depart
                if dt <= 0:
                    raise MalformedPlan(f"agent {aid}: non-positive traversal time")
                vel = ((nxt.point.x - v.point.x) / dt, (nxt.point.y - v.point.y) / dt)
                pieces.append(_Piece(aid, v.depart, nxt.arrive, tuple(v.point), vel))
        last = visits[-1]
        if horizon > last.arrive:
            pieces.append(_Piece(aid, last.arrive, horizon, tuple(last.point), (0.0, 0.0)))
    return pieces


def _pieces_min_distance(a: _Piece, b: _Piece):
    """(min distance, time) between two pieces over their time overlap, or None."""
    lo = max(a.t0, b.t0)
    hi = min(a.t1, b.t1)
    if hi < lo:
        return None
    rx = (b.p0[0] + (lo - b.t0) * b.vel[0]) - (a.p0[0] + (lo - a.t0) * a.vel[0])
    ry = (b.p0[1] + (lo - b.t0) * b.vel[1]) - (a.p0[1] + (lo - a.t0) * a.vel[1])
    wx = b.vel[0] - a.vel[0]
    wy = b.vel[1] - a.vel[1]
    span = hi - lo
    if wx == 0.0 and wy == 0.0:
        return math.hypot(rx, ry), lo
    t = -(rx * wx + ry * wy) / (wx * wx + wy * wy)
    t = min(max(t, 0.0), span)
    return math.hypot(rx + t * wx, ry + t * wy), lo + t


def validate_roadmap(plan: RoadmapPlan, env: RoadmapEnv) -> FeasibilityReport:
    """Vertex capacity, head-on swaps, same-edge headway, virtual-vertex
    capacity (all on exact intervals), plus a continuous positional check."""
    edge_lookup = {}
    for idx, e in enumerate(env.edges):
        edge_lookup[(e.source, e.target)] = e
    seg_index = {}
    for sidx, (u, v) in enumerate(env.segments):
        seg_index[(u, v)] = sidx
        seg_index[(v, u)] = sidx

    violations: List[Violation] = []
    two_r = 2.0 * env.radius
    headway = two_r / env.speed
    horizon = max(vs[-1].arrive for vs in plan.visits) + headway

    # per-vertex occupancy intervals, traversals per segment, vv coverages
    vertex_intervals: Dict[int, list] = {}
    seg_traversals: Dict[int, list] = {}
    vv_cover: Dict[int, list] = {}
    for aid, visits in zip(plan.agent_ids, plan.visits):
        for k, v in enumerate(visits):
            depart = v.depart if k + 1 < len(visits) else math.inf  # parked forever
            vertex_intervals.setdefault(v.vertex, []).append((v.arrive, depart, aid))
            if k + 1 < len(visits):
                nxt = visits[k + 1]
                e = edge_lookup.get((v.vertex, nxt.vertex))
                if e is None:
                    raise UnknownEdge(f"agent {aid}: no edge {v.vertex}->{nxt.vertex}")
                if abs((nxt.arrive - v.depart) - e.tau) > 1e-6:
                    raise MalformedPlan(
                        f"agent {aid}: traversal time {nxt.arrive - v.depart:.9g} != tau {e.tau:.9g}")
                sidx = seg_index[(v.vertex, nxt.vertex)]
                forward = env.segments[sidx][0] == v.vertex
                seg_traversals.setdefault(sidx, []).append((v.depart, nxt.arrive, forward, aid))
                for off_u, vv_id in env.seg_crossings.get(sidx, ()):
                    off = off_u if forward else (e.length - off_u)
                    t_cross = v.depart + off / env.speed
                    vv_cover.setdefault(vv_id, []).append(
                        (t_cross - env.radius / env.speed, t_cross + env.radius / env.speed, aid))

    for vertex, ivs in sorted(vertex_intervals.items()):
        ivs.sort()
        for i in range(len(ivs)):
            for j in range(i + 1, len(ivs)):
                a0, a1, aid = ivs[i]
                b0, b1, bid = ivs[j]
                if aid != bid and min(a1, b1) - max(a0, b0) >= -TIME_TOL:
                    p = env.vertices[vertex]
                    violations.append(Violation(CAPACITY_EXCEEDED, tuple(sorted((aid, bid))),
                                                max(a0, b0), (p.x, p.y)))

    for sidx, trav in sorted(seg_traversals.items()):
        trav.sort()
        for i in range(len(trav)):
            for j in range(i + 1, len(trav)):
                t0a, t1a, fa, aid = trav[i]
                t0b, t1b, fb, bid = trav[j]
                if aid == bid:
                    continue
                overlap = min(t1a, t1b) - max(t0a, t0b)
                u, v = env.segments[sidx]
                mid = ((env.vertices[u].x + env.vertices[v].x) / 2,
                       (env.vertices[u].y + env.vertices[v].y) / 2)
                if fa != fb:
                    if overlap > TIME_TOL:
                        violations.append(Violation(HEAD_ON_SWAP, tuple(sorted((aid, bid))),
                                                    max(t0a, t0b), mid))
                else:
                    gap = abs(t0b - t0a)
                    if gap < headway - TIME_TOL:
                        violations.append(Violation(HEADWAY_VIOLATION, tuple(sorted((aid, bid))),
                                                    max(t0a, t0b), mid))

    for vv_id, cover in sorted(vv_cover.items()):
        cover.sort()
        vv = env.virtual_vertices[vv_id]
        for i in range(len(cover)):
            for j in range(i + 1, len(cover)):
                a0, a1, aid = cover[i]
                b0, b1, bid = cover[j]
                if aid != bid and min(a1, b1) - max(a0, b0) > TIME_TOL:
                    violations.append(Violation(VIRTUAL_VERTEX_CONFLICT,
                                                tuple(sorted((aid, bid))),
                                                max(a0, b0), (vv.point.x, vv.point.y)))

    # continuous positional check between constant-velocity pieces
    pieces = _roadmap_pieces(plan, horizon)
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            a, b = pieces[i], pieces[j]
            if a.agent == b.agent:
                continue
            res = _pieces_min_distance(a, b)
            if res is None:
                continue
            d, t = res
            if d < two_r - 1e-9:
                pa = (a.p0[0] + (t - a.t0) * a.vel[0], a.p0[1] + (t - a.t0) * a.vel[1])
                violations.append(Violation(AGENT_OVERLAP, tuple(sorted((a.agent, b.agent))),
                                            t, pa))
    return _report(violations)


# ---------------------------------------------------------------------------
# Continuous validation (sampled at delta_val plus segment midpoints)
# ---------------------------------------------------------------------------

DELTA_VAL = 1.0 / 240.0


def validate_continuous(plan: ContinuousPlan, scenario: ScenarioInstance,
                        delta_val: float = DELTA_VAL) -> FeasibilityReport:
    agents = {a.id: a for a in scenario.agents}
    violations: List[Violation] = []

    # dynamics bounds by finite differences on the plan's own samples
    for aid, tr in zip(plan.agent_ids, plan.trajectories):
        spec = agents[aid]
        d = spec.dynamics
        if not tr.vels:
            raise MalformedPlan(f"agent {aid}: continuous plan lacks velocities")
        times = tr.times
        for k in range(1, len(times)):
            dt = times[k] - times[k - 1]
            if dt <= 0:
                raise InconsistentSampling(f"agent {aid}: non-increasing sample times")
            if abs(dt - plan.sample_period) > 1e-9:
                raise InconsistentSampling(
                    f"agent {aid}: sample period {dt:.9g} != {plan.sample_period:.9g}")
            vx_fd = (tr.points[k][0] - tr.points[k - 1][0]) / dt
            vy_fd = (tr.points[k][1] - tr.points[k - 1][1]) / dt
            v_cap = d.v_max if d.kind == DOUBLE_INTEGRATOR else max(d.speed, 1.0)
            if max(abs(vx_fd), abs(vy_fd)) > 3.0 * v_cap + 1e-6:
                violations.append(Violation(TELEPORT_DISCONTINUITY, (aid,), times[k],
                                            tuple(tr.points[k])))
                continue
            if d.kind == DOUBLE_INTEGRATOR:
                ax = (tr.vels[k][0] - tr.vels[k - 1][0]) / dt
                ay = (tr.vels[k][1] - tr.vels[k - 1][1]) / dt
                eps = 1e-6
                if not (d.a_min - eps <= ax <= d.a_max + eps) or not (d.a_min - eps <= ay <= d.a_max + eps):
                    violations.append(Violation(DYNAMICS_BOUND, (aid,), times[k],
                                                tuple(tr.points[k])))
                if not (d.v_min - eps <= tr.vels[k][0] <= d.v_max + eps) or \
                   not (d.v_min - eps <= tr.vels[k][1] <= d.v_max + eps):
                    violations.append(Violation(DYNAMICS_BOUND, (aid,), times[k],
                                                tuple(tr.points[k])))

    horizon = max(tr.end_time for tr in plan.trajectories)
    n_steps = int(math.ceil(horizon / delta_val)) + 1
    # sample grid plus midpoints = uniform at delta_val / 2
    ts = np.arange(0, 2 * n_steps + 1) * (delta_val / 2.0)

    ids = list(plan.agent_ids)
    poses = []
    for tr in plan.trajectories:
        poses.append([tr.pose_at(float(t)) for t in ts])

    obstacles = scenario.workspace.obstacles
    for idx, aid in enumerate(ids):
        spec = agents[aid]
        r_eff = spec.effective_radius()
        seen_steps = set()
        for k, t in enumerate(ts):
            pose = poses[idx][k]
            clearance = point_region_distance((pose.x, pose.y), obstacles)
            if clearance > r_eff:
                continue
            world = spec.footprint.transformed(pose) if spec.config_space == SE2 \
                else spec.footprint.translated(pose.x, pose.y)
            for poly in obstacles.polygons:
                if _poly_overlap(world, poly):
                    key = int(k)
                    if key not in seen_steps:
                        seen_steps.add(key)
                        violations.append(Violation(OBSTACLE_OVERLAP, (aid,), float(t),
                                                    (pose.x, pose.y)))
                    break

    # pairwise agent separation with disc prefilter
    arr = np.array([[(p.x, p.y) for p in ps] for ps in poses])  # (n, T, 2)
    radii = [agents[a].effective_radius() for a in ids]
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            delta = arr[i] - arr[j]
            center_d = np.hypot(delta[:, 0], delta[:, 1])
            candidates = np.nonzero(center_d <= radii[i] + radii[j] + 1e-12)[0]
            for k in candidates:
                pa, pb = poses[i][k], poses[j][k]
                sa, sb = agents[ids[i]], agents[ids[j]]
                wa = sa.footprint.transformed(pa) if sa.config_space == SE2 \
                    else sa.footprint.translated(pa.x, pa.y)
                wb = sb.footprint.transformed(pb) if sb.config_space == SE2 \
                    else sb.footprint.translated(pb.x, pb.y)
                if convex_polygons_distance(wa, wb) <= 0.0:
                    violations.append(Violation(AGENT_OVERLAP,
                                                tuple(sorted((ids[i], ids[j]))),
                                                float(ts[k]), (pa.x, pa.y)))
                    break
    return _report(violations)


def _poly_overlap(world, poly) -> bool:
    n = len(world)
    for i in range(n):
        if seg_polygon_distance(world[i], world[(i + 1) % n], poly) <= 0.0:
            return True
    return False


def validate(plan, instance) -> FeasibilityReport:
    """Dispatch to the representation's validator."""
    if isinstance(plan, GridPlan):
        return validate_grid(plan, instance.env)
    if isinstance(plan, RoadmapPlan):
        return validate_roadmap(plan, instance.env)
    if isinstance(plan, ContinuousPlan):
        return validate_continuous(plan, instance.scenario)
    raise ValidationError(f"no validator for {type(plan)!r}")


# ---------------------------------------------------------------------------
# Joint-state optimal oracle (Dijkstra over joint cells + parked flags)
# ---------------------------------------------------------------------------

def joint_state_bfs(instance, max_agents: int = 3):
    """Optimal SoC and a witness plan by exhaustive joint-configuration search.

    Cost accounting is parked-at-goal: an agent pays 1 per step until it
    parks at its goal, after which it stays forever as a static obstacle.
    Returns (soc, GridPlan) or (None, None) when unsolvable.
    """
    env: GridEnv = instance.env
    starts, goals = instance.starts, instance.goals
    n = len(starts)
    if n > max_agents:
        raise StateSpaceTooLarge(f"{n} agents > {max_agents}")
    free = [(x, y) for y in range(env.height) for x in range(env.width)
            if not env.occupancy[y][x]]
    if (len(free) ** n) * (2 ** n) > 10_000_000:
        raise StateSpaceTooLarge(f"joint space too large: {len(free)}^{n} * 2^{n}")
    for s, g in zip(starts, goals):
        if env.blocked(s) or env.blocked(g):
            return None, None

    actions = env.actions
    conn = env.connectivity

    def legal_joint(cells, moves):
        for i in range(n):
            for j in range(i + 1, n):
                if grid_moves_conflict(cells[i], moves[i], cells[j], moves[j], conn):
                    return False
        return True

    start_state = (tuple(starts), tuple(False for _ in range(n)))
    dist: Dict[tuple, int] = {start_state: 0}
    prev: Dict[tuple, tuple] = {}
    heap = [(0, start_state)]
    goal_reached = None
    while heap:
        d, state = heapq.heappop(heap)
        if d > dist.get(state, math.inf):
            continue
        cells, done = state
        if all(done):
            goal_reached = state
            break
        # zero-cost parking flips (an agent at its goal may commit to stay);
        # flipping is a branch, not a replacement: staying mobile can be needed
        for i in range(n):
            if not done[i] and cells[i] == goals[i]:
                nd_done = tuple(done[j] or j == i for j in range(n))
                ns = (cells, nd_done)
                if d < dist.get(ns, math.inf):
                    dist[ns] = d
                    prev[ns] = (state, None)
                    heapq.heappush(heap, (d, ns))
        per_agent_moves = []
        for i in range(n):
            if done[i]:
                per_agent_moves.append([cells[i]])
            else:
                opts = []
                for dx, dy in actions:
                    nc = (cells[i][0] + dx, cells[i][1] + dy)
                    if not env.blocked(nc):
                        opts.append(nc)
                per_agent_moves.append(opts)
        step_cost = sum(1 for i in range(n) if not done[i])
        for combo in product(*per_agent_moves):
            if not legal_joint(cells, combo):
                continue
            ns = (tuple(combo), done)
            nd = d + step_cost
            if nd < dist.get(ns, math.inf):
                dist[ns] = nd
                prev[ns] = (state, combo)
                heapq.heappush(heap, (nd, ns))
    if goal_reached is None:
        return None, None

    # walk back; every move transition is one time step, flips are instant
    rows = []
    cur = goal_reached
    while cur != start_state:
        state, combo = prev[cur]
        if combo is not None:
            rows.append(combo)
        cur = state
    rows.reverse()
    cell_rows = [start_state[0]] + rows
    paths = []
    for i in range(n):
        path = [row[i] for row in cell_rows]
        while len(path) > 1 and path[-1] == path[-2]:
            path.pop()
        paths.append(tuple(path))
    plan = GridPlan(agent_ids=tuple(a.id for a in instance.agents),
                    paths=tuple(paths), cell_side=env.cell_side,
                    origin=env.origin, dt=env.dt)
    return dist[goal_reached], plan
