"""Grid planners: space-time A*, prioritized planning, and conflict-based search."""

from __future__ import annotations

import heapq
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from ..abstraction import GridEnv
from ..plans import (
    GridPlan,
    PlanOutcome,
    PlanRequest,
    STATUS_INFEASIBLE,
    STATUS_TIMEOUT,
    solved_outcome,
)
from ..validation import grid_moves_conflict
from .base import BudgetExceeded, PlannerError, register_planner


class NoPath(PlannerError):
    pass


def bfs_distances(env: GridEnv, goal) -> Dict[tuple, int]:
    """True shortest-path distances to goal over free cells (admissible h)."""
    dist = {goal: 0}
    queue = deque([goal])
    while queue:
        cur = queue.popleft()
        d = dist[cur]
        for dx, dy in env.actions:
            if dx == 0 and dy == 0:
                continue
            nxt = (cur[0] + dx, cur[1] + dy)
            if nxt not in dist and not env.blocked(nxt):
                dist[nxt] = d + 1
                queue.append(nxt)
    return dist


class ReservationTable:
    """Padded paths of already-planned agents; parked agents block forever."""

    def __init__(self, connectivity: int):
        self.connectivity = connectivity
        self.paths: List[tuple] = []

    def add(self, path):
        self.paths.append(tuple(path))

    def latest_step(self) -> int:
        return max((len(p) - 1 for p in self.paths), default=0)

    def move_blocked(self, u, v, t: int) -> bool:
        for p in self.paths:
            ub = p[t] if t < len(p) else p[-1]
            vb = p[t + 1] if t + 1 < len(p) else p[-1]
            if grid_moves_conflict(u, v, ub, vb, self.connectivity):
                return True
        return False

    def park_blocked_until(self, cell) -> int:
        """Latest step at which waiting at `cell` conflicts with a reservation."""
        latest = -1
        horizon = self.latest_step() + 1
        for p in self.paths:
            for t in range(horizon):
                ub = p[t] if t < len(p) else p[-1]
                vb = p[t + 1] if t + 1 < len(p) else p[-1]
                if grid_moves_conflict(cell, cell, ub, vb, self.connectivity):
                    latest = max(latest, t)
        return latest


@dataclass(frozen=True)
class Constraints:
    """CBS low-level constraints for one agent."""
    vertices: FrozenSet[tuple] = frozenset()   # (cell, t): may not occupy cell at t
    moves: FrozenSet[tuple] = frozenset()      # (u, v, t): may not start move u->v at t

    def latest(self) -> int:
        t1 = max((t for _, t in self.vertices), default=-1)
        t2 = max((t for _, _, t in self.moves), default=-1)
        return max(t1, t2)

    def with_vertex(self, cell, t):
        return Constraints(self.vertices | {(cell, t)}, self.moves)

    def with_move(self, u, v, t):
        return Constraints(self.vertices, self.moves | {(u, v, t)})


def grid_space_time_astar(env: GridEnv, start, goal,
                          h: Optional[Dict[tuple, int]] = None,
                          constraints: Constraints = Constraints(),
                          reservations: Optional[ReservationTable] = None,
                          deadline: Optional[float] = None,
                          avoid_paths: Optional[list] = None) -> tuple:
    """Shortest timed path start->goal avoiding constraints and reservations.

    Cost is the final-arrival step; the returned path has one cell per step
    and is free of trailing goal waits. `avoid_paths` is a conflict-avoidance
    table: among equal-cost paths the search prefers fewer conflicts with
    those padded paths (cost stays optimal). Raises NoPath when unsolvable
    within the completeness horizon.
    """
    if env.blocked(start) or env.blocked(goal):
        raise NoPath(f"blocked endpoint {start}->{goal}")
    if h is None:
        h = bfs_distances(env, goal)
    if start not in h:
        raise NoPath(f"goal unreachable from {start}")

    latest_constraint = constraints.latest()
    park_after = -1
    if reservations is not None:
        park_after = reservations.park_blocked_until(goal)
    # terminal rest at the goal is only pushed out by constraints that touch
    # the goal cell itself; anything else must not inflate the arrival cost
    goal_relevant = [t for (c, t) in constraints.vertices if c == goal]
    goal_relevant += [t for (u, v, t) in constraints.moves if u == goal and v == goal]
    min_end = max(park_after + 1, max(goal_relevant, default=-1) + 1)
    t_max = env.width * env.height + max(min_end, latest_constraint + 1) + 2
    if reservations is not None:
        t_max += reservations.latest_step()

    avoid = [tuple(p) for p in avoid_paths] if avoid_paths else []

    def move_conflicts(u, v, t):
        c = 0
        for p in avoid:
            ub = p[t] if t < len(p) else p[-1]
            vb = p[t + 1] if t + 1 < len(p) else p[-1]
            if grid_moves_conflict(u, v, ub, vb, env.connectivity):
                c += 1
        return c

    # with a conflict-avoidance table, states are settled at pop time so the
    # first settle carries the lexicographically best (cost, conflicts); the
    # plain search dedupes at push time (every push is already optimal)
    counter = 0
    heap = [(h[start], 0, 0, counter, start, 0, None)]
    settled = set()
    pushed = {(start, 0)}
    checked = 0
    while heap:
        f, conf, _, _, cell, t, parent_entry = heapq.heappop(heap)
        key = (cell, t)
        if avoid:
            if key in settled:
                continue
            settled.add(key)
        checked += 1
        if deadline is not None and checked % 256 == 0 and time.perf_counter() > deadline:
            raise BudgetExceeded("grid A* deadline")
        if cell == goal and t >= min_end:
            path = [cell]
            entry = parent_entry
            while entry is not None:
                path.append(entry[0])
                entry = entry[1]
            path.reverse()
            return tuple(path)
        if t >= t_max:
            continue
        for dx, dy in env.actions:
            ncell = (cell[0] + dx, cell[1] + dy)
            if env.blocked(ncell):
                continue
            nt = t + 1
            if (ncell, nt) in constraints.vertices:
                continue
            if (cell, ncell, t) in constraints.moves:
                continue
            if reservations is not None and reservations.move_blocked(cell, ncell, t):
                continue
            nkey = (ncell, nt)
            if avoid:
                if nkey in settled:
                    continue
                nconf = conf + move_conflicts(cell, ncell, t)
            else:
                if nkey in pushed:
                    continue
                pushed.add(nkey)
                nconf = 0
            counter += 1
            heapq.heappush(heap, (nt + h.get(ncell, 10 ** 9), nconf, nt, counter,
                                  ncell, nt, (cell, parent_entry)))
    raise NoPath(f"no timed path {start}->{goal}")


def _trim(path, goal):
    p = list(path)
    while len(p) > 1 and p[-1] == p[-2] == goal:
        p.pop()
    return tuple(p)


def _mk_plan(instance, paths) -> GridPlan:
    env = instance.env
    return GridPlan(agent_ids=tuple(a.id for a in instance.agents),
                    paths=tuple(paths), cell_side=env.cell_side,
                    origin=env.origin, dt=env.dt)


def grid_prioritized(request: PlanRequest, order: Optional[tuple] = None) -> PlanOutcome:
    """Plan agents one by one in priority order against earlier reservations."""
    instance = request.instance
    env: GridEnv = instance.env
    t0 = time.perf_counter()
    deadline = t0 + request.budget_s
    idx_order = list(order if order is not None else range(len(instance.starts)))
    table = ReservationTable(env.connectivity)
    paths: List = [None] * len(instance.starts)
    for i in idx_order:
        try:
            path = grid_space_time_astar(env, instance.starts[i], instance.goals[i],
                                         reservations=table, deadline=deadline)
        except NoPath as e:
            return PlanOutcome(status=STATUS_INFEASIBLE, detail=f"agent {i}: {e}")
        path = _trim(path, instance.goals[i])
        paths[i] = path
        table.add(path)
    return solved_outcome(_mk_plan(instance, paths), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Conflict-based search, SoC-optimal under the full grid conflict set
# ---------------------------------------------------------------------------

def _path_cost(path) -> int:
    t = len(path) - 1
    while t > 0 and path[t - 1] == path[-1]:
        t -= 1
    return t


def _find_conflicts(paths, connectivity, first_only=False):
    """Conflicts as (t, i, j, kind, moves); scan is deterministic."""
    horizon = max(len(p) for p in paths)
    n = len(paths)
    found = []
    for t in range(horizon):
        for i in range(n):
            for j in range(i + 1, n):
                ua = paths[i][t] if t < len(paths[i]) else paths[i][-1]
                va = paths[i][t + 1] if t + 1 < len(paths[i]) else paths[i][-1]
                ub = paths[j][t] if t < len(paths[j]) else paths[j][-1]
                vb = paths[j][t + 1] if t + 1 < len(paths[j]) else paths[j][-1]
                kind = grid_moves_conflict(ua, va, ub, vb, connectivity)
                if kind is not None:
                    found.append((t, i, j, kind, (ua, va, ub, vb)))
                    if first_only:
                        return found
    return found


@dataclass(order=True)
class _CBSNode:
    soc: int
    n_conflicts: int
    order: int
    constraints: tuple = field(compare=False)   # per-agent Constraints
    paths: tuple = field(compare=False)


def grid_cbs(request: PlanRequest) -> PlanOutcome:
    """SoC-optimal conflict-based search.

    High level is best-first on (SoC, conflict count, insertion order); the
    branching constraint forbids one side's exact move (or end vertex for
    co-occupancy), which preserves every feasible solution in one child.
    The low level breaks cost ties toward fewer conflicts with the other
    agents' current paths, and equal-cost children that strictly reduce the
    conflict count are adopted in place (bypass).
    """
    instance = request.instance
    env: GridEnv = instance.env
    t0 = time.perf_counter()
    deadline = t0 + request.budget_s
    n = len(instance.starts)
    heuristics = [bfs_distances(env, g) for g in instance.goals]

    def low_level(i, constraints, other_paths):
        return grid_space_time_astar(env, instance.starts[i], instance.goals[i],
                                     h=heuristics[i], constraints=constraints,
                                     deadline=deadline, avoid_paths=other_paths)

    try:
        root_paths: List = []
        for i in range(n):
            root_paths.append(low_level(i, Constraints(), root_paths))
        root_paths = tuple(root_paths)
    except NoPath as e:
        return PlanOutcome(status=STATUS_INFEASIBLE, detail=str(e))

    tick = 0
    root = _CBSNode(soc=sum(_path_cost(p) for p in root_paths),
                    n_conflicts=len(_find_conflicts(root_paths, env.connectivity)),
                    order=tick,
                    constraints=tuple(Constraints() for _ in range(n)),
                    paths=root_paths)
    heap = [root]

    def make_child(node, updates, replan_agents):
        """Child node with per-agent constraint updates; replans the listed
        agents (others keep their current, still-compliant paths)."""
        nonlocal tick
        new_constraints = list(node.constraints)
        for agent, cons in updates:
            new_constraints[agent] = cons
        new_paths = list(node.paths)
        for agent in replan_agents:
            others = [new_paths[k] for k in range(n) if k != agent]
            try:
                new_paths[agent] = low_level(agent, new_constraints[agent], others)
            except NoPath:
                return None
        new_paths = tuple(new_paths)
        tick += 1
        return _CBSNode(soc=sum(_path_cost(p) for p in new_paths),
                        n_conflicts=len(_find_conflicts(new_paths, env.connectivity)),
                        order=tick, constraints=tuple(new_constraints), paths=new_paths)

    def branch(node, t, i, j, kind, ua, va, ub, vb):
        """Two children whose cases cover every feasible solution: each side
        in turn is forbidden its exact conflicting move (or end vertex)."""
        children = []
        for agent, u, v in ((i, ua, va), (j, ub, vb)):
            cons = node.constraints[agent]
            if kind == "CoOccupancy":
                cons = cons.with_vertex(v, t + 1)
            else:
                cons = cons.with_move(u, v, t)
            children.append(make_child(node, [(agent, cons)], [agent]))
        return children

    while heap:
        if time.perf_counter() > deadline:
            return PlanOutcome(status=STATUS_TIMEOUT, detail="CBS budget exceeded")
        node = heapq.heappop(heap)
        while True:
            conflicts = _find_conflicts(node.paths, env.connectivity, first_only=True)
            if not conflicts:
                paths = tuple(_trim(p, instance.goals[i])
                              for i, p in enumerate(node.paths))
                return solved_outcome(_mk_plan(instance, paths),
                                      time.perf_counter() - t0)
            t, i, j, kind, (ua, va, ub, vb) = conflicts[0]
            children = [c for c in branch(node, t, i, j, kind, ua, va, ub, vb)
                        if c is not None]
            adopted = None
            for child in children:
                if child.soc == node.soc and child.n_conflicts < node.n_conflicts:
                    # bypass: same cost, strictly fewer conflicts; adopt the
                    # paths without committing to the constraint
                    adopted = _CBSNode(soc=child.soc, n_conflicts=child.n_conflicts,
                                       order=child.order,
                                       constraints=node.constraints, paths=child.paths)
                    break
            if adopted is not None:
                node = adopted
                continue
            for child in children:
                heapq.heappush(heap, child)
            break
    return PlanOutcome(status=STATUS_INFEASIBLE, detail="CBS exhausted constraint tree")


register_planner("grid_prioritized", "grid", grid_prioritized)
register_planner("grid_cbs", "grid", grid_cbs)
