"""Environment/agent abstraction operators and cross-representation conversions.

One scenario can be instantiated as an occupancy grid, a directed roadmap, or
the continuous world itself; plans produced in any representation re-embed to
continuous trajectories for common metrics and playback.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .geometry import (
    CollinearOverlap,
    Point2,
    Region,
    minkowski_inflate,
    point_in_simple_polygon,
    seg_point_distance,
    segment_intersection_params,
    swept_disc_clear,
)
from .plans import ContinuousPlan, GridPlan, RoadmapPlan, Trajectory
from .scenario import (
    DOUBLE_INTEGRATOR,
    SINGLE_INTEGRATOR,
    AgentSpec,
    ScenarioInstance,
)

GRID = "grid"
ROAD = "road"
CONT = "cont"
REPRESENTATIONS = (GRID, ROAD, CONT)

# longest single-move displacement under M-connectivity, in cell units
L_MAX = {4: 1.0, 8: math.sqrt(2.0)}

ACTIONS_4 = ((1, 0), (-1, 0), (0, 1), (0, -1), (0, 0))
ACTIONS_8 = ((1, 0), (-1, 0), (0, 1), (0, -1),
             (1, 1), (1, -1), (-1, 1), (-1, -1), (0, 0))


class AbstractionError(Exception):
    pass


class GoalCellOccupied(AbstractionError):
    def __init__(self, agent_id: int, role: str, cell):
        self.agent_id = agent_id
        self.role = role
        self.cell = cell
        super().__init__(f"{role} of agent {agent_id} snaps to occupied cell {cell}")


class StartGoalAliased(AbstractionError):
    def __init__(self, agent_a: int, agent_b: int, role: str, cell):
        self.agents = (agent_a, agent_b)
        super().__init__(f"{role}s of agents {agent_a} and {agent_b} share cell {cell}")


class DisconnectedStartGoal(AbstractionError):
    def __init__(self, agent_id: int):
        self.agent_id = agent_id
        super().__init__(f"no roadmap path between start and goal of agent {agent_id}")


def common_radius(agents: Sequence[AgentSpec]) -> float:
    """Fleet-wide effective radius: max of per-footprint enclosing-circle radii."""
    if not agents:
        raise AbstractionError("common_radius of empty fleet")
    return max(a.effective_radius() for a in agents)


def common_speed(agents: Sequence[AgentSpec]) -> float:
    """Comparable single-integrator speed the whole fleet can sustain."""
    speeds = []
    for a in agents:
        d = a.dynamics
        if d.kind == SINGLE_INTEGRATOR:
            speeds.append(d.speed)
        elif d.kind == DOUBLE_INTEGRATOR:
            speeds.append(min(d.v_max, -d.v_min))
        else:
            speeds.append(1.0)  # unit grid move over unit time at 1 m tiles
    return min(speeds)


@dataclass(frozen=True)
class GridAgent:
    id: int
    radius: float
    actions: tuple
    dt: float


@dataclass(frozen=True)
class RoadAgent:
    id: int
    radius: float
    speed: float


@dataclass(frozen=True)
class GridEnv:
    width: int
    height: int
    cell_side: float
    connectivity: int
    occupancy: tuple        # row-major tuple of bool tuples, occupancy[y][x]
    dt: float
    origin: tuple           # workspace (xmin, ymin)

    @property
    def actions(self) -> tuple:
        return ACTIONS_4 if self.connectivity == 4 else ACTIONS_8

    def blocked(self, cell) -> bool:
        x, y = cell
        if not (0 <= x < self.width and 0 <= y < self.height):
            return True
        return self.occupancy[y][x]

    def cell_center(self, cell) -> Point2:
        return Point2(self.origin[0] + (cell[0] + 0.5) * self.cell_side,
                      self.origin[1] + (cell[1] + 0.5) * self.cell_side)

    def cell_of(self, p) -> tuple:
        cx = int(math.floor((p[0] - self.origin[0]) / self.cell_side))
        cy = int(math.floor((p[1] - self.origin[1]) / self.cell_side))
        return (min(max(cx, 0), self.width - 1), min(max(cy, 0), self.height - 1))

    def occupied_count(self) -> int:
        return sum(sum(1 for v in row if v) for row in self.occupancy)


@dataclass(frozen=True)
class RoadmapEdge:
    source: int
    target: int
    length: float
    tau: float


@dataclass(frozen=True)
class VirtualVertex:
    id: int
    point: Point2
    edge_a: int             # undirected segment indices
    edge_b: int
    offset_a: float         # arc distance from segment a's first endpoint
    offset_b: float


@dataclass(frozen=True)
class RoadmapEnv:
    vertices: tuple         # Point2 per vertex id
    edges: tuple            # directed RoadmapEdge
    segments: tuple         # undirected (u, v) with u < v, one per edge pair
    speed: float
    radius: float           # common disc radius r_com
    virtual_vertices: tuple
    seg_crossings: dict     # segment index -> tuple of (offset_from_u, vv_id)

    def out_edges(self, v: int):
        return self._adj.get(v, ())

    def __post_init__(self):
        adj: Dict[int, tuple] = {}
        for e in self.edges:
            adj.setdefault(e.source, ())
        tmp: Dict[int, list] = {}
        for e in self.edges:
            tmp.setdefault(e.source, []).append(e)
        for k, v in tmp.items():
            adj[k] = tuple(v)
        object.__setattr__(self, "_adj", adj)


@dataclass(frozen=True)
class ContinuousEnv:
    bounds: tuple
    obstacles: Region
    inflated: dict          # agent id -> conservative obstacle inflation by r_eff


@dataclass(frozen=True)
class AbstractInstance:
    representation: str
    env: object
    agents: tuple           # abstracted agents (AgentSpec for cont)
    starts: tuple           # rep-native: cells / vertex ids / poses
    goals: tuple
    scenario: ScenarioInstance

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise AbstractionError(f"unknown representation {self.representation!r}")


def agent_abstraction(rep: str, agents: Sequence[AgentSpec], r_com: Optional[float] = None,
                      speed: Optional[float] = None, connectivity: int = 4,
                      dt: float = 1.0):
    """Per-representation agent abstraction.

    cont keeps footprints and dynamics unchanged; road and grid replace every
    agent by the common disc surrogate.
    """
    if rep == CONT:
        return tuple(agents)
    r = common_radius(agents) if r_com is None else r_com
    if rep == ROAD:
        nu = common_speed(agents) if speed is None else speed
        return tuple(RoadAgent(a.id, r, nu) for a in agents)
    if rep == GRID:
        actions = ACTIONS_4 if connectivity == 4 else ACTIONS_8
        return tuple(GridAgent(a.id, r, actions, dt) for a in agents)
    raise AbstractionError(f"unknown representation {rep!r}")


# ---------------------------------------------------------------------------
# Continuous -> Grid
# ---------------------------------------------------------------------------

def _clip_segment_to_rect(ax, ay, bx, by, xmin, ymin, xmax, ymax):
    """Liang-Barsky; returns (t0, t1) of the chord inside the closed rect or None."""
    dx, dy = bx - ax, by - ay
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, ax - xmin), (dx, xmax - ax), (-dy, ay - ymin), (dy, ymax - ay)):
        if p == 0.0:
            if q < 0.0:
                return None
        else:
            r = q / p
            if p < 0.0:
                if r > t1:
                    return None
                if r > t0:
                    t0 = r
            else:
                if r < t0:
                    return None
                if r < t1:
                    t1 = r
    return t0, t1


def _polygon_hits_open_rect(poly, xmin, ymin, xmax, ymax, eps) -> bool:
    """Does the polygon intersect the open rectangle (more than boundary contact)?"""
    for v in poly:
        if xmin + eps < v.x < xmax - eps and ymin + eps < v.y < ymax - eps:
            return True
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        clip = _clip_segment_to_rect(a.x, a.y, b.x, b.y, xmin, ymin, xmax, ymax)
        if clip is None:
            continue
        t0, t1 = clip
        if t1 - t0 <= 0.0:
            continue
        tm = 0.5 * (t0 + t1)
        mx, my = a.x + tm * (b.x - a.x), a.y + tm * (b.y - a.y)
        if xmin + eps < mx < xmax - eps and ymin + eps < my < ymax - eps:
            return True
    # rect fully inside the polygon
    cx, cy = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)
    return point_in_simple_polygon((cx, cy), poly)


def _grid_occupancy(scenario: ScenarioInstance, width: int, height: int,
                    a: float) -> List[List[bool]]:
    xmin, ymin, xmax, ymax = scenario.workspace.bounds
    eps = 1e-9 * a
    occ = [[False] * width for _ in range(height)]
    # partial cells poking outside the workspace count as occupied
    for cy in range(height):
        for cx in range(width):
            if xmin + (cx + 1) * a > xmax + eps or ymin + (cy + 1) * a > ymax + eps:
                occ[cy][cx] = True
    for poly in scenario.workspace.obstacles.polygons:
        xs = [v.x for v in poly]
        ys = [v.y for v in poly]
        cx0 = max(0, int(math.floor((min(xs) - xmin) / a)))
        cx1 = min(width - 1, int(math.floor((max(xs) - xmin) / a + eps)))
        cy0 = max(0, int(math.floor((min(ys) - ymin) / a)))
        cy1 = min(height - 1, int(math.floor((max(ys) - ymin) / a + eps)))
        for cy in range(cy0, cy1 + 1):
            for cx in range(cx0, cx1 + 1):
                if occ[cy][cx]:
                    continue
                if _polygon_hits_open_rect(poly, xmin + cx * a, ymin + cy * a,
                                           xmin + (cx + 1) * a, ymin + (cy + 1) * a, eps):
                    occ[cy][cx] = True
    return occ


def _snap_endpoints(scenario: ScenarioInstance, env: GridEnv):
    starts, goals = [], []
    for role, sink in (("start", starts), ("goal", goals)):
        seen = {}
        for agent in scenario.agents:
            pose = agent.start if role == "start" else agent.goal
            cell = env.cell_of((pose.x, pose.y))
            if env.blocked(cell):
                raise GoalCellOccupied(agent.id, role, cell)
            if cell in seen:
                raise StartGoalAliased(seen[cell], agent.id, role, cell)
            seen[cell] = agent.id
            sink.append(cell)
    return tuple(starts), tuple(goals)


def to_grid(scenario: ScenarioInstance, connectivity: int = 4,
            dt: float = 1.0) -> AbstractInstance:
    """Occupancy-grid instantiation with cell side 2 * L_max(M) * r_com."""
    if connectivity not in L_MAX:
        raise AbstractionError(f"connectivity must be 4 or 8, got {connectivity}")
    r_com = common_radius(scenario.agents)
    a = 2.0 * L_MAX[connectivity] * r_com
    xmin, ymin, xmax, ymax = scenario.workspace.bounds
    width = int(math.ceil((xmax - xmin) / a - 1e-12))
    height = int(math.ceil((ymax - ymin) / a - 1e-12))
    occ = _grid_occupancy(scenario, width, height, a)
    env = GridEnv(width=width, height=height, cell_side=a, connectivity=connectivity,
                  occupancy=tuple(tuple(row) for row in occ), dt=dt, origin=(xmin, ymin))
    starts, goals = _snap_endpoints(scenario, env)
    agents = agent_abstraction(GRID, scenario.agents, r_com=r_com,
                               connectivity=connectivity, dt=dt)
    return AbstractInstance(GRID, env, agents, starts, goals, scenario)


# ---------------------------------------------------------------------------
# Continuous -> Roadmap
# ---------------------------------------------------------------------------

def _halton(index: int, base: int) -> float:
    f, r = 1.0, 0.0
    i = index
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


@dataclass(frozen=True)
class RoadmapParams:
    n_samples: int = 120
    connection_radius: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise AbstractionError("n_samples must be >= 1")
        if not self.connection_radius > 0:
            raise AbstractionError("connection_radius must be positive")


# density presets; the underlying knobs stay configurable
ROADMAP_PRESETS = {
    "S": RoadmapParams(n_samples=60, connection_radius=1.4),
    "D": RoadmapParams(n_samples=150, connection_radius=1.0),
    "SD": RoadmapParams(n_samples=320, connection_radius=0.8),
}


def to_roadmap(scenario: ScenarioInstance, params: RoadmapParams = RoadmapParams()) -> AbstractInstance:
    """Directed roadmap over low-discrepancy samples with pinned starts/goals.

    Vertices lie in the free space eroded by r_com; an edge is added per
    direction whenever the endpoints are within the connection radius and the
    swept disc of r_com is obstacle-free. Proper geometric edge crossings are
    materialized as capacity-1 virtual vertices; exactly-overlapping edges are
    rejected at construction.
    """
    r_com = common_radius(scenario.agents)
    nu = common_speed(scenario.agents)
    obstacles = scenario.workspace.obstacles
    xmin, ymin, xmax, ymax = scenario.workspace.bounds

    verts: List[Point2] = []
    index_of: Dict[tuple, int] = {}

    def pin(p: Point2) -> int:
        key = (p.x, p.y)
        if key not in index_of:
            index_of[key] = len(verts)
            verts.append(p)
        return index_of[key]

    starts = tuple(pin(Point2(a.start.x, a.start.y)) for a in scenario.agents)
    goals = tuple(pin(Point2(a.goal.x, a.goal.y)) for a in scenario.agents)

    rng = random.Random(params.seed)
    ox, oy = rng.random(), rng.random()
    accepted = 0
    attempts = 0
    k = 0
    margin = r_com
    while accepted < params.n_samples and attempts < 200 * params.n_samples:
        attempts += 1
        k += 1
        u = (_halton(k, 2) + ox) % 1.0
        v = (_halton(k, 3) + oy) % 1.0
        p = Point2(xmin + margin + u * max(0.0, (xmax - xmin) - 2 * margin),
                   ymin + margin + v * max(0.0, (ymax - ymin) - 2 * margin))
        if (p.x, p.y) in index_of:
            continue
        if swept_disc_clear(p, p, r_com, obstacles):
            pin(p)
            accepted += 1

    # candidate pairs within connection radius, shortest first (deterministic)
    R = params.connection_radius
    bucket: Dict[tuple, list] = {}
    for i, p in enumerate(verts):
        bucket.setdefault((int(p.x // R), int(p.y // R)), []).append(i)
    cand = []
    for (bx, by), members in bucket.items():
        neigh = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                neigh.extend(bucket.get((bx + dx, by + dy), ()))
        for i in members:
            for j in neigh:
                if j <= i:
                    continue
                d = math.dist(verts[i], verts[j])
                if 0.0 < d <= R:
                    cand.append((d, i, j))
    cand.sort()

    segments: List[tuple] = []
    seg_bucket: Dict[tuple, list] = {}

    def seg_cells(p, q):
        # exact coverage: every bucket cell whose (slightly fattened) square
        # the segment touches, so crossing segments always share a cell
        cells = set()
        bx0 = int(min(p.x, q.x) // R) - 1
        bx1 = int(max(p.x, q.x) // R) + 1
        by0 = int(min(p.y, q.y) // R) - 1
        by1 = int(max(p.y, q.y) // R) + 1
        pad = 1e-9 * R
        for by in range(by0, by1 + 1):
            for bx in range(bx0, bx1 + 1):
                if _clip_segment_to_rect(p.x, p.y, q.x, q.y,
                                         bx * R - pad, by * R - pad,
                                         (bx + 1) * R + pad, (by + 1) * R + pad) is not None:
                    cells.add((bx, by))
        return cells

    edges: List[RoadmapEdge] = []
    for d, i, j in cand:
        if not swept_disc_clear(verts[i], verts[j], r_com, obstacles):
            continue
        overlap = False
        for cell in seg_cells(verts[i], verts[j]):
            for sidx in seg_bucket.get(cell, ()):
                u_, v_ = segments[sidx]
                if u_ in (i, j) and v_ in (i, j):
                    overlap = True  # duplicate segment
                    break
                try:
                    segment_intersection_params(verts[i], verts[j], verts[u_], verts[v_])
                except CollinearOverlap:
                    overlap = True
                    break
            if overlap:
                break
        if overlap:
            continue
        sidx = len(segments)
        segments.append((i, j))
        for cell in seg_cells(verts[i], verts[j]):
            seg_bucket.setdefault(cell, []).append(sidx)
        tau = d / nu
        edges.append(RoadmapEdge(i, j, d, tau))
        edges.append(RoadmapEdge(j, i, d, tau))

    # proper crossings between segments become virtual vertices
    virtual: List[VirtualVertex] = []
    seg_crossings: Dict[int, list] = {}
    checked = set()
    for cell, members in sorted(seg_bucket.items()):
        for ia in members:
            for ib in members:
                if ib <= ia or (ia, ib) in checked:
                    continue
                checked.add((ia, ib))
                a0, a1 = segments[ia]
                b0, b1 = segments[ib]
                if {a0, a1} & {b0, b1}:
                    continue
                res = segment_intersection_params(verts[a0], verts[a1], verts[b0], verts[b1])
                if res is None:
                    continue
                t, u, p = res
                tol = 1e-9
                if not (tol < t < 1 - tol and tol < u < 1 - tol):
                    continue
                vv = VirtualVertex(
                    id=len(virtual), point=p, edge_a=ia, edge_b=ib,
                    offset_a=t * math.dist(verts[a0], verts[a1]),
                    offset_b=u * math.dist(verts[b0], verts[b1]))
                virtual.append(vv)
                seg_crossings.setdefault(ia, []).append((vv.offset_a, vv.id))
                seg_crossings.setdefault(ib, []).append((vv.offset_b, vv.id))

    env = RoadmapEnv(
        vertices=tuple(verts), edges=tuple(edges), segments=tuple(segments),
        speed=nu, radius=r_com, virtual_vertices=tuple(virtual),
        seg_crossings={k: tuple(sorted(v)) for k, v in seg_crossings.items()},
    )

    adj: Dict[int, list] = {}
    for e in edges:
        adj.setdefault(e.source, []).append(e.target)
    for aid, (s, g) in enumerate(zip(starts, goals)):
        seen = {s}
        queue = [s]
        while queue:
            cur = queue.pop()
            if cur == g:
                break
            for nxt in adj.get(cur, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        if g not in seen:
            raise DisconnectedStartGoal(scenario.agents[aid].id)

    agents = agent_abstraction(ROAD, scenario.agents, r_com=r_com, speed=nu)
    return AbstractInstance(ROAD, env, agents, starts, goals, scenario)


# ---------------------------------------------------------------------------
# Continuous (identity on the environment, per-agent inflation for planning)
# ---------------------------------------------------------------------------

def to_continuous(scenario: ScenarioInstance, disc_segments: int = 16) -> AbstractInstance:
    inflated = {
        a.id: minkowski_inflate(scenario.workspace.obstacles, a.effective_radius(),
                                disc_segments)
        for a in scenario.agents
    }
    env = ContinuousEnv(bounds=scenario.workspace.bounds,
                        obstacles=scenario.workspace.obstacles, inflated=inflated)
    agents = agent_abstraction(CONT, scenario.agents)
    starts = tuple(a.start for a in scenario.agents)
    goals = tuple(a.goal for a in scenario.agents)
    return AbstractInstance(CONT, env, agents, starts, goals, scenario)


def abstract(scenario: ScenarioInstance, rep: str, **kw) -> AbstractInstance:
    if rep == GRID:
        return to_grid(scenario, **kw)
    if rep == ROAD:
        return to_roadmap(scenario, **kw)
    if rep == CONT:
        return to_continuous(scenario, **kw)
    raise AbstractionError(f"unknown representation {rep!r}")


# ---------------------------------------------------------------------------
# Roadmap -> Grid (edge rasterization onto the grid overlay)
# ---------------------------------------------------------------------------

def supercover_cells(p, q, origin, a: float, width: int, height: int):
    """All cells whose closed square the segment [p, q] touches."""
    eps = 1e-9 * a
    xmin, ymin = origin
    cx0 = int(math.floor((min(p[0], q[0]) - xmin) / a - eps))
    cx1 = int(math.floor((max(p[0], q[0]) - xmin) / a + eps))
    cy0 = int(math.floor((min(p[1], q[1]) - ymin) / a - eps))
    cy1 = int(math.floor((max(p[1], q[1]) - ymin) / a + eps))
    out = []
    for cy in range(max(0, cy0), min(height - 1, cy1) + 1):
        for cx in range(max(0, cx0), min(width - 1, cx1) + 1):
            clip = _clip_segment_to_rect(p[0], p[1], q[0], q[1],
                                         xmin + cx * a - eps, ymin + cy * a - eps,
                                         xmin + (cx + 1) * a + eps, ymin + (cy + 1) * a + eps)
            if clip is not None:
                out.append((cx, cy))
    return out


def roadmap_to_grid(road: AbstractInstance, connectivity: int = 4,
                    dt: float = 1.0) -> AbstractInstance:
    """Graph-constrained grid: cells touched by roadmap edges are traversable."""
    if road.representation != ROAD:
        raise AbstractionError("roadmap_to_grid needs a roadmap instance")
    scenario = road.scenario
    env_r: RoadmapEnv = road.env
    r_com = env_r.radius
    a = 2.0 * L_MAX[connectivity] * r_com
    xmin, ymin, xmax, ymax = scenario.workspace.bounds
    width = int(math.ceil((xmax - xmin) / a - 1e-12))
    height = int(math.ceil((ymax - ymin) / a - 1e-12))
    traversable = set()
    for (u, v) in env_r.segments:
        traversable.update(supercover_cells(env_r.vertices[u], env_r.vertices[v],
                                            (xmin, ymin), a, width, height))
    occ = [[(cx, cy) not in traversable for cx in range(width)] for cy in range(height)]
    env = GridEnv(width=width, height=height, cell_side=a, connectivity=connectivity,
                  occupancy=tuple(tuple(row) for row in occ), dt=dt, origin=(xmin, ymin))
    starts, goals = _snap_endpoints(scenario, env)
    agents = agent_abstraction(GRID, scenario.agents, r_com=r_com,
                               connectivity=connectivity, dt=dt)
    return AbstractInstance(GRID, env, agents, starts, goals, scenario)


# ---------------------------------------------------------------------------
# Re-embedding plans into continuous world coordinates
# ---------------------------------------------------------------------------

def grid_to_continuous(plan: GridPlan) -> List[Trajectory]:
    """Timed cell sequences become polylines through cell centers."""
    out = []
    for path in plan.paths:
        times = tuple(k * plan.dt for k in range(len(path)))
        pts = tuple(plan.cell_center(c) for c in path)
        if len(pts) == 1:
            times, pts = (0.0,), (pts[0],)
        out.append(Trajectory(times=times, points=pts))
    return out


def grid_obstacles_region(env: GridEnv) -> Region:
    """Obstacles reconstructed from the occupancy mask (one square per cell)."""
    polys = []
    a = env.cell_side
    x0, y0 = env.origin
    for cy in range(env.height):
        for cx in range(env.width):
            if env.occupancy[cy][cx]:
                polys.append([(x0 + cx * a, y0 + cy * a), (x0 + (cx + 1) * a, y0 + cy * a),
                              (x0 + (cx + 1) * a, y0 + (cy + 1) * a), (x0 + cx * a, y0 + (cy + 1) * a)])
    return Region(polys)


def roadmap_to_continuous(plan: RoadmapPlan) -> List[Trajectory]:
    """Timed vertex visits become piecewise-linear trajectories (waits hold)."""
    out = []
    for visits in plan.visits:
        times: List[float] = []
        pts: List[Point2] = []
        for v in visits:
            if not times or v.arrive > times[-1]:
                times.append(v.arrive)
                pts.append(v.point)
            elif not pts or pts[-1] != v.point:
                times.append(v.arrive)
                pts.append(v.point)
            if v.depart > v.arrive:
                times.append(v.depart)
                pts.append(v.point)
        if not times:
            times, pts = [0.0], [visits[0].point]
        out.append(Trajectory(times=tuple(times), points=tuple(pts)))
    return out


def continuous_plan_trajectories(plan: ContinuousPlan) -> List[Trajectory]:
    return list(plan.trajectories)


def plan_to_trajectories(plan) -> List[Trajectory]:
    if isinstance(plan, GridPlan):
        return grid_to_continuous(plan)
    if isinstance(plan, RoadmapPlan):
        return roadmap_to_continuous(plan)
    if isinstance(plan, ContinuousPlan):
        return continuous_plan_trajectories(plan)
    raise AbstractionError(f"cannot re-embed {type(plan)!r}")


def roadmap_to_continuous_check(polyline: Sequence, agent: AgentSpec,
                                scenario: ScenarioInstance) -> bool:
    """Swept-disc validation of a roadmap path against the agent's own radius."""
    r = agent.effective_radius()
    pts = list(polyline)
    if len(pts) == 1:
        return swept_disc_clear(pts[0], pts[0], r, scenario.workspace.obstacles)
    for k in range(len(pts) - 1):
        if not swept_disc_clear(pts[k], pts[k + 1], r, scenario.workspace.obstacles):
            return False
    return True
