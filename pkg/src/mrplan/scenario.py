"""Base-world data model and scenario file I/O.

A scenario is the single source of truth: a bounded workspace with polygonal
obstacles plus per-agent footprints, dynamics, and start/goal poses. All
downstream representations are derived from it and may assume its invariants.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .geometry import (
    ConvexPolygon,
    GeometryError,
    Point2,
    Pose,
    Region,
    convex_polygons_distance,
    effective_radius,
    min_enclosing_circle,
    regular_polygon,
    seg_polygon_distance,
)

SCHEMA_VERSION = 1

R2 = "r2"
SE2 = "se2"

DISCRETE_UNIT_MOVE = "discrete_unit_move"
SINGLE_INTEGRATOR = "single_integrator"
DOUBLE_INTEGRATOR = "double_integrator"


class ScenarioError(Exception):
    pass


class ParseError(ScenarioError):
    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{message}" + (f" (at {location})" if location else ""))


class InvariantViolation(ScenarioError):
    def __init__(self, which: str, agent_id: Optional[int] = None, detail: str = ""):
        self.which = which
        self.agent_id = agent_id
        msg = which if agent_id is None else f"{which} (agent {agent_id})"
        super().__init__(msg + (f": {detail}" if detail else ""))


class IoError(ScenarioError):
    pass


class TooFewScenarioRows(ScenarioError):
    pass


@dataclass(frozen=True)
class DynamicsModel:
    kind: str
    speed: float = 0.0          # single integrator commanded speed
    v_min: float = 0.0
    v_max: float = 0.0
    a_min: float = 0.0
    a_max: float = 0.0

    def __post_init__(self):
        if self.kind == SINGLE_INTEGRATOR:
            if not self.speed > 0:
                raise InvariantViolation("dynamics_speed_nonpositive")
        elif self.kind == DOUBLE_INTEGRATOR:
            if not (self.v_min < 0 < self.v_max):
                raise InvariantViolation("dynamics_velocity_bounds")
            if not (self.a_min < 0 < self.a_max):
                raise InvariantViolation("dynamics_acceleration_bounds")
        elif self.kind != DISCRETE_UNIT_MOVE:
            raise InvariantViolation("dynamics_unknown_kind", detail=self.kind)

    @staticmethod
    def unit_move() -> "DynamicsModel":
        return DynamicsModel(DISCRETE_UNIT_MOVE)

    @staticmethod
    def single(speed: float) -> "DynamicsModel":
        return DynamicsModel(SINGLE_INTEGRATOR, speed=speed)

    @staticmethod
    def double(v_max: float, a_max: float, v_min: Optional[float] = None,
               a_min: Optional[float] = None) -> "DynamicsModel":
        return DynamicsModel(
            DOUBLE_INTEGRATOR,
            v_min=-v_max if v_min is None else v_min, v_max=v_max,
            a_min=-a_max if a_min is None else a_min, a_max=a_max,
        )


@dataclass(frozen=True)
class Workspace:
    bounds: tuple           # (xmin, ymin, xmax, ymax)
    obstacles: Region = field(default_factory=Region)

    def __post_init__(self):
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin):
            raise InvariantViolation("workspace_bounds_empty")
        for poly in self.obstacles.polygons:
            for v in poly:
                if not (xmin - 1e-9 <= v.x <= xmax + 1e-9 and ymin - 1e-9 <= v.y <= ymax + 1e-9):
                    raise InvariantViolation("obstacle_outside_bounds", detail=f"{v}")

    def contains_point(self, p, margin: float = 0.0) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return (xmin + margin <= p[0] <= xmax - margin
                and ymin + margin <= p[1] <= ymax - margin)


@dataclass(frozen=True)
class AgentSpec:
    id: int
    footprint: ConvexPolygon
    config_space: str
    dynamics: DynamicsModel
    start: Pose
    goal: Pose

    def __post_init__(self):
        if self.config_space not in (R2, SE2):
            raise InvariantViolation("config_space_invalid", self.id, self.config_space)

    def effective_radius(self) -> float:
        return effective_radius(self.footprint)[1]


def footprint_in_free_space(footprint: ConvexPolygon, pose: Pose, workspace: Workspace) -> bool:
    """Closed-set check: world-frame footprint inside bounds, off every obstacle."""
    world = footprint.transformed(pose)
    xmin, ymin, xmax, ymax = workspace.bounds
    for v in world:
        if not (xmin <= v.x <= xmax and ymin <= v.y <= ymax):
            return False
    c = min_enclosing_circle(world)
    n = len(world)
    for poly in workspace.obstacles.polygons:
        # disc prefilter before exact polygon distance
        if seg_polygon_distance(c.center, c.center, poly) > c.radius:
            continue
        for i in range(n):
            if seg_polygon_distance(world[i], world[(i + 1) % n], poly) <= 0.0:
                return False
        # polygon edges clear; footprint could still swallow a tiny obstacle
        if footprint_contains_any(world, poly):
            return False
    return True


def footprint_contains_any(world_vertices, poly) -> bool:
    hull = ConvexPolygon.__new__(ConvexPolygon)
    object.__setattr__(hull, "vertices", tuple(world_vertices))
    return any(hull.contains(v) for v in poly)


@dataclass(frozen=True)
class ScenarioInstance:
    workspace: Workspace
    agents: tuple
    name: str = "scenario"
    seed: int = 0

    def __init__(self, workspace: Workspace, agents: Sequence[AgentSpec],
                 name: str = "scenario", seed: int = 0, validate: bool = True):
        object.__setattr__(self, "workspace", workspace)
        object.__setattr__(self, "agents", tuple(agents))
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "seed", int(seed) & 0xFFFFFFFFFFFFFFFF)
        if validate:
            self._validate()

    def _validate(self):
        if len(self.agents) < 1:
            raise InvariantViolation("no_agents")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise InvariantViolation("duplicate_id")
        for a in self.agents:
            if not footprint_in_free_space(a.footprint, a.start, self.workspace):
                raise InvariantViolation("start_in_obstacle", a.id)
            if not footprint_in_free_space(a.footprint, a.goal, self.workspace):
                raise InvariantViolation("goal_in_obstacle", a.id)
        self._check_pairwise_disjoint("start")
        self._check_pairwise_disjoint("goal")

    def _check_pairwise_disjoint(self, role: str):
        placed = []
        for a in self.agents:
            pose = a.start if role == "start" else a.goal
            world = a.footprint.transformed(pose)
            disc = min_enclosing_circle(world)
            placed.append((a.id, world, disc))
        for i in range(len(placed)):
            for j in range(i + 1, len(placed)):
                ida, va, da = placed[i]
                idb, vb, db = placed[j]
                gap = math.dist(da.center, db.center) - da.radius - db.radius
                if gap > 0:
                    continue
                if convex_polygons_distance(va, vb) <= 0.0:
                    raise InvariantViolation(
                        f"{role}_footprints_overlap", ida, detail=f"agents {ida} and {idb}")

    def n_agents(self) -> int:
        return len(self.agents)

    def subset(self, n: int) -> "ScenarioInstance":
        """First n agents; invariants already hold, skip re-validation."""
        if not 1 <= n <= len(self.agents):
            raise ValueError(f"cannot take {n} of {len(self.agents)} agents")
        return ScenarioInstance(self.workspace, self.agents[:n],
                                name=self.name, seed=self.seed, validate=False)


# ---------------------------------------------------------------------------
# Schema v1 (JSON): explicit units in meters, integer format version
# ---------------------------------------------------------------------------

def _pose_to_list(p: Pose):
    return [p.x, p.y, p.theta]


def scenario_to_dict(inst: ScenarioInstance) -> dict:
    return {
        "format_version": SCHEMA_VERSION,
        "name": inst.name,
        "seed": inst.seed,
        "workspace": {
            "bounds_m": list(inst.workspace.bounds),
            "obstacles": [[[v.x, v.y] for v in poly] for poly in inst.workspace.obstacles.polygons],
        },
        "agents": [
            {
                "id": a.id,
                "footprint": [[v.x, v.y] for v in a.footprint.vertices],
                "config_space": a.config_space,
                "dynamics": _dynamics_to_dict(a.dynamics),
                "start": _pose_to_list(a.start),
                "goal": _pose_to_list(a.goal),
            }
            for a in inst.agents
        ],
    }


def _dynamics_to_dict(d: DynamicsModel) -> dict:
    if d.kind == SINGLE_INTEGRATOR:
        return {"kind": d.kind, "speed_mps": d.speed}
    if d.kind == DOUBLE_INTEGRATOR:
        return {"kind": d.kind, "v_min_mps": d.v_min, "v_max_mps": d.v_max,
                "a_min_mps2": d.a_min, "a_max_mps2": d.a_max}
    return {"kind": d.kind}


def _dynamics_from_dict(d: dict, where: str) -> DynamicsModel:
    kind = d.get("kind")
    try:
        if kind == SINGLE_INTEGRATOR:
            return DynamicsModel.single(float(d["speed_mps"]))
        if kind == DOUBLE_INTEGRATOR:
            return DynamicsModel(DOUBLE_INTEGRATOR,
                                 v_min=float(d["v_min_mps"]), v_max=float(d["v_max_mps"]),
                                 a_min=float(d["a_min_mps2"]), a_max=float(d["a_max_mps2"]))
        if kind == DISCRETE_UNIT_MOVE:
            return DynamicsModel.unit_move()
    except KeyError as e:
        raise ParseError(f"dynamics missing field {e}", where) from e
    raise ParseError(f"unknown dynamics kind {kind!r}", where)


def scenario_from_dict(doc: dict, source: str = "<dict>") -> ScenarioInstance:
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be an object", source)
    version = doc.get("format_version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported format_version {version!r}", source)
    try:
        ws_doc = doc["workspace"]
        bounds = tuple(float(v) for v in ws_doc["bounds_m"])
        if len(bounds) != 4:
            raise ParseError("bounds_m must have 4 entries", f"{source}:workspace")
        obstacles = Region([poly for poly in ws_doc.get("obstacles", [])])
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, GeometryError) as e:
        raise ParseError(f"bad workspace: {e}", f"{source}:workspace") from e
    try:
        workspace = Workspace(bounds, obstacles)
    except InvariantViolation:
        raise
    agents = []
    for idx, a_doc in enumerate(doc.get("agents", [])):
        where = f"{source}:agents[{idx}]"
        try:
            footprint = ConvexPolygon(a_doc["footprint"])
            start = Pose(*[float(v) for v in a_doc["start"]])
            goal = Pose(*[float(v) for v in a_doc["goal"]])
            agents.append(AgentSpec(
                id=int(a_doc["id"]),
                footprint=footprint,
                config_space=a_doc.get("config_space", R2),
                dynamics=_dynamics_from_dict(a_doc.get("dynamics", {"kind": DISCRETE_UNIT_MOVE}), where),
                start=start,
                goal=goal,
            ))
        except (InvariantViolation, ParseError):
            raise
        except (KeyError, TypeError, ValueError, GeometryError) as e:
            raise ParseError(f"bad agent: {e}", where) from e
    return ScenarioInstance(workspace, agents,
                            name=str(doc.get("name", "scenario")), seed=int(doc.get("seed", 0)))


def load_scenario(path) -> ScenarioInstance:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise IoError(str(e)) from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", f"{path}:{e.lineno}") from e
    return scenario_from_dict(doc, source=str(path))


def save_scenario(inst: ScenarioInstance, path) -> None:
    doc = scenario_to_dict(inst)
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise IoError(str(e)) from e


# ---------------------------------------------------------------------------
# MovingAI community benchmark ingestion (.map / .scen)
# ---------------------------------------------------------------------------

PASSABLE_CHARS = {".", "G", "S"}
MOVINGAI_CLEARANCE = 1e-3  # keeps cell-center placement strictly collision-free
MOVINGAI_FOOTPRINT_SIDES = 16


def parse_movingai_map(path):
    """Returns (width, height, rows) with rows[y][x] True when blocked."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = [ln.rstrip("\n") for ln in f]
    except OSError as e:
        raise IoError(str(e)) from e
    height = width = None
    map_start = None
    for i, ln in enumerate(lines):
        tok = ln.strip().split()
        if len(tok) >= 2 and tok[0].lower() == "height":
            height = int(tok[1])
        elif len(tok) >= 2 and tok[0].lower() == "width":
            width = int(tok[1])
        elif tok and tok[0].lower() == "map":
            map_start = i + 1
            break
    if height is None or width is None or map_start is None:
        raise ParseError("missing height/width/map header", str(path))
    grid_rows = lines[map_start:map_start + height]
    if len(grid_rows) != height or any(len(r) < width for r in grid_rows):
        raise ParseError("map body size mismatch", f"{path}:{map_start}")
    blocked = [[grid_rows[y][x] not in PASSABLE_CHARS for x in range(width)]
               for y in range(height)]
    return width, height, blocked


def parse_movingai_scen(path):
    """Returns list of (start_col, start_row, goal_col, goal_row)."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = [ln.strip() for ln in f if ln.strip()]
    except OSError as e:
        raise IoError(str(e)) from e
    rows = []
    for i, ln in enumerate(lines):
        if ln.lower().startswith("version"):
            continue
        parts = ln.split()
        if len(parts) < 9:
            raise ParseError(f"scen row needs 9 fields, got {len(parts)}", f"{path}:{i + 1}")
        rows.append((int(parts[4]), int(parts[5]), int(parts[6]), int(parts[7])))
    return rows


def import_movingai(map_path, scen_path, tile_side: float = 1.0,
                    n_agents: int = 1) -> ScenarioInstance:
    """Build a scenario from community .map/.scen files.

    Blocked tiles become square obstacles of side `tile_side`; the first
    `n_agents` scenario rows become disc-like agents (regular polygons of
    effective radius tile_side/2 minus a small clearance) with discrete unit
    moves, placed at cell centers.
    """
    if n_agents < 1:
        raise TooFewScenarioRows(f"n_agents must be >= 1, got {n_agents}")
    width, height, blocked = parse_movingai_map(map_path)
    rows = parse_movingai_scen(scen_path)
    if len(rows) < n_agents:
        raise TooFewScenarioRows(f"requested {n_agents} agents, scen has {len(rows)} rows")
    a = tile_side
    obstacles = []
    for y in range(height):
        for x in range(width):
            if blocked[y][x]:
                obstacles.append([(x * a, y * a), ((x + 1) * a, y * a),
                                  ((x + 1) * a, (y + 1) * a), (x * a, (y + 1) * a)])
    workspace = Workspace((0.0, 0.0, width * a, height * a), Region(obstacles))
    r_eff = 0.5 * a * (1.0 - MOVINGAI_CLEARANCE)
    footprint = regular_polygon((0.0, 0.0), r_eff, n=MOVINGAI_FOOTPRINT_SIDES)
    agents = []
    for i, (sx, sy, gx, gy) in enumerate(rows[:n_agents]):
        for cx, cy, role in ((sx, sy, "start"), (gx, gy, "goal")):
            if not (0 <= cx < width and 0 <= cy < height):
                raise ParseError(f"{role} cell ({cx},{cy}) outside map", str(scen_path))
            if blocked[cy][cx]:
                raise InvariantViolation(f"{role}_in_obstacle", i, f"cell ({cx},{cy})")
        agents.append(AgentSpec(
            id=i, footprint=footprint, config_space=R2,
            dynamics=DynamicsModel.unit_move(),
            start=Pose((sx + 0.5) * a, (sy + 0.5) * a, 0.0),
            goal=Pose((gx + 0.5) * a, (gy + 0.5) * a, 0.0),
        ))
    import os
    name = os.path.splitext(os.path.basename(str(map_path)))[0]
    return ScenarioInstance(workspace, agents, name=name, seed=0)
