"""Deterministic scenario families for tests, demos, and benchmark suites."""

from __future__ import annotations

import math
import random
from typing import Optional

from .geometry import ConvexPolygon, Pose, Region, regular_polygon
from .scenario import (
    R2,
    SE2,
    AgentSpec,
    DynamicsModel,
    ScenarioInstance,
    Workspace,
    footprint_in_free_space,
)

OBSTACLE_PRESETS = ("empty", "scatter", "window", "corridor")


def _preset_obstacles(preset: str, bounds, rng: random.Random) -> Region:
    xmin, ymin, xmax, ymax = bounds
    w, h = xmax - xmin, ymax - ymin
    if preset == "empty":
        return Region()
    if preset == "scatter":
        polys = []
        for _ in range(6):
            side = rng.uniform(0.08 * w, 0.16 * w)
            x = rng.uniform(xmin + 0.2 * w, xmax - 0.2 * w - side)
            y = rng.uniform(ymin + 0.2 * h, ymax - 0.2 * h - side)
            polys.append([(x, y), (x + side, y), (x + side, y + side), (x, y + side)])
        return Region(polys)
    if preset == "window":
        # vertical wall with one opening in the middle third
        wall_x = xmin + 0.5 * w
        t = 0.04 * w
        gap_lo = ymin + rng.uniform(0.35, 0.45) * h
        gap_hi = gap_lo + 0.22 * h
        return Region([
            [(wall_x - t, ymin), (wall_x + t, ymin), (wall_x + t, gap_lo), (wall_x - t, gap_lo)],
            [(wall_x - t, gap_hi), (wall_x + t, gap_hi), (wall_x + t, ymax), (wall_x - t, ymax)],
        ])
    if preset == "corridor":
        # two slabs leaving a horizontal corridor through the middle
        t = 0.08 * h
        y0 = ymin + 0.5 * h
        return Region([
            [(xmin + 0.15 * w, y0 - 0.35 * h), (xmax - 0.15 * w, y0 - 0.35 * h),
             (xmax - 0.15 * w, y0 - t), (xmin + 0.15 * w, y0 - t)],
            [(xmin + 0.15 * w, y0 + t), (xmax - 0.15 * w, y0 + t),
             (xmax - 0.15 * w, y0 + 0.35 * h), (xmin + 0.15 * w, y0 + 0.35 * h)],
        ])
    raise ValueError(f"unknown obstacle preset {preset!r}")


def _sample_pose(rng: random.Random, bounds, margin: float) -> Pose:
    xmin, ymin, xmax, ymax = bounds
    return Pose(rng.uniform(xmin + margin, xmax - margin),
                rng.uniform(ymin + margin, ymax - margin), 0.0)


def random_fleet_scenario(
    seed: int,
    n_agents: int = 2,
    preset: str = "empty",
    bounds=(0.0, 0.0, 5.0, 5.0),
    dynamics: str = "double",
    r_eff_range=(0.05, 0.08),
    min_clearance: float = 0.05,
    heterogeneous: bool = True,
    name: Optional[str] = None,
) -> ScenarioInstance:
    """Desk-scale fleet in a 5x5 m workspace with preset obstacles.

    Deterministic for a fixed seed. Start and goal placements are rejection
    sampled with strict clearance from obstacles and from each other.
    """
    rng = random.Random(seed)
    obstacles = _preset_obstacles(preset, bounds, rng)
    workspace = Workspace(bounds, obstacles)

    footprints = []
    radii = []
    for i in range(n_agents):
        r = rng.uniform(*r_eff_range) if heterogeneous else r_eff_range[1]
        k = rng.choice([5, 6, 8, 16]) if heterogeneous else 16
        phase = rng.uniform(0, math.pi)
        footprints.append(regular_polygon((0.0, 0.0), r, n=k, phase=phase))
        radii.append(r)

    def place(count: int, taken: list) -> list:
        placed = []
        attempts = 0
        while len(placed) < count:
            attempts += 1
            if attempts > 20000:
                raise RuntimeError(f"could not place {count} poses (seed {seed}, preset {preset})")
            i = len(placed)
            margin = radii[i] + min_clearance
            pose = _sample_pose(rng, bounds, margin)
            if not footprint_in_free_space(footprints[i], pose, workspace):
                continue
            ok = True
            for j, other in enumerate(placed):
                if math.dist((pose.x, pose.y), (other.x, other.y)) < radii[i] + radii[j] + min_clearance:
                    ok = False
                    break
            if ok:
                placed.append(pose)
        return placed

    starts = place(n_agents, [])
    goals = place(n_agents, [])

    dyn = {
        "double": DynamicsModel.double(v_max=0.5, a_max=2.0),
        "single": DynamicsModel.single(0.5),
        "unit": DynamicsModel.unit_move(),
    }[dynamics]

    agents = [
        AgentSpec(id=i, footprint=footprints[i], config_space=R2, dynamics=dyn,
                  start=starts[i], goal=goals[i])
        for i in range(n_agents)
    ]
    return ScenarioInstance(
        workspace, agents,
        name=name or f"{preset}-n{n_agents}-s{seed}", seed=seed)


def movingai_fixture_text(width: int = 24, height: int = 24, seed: int = 3,
                          density: float = 0.08, n_rows: int = 25):
    """Synthetic .map/.scen contents in MovingAI format.

    Obstacles are isolated blocked tiles with 8-neighborhood spacing so that
    the derived occupancy grid keeps corridors open, and scen rows avoid
    tiles adjacent to blocked ones.
    """
    rng = random.Random(seed)
    blocked = [[False] * width for _ in range(height)]
    target = int(density * width * height)
    placed = 0
    attempts = 0
    while placed < target and attempts < 10000:
        attempts += 1
        x = rng.randrange(2, width - 2)
        y = rng.randrange(2, height - 2)
        if any(blocked[yy][xx]
               for yy in range(max(0, y - 2), min(height, y + 3))
               for xx in range(max(0, x - 2), min(width, x + 3))):
            continue
        blocked[y][x] = True
        placed += 1

    def clear_of_blocks(x, y):
        return not any(
            blocked[yy][xx]
            for yy in range(max(0, y - 1), min(height, y + 2))
            for xx in range(max(0, x - 1), min(width, x + 2)))

    free_cells = [(x, y) for y in range(height) for x in range(width) if clear_of_blocks(x, y)]
    rng.shuffle(free_cells)
    rows = []
    used = set()
    i = 0
    while len(rows) < n_rows and i + 1 < len(free_cells):
        s, g = free_cells[i], free_cells[i + 1]
        i += 2
        if s in used or g in used or s == g:
            continue
        used.add(s)
        used.add(g)
        dist = abs(s[0] - g[0]) + abs(s[1] - g[1])
        rows.append(f"0\tfixture.map\t{width}\t{height}\t{s[0]}\t{s[1]}\t{g[0]}\t{g[1]}\t{dist}")
    if len(rows) < n_rows:
        raise RuntimeError("fixture generation failed to place scen rows")

    map_lines = ["type octile", f"height {height}", f"width {width}", "map"]
    for y in range(height):
        map_lines.append("".join("@" if blocked[y][x] else "." for x in range(width)))
    scen_lines = ["version 1"] + rows
    return "\n".join(map_lines) + "\n", "\n".join(scen_lines) + "\n"
