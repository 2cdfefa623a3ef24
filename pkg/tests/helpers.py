"""Shared scenario builders and oracles for the test suite."""

import math
from itertools import combinations

from mrplan.geometry import ConvexPolygon, Pose, Region, regular_polygon
from mrplan.scenario import AgentSpec, DynamicsModel, ScenarioInstance, Workspace


def _circumcircle(a, b, c):
    d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if abs(d) < 1e-300:
        return None
    ux = ((a[0] ** 2 + a[1] ** 2) * (b[1] - c[1]) + (b[0] ** 2 + b[1] ** 2) * (c[1] - a[1])
          + (c[0] ** 2 + c[1] ** 2) * (a[1] - b[1])) / d
    uy = ((a[0] ** 2 + a[1] ** 2) * (c[0] - b[0]) + (b[0] ** 2 + b[1] ** 2) * (a[0] - c[0])
          + (c[0] ** 2 + c[1] ** 2) * (b[0] - a[0])) / d
    r = max(math.dist((ux, uy), p) for p in (a, b, c))
    return (ux, uy), r


def brute_force_mec(points):
    """Enclosing-circle oracle: smallest covering circle over all point pairs
    (diameter) and triples (circumcircle)."""
    pts = [tuple(p) for p in points]
    if len(pts) == 1:
        return pts[0], 0.0
    best = None
    candidates = []
    for a, b in combinations(pts, 2):
        candidates.append((((a[0] + b[0]) / 2, (a[1] + b[1]) / 2), math.dist(a, b) / 2))
    for a, b, c in combinations(pts, 3):
        circ = _circumcircle(a, b, c)
        if circ is not None:
            candidates.append(circ)
    for center, r in candidates:
        if all(math.dist(center, p) <= r + 1e-9 for p in pts):
            if best is None or r < best[1]:
                best = (center, r)
    assert best is not None
    return best


def cell_scenario(width, height, blocked_cells, agent_cells, dynamics=None):
    """Tile world: unit cells, disc agents of effective radius ~0.5.

    `agent_cells` is a list of ((sx, sy), (gx, gy)) cell coordinates; agents
    sit at cell centers. The derived grid aligns with the tiles.
    """
    obstacles = [
        [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)] for (x, y) in blocked_cells
    ]
    ws = Workspace((0.0, 0.0, float(width), float(height)), Region(obstacles))
    footprint = regular_polygon((0, 0), 0.5, n=16)
    agents = []
    for i, ((sx, sy), (gx, gy)) in enumerate(agent_cells):
        agents.append(AgentSpec(
            id=i, footprint=footprint, config_space="r2",
            dynamics=dynamics or DynamicsModel.unit_move(),
            start=Pose(sx + 0.5, sy + 0.5), goal=Pose(gx + 0.5, gy + 0.5)))
    return ScenarioInstance(ws, agents, name=f"cells-{width}x{height}")


def open_fleet(positions, r=0.08, bounds=(0, 0, 5, 5), obstacles=(),
               dynamics=None, homogeneous=True):
    """Fleet of regular-16-gon agents at explicit (start, goal) poses."""
    ws = Workspace(bounds, Region(list(obstacles)))
    agents = []
    for i, (s, g) in enumerate(positions):
        rr = r if homogeneous or not isinstance(r, (list, tuple)) else r[i]
        agents.append(AgentSpec(
            id=i, footprint=regular_polygon((0, 0), rr if not isinstance(r, (list, tuple)) else r[i],
                                            n=16),
            config_space="r2",
            dynamics=dynamics or DynamicsModel.double(v_max=0.5, a_max=2.0),
            start=Pose(*s), goal=Pose(*g)))
    return ScenarioInstance(ws, agents)
