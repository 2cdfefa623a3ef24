"""Line-oriented planner wire format v1.

Request: header, environment block, agent block, END.
Response: PLAN <status>, COST line, one A line per agent, END.
Floats are %.17g so values round-trip bit-exactly through text.
"""

from __future__ import annotations

import math
from typing import List

from ..abstraction import CONT, GRID, ROAD, AbstractInstance, ContinuousEnv, GridEnv, RoadmapEnv
from ..geometry import Point2
from ..plans import (
    ContinuousPlan,
    GridPlan,
    PlanCost,
    PlanOutcome,
    PlanRequest,
    RoadmapPlan,
    RoadmapVisit,
    Trajectory,
)

MAGIC = "MRPLAN-WIRE 1"


class WireError(ValueError):
    pass


def _f(x: float) -> str:
    return format(float(x), ".17g")


def _rle(flags) -> str:
    runs = []
    count = 0
    cur = None
    for v in flags:
        b = 1 if v else 0
        if b == cur:
            count += 1
        else:
            if cur is not None:
                runs.append(f"{count}x{cur}")
            cur, count = b, 1
    if cur is not None:
        runs.append(f"{count}x{cur}")
    return " ".join(runs) if runs else "0x0"


def _unrle(text: str) -> List[int]:
    out: List[int] = []
    for tok in text.split():
        count, val = tok.split("x")
        out.extend([int(val)] * int(count))
    return out


def serialize_request(request: PlanRequest) -> str:
    inst: AbstractInstance = request.instance
    lines = [MAGIC,
             f"REQ {inst.representation} {len(inst.agents)} {request.objective} "
             f"{_f(request.budget_s)} {request.seed}"]
    env = inst.env
    if inst.representation == GRID:
        lines.append(f"GRID {env.width} {env.height} {_f(env.cell_side)} "
                     f"{env.connectivity} {_f(env.dt)} {_f(env.origin[0])} {_f(env.origin[1])}")
        flat = [env.occupancy[y][x] for y in range(env.height) for x in range(env.width)]
        lines.append("OCC " + _rle(flat))
        for agent, s, g in zip(inst.agents, inst.starts, inst.goals):
            lines.append(f"AGENT {agent.id} {s[0]} {s[1]} {g[0]} {g[1]}")
    elif inst.representation == ROAD:
        lines.append(f"ROADMAP {len(env.vertices)} {len(env.edges)} "
                     f"{_f(env.speed)} {_f(env.radius)}")
        for i, p in enumerate(env.vertices):
            lines.append(f"V {i} {_f(p.x)} {_f(p.y)}")
        for e in env.edges:
            lines.append(f"E {e.source} {e.target} {_f(e.length)} {_f(e.tau)}")
        for vv in env.virtual_vertices:
            lines.append(f"VV {vv.id} {_f(vv.point.x)} {_f(vv.point.y)} "
                         f"{vv.edge_a} {vv.edge_b} {_f(vv.offset_a)} {_f(vv.offset_b)}")
        for agent, s, g in zip(inst.agents, inst.starts, inst.goals):
            lines.append(f"AGENT {agent.id} {s} {g}")
    elif inst.representation == CONT:
        b = env.bounds
        lines.append(f"CONT {_f(b[0])} {_f(b[1])} {_f(b[2])} {_f(b[3])} "
                     f"{len(env.obstacles.polygons)}")
        for poly in env.obstacles.polygons:
            coords = " ".join(f"{_f(v.x)} {_f(v.y)}" for v in poly)
            lines.append(f"OBS {len(poly)} {coords}")
        for agent, s, g in zip(inst.agents, inst.starts, inst.goals):
            d = agent.dynamics
            dyn = f"{d.kind} {_f(d.speed)} {_f(d.v_min)} {_f(d.v_max)} {_f(d.a_min)} {_f(d.a_max)}"
            fp = " ".join(f"{_f(v.x)} {_f(v.y)}" for v in agent.footprint.vertices)
            lines.append(f"AGENT {agent.id} {agent.config_space} {dyn} "
                         f"{_f(s.x)} {_f(s.y)} {_f(s.theta)} "
                         f"{_f(g.x)} {_f(g.y)} {_f(g.theta)} {len(agent.footprint.vertices)} {fp}")
    lines.append("END")
    return "\n".join(lines) + "\n"


def serialize_outcome(outcome: PlanOutcome) -> str:
    lines = [f"PLAN {outcome.status}"]
    c = outcome.cost
    lines.append(f"COST {_f(c.soc_m if not math.isnan(c.soc_m) else 0)} "
                 f"{_f(c.makespan_s if not math.isnan(c.makespan_s) else 0)}")
    p = outcome.plans
    if isinstance(p, GridPlan):
        for aid, path in zip(p.agent_ids, p.paths):
            cells = " ".join(f"{c[0]} {c[1]}" for c in path)
            lines.append(f"A {aid} {len(path)} {cells}")
    elif isinstance(p, RoadmapPlan):
        for aid, vs in zip(p.agent_ids, p.visits):
            rec = " ".join(f"{v.vertex} {_f(v.arrive)} {_f(v.depart)} "
                           f"{_f(v.point.x)} {_f(v.point.y)}" for v in vs)
            lines.append(f"A {aid} {len(vs)} {rec}")
    elif isinstance(p, ContinuousPlan):
        for aid, tr in zip(p.agent_ids, p.trajectories):
            rec = []
            for i in range(len(tr.times)):
                th = tr.thetas[i] if tr.thetas else 0.0
                vx, vy = tr.vels[i] if tr.vels else (0.0, 0.0)
                rec.append(f"{_f(tr.times[i])} {_f(tr.points[i][0])} {_f(tr.points[i][1])} "
                           f"{_f(th)} {_f(vx)} {_f(vy)}")
            lines.append(f"A {aid} {len(tr.times)} " + " ".join(rec))
    lines.append("END")
    return "\n".join(lines) + "\n"


def parse_response(text: str, instance: AbstractInstance) -> PlanOutcome:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("PLAN "):
        raise WireError("response must start with PLAN <status>")
    status = lines[0].split()[1]
    if status not in ("solved", "timeout", "infeasible", "error"):
        raise WireError(f"unknown status {status!r}")
    if lines[-1] != "END":
        raise WireError("response must end with END")
    soc = makespan = float("nan")
    agent_lines = []
    for ln in lines[1:-1]:
        if ln.startswith("COST "):
            parts = ln.split()
            soc, makespan = float(parts[1]), float(parts[2])
        elif ln.startswith("A "):
            agent_lines.append(ln.split())
        else:
            raise WireError(f"unexpected line {ln!r}")
    outcome = PlanOutcome(status=status, cost=PlanCost(soc_m=soc, makespan_s=makespan))
    if status != "solved":
        return outcome
    rep = instance.representation
    ids, payloads = [], []
    try:
        for parts in agent_lines:
            aid, count = int(parts[1]), int(parts[2])
            vals = parts[3:]
            ids.append(aid)
            if rep == GRID:
                if len(vals) != 2 * count:
                    raise WireError("grid record length mismatch")
                payloads.append(tuple((int(vals[2 * i]), int(vals[2 * i + 1]))
                                      for i in range(count)))
            elif rep == ROAD:
                if len(vals) != 5 * count:
                    raise WireError("roadmap record length mismatch")
                payloads.append(tuple(
                    RoadmapVisit(vertex=int(vals[5 * i]), arrive=float(vals[5 * i + 1]),
                                 depart=float(vals[5 * i + 2]),
                                 point=Point2(float(vals[5 * i + 3]), float(vals[5 * i + 4])))
                    for i in range(count)))
            else:
                if len(vals) != 6 * count:
                    raise WireError("continuous record length mismatch")
                times, pts, thetas, vels = [], [], [], []
                for i in range(count):
                    times.append(float(vals[6 * i]))
                    pts.append(Point2(float(vals[6 * i + 1]), float(vals[6 * i + 2])))
                    thetas.append(float(vals[6 * i + 3]))
                    vels.append((float(vals[6 * i + 4]), float(vals[6 * i + 5])))
                payloads.append(Trajectory(times=tuple(times), points=tuple(pts),
                                           thetas=tuple(thetas), vels=tuple(vels)))
    except (ValueError, IndexError) as e:
        raise WireError(f"malformed agent record: {e}") from e
    expected_ids = [a.id for a in instance.agents]
    if ids != expected_ids:
        raise WireError(f"agent ids {ids} != instance ids {expected_ids}")
    env = instance.env
    if rep == GRID:
        outcome.plans = GridPlan(agent_ids=tuple(ids), paths=tuple(payloads),
                                 cell_side=env.cell_side, origin=env.origin, dt=env.dt)
    elif rep == ROAD:
        outcome.plans = RoadmapPlan(agent_ids=tuple(ids), visits=tuple(payloads),
                                    speed=env.speed)
    else:
        sp = 1.0 / 60.0
        if payloads and len(payloads[0].times) > 1:
            sp = payloads[0].times[1] - payloads[0].times[0]
        outcome.plans = ContinuousPlan(agent_ids=tuple(ids), trajectories=tuple(payloads),
                                       sample_period=sp)
    return outcome


def parse_request_header(text: str):
    """Parse (representation, n_agents, objective, budget, seed) from a request."""
    lines = text.strip().splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise WireError("bad magic")
    parts = lines[1].split()
    if parts[0] != "REQ":
        raise WireError("missing REQ header")
    return parts[1], int(parts[2]), parts[3], float(parts[4]), int(parts[5])


def parse_grid_request(text: str):
    """Decode a grid request into (header, env, starts, goals) for adapters."""
    header = parse_request_header(text)
    env = None
    starts, goals = [], []
    for ln in text.strip().splitlines():
        if ln.startswith("GRID "):
            p = ln.split()
            env = GridEnv(width=int(p[1]), height=int(p[2]), cell_side=float(p[3]),
                          connectivity=int(p[4]), dt=float(p[5]),
                          origin=(float(p[6]), float(p[7])), occupancy=())
        elif ln.startswith("OCC "):
            flat = _unrle(ln[4:])
            w, h = env.width, env.height
            occ = tuple(tuple(bool(flat[y * w + x]) for x in range(w)) for y in range(h))
            env = GridEnv(width=w, height=h, cell_side=env.cell_side,
                          connectivity=env.connectivity, dt=env.dt,
                          origin=env.origin, occupancy=occ)
        elif ln.startswith("AGENT "):
            p = ln.split()
            starts.append((int(p[2]), int(p[3])))
            goals.append((int(p[4]), int(p[5])))
    return header, env, tuple(starts), tuple(goals)
