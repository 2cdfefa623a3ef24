"""HTTP/WebSocket service exposing scenarios, abstraction, planning, playback.

Endpoint table (v1):
  POST /scenarios              create; 201 {id, revision}
  GET  /scenarios/{id}         fetch; body + revision stamp
  PUT  /scenarios/{id}         transactional edit; 409 on stale revision
  POST /scenarios/{id}/abstract?rep=grid|road|cont
  POST /plan                   enqueue planner job; 202 {job_id}
  GET  /jobs/{id}              job status/result
  GET  /traces/{id}            trace summary
  WS   /traces/{id}/stream     frame stream with pause/seek/stride
  GET  /overlays/{id}?kind=occupancy|roadmap|reservations|clearance
"""

from __future__ import annotations

import functools
import math
from typing import Optional

from fastapi import Body, FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect

from ..abstraction import grid_to_continuous, plan_to_trajectories
from ..geometry import point_region_distance
from ..planners import UnknownPlanner, available_planners
from ..scenario import InvariantViolation, ParseError
from ..validation import ValidationError
from .store import RevisionConflict, SessionStore, UnknownId

API_VERSION = 1


def create_app(store: Optional[SessionStore] = None,
               ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="mrplan service", version=str(API_VERSION))
    store = store or SessionStore()
    app.state.store = store
    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    def _http_errors(fn):
        @functools.wraps(fn)
        def wrapped(*a, **kw):
            try:
                return fn(*a, **kw)
            except UnknownId as e:
                raise HTTPException(404, f"unknown id: {e}") from e
            except RevisionConflict as e:
                raise HTTPException(409, str(e)) from e
            except (InvariantViolation, UnknownPlanner) as e:
                raise HTTPException(422, str(e)) from e
            except (ParseError, ValueError, ValidationError) as e:
                raise HTTPException(400, str(e)) from e
        return wrapped

    @app.get("/health")
    def health():
        return {"ok": True, "version": API_VERSION,
                "planners": sorted(available_planners().keys())}

    @app.post("/scenarios", status_code=201)
    @_http_errors
    def create_scenario(doc: dict = Body(...)):
        sid, revision = store.create_scenario(doc)
        return {"id": sid, "revision": revision}

    @app.get("/scenarios/{sid}")
    @_http_errors
    def get_scenario(sid: str):
        doc, revision = store.get_scenario(sid)
        return {"id": sid, "revision": revision, "scenario": doc}

    @app.put("/scenarios/{sid}")
    @_http_errors
    def put_scenario(sid: str, payload: dict = Body(...)):
        if "revision" not in payload or "scenario" not in payload:
            raise HTTPException(400, "payload needs revision and scenario")
        revision = store.update_scenario(sid, int(payload["revision"]), payload["scenario"])
        return {"id": sid, "revision": revision}

    @app.post("/scenarios/{sid}/abstract")
    @_http_errors
    def abstract_scenario(sid: str, rep: str = Query(...)):
        art, revision = store.abstract(sid, rep)
        summary = {"representation": rep, "revision": revision}
        if rep == "grid":
            env = art.env
            summary.update(width=env.width, height=env.height,
                           cell_side_m=env.cell_side,
                           occupied_cells=env.occupied_count())
        elif rep == "road":
            env = art.env
            summary.update(vertices=len(env.vertices), edges=len(env.edges),
                           virtual_vertices=len(env.virtual_vertices),
                           speed_mps=env.speed, radius_m=env.radius)
        else:
            summary.update(agents=len(art.agents))
        return summary

    @app.post("/plan", status_code=202)
    @_http_errors
    def submit_plan(payload: dict = Body(...)):
        try:
            sid = payload["scenario_id"]
            rep = payload["representation"]
            planner_id = payload["planner_id"]
        except KeyError as e:
            raise HTTPException(400, f"missing field {e}") from e
        job = store.submit_plan(
            sid, rep, planner_id,
            budget_s=float(payload.get("budget_s", 60.0)),
            seed=int(payload.get("seed", 0)),
            expected_revision=(int(payload["revision"]) if "revision" in payload else None))
        return {"job_id": job.id, "revision": job.revision}

    @app.get("/jobs/{jid}")
    @_http_errors
    def get_job(jid: str):
        job = store.get_job(jid)
        return {"job_id": job.id, "status": job.status, "result": job.result,
                "trace_id": job.trace_id, "error": job.error,
                "revision": job.revision}

    @app.get("/traces/{tid}")
    @_http_errors
    def get_trace(tid: str):
        rec = store.get_trace(tid)
        trace = rec["trace"]
        return {"trace_id": tid, "scenario_id": rec["scenario_id"],
                "revision": rec["revision"], "ticks": len(trace.snapshots),
                "tick_rate_hz": trace.tick_rate_hz, "n_agents": trace.n_agents,
                "metrics": rec["metrics"],
                "state_hash": f"{trace.state_hash():016x}"}

    @app.get("/overlays/{sid}")
    @_http_errors
    def get_overlay(sid: str, kind: str = Query(...), job: Optional[str] = None):
        scenario, revision = store.snapshot(sid)
        if kind == "occupancy":
            art, revision = store.abstract(sid, "grid")
            env = art.env
            runs = []
            count = 0
            current = None
            for y in range(env.height):
                for x in range(env.width):
                    v = 1 if env.occupancy[y][x] else 0
                    if v == current:
                        count += 1
                    else:
                        if current is not None:
                            runs.append([count, current])
                        current, count = v, 1
            runs.append([count, current])
            return {"kind": kind, "revision": revision, "width": env.width,
                    "height": env.height, "cell_side_m": env.cell_side,
                    "origin": list(env.origin), "runs": runs}
        if kind == "roadmap":
            art, revision = store.abstract(sid, "road")
            env = art.env
            return {"kind": kind, "revision": revision,
                    "vertices": [[p.x, p.y] for p in env.vertices],
                    "edges": [[e.source, e.target] for e in env.edges],
                    "virtual_vertices": [[vv.point.x, vv.point.y]
                                         for vv in env.virtual_vertices]}
        if kind == "clearance":
            bounds = scenario.workspace.bounds
            nx = ny = 48
            dx = (bounds[2] - bounds[0]) / nx
            dy = (bounds[3] - bounds[1]) / ny
            rows = []
            for j in range(ny):
                row = []
                for i in range(nx):
                    p = (bounds[0] + (i + 0.5) * dx, bounds[1] + (j + 0.5) * dy)
                    row.append(round(point_region_distance(p, scenario.workspace.obstacles), 4))
                rows.append(row)
            return {"kind": kind, "revision": revision, "bounds": list(bounds),
                    "nx": nx, "ny": ny, "distance_m": rows}
        if kind == "reservations":
            if not job:
                raise HTTPException(400, "reservations overlay needs ?job=<job_id>")
            j = store.get_job(job)
            if j.trace_id is None or j.status != "done":
                raise HTTPException(404, f"job {job} has no plan artifact")
            rec = store.get_trace(j.trace_id)
            if rec["revision"] != revision:
                raise HTTPException(409, "plan artifact is stale")
            plans = rec["plans"]
            trajs = plan_to_trajectories(plans)
            timeline = []
            for aid, tr in zip(plans.agent_ids, trajs):
                timeline.append({
                    "agent": aid,
                    "samples": [[t, p[0], p[1]] for t, p in zip(tr.times, tr.points)],
                })
            return {"kind": kind, "revision": revision, "timeline": timeline}
        raise HTTPException(400, f"unknown overlay kind {kind!r}")

    @app.websocket("/traces/{tid}/stream")
    async def stream_trace(ws: WebSocket, tid: str):
        await ws.accept()
        try:
            rec = store.get_trace(tid)
        except UnknownId:
            await ws.send_json({"type": "error", "error": f"unknown trace {tid}"})
            await ws.close()
            return
        trace = rec["trace"]
        snapshots = trace.snapshots
        contacts_by_tick = {}
        for c in trace.contacts:
            tick = int(round(c.time * trace.tick_rate_hz))
            contacts_by_tick.setdefault(tick, []).append(
                {"pair": list(c.pair), "time": c.time, "penetration": c.penetration})
        cursor = 0
        stride = 1
        playing = False

        async def send_summary():
            await ws.send_json({"type": "summary", "metrics": rec["metrics"],
                                "ticks": len(snapshots),
                                "state_hash": f"{trace.state_hash():016x}"})

        await ws.send_json({"type": "meta", "ticks": len(snapshots),
                            "tick_rate_hz": trace.tick_rate_hz,
                            "n_agents": trace.n_agents,
                            "revision": rec["revision"]})
        try:
            while True:
                if playing:
                    if cursor >= len(snapshots):
                        await send_summary()
                        playing = False
                        continue
                    tick, poses = snapshots[cursor]
                    await ws.send_json({
                        "type": "frame", "tick": tick,
                        "t": tick / trace.tick_rate_hz,
                        "poses": [[x, y, th] for (x, y, th) in poses],
                        "events": contacts_by_tick.get(tick, []),
                    })
                    cursor += stride
                    # poll for a command without blocking the stream
                    try:
                        import asyncio
                        msg = await asyncio.wait_for(ws.receive_json(), timeout=0.0005)
                    except Exception:
                        continue
                else:
                    msg = await ws.receive_json()
                cmd = msg.get("cmd")
                if cmd == "play":
                    stride = max(1, int(msg.get("stride", stride)))
                    cursor = int(msg.get("from", cursor))
                    if cursor >= len(snapshots):
                        await send_summary()
                    else:
                        playing = True
                elif cmd == "pause":
                    playing = False
                    await ws.send_json({"type": "paused", "tick": cursor})
                elif cmd == "seek":
                    cursor = max(0, int(msg.get("tick", 0)))
                    if cursor >= len(snapshots):
                        await send_summary()
                    else:
                        tick, poses = snapshots[cursor]
                        await ws.send_json({
                            "type": "frame", "tick": tick,
                            "t": tick / trace.tick_rate_hz,
                            "poses": [[x, y, th] for (x, y, th) in poses],
                            "events": contacts_by_tick.get(tick, []),
                        })
                elif cmd == "close":
                    await ws.close()
                    return
        except WebSocketDisconnect:
            return

    return app
