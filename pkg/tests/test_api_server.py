import math
import time

import pytest
from fastapi.testclient import TestClient

from helpers import cell_scenario, open_fleet
from mrplan.scenario import scenario_to_dict
from mrplan.server import SessionStore, create_app


@pytest.fixture
def client():
    app = create_app(SessionStore(workers=2))
    with TestClient(app) as c:
        yield c


def scenario_doc(n=2):
    cells = [((0, 0), (4, 4)), ((4, 0), (0, 4)), ((0, 4), (4, 0))][:n]
    return scenario_to_dict(cell_scenario(5, 5, [(2, 2)], cells))


def wait_job(client, job_id, timeout=60.0):
    t0 = time.time()
    while time.time() - t0 < timeout:
        r = client.get(f"/jobs/{job_id}")
        assert r.status_code == 200
        body = r.json()
        if body["status"] in ("done", "failed", "stale"):
            return body
        time.sleep(0.02)
    raise TimeoutError(f"job {job_id} did not finish")


class TestScenarioCrud:
    def test_create_and_get(self, client):
        r = client.post("/scenarios", json=scenario_doc())
        assert r.status_code == 201
        sid = r.json()["id"]
        assert r.json()["revision"] == 1
        g = client.get(f"/scenarios/{sid}")
        assert g.status_code == 200
        assert g.json()["revision"] == 1
        assert len(g.json()["scenario"]["agents"]) == 2

    def test_unknown_id_404(self, client):
        assert client.get("/scenarios/nope").status_code == 404

    def test_invariant_violation_422(self, client):
        doc = scenario_doc()
        doc["agents"][1]["start"] = doc["agents"][0]["start"]
        assert client.post("/scenarios", json=doc).status_code == 422

    def test_malformed_400(self, client):
        assert client.post("/scenarios", json={"format_version": 1}).status_code == 400

    def test_stale_edit_409(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        doc = client.get(f"/scenarios/{sid}").json()["scenario"]
        ok = client.put(f"/scenarios/{sid}", json={"revision": 1, "scenario": doc})
        assert ok.status_code == 200
        assert ok.json()["revision"] == 2
        stale = client.put(f"/scenarios/{sid}", json={"revision": 1, "scenario": doc})
        assert stale.status_code == 409

    def test_idempotent_reads(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        a = client.get(f"/scenarios/{sid}").content
        b = client.get(f"/scenarios/{sid}").content
        assert a == b


class TestAbstractAndOverlays:
    def test_grid_abstract_summary(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        r = client.post(f"/scenarios/{sid}/abstract", params={"rep": "grid"})
        assert r.status_code == 200
        body = r.json()
        assert body["width"] > 0 and body["occupied_cells"] >= 1

    def test_occupancy_overlay_runs(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        r = client.get(f"/overlays/{sid}", params={"kind": "occupancy"})
        assert r.status_code == 200
        body = r.json()
        total = sum(c for c, _ in body["runs"])
        assert total == body["width"] * body["height"]

    def test_clearance_overlay(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        r = client.get(f"/overlays/{sid}", params={"kind": "clearance"})
        assert r.status_code == 200
        rows = r.json()["distance_m"]
        assert min(min(row) for row in rows) == 0.0  # inside the obstacle

    def test_unknown_overlay_kind(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        assert client.get(f"/overlays/{sid}", params={"kind": "wat"}).status_code == 400


class TestPlanningPipeline:
    def test_full_pipeline_headless(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        r = client.post("/plan", json={"scenario_id": sid, "representation": "grid",
                                       "planner_id": "grid_cbs", "budget_s": 30})
        assert r.status_code == 202
        job = wait_job(client, r.json()["job_id"])
        assert job["status"] == "done"
        res = job["result"]
        assert res["status"] == "solved"
        assert res["validator_ok"] is True
        assert res["soc_m"] > 0 and res["rtf"] > 0
        tid = res["trace_id"]
        tr = client.get(f"/traces/{tid}")
        assert tr.status_code == 200
        assert tr.json()["metrics"]["contacts"] == 0

    def test_unknown_planner_422(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        r = client.post("/plan", json={"scenario_id": sid, "representation": "grid",
                                       "planner_id": "not_a_planner"})
        assert r.status_code == 422

    def test_edit_invalidates_derived_artifacts(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        r = client.post("/plan", json={"scenario_id": sid, "representation": "grid",
                                       "planner_id": "grid_prioritized", "budget_s": 30})
        job = wait_job(client, r.json()["job_id"])
        tid = job["result"]["trace_id"]
        assert client.get(f"/traces/{tid}").status_code == 200
        doc = client.get(f"/scenarios/{sid}").json()["scenario"]
        assert client.put(f"/scenarios/{sid}",
                          json={"revision": 1, "scenario": doc}).status_code == 200
        # stale revision: the trace and the job result are gone
        assert client.get(f"/traces/{tid}").status_code == 404
        j = client.get(f"/jobs/{r.json()['job_id']}").json()
        assert j["status"] == "stale"

    def test_plan_with_stale_revision_409(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        doc = client.get(f"/scenarios/{sid}").json()["scenario"]
        client.put(f"/scenarios/{sid}", json={"revision": 1, "scenario": doc})
        r = client.post("/plan", json={"scenario_id": sid, "representation": "grid",
                                       "planner_id": "grid_cbs", "revision": 1})
        assert r.status_code == 409

    def test_reservations_overlay_from_job(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        r = client.post("/plan", json={"scenario_id": sid, "representation": "grid",
                                       "planner_id": "grid_cbs", "budget_s": 30})
        jid = r.json()["job_id"]
        wait_job(client, jid)
        ov = client.get(f"/overlays/{sid}", params={"kind": "reservations", "job": jid})
        assert ov.status_code == 200
        assert len(ov.json()["timeline"]) == 2


class TestStream:
    def _solved_trace(self, client):
        sid = client.post("/scenarios", json=scenario_doc()).json()["id"]
        r = client.post("/plan", json={"scenario_id": sid, "representation": "grid",
                                       "planner_id": "grid_cbs", "budget_s": 30})
        job = wait_job(client, r.json()["job_id"])
        return job["result"]["trace_id"]

    def test_stream_full_then_summary(self, client):
        tid = self._solved_trace(client)
        meta_ticks = client.get(f"/traces/{tid}").json()["ticks"]
        with client.websocket_connect(f"/traces/{tid}/stream") as ws:
            meta = ws.receive_json()
            assert meta["type"] == "meta"
            ws.send_json({"cmd": "play", "stride": 1, "from": 0})
            frames = 0
            while True:
                msg = ws.receive_json()
                if msg["type"] == "summary":
                    break
                assert msg["type"] == "frame"
                frames += 1
            assert frames == meta_ticks
            ws.send_json({"cmd": "close"})

    def test_stream_stride(self, client):
        tid = self._solved_trace(client)
        meta_ticks = client.get(f"/traces/{tid}").json()["ticks"]
        with client.websocket_connect(f"/traces/{tid}/stream") as ws:
            ws.receive_json()
            ws.send_json({"cmd": "play", "stride": 10, "from": 0})
            frames = 0
            while True:
                msg = ws.receive_json()
                if msg["type"] == "summary":
                    break
                if msg["type"] == "frame":
                    frames += 1
            assert frames == math.ceil(meta_ticks / 10)
            ws.send_json({"cmd": "close"})

    def test_seek_past_end_gives_summary(self, client):
        tid = self._solved_trace(client)
        with client.websocket_connect(f"/traces/{tid}/stream") as ws:
            ws.receive_json()
            ws.send_json({"cmd": "seek", "tick": 10_000_000})
            msg = ws.receive_json()
            assert msg["type"] == "summary"
            ws.send_json({"cmd": "close"})

    def test_unknown_trace(self, client):
        with client.websocket_connect("/traces/nope/stream") as ws:
            msg = ws.receive_json()
            assert msg["type"] == "error"
