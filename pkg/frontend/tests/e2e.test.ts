/**
 * End-to-end UI loop against a live server spawned by the test:
 * create scenario -> draw obstacle -> place 2 agents -> plan on grid and
 * roadmap -> stream playback -> edit the obstacle -> artifacts invalidated,
 * replan -> 409 revision flow exercised once.
 *
 * Run with `npm run test:e2e` (spawns `uvicorn` via python3; requires the
 * python package installed).
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, ChildProcess } from "node:child_process";
import WebSocket from "ws";
import { ApiClient, ApiError } from "../src/api.js";
import { EditorState } from "../src/state.js";
import { Frame, PlaybackClient } from "../src/stream.js";

const PORT = 8765 + Math.floor(Math.random() * 200);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;

async function waitHealthy(timeoutMs = 30_000): Promise<void> {
  const t0 = Date.now();
  for (;;) {
    try {
      const r = await fetch(`${BASE}/health`);
      if (r.ok) return;
    } catch {
      /* not up yet */
    }
    if (Date.now() - t0 > timeoutMs) throw new Error("server did not come up");
    await new Promise((r) => setTimeout(r, 200));
  }
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "uvicorn", "mrplan.server.app:create_app",
                             "--factory", "--port", String(PORT)],
                 { stdio: ["ignore", "pipe", "pipe"] });
  server.on("error", (e) => { throw e; });
  await waitHealthy();
}, 60_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("browser-client loop against the live service", () => {
  it("edit -> plan -> playback -> edit -> invalidate -> replan", async () => {
    const api = new ApiClient(BASE);

    // build the scenario through the editor
    const editor = new EditorState();
    editor.stage({ kind: "add-obstacle", points: [[2.2, 2.2], [2.8, 2.2], [2.8, 2.8], [2.2, 2.8]] });
    editor.stage({ kind: "add-agent", x: 0.7, y: 0.7, r: 0.08 });
    editor.stage({ kind: "set-goal", agent: 0, x: 4.3, y: 4.3 });
    editor.stage({ kind: "add-agent", x: 4.3, y: 0.7, r: 0.08 });
    editor.stage({ kind: "set-goal", agent: 1, x: 0.7, y: 4.3 });
    const rev1 = await editor.commit(api);
    expect(rev1).toBe(1);
    const sid = editor.scenarioId!;

    // plan on the grid representation
    const gridJob = await api.submitPlan({
      scenario_id: sid, representation: "grid", planner_id: "grid_cbs",
      budget_s: 60, revision: editor.revision,
    });
    const gridDone = await api.waitJob(gridJob.job_id, 120_000);
    expect(gridDone.status).toBe("done");
    expect(gridDone.result!.status).toBe("solved");
    expect(gridDone.result!.validator_ok).toBe(true);
    const traceId = gridDone.result!.trace_id!;

    // plan on the roadmap representation
    const roadJob = await api.submitPlan({
      scenario_id: sid, representation: "road", planner_id: "roadmap_sipp",
      budget_s: 60, revision: editor.revision,
    });
    const roadDone = await api.waitJob(roadJob.job_id, 120_000);
    expect(roadDone.status).toBe("done");
    expect(roadDone.result!.status).toBe("solved");

    // overlays for the current revision
    const occ = await api.overlay(sid, "occupancy");
    expect(occ.revision).toBe(editor.revision);
    const road = await api.overlay(sid, "roadmap");
    expect(road.vertices.length).toBeGreaterThan(2);

    // watch playback via the stream
    const frames: Frame[] = [];
    let summary: any = null;
    const player = new PlaybackClient(
      (url) => new WebSocket(url) as any,
      {
        onFrame: (f) => frames.push(f),
        onSummary: (s) => { summary = s; },
      });
    await player.connect(api.streamUrl(traceId));
    player.play(10);
    const t0 = Date.now();
    while (summary === null && Date.now() - t0 < 30_000) {
      await new Promise((r) => setTimeout(r, 50));
    }
    player.close();
    expect(summary).not.toBeNull();
    expect(frames.length).toBeGreaterThan(3);
    expect(summary.metrics.contacts).toBe(0);

    // a concurrent editor commits first: our token goes stale (409 flow)
    const other = new EditorState(structuredClone(editor.doc));
    other.scenarioId = sid;
    other.revision = editor.revision;
    other.stage({ kind: "set-goal", agent: 1, x: 0.8, y: 3.9 });
    await other.commit(api);

    // our edit of the obstacle now conflicts and is replayed after confirm
    editor.stage({ kind: "remove-obstacle", index: 0 });
    editor.stage({ kind: "add-obstacle", points: [[1.6, 1.6], [2.4, 1.6], [2.4, 2.4], [1.6, 2.4]] });
    let confirmed = false;
    const rev3 = await editor.commit(api, () => { confirmed = true; return true; });
    expect(confirmed).toBe(true);
    expect(rev3).toBe(3);

    // derived artifacts of the old revision are invalidated
    await expect(api.traceSummary(traceId)).rejects.toThrowError(ApiError);
    const staleJob = await api.getJob(gridJob.job_id);
    expect(staleJob.status).toBe("stale");

    // replan against the new revision succeeds
    const again = await api.submitPlan({
      scenario_id: sid, representation: "grid", planner_id: "grid_cbs",
      budget_s: 60, revision: rev3,
    });
    const againDone = await api.waitJob(again.job_id, 120_000);
    expect(againDone.status).toBe("done");
    expect(againDone.result!.status).toBe("solved");
    expect(againDone.result!.revision).toBe(rev3);
  }, 240_000);
});
