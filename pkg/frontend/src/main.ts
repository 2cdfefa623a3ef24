/**
 * Application wiring: edit -> commit -> plan -> inspect -> edit loop.
 * Canvas on the left, planner/result panels on the right, timeline below.
 */

import { ApiClient, ApiError, JobView } from "./api.js";
import { clearanceRange, decodeOccupancy, waitIntervals } from "./overlays.js";
import {
  drawAgents,
  drawClearance,
  drawOccupancy,
  drawRoadmap,
  drawScenario,
  drawTimelines,
  Layers,
} from "./render.js";
import { EditError, EditorState } from "./state.js";
import { Frame, PlaybackClient } from "./stream.js";
import { ViewTransform } from "./transform.js";
import { Pt, convexHull } from "./geometry.js";

const api = new ApiClient("");
const state = new EditorState();
const layers: Layers = { occupancy: false, roadmap: false, clearance: false,
                         reservations: false };

const canvas = document.getElementById("world") as HTMLCanvasElement;
const timelineCanvas = document.getElementById("timeline") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const tctx = timelineCanvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const resultsEl = document.getElementById("results")!;

let tf = new ViewTransform(state.bounds, canvas.width, canvas.height);
let draftPolygon: Pt[] = [];
let livePoses: number[][] | null = null;
let cursorT: number | null = null;
let overlayCache: { occupancy?: any; roadmap?: any; clearance?: any;
                    reservations?: any; revision?: number } = {};
let runs: { label: string; job: JobView }[] = [];
let stream: PlaybackClient | null = null;

function say(text: string, isError = false): void {
  statusEl.textContent = text;
  statusEl.className = isError ? "error" : "";
}

function redraw(): void {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  tf = new ViewTransform(state.bounds, canvas.width, canvas.height);
  if (layers.clearance && overlayCache.clearance) drawClearance(ctx, tf, overlayCache.clearance);
  if (layers.occupancy && overlayCache.occupancy) drawOccupancy(ctx, tf, overlayCache.occupancy);
  if (layers.roadmap && overlayCache.roadmap) drawRoadmap(ctx, tf, overlayCache.roadmap);
  drawScenario(ctx, tf, state.doc,
               state.selection?.kind === "obstacle" ? state.selection.index : null);
  drawAgents(ctx, tf, state.doc, livePoses);
  if (draftPolygon.length) {
    ctx.strokeStyle = "#d81b60";
    ctx.beginPath();
    draftPolygon.forEach((p, i) => {
      const [px, py] = tf.toScreen(p[0], p[1]);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
  if (overlayCache.reservations && layers.reservations) {
    const tl = overlayCache.reservations.timeline;
    const makespan = Math.max(...tl.map((t: any) => t.samples[t.samples.length - 1][0]), 0.001);
    const waits = new Map(tl.map((t: any) => [t.agent, waitIntervals(t.samples)]));
    drawTimelines(tctx, tl, waits as any, timelineCanvas.width, timelineCanvas.height,
                  makespan, cursorT);
  } else {
    tctx.clearRect(0, 0, timelineCanvas.width, timelineCanvas.height);
  }
}

async function refreshOverlays(): Promise<void> {
  if (!state.scenarioId) return;
  overlayCache = { revision: state.revision };
  try {
    if (layers.occupancy) {
      const raw = await api.overlay(state.scenarioId, "occupancy");
      if (raw.revision === state.revision) overlayCache.occupancy = decodeOccupancy(raw as any);
    }
    if (layers.roadmap) {
      const raw = await api.overlay(state.scenarioId, "roadmap");
      if (raw.revision === state.revision) overlayCache.roadmap = raw;
    }
    if (layers.clearance) {
      const raw = await api.overlay(state.scenarioId, "clearance");
      if (raw.revision === state.revision) overlayCache.clearance = raw;
    }
  } catch (e) {
    say(`overlay: ${(e as Error).message}`, true);
  }
  redraw();
}

function renderResults(): void {
  const rows = runs.map(({ label, job }) => {
    const r = job.result;
    if (!r) return `<tr><td>${label}</td><td colspan="5">${job.status} ${job.error}</td></tr>`;
    const soc = r.soc_m !== undefined ? r.soc_m.toFixed(3) : "-";
    const mk = r.makespan_s !== undefined ? r.makespan_s.toFixed(2) : "-";
    return `<tr><td>${label}</td><td>${r.status}</td><td>${soc}</td><td>${mk}</td>` +
      `<td>${r.planning_time_s.toFixed(3)}</td>` +
      `<td>${r.trace_id ? `<button data-trace="${r.trace_id}">play</button>` : "-"}</td></tr>`;
  });
  resultsEl.innerHTML =
    `<tr><th>run</th><th>status</th><th>SoC [m]</th><th>makespan [s]</th>` +
    `<th>plan [s]</th><th>playback</th></tr>` + rows.join("");
  resultsEl.querySelectorAll("button[data-trace]").forEach((btn) => {
    btn.addEventListener("click", () => playTrace((btn as HTMLElement).dataset.trace!));
  });
}

async function playTrace(traceId: string): Promise<void> {
  stream?.close();
  const makespanGuess = { value: 1 };
  stream = new PlaybackClient((url) => new WebSocket(url) as any, {
    onMeta: (m) => say(`streaming ${m.ticks} ticks @ ${m.tick_rate_hz} Hz`),
    onFrame: (f: Frame) => {
      livePoses = f.poses;
      cursorT = f.t;
      makespanGuess.value = Math.max(makespanGuess.value, f.t);
      state.playbackTick = f.tick;
      redraw();
    },
    onSummary: (s) => {
      say(`playback done: SoC ${s.metrics.soc_m?.toFixed(3)} m, ` +
          `RTF ${s.metrics.rtf?.toFixed(1)}, contacts ${s.metrics.contacts}`);
      livePoses = null;
      cursorT = null;
      redraw();
    },
    onError: (m) => say(`stream: ${m}`, true),
  });
  await stream.connect(api.streamUrl(traceId));
  const stride = Number((document.getElementById("stride") as HTMLInputElement).value) || 1;
  stream.play(stride);
}

async function commit(): Promise<void> {
  try {
    const rev = await state.commit(api, () =>
      confirm("The scenario changed on the server. Replay your staged edits on top?"));
    say(`committed revision ${rev}`);
    runs = [];            // plans from older revisions are stale by contract
    renderResults();
    await refreshOverlays();
  } catch (e) {
    if (e instanceof EditError || e instanceof ApiError) say(e.message, true);
    else throw e;
  }
}

async function planNow(): Promise<void> {
  if (!state.scenarioId) {
    say("commit the scenario first", true);
    return;
  }
  const rep = (document.getElementById("rep") as HTMLSelectElement).value;
  const planner = (document.getElementById("planner") as HTMLSelectElement).value;
  const budget = Number((document.getElementById("budget") as HTMLInputElement).value) || 30;
  say(`planning ${planner} on ${rep}...`);
  try {
    const { job_id } = await api.submitPlan({
      scenario_id: state.scenarioId, representation: rep, planner_id: planner,
      budget_s: budget, revision: state.revision,
    });
    const job = await api.waitJob(job_id, budget * 1000 + 60_000);
    runs.push({ label: `${planner}/${rep} r${job.revision}`, job });
    renderResults();
    say(`job ${job_id}: ${job.status}`);
    if (layers.reservations && job.result?.trace_id && state.scenarioId) {
      overlayCache.reservations = await api.overlay(state.scenarioId, "reservations", job_id);
      redraw();
    }
  } catch (e) {
    say((e as Error).message, true);
  }
}

function onCanvasClick(ev: MouseEvent): void {
  const rect = canvas.getBoundingClientRect();
  const [wx, wy] = tf.toWorld(ev.clientX - rect.left, ev.clientY - rect.top);
  try {
    if (state.tool === "draw-obstacle") {
      draftPolygon.push([wx, wy]);
    } else if (state.tool === "place-agent") {
      state.stage({ kind: "add-agent", x: wx, y: wy, r: 0.08 });
      say(`agent placed at (${wx.toFixed(2)}, ${wy.toFixed(2)}) m; set its goal`);
    } else if (state.tool === "set-start" || state.tool === "set-goal") {
      const sel = state.selection?.kind === "agent" ? state.selection.index
        : state.doc.agents.length - 1;
      if (sel < 0) throw new EditError("place an agent first");
      state.stage({ kind: state.tool === "set-start" ? "set-start" : "set-goal",
                    agent: state.doc.agents[sel].id, x: wx, y: wy });
    } else {
      // select nearest agent within 0.2 m
      let best = -1;
      let bestD = 0.2;
      state.doc.agents.forEach((a, i) => {
        const d = Math.hypot(a.start[0] - wx, a.start[1] - wy);
        if (d < bestD) { best = i; bestD = d; }
      });
      state.selection = best >= 0 ? { kind: "agent", index: best } : null;
    }
  } catch (e) {
    if (e instanceof EditError) say(e.message, true);
    else throw e;
  }
  redraw();
}

function finishObstacle(): void {
  if (draftPolygon.length >= 3) {
    try {
      state.stage({ kind: "add-obstacle", points: convexHull(draftPolygon) });
      say("obstacle staged (convex hull of the drawn points)");
    } catch (e) {
      say((e as Error).message, true);
    }
  }
  draftPolygon = [];
  redraw();
}

async function init(): Promise<void> {
  const health = await api.health();
  const plannerSel = document.getElementById("planner") as HTMLSelectElement;
  plannerSel.innerHTML = health.planners
    .map((p) => `<option value="${p}">${p}</option>`).join("");
  (document.getElementById("rep") as HTMLSelectElement).addEventListener("change", (ev) => {
    const rep = (ev.target as HTMLSelectElement).value;
    // occupancy layer only makes sense for grid, roadmap layer for road
    layers.occupancy = rep === "grid" && layers.occupancy;
    layers.roadmap = rep === "road" && layers.roadmap;
    refreshOverlays();
  });
  for (const tool of ["select", "draw-obstacle", "place-agent", "set-start", "set-goal"]) {
    document.getElementById(`tool-${tool}`)!.addEventListener("click", () => {
      state.tool = tool as any;
      if (tool !== "draw-obstacle") finishObstacle();
      say(`tool: ${tool}`);
    });
  }
  for (const layer of ["occupancy", "roadmap", "clearance", "reservations"] as const) {
    document.getElementById(`layer-${layer}`)!.addEventListener("change", (ev) => {
      layers[layer] = (ev.target as HTMLInputElement).checked;
      refreshOverlays();
    });
  }
  canvas.addEventListener("click", onCanvasClick);
  canvas.addEventListener("dblclick", finishObstacle);
  document.getElementById("commit")!.addEventListener("click", commit);
  document.getElementById("plan")!.addEventListener("click", planNow);
  document.getElementById("pause")!.addEventListener("click", () => stream?.pause());
  document.getElementById("resume")!.addEventListener("click", () => stream?.play(
    Number((document.getElementById("stride") as HTMLInputElement).value) || 1,
    state.playbackTick));
  say("ready: draw obstacles, place agents, commit, then plan");
  redraw();
}

init().catch((e) => say(`init failed: ${e.message}`, true));
