/**
 * Editor state: a working copy of the scenario plus the staged edit log.
 * Edits validate locally (convexity, bounds, obstacle overlap for poses) and
 * commit atomically with the server revision token; a 409 reloads the server
 * document and replays the staged edits after user confirmation.
 */

import { ApiClient, ApiError, ScenarioDoc } from "./api.js";
import { Pt, inBounds, isStrictlyConvexCcw, pointInPolygon, regularPolygon } from "./geometry.js";

export type ToolMode = "select" | "draw-obstacle" | "place-agent" | "set-start" | "set-goal";

export type EditOp =
  | { kind: "add-obstacle"; points: Pt[] }
  | { kind: "remove-obstacle"; index: number }
  | { kind: "add-agent"; x: number; y: number; r: number }
  | { kind: "set-start"; agent: number; x: number; y: number }
  | { kind: "set-goal"; agent: number; x: number; y: number };

export class EditError extends Error {}

export function emptyScenario(name = "untitled", size = 5): ScenarioDoc {
  return {
    format_version: 1,
    name,
    seed: 0,
    workspace: { bounds_m: [0, 0, size, size], obstacles: [] },
    agents: [],
  };
}

export class EditorState {
  scenarioId: string | null = null;
  revision = 0;
  doc: ScenarioDoc;
  staged: EditOp[] = [];
  tool: ToolMode = "select";
  selection: { kind: "obstacle" | "agent"; index: number } | null = null;
  representation = "grid";
  plannerId = "grid_cbs";
  budgetS = 30;
  playbackTick = 0;

  constructor(doc?: ScenarioDoc) {
    this.doc = doc ?? emptyScenario();
  }

  get bounds(): number[] {
    return this.doc.workspace.bounds_m;
  }

  /** Apply an op to a document, validating locally. */
  static applyOp(doc: ScenarioDoc, op: EditOp): void {
    const bounds = doc.workspace.bounds_m;
    if (op.kind === "add-obstacle") {
      if (!isStrictlyConvexCcw(op.points)) {
        throw new EditError("obstacle must be strictly convex, counter-clockwise");
      }
      for (const p of op.points) {
        if (!inBounds(p, bounds)) throw new EditError("obstacle outside workspace");
      }
      doc.workspace.obstacles.push(op.points.map((p) => [p[0], p[1]]));
    } else if (op.kind === "remove-obstacle") {
      if (op.index < 0 || op.index >= doc.workspace.obstacles.length) {
        throw new EditError(`no obstacle ${op.index}`);
      }
      doc.workspace.obstacles.splice(op.index, 1);
    } else if (op.kind === "add-agent") {
      const id = doc.agents.length ? Math.max(...doc.agents.map((a) => a.id)) + 1 : 0;
      EditorState.checkPose(doc, [op.x, op.y], op.r);
      doc.agents.push({
        id,
        footprint: regularPolygon(op.r).map((p) => [p[0], p[1]]),
        config_space: "r2",
        dynamics: { kind: "double_integrator", v_min_mps: -0.5, v_max_mps: 0.5,
                    a_min_mps2: -2.0, a_max_mps2: 2.0 },
        start: [op.x, op.y, 0],
        goal: [op.x, op.y, 0],
      });
    } else if (op.kind === "set-start" || op.kind === "set-goal") {
      const agent = doc.agents.find((a) => a.id === op.agent);
      if (!agent) throw new EditError(`no agent ${op.agent}`);
      const r = Math.max(...agent.footprint.map((v) => Math.hypot(v[0], v[1])));
      EditorState.checkPose(doc, [op.x, op.y], r);
      const pose = [op.x, op.y, 0];
      if (op.kind === "set-start") agent.start = pose;
      else agent.goal = pose;
    }
  }

  /** Local feasibility: the disc surrogate stays in bounds and off obstacles. */
  static checkPose(doc: ScenarioDoc, p: Pt, r: number): void {
    if (!inBounds(p, doc.workspace.bounds_m, r)) {
      throw new EditError("pose too close to the workspace boundary");
    }
    for (const poly of doc.workspace.obstacles) {
      const pts = poly as unknown as Pt[];
      if (pointInPolygon(p, pts)) throw new EditError("pose inside an obstacle");
      for (let i = 0; i < pts.length; i++) {
        const a = pts[i];
        const b = pts[(i + 1) % pts.length];
        if (segPointDist(a, b, p) <= r) throw new EditError("pose overlaps an obstacle");
      }
    }
  }

  stage(op: EditOp): void {
    EditorState.applyOp(this.doc, op);   // throws EditError before staging
    this.staged.push(op);
  }

  /**
   * Commit staged edits in one transaction. On a revision conflict the
   * server document is reloaded, the staged ops are replayed onto it after
   * `confirmReplay` agrees, and the commit is retried once.
   */
  async commit(client: ApiClient,
               confirmReplay: () => Promise<boolean> | boolean = () => true):
      Promise<number> {
    if (this.doc.agents.length < 1) {
      throw new EditError("scenario needs at least one agent before committing");
    }
    if (this.scenarioId === null) {
      const res = await client.createScenario(this.doc);
      this.scenarioId = res.id;
      this.revision = res.revision;
      this.staged = [];
      return this.revision;
    }
    try {
      const res = await client.putScenario(this.scenarioId, this.revision, this.doc);
      this.revision = res.revision;
      this.staged = [];
      return this.revision;
    } catch (e) {
      if (!(e instanceof ApiError) || e.status !== 409) throw e;
      const ok = await confirmReplay();
      if (!ok) throw e;
      const fresh = await client.getScenario(this.scenarioId);
      const replayDoc = structuredClone(fresh.scenario);
      for (const op of this.staged) {
        EditorState.applyOp(replayDoc, op);
      }
      const res = await client.putScenario(this.scenarioId, fresh.revision, replayDoc);
      this.doc = replayDoc;
      this.revision = res.revision;
      this.staged = [];
      return this.revision;
    }
  }
}

function segPointDist(a: Pt, b: Pt, p: Pt): number {
  const abx = b[0] - a[0];
  const aby = b[1] - a[1];
  const denom = abx * abx + aby * aby;
  let t = denom > 0 ? ((p[0] - a[0]) * abx + (p[1] - a[1]) * aby) / denom : 0;
  t = Math.min(1, Math.max(0, t));
  return Math.hypot(p[0] - a[0] - t * abx, p[1] - a[1] - t * aby);
}
