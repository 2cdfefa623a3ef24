/**
 * Typed client for the planning service endpoint table.
 * Every UI action goes through one of these calls; there is no hidden state.
 */

export interface PoseArr extends Array<number> {} // [x, y, theta]

export interface AgentDoc {
  id: number;
  footprint: number[][];
  config_space: string;
  dynamics: Record<string, unknown>;
  start: number[];
  goal: number[];
}

export interface ScenarioDoc {
  format_version: number;
  name: string;
  seed: number;
  workspace: { bounds_m: number[]; obstacles: number[][][] };
  agents: AgentDoc[];
}

export interface JobResult {
  status: string;
  planner: string;
  representation: string;
  planning_time_s: number;
  soc_m?: number;
  makespan_s?: number;
  validator_ok?: boolean;
  rtf?: number;
  trace_id?: string;
  detail?: string;
  revision: number;
}

export interface JobView {
  job_id: string;
  status: string;
  result: JobResult | null;
  trace_id: string | null;
  error: string;
  revision: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function jsonOrThrow(resp: Response): Promise<any> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      detail = body.detail ?? JSON.stringify(body);
    } catch {
      /* keep statusText */
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json();
}

export class ApiClient {
  constructor(public base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  async health(): Promise<{ ok: boolean; planners: string[] }> {
    return jsonOrThrow(await fetch(this.url("/health")));
  }

  async createScenario(doc: ScenarioDoc): Promise<{ id: string; revision: number }> {
    return jsonOrThrow(await fetch(this.url("/scenarios"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    }));
  }

  async getScenario(id: string): Promise<{ id: string; revision: number; scenario: ScenarioDoc }> {
    return jsonOrThrow(await fetch(this.url(`/scenarios/${id}`)));
  }

  async putScenario(id: string, revision: number, scenario: ScenarioDoc):
      Promise<{ id: string; revision: number }> {
    return jsonOrThrow(await fetch(this.url(`/scenarios/${id}`), {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ revision, scenario }),
    }));
  }

  async abstract(id: string, rep: string): Promise<Record<string, unknown>> {
    return jsonOrThrow(await fetch(this.url(`/scenarios/${id}/abstract?rep=${rep}`),
                                   { method: "POST" }));
  }

  async submitPlan(req: {
    scenario_id: string; representation: string; planner_id: string;
    budget_s?: number; seed?: number; revision?: number;
  }): Promise<{ job_id: string; revision: number }> {
    return jsonOrThrow(await fetch(this.url("/plan"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    }));
  }

  async getJob(id: string): Promise<JobView> {
    return jsonOrThrow(await fetch(this.url(`/jobs/${id}`)));
  }

  async waitJob(id: string, timeoutMs = 120_000, pollMs = 100): Promise<JobView> {
    const t0 = Date.now();
    for (;;) {
      const job = await this.getJob(id);
      if (job.status === "done" || job.status === "failed" || job.status === "stale") {
        return job;
      }
      if (Date.now() - t0 > timeoutMs) {
        throw new ApiError(408, `job ${id} still ${job.status} after ${timeoutMs} ms`);
      }
      await new Promise((r) => setTimeout(r, pollMs));
    }
  }

  async traceSummary(id: string): Promise<Record<string, any>> {
    return jsonOrThrow(await fetch(this.url(`/traces/${id}`)));
  }

  async overlay(id: string, kind: string, job?: string): Promise<Record<string, any>> {
    const q = job ? `?kind=${kind}&job=${job}` : `?kind=${kind}`;
    return jsonOrThrow(await fetch(this.url(`/overlays/${id}${q}`)));
  }

  streamUrl(traceId: string): string {
    const base = this.base || (typeof location !== "undefined" ? location.origin : "");
    return base.replace(/^http/, "ws") + `/traces/${traceId}/stream`;
  }
}
