/** Canvas layer rendering. All inputs are in meters; the transform maps to pixels. */

import { ScenarioDoc } from "./api.js";
import { ClearanceOverlay, OccupancyOverlay, RoadmapOverlay } from "./overlays.js";
import { ViewTransform } from "./transform.js";

export interface Layers {
  occupancy: boolean;
  roadmap: boolean;
  clearance: boolean;
  reservations: boolean;
}

export function drawScenario(ctx: CanvasRenderingContext2D, tf: ViewTransform,
                             doc: ScenarioDoc, selection: number | null = null): void {
  const [x0, y0] = tf.toScreen(doc.workspace.bounds_m[0], doc.workspace.bounds_m[3]);
  const [x1, y1] = tf.toScreen(doc.workspace.bounds_m[2], doc.workspace.bounds_m[1]);
  ctx.strokeStyle = "#555";
  ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
  doc.workspace.obstacles.forEach((poly, i) => {
    ctx.beginPath();
    poly.forEach(([x, y], k) => {
      const [px, py] = tf.toScreen(x, y);
      if (k === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.closePath();
    ctx.fillStyle = i === selection ? "#b5651d" : "#8d6e63";
    ctx.fill();
  });
}

export function drawAgents(ctx: CanvasRenderingContext2D, tf: ViewTransform,
                           doc: ScenarioDoc,
                           poses: number[][] | null = null): void {
  doc.agents.forEach((agent, i) => {
    const pose = poses ? poses[i] : agent.start;
    ctx.beginPath();
    agent.footprint.forEach(([fx, fy], k) => {
      const c = Math.cos(pose[2] ?? 0);
      const s = Math.sin(pose[2] ?? 0);
      const [px, py] = tf.toScreen(pose[0] + c * fx - s * fy, pose[1] + s * fx + c * fy);
      if (k === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.closePath();
    ctx.fillStyle = `hsl(${(i * 67) % 360}, 70%, 55%)`;
    ctx.fill();
    const [gx, gy] = tf.toScreen(agent.goal[0], agent.goal[1]);
    ctx.strokeStyle = ctx.fillStyle;
    ctx.beginPath();
    ctx.arc(gx, gy, 4, 0, 2 * Math.PI);
    ctx.stroke();
    const [sx, sy] = tf.toScreen(pose[0], pose[1]);
    ctx.fillStyle = "#000";
    ctx.font = "10px sans-serif";
    ctx.fillText(String(agent.id), sx + 5, sy - 5);
  });
}

export function drawOccupancy(ctx: CanvasRenderingContext2D, tf: ViewTransform,
                              overlay: OccupancyOverlay): void {
  const a = overlay.cell_side_m;
  ctx.fillStyle = "rgba(120, 120, 220, 0.25)";
  ctx.strokeStyle = "rgba(120, 120, 220, 0.25)";
  for (let cy = 0; cy < overlay.height; cy++) {
    for (let cx = 0; cx < overlay.width; cx++) {
      if (!overlay.cells[cy * overlay.width + cx]) continue;
      const [px, py] = tf.toScreen(overlay.origin[0] + cx * a,
                                   overlay.origin[1] + (cy + 1) * a);
      ctx.fillRect(px, py, tf.metersToPixels(a), tf.metersToPixels(a));
    }
  }
}

export function drawRoadmap(ctx: CanvasRenderingContext2D, tf: ViewTransform,
                            overlay: RoadmapOverlay): void {
  ctx.strokeStyle = "rgba(60, 140, 60, 0.5)";
  ctx.lineWidth = 1;
  for (const [u, v] of overlay.edges) {
    const [ax, ay] = tf.toScreen(overlay.vertices[u][0], overlay.vertices[u][1]);
    const [bx, by] = tf.toScreen(overlay.vertices[v][0], overlay.vertices[v][1]);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
  }
  ctx.fillStyle = "rgba(200, 60, 60, 0.9)";
  for (const [x, y] of overlay.virtual_vertices) {
    const [px, py] = tf.toScreen(x, y);
    ctx.fillRect(px - 2, py - 2, 4, 4);
  }
}

export function drawClearance(ctx: CanvasRenderingContext2D, tf: ViewTransform,
                              overlay: ClearanceOverlay, maxShown = 1.0): void {
  const dx = (overlay.bounds[2] - overlay.bounds[0]) / overlay.nx;
  const dy = (overlay.bounds[3] - overlay.bounds[1]) / overlay.ny;
  for (let j = 0; j < overlay.ny; j++) {
    for (let i = 0; i < overlay.nx; i++) {
      const d = Math.min(overlay.distance_m[j][i], maxShown) / maxShown;
      ctx.fillStyle = `rgba(${Math.round(255 * (1 - d))}, ${Math.round(200 * d)}, 80, 0.30)`;
      const [px, py] = tf.toScreen(overlay.bounds[0] + i * dx,
                                   overlay.bounds[1] + (j + 1) * dy);
      ctx.fillRect(px, py, tf.metersToPixels(dx) + 1, tf.metersToPixels(dy) + 1);
    }
  }
}

export function drawTimelines(ctx: CanvasRenderingContext2D,
                              timelines: { agent: number; samples: [number, number, number][] }[],
                              waits: Map<number, [number, number][]>,
                              width: number, height: number, makespan: number,
                              cursorT: number | null): void {
  ctx.clearRect(0, 0, width, height);
  const rowH = Math.min(18, height / Math.max(1, timelines.length));
  timelines.forEach((tl, row) => {
    const y = row * rowH + rowH / 2;
    ctx.strokeStyle = `hsl(${(row * 67) % 360}, 70%, 45%)`;
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(0, y);
    const end = tl.samples[tl.samples.length - 1][0];
    ctx.lineTo((end / makespan) * width, y);
    ctx.stroke();
    ctx.lineWidth = 7;
    for (const [t0, t1] of waits.get(tl.agent) ?? []) {
      ctx.beginPath();
      ctx.moveTo((t0 / makespan) * width, y);
      ctx.lineTo((t1 / makespan) * width, y);
      ctx.stroke();   // wait intervals drawn as flat thick segments
    }
    ctx.fillStyle = "#000";
    ctx.font = "9px sans-serif";
    ctx.fillText(`a${tl.agent}`, 2, y - 4);
  });
  if (cursorT !== null && makespan > 0) {
    ctx.strokeStyle = "#d32f2f";
    ctx.lineWidth = 1;
    const x = (cursorT / makespan) * width;
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, height);
    ctx.stroke();
  }
}
