/** Overlay payload decoding (representation-native wire shapes). */

export interface OccupancyOverlay {
  width: number;
  height: number;
  cell_side_m: number;
  origin: number[];
  cells: Uint8Array;           // row-major
  revision: number;
}

export function decodeOccupancy(payload: {
  width: number; height: number; cell_side_m: number; origin: number[];
  runs: [number, number][]; revision: number;
}): OccupancyOverlay {
  const total = payload.width * payload.height;
  const cells = new Uint8Array(total);
  let idx = 0;
  for (const [count, value] of payload.runs) {
    cells.fill(value, idx, idx + count);
    idx += count;
  }
  if (idx !== total) {
    throw new Error(`occupancy runs cover ${idx} cells, expected ${total}`);
  }
  return { ...payload, cells };
}

export interface RoadmapOverlay {
  vertices: number[][];
  edges: number[][];
  virtual_vertices: number[][];
  revision: number;
}

export interface ReservationTimeline {
  agent: number;
  samples: [number, number, number][];   // (t, x, y)
}

export function waitIntervals(samples: [number, number, number][],
                              eps = 1e-9): [number, number][] {
  // flat segments of the timeline are waits; used for per-agent timelines
  const out: [number, number][] = [];
  for (let i = 1; i < samples.length; i++) {
    const [t0, x0, y0] = samples[i - 1];
    const [t1, x1, y1] = samples[i];
    if (Math.hypot(x1 - x0, y1 - y0) <= eps && t1 > t0) {
      if (out.length && Math.abs(out[out.length - 1][1] - t0) <= eps) {
        out[out.length - 1][1] = t1;
      } else {
        out.push([t0, t1]);
      }
    }
  }
  return out;
}

export interface ClearanceOverlay {
  nx: number;
  ny: number;
  bounds: number[];
  distance_m: number[][];
  revision: number;
}

export function clearanceRange(overlay: ClearanceOverlay): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of overlay.distance_m) {
    for (const v of row) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  return [lo, hi];
}
