/** Local geometric validation mirroring the server's scenario invariants. */

export type Pt = [number, number];

export function isStrictlyConvexCcw(points: Pt[]): boolean {
  if (points.length < 3) return false;
  const n = points.length;
  for (let i = 0; i < n; i++) {
    const o = points[i];
    const a = points[(i + 1) % n];
    const b = points[(i + 2) % n];
    const cross = (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    if (cross <= 1e-12) return false;
  }
  return true;
}

/** Convex hull (Andrew monotone chain), CCW without the closing point. */
export function convexHull(points: Pt[]): Pt[] {
  const pts = [...points].sort((p, q) => (p[0] - q[0]) || (p[1] - q[1]));
  if (pts.length < 3) return pts;
  const cross = (o: Pt, a: Pt, b: Pt) =>
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  const lower: Pt[] = [];
  for (const p of pts) {
    while (lower.length >= 2 && cross(lower[lower.length - 2], lower[lower.length - 1], p) <= 0) {
      lower.pop();
    }
    lower.push(p);
  }
  const upper: Pt[] = [];
  for (let i = pts.length - 1; i >= 0; i--) {
    const p = pts[i];
    while (upper.length >= 2 && cross(upper[upper.length - 2], upper[upper.length - 1], p) <= 0) {
      upper.pop();
    }
    upper.push(p);
  }
  lower.pop();
  upper.pop();
  return lower.concat(upper);
}

export function pointInPolygon(p: Pt, poly: Pt[]): boolean {
  let inside = false;
  const [px, py] = p;
  for (let i = 0, j = poly.length - 1; i < poly.length; j = i++) {
    const [xi, yi] = poly[i];
    const [xj, yj] = poly[j];
    if ((yi > py) !== (yj > py) && px < ((xj - xi) * (py - yi)) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}

export function inBounds(p: Pt, bounds: number[], margin = 0): boolean {
  return p[0] >= bounds[0] + margin && p[0] <= bounds[2] - margin
    && p[1] >= bounds[1] + margin && p[1] <= bounds[3] - margin;
}

export function regularPolygon(r: number, n = 16, phase = Math.PI / 16): Pt[] {
  const out: Pt[] = [];
  for (let i = 0; i < n; i++) {
    const a = phase + (2 * Math.PI * i) / n;
    out.push([r * Math.cos(a), r * Math.sin(a)]);
  }
  return out;
}
