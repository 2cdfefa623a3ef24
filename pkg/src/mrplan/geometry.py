"""2D computational geometry substrate: enclosing circles, offsets, distances.

All coordinates are meters. Polygon vertices are counter-clockwise. Collision
semantics are closed-set: boundary contact counts as a collision, so clearance
predicates use strict inequalities.
"""

from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import shapely.geometry
import shapely.ops

EPS_GEO = 1e-9


class GeometryError(ValueError):
    pass


class EmptySetError(GeometryError):
    """Raised when an operation needs at least one point."""


class CollinearOverlap(GeometryError):
    """Two segments overlap along a shared line (no unique intersection)."""


class InvalidRadius(GeometryError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


class Disc(NamedTuple):
    center: Point2
    radius: float


class Pose(NamedTuple):
    x: float
    y: float
    theta: float = 0.0

    @property
    def position(self) -> Point2:
        return Point2(self.x, self.y)


def _finite(*vals: float) -> bool:
    return all(math.isfinite(v) for v in vals)


def check_point(p: Sequence[float]) -> Point2:
    if not _finite(p[0], p[1]):
        raise GeometryError(f"non-finite coordinate: {p}")
    return Point2(float(p[0]), float(p[1]))


# ---------------------------------------------------------------------------
# Vector helpers (operate on plain (x, y) pairs; Point2 is a tuple)
# ---------------------------------------------------------------------------

def cross(ox: float, oy: float, ax: float, ay: float, bx: float, by: float) -> float:
    """z of (a-o) x (b-o)."""
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def dist(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def seg_point_distance(a: Sequence[float], b: Sequence[float], p: Sequence[float]) -> float:
    """Distance from point p to segment [a, b]."""
    abx, aby = b[0] - a[0], b[1] - a[1]
    apx, apy = p[0] - a[0], p[1] - a[1]
    denom = abx * abx + aby * aby
    if denom <= 0.0:
        return math.hypot(apx, apy)
    t = (apx * abx + apy * aby) / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(apx - t * abx, apy - t * aby)


def segments_intersect(a0, a1, b0, b1) -> bool:
    """Closed-set segment intersection test (touching counts)."""
    d1 = cross(b0[0], b0[1], b1[0], b1[1], a0[0], a0[1])
    d2 = cross(b0[0], b0[1], b1[0], b1[1], a1[0], a1[1])
    d3 = cross(a0[0], a0[1], a1[0], a1[1], b0[0], b0[1])
    d4 = cross(a0[0], a0[1], a1[0], a1[1], b1[0], b1[1])
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True

    def on_seg(px, py, qx, qy, rx, ry):
        return (min(px, qx) - EPS_GEO <= rx <= max(px, qx) + EPS_GEO
                and min(py, qy) - EPS_GEO <= ry <= max(py, qy) + EPS_GEO)

    if abs(d1) <= EPS_GEO and on_seg(b0[0], b0[1], b1[0], b1[1], a0[0], a0[1]):
        return True
    if abs(d2) <= EPS_GEO and on_seg(b0[0], b0[1], b1[0], b1[1], a1[0], a1[1]):
        return True
    if abs(d3) <= EPS_GEO and on_seg(a0[0], a0[1], a1[0], a1[1], b0[0], b0[1]):
        return True
    if abs(d4) <= EPS_GEO and on_seg(a0[0], a0[1], a1[0], a1[1], b1[0], b1[1]):
        return True
    return False


def seg_seg_distance(a0, a1, b0, b1) -> float:
    """Distance between two closed segments; 0 if they intersect."""
    if segments_intersect(a0, a1, b0, b1):
        return 0.0
    return min(
        seg_point_distance(a0, a1, b0),
        seg_point_distance(a0, a1, b1),
        seg_point_distance(b0, b1, a0),
        seg_point_distance(b0, b1, a1),
    )


def segment_intersection_params(a0, a1, b0, b1):
    """Solve a0 + t*(a1-a0) == b0 + u*(b1-b0).

    Returns (t, u, Point2) for a unique intersection point inside both closed
    segments, None if there is none. Raises CollinearOverlap when the shared
    support line overlap has positive length.
    """
    rx, ry = a1[0] - a0[0], a1[1] - a0[1]
    sx, sy = b1[0] - b0[0], b1[1] - b0[1]
    if (rx == 0 and ry == 0) or (sx == 0 and sy == 0):
        raise GeometryError("degenerate segment")
    denom = rx * sy - ry * sx
    qpx, qpy = b0[0] - a0[0], b0[1] - a0[1]
    scale = max(abs(rx), abs(ry), abs(sx), abs(sy), 1.0)
    if abs(denom) <= EPS_GEO * scale * scale:
        # parallel; collinear iff b0 lies on the support line of a
        if abs(qpx * ry - qpy * rx) > EPS_GEO * scale * scale:
            return None
        # project b endpoints onto a's axis and measure 1D overlap
        rr = rx * rx + ry * ry
        t0 = (qpx * rx + qpy * ry) / rr
        t1 = ((b1[0] - a0[0]) * rx + (b1[1] - a0[1]) * ry) / rr
        lo, hi = min(t0, t1), max(t0, t1)
        ov_lo, ov_hi = max(0.0, lo), min(1.0, hi)
        if ov_hi - ov_lo > EPS_GEO:
            raise CollinearOverlap("segments overlap collinearly")
        if ov_hi < ov_lo - EPS_GEO:
            return None
        t = 0.5 * (ov_lo + ov_hi)
        return t, 0.0, Point2(a0[0] + t * rx, a0[1] + t * ry)
    t = (qpx * sy - qpy * sx) / denom
    u = (qpx * ry - qpy * rx) / denom
    if -EPS_GEO <= t <= 1 + EPS_GEO and -EPS_GEO <= u <= 1 + EPS_GEO:
        return t, u, Point2(a0[0] + t * rx, a0[1] + t * ry)
    return None


def segment_intersection(a0, a1, b0, b1) -> Optional[Point2]:
    """Unique intersection point of two segments, or None.

    CollinearOverlap is surfaced, never silently resolved: roadmap
    construction must reject exactly-overlapping edges.
    """
    res = segment_intersection_params(a0, a1, b0, b1)
    return None if res is None else res[2]


# ---------------------------------------------------------------------------
# Polygons
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon, CCW vertex order, no repeats."""

    vertices: tuple

    def __init__(self, vertices: Iterable[Sequence[float]]):
        verts = tuple(check_point(v) for v in vertices)
        if len(verts) < 3:
            raise GeometryError("convex polygon needs >= 3 vertices")
        n = len(verts)
        for i in range(n):
            o, a, b = verts[i], verts[(i + 1) % n], verts[(i + 2) % n]
            c = cross(o.x, o.y, a.x, a.y, b.x, b.y)
            if c <= EPS_GEO:
                raise GeometryError(
                    f"vertices not strictly convex/CCW at index {i} (cross={c:g})")
        object.__setattr__(self, "vertices", verts)

    def transformed(self, pose: Pose) -> tuple:
        """World-frame vertices for this body-frame polygon at `pose`."""
        c, s = math.cos(pose.theta), math.sin(pose.theta)
        return tuple(
            Point2(pose.x + c * v.x - s * v.y, pose.y + s * v.x + c * v.y)
            for v in self.vertices
        )

    def translated(self, dx: float, dy: float) -> tuple:
        return tuple(Point2(v.x + dx, v.y + dy) for v in self.vertices)

    def contains(self, p: Sequence[float]) -> bool:
        """Closed-set membership."""
        for i in range(len(self.vertices)):
            a = self.vertices[i]
            b = self.vertices[(i + 1) % len(self.vertices)]
            if cross(a.x, a.y, b.x, b.y, p[0], p[1]) < -EPS_GEO:
                return False
        return True

    def aabb(self):
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


def polygon_area(vertices: Sequence[Sequence[float]]) -> float:
    """Signed area (positive for CCW)."""
    s = 0.0
    n = len(vertices)
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        s += a[0] * b[1] - b[0] * a[1]
    return 0.5 * s


def point_in_simple_polygon(p: Sequence[float], vertices: Sequence[Sequence[float]]) -> bool:
    """Closed-set membership for an arbitrary simple polygon (ray casting)."""
    px, py = p[0], p[1]
    n = len(vertices)
    # boundary counts as inside
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        if seg_point_distance(a, b, (px, py)) <= EPS_GEO:
            return True
    inside = False
    j = n - 1
    for i in range(n):
        xi, yi = vertices[i][0], vertices[i][1]
        xj, yj = vertices[j][0], vertices[j][1]
        if (yi > py) != (yj > py) and px < (xj - xi) * (py - yi) / (yj - yi) + xi:
            inside = not inside
        j = i
    return inside


def seg_polygon_distance(a, b, vertices: Sequence[Sequence[float]]) -> float:
    """Distance from segment [a, b] to a simple polygon; 0 on overlap/containment."""
    if point_in_simple_polygon(a, vertices) or point_in_simple_polygon(b, vertices):
        return 0.0
    best = math.inf
    n = len(vertices)
    for i in range(n):
        v0, v1 = vertices[i], vertices[(i + 1) % n]
        d = seg_seg_distance(a, b, v0, v1)
        if d <= 0.0:
            return 0.0
        if d < best:
            best = d
    return best


def point_region_distance(p, region: "Region") -> float:
    best = math.inf
    for poly in region.polygons:
        if point_in_simple_polygon(p, poly):
            return 0.0
        n = len(poly)
        for i in range(n):
            d = seg_point_distance(poly[i], poly[(i + 1) % n], p)
            if d < best:
                best = d
    return best


@dataclass(frozen=True)
class Region:
    """Union of disjoint simple polygons (vertex tuples), occupied or free."""

    polygons: tuple = ()
    occupied: bool = True

    def __init__(self, polygons: Iterable[Sequence[Sequence[float]]] = (), occupied: bool = True):
        polys = tuple(tuple(check_point(v) for v in poly) for poly in polygons)
        for poly in polys:
            if len(poly) < 3:
                raise GeometryError("region polygon needs >= 3 vertices")
        object.__setattr__(self, "polygons", polys)
        object.__setattr__(self, "occupied", occupied)

    @property
    def empty(self) -> bool:
        return not self.polygons

    def contains(self, p: Sequence[float]) -> bool:
        return any(point_in_simple_polygon(p, poly) for poly in self.polygons)

    def aabb(self):
        if not self.polygons:
            return None
        xs = [v.x for poly in self.polygons for v in poly]
        ys = [v.y for poly in self.polygons for v in poly]
        return min(xs), min(ys), max(xs), max(ys)


# ---------------------------------------------------------------------------
# Minimum enclosing circle (randomized incremental, deterministically seeded)
# ---------------------------------------------------------------------------

def _seed_from_points(points) -> int:
    h = 0xCBF29CE484222325
    for p in points:
        for b in struct.pack("<dd", p[0], p[1]):
            h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def _in_circle(c: Disc, p) -> bool:
    return dist(c.center, p) <= c.radius * (1 + 1e-14) + 1e-14


def _circumcircle(a, b, c) -> Optional[Disc]:
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0
    if d == 0.0:
        return None
    x = ox + ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay)
              + (cx * cx + cy * cy) * (ay - by)) / d
    y = oy + ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx)
              + (cx * cx + cy * cy) * (bx - ax)) / d
    center = Point2(x, y)
    r = max(dist(center, a), dist(center, b), dist(center, c))
    return Disc(center, r)


def _diameter_circle(a, b) -> Disc:
    center = Point2((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    return Disc(center, max(dist(center, a), dist(center, b)))


def _circle_two_points(points, p, q) -> Disc:
    circ = _diameter_circle(p, q)
    left: Optional[Disc] = None
    right: Optional[Disc] = None
    px, py = p
    qx, qy = q
    for r in points:
        if _in_circle(circ, r):
            continue
        c = cross(px, py, qx, qy, r[0], r[1])
        circum = _circumcircle(p, q, r)
        if circum is None:
            continue
        cc = cross(px, py, qx, qy, circum.center.x, circum.center.y)
        if c > 0 and (left is None or cc > cross(px, py, qx, qy, left.center.x, left.center.y)):
            left = circum
        elif c < 0 and (right is None or cc < cross(px, py, qx, qy, right.center.x, right.center.y)):
            right = circum
    if left is None and right is None:
        return circ
    if left is None:
        return right  # type: ignore[return-value]
    if right is None:
        return left
    return left if left.radius <= right.radius else right


def _circle_one_point(points, p) -> Disc:
    c = Disc(Point2(p[0], p[1]), 0.0)
    for i, q in enumerate(points):
        if not _in_circle(c, q):
            if c.radius == 0.0:
                c = _diameter_circle(p, q)
            else:
                c = _circle_two_points(points[: i + 1], p, q)
    return c


def min_enclosing_circle(points: Sequence[Sequence[float]]) -> Disc:
    """Smallest disc containing all points.

    Expected O(n) randomized incremental construction. The internal shuffle
    is seeded from the input bytes, so the result is deterministic for a
    fixed input ordering.
    """
    pts = [check_point(p) for p in points]
    if not pts:
        raise EmptySetError("min_enclosing_circle of empty point set")
    shuffled = list(pts)
    random.Random(_seed_from_points(pts)).shuffle(shuffled)
    c: Optional[Disc] = None
    for i, p in enumerate(shuffled):
        if c is None or not _in_circle(c, p):
            c = _circle_one_point(shuffled[:i], p)
    assert c is not None
    return c


def effective_radius(footprint: ConvexPolygon):
    """Minimum enclosing circle of a convex footprint: (center, radius)."""
    d = min_enclosing_circle(footprint.vertices)
    return d.center, d.radius


# ---------------------------------------------------------------------------
# Conservative Minkowski inflation
# ---------------------------------------------------------------------------

def _circumscribed_disc_vertices(center, radius: float, segments: int):
    # vertex radius r/cos(pi/k) puts chord midpoints exactly on the circle,
    # so the k-gon never undershoots the disc
    rr = radius / math.cos(math.pi / segments)
    cx, cy = center[0], center[1]
    out = []
    for i in range(segments):
        ang = (2 * math.pi) * (i + 0.5) / segments
        out.append((cx + rr * math.cos(ang), cy + rr * math.sin(ang)))
    return out


def minkowski_inflate(region: Region, radius: float, disc_segments: int = 16) -> Region:
    """Conservative outer approximation of region (+) disc(radius).

    Covers each polygon with itself, one exact rectangle per edge, and a
    circumscribed polygon per vertex, then unions the cover. Every point
    within `radius` of the region is inside the output; arcs never
    undershoot. Interior holes created by the union are filled (still
    conservative).
    """
    if radius < 0:
        raise InvalidRadius(f"negative inflation radius {radius}")
    if disc_segments < 8:
        raise GeometryError("disc_segments must be >= 8")
    if region.empty or radius == 0.0:
        return region
    pieces = []
    for poly in region.polygons:
        pts = [(v.x, v.y) for v in poly]
        pieces.append(shapely.geometry.Polygon(pts))
        n = len(pts)
        for i in range(n):
            ax, ay = pts[i]
            bx, by = pts[(i + 1) % n]
            ex, ey = bx - ax, by - ay
            ln = math.hypot(ex, ey)
            if ln <= EPS_GEO:
                continue
            nx, ny = -ey / ln * radius, ex / ln * radius
            pieces.append(shapely.geometry.Polygon(
                [(ax + nx, ay + ny), (bx + nx, by + ny), (bx - nx, by - ny), (ax - nx, ay - ny)]))
        for vx, vy in pts:
            pieces.append(shapely.geometry.Polygon(
                _circumscribed_disc_vertices((vx, vy), radius, disc_segments)))
    merged = shapely.ops.unary_union(pieces)
    if merged.geom_type == "Polygon":
        geoms = [merged]
    else:
        geoms = list(merged.geoms)
    out = []
    for g in geoms:
        ring = list(g.exterior.coords)[:-1]  # drop closing duplicate; holes filled
        if polygon_area(ring) < 0:
            ring.reverse()
        out.append(ring)
    return Region(out, occupied=region.occupied)


def swept_disc_clear(p0, p1, radius: float, obstacles: Region) -> bool:
    """True iff the disc of `radius` swept along [p0, p1] misses every obstacle.

    Closed-set semantics: clearance exactly equal to the radius counts as
    contact, i.e. collision.
    """
    if radius < 0:
        raise InvalidRadius(f"negative radius {radius}")
    if not _finite(p0[0], p0[1], p1[0], p1[1]):
        raise GeometryError("non-finite segment endpoint")
    for poly in obstacles.polygons:
        if seg_polygon_distance(p0, p1, poly) <= radius:
            return False
    return True


# ---------------------------------------------------------------------------
# Convex polygon pair distance
# ---------------------------------------------------------------------------

def convex_polygons_distance(va: Sequence[Sequence[float]], vb: Sequence[Sequence[float]]) -> float:
    """Separation distance between two convex polygons (0 if touching/overlapping)."""
    # overlap: either contains a vertex of the other, or edges intersect
    def contains(verts, p):
        n = len(verts)
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            if cross(a[0], a[1], b[0], b[1], p[0], p[1]) < -EPS_GEO:
                return False
        return True

    if contains(va, vb[0]) or contains(vb, va[0]):
        return 0.0
    best = math.inf
    na, nb = len(va), len(vb)
    for i in range(na):
        a0, a1 = va[i], va[(i + 1) % na]
        for j in range(nb):
            d = seg_seg_distance(a0, a1, vb[j], vb[(j + 1) % nb])
            if d <= 0.0:
                return 0.0
            if d < best:
                best = d
    return best


def polygon_pair_distance(a: ConvexPolygon, pose_a: Pose, b: ConvexPolygon, pose_b: Pose) -> float:
    """Euclidean separation of two posed convex footprints; 0 iff touch/overlap."""
    return convex_polygons_distance(a.transformed(pose_a), b.transformed(pose_b))


def sat_penetration_depth(va, vb) -> float:
    """Minimal translation depth for two overlapping convex polygons (SAT).

    Returns 0 if the polygons do not overlap.
    """
    def axes(verts):
        n = len(verts)
        for i in range(n):
            ex = verts[(i + 1) % n][0] - verts[i][0]
            ey = verts[(i + 1) % n][1] - verts[i][1]
            ln = math.hypot(ex, ey)
            if ln > EPS_GEO:
                yield -ey / ln, ex / ln

    def project(verts, nx, ny):
        vals = [v[0] * nx + v[1] * ny for v in verts]
        return min(vals), max(vals)

    depth = math.inf
    for nx, ny in list(axes(va)) + list(axes(vb)):
        amin, amax = project(va, nx, ny)
        bmin, bmax = project(vb, nx, ny)
        overlap = min(amax, bmax) - max(amin, bmin)
        if overlap < 0:
            return 0.0
        depth = min(depth, overlap)
    return depth if math.isfinite(depth) else 0.0


def regular_polygon(center, circumradius: float, n: int = 16, phase: float = math.pi / 16) -> ConvexPolygon:
    """Regular n-gon of given circumradius; phase rotates vertices off the axes."""
    cx, cy = center[0], center[1]
    return ConvexPolygon([
        (cx + circumradius * math.cos(phase + 2 * math.pi * i / n),
         cy + circumradius * math.sin(phase + 2 * math.pi * i / n))
        for i in range(n)
    ])
