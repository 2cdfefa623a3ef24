import math
import random
from itertools import combinations

import pytest

from mrplan.geometry import (
    CollinearOverlap,
    ConvexPolygon,
    Disc,
    EmptySetError,
    InvalidRadius,
    Point2,
    Pose,
    Region,
    convex_polygons_distance,
    effective_radius,
    min_enclosing_circle,
    minkowski_inflate,
    point_region_distance,
    polygon_pair_distance,
    regular_polygon,
    seg_polygon_distance,
    segment_intersection,
    swept_disc_clear,
)

TOL = 1e-9


# ---------------------------------------------------------------------------
# Brute-force enclosing-circle oracle: try every pair (diameter) and triple
# (circumcircle), keep the smallest circle covering all points.
# ---------------------------------------------------------------------------

def _circumcircle(a, b, c):
    d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if abs(d) < 1e-300:
        return None
    ux = ((a[0] ** 2 + a[1] ** 2) * (b[1] - c[1]) + (b[0] ** 2 + b[1] ** 2) * (c[1] - a[1])
          + (c[0] ** 2 + c[1] ** 2) * (a[1] - b[1])) / d
    uy = ((a[0] ** 2 + a[1] ** 2) * (c[0] - b[0]) + (b[0] ** 2 + b[1] ** 2) * (a[0] - c[0])
          + (c[0] ** 2 + c[1] ** 2) * (b[0] - a[0])) / d
    r = max(math.dist((ux, uy), p) for p in (a, b, c))
    return (ux, uy), r


def brute_force_mec(points):
    pts = [tuple(p) for p in points]
    if len(pts) == 1:
        return pts[0], 0.0
    best = None
    candidates = []
    for a, b in combinations(pts, 2):
        candidates.append((((a[0] + b[0]) / 2, (a[1] + b[1]) / 2), math.dist(a, b) / 2))
    for a, b, c in combinations(pts, 3):
        circ = _circumcircle(a, b, c)
        if circ is not None:
            candidates.append(circ)
    for center, r in candidates:
        if all(math.dist(center, p) <= r + 1e-9 for p in pts):
            if best is None or r < best[1]:
                best = (center, r)
    assert best is not None
    return best


class TestMinEnclosingCircle:
    def test_single_point(self):
        d = min_enclosing_circle([(0.0, 0.0)])
        assert d.center == Point2(0.0, 0.0)
        assert d.radius == 0.0

    def test_two_point_diameter(self):
        d = min_enclosing_circle([(0.0, 0.0), (2.0, 0.0)])
        assert math.dist(d.center, (1.0, 0.0)) < TOL
        assert abs(d.radius - 1.0) < TOL

    def test_unit_square_corners(self):
        pts = [(0, 0), (1, 0), (1, 1), (0, 1)]
        oracle_center, oracle_r = brute_force_mec(pts)
        d = min_enclosing_circle(pts)
        assert abs(d.radius - oracle_r) < TOL
        assert abs(d.radius - math.sqrt(2) / 2) < TOL
        assert math.dist(d.center, (0.5, 0.5)) < TOL

    def test_empty_input(self):
        with pytest.raises(EmptySetError):
            min_enclosing_circle([])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            min_enclosing_circle([(0.0, float("nan"))])

    def test_random_sets_match_brute_force(self):
        rng = random.Random(12345)
        for _ in range(300):
            n = rng.randint(1, 12)  # brute force is O(n^3); bigger n in acceptance suite
            pts = [(rng.uniform(-5, 5), rng.uniform(-5, 5)) for _ in range(n)]
            d = min_enclosing_circle(pts)
            _, oracle_r = brute_force_mec(pts)
            assert abs(d.radius - oracle_r) < TOL
            for p in pts:
                assert math.dist(d.center, p) <= d.radius + TOL

    def test_deterministic_for_fixed_ordering(self):
        rng = random.Random(7)
        pts = [(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(20)]
        a = min_enclosing_circle(pts)
        b = min_enclosing_circle(pts)
        assert a == b


class TestEffectiveRadius:
    def test_small_square(self):
        sq = ConvexPolygon([(-0.05, -0.05), (0.05, -0.05), (0.05, 0.05), (-0.05, 0.05)])
        _, oracle_r = brute_force_mec(sq.vertices)
        _, r = effective_radius(sq)
        assert abs(r - oracle_r) < TOL
        assert abs(r - 0.05 * math.sqrt(2)) < TOL

    def test_regular_32gon_circumradius(self):
        poly = regular_polygon((0, 0), 0.08, n=32)
        _, r = effective_radius(poly)
        assert abs(r - 0.08) < TOL

    def test_near_collinear_triangle(self):
        tri = ConvexPolygon([(0, 0), (1, 1e-6), (2, 0)][::-1])
        _, oracle_r = brute_force_mec(tri.vertices)
        _, r = effective_radius(tri)
        assert abs(r - oracle_r) < TOL
        assert abs(r - 1.0) < 1e-5  # half the longest side


class TestSegmentIntersection:
    def test_proper_cross(self):
        p = segment_intersection((0, 0), (1, 1), (0, 1), (1, 0))
        assert p is not None
        assert math.dist(p, (0.5, 0.5)) < TOL

    def test_parallel_disjoint(self):
        assert segment_intersection((0, 0), (1, 0), (0, 1), (1, 1)) is None

    def test_collinear_overlap_raises(self):
        with pytest.raises(CollinearOverlap):
            segment_intersection((0, 0), (2, 0), (1, 0), (3, 0))

    def test_collinear_point_touch(self):
        p = segment_intersection((0, 0), (1, 0), (1, 0), (3, 0))
        assert p is not None
        assert math.dist(p, (1.0, 0.0)) < TOL


UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


class TestMinkowskiInflate:
    def test_empty_identity(self):
        r = minkowski_inflate(Region(), 0.1)
        assert r.empty

    def test_zero_radius_identity(self):
        reg = Region([UNIT_SQUARE])
        out = minkowski_inflate(reg, 0.0)
        assert out.polygons == reg.polygons

    def test_negative_radius(self):
        with pytest.raises(InvalidRadius):
            minkowski_inflate(Region([UNIT_SQUARE]), -0.1)

    def test_unit_square_half_meter(self):
        out = minkowski_inflate(Region([UNIT_SQUARE]), 0.5)
        # oracle: true inflation boundary at distance exactly 0.5 from input
        assert out.contains((1.45, 0.5))
        assert not out.contains((1.55, 0.5))

    def test_conservative_point_sampling(self):
        reg = Region([UNIT_SQUARE, [(2.5, 2.5), (3.0, 2.6), (2.8, 3.2)]])
        radius = 0.3
        out = minkowski_inflate(reg, radius)
        rng = random.Random(99)
        checked = 0
        while checked < 10_000:
            p = (rng.uniform(-1, 4), rng.uniform(-1, 4))
            if point_region_distance(p, reg) < radius:
                assert out.contains(p), p
                checked += 1

    def test_monotone_in_radius(self):
        reg = Region([UNIT_SQUARE])
        small = minkowski_inflate(reg, 0.1)
        big = minkowski_inflate(reg, 0.4)
        rng = random.Random(4)
        for _ in range(2000):
            p = (rng.uniform(-1, 2), rng.uniform(-1, 2))
            if small.contains(p):
                assert big.contains(p)

    def test_adjacent_tiles_merge(self):
        reg = Region([UNIT_SQUARE, [(1, 0), (2, 0), (2, 1), (1, 1)]])
        out = minkowski_inflate(reg, 0.2)
        assert len(out.polygons) == 1  # overlapping inflations union into one


class TestSweptDiscClear:
    def test_empty_workspace(self):
        assert swept_disc_clear((0, 0), (5, 5), 0.1, Region())

    def test_crossing_obstacle(self):
        assert not swept_disc_clear((-1, 0.5), (2, 0.5), 0.1, Region([UNIT_SQUARE]))

    def test_corner_clearance_threshold(self):
        # segment passes the corner (1, 1) at distance d
        d = 0.2
        seg_y = 1 + d
        obstacles = Region([UNIT_SQUARE])
        assert not swept_disc_clear((-1, seg_y), (3, seg_y), d + 1e-4, obstacles)
        assert swept_disc_clear((-1, seg_y), (3, seg_y), d - 1e-4, obstacles)

    def test_symmetry(self):
        obstacles = Region([UNIT_SQUARE])
        rng = random.Random(5)
        for _ in range(100):
            p0 = (rng.uniform(-2, 3), rng.uniform(-2, 3))
            p1 = (rng.uniform(-2, 3), rng.uniform(-2, 3))
            r = rng.uniform(0, 0.5)
            assert swept_disc_clear(p0, p1, r, obstacles) == swept_disc_clear(p1, p0, r, obstacles)

    def test_zero_radius_is_intersection_test(self):
        obstacles = Region([UNIT_SQUARE])
        rng = random.Random(6)
        for _ in range(200):
            p0 = (rng.uniform(-1, 2), rng.uniform(-1, 2))
            p1 = (rng.uniform(-1, 2), rng.uniform(-1, 2))
            clear = swept_disc_clear(p0, p1, 0.0, obstacles)
            intersects = seg_polygon_distance(p0, p1, obstacles.polygons[0]) <= 0.0
            assert clear == (not intersects)


class TestPolygonPairDistance:
    SQ = ConvexPolygon([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])

    def test_axis_separated(self):
        d = polygon_pair_distance(self.SQ, Pose(0, 0), self.SQ, Pose(3, 0))
        assert abs(d - 2.0) < TOL

    def test_identical_overlap(self):
        assert polygon_pair_distance(self.SQ, Pose(0, 0), self.SQ, Pose(0, 0)) == 0.0

    def test_rotated_square(self):
        d = polygon_pair_distance(self.SQ, Pose(0, 0, math.pi / 4), self.SQ, Pose(2, 0))
        expected = 2 - 0.5 - math.sqrt(2) / 2
        # oracle: dense pairwise vertex/edge distances
        a = self.SQ.transformed(Pose(0, 0, math.pi / 4))
        b = self.SQ.transformed(Pose(2, 0))
        dense = min(
            math.dist(
                (a[i][0] + (a[(i + 1) % 4][0] - a[i][0]) * s, a[i][1] + (a[(i + 1) % 4][1] - a[i][1]) * s),
                (b[j][0] + (b[(j + 1) % 4][0] - b[j][0]) * t, b[j][1] + (b[(j + 1) % 4][1] - b[j][1]) * t),
            )
            for i in range(4) for j in range(4)
            for s in [k / 50 for k in range(51)] for t in [k / 50 for k in range(51)]
        )
        assert abs(d - expected) < 1e-9
        assert d <= dense + 1e-9

    def test_symmetry_and_triangle_inequality(self):
        rng = random.Random(11)
        tri = ConvexPolygon([(0, 0), (0.3, 0), (0.1, 0.25)])
        for _ in range(100):
            pa = Pose(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-3, 3))
            pb = Pose(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-3, 3))
            pc = Pose(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-3, 3))
            dab = polygon_pair_distance(tri, pa, tri, pb)
            dba = polygon_pair_distance(tri, pb, tri, pa)
            assert abs(dab - dba) < TOL
            dac = polygon_pair_distance(tri, pa, tri, pc)
            dcb = polygon_pair_distance(tri, pc, tri, pb)
            # separation distance satisfies a weak triangle inequality via
            # center translation: d(A,B) <= d(A,C) + d(C,B) + diameter(C)
            diam = 2 * min_enclosing_circle(tri.transformed(pc)).radius
            assert dab <= dac + dcb + diam + TOL


class TestConvexPolygonValidation:
    def test_needs_three_vertices(self):
        with pytest.raises(ValueError):
            ConvexPolygon([(0, 0), (1, 0)])

    def test_rejects_clockwise(self):
        with pytest.raises(ValueError):
            ConvexPolygon([(0, 0), (0, 1), (1, 0)])

    def test_rejects_repeated_vertex(self):
        with pytest.raises(ValueError):
            ConvexPolygon([(0, 0), (1, 0), (1, 0), (0, 1)])

    def test_rejects_nonconvex(self):
        with pytest.raises(ValueError):
            ConvexPolygon([(0, 0), (2, 0), (1, 0.1), (2, 2)])

    def test_contains(self):
        sq = ConvexPolygon(UNIT_SQUARE)
        assert sq.contains((0.5, 0.5))
        assert sq.contains((1.0, 0.5))  # boundary closed
        assert not sq.contains((1.1, 0.5))


def test_convex_polygons_distance_matches_brute():
    rng = random.Random(2)
    for _ in range(50):
        a = regular_polygon((rng.uniform(-1, 1), rng.uniform(-1, 1)), rng.uniform(0.1, 0.5), n=7)
        b = regular_polygon((rng.uniform(-1, 1), rng.uniform(-1, 1)), rng.uniform(0.1, 0.5), n=5)
        d = convex_polygons_distance(a.vertices, b.vertices)
        centers = math.dist(
            min_enclosing_circle(a.vertices).center, min_enclosing_circle(b.vertices).center
        )
        if d > 0:
            # sample many point pairs; none may be closer than d
            for _ in range(50):
                i = rng.randrange(7)
                j = rng.randrange(5)
                s, t = rng.random(), rng.random()
                pa = a.vertices[i]
                pb = a.vertices[(i + 1) % 7]
                qa = b.vertices[j]
                qb = b.vertices[(j + 1) % 5]
                p = (pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1]))
                q = (qa[0] + t * (qb[0] - qa[0]), qa[1] + t * (qb[1] - qa[1]))
                assert math.dist(p, q) >= d - 1e-9
        else:
            assert centers <= (min_enclosing_circle(a.vertices).radius
                               + min_enclosing_circle(b.vertices).radius) + 1e-9
