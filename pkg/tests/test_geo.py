import math

import numpy as np
import pytest

from snaproute.errors import DegenerateGeometry, InvalidInput
from snaproute.geo import (
    GeoPoint,
    LocalPoint,
    RoiPolygon,
    clip_to_convex,
    intersection_area,
    make_frame,
    polygon_area,
    ring_area,
    union_area,
)

from oracles import meridian_meters_per_degree, raster_areas


def square(side=1.0, x0=0.0, y0=0.0):
    return RoiPolygon(
        "sq",
        (
            LocalPoint(x0, y0),
            LocalPoint(x0 + side, y0),
            LocalPoint(x0 + side, y0 + side),
            LocalPoint(x0, y0 + side),
        ),
    )


def rotate_ring(ring, deg, cx=0.0, cy=0.0):
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return tuple(
        (cx + c * (x - cx) - s * (y - cy), cy + s * (x - cx) + c * (y - cy)) for x, y in ring
    )


def star_ring(rng, n, r_lo=2.0, r_hi=8.0):
    """Random star-shaped ring; angular steps bounded so it is always simple."""
    steps = 1.0 + 0.4 * rng.uniform(-1.0, 1.0, n)
    angles = np.cumsum(steps / steps.sum() * 2 * math.pi)
    radii = rng.uniform(r_lo, r_hi, n)
    return tuple((r * math.cos(a), r * math.sin(a)) for r, a in zip(radii, angles))


class TestFrame:
    def test_single_vertex_centroid(self):
        f = make_frame([[GeoPoint(40.0, 23.0)]])
        assert f.origin == GeoPoint(40.0, 23.0)

    def test_origin_maps_to_zero(self):
        f = make_frame([[GeoPoint(40.0, 23.0), GeoPoint(40.1, 23.1), GeoPoint(39.9, 22.9)]])
        p = f.to_local(f.origin)
        assert p.x == pytest.approx(0.0, abs=1e-12)
        assert p.y == pytest.approx(0.0, abs=1e-12)

    def test_meridian_step_matches_geodesic_oracle(self):
        f = make_frame([[GeoPoint(40.0, 23.0)]])
        p = f.to_local(GeoPoint(40.001, 23.0))
        assert p.y == pytest.approx(111.3, abs=0.5)
        oracle = meridian_meters_per_degree(40.0) * 0.001
        assert p.y == pytest.approx(oracle, abs=0.5)

    def test_round_trip_identity(self):
        f = make_frame([[GeoPoint(40.0, 23.0)]])
        rng = np.random.default_rng(3)
        for _ in range(200):
            g = GeoPoint(40.0 + rng.uniform(-0.05, 0.05), 23.0 + rng.uniform(-0.05, 0.05))
            back = f.to_geo(f.to_local(g))
            assert abs(back.lat - g.lat) < 1e-9
            assert abs(back.lon - g.lon) < 1e-9

    def test_empty_input_rejected(self):
        with pytest.raises(InvalidInput):
            make_frame([])

    def test_lon_scale_invariant(self):
        f = make_frame([[GeoPoint(40.0, 23.0)]])
        assert f.meters_per_deg_lon == pytest.approx(
            f.meters_per_deg_lat * math.cos(math.radians(40.0))
        )


class TestPolygon:
    def test_unit_square_area(self):
        assert polygon_area(square()) == pytest.approx(1.0)

    def test_rectangle_area(self):
        r = RoiPolygon(
            "r", (LocalPoint(0, 0), LocalPoint(10, 0), LocalPoint(10, 20), LocalPoint(0, 20))
        )
        assert polygon_area(r) == pytest.approx(200.0)

    def test_random_octagon_matches_raster(self):
        rng = np.random.default_rng(7)
        ring = star_ring(rng, 8, 5.0, 15.0)
        poly = RoiPolygon("oct", tuple(LocalPoint(x, y) for x, y in ring))
        window = ((-20.0, -20.0), (20.0, -20.0), (20.0, 20.0), (-20.0, 20.0))
        est, _, _ = raster_areas(poly.ring, window, cell_m=0.01, seed=1)
        assert polygon_area(poly) == pytest.approx(est, rel=0.005)

    def test_collinear_rejected(self):
        with pytest.raises(DegenerateGeometry):
            RoiPolygon("line", (LocalPoint(0, 0), LocalPoint(1, 1), LocalPoint(2, 2)))

    def test_clockwise_normalized(self):
        cw = RoiPolygon(
            "cw", (LocalPoint(0, 0), LocalPoint(0, 1), LocalPoint(1, 1), LocalPoint(1, 0))
        )
        assert ring_area(cw.ring) > 0

    def test_repeated_closing_vertex_stripped(self):
        p = RoiPolygon(
            "closed",
            (LocalPoint(0, 0), LocalPoint(1, 0), LocalPoint(1, 1), LocalPoint(0, 1), LocalPoint(0, 0)),
        )
        assert len(p.vertices) == 4

    def test_self_intersection_rejected(self):
        with pytest.raises(InvalidInput):
            RoiPolygon(
                "bow", (LocalPoint(0, 0), LocalPoint(1, 1), LocalPoint(1, 0), LocalPoint(0, 1))
            )

    def test_too_few_vertices(self):
        with pytest.raises(InvalidInput):
            RoiPolygon("pt", (LocalPoint(0, 0), LocalPoint(1, 0)))

    def test_centroid_of_square(self):
        c = square(2.0).centroid()
        assert (c.x, c.y) == pytest.approx((1.0, 1.0))


class TestClip:
    def test_subject_inside_window(self):
        sq = square()
        window = ((-5.0, -5.0), (5.0, -5.0), (5.0, 5.0), (-5.0, 5.0))
        pieces = clip_to_convex(sq, window)
        assert len(pieces) == 1
        area = abs(ring_area([(p.x, p.y) for p in pieces[0]]))
        assert area == pytest.approx(1.0, rel=1e-9)

    def test_disjoint_empty(self):
        sq = square()
        window = ((10.0, 10.0), (11.0, 10.0), (11.0, 11.0), (10.0, 11.0))
        assert clip_to_convex(sq, window) == []

    def test_l_shape_half_overlap_matches_raster(self):
        l_shape = RoiPolygon(
            "L",
            (
                LocalPoint(0, 0),
                LocalPoint(4, 0),
                LocalPoint(4, 1),
                LocalPoint(1, 1),
                LocalPoint(1, 4),
                LocalPoint(0, 4),
            ),
        )
        window = ((-1.0, -1.0), (2.0, -1.0), (2.0, 2.0), (-1.0, 2.0))
        inter = intersection_area(l_shape.ring, window)
        _, _, est = raster_areas(l_shape.ring, window, cell_m=0.01, seed=2)
        assert inter == pytest.approx(est, rel=0.005)

    def test_nonconvex_window_rejected(self):
        bad = ((0.0, 0.0), (2.0, 0.0), (1.0, 0.5), (2.0, 2.0))
        with pytest.raises(InvalidInput):
            clip_to_convex(square(), bad)

    def test_intersection_bounds_property(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            poly = RoiPolygon("p", tuple(LocalPoint(x, y) for x, y in star_ring(rng, 6)))
            cx, cy = rng.uniform(-4, 4, 2)
            w = rng.uniform(1, 6)
            window = ((cx - w, cy - w), (cx + w, cy - w), (cx + w, cy + w), (cx - w, cy + w))
            inter = intersection_area(poly.ring, window)
            assert -1e-12 <= inter <= min(polygon_area(poly), (2 * w) ** 2) + 1e-9

    def test_inclusion_exclusion_identity(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            poly = RoiPolygon("p", tuple(LocalPoint(x, y) for x, y in star_ring(rng, 7)))
            cx, cy = rng.uniform(-4, 4, 2)
            w = rng.uniform(1, 6)
            window = ((cx - w, cy - w), (cx + w, cy - w), (cx + w, cy + w), (cx - w, cy + w))
            inter = intersection_area(poly.ring, window)
            union = union_area(poly, window)
            assert inter + union == pytest.approx(polygon_area(poly) + (2 * w) ** 2, abs=1e-9)

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            ring = star_ring(rng, 6)
            window = ((-3.0, -2.0), (4.0, -2.0), (4.0, 3.0), (-3.0, 3.0))
            base = intersection_area(ring, window)
            deg = rng.uniform(0, 360)
            rotated = intersection_area(rotate_ring(ring, deg), rotate_ring(window, deg))
            if base > 1e-9:
                assert rotated == pytest.approx(base, rel=1e-6)


class TestUnion:
    def test_identical_squares(self):
        sq = square()
        assert union_area(sq, sq.ring) == pytest.approx(1.0)

    def test_disjoint_squares(self):
        a = square()
        b = ((5.0, 5.0), (6.0, 5.0), (6.0, 6.0), (5.0, 6.0))
        assert union_area(a, b) == pytest.approx(2.0)

    def test_half_overlap(self):
        a = square()
        b = ((0.5, 0.0), (1.5, 0.0), (1.5, 1.0), (0.5, 1.0))
        assert union_area(a, b) == pytest.approx(1.5)
