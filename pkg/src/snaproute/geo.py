"""Coordinate frames, polygons, and exact-area clipping.

All planning happens in a local east-north metric frame anchored at the
centroid of the input regions. The projection is equirectangular, scaled at
the frame origin's latitude, which is accurate well below 0.1% over the
sub-kilometre extents this planner operates on.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DegenerateGeometry, InvalidInput

log = logging.getLogger(__name__)

# Metres spanned by one degree of latitude in the equirectangular model
# (equatorial circumference / 360).
METERS_PER_DEG_LAT = 111_320.0

# Clipping output below this area (m^2) is treated as a numerical sliver.
SLIVER_AREA_M2 = 1e-6

Ring = Sequence[tuple[float, float]]


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 coordinate in degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0):
            raise InvalidInput(f"latitude {self.lat} outside [-90, 90]")
        if not (-180.0 <= self.lon <= 180.0):
            raise InvalidInput(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class LocalPoint:
    """East-north offset in metres from a frame origin."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInput(f"non-finite local point ({self.x}, {self.y})")


@dataclass(frozen=True)
class LocalFrame:
    """Equirectangular projection centred on ``origin``."""

    origin: GeoPoint
    meters_per_deg_lat: float = METERS_PER_DEG_LAT
    meters_per_deg_lon: float = field(default=0.0)

    def __post_init__(self):
        if self.meters_per_deg_lat <= 0:
            raise InvalidInput("meters_per_deg_lat must be positive")
        if self.meters_per_deg_lon == 0.0:
            scale = self.meters_per_deg_lat * math.cos(math.radians(self.origin.lat))
            object.__setattr__(self, "meters_per_deg_lon", scale)
        if self.meters_per_deg_lon <= 0:
            raise InvalidInput("meters_per_deg_lon must be positive (origin too close to a pole)")

    def to_local(self, g: GeoPoint) -> LocalPoint:
        return LocalPoint(
            (g.lon - self.origin.lon) * self.meters_per_deg_lon,
            (g.lat - self.origin.lat) * self.meters_per_deg_lat,
        )

    def to_geo(self, p: LocalPoint) -> GeoPoint:
        return GeoPoint(
            self.origin.lat + p.y / self.meters_per_deg_lat,
            self.origin.lon + p.x / self.meters_per_deg_lon,
        )


def make_frame(rois_geo: Sequence[Sequence[GeoPoint]]) -> LocalFrame:
    """Build the shared local frame from geographic polygon rings.

    The origin is the centroid of all vertices across all rings.
    """
    vertices = [v for ring in rois_geo for v in ring]
    if not vertices:
        raise InvalidInput("cannot build a frame from zero vertices")
    lat = sum(v.lat for v in vertices) / len(vertices)
    lon = sum(v.lon for v in vertices) / len(vertices)
    return LocalFrame(origin=GeoPoint(lat, lon))


def ring_area(ring: Ring) -> float:
    """Signed shoelace area; positive for counter-clockwise rings."""
    area = 0.0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        area += x0 * y1 - x1 * y0
    return 0.5 * area


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _segments_cross(p1, p2, q1, q2) -> bool:
    """True if open segment p1p2 intersects open segment q1q2.

    Shared endpoints between adjacent polygon edges are handled by the
    caller, which never passes adjacent edge pairs.
    """
    d1 = _orient(q1[0], q1[1], q2[0], q2[1], p1[0], p1[1])
    d2 = _orient(q1[0], q1[1], q2[0], q2[1], p2[0], p2[1])
    d3 = _orient(p1[0], p1[1], p2[0], p2[1], q1[0], q1[1])
    d4 = _orient(p1[0], p1[1], p2[0], p2[1], q2[0], q2[1])
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    if d1 == 0 and _on_segment(q1[0], q1[1], q2[0], q2[1], p1[0], p1[1]):
        return True
    if d2 == 0 and _on_segment(q1[0], q1[1], q2[0], q2[1], p2[0], p2[1]):
        return True
    if d3 == 0 and _on_segment(p1[0], p1[1], p2[0], p2[1], q1[0], q1[1]):
        return True
    if d4 == 0 and _on_segment(p1[0], p1[1], p2[0], p2[1], q2[0], q2[1]):
        return True
    return False


def _is_simple(ring: Ring) -> bool:
    """Pairwise O(p^2) segment test; fine for the small rings we ingest."""
    n = len(ring)
    for i in range(n):
        a1 = ring[i]
        a2 = ring[(i + 1) % n]
        for j in range(i + 1, n):
            # skip the edge itself and the two adjacent edges
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1 = ring[j]
            b2 = ring[(j + 1) % n]
            if _segments_cross(a1, a2, b1, b2):
                return False
    return True


@dataclass(frozen=True)
class RoiPolygon:
    """A simple polygon region in the local frame.

    Vertices are stored counter-clockwise without a repeated closing vertex.
    Inputs with clockwise winding or a duplicated last vertex are normalized
    on ingestion.
    """

    id: str
    vertices: tuple[LocalPoint, ...]
    source: tuple[GeoPoint, ...] | None = None

    def __post_init__(self):
        verts = list(self.vertices)
        if len(verts) >= 2 and _close(verts[0], verts[-1]):
            verts = verts[:-1]
            log.info("polygon %s: dropped repeated closing vertex", self.id)
        if len(verts) < 3:
            raise InvalidInput(f"polygon {self.id}: needs at least 3 distinct vertices")
        ring = [(v.x, v.y) for v in verts]
        if not _is_simple(ring):
            raise InvalidInput(f"polygon {self.id}: self-intersecting boundary")
        area = ring_area(ring)
        if abs(area) < SLIVER_AREA_M2:
            raise DegenerateGeometry(f"polygon {self.id}: area is zero (collinear vertices?)")
        if area < 0:
            verts.reverse()
            log.info("polygon %s: reversed clockwise input to counter-clockwise", self.id)
        object.__setattr__(self, "vertices", tuple(verts))

    @property
    def ring(self) -> tuple[tuple[float, float], ...]:
        return tuple((v.x, v.y) for v in self.vertices)

    @property
    def area(self) -> float:
        return ring_area(self.ring)

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def centroid(self) -> LocalPoint:
        """Area centroid of the polygon."""
        ring = self.ring
        a = 0.0
        cx = 0.0
        cy = 0.0
        n = len(ring)
        for i in range(n):
            x0, y0 = ring[i]
            x1, y1 = ring[(i + 1) % n]
            cross = x0 * y1 - x1 * y0
            a += cross
            cx += (x0 + x1) * cross
            cy += (y0 + y1) * cross
        a *= 0.5
        return LocalPoint(cx / (6.0 * a), cy / (6.0 * a))


def _close(a: LocalPoint, b: LocalPoint, tol: float = 1e-12) -> bool:
    return abs(a.x - b.x) <= tol and abs(a.y - b.y) <= tol


def polygon_area(p: "RoiPolygon | Ring") -> float:
    """Unsigned area in m^2 of a polygon or raw ring."""
    ring = p.ring if isinstance(p, RoiPolygon) else tuple(p)
    area = ring_area(ring)
    if abs(area) < SLIVER_AREA_M2:
        raise DegenerateGeometry("degenerate polygon: zero area")
    return abs(area)


def is_convex_ccw(ring: Ring) -> bool:
    n = len(ring)
    if n < 3:
        return False
    for i in range(n):
        ax, ay = ring[i]
        bx, by = ring[(i + 1) % n]
        cx, cy = ring[(i + 2) % n]
        if _orient(ax, ay, bx, by, cx, cy) < 0:
            return False
    return True


def clip_ring_to_convex(subject: Ring, window: Ring) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of an arbitrary simple ring by a convex ring.

    Returns the (possibly empty) output ring. For non-convex subjects whose
    true intersection is disconnected, the output ring may contain zero-width
    bridges; its shoelace area still equals the exact intersection area.
    """
    output = list(subject)
    n = len(window)
    for i in range(n):
        if not output:
            return []
        ex0, ey0 = window[i]
        ex1, ey1 = window[(i + 1) % n]
        # half-plane test: inside means left of (or on) the directed edge
        dx = ex1 - ex0
        dy = ey1 - ey0
        inputs = output
        output = []
        prev = inputs[-1]
        prev_in = dx * (prev[1] - ey0) - dy * (prev[0] - ex0) >= 0.0
        for cur in inputs:
            cur_in = dx * (cur[1] - ey0) - dy * (cur[0] - ex0) >= 0.0
            if cur_in != prev_in:
                # edge crossing: intersect segment prev->cur with the clip line
                num = dy * (prev[0] - ex0) - dx * (prev[1] - ey0)
                den = dy * (prev[0] - cur[0]) - dx * (prev[1] - cur[1])
                t = num / den
                output.append((prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])))
            if cur_in:
                output.append(cur)
            prev = cur
            prev_in = cur_in
    return output


def intersection_area(subject: Ring, window: Ring) -> float:
    """Exact |subject ∩ window| for a convex window, 0.0 when disjoint."""
    clipped = clip_ring_to_convex(subject, window)
    if len(clipped) < 3:
        return 0.0
    area = abs(ring_area(clipped))
    return 0.0 if area < SLIVER_AREA_M2 else area


def clip_to_convex(subject: "RoiPolygon | Ring", window: Ring) -> list[list[LocalPoint]]:
    """Clip ``subject`` against a convex CCW window.

    Returns a list of vertex lists tiling the intersection (empty when
    disjoint). Slivers below ``SLIVER_AREA_M2`` are dropped.
    """
    ring = subject.ring if isinstance(subject, RoiPolygon) else tuple(subject)
    win = tuple(window)
    if ring_area(win) < 0:
        win = tuple(reversed(win))
    if not is_convex_ccw(win):
        raise InvalidInput("clip window must be convex")
    out = clip_ring_to_convex(ring, win)
    if len(out) < 3 or abs(ring_area(out)) < SLIVER_AREA_M2:
        return []
    return [[LocalPoint(x, y) for x, y in out]]


def union_area(a: "RoiPolygon | Ring", b: Ring) -> float:
    """|a ∪ b| via inclusion-exclusion; ``b`` must be convex."""
    ring_a = a.ring if isinstance(a, RoiPolygon) else tuple(a)
    ring_b = tuple(b)
    if ring_area(ring_b) < 0:
        ring_b = tuple(reversed(ring_b))
    if not is_convex_ccw(ring_b):
        raise InvalidInput("union_area requires the second polygon to be convex")
    return abs(ring_area(ring_a)) + abs(ring_area(ring_b)) - intersection_area(ring_a, ring_b)
