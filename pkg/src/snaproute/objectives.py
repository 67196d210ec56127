"""Viewpoint scoring against one region, plus the retrieval metrics.

Two interchangeable scores are provided: a full-coverage score that rewards
containing the whole region in one capture (with a small-capture penalty to
keep the footprint tight), and a balanced intersection-over-union score.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .camera import CameraSpec, Footprint, gsd
from .errors import DegenerateGeometry
from .geo import Ring, RoiPolygon, intersection_area, ring_area

# Coverage ratios this close to 1 count as full coverage; absorbs clipping
# round-off so the score branch cannot flap.
FULL_COVERAGE_EPS = 1e-9


class ObjectiveKind(enum.Enum):
    MCO = "MCO"
    BCO = "BCO"


@dataclass(frozen=True)
class CoverageMetrics:
    recall: float
    precision: float
    intersection_area: float
    roi_area: float
    capture_area: float
    gsd_cm_px: float


def _rings(roi: "RoiPolygon | Ring", fp: "Footprint | Ring") -> tuple[Ring, Ring]:
    roi_ring = roi.ring if isinstance(roi, RoiPolygon) else tuple(roi)
    fp_ring = fp.ring if isinstance(fp, Footprint) else tuple(fp)
    return roi_ring, fp_ring


def score_mco(roi: "RoiPolygon | Ring", fp: "Footprint | Ring") -> float:
    """Coverage ratio, switching to 1 + 1/|capture| at full coverage.

    The 1/area penalty (areas in m^2) is tiny next to the ratio term, so it
    only orders fully-covering captures by tightness without disturbing the
    partial-coverage ordering.
    """
    roi_ring, fp_ring = _rings(roi, fp)
    roi_area = abs(ring_area(roi_ring))
    if roi_area <= 0.0:
        raise DegenerateGeometry("region has zero area")
    capture_area = abs(ring_area(fp_ring))
    if capture_area <= 0.0:
        return 0.0
    ratio = intersection_area(roi_ring, fp_ring) / roi_area
    if ratio < 1.0 - FULL_COVERAGE_EPS:
        return ratio
    return 1.0 + 1.0 / capture_area


def score_bco(roi: "RoiPolygon | Ring", fp: "Footprint | Ring") -> float:
    """Intersection over union of the region and the capture rectangle."""
    roi_ring, fp_ring = _rings(roi, fp)
    roi_area = abs(ring_area(roi_ring))
    if roi_area <= 0.0:
        raise DegenerateGeometry("region has zero area")
    capture_area = abs(ring_area(fp_ring))
    inter = intersection_area(roi_ring, fp_ring)
    union = roi_area + capture_area - inter
    return inter / union


def score(kind: ObjectiveKind, roi: "RoiPolygon | Ring", fp: "Footprint | Ring") -> float:
    if kind is ObjectiveKind.MCO:
        return score_mco(roi, fp)
    return score_bco(roi, fp)


def coverage_metrics(
    roi: "RoiPolygon | Ring", fp: "Footprint | Ring", cam: CameraSpec, height_agl: float
) -> CoverageMetrics:
    """Recall, precision, areas, and GSD for one region capture."""
    roi_ring, fp_ring = _rings(roi, fp)
    roi_area = abs(ring_area(roi_ring))
    capture_area = abs(ring_area(fp_ring))
    inter = intersection_area(roi_ring, fp_ring)
    return CoverageMetrics(
        recall=inter / roi_area,
        precision=inter / capture_area if capture_area > 0 else 0.0,
        intersection_area=inter,
        roi_area=roi_area,
        capture_area=capture_area,
        gsd_cm_px=gsd(cam, height_agl),
    )
