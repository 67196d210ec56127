"""Single-shot inspection planner for scattered polygonal regions.

Computes one optimal camera viewpoint per region and battery-feasible,
makespan-minimizing multi-UAV routes that visit all of them.
"""

from .anneal import AnnealConfig, OptResult, Viewpoint, optimize_all, optimize_viewpoint, viewpoint_bounds
from .camera import DEFAULT_CAMERA, CameraSpec, Footprint, footprint_at, footprint_dims, gsd
from .errors import (
    DegenerateGeometry,
    GenerationFailed,
    InfeasibleError,
    InvalidInput,
    LayerOverflow,
    OptimizationFailed,
    PlannerError,
    RemoteUnavailable,
)
from .geo import GeoPoint, LocalFrame, LocalPoint, RoiPolygon, clip_to_convex, make_frame, polygon_area, union_area
from .objectives import CoverageMetrics, ObjectiveKind, coverage_metrics, score_bco, score_mco

__version__ = "0.1.0"
