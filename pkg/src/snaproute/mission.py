"""Executable per-UAV trajectories and the serialized mission plan.

Each route becomes a closed waypoint loop: take off at the depot and climb
to the UAV's transit layer, fly to each viewpoint at that constant absolute
altitude, descend vertically to the capture pose, climb back out, and land
at the depot. Capture altitudes are terrain-adjusted: absolute altitude is
local ground elevation plus the optimizer's above-ground altitude. Transit
altitude is referenced to the depot's ground elevation and held constant
between viewpoints.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Sequence

from .anneal import Viewpoint
from .elevation import ElevationProvider
from .errors import InvalidInput, LayerOverflow
from .geo import GeoPoint, LocalFrame, LocalPoint
from .routing import FleetSpec

# Heading changes above this count as turns in the duration estimate.
TURN_THRESHOLD_DEG = 10.0
# Duration-model constants for the per-turn delay term.
TURN_C1 = 5.0
TURN_C2 = 20.0
# Spacing of terrain samples along transit legs for the low-clearance check.
TRANSIT_SAMPLE_SPACING_M = 50.0
# Minimum 3-D separation between a capture column and another UAV's transit.
CONFLICT_SAFETY_RADIUS_M = 2.0


class Action(enum.Enum):
    TAKEOFF = "takeoff"
    TRANSIT = "transit"
    CAPTURE = "capture"
    LAND = "land"


@dataclass(frozen=True)
class Waypoint:
    geo: GeoPoint
    local: LocalPoint
    alt_amsl: float
    alt_agl: float
    yaw_deg: float
    action: Action
    roi_id: str | None = None


@dataclass(frozen=True)
class UavTrajectory:
    uav_id: int
    mission_index: int
    layer_altitude_agl: float
    waypoints: tuple[Waypoint, ...]
    estimated_duration: float
    estimated_battery: float
    path_length: float
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class RoiCapture:
    """One region's optimized viewpoint plus its score diagnostics."""

    roi_id: str
    viewpoint: Viewpoint
    best_score: float
    evals_to_best: int
    total_evals: int


@dataclass
class MissionPlan:
    frame: LocalFrame
    config: dict
    captures: list[RoiCapture]
    trajectories: list[UavTrajectory]
    metrics: dict
    missions_multiplier: int


def assign_layers(routes: Sequence, fleet: FleetSpec, a_max: float | None = None) -> list[float]:
    """Transit layer per concurrently-flying UAV slot within one wave.

    Slot j flies at ``transit_altitude + j * layer_separation``. Waves are
    temporally disjoint, so sequential missions reuse the same layers.
    """
    n = len(routes)
    layers = [fleet.transit_altitude_agl + j * fleet.layer_separation for j in range(n)]
    if a_max is not None and layers and layers[-1] > a_max:
        raise LayerOverflow(
            f"top transit layer {layers[-1]:.1f} m exceeds the altitude ceiling {a_max:.1f} m; "
            "reduce the fleet size or the layer separation"
        )
    return layers


def build_trajectory(
    route: Sequence[int],
    layer: float,
    vps: Sequence[Viewpoint],
    depot: LocalPoint,
    elevation: ElevationProvider,
    fleet: FleetSpec,
    frame: LocalFrame,
    uav_id: int = 0,
    mission_index: int = 1,
    roi_ids: Sequence[str] | None = None,
    a_min: float | None = None,
) -> UavTrajectory:
    """Assemble the waypoint loop for one route.

    Waypoint pattern: Takeoff, then per viewpoint a Transit above it at the
    layer altitude followed by the Capture, then a return Transit above the
    depot, then Land.
    """
    if not route:
        raise InvalidInput("cannot build a trajectory for an empty route")
    depot_geo = frame.to_geo(depot)
    vp_geos = [frame.to_geo(LocalPoint(vps[i].x, vps[i].y)) for i in route]
    elevs = elevation.batch_elevations([depot_geo] + vp_geos)
    depot_elev = elevs[0]
    transit_amsl = depot_elev + layer

    wps: list[Waypoint] = [
        Waypoint(depot_geo, depot, transit_amsl, layer, 0.0, Action.TAKEOFF)
    ]
    for n, (i, vp_geo, ground) in enumerate(zip(route, vp_geos, elevs[1:])):
        vp = vps[i]
        local = LocalPoint(vp.x, vp.y)
        wps.append(
            Waypoint(vp_geo, local, transit_amsl, transit_amsl - ground, vp.yaw_deg, Action.TRANSIT)
        )
        wps.append(
            Waypoint(
                vp_geo,
                local,
                ground + vp.z_agl,
                vp.z_agl,
                vp.yaw_deg,
                Action.CAPTURE,
                roi_id=roi_ids[i] if roi_ids else None,
            )
        )
    wps.append(Waypoint(depot_geo, depot, transit_amsl, layer, 0.0, Action.TRANSIT))
    wps.append(Waypoint(depot_geo, depot, depot_elev, 0.0, 0.0, Action.LAND))

    warnings = _transit_clearance_warnings(wps, transit_amsl, elevation, frame, a_min)
    duration = estimate_duration(wps, fleet.u_horizontal, vertical_speed=fleet.u_vertical)
    return UavTrajectory(
        uav_id=uav_id,
        mission_index=mission_index,
        layer_altitude_agl=layer,
        waypoints=tuple(wps),
        estimated_duration=duration,
        estimated_battery=duration / fleet.t_max,
        path_length=path_length(wps),
        warnings=tuple(warnings),
    )


def _transit_clearance_warnings(
    wps: list[Waypoint],
    transit_amsl: float,
    elevation: ElevationProvider,
    frame: LocalFrame,
    a_min: float | None,
) -> list[str]:
    """Sample transit legs every 50 m; warn where ground clearance drops
    below the minimum flight altitude (constant-AMSL transit over a rise)."""
    if a_min is None:
        return []
    samples: list[GeoPoint] = []
    spans: list[tuple[int, LocalPoint]] = []
    for a, b in zip(wps, wps[1:]):
        if a.alt_amsl != transit_amsl or b.alt_amsl != transit_amsl:
            continue
        dist = math.hypot(b.local.x - a.local.x, b.local.y - a.local.y)
        n = int(dist // TRANSIT_SAMPLE_SPACING_M)
        for s in range(1, n + 1):
            t = s * TRANSIT_SAMPLE_SPACING_M / dist
            pt = LocalPoint(a.local.x + t * (b.local.x - a.local.x), a.local.y + t * (b.local.y - a.local.y))
            samples.append(frame.to_geo(pt))
            spans.append((len(samples) - 1, pt))
    if not samples:
        return []
    grounds = elevation.batch_elevations(samples)
    warnings = []
    for (idx, pt), ground in zip(spans, grounds):
        clearance = transit_amsl - ground
        if clearance < a_min:
            warnings.append(
                f"transit clearance {clearance:.1f} m below minimum altitude {a_min:.1f} m "
                f"near ({pt.x:.0f}, {pt.y:.0f})"
            )
    return warnings


def _ground_track(wps: Sequence[Waypoint]) -> list[tuple[float, float]]:
    track: list[tuple[float, float]] = []
    for w in wps:
        p = (w.local.x, w.local.y)
        if not track or math.hypot(p[0] - track[-1][0], p[1] - track[-1][1]) > 1e-9:
            track.append(p)
    return track


def count_turns(wps: Sequence[Waypoint], threshold_deg: float = TURN_THRESHOLD_DEG) -> int:
    """Interior vertices of the horizontal ground track whose heading change
    exceeds the threshold."""
    track = _ground_track(wps)
    turns = 0
    for i in range(1, len(track) - 1):
        ax, ay = track[i - 1]
        bx, by = track[i]
        cx, cy = track[i + 1]
        h1 = math.atan2(by - ay, bx - ax)
        h2 = math.atan2(cy - by, cx - bx)
        delta = math.degrees(abs(math.remainder(h2 - h1, math.tau)))
        if delta > threshold_deg:
            turns += 1
    return turns


def _leg_components(wps: Sequence[Waypoint]) -> list[tuple[float, float]]:
    """(horizontal, vertical) metres per leg, including the takeoff climb."""
    legs: list[tuple[float, float]] = []
    if wps and wps[0].action is Action.TAKEOFF:
        legs.append((0.0, wps[0].alt_agl))
    for a, b in zip(wps, wps[1:]):
        horiz = math.hypot(b.local.x - a.local.x, b.local.y - a.local.y)
        vert = abs(b.alt_amsl - a.alt_amsl)
        legs.append((horiz, vert))
    return legs


def effective_length(wps: Sequence[Waypoint], speed: float, vertical_speed: float) -> float:
    """Polyline length with vertical travel rescaled by the speed ratio, so
    that length / horizontal speed equals the ideal constant-speed flight
    time with slower climbs."""
    ratio = speed / vertical_speed
    return sum(h + v * ratio for h, v in _leg_components(wps))


def path_length(wps: Sequence[Waypoint]) -> float:
    """Geometric 3-D path length in metres, including the takeoff climb."""
    return sum(math.hypot(h, v) for h, v in _leg_components(wps))


def estimate_duration(
    traj: "UavTrajectory | Sequence[Waypoint]",
    speed: float,
    c1: float = TURN_C1,
    c2: float = TURN_C2,
    vertical_speed: float | None = None,
) -> float:
    """Mission duration estimate: ideal constant-speed time plus a per-turn
    delay of c1 * speed / (c2 + |speed|) seconds."""
    if speed <= 0:
        raise InvalidInput("speed must be positive")
    wps = traj.waypoints if isinstance(traj, UavTrajectory) else tuple(traj)
    if len(wps) < 2:
        raise InvalidInput("need at least two waypoints")
    if vertical_speed is None:
        vertical_speed = speed
    length = effective_length(wps, speed, vertical_speed)
    turns = count_turns(wps)
    return length / speed + turns * (c1 * speed) / (c2 + abs(speed))


# -- conflict checking -------------------------------------------------------


def _point_segment_distance(px, py, ax, ay, bx, by) -> float:
    dx = bx - ax
    dy = by - ay
    den = dx * dx + dy * dy
    if den <= 0.0:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / den))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def no_conflict_check(plan: "MissionPlan | Sequence[UavTrajectory]") -> dict:
    """Verify vertical deconfliction within each mission wave.

    Checks that concurrently-flying UAVs hold distinct transit layers and
    that no capture descent column passes within the safety radius of
    another UAV's transit polyline in 3-D. Returns a report whose
    ``violations`` list is empty when the plan is conflict-free.
    """
    trajectories = plan.trajectories if isinstance(plan, MissionPlan) else plan
    violations: list[dict] = []
    waves: dict[int, list[UavTrajectory]] = {}
    for t in trajectories:
        waves.setdefault(t.mission_index, []).append(t)
    for mission, trajs in sorted(waves.items()):
        for i in range(len(trajs)):
            for j in range(len(trajs)):
                if i == j:
                    continue
                a, b = trajs[i], trajs[j]
                if i < j and abs(a.layer_altitude_agl - b.layer_altitude_agl) < 1e-9:
                    violations.append(
                        {
                            "kind": "shared_layer",
                            "mission": mission,
                            "uavs": [a.uav_id, b.uav_id],
                            "layer": a.layer_altitude_agl,
                        }
                    )
                violations.extend(_descent_conflicts(a, b, mission))
    return {"violations": violations, "checked_missions": len(waves)}


def _transit_segments(t: UavTrajectory) -> list[tuple[float, float, float, float, float]]:
    # the takeoff waypoint sits at the transit altitude by construction
    transit_amsl = t.waypoints[0].alt_amsl
    segs = []
    for a, b in zip(t.waypoints, t.waypoints[1:]):
        if a.alt_amsl == transit_amsl and b.alt_amsl == transit_amsl:
            segs.append((a.local.x, a.local.y, b.local.x, b.local.y, transit_amsl))
    return segs


def _descent_conflicts(a: UavTrajectory, b: UavTrajectory, mission: int) -> list[dict]:
    """Capture columns of ``a`` against transit segments of ``b``."""
    out = []
    r = CONFLICT_SAFETY_RADIUS_M
    segs = _transit_segments(b)
    for prev, w in zip(a.waypoints, a.waypoints[1:]):
        if w.action is not Action.CAPTURE:
            continue
        z_low = min(w.alt_amsl, prev.alt_amsl)
        z_high = max(w.alt_amsl, prev.alt_amsl)
        for sx, sy, ex, ey, sz in segs:
            if sz < z_low - r or sz > z_high + r:
                continue
            d = _point_segment_distance(w.local.x, w.local.y, sx, sy, ex, ey)
            if d < r:
                out.append(
                    {
                        "kind": "descent_through_transit",
                        "mission": mission,
                        "descending_uav": a.uav_id,
                        "transit_uav": b.uav_id,
                        "roi_id": w.roi_id,
                        "horizontal_distance": d,
                    }
                )
    return out


# -- serialization ------------------------------------------------------------


def _geo_dict(g: GeoPoint) -> dict:
    return {"lat": g.lat, "lon": g.lon}


def _local_dict(p: LocalPoint) -> dict:
    return {"x": p.x, "y": p.y}


def _viewpoint_dict(v: Viewpoint) -> dict:
    return {"x": v.x, "y": v.y, "z_agl": v.z_agl, "yaw_deg": v.yaw_deg, "z_amsl": v.z_amsl}


def _footprint_dict(plan: "MissionPlan", vp: Viewpoint) -> dict:
    """Capture rectangle in both frames; derived for display, not parsed back."""
    from .camera import CameraSpec, DEFAULT_CAMERA, footprint_ring

    cam_cfg = plan.config.get("camera") if isinstance(plan.config, dict) else None
    cam = CameraSpec(**cam_cfg) if cam_cfg else DEFAULT_CAMERA
    ring = footprint_ring(cam, vp.x, vp.y, vp.z_agl, vp.yaw_deg)
    return {
        "local": [{"x": x, "y": y} for x, y in ring],
        "geo": [_geo_dict(plan.frame.to_geo(LocalPoint(x, y))) for x, y in ring],
    }


def _waypoint_dict(w: Waypoint) -> dict:
    return {
        "geo": _geo_dict(w.geo),
        "local": _local_dict(w.local),
        "alt_amsl": w.alt_amsl,
        "alt_agl": w.alt_agl,
        "yaw_deg": w.yaw_deg,
        "action": w.action.value,
        "roi_id": w.roi_id,
    }


def plan_to_dict(plan: MissionPlan) -> dict:
    return {
        "frame": {
            "origin": _geo_dict(plan.frame.origin),
            "meters_per_deg_lat": plan.frame.meters_per_deg_lat,
            "meters_per_deg_lon": plan.frame.meters_per_deg_lon,
        },
        "config": plan.config,
        "viewpoints": [
            {
                "roi_id": c.roi_id,
                "viewpoint": _viewpoint_dict(c.viewpoint),
                "geo": _geo_dict(plan.frame.to_geo(LocalPoint(c.viewpoint.x, c.viewpoint.y))),
                "footprint": _footprint_dict(plan, c.viewpoint),
                "best_score": c.best_score,
                "evals_to_best": c.evals_to_best,
                "total_evals": c.total_evals,
            }
            for c in plan.captures
        ],
        "trajectories": [
            {
                "uav_id": t.uav_id,
                "mission_index": t.mission_index,
                "layer_altitude_agl": t.layer_altitude_agl,
                "waypoints": [_waypoint_dict(w) for w in t.waypoints],
                "estimated_duration": t.estimated_duration,
                "estimated_battery": t.estimated_battery,
                "path_length": t.path_length,
                "warnings": list(t.warnings),
            }
            for t in plan.trajectories
        ],
        "metrics": plan.metrics,
        "missions_multiplier": plan.missions_multiplier,
    }


def plan_from_dict(d: dict) -> MissionPlan:
    frame = LocalFrame(
        origin=GeoPoint(**d["frame"]["origin"]),
        meters_per_deg_lat=d["frame"]["meters_per_deg_lat"],
        meters_per_deg_lon=d["frame"]["meters_per_deg_lon"],
    )
    captures = [
        RoiCapture(
            roi_id=v["roi_id"],
            viewpoint=Viewpoint(**v["viewpoint"]),
            best_score=v["best_score"],
            evals_to_best=v["evals_to_best"],
            total_evals=v["total_evals"],
        )
        for v in d["viewpoints"]
    ]
    trajectories = [
        UavTrajectory(
            uav_id=t["uav_id"],
            mission_index=t["mission_index"],
            layer_altitude_agl=t["layer_altitude_agl"],
            waypoints=tuple(
                Waypoint(
                    geo=GeoPoint(**w["geo"]),
                    local=LocalPoint(**w["local"]),
                    alt_amsl=w["alt_amsl"],
                    alt_agl=w["alt_agl"],
                    yaw_deg=w["yaw_deg"],
                    action=Action(w["action"]),
                    roi_id=w["roi_id"],
                )
                for w in t["waypoints"]
            ),
            estimated_duration=t["estimated_duration"],
            estimated_battery=t["estimated_battery"],
            path_length=t["path_length"],
            warnings=tuple(t["warnings"]),
        )
        for t in d["trajectories"]
    ]
    return MissionPlan(
        frame=frame,
        config=d["config"],
        captures=captures,
        trajectories=trajectories,
        metrics=d["metrics"],
        missions_multiplier=d["missions_multiplier"],
    )


def plan_to_json_bytes(plan: MissionPlan) -> bytes:
    """Canonical byte serialization: key-sorted, compact separators.

    Both the CLI and the HTTP service emit exactly these bytes, so identical
    seeds and configs produce bit-identical files across interfaces.
    """
    return json.dumps(plan_to_dict(plan), sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def plan_from_json_bytes(data: bytes) -> MissionPlan:
    return plan_from_dict(json.loads(data.decode("utf-8")))
