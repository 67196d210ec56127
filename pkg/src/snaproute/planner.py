"""End-to-end pipeline: viewpoints first, then routes, then trajectories."""

from __future__ import annotations

import logging
import random
from dataclasses import replace

from .anneal import optimize_all
from .camera import footprint_at
from .config import ProblemSpec
from .elevation import make_provider
from .errors import PlannerError, ValidationError
from .geo import GeoPoint, LocalFrame, LocalPoint, RoiPolygon, make_frame
from .mission import (
    MissionPlan,
    RoiCapture,
    TURN_C1,
    TURN_C2,
    assign_layers,
    build_trajectory,
    no_conflict_check,
)
from .objectives import coverage_metrics
from .routing import build_cost_matrix, mission_waves, plan_with_doubling

log = logging.getLogger(__name__)

# Safety margin retries when layered trajectories land above the matrix model.
_MAX_MARGIN_RETRIES = 4


def turn_allowance(speed: float) -> float:
    """Per-visit service margin covering the turn delay of the duration model."""
    return (TURN_C1 * speed) / (TURN_C2 + abs(speed))


def build_regions(spec: ProblemSpec) -> tuple[LocalFrame, list[RoiPolygon], LocalPoint]:
    """Project the geographic regions into the shared local frame."""
    geo_rings = [[GeoPoint(lat, lon) for lat, lon in ring] for ring in spec.rois_geo]
    frame = make_frame(geo_rings)
    errors = []
    rois = []
    for idx, (ring, roi_id) in enumerate(zip(geo_rings, spec.roi_ids)):
        try:
            rois.append(
                RoiPolygon(
                    id=roi_id,
                    vertices=tuple(frame.to_local(g) for g in ring),
                    source=tuple(ring),
                )
            )
        except PlannerError as e:
            errors.append({"field": "rois", "message": f"feature {idx}: {e}", "feature_index": idx})
    if errors:
        raise ValidationError(errors)
    depot = frame.to_local(GeoPoint(*spec.depot))
    return frame, rois, depot


def plan(spec: ProblemSpec) -> MissionPlan:
    """Compute the full mission plan for a validated problem spec.

    Deterministic for a given seed; when the problem omits the seed, one is
    drawn and echoed in the plan's config so the run can be replayed.
    """
    seed = spec.seed if spec.seed is not None else random.SystemRandom().getrandbits(48)
    frame, rois, depot = build_regions(spec)
    provider = make_provider(spec.elevation, frame)

    anneal_cfg = replace(spec.anneal, seed=seed)
    results = optimize_all(
        rois, spec.camera, spec.objective, spec.a_min, spec.a_max, anneal_cfg, workers=spec.workers
    )

    vp_geos = [frame.to_geo(LocalPoint(r.best.x, r.best.y)) for r in results]
    grounds = provider.batch_elevations(vp_geos)
    viewpoints = [
        replace(r.best, z_amsl=ground + r.best.z_agl) for r, ground in zip(results, grounds)
    ]
    captures = [
        RoiCapture(
            roi_id=roi.id,
            viewpoint=vp,
            best_score=r.best_score,
            evals_to_best=r.evals_to_best,
            total_evals=r.total_evals,
        )
        for roi, vp, r in zip(rois, viewpoints, results)
    ]

    per_roi = []
    for roi, r in zip(rois, results):
        m = coverage_metrics(roi, footprint_at(spec.camera, r.best), spec.camera, r.best.z_agl)
        per_roi.append(
            {
                "roi_id": roi.id,
                "recall": m.recall,
                "precision": m.precision,
                "intersection_area": m.intersection_area,
                "roi_area": m.roi_area,
                "capture_area": m.capture_area,
                "gsd_cm_px": m.gsd_cm_px,
                "best_score": r.best_score,
                "evals_to_best": r.evals_to_best,
                "total_evals": r.total_evals,
            }
        )

    service = spec.service_time + turn_allowance(spec.fleet.u_horizontal)
    trajectories, solution = _route_and_assemble(
        spec, frame, rois, depot, viewpoints, provider, service, seed
    )

    conflicts = no_conflict_check(trajectories)
    wave_makespans: dict[int, float] = {}
    for t in trajectories:
        wave_makespans[t.mission_index] = max(
            wave_makespans.get(t.mission_index, 0.0), t.estimated_duration
        )
    mission_time = sum(wave_makespans.values())

    metrics = {
        "per_roi": per_roi,
        "aggregate": {
            "n_regions": len(rois),
            "mean_recall": _mean(m["recall"] for m in per_roi),
            "mean_precision": _mean(m["precision"] for m in per_roi),
            "mean_gsd_cm_px": _mean(m["gsd_cm_px"] for m in per_roi),
            "makespan_s": max((t.estimated_duration for t in trajectories), default=0.0),
            "mission_time_s": mission_time,
            "total_duration_s": sum(t.estimated_duration for t in trajectories),
            "mean_uav_distance_m": _mean(t.path_length for t in trajectories),
            "mean_uav_battery": _mean(t.estimated_battery for t in trajectories),
            "missions_multiplier": solution.missions_multiplier,
            "n_waves": len(wave_makespans),
        },
        "conflicts": conflicts,
        "elevation_fallback_used": bool(getattr(provider, "fallback_used", False)),
        "doubling_trace": solution.doubling_trace,
    }

    echo = dict(spec.raw)
    echo["seed"] = seed
    return MissionPlan(
        frame=frame,
        config=echo,
        captures=captures,
        trajectories=trajectories,
        metrics=metrics,
        missions_multiplier=solution.missions_multiplier,
    )


def assemble_trajectories(
    solution, fleet, viewpoints, depot, provider, frame, roi_ids, a_min, a_max
) -> list:
    """Build layered trajectories for every non-empty route of a solution.

    Within each wave, routes are sorted longest-first, so the tightest route
    flies the base transit layer and the per-UAV offsets land on routes with
    slack.
    """
    waves = mission_waves(solution, fleet.n_uavs)
    trajectories = []
    for w, wave in enumerate(waves):
        layers = assign_layers([r for _, r in wave], fleet, a_max=a_max)
        for (slot, route), layer in zip(wave, layers):
            trajectories.append(
                build_trajectory(
                    route,
                    layer,
                    viewpoints,
                    depot,
                    provider,
                    fleet,
                    frame,
                    uav_id=slot,
                    mission_index=w + 1,
                    roi_ids=roi_ids,
                    a_min=a_min,
                )
            )
    return trajectories


def _route_and_assemble(spec, frame, rois, depot, viewpoints, provider, service, seed):
    """Route with the battery budget, then build layered trajectories.

    The cost matrix ignores per-UAV layer offsets, so a trajectory estimate
    can exceed the battery budget by a small margin in rare cases; when that
    happens the routing is repeated with a tightened effective budget.
    """
    margin = 0.0
    roi_ids = [r.id for r in rois]
    for attempt in range(_MAX_MARGIN_RETRIES):
        fleet = spec.fleet
        if margin > 0.0:
            fleet = replace(fleet, t_max=fleet.t_max - margin)
        matrix = build_cost_matrix(depot, viewpoints, fleet, service_time=service)
        solution = plan_with_doubling(matrix, fleet, spec.routing_time_budget, seed)
        trajectories = assemble_trajectories(
            solution, spec.fleet, viewpoints, depot, provider, frame, roi_ids, spec.a_min, spec.a_max
        )
        excess = max((t.estimated_duration - spec.fleet.t_max for t in trajectories), default=0.0)
        if excess <= 0.0:
            return trajectories, solution
        log.info("trajectory exceeded battery by %.1f s; tightening budget (attempt %d)", excess, attempt + 1)
        margin += excess + 1.0
    raise PlannerError("could not fit layered trajectories within the battery budget")


def _mean(values) -> float:
    vals = list(values)
    return sum(vals) / len(vals) if vals else 0.0
