"""Problem definition: JSON config parsing and GeoJSON region ingestion."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .anneal import AnnealConfig
from .camera import DEFAULT_CAMERA, CameraSpec
from .errors import InvalidInput, ValidationError
from .objectives import ObjectiveKind
from .routing import FleetSpec

log = logging.getLogger(__name__)


@dataclass
class ProblemSpec:
    """Validated planning problem, ready for the pipeline."""

    rois_geo: list[list[tuple[float, float]]]  # (lat, lon) rings, open
    roi_ids: list[str]
    depot: tuple[float, float]  # (lat, lon)
    a_min: float
    a_max: float
    objective: ObjectiveKind
    camera: CameraSpec
    fleet: FleetSpec
    elevation: dict | None
    anneal: AnnealConfig
    seed: int | None
    service_time: float = 0.0
    routing_time_budget: float = 2.0
    workers: int | None = None
    raw: dict = field(default_factory=dict)


def _err(errors, field_name, message, feature_index=None):
    e = {"field": field_name, "message": message}
    if feature_index is not None:
        e["feature_index"] = feature_index
    errors.append(e)


def _parse_rois(obj, errors) -> tuple[list[list[tuple[float, float]]], list[str]]:
    rings: list[list[tuple[float, float]]] = []
    ids: list[str] = []
    if not isinstance(obj, dict) or obj.get("type") != "FeatureCollection":
        _err(errors, "rois", "rois must be a GeoJSON FeatureCollection")
        return rings, ids
    features = obj.get("features")
    if not isinstance(features, list) or not features:
        _err(errors, "rois", "FeatureCollection has no features")
        return rings, ids
    for idx, feat in enumerate(features):
        geom = feat.get("geometry") or {}
        if geom.get("type") != "Polygon":
            _err(errors, "rois", f"feature {idx}: geometry must be a Polygon, got {geom.get('type')!r}", idx)
            continue
        coords = geom.get("coordinates")
        if not isinstance(coords, list) or not coords:
            _err(errors, "rois", f"feature {idx}: polygon has no rings", idx)
            continue
        if len(coords) > 1:
            _err(errors, "rois", f"feature {idx}: polygons with holes are not supported", idx)
            continue
        ring = coords[0]
        pts: list[tuple[float, float]] = []
        bad = False
        for v in ring:
            if not (isinstance(v, (list, tuple)) and len(v) >= 2):
                _err(errors, "rois", f"feature {idx}: malformed coordinate {v!r}", idx)
                bad = True
                break
            lon, lat = float(v[0]), float(v[1])
            if not (-90 <= lat <= 90 and -180 <= lon <= 180):
                _err(errors, "rois", f"feature {idx}: coordinate ({lat}, {lon}) out of range", idx)
                bad = True
                break
            pts.append((lat, lon))
        if bad:
            continue
        if len(pts) >= 2 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) < 3:
            _err(errors, "rois", f"feature {idx}: polygon needs at least 3 distinct vertices", idx)
            continue
        props = feat.get("properties") or {}
        roi_id = str(props.get("id", feat.get("id", f"roi_{idx}")))
        rings.append(pts)
        ids.append(roi_id)
    # duplicate ids would break the capture-to-region bookkeeping
    seen = set()
    for i, roi_id in enumerate(ids):
        if roi_id in seen:
            _err(errors, "rois", f"duplicate region id {roi_id!r}", i)
        seen.add(roi_id)
    return rings, ids


def parse_problem(config: dict) -> ProblemSpec:
    """Validate a problem config dict; raises ValidationError with the full
    machine-readable error list on failure."""
    errors: list[dict] = []
    if not isinstance(config, dict):
        raise ValidationError([{"field": "", "message": "config must be a JSON object"}])

    rois_obj = config.get("rois")
    if isinstance(rois_obj, str):
        try:
            rois_obj = json.loads(Path(rois_obj).read_text(encoding="utf-8"))
        except OSError as e:
            _err(errors, "rois", f"cannot read rois file: {e}")
            rois_obj = None
        except ValueError as e:
            _err(errors, "rois", f"rois file is not valid JSON: {e}")
            rois_obj = None
    rings, ids = ([], []) if rois_obj is None else _parse_rois(rois_obj, errors)

    depot_obj = config.get("depot")
    depot = None
    if not (isinstance(depot_obj, dict) and "lat" in depot_obj and "lon" in depot_obj):
        _err(errors, "depot", "depot must be an object with lat and lon")
    else:
        depot = (float(depot_obj["lat"]), float(depot_obj["lon"]))

    a_min = float(config.get("a_min", 10.0))
    a_max = float(config.get("a_max", 120.0))
    if a_min <= 0:
        _err(errors, "a_min", "minimum altitude must be positive")
    if a_min >= a_max:
        _err(errors, "a_max", f"altitude bounds [{a_min}, {a_max}] are empty")

    objective = None
    obj_name = str(config.get("objective", "MCO")).upper()
    try:
        objective = ObjectiveKind(obj_name)
    except ValueError:
        _err(errors, "objective", f"objective must be MCO or BCO, got {obj_name!r}")

    camera = DEFAULT_CAMERA
    if "camera" in config:
        try:
            camera = CameraSpec(**config["camera"])
        except (TypeError, InvalidInput) as e:
            _err(errors, "camera", f"invalid camera spec: {e}")

    fleet = None
    try:
        transit = float(config.get("transit_altitude", min(max(60.0, a_min), a_max)))
        fleet = FleetSpec(
            n_uavs=int(config.get("n_uavs", 1)),
            u_horizontal=float(config.get("u_horizontal", 10.0)),
            u_vertical=float(config.get("u_vertical", 3.0)),
            t_max=float(config.get("t_max", 1500.0)),
            layer_separation=float(config.get("layer_separation", 3.0)),
            transit_altitude_agl=transit,
        )
        if not (a_min <= transit <= a_max):
            log.warning("transit altitude %.1f m outside the flight band [%s, %s]", transit, a_min, a_max)
    except (TypeError, ValueError, InvalidInput) as e:
        _err(errors, "fleet", f"invalid fleet parameters: {e}")

    anneal_cfg = None
    try:
        anneal_kwargs = dict(config.get("anneal", {}))
        anneal_kwargs.setdefault("max_evals", 8000)
        anneal_kwargs.pop("seed", None)
        anneal_cfg = AnnealConfig(seed=0, **anneal_kwargs)
    except (TypeError, InvalidInput) as e:
        _err(errors, "anneal", f"invalid annealing config: {e}")

    seed = config.get("seed")
    if seed is not None:
        try:
            seed = int(seed)
            if not (0 <= seed < 2**64):
                raise ValueError
        except (TypeError, ValueError):
            _err(errors, "seed", "seed must be an unsigned 64-bit integer")

    service_time = float(config.get("service_time", 0.0))
    if service_time < 0:
        _err(errors, "service_time", "service time must be non-negative")

    elevation = config.get("elevation")
    if elevation is not None and not isinstance(elevation, dict):
        _err(errors, "elevation", "elevation must be a provider config object")

    if errors:
        raise ValidationError(errors)

    return ProblemSpec(
        rois_geo=rings,
        roi_ids=ids,
        depot=depot,
        a_min=a_min,
        a_max=a_max,
        objective=objective,
        camera=camera,
        fleet=fleet,
        elevation=elevation,
        anneal=anneal_cfg,
        seed=seed,
        service_time=service_time,
        routing_time_budget=float(config.get("routing_time_budget", 2.0)),
        workers=config.get("workers"),
        raw=dict(config),
    )


def load_problem(path: "str | Path") -> ProblemSpec:
    try:
        config = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ValidationError([{"field": "", "message": f"cannot read config: {e}"}])
    except ValueError as e:
        raise ValidationError([{"field": "", "message": f"config is not valid JSON: {e}"}])
    return parse_problem(config)
