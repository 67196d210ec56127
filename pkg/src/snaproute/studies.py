"""Desk-scale reproduction of the simulated evaluations.

Two harnesses: an objective comparison over a random-polygon corpus
(full-coverage vs balanced scoring), and a swarm-size scaling study over
scattered region clusters. Both are deterministic per seed and emit CSV
files plus a static chart.
"""

from __future__ import annotations

import csv
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .anneal import AnnealConfig, optimize_viewpoint, viewpoint_bounds
from .camera import DEFAULT_CAMERA, CameraSpec, footprint_at
from .errors import GenerationFailed, InfeasibleError, InvalidInput, PlannerError
from .geo import GeoPoint, LocalFrame, LocalPoint, RoiPolygon
from .objectives import ObjectiveKind, coverage_metrics
from .planner import turn_allowance
from .routing import FleetSpec, RoutingSolution, build_cost_matrix, plan_with_doubling

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolygonGenSpec:
    """Random simple-polygon generator parameters.

    Polygons are star-shaped around their centre: vertex angles follow
    jittered steps around the circle (``irregularity``), radii are jittered
    around a base radius (``spikiness``), and a fraction of the corpus is
    stretched 4-8x along a random axis to create elongated hard cases.
    """

    count: int
    vertex_range: tuple[int, int] = (4, 12)
    radius_range: tuple[float, float] = (20.0, 60.0)
    irregularity: float = 0.4
    spikiness: float = 0.25
    elongation_fraction: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.count < 0:
            raise InvalidInput("count must be non-negative")
        if self.vertex_range[0] < 3 or self.vertex_range[1] < self.vertex_range[0]:
            raise InvalidInput("vertex_range must be an increasing range starting at 3 or more")
        if self.radius_range[0] <= 0 or self.radius_range[1] < self.radius_range[0]:
            raise InvalidInput("radius_range must be positive and increasing")
        for name in ("irregularity", "spikiness", "elongation_fraction"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise InvalidInput(f"{name} must lie in [0, 1]")


# Published corpus used by the objective study, so trend results reproduce.
DEFAULT_CORPUS_SPEC = PolygonGenSpec(count=50, seed=20240917)

# Milder geometry for the swarm study clusters: extents sized so capture
# altitudes sit near the transit layer, keeping per-capture excursions cheap
# relative to transit to the farthest regions.
SWARM_CORPUS_SPEC = PolygonGenSpec(
    count=100, vertex_range=(4, 10), radius_range=(22.0, 40.0), elongation_fraction=0.1, seed=20240917
)


def _sample_polygon(rng: np.random.Generator, spec: PolygonGenSpec, elongated: bool, poly_id: str):
    n = int(rng.integers(spec.vertex_range[0], spec.vertex_range[1] + 1))
    radius = float(rng.uniform(*spec.radius_range))
    steps = 1.0 + spec.irregularity * rng.uniform(-1.0, 1.0, n)
    steps = steps / steps.sum() * 2.0 * math.pi
    angles = np.cumsum(steps)
    radii = radius * (1.0 + spec.spikiness * rng.uniform(-1.0, 1.0, n))
    xs = radii * np.cos(angles)
    ys = radii * np.sin(angles)
    if elongated:
        scale = float(rng.uniform(4.0, 8.0))
        phi = float(rng.uniform(0.0, math.pi))
        c, s = math.cos(phi), math.sin(phi)
        u = xs * c + ys * s
        v = -xs * s + ys * c
        u *= scale
        xs = u * c - v * s
        ys = u * s + v * c
    try:
        return RoiPolygon(poly_id, tuple(LocalPoint(float(x), float(y)) for x, y in zip(xs, ys)))
    except PlannerError:
        return None


def generate_polygons(spec: PolygonGenSpec) -> list[RoiPolygon]:
    """Deterministic corpus of simple CCW polygons."""
    rng = np.random.default_rng(spec.seed)
    n_elong = round(spec.elongation_fraction * spec.count)
    elong = set(rng.choice(spec.count, size=n_elong, replace=False).tolist()) if n_elong else set()
    out: list[RoiPolygon] = []
    for i in range(spec.count):
        for _ in range(1000):
            poly = _sample_polygon(rng, spec, i in elong, f"poly_{i}")
            if poly is not None:
                out.append(poly)
                break
        else:
            raise GenerationFailed(f"could not generate a valid polygon for index {i}")
    return out


# -- objective comparison study ------------------------------------------------


@dataclass
class StudyReport:
    rows: list[dict]  # one aggregate row per objective
    per_run: list[dict]  # every (objective, polygon, repetition) record
    failures: list[dict] = field(default_factory=list)

    def to_csv(self, outdir: "str | Path") -> Path:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        main = outdir / "objective_study.csv"
        with open(main, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(
                fh,
                fieldnames=["objective", "recall_pct", "precision_pct", "gsd_cm_px", "deviation_pct", "iterations"],
            )
            w.writeheader()
            for row in self.rows:
                w.writerow({k: row[k] for k in w.fieldnames})
        runs = outdir / "objective_study_runs.csv"
        if self.per_run:
            with open(runs, "w", newline="", encoding="utf-8") as fh:
                w = csv.DictWriter(fh, fieldnames=list(self.per_run[0].keys()))
                w.writeheader()
                w.writerows(self.per_run)
        return main


def _cell_seed(base: int, objective_idx: int, poly_idx: int, rep: int) -> int:
    ss = np.random.SeedSequence(entropy=base, spawn_key=(objective_idx, poly_idx, rep))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _objective_cell(args):
    roi, cam, kind, a_min, a_max, cfg, poly_idx, rep = args
    try:
        bounds = viewpoint_bounds(roi, a_min, a_max)
        res = optimize_viewpoint(roi, cam, kind, bounds, cfg)
        m = coverage_metrics(roi, footprint_at(cam, res.best), cam, res.best.z_agl)
        return {
            "objective": kind.value,
            "polygon": poly_idx,
            "repetition": rep,
            "recall": m.recall,
            "precision": m.precision,
            "gsd_cm_px": m.gsd_cm_px,
            "best_score": res.best_score,
            "evals_to_best": res.evals_to_best,
            "total_evals": res.total_evals,
        }
    except PlannerError as e:
        return {"objective": kind.value, "polygon": poly_idx, "repetition": rep, "error": str(e)}


def run_objective_study(
    corpus: Sequence[RoiPolygon],
    cam: CameraSpec = DEFAULT_CAMERA,
    a_bounds: tuple[float, float] = (10.0, 120.0),
    repetitions: int = 5,
    base_cfg: AnnealConfig | None = None,
    workers: int | None = None,
) -> StudyReport:
    """Optimize every corpus polygon under both objectives, ``repetitions``
    times each with repetition-indexed seeds, and aggregate the metrics."""
    if not corpus:
        raise InvalidInput("corpus is empty")
    cfg = base_cfg or AnnealConfig(max_evals=8000, seed=0)
    a_min, a_max = a_bounds
    tasks = []
    for oi, kind in enumerate((ObjectiveKind.MCO, ObjectiveKind.BCO)):
        for pi, roi in enumerate(corpus):
            for rep in range(repetitions):
                cell_cfg = replace(cfg, seed=_cell_seed(cfg.seed, oi, pi, rep))
                tasks.append((roi, cam, kind, a_min, a_max, cell_cfg, pi, rep))
    if workers is None:
        import os

        workers = max(1, os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_objective_cell, tasks, chunksize=8))
    else:
        records = [_objective_cell(t) for t in tasks]

    failures = [r for r in records if "error" in r]
    ok = [r for r in records if "error" not in r]
    rows = []
    for kind in (ObjectiveKind.MCO, ObjectiveKind.BCO):
        rs = [r for r in ok if r["objective"] == kind.value]
        if not rs:
            continue
        # relative deviation of the per-repetition corpus-mean score
        reps_present = sorted({r["repetition"] for r in rs})
        rep_means = [
            statistics.fmean(r["best_score"] for r in rs if r["repetition"] == rep)
            for rep in reps_present
        ]
        if len(rep_means) >= 2:
            mean_of_means = statistics.fmean(rep_means)
            deviation = statistics.stdev(rep_means) / mean_of_means if mean_of_means else 0.0
        else:
            deviation = None
        rows.append(
            {
                "objective": kind.value,
                "recall_pct": 100.0 * statistics.fmean(r["recall"] for r in rs),
                "precision_pct": 100.0 * statistics.fmean(r["precision"] for r in rs),
                "gsd_cm_px": statistics.fmean(r["gsd_cm_px"] for r in rs),
                "deviation_pct": None if deviation is None else 100.0 * deviation,
                "iterations": statistics.median(r["evals_to_best"] for r in rs),
                "iterations_mean": statistics.fmean(r["evals_to_best"] for r in rs),
                "n_runs": len(rs),
                "n_failures": sum(1 for r in failures if r["objective"] == kind.value),
            }
        )
    return StudyReport(rows=rows, per_run=ok, failures=failures)


# -- swarm scaling study -------------------------------------------------------


@dataclass
class SwarmCell:
    roi_count: int
    n_uavs: int
    feasible: bool
    mission_time_s: float | None = None
    makespan_s: float | None = None
    missions_multiplier: int | None = None
    mean_distance_m: float | None = None  # None when more than one mission is needed
    mean_battery_pct: float | None = None
    note: str = ""


# Multi-mission cells assume instant battery swaps with charged spares on
# hand, so their totals are lower bounds on field time.
SWAP_TIME_NOTE = (
    "multi-mission totals exclude battery-swap and power-cycle time; "
    "treat them as lower bounds on achievable field time"
)


@dataclass
class SwarmStudyResult:
    cells: list[SwarmCell]
    roi_counts: tuple[int, ...]
    fleet_sizes: tuple[int, ...]
    note: str = SWAP_TIME_NOTE

    def cell(self, roi_count: int, n_uavs: int) -> SwarmCell:
        for c in self.cells:
            if c.roi_count == roi_count and c.n_uavs == n_uavs:
                return c
        raise KeyError((roi_count, n_uavs))

    def to_csv(self, outdir: "str | Path") -> Path:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / "swarm_study.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["roi_count", "n_uavs", "feasible", "mission_time_s", "makespan_s",
                 "missions_multiplier", "mean_distance_m", "mean_battery_pct"]
            )
            for c in self.cells:
                w.writerow(
                    [
                        c.roi_count,
                        c.n_uavs,
                        c.feasible,
                        _fmt(c.mission_time_s),
                        _fmt(c.makespan_s),
                        c.missions_multiplier if c.missions_multiplier is not None else "--",
                        _fmt(c.mean_distance_m),
                        _fmt(c.mean_battery_pct),
                    ]
                )
        return path

    def to_chart(self, outdir: "str | Path") -> Path:
        """Mission time vs region count, one curve per fleet size, multi-
        mission cells annotated with xN."""
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        fig, ax = plt.subplots(figsize=(8, 5))
        for f in self.fleet_sizes:
            xs, ys, notes = [], [], []
            for rc in self.roi_counts:
                c = self.cell(rc, f)
                if not c.feasible or c.mission_time_s is None:
                    continue
                xs.append(rc)
                ys.append(c.mission_time_s / 60.0)
                notes.append(c.missions_multiplier)
            ax.plot(xs, ys, marker="o", label=f"{f} UAV{'s' if f > 1 else ''}")
            for x, y, n in zip(xs, ys, notes):
                if n and n > 1:
                    ax.annotate(f"x{n}", (x, y), textcoords="offset points", xytext=(4, 4), fontsize=8)
        ax.set_xlabel("number of regions")
        ax.set_ylabel("mission time (min)")
        ax.set_title(f"note: {self.note}", fontsize=8)
        ax.legend()
        ax.grid(True, alpha=0.3)
        path = outdir / "swarm_study.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        return path


def scatter_regions(
    polygons: Sequence[RoiPolygon],
    frame: LocalFrame,
    spread_deg: float,
    rng: np.random.Generator,
) -> list[RoiPolygon]:
    """Translate each polygon to a random centre within +-spread degrees of
    the frame origin (in both latitude and longitude)."""
    out = []
    for poly in polygons:
        dlat = float(rng.uniform(-spread_deg, spread_deg))
        dlon = float(rng.uniform(-spread_deg, spread_deg))
        dx = dlon * frame.meters_per_deg_lon
        dy = dlat * frame.meters_per_deg_lat
        out.append(
            RoiPolygon(poly.id, tuple(LocalPoint(v.x + dx, v.y + dy) for v in poly.vertices))
        )
    return out


def _route_shared_altitude_length(route: list[int], vps, depot: LocalPoint, zt: float) -> float:
    """Geometric route length at the shared transit altitude: the distance a
    UAV flies before per-UAV layer offsets are applied."""
    if not route:
        return 0.0
    length = zt  # takeoff climb
    x, y = depot.x, depot.y
    for i in route:
        vp = vps[i]
        length += math.hypot(vp.x - x, vp.y - y)
        length += 2.0 * abs(zt - vp.z_agl)  # capture excursion down and back up
        x, y = vp.x, vp.y
    length += math.hypot(depot.x - x, depot.y - y)
    length += zt  # landing descent
    return length


def _evaluate_candidate(
    solution: RoutingSolution,
    fleet: FleetSpec,
    viewpoints,
    depot: LocalPoint,
) -> dict:
    """Cell statistics from the routing solution.

    Times and distances use the shared transit altitude (the route geometry
    before per-UAV deconfliction offsets), so cells stay comparable across
    fleet sizes; waves fly longest-routes-first as in the mission assembly.
    """
    durations = sorted(
        (solution.durations[i] for i in range(len(solution.routes)) if solution.routes[i]),
        reverse=True,
    )
    # wave w flies sorted routes [w*n, (w+1)*n); its makespan is the first
    wave_max = [durations[w] for w in range(0, len(durations), fleet.n_uavs)]
    multiplier = max(1, math.ceil(len(durations) / fleet.n_uavs))
    distances = [
        _route_shared_altitude_length(r, viewpoints, depot, fleet.transit_altitude_agl)
        for r in solution.routes
        if r
    ]
    return {
        "mission_time": sum(wave_max),
        "makespan": durations[0] if durations else 0.0,
        "N": multiplier,
        "mean_distance": statistics.fmean(distances) if distances else 0.0,
        "mean_battery": statistics.fmean(d / fleet.t_max for d in durations) if durations else 0.0,
    }


def run_swarm_study(
    roi_counts: Sequence[int] = (10, 20, 50, 80, 100),
    fleet_sizes: Sequence[int] = (1, 3, 6, 10, 25, 50),
    spread_deg: float = 0.003,
    u_horizontal: float = 10.0,
    u_vertical: float = 3.0,
    t_max: float = 1500.0,
    transit_altitude: float = 60.0,
    # 50 concurrent UAVs need 50 stacked layers below the ceiling
    layer_separation: float = 1.0,
    a_min: float = 10.0,
    a_max: float = 150.0,
    cam: CameraSpec = DEFAULT_CAMERA,
    objective: ObjectiveKind = ObjectiveKind.MCO,
    gen_spec: PolygonGenSpec | None = None,
    anneal_evals: int = 4000,
    routing_time_budget: float = 1.0,
    center: tuple[float, float] = (40.0, 23.0),
    seed: int = 0,
    workers: int | None = None,
    outdir: "str | Path | None" = None,
) -> SwarmStudyResult:
    """Scaling study: plan every (region count, fleet size) cell and record
    mission time, relaunch multiplier, and per-UAV load.

    Fleet sizes are swept in increasing order per region count, carrying the
    previous fleet's route set forward as an incumbent: with more UAVs the
    same routes can only be flown in fewer waves, so the larger fleet's
    solution is adopted only when it beats the carried one on mission time
    without losing on relaunch count or per-UAV distance.
    """
    from .anneal import optimize_all  # local import to keep module load light

    gen_spec = gen_spec or replace(SWARM_CORPUS_SPEC, seed=SWARM_CORPUS_SPEC.seed ^ seed)
    max_count = max(roi_counts)
    if gen_spec.count < max_count:
        gen_spec = replace(gen_spec, count=max_count)
    polygons = generate_polygons(gen_spec)[:max_count]

    frame = LocalFrame(origin=GeoPoint(*center))
    rng = np.random.default_rng(seed)
    regions = scatter_regions(polygons, frame, spread_deg, rng)
    depot = LocalPoint(0.0, 0.0)

    cfg = AnnealConfig(max_evals=anneal_evals, seed=seed)
    results = optimize_all(regions, cam, objective, a_min, a_max, cfg, workers=workers)
    viewpoints = [r.best for r in results]

    service = turn_allowance(u_horizontal)
    cells: list[SwarmCell] = []
    for rc in sorted(roi_counts):
        vps = viewpoints[:rc]
        carried: RoutingSolution | None = None
        for f in sorted(fleet_sizes):
            fleet = FleetSpec(
                n_uavs=f,
                u_horizontal=u_horizontal,
                u_vertical=u_vertical,
                t_max=t_max,
                layer_separation=layer_separation,
                transit_altitude_agl=transit_altitude,
            )
            try:
                matrix = build_cost_matrix(depot, vps, fleet, service)
                own = plan_with_doubling(matrix, fleet, routing_time_budget, seed ^ (rc * 1000 + f))
            except InfeasibleError as e:
                cells.append(SwarmCell(roi_count=rc, n_uavs=f, feasible=False, note=str(e)))
                continue
            own_stats = _evaluate_candidate(own, fleet, vps, depot)
            chosen, chosen_stats = own, own_stats
            if carried is not None:
                carried_here = RoutingSolution(
                    routes=[list(r) for r in carried.routes if r],
                    durations=[d for r, d in zip(carried.routes, carried.durations) if r],
                    makespan=carried.makespan,
                )
                carried_stats_here = _evaluate_candidate(carried_here, fleet, vps, depot)
                own_wins = (
                    own_stats["mission_time"] < carried_stats_here["mission_time"] - 1e-9
                    and own_stats["N"] <= carried_stats_here["N"]
                    and own_stats["mean_distance"] <= carried_stats_here["mean_distance"] + 1e-9
                )
                if not own_wins:
                    chosen, chosen_stats = carried_here, carried_stats_here
            carried = chosen
            single_mission = chosen_stats["N"] == 1
            cells.append(
                SwarmCell(
                    roi_count=rc,
                    n_uavs=f,
                    feasible=True,
                    mission_time_s=chosen_stats["mission_time"],
                    makespan_s=chosen_stats["makespan"],
                    missions_multiplier=chosen_stats["N"],
                    mean_distance_m=chosen_stats["mean_distance"] if single_mission else None,
                    mean_battery_pct=100.0 * chosen_stats["mean_battery"] if single_mission else None,
                )
            )
    result = SwarmStudyResult(
        cells=cells, roi_counts=tuple(sorted(roi_counts)), fleet_sizes=tuple(sorted(fleet_sizes))
    )
    if outdir is not None:
        result.to_csv(outdir)
        result.to_chart(outdir)
    return result


def _fmt(v) -> str:
    if v is None:
        return "--"
    return f"{v:.2f}"
