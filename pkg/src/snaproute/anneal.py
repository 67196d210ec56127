"""Per-region viewpoint optimization over [x, y, z, yaw].

The global phase is a generalized simulated annealing scheme: candidate
moves are drawn from a heavy-tailed Cauchy-like visiting distribution whose
width follows the visiting temperature schedule, uphill moves are accepted
by a generalized Metropolis rule, and the schedule restarts from a random
state once the temperature falls below ``restart_temp_ratio`` of the initial
temperature. Whenever the global phase improves the incumbent, a bounded
Nelder-Mead refinement polishes it. Every objective evaluation from both
phases is counted in one ledger, so results are reproducible and the
reported convergence index covers the sum of the two phases.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .camera import CameraSpec, footprint_ring
from .errors import DegenerateGeometry, InvalidInput, OptimizationFailed
from .geo import LocalPoint, RoiPolygon, intersection_area, ring_area
from .objectives import FULL_COVERAGE_EPS, ObjectiveKind

Bounds4 = tuple[tuple[float, float], tuple[float, float], tuple[float, float], tuple[float, float]]

# Above this magnitude, visiting-distribution tails are clamped to keep the
# fold-back into bounds numerically sane.
_TAIL_LIMIT = 1e8
# Per-refinement cap on Nelder-Mead evaluations.
_LOCAL_SEARCH_BUDGET = 500


@dataclass(frozen=True)
class Viewpoint:
    """Camera pose: local position, altitude above ground, heading."""

    x: float
    y: float
    z_agl: float
    yaw_deg: float
    z_amsl: float | None = None

    def __post_init__(self):
        if not all(map(math.isfinite, (self.x, self.y, self.z_agl, self.yaw_deg))):
            raise InvalidInput("viewpoint fields must be finite")
        if not (0.0 <= self.yaw_deg < 180.0):
            raise InvalidInput(f"yaw {self.yaw_deg} outside [0, 180)")


@dataclass(frozen=True)
class AnnealConfig:
    initial_temp: float = 5230.0
    visit_param: float = 2.62
    accept_param: float = -5.0
    restart_temp_ratio: float = 2e-5
    max_evals: int = 20000
    seed: int = 0

    def __post_init__(self):
        if self.initial_temp <= 0:
            raise InvalidInput("initial_temp must be positive")
        if not (1.0 < self.visit_param < 3.0):
            raise InvalidInput("visit_param must lie in (1, 3)")
        if self.accept_param >= 1.0:
            raise InvalidInput("accept_param must be below 1")
        if self.max_evals < 100:
            raise InvalidInput("max_evals must be at least 100")
        if not (0 <= self.seed < 2**64):
            raise InvalidInput("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class OptResult:
    best: Viewpoint
    best_score: float
    evals_to_best: int
    total_evals: int
    # (evaluation index, best score so far) recorded at each strict improvement
    best_history: tuple[tuple[int, float], ...] = ()


def viewpoint_bounds(roi: RoiPolygon, a_min: float, a_max: float) -> Bounds4:
    """Search box: region bounding box, altitude band, half-turn of yaw."""
    if a_min >= a_max:
        raise InvalidInput(f"altitude bounds [{a_min}, {a_max}] are empty")
    if a_min <= 0:
        raise InvalidInput("minimum altitude must be positive")
    x0, y0, x1, y1 = roi.bbox()
    return ((x0, x1), (y0, y1), (a_min, a_max), (0.0, 180.0))


def make_pose_objective(
    roi: RoiPolygon, cam: CameraSpec, kind: ObjectiveKind
) -> Callable[[float, float, float, float], float]:
    """Score of a pose against one region; shares the exact clipping path
    used by the public scoring functions."""
    roi_ring = roi.ring
    roi_area = roi.area
    if roi_area <= 0:
        raise DegenerateGeometry(f"region {roi.id} has zero area")
    is_mco = kind is ObjectiveKind.MCO

    def evaluate(x: float, y: float, z: float, yaw: float) -> float:
        fp = footprint_ring(cam, x, y, z, yaw)
        capture_area = abs(ring_area(fp))
        if capture_area <= 0.0:
            return 0.0
        inter = intersection_area(roi_ring, fp)
        if is_mco:
            ratio = inter / roi_area
            if ratio < 1.0 - FULL_COVERAGE_EPS:
                return ratio
            return 1.0 + 1.0 / capture_area
        return inter / (roi_area + capture_area - inter)

    return evaluate


class _EvalLedger:
    """Counts evaluations and tracks the best candidate ever seen.

    Ties keep the first-found candidate, so results are stable under the
    determinism guarantee. Raises ``_BudgetExhausted`` once ``max_evals``
    evaluations have been spent.
    """

    def __init__(self, fn, bounds: Bounds4, max_evals: int):
        self._fn = fn
        self._bounds = bounds
        self.max_evals = max_evals
        self.total_evals = 0
        self.best_x: np.ndarray | None = None
        self.best_score = -math.inf
        self.evals_to_best = 0
        self.history: list[tuple[int, float]] = []

    def __call__(self, x) -> float:
        if self.total_evals >= self.max_evals:
            raise _BudgetExhausted
        xc = np.asarray(x, dtype=float)
        for d, (lo, hi) in enumerate(self._bounds):
            if xc[d] < lo - 1e-9 or xc[d] > hi + 1e-9:
                raise InvalidInput(f"candidate left the search box in dimension {d}")
            xc[d] = min(max(xc[d], lo), hi)
        s = float(self._fn(xc[0], xc[1], xc[2], xc[3]))
        self.total_evals += 1
        if s > self.best_score:
            self.best_score = s
            self.best_x = xc.copy()
            self.evals_to_best = self.total_evals
            self.history.append((self.total_evals, s))
        return s


class _BudgetExhausted(Exception):
    pass


class _VisitingSampler:
    """Heavy-tailed visiting moves of the generalized annealing scheme."""

    def __init__(self, visit_param: float, rng: np.random.Generator):
        qv = visit_param
        self.qv = qv
        self.rng = rng
        factor2 = math.exp((4.0 - qv) * math.log(qv - 1.0))
        factor3 = math.exp((2.0 - qv) * math.log(2.0) / (qv - 1.0))
        self.factor4p = math.sqrt(math.pi) * factor2 / (factor3 * (3.0 - qv))
        factor5 = 1.0 / (qv - 1.0) - 0.5
        d1 = 2.0 - factor5
        self.factor6 = (
            math.pi * (1.0 - factor5) / math.sin(math.pi * (1.0 - factor5)) / math.exp(gammaln(d1))
        )

    def displacements(self, temperature: float, n: int) -> np.ndarray:
        qv = self.qv
        x = self.rng.standard_normal(n)
        y = self.rng.standard_normal(n)
        factor1 = math.exp(math.log(temperature) / (qv - 1.0))
        factor4 = self.factor4p * factor1
        x *= math.exp(-(qv - 1.0) * math.log(self.factor6 / factor4) / (3.0 - qv))
        den = np.exp((qv - 1.0) * np.log(np.fabs(y)) / (3.0 - qv))
        visit = x / den
        big = np.fabs(visit) > _TAIL_LIMIT
        if big.any():
            visit[big] = np.sign(visit[big]) * _TAIL_LIMIT * self.rng.uniform(size=int(big.sum()))
        return visit


def _fold_into_bounds(x: np.ndarray, lower: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Wrap coordinates back into the box. Yaw's [0, 180] span makes this a
    true circular wrap for the heading dimension."""
    a = np.fmod(x - lower, span) + span
    return np.fmod(a, span) + lower


def _initial_pose(roi: RoiPolygon, bounds: Bounds4) -> np.ndarray:
    c = roi.centroid()
    z0 = 0.5 * (bounds[2][0] + bounds[2][1])
    return np.array([c.x, c.y, z0, 0.0])


def optimize_viewpoint(
    roi: RoiPolygon,
    cam: CameraSpec,
    objective: ObjectiveKind,
    bounds: Bounds4,
    cfg: AnnealConfig,
) -> OptResult:
    """Globally optimize one viewpoint within ``bounds``.

    Deterministic for a fixed config: two runs with the same seed produce
    bit-identical results.
    """
    if not all(hi > lo for lo, hi in bounds):
        raise InvalidInput("search box has zero volume")
    # anneal in region-relative coordinates: identical regions at different
    # offsets then follow identical search trajectories
    sx = 0.5 * (bounds[0][0] + bounds[0][1])
    sy = 0.5 * (bounds[1][0] + bounds[1][1])
    roi = RoiPolygon(roi.id, tuple(LocalPoint(v.x - sx, v.y - sy) for v in roi.vertices))
    bounds = (
        (bounds[0][0] - sx, bounds[0][1] - sx),
        (bounds[1][0] - sy, bounds[1][1] - sy),
        bounds[2],
        bounds[3],
    )
    lower = np.array([b[0] for b in bounds])
    upper = np.array([b[1] for b in bounds])
    span = upper - lower

    rng = np.random.default_rng(cfg.seed)
    sampler = _VisitingSampler(cfg.visit_param, rng)
    ledger = _EvalLedger(make_pose_objective(roi, cam, objective), bounds, cfg.max_evals)

    qv = cfg.visit_param
    qa = cfg.accept_param
    t1 = math.exp((qv - 1.0) * math.log(2.0)) - 1.0
    dim = 4

    def anneal() -> None:
        current = _initial_pose(roi, bounds)
        current_e = -ledger(current)
        step = 0
        stale_chains = 0
        while True:
            step += 1
            t2 = math.exp((qv - 1.0) * math.log(step + 1.0)) - 1.0
            temperature = cfg.initial_temp * t1 / t2
            if temperature / cfg.initial_temp < cfg.restart_temp_ratio:
                # schedule restart: fresh temperature, random state
                step = 0
                current = lower + rng.uniform(size=dim) * span
                current_e = -ledger(current)
                continue
            t_accept = temperature / step
            best_before = ledger.best_score
            for j in range(2 * dim):
                if j < dim:
                    move = sampler.displacements(temperature, dim)
                    candidate = _fold_into_bounds(current + move, lower, span)
                else:
                    candidate = current.copy()
                    d = j - dim
                    move = sampler.displacements(temperature, 1)[0]
                    candidate[d] = lower[d] + math.fmod(
                        math.fmod(candidate[d] + move - lower[d], span[d]) + span[d], span[d]
                    )
                e = -ledger(candidate)
                if e < current_e:
                    current = candidate
                    current_e = e
                else:
                    pqa_base = 1.0 - (1.0 - qa) * (e - current_e) / t_accept
                    if pqa_base > 0.0:
                        pqa = math.exp(math.log(pqa_base) / (1.0 - qa))
                        if rng.uniform() <= pqa:
                            current = candidate
                            current_e = e
            if ledger.best_score > best_before:
                stale_chains = 0
                _refine(ledger, bounds)
                current = ledger.best_x.copy()
                current_e = -ledger.best_score
            else:
                # periodic re-polish from the incumbent: the fresh simplex
                # gives the local phase another line of attack on ridges
                stale_chains += 1
                if stale_chains >= 20:
                    stale_chains = 0
                    _refine(ledger, bounds)
                    if -ledger.best_score < current_e:
                        current = ledger.best_x.copy()
                        current_e = -ledger.best_score

    try:
        anneal()
    except _BudgetExhausted:
        pass

    bx = ledger.best_x
    best = Viewpoint(
        x=float(bx[0] + sx),
        y=float(bx[1] + sy),
        z_agl=float(bx[2]),
        yaw_deg=float(math.fmod(bx[3], 180.0)),
    )
    return OptResult(
        best=best,
        best_score=float(ledger.best_score),
        evals_to_best=ledger.evals_to_best,
        total_evals=ledger.total_evals,
        best_history=tuple(ledger.history),
    )


def _refine(ledger: _EvalLedger, bounds: Bounds4) -> None:
    """Bounded Nelder-Mead polish from the incumbent.

    The initial simplex spans 5% of each bound, large enough to follow the
    narrow curved ridge of the full-coverage objective, where descending in
    altitude only pays off together with a recentred position and heading.
    """
    # a 4-D simplex needs 5 vertices plus room for at least one reflection
    budget = min(_LOCAL_SEARCH_BUDGET, ledger.max_evals - ledger.total_evals)
    if budget < 6:
        return
    x0 = ledger.best_x.copy()
    simplex = [x0]
    for d, (lo, hi) in enumerate(bounds):
        v = x0.copy()
        step = 0.05 * (hi - lo)
        v[d] = v[d] + step if v[d] + step <= hi else v[d] - step
        simplex.append(v)
    minimize(
        lambda x: -ledger(x),
        x0,
        method="Nelder-Mead",
        bounds=bounds,
        options={
            "maxfev": budget,
            "xatol": 1e-4,
            "fatol": 1e-12,
            "initial_simplex": np.array(simplex),
        },
    )


def optimize_all(
    rois: Sequence[RoiPolygon],
    cam: CameraSpec,
    objective: ObjectiveKind,
    a_min: float,
    a_max: float,
    cfg: AnnealConfig,
    workers: int | None = None,
) -> list[OptResult]:
    """Optimize every region independently.

    Region ``i`` runs with seed ``cfg.seed ^ i``, so results do not depend on
    worker scheduling. Failures are collected and raised together after all
    regions have been attempted.
    """
    if not rois:
        raise InvalidInput("need at least one region")
    tasks = [
        (roi, cam, objective, a_min, a_max, replace(cfg, seed=cfg.seed ^ i))
        for i, roi in enumerate(rois)
    ]
    results: list[OptResult | None] = [None] * len(tasks)
    failures: dict[int, Exception] = {}
    if workers is None:
        workers = min(len(tasks), _default_workers())
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, outcome in enumerate(pool.map(_run_one, tasks)):
                if isinstance(outcome, Exception):
                    failures[i] = outcome
                else:
                    results[i] = outcome
    else:
        for i, task in enumerate(tasks):
            outcome = _run_one(task)
            if isinstance(outcome, Exception):
                failures[i] = outcome
            else:
                results[i] = outcome
    if failures:
        detail = "; ".join(f"region {i}: {e}" for i, e in sorted(failures.items()))
        raise OptimizationFailed(f"viewpoint optimization failed for {len(failures)} region(s): {detail}", failures)
    return results  # type: ignore[return-value]


def _run_one(task) -> "OptResult | Exception":
    roi, cam, objective, a_min, a_max, cfg = task
    try:
        bounds = viewpoint_bounds(roi, a_min, a_max)
        return optimize_viewpoint(roi, cam, objective, bounds, cfg)
    except Exception as e:
        return e


def _default_workers() -> int:
    import os

    return max(1, os.cpu_count() or 1)
