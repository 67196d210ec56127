"""Min-max multi-UAV routing over the optimized viewpoints.

Routes are closed loops through a shared depot. The objective is the
duration of the longest route (makespan), with total duration as a
tie-break, encoded as the scalar ``makespan * 1e6 + total``. A cheapest-arc
construction seeds a guided local search whose arc penalties steer the
search out of local minima. Battery feasibility is handled by the fleet
doubling loop: whenever any route exceeds the battery budget, the virtual
vehicle count doubles and the instance is re-solved; surplus routes become
sequential missions flown by the physical fleet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .anneal import Viewpoint
from .errors import InfeasibleError, InvalidInput

# Lexicographic weight of the makespan over total duration.
MAKESPAN_WEIGHT = 1e6

# Nominal improvement-iteration rate used to convert a seconds budget into a
# deterministic iteration count.
GLS_ITERATIONS_PER_SECOND = 40.0

# Penalty weight as a fraction of the mean arc cost.
GLS_LAMBDA_FRACTION = 0.1


@dataclass(frozen=True)
class FleetSpec:
    """Identical-UAV fleet: speeds, battery budget, transit layering."""

    n_uavs: int
    u_horizontal: float
    u_vertical: float
    t_max: float
    layer_separation: float = 3.0
    transit_altitude_agl: float = 60.0

    def __post_init__(self):
        if self.n_uavs < 1:
            raise InvalidInput("fleet needs at least one UAV")
        if self.u_horizontal <= 0 or self.u_vertical <= 0:
            raise InvalidInput("speeds must be positive")
        if self.t_max <= 0:
            raise InvalidInput("battery duration must be positive")
        if self.layer_separation <= 0:
            raise InvalidInput("layer separation must be positive")
        if self.transit_altitude_agl <= 0:
            raise InvalidInput("transit altitude must be positive")


@dataclass
class CostMatrix:
    """Dense travel-time matrix; node 0 is the depot, node i is viewpoint i-1."""

    cost: np.ndarray
    transit_altitude: float
    service_time: float

    @property
    def n_viewpoints(self) -> int:
        return self.cost.shape[0] - 1


@dataclass
class RoutingSolution:
    routes: list[list[int]]  # viewpoint indices, one list per (virtual) vehicle
    durations: list[float]
    makespan: float
    missions_multiplier: int = 1
    doubling_trace: list[dict] = field(default_factory=list)

    def total_duration(self) -> float:
        return float(sum(self.durations))


def build_cost_matrix(
    depot, vps: Sequence[Viewpoint], fleet: FleetSpec, service_time: float = 0.0
) -> CostMatrix:
    """Travel times between the depot and every viewpoint.

    A leg climbs from the origin's capture altitude to the shared transit
    altitude, crosses horizontally, descends to the destination's capture
    altitude, and pays the per-visit service time on arrival. Depot legs
    climb from or descend to the ground.
    """
    if service_time < 0:
        raise InvalidInput("service time must be non-negative")
    zt = fleet.transit_altitude_agl
    xs = [depot.x] + [v.x for v in vps]
    ys = [depot.y] + [v.y for v in vps]
    zs = [0.0] + [v.z_agl for v in vps]
    n = len(xs)
    cost = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            horiz = math.hypot(xs[j] - xs[i], ys[j] - ys[i])
            vert = abs(zs[i] - zt) + abs(zt - zs[j])
            t = vert / fleet.u_vertical + horiz / fleet.u_horizontal
            if j != 0:
                t += service_time
            cost[i, j] = t
    return CostMatrix(cost=cost, transit_altitude=zt, service_time=service_time)


def _route_duration_list(ct: list[list[float]], route: list[int]) -> float:
    if not route:
        return 0.0
    prev = 0
    d = 0.0
    for n in route:
        d += ct[prev][n]
        prev = n
    return d + ct[prev][0]


def _route_duration(c: np.ndarray, route: list[int]) -> float:
    return _route_duration_list(c.tolist(), route) if route else 0.0


def _scalar(durations: Sequence[float]) -> float:
    m = max(durations) if durations else 0.0
    return m * MAKESPAN_WEIGHT + sum(durations)


class _Search:
    """Guided local search state over matrix node indices (1..k).

    Moves are scanned first-improvement against the penalty-augmented
    objective; an aspiration rule additionally accepts any move that beats
    the best true objective seen so far, so penalties can divert the search
    out of plateaus but never block a genuinely best move. Candidate moves
    touch at most two routes and are evaluated from cached per-route
    durations, running totals, and top-3 maxima in O(route length).
    """

    def __init__(self, c: np.ndarray, vehicles: int, rng: np.random.Generator):
        self.k = c.shape[0] - 1
        self.vehicles = vehicles
        self.rng = rng
        self._ct: list[list[float]] = c.tolist()
        self.penalty = np.zeros_like(c)
        off = c[~np.eye(c.shape[0], dtype=bool)]
        mean_arc = float(off.mean()) if off.size else 1.0
        self.lam = GLS_LAMBDA_FRACTION * mean_arc
        self._at: list[list[float]] = self._ct  # no penalties yet
        self.routes: list[list[int]] = []
        self.dur: list[float] = []
        self.aug: list[float] = []
        self._dur_total = 0.0
        self._aug_total = 0.0
        self._top3_true: list[tuple[float, int]] = []
        self._top3_aug: list[tuple[float, int]] = []
        self.best_scalar = math.inf
        self.best_routes: list[list[int]] = []

    def set_routes(self, routes: list[list[int]]) -> None:
        self.routes = [list(r) for r in routes]
        self.dur = [_route_duration_list(self._ct, r) for r in self.routes]
        self.aug = [_route_duration_list(self._at, r) for r in self.routes]
        self._refresh_cache()
        self._note_best()

    def _refresh_cache(self) -> None:
        self._dur_total = sum(self.dur)
        self._aug_total = sum(self.aug)
        order = sorted(range(len(self.dur)), key=lambda i: -self.dur[i])
        self._top3_true = [(self.dur[i], i) for i in order[:3]]
        order = sorted(range(len(self.aug)), key=lambda i: -self.aug[i])
        self._top3_aug = [(self.aug[i], i) for i in order[:3]]

    @staticmethod
    def _max_excluding(top3: list[tuple[float, int]], skip: tuple[int, ...]) -> float:
        for value, idx in top3:
            if idx not in skip:
                return value
        return 0.0

    def scalar_true(self) -> float:
        return _scalar(self.dur)

    def _note_best(self) -> None:
        s = self.scalar_true()
        if s < self.best_scalar - 1e-12:
            self.best_scalar = s
            self.best_routes = [list(r) for r in self.routes]

    def _try_apply(self, changed: tuple[int, ...], new_routes: tuple[list[int], ...]) -> bool:
        ct = self._ct
        at = self._at
        new_durs = [_route_duration_list(ct, r) for r in new_routes]
        new_augs = [_route_duration_list(at, r) for r in new_routes]
        aug_total = self._aug_total
        dur_total = self._dur_total
        for i, a, d in zip(changed, new_augs, new_durs):
            aug_total += a - self.aug[i]
            dur_total += d - self.dur[i]
        aug_max = self._max_excluding(self._top3_aug, changed)
        for a in new_augs:
            if a > aug_max:
                aug_max = a
        true_max = self._max_excluding(self._top3_true, changed)
        for d in new_durs:
            if d > true_max:
                true_max = d
        current_aug = self._max_excluding(self._top3_aug, ()) * MAKESPAN_WEIGHT + self._aug_total
        improves_aug = aug_max * MAKESPAN_WEIGHT + aug_total < current_aug - 1e-12
        true_scalar = true_max * MAKESPAN_WEIGHT + dur_total
        aspiration = true_scalar < self.best_scalar - 1e-12
        if not (improves_aug or aspiration):
            return False
        for i, r, d, a in zip(changed, new_routes, new_durs, new_augs):
            self.routes[i] = r
            self.dur[i] = d
            self.aug[i] = a
        self._refresh_cache()
        if aspiration:
            self.best_scalar = true_scalar
            self.best_routes = [list(r) for r in self.routes]
        return True

    def local_search(self, max_passes: int = 60) -> None:
        """First-improvement passes until a local optimum of the augmented
        objective is reached."""
        for _ in range(max_passes):
            if not self._pass_once():
                return

    def _pass_once(self) -> bool:
        improved = False
        nv = len(self.routes)
        order = self.rng.permutation(nv)
        for ri in (int(r) for r in order):
            while self._improve_route_moves(ri):
                improved = True
        return improved

    def _improve_route_moves(self, ri: int) -> bool:
        improved = False
        p = 0
        while p < len(self.routes[ri]):
            if self._relocate_from(ri, p):
                improved = True
            else:
                p += 1
        if self._exchange_from(ri):
            improved = True
        if self._two_opt(ri):
            improved = True
        if self._cross_from(ri):
            improved = True
        return improved

    def _relocate_from(self, ri: int, p: int) -> bool:
        route = self.routes[ri]
        node = route[p]
        src = route[:p] + route[p + 1 :]
        for rj in range(len(self.routes)):
            if rj == ri:
                for q in range(len(src) + 1):
                    if q == p:
                        continue
                    cand = src[:q] + [node] + src[q:]
                    if self._try_apply((ri,), (cand,)):
                        return True
            else:
                dest = self.routes[rj]
                for q in range(len(dest) + 1):
                    cand = dest[:q] + [node] + dest[q:]
                    if self._try_apply((ri, rj), (src, cand)):
                        return True
        return False

    def _exchange_from(self, ri: int) -> bool:
        improved = False
        for rj in range(ri + 1, len(self.routes)):
            a = self.routes[ri]
            b = self.routes[rj]
            done = False
            for p in range(len(a)):
                for q in range(len(b)):
                    na = a[:p] + [b[q]] + a[p + 1 :]
                    nb = b[:q] + [a[p]] + b[q + 1 :]
                    if self._try_apply((ri, rj), (na, nb)):
                        improved = True
                        done = True
                        break
                if done:
                    break
        return improved

    def _two_opt(self, ri: int) -> bool:
        route = self.routes[ri]
        n = len(route)
        if n < 3:
            return False
        for i in range(n - 1):
            for j in range(i + 1, n):
                cand = route[:i] + route[i : j + 1][::-1] + route[j + 1 :]
                if self._try_apply((ri,), (cand,)):
                    return True
        return False

    def _cross_from(self, ri: int) -> bool:
        for rj in range(ri + 1, len(self.routes)):
            a = self.routes[ri]
            b = self.routes[rj]
            for p in range(len(a) + 1):
                for q in range(len(b) + 1):
                    if p == len(a) and q == len(b):
                        continue
                    if p == 0 and q == 0:
                        continue
                    na = a[:p] + b[q:]
                    nb = b[:q] + a[p:]
                    if self._try_apply((ri, rj), (na, nb)):
                        return True
        return False

    def penalize(self) -> None:
        """Bump the penalty of the max-utility arcs of the current solution,
        then refresh the augmented arc matrix."""
        best_u = -1.0
        best_arcs: list[tuple[int, int]] = []
        ct = self._ct
        for route in self.routes:
            if not route:
                continue
            seq = [0] + route + [0]
            for a, b in zip(seq, seq[1:]):
                u = ct[a][b] / (1.0 + self.penalty[a, b])
                if u > best_u + 1e-15:
                    best_u = u
                    best_arcs = [(a, b)]
                elif abs(u - best_u) <= 1e-15:
                    best_arcs.append((a, b))
        for a, b in best_arcs:
            self.penalty[a, b] += 1.0
        aug = np.asarray(self._ct) + self.lam * self.penalty
        self._at = aug.tolist()
        self.aug = [_route_duration_list(self._at, r) for r in self.routes]
        self._refresh_cache()


def _cheapest_arc_construction(c: list[list[float]], vehicles: int, t_max: float) -> list[list[int]]:
    """Greedy route builder: extend each route with the cheapest feasible arc;
    nodes that fit nowhere are inserted afterwards at minimum cost increase."""
    k = len(c) - 1
    unvisited = list(range(1, k + 1))
    routes: list[list[int]] = []
    for _ in range(vehicles):
        route: list[int] = []
        cur = 0
        dur = 0.0
        while unvisited:
            if route:
                fits = [n for n in unvisited if dur + c[cur][n] + c[n][0] <= t_max]
            else:
                fits = unvisited
            if not fits:
                break
            nxt = min(fits, key=lambda n: (c[cur][n], n))
            route.append(nxt)
            dur += c[cur][nxt]
            cur = nxt
            unvisited.remove(nxt)
        routes.append(route)
    # leftovers: cheapest insertion anywhere, battery handled by doubling
    for node in list(unvisited):
        best = None
        for ri, route in enumerate(routes):
            seq = [0] + route + [0]
            for q in range(len(route) + 1):
                delta = c[seq[q]][node] + c[node][seq[q + 1]] - c[seq[q]][seq[q + 1]]
                if best is None or delta < best[0]:
                    best = (delta, ri, q)
        _, ri, q = best
        routes[ri].insert(q, node)
        unvisited.remove(node)
    return routes


def check_reachability(matrix: CostMatrix, t_max: float) -> None:
    """Raise when some viewpoint's depot round trip alone exceeds t_max."""
    c = matrix.cost
    for i in range(1, c.shape[0]):
        rt = float(c[0, i] + c[i, 0])
        if rt > t_max:
            raise InfeasibleError(
                f"viewpoint {i - 1} is unreachable: round trip {rt:.1f}s exceeds battery {t_max:.1f}s",
                viewpoint_index=i - 1,
            )


def solve_vrp(
    matrix: CostMatrix,
    vehicles: int,
    t_max: float,
    time_budget: float = 2.0,
    seed: int = 0,
) -> RoutingSolution:
    """Heuristic min-max VRP solve with a fixed vehicle count.

    The returned routes may exceed ``t_max``; battery feasibility is the
    doubling driver's responsibility. Deterministic for a given seed: the
    budget is converted to a fixed number of improvement iterations.
    """
    if vehicles < 1:
        raise InvalidInput("need at least one vehicle")
    check_reachability(matrix, t_max)
    rng = np.random.default_rng(seed)
    search = _Search(matrix.cost, vehicles, rng)
    search.set_routes(_cheapest_arc_construction(search._ct, vehicles, t_max))

    iterations = max(1, int(round(time_budget * GLS_ITERATIONS_PER_SECOND)))
    for _ in range(iterations):
        search.local_search()
        search._note_best()
        search.penalize()

    ct = search._ct
    best_routes = search.best_routes
    durations = [_route_duration_list(ct, r) for r in best_routes]
    return RoutingSolution(
        routes=[[n - 1 for n in r] for r in best_routes],
        durations=durations,
        makespan=max(durations) if durations else 0.0,
    )


def plan_with_doubling(
    matrix: CostMatrix,
    fleet: FleetSpec,
    time_budget: float = 2.0,
    seed: int = 0,
) -> RoutingSolution:
    """Solve with the physical fleet size, doubling the virtual vehicle count
    until every route fits the battery budget.

    ``missions_multiplier`` N reports how many sequential missions each UAV
    slot must fly; routes map to physical UAVs round-robin over N waves.
    """
    check_reachability(matrix, fleet.t_max)
    k = matrix.n_viewpoints
    v = fleet.n_uavs
    trace: list[dict] = []
    while True:
        sol = solve_vrp(matrix, v, fleet.t_max, time_budget, seed)
        feasible = all(d <= fleet.t_max for d in sol.durations)
        trace.append({"vehicles": v, "makespan": sol.makespan, "feasible": feasible})
        if feasible:
            break
        if v >= k:
            # single-viewpoint routes are feasible by the reachability check
            ct = matrix.cost.tolist()
            routes = [[i] for i in range(k)] + [[] for _ in range(v - k)]
            durations = [_route_duration_list(ct, [i + 1]) for i in range(k)] + [0.0] * (v - k)
            sol = RoutingSolution(routes=routes, durations=durations, makespan=max(durations))
            trace.append({"vehicles": v, "makespan": sol.makespan, "feasible": True})
            break
        v *= 2
    sol.missions_multiplier = math.ceil(v / fleet.n_uavs)
    sol.doubling_trace = trace
    return sol


def mission_waves(sol: RoutingSolution, n_uavs: int) -> list[list[tuple[int, list[int]]]]:
    """Group routes into sequential mission waves of at most ``n_uavs``.

    Routes are sorted by decreasing duration so the longest ones fly in the
    earliest waves; wave w, slot j flies sorted route ``w * n_uavs + j``.
    Empty routes are dropped. Returns, per wave, (uav_slot, route) pairs.
    """
    order = sorted(
        (i for i in range(len(sol.routes)) if sol.routes[i]),
        key=lambda i: (-sol.durations[i], i),
    )
    waves: list[list[tuple[int, list[int]]]] = []
    for w in range(0, len(order), n_uavs):
        chunk = order[w : w + n_uavs]
        waves.append([(j, list(sol.routes[idx])) for j, idx in enumerate(chunk)])
    return waves
