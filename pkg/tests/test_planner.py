import pytest

from snaproute.config import parse_problem
from snaproute.errors import InfeasibleError, LayerOverflow, ValidationError
from snaproute.mission import Action, plan_from_json_bytes, plan_to_json_bytes
from snaproute.planner import build_regions, plan, turn_allowance

from test_cli_service import problem_config, square_feature


@pytest.fixture(scope="module")
def small_plan():
    spec = parse_problem(problem_config(n_rois=4, n_uavs=2, seed=7, max_evals=1500))
    return spec, plan(spec)


class TestPlanInvariants:
    def test_every_region_captured_exactly_once(self, small_plan):
        spec, result = small_plan
        captured = [
            w.roi_id
            for t in result.trajectories
            for w in t.waypoints
            if w.action is Action.CAPTURE
        ]
        assert sorted(captured) == sorted(spec.roi_ids)

    def test_capture_matches_optimizer_pose_exactly(self, small_plan):
        _, result = small_plan
        poses = {c.roi_id: c.viewpoint for c in result.captures}
        for t in result.trajectories:
            for w in t.waypoints:
                if w.action is Action.CAPTURE:
                    vp = poses[w.roi_id]
                    assert (w.local.x, w.local.y) == (vp.x, vp.y)
                    assert w.alt_agl == vp.z_agl
                    assert w.yaw_deg == vp.yaw_deg

    def test_battery_limit_enforced(self, small_plan):
        spec, result = small_plan
        for t in result.trajectories:
            assert t.estimated_duration <= spec.fleet.t_max + 1e-9

    def test_altitude_band_enforced(self, small_plan):
        spec, result = small_plan
        for t in result.trajectories:
            for w in t.waypoints:
                if w.action in (Action.TAKEOFF, Action.LAND):
                    continue
                assert spec.a_min - 1e-9 <= w.alt_agl <= spec.a_max + 1e-9

    def test_closed_loops(self, small_plan):
        _, result = small_plan
        for t in result.trajectories:
            first, last = t.waypoints[0], t.waypoints[-1]
            assert (first.local.x, first.local.y) == (last.local.x, last.local.y)

    def test_serialization_round_trip_exact(self, small_plan):
        _, result = small_plan
        data = plan_to_json_bytes(result)
        back = plan_from_json_bytes(data)
        assert back == result
        assert plan_to_json_bytes(back) == data

    def test_no_conflicts_reported(self, small_plan):
        _, result = small_plan
        assert result.metrics["conflicts"]["violations"] == []

    def test_viewpoint_absolute_altitude_filled(self, small_plan):
        _, result = small_plan
        # flat z0 = 50 provider in the fixture config
        for c in result.captures:
            assert c.viewpoint.z_amsl == pytest.approx(50.0 + c.viewpoint.z_agl)


class TestPlannerErrors:
    def test_unreachable_region_infeasible(self):
        cfg = problem_config(n_rois=1)
        cfg["rois"]["features"] = [square_feature(40.36, 23.0, props={"id": "far"})]
        spec = parse_problem(cfg)
        with pytest.raises(InfeasibleError) as exc:
            plan(spec)
        assert exc.value.viewpoint_index == 0
        assert exc.value.doubling_trace == []

    def test_layer_overflow_diagnosed(self):
        # two distant clusters force two concurrent UAVs; a 70 m separation
        # pushes the second transit layer past the 120 m ceiling
        cfg = problem_config(n_rois=1, n_uavs=2, max_evals=1200)
        cfg["rois"]["features"] = [
            square_feature(40.0, 22.985, props={"id": "west"}),
            square_feature(40.0, 23.015, props={"id": "east"}),
        ]
        cfg["layer_separation"] = 70.0
        spec = parse_problem(cfg)
        with pytest.raises(LayerOverflow):
            plan(spec)

    def test_degenerate_region_names_feature(self):
        cfg = problem_config(n_rois=2)
        f = cfg["rois"]["features"][1]
        ring = f["geometry"]["coordinates"][0]
        # collapse to a line
        f["geometry"]["coordinates"][0] = [ring[0], ring[1], ring[0], ring[1], ring[0]]
        spec_err = None
        try:
            spec = parse_problem(cfg)
            build_regions(spec)
        except ValidationError as e:
            spec_err = e
        assert spec_err is not None
        assert any(err.get("feature_index") == 1 for err in spec_err.errors)


class TestCostModelMargin:
    def test_turn_allowance_formula(self):
        assert turn_allowance(10.0) == pytest.approx((5.0 * 10.0) / (20.0 + 10.0))

    def test_matrix_duration_dominates_estimate(self, small_plan):
        # the per-visit service allowance makes the routing model an upper
        # bound on the turn-penalized duration estimate (base layer)
        spec, result = small_plan
        from snaproute.routing import build_cost_matrix

        base = [t for t in result.trajectories if t.layer_altitude_agl == spec.fleet.transit_altitude_agl]
        assert base
        vps = [c.viewpoint for c in result.captures]
        _, _, depot = build_regions(spec)
        matrix = build_cost_matrix(
            depot, vps, spec.fleet, service_time=spec.service_time + turn_allowance(spec.fleet.u_horizontal)
        )
        roi_index = {c.roi_id: i for i, c in enumerate(result.captures)}
        for t in base:
            route = [roi_index[w.roi_id] for w in t.waypoints if w.action is Action.CAPTURE]
            seq = [0] + [i + 1 for i in route] + [0]
            matrix_duration = sum(matrix.cost[a, b] for a, b in zip(seq, seq[1:]))
            assert t.estimated_duration <= matrix_duration + 1e-9
