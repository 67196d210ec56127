"""Command-line entry points: plan, study, eval, serve."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_problem, parse_problem
from .errors import InfeasibleError, PlannerError, ValidationError

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INFEASIBLE = 2


def _print_validation(e: ValidationError) -> None:
    for err in e.errors:
        loc = f" (feature {err['feature_index']})" if "feature_index" in err else ""
        print(f"error: {err['field']}{loc}: {err['message']}", file=sys.stderr)


def cmd_plan(args) -> int:
    from .kml import plan_to_kml
    from .mission import plan_to_json_bytes
    from .planner import plan as run_plan

    try:
        spec = load_problem(args.config)
        result = run_plan(spec)
    except ValidationError as e:
        _print_validation(e)
        return EXIT_INPUT_ERROR
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        for step in e.doubling_trace:
            print(f"  attempt: {step}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except PlannerError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(plan_to_json_bytes(result))
    if args.kml:
        Path(args.kml).write_text(plan_to_kml(result), encoding="utf-8")

    agg = result.metrics["aggregate"]
    print(f"plan written to {out}")
    print(f"seed: {result.config['seed']}")
    print(
        f"makespan {agg['makespan_s']:.1f} s | mission time {agg['mission_time_s']:.1f} s "
        f"| N = {result.missions_multiplier} | waves = {agg['n_waves']}"
    )
    print(f"{'region':<12} {'recall':>8} {'precision':>10} {'gsd cm/px':>10}")
    for m in result.metrics["per_roi"]:
        print(f"{m['roi_id']:<12} {m['recall']:>8.3f} {m['precision']:>10.3f} {m['gsd_cm_px']:>10.2f}")
    if result.metrics["conflicts"]["violations"]:
        print(f"WARNING: {len(result.metrics['conflicts']['violations'])} conflict(s) detected", file=sys.stderr)
    return EXIT_OK


def cmd_study(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    overrides = {}
    if args.config:
        overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.kind == "objective":
        from .anneal import AnnealConfig
        from .studies import DEFAULT_CORPUS_SPEC, PolygonGenSpec, generate_polygons, run_objective_study

        gen = PolygonGenSpec(**overrides["corpus"]) if "corpus" in overrides else DEFAULT_CORPUS_SPEC
        corpus = generate_polygons(gen)
        report = run_objective_study(
            corpus,
            repetitions=int(overrides.get("repetitions", 5)),
            base_cfg=AnnealConfig(
                max_evals=int(overrides.get("max_evals", 8000)), seed=int(overrides.get("seed", 0))
            ),
        )
        path = report.to_csv(outdir)
        print(f"objective study written to {path}")
        for row in report.rows:
            print(row)
    else:
        from .studies import run_swarm_study

        allowed = {
            "roi_counts", "fleet_sizes", "spread_deg", "u_horizontal", "u_vertical", "t_max",
            "transit_altitude", "layer_separation", "a_min", "a_max", "anneal_evals",
            "routing_time_budget", "seed", "workers",
        }
        kwargs = {k: v for k, v in overrides.items() if k in allowed}
        result = run_swarm_study(outdir=outdir, **kwargs)
        print(f"swarm study written to {outdir / 'swarm_study.csv'}")
        print(f"note: {result.note}")
        for c in result.cells:
            print(
                f"rois={c.roi_count:3d} uavs={c.n_uavs:2d} "
                f"time={'-' if c.mission_time_s is None else f'{c.mission_time_s / 60:.2f}min'} "
                f"N={c.missions_multiplier}"
            )
    return EXIT_OK


def cmd_eval(args) -> int:
    from .camera import footprint_at
    from .mission import plan_from_json_bytes
    from .objectives import coverage_metrics
    from .planner import build_regions

    data = Path(args.plan).read_bytes()
    result = plan_from_json_bytes(data)
    try:
        spec = parse_problem(result.config)
        _, rois, _ = build_regions(spec)
    except ValidationError as e:
        _print_validation(e)
        return EXIT_INPUT_ERROR
    rois_by_id = {r.id: r for r in rois}
    print(f"{'region':<12} {'recall':>8} {'precision':>10} {'gsd cm/px':>10} {'score':>10}")
    for cap in result.captures:
        roi = rois_by_id[cap.roi_id]
        m = coverage_metrics(roi, footprint_at(spec.camera, cap.viewpoint), spec.camera, cap.viewpoint.z_agl)
        print(
            f"{cap.roi_id:<12} {m.recall:>8.3f} {m.precision:>10.3f} {m.gsd_cm_px:>10.2f} {cap.best_score:>10.4f}"
        )
    agg = result.metrics["aggregate"]
    print(f"makespan {agg['makespan_s']:.1f} s | N = {result.missions_multiplier}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.addr.rpartition(":")
    app = create_app(ui_dir=args.ui_dir, cors_origins=args.cors_origin or None)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snaproute",
        description="Plan single-shot inspection missions: one optimal camera viewpoint "
        "per region, battery-aware multi-UAV routes.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="compute a mission plan from a problem config")
    p.add_argument("--config", required=True, help="problem config JSON file")
    p.add_argument("--out", required=True, help="output mission plan JSON path")
    p.add_argument("--kml", help="also write a KML visualization")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("study", help="run a simulation study")
    p.add_argument("--kind", choices=["objective", "swarm"], required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="optional study overrides JSON")
    p.set_defaults(fn=cmd_study)

    p = sub.add_parser("eval", help="recompute metrics from a stored plan")
    p.add_argument("--plan", required=True, help="mission plan JSON path")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("serve", help="start the local planning HTTP service")
    p.add_argument("--addr", default="127.0.0.1:8080")
    p.add_argument("--ui-dir", help="static directory with the web UI build")
    p.add_argument("--cors-origin", action="append", help="allowed CORS origin (repeatable)")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
