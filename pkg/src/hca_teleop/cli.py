"""Command-line entry points: scripted runs and the live teleop server."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import PlannerConfig
from .harness import JoystickTrace, configure_logging, run, write_report
from .sim_world import SCENARIO_NAMES, load_scenario, make_scenario


def _resolve_scenario(spec: str, seed: int):
    if spec in SCENARIO_NAMES:
        return make_scenario(spec, seed=seed)
    path = Path(spec)
    if path.exists():
        return load_scenario(path)
    raise SystemExit(f"unknown scenario {spec!r}: not a name in "
                     f"{SCENARIO_NAMES} and not a file")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hca-teleop",
        description="Adaptive-speed teleoperation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scripted scenario run")
    p_run.add_argument("--scenario", required=True,
                       help="scenario name or JSON file")
    p_run.add_argument("--mode", choices=["adaptive", "fixed"],
                       default="adaptive")
    p_run.add_argument("--voxel-size", type=float, default=None,
                       help="fixed-mode voxel size in meters")
    p_run.add_argument("--alpha-min", type=float, default=None)
    p_run.add_argument("--alpha-max", type=float, default=None)
    p_run.add_argument("--trace", default=None,
                       help="joystick trace CSV (default: 60 s full forward)")
    p_run.add_argument("--out", default="out",
                       help="output directory for telemetry and summary")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--timing", choices=["wall", "off"], default="wall",
                       help="'off' zeroes plan_time_s for reproducible CSVs")

    p_serve = sub.add_parser("serve", help="start the live operator server")
    p_serve.add_argument("--port", type=int, default=8642)  # server default
    p_serve.add_argument("--scenario", default="window")
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--alpha-min", type=float, default=None)
    p_serve.add_argument("--alpha-max", type=float, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    configure_logging()
    args = _build_parser().parse_args(argv)

    if args.command == "run":
        scenario = _resolve_scenario(args.scenario, args.seed)
        if args.alpha_min is not None or args.alpha_max is not None:
            from dataclasses import replace
            scenario = replace(
                scenario,
                alpha_min=args.alpha_min if args.alpha_min is not None
                else scenario.alpha_min,
                alpha_max=args.alpha_max if args.alpha_max is not None
                else scenario.alpha_max)
        if args.trace:
            trace = JoystickTrace.load(args.trace)
        else:
            trace = JoystickTrace.constant((1.0, 0.0, 0.0), 60.0)
        cfg = PlannerConfig(alpha_min=scenario.alpha_min,
                            alpha_max=scenario.alpha_max)
        report = run(scenario, args.mode, trace, cfg=cfg,
                     fixed_alpha=args.voxel_size, timing=args.timing)
        out_dir = Path(args.out)
        write_report(report, out_dir / "telemetry.csv")
        summary = report.summary()
        for key, value in sorted(summary.items()):
            print(f"{key}: {value}")
        return 0 if not report.collided else 1

    if args.command == "serve":
        import uvicorn

        from .server import create_app
        scenario = _resolve_scenario(args.scenario, args.seed)
        if args.alpha_min is not None or args.alpha_max is not None:
            from dataclasses import replace
            scenario = replace(
                scenario,
                alpha_min=args.alpha_min if args.alpha_min is not None
                else scenario.alpha_min,
                alpha_max=args.alpha_max if args.alpha_max is not None
                else scenario.alpha_max)
        app = create_app(scenario)
        uvicorn.run(app, host="127.0.0.1", port=args.port)
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
