#!/usr/bin/env python3
"""Varying-clutter cave runs over several seeds, with planning-time stats."""

import argparse
from pathlib import Path

import numpy as np

from hca_teleop.config import PlannerConfig
from hca_teleop.harness import JoystickTrace, configure_logging, run, \
    write_report
from hca_teleop.sim_world import make_scenario


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/clutter_cave", type=Path)
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--duration", type=float, default=60.0)
    args = parser.parse_args()
    configure_logging()

    trace = JoystickTrace.constant((1.0, 0.0, 0.0), args.duration)
    print(f"{'seed':<6} {'completed':<10} {'min clearance':<14} "
          f"{'plan mean':<10} {'plan p99':<10} rounds")
    for seed in range(args.seeds):
        scenario = make_scenario("clutter_cave", seed=seed)
        cfg = PlannerConfig(alpha_min=scenario.alpha_min,
                            alpha_max=scenario.alpha_max)
        report = run(scenario, "adaptive", trace, cfg=cfg, timing="wall")
        write_report(report, args.out / f"seed{seed}.csv")
        times = np.array([r.plan_time_s for r in report.rows])
        print(f"{seed:<6} {str(report.completed):<10} "
              f"{report.min_clearance_m:<14.3f} "
              f"{times.mean()*1e3:<10.1f} "
              f"{np.percentile(times, 99)*1e3:<10.1f} {len(report.rows)}")
    print(f"telemetry written to {args.out}/")


if __name__ == "__main__":
    main()
