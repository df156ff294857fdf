#!/usr/bin/env python3
"""Three-way window comparison: fixed coarse, fixed fine, adaptive.

Writes one telemetry CSV per method plus a summary table on stdout.
"""

import argparse
from pathlib import Path

from hca_teleop.config import PlannerConfig
from hca_teleop.harness import JoystickTrace, configure_logging, run, \
    write_report
from hca_teleop.sim_world import make_scenario


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/window", type=Path)
    parser.add_argument("--duration", type=float, default=45.0)
    args = parser.parse_args()
    configure_logging()

    scenario = make_scenario("window")
    cfg = PlannerConfig(alpha_min=scenario.alpha_min,
                        alpha_max=scenario.alpha_max)
    trace = JoystickTrace.constant((1.0, 0.0, 0.0), args.duration)

    methods = [
        ("fixed-0.5", dict(mode="fixed", fixed_alpha=0.5)),
        ("fixed-0.2", dict(mode="fixed", fixed_alpha=0.2)),
        ("adaptive", dict(mode="adaptive")),
    ]
    print(f"{'method':<12} {'completed':<10} {'top speed':<10} "
          f"{'min clearance':<14} rounds")
    for name, kw in methods:
        report = run(scenario, trace=trace, cfg=cfg, **kw)
        write_report(report, args.out / f"{name}.csv")
        print(f"{name:<12} {str(report.completed):<10} "
              f"{report.max_speed_mps:<10.2f} "
              f"{report.min_clearance_m:<14.3f} {len(report.rows)}")
    print(f"telemetry written to {args.out}/")


if __name__ == "__main__":
    main()
