"""Scenario runner: scripted joystick traces in, telemetry and metrics out.

A run executes the full sense-plan-act loop until the trace runs out, the
goal plane is crossed, or the vehicle hits ground-truth geometry (which
marks the run failed). Reports serialize to a fixed-format CSV plus a
JSON summary sidecar.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import _kernels
from .config import PlannerConfig
from .hca_planner import RoundRecord, TeleopPipeline
from .motion_primitives import JoystickInput
from .sim_world import Scenario

log = logging.getLogger("hca_teleop")

CSV_HEADER = ["time_s", "x_m", "y_m", "z_m", "speed_mps", "voxel_size_m",
              "levels_tried", "outcome", "plan_time_s"]


def configure_logging() -> None:
    """Honor the HCA_LOG_LEVEL environment variable (default WARNING)."""
    level = os.environ.get("HCA_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


@dataclass(frozen=True)
class JoystickTrace:
    """Timestamped axis triples, zero-order held between entries."""

    times: np.ndarray               # strictly increasing seconds
    axes: np.ndarray                # (N, 3) in [-1, 1]

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).ravel()
        a = np.asarray(self.axes, dtype=float).reshape(-1, 3)
        if t.size != a.shape[0]:
            raise ValueError("times and axes must have equal length")
        if t.size and (np.diff(t) <= 0).any():
            raise ValueError("trace times must be strictly increasing")
        if a.size and (np.abs(a) > 1.0 + 1e-12).any():
            raise ValueError("axes must lie in [-1, 1]")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "axes", a)

    @property
    def duration(self) -> float:
        return float(self.times[-1]) if self.times.size else 0.0

    def sample(self, t: float) -> JoystickInput:
        """Latest entry at or before t; zeros before the first entry."""
        i = int(np.searchsorted(self.times, t + 1e-12)) - 1
        if i < 0:
            return JoystickInput()
        return JoystickInput(forward=self.axes[i, 0],
                             vertical=self.axes[i, 1],
                             yaw=self.axes[i, 2])

    @staticmethod
    def constant(axes: tuple[float, float, float],
                 duration: float) -> "JoystickTrace":
        return JoystickTrace(times=np.array([0.0, duration]),
                             axes=np.array([axes, axes]))

    @staticmethod
    def load(path: str | Path) -> "JoystickTrace":
        times, axes = [], []
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                times.append(float(row["time_s"]))
                axes.append([float(row["ax_forward"]),
                             float(row["ax_vertical"]),
                             float(row["ax_yaw"])])
        return JoystickTrace(times=np.array(times), axes=np.array(axes))

    def save(self, path: str | Path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["time_s", "ax_forward", "ax_vertical", "ax_yaw"])
            for t, a in zip(self.times, self.axes):
                w.writerow([f"{t:.6f}", f"{a[0]:.6f}", f"{a[1]:.6f}",
                            f"{a[2]:.6f}"])


@dataclass(frozen=True)
class RunReport:
    """Per-round telemetry plus run-level statistics."""

    scenario: str
    mode: str
    rows: list[RoundRecord]
    completed: bool
    collided: bool
    total_time_s: float
    avg_speed_mps: float
    max_speed_mps: float
    min_clearance_m: float

    def summary(self) -> dict:
        return {
            "scenario": self.scenario,
            "mode": self.mode,
            "rounds": len(self.rows),
            "completed": self.completed,
            "collided": self.collided,
            "total_time_s": self.total_time_s,
            "avg_speed_mps": self.avg_speed_mps,
            "max_speed_mps": self.max_speed_mps,
            "min_ground_truth_clearance_m": self.min_clearance_m,
        }


def run(scenario: Scenario, mode: str, trace: JoystickTrace,
        cfg: PlannerConfig | None = None, fixed_alpha: float | None = None,
        timing: str = "wall", max_rounds: int | None = None) -> RunReport:
    """Execute one teleoperation run.

    mode "adaptive" follows the hierarchical voxel-size loop between the
    configured bounds; mode "fixed" pins the voxel size (collision
    checking and the stopping fallback stay active). timing "off" zeroes
    the wall-clock plan-time column so replays are byte-reproducible.
    """
    if mode not in ("adaptive", "fixed"):
        raise ValueError("mode must be 'adaptive' or 'fixed'")
    if mode == "fixed" and fixed_alpha is None:
        raise ValueError("fixed mode requires a voxel size")
    cfg = cfg if cfg is not None else PlannerConfig(
        alpha_min=scenario.alpha_min, alpha_max=scenario.alpha_max)
    _kernels.warmup()

    pipeline = TeleopPipeline(scenario=scenario, cfg=cfg,
                              adapt=(mode == "adaptive"))
    if mode == "fixed":
        pipeline.alpha_prev = fixed_alpha

    rows: list[RoundRecord] = []
    completed = False
    collided = False
    min_clear = float("inf")
    limit = max_rounds if max_rounds is not None else \
        int(np.ceil(trace.duration / cfg.dt_plan))
    for _ in range(limit):
        axes = trace.sample(pipeline.sim.time)
        rec = pipeline.round(axes)
        if timing == "off":
            rec = replace(rec, plan_time_s=0.0)
        rows.append(rec)
        min_clear = min(min_clear, rec.min_clearance_m)
        if rec.collided:
            collided = True
            log.error("ground-truth collision at t=%.2f s", rec.time_s)
            break
        if pipeline.sim.vehicle.position[0] >= scenario.goal_x:
            completed = True
            break

    speeds = [r.speed_mps for r in rows]
    report = RunReport(
        scenario=scenario.name, mode=(mode if mode == "adaptive"
                                      else f"fixed:{fixed_alpha:g}"),
        rows=rows, completed=completed and not collided, collided=collided,
        total_time_s=pipeline.sim.time,
        avg_speed_mps=float(np.mean(speeds)) if speeds else 0.0,
        max_speed_mps=float(np.max(speeds)) if speeds else 0.0,
        min_clearance_m=min_clear,
    )
    log.info("run %s/%s: %d rounds, completed=%s, min clearance %.3f m",
             report.scenario, report.mode, len(rows), report.completed,
             report.min_clearance_m)
    return report


def report_csv_bytes(report: RunReport) -> bytes:
    """Deterministic CSV serialization of the telemetry rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in report.rows:
        w.writerow([
            f"{r.time_s:.6f}",
            f"{r.position[0]:.9f}", f"{r.position[1]:.9f}",
            f"{r.position[2]:.9f}",
            f"{r.speed_mps:.9f}", f"{r.voxel_size_m:.9f}",
            str(r.levels_tried), r.outcome, f"{r.plan_time_s:.6f}",
        ])
    return buf.getvalue().encode()


def write_report(report: RunReport, path: str | Path) -> None:
    """Write the telemetry CSV plus a JSON summary sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(report_csv_bytes(report))
    sidecar = path.with_suffix(".summary.json")
    sidecar.write_text(json.dumps(report.summary(), indent=2, sort_keys=True))
