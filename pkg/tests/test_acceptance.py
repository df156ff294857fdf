"""Acceptance gate: one test per criterion, printing a PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and measurements.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from hca_teleop._kernels import _fast_march
from hca_teleop.config import PlannerConfig, VoxelCounts
from hca_teleop.harness import JoystickTrace, report_csv_bytes, run
from hca_teleop.hca_planner import hca_round
from hca_teleop.motion_primitives import JoystickInput, VehicleState, max_speed
from hca_teleop.sim_world import make_scenario

from conftest import buffer_of, keyframe_at

FULL_FORWARD = (1.0, 0.0, 0.0)


def criterion_line(name, ok, detail=""):
    state = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {name}: {state} {detail}")


# --- shared scenario runs (computed once, reused by several criteria) ----

@pytest.fixture(scope="session")
def window_reports():
    scn = make_scenario("window")
    cfg = PlannerConfig(alpha_min=scn.alpha_min, alpha_max=scn.alpha_max)
    trace = JoystickTrace.constant(FULL_FORWARD, 45.0)
    return {
        "scenario": scn,
        "cfg": cfg,
        "fixed_coarse": run(scn, "fixed", trace, cfg=cfg, fixed_alpha=0.5,
                            timing="off"),
        "fixed_fine": run(scn, "fixed", trace, cfg=cfg, fixed_alpha=0.2,
                          timing="off"),
        "adaptive": run(scn, "adaptive", trace, cfg=cfg, timing="off"),
    }


@pytest.fixture(scope="session")
def door_reports():
    scn = make_scenario("door")
    cfg = PlannerConfig(alpha_min=scn.alpha_min, alpha_max=scn.alpha_max)
    trace = JoystickTrace.constant(FULL_FORWARD, 45.0)
    return {
        "scenario": scn,
        "cfg": cfg,
        "fixed_coarse": run(scn, "fixed", trace, cfg=cfg, fixed_alpha=0.6,
                            timing="off"),
        "fixed_fine": run(scn, "fixed", trace, cfg=cfg, fixed_alpha=0.3,
                          timing="off"),
        "adaptive": run(scn, "adaptive", trace, cfg=cfg, timing="off"),
    }


@pytest.fixture(scope="session")
def cave_reports():
    trace = JoystickTrace.constant(FULL_FORWARD, 60.0)
    reports = []
    for seed in range(5):
        scn = make_scenario("clutter_cave", seed=seed)
        cfg = PlannerConfig(alpha_min=scn.alpha_min, alpha_max=scn.alpha_max)
        reports.append(run(scn, "adaptive", trace, cfg=cfg, timing="off"))
    return reports


@pytest.fixture(scope="session")
def cave_perf_report():
    # forward through all regions, then hold position inside the inner
    # corridor so the measurement covers >= 500 rounds without running
    # into the corridor's end wall
    scn = make_scenario("clutter_cave", seed=0)
    scn = replace(scn, goal_x=math.inf)
    cfg = PlannerConfig(alpha_min=scn.alpha_min, alpha_max=scn.alpha_max)
    trace = JoystickTrace(times=np.array([0.0, 14.0, 56.0]),
                          axes=np.array([FULL_FORWARD, (0, 0, 0), (0, 0, 0)]))
    return run(scn, "adaptive", trace, cfg=cfg, timing="wall",
               max_rounds=540)


# --------------------------- criteria ------------------------------------

def test_eq1_correctness():
    """Speed bound satisfies the stopping-distance quadratic to 1e-9."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260810)
    checked = 0
    worst = 0.0
    while checked < 100:
        cfg = PlannerConfig(
            dt_plan=float(rng.uniform(0.02, 0.3)),
            dt_map=float(rng.uniform(0.02, 0.3)),
            dt_sense=float(rng.uniform(0.02, 0.3)),
            z_max=float(rng.uniform(2.0, 20.0)),
            counts=VoxelCounts(int(rng.integers(10, 80)), 20, 20),
        )
        cfg = replace(cfg, limits=replace(cfg.limits,
                                          a_x=float(rng.uniform(0.2, 4.0)),
                                          dv_margin=0.0))
        alpha = float(rng.uniform(0.02, 1.0))
        z_eq = min(cfg.z_max, 0.5 * alpha * cfg.counts.nx)
        margin = z_eq - cfg.clearance
        v = max_speed(alpha, cfg)
        if margin <= 0.0:
            assert v == 0.0
            continue
        resid = abs(v * cfg.latency_budget + v * v / (2 * cfg.limits.a_x)
                    - margin)
        worst = max(worst, resid / margin)
        checked += 1

    # exact zero at the information horizon
    cfg = PlannerConfig()
    cfg = replace(cfg, limits=replace(cfg.limits, dv_margin=0.0))
    alpha_horizon = 2.0 * cfg.clearance / cfg.counts.nx
    v_horizon = max_speed(alpha_horizon, cfg)

    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and v_horizon == 0.0 and elapsed < 1.0
    criterion_line("eq1-correctness", ok,
                   f"(worst rel residual {worst:.2e}, horizon V "
                   f"{v_horizon}, {elapsed:.2f} s)")
    assert worst <= 1e-9
    assert v_horizon == 0.0
    assert elapsed < 1.0


def test_distance_field_oracle():
    """FMM vs brute-force Euclidean oracle on 200 random grids <= 10^3."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(12345)
    worst = 0.0
    for _ in range(200):
        dims = rng.integers(4, 11, size=3)
        n = int(np.prod(dims))
        density = rng.uniform(0.05, 0.30)
        mask = rng.random(n) < density
        if not mask.any():
            mask[int(rng.integers(0, n))] = True
        alpha = float(rng.uniform(0.1, 1.0))
        d = _fast_march(mask, int(dims[0]), int(dims[1]), int(dims[2]),
                        alpha, alpha * float(dims.sum()))
        assert (d[mask] == 0.0).all()
        gx, gy, gz = np.meshgrid(*[np.arange(k) for k in dims],
                                 indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], 1) * alpha
        diff = pts[:, None, :] - pts[mask][None, :, :]
        exact = np.sqrt((diff ** 2).sum(-1)).min(1)
        worst = max(worst, float((np.abs(d - exact) / alpha).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.6 and elapsed < 30.0
    criterion_line("distance-field-oracle", ok,
                   f"(worst |err|/alpha {worst:.3f}, {elapsed:.1f} s)")
    assert worst <= 0.6
    assert elapsed < 30.0


class CountingChecker:
    def __init__(self, fail_sizes):
        self.fail_sizes = fail_sizes
        self.sizes = []

    def __call__(self, sel, stop, field):
        self.sizes.append(field.voxel_size)
        return any(abs(field.voxel_size - a) < 1e-9
                   for a in self.fail_sizes)


def test_algorithm1_trace_conformance():
    """The three stubbed-checker traces match the specified outcomes."""
    t0 = time.perf_counter()
    cfg = PlannerConfig(counts=VoxelCounts(6, 6, 6), alpha_min=0.1,
                        alpha_max=0.5)
    buffer = buffer_of(keyframe_at([0, 0, 0], depth=math.nan))
    state = VehicleState(np.zeros(3), 0.0)
    stick = JoystickInput(forward=1.0)

    checker = CountingChecker([])
    r1 = hca_round(state, stick, 0.30, buffer, cfg, checker=checker)
    t1 = (r1.outcome, r1.levels_tried, round(r1.voxel_size_out, 9),
          len(checker.sizes))

    checker = CountingChecker([0.31, 0.30])
    r2 = hca_round(state, stick, 0.30, buffer, cfg, checker=checker)
    t2 = (r2.outcome, r2.levels_tried, round(r2.voxel_size_out, 9),
          len(checker.sizes))

    checker = CountingChecker([0.10, 0.11, 0.12])
    r3 = hca_round(state, stick, 0.10, buffer, cfg, checker=checker)
    t3 = (r3.outcome, r3.levels_tried, round(r3.voxel_size_out, 9),
          len(checker.sizes))

    elapsed = time.perf_counter() - t0
    expected = [("planned", 0, 0.31, 1), ("planned", 2, 0.29, 3),
                ("fallback", 3, 0.10, 3)]
    got = [t1, t2, t3]
    ok = got == expected and elapsed < 1.0
    criterion_line("algorithm1-trace-conformance", ok,
                   f"({got}, {elapsed:.2f} s)")
    assert got == expected
    assert elapsed < 1.0


def test_window_scenario(window_reports):
    """Three-way window comparison; see the ledger for the min-alpha
    clause analysis (grid-commensurate 0.9 m aperture opens at 0.45)."""
    t0 = time.perf_counter()
    cfg = window_reports["cfg"]
    coarse = window_reports["fixed_coarse"]
    fine = window_reports["fixed_fine"]
    adaptive = window_reports["adaptive"]

    # coarse fails to pass and halts with ground-truth clearance
    xs = [r.position[0] for r in coarse.rows]
    halted = abs(xs[-1] - xs[-20]) < 0.05
    c1 = (not coarse.completed) and halted \
        and coarse.min_clearance_m >= cfg.r_robot
    criterion_line("window/fixed-0.5-halts", c1,
                   f"(completed={coarse.completed}, halted={halted}, "
                   f"min clearance {coarse.min_clearance_m:.3f})")

    c2 = fine.completed and not fine.collided
    criterion_line("window/fixed-0.2-passes", c2,
                   f"(completed={fine.completed})")

    c3 = adaptive.completed and not adaptive.collided
    top_ratio = adaptive.max_speed_mps / coarse.max_speed_mps
    c4 = top_ratio >= 0.95
    wall_x = 10.0
    near = [r.voxel_size_m for r in adaptive.rows
            if wall_x - 2.0 <= r.position[0] <= wall_x + 1.2]
    min_alpha = min(near)
    c5 = min_alpha < 0.3
    criterion_line("window/adaptive-passes", c3,
                   f"(completed={adaptive.completed})")
    criterion_line("window/adaptive-top-speed", c4,
                   f"(ratio {top_ratio:.3f})")
    criterion_line("window/adaptive-min-alpha<0.3", c5,
                   f"(min alpha near aperture {min_alpha:.3f})")
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    assert c1 and c2 and c3 and c4
    assert c5, (
        "structural: the 0.9 m aperture is lattice-commensurate at 0.45 "
        "(see decisions ledger); adaptation stops there in a noise-free "
        "deterministic simulation")


def test_door_scenario(door_reports):
    """Three-way door comparison at 12 m standoff; see the ledger for the
    fixed-0.6 clause analysis (0.9 = 0.3 + 0.6 commensurability)."""
    t0 = time.perf_counter()
    coarse = door_reports["fixed_coarse"]
    fine = door_reports["fixed_fine"]
    adaptive = door_reports["adaptive"]

    c1 = fine.completed and not fine.collided
    c2 = not coarse.completed
    c3 = adaptive.completed and not adaptive.collided
    criterion_line("door/fixed-0.3-passes", c1,
                   f"(completed={fine.completed})")
    criterion_line("door/fixed-0.6-halts", c2,
                   f"(completed={coarse.completed})")
    criterion_line("door/adaptive-passes", c3,
                   f"(completed={adaptive.completed})")
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    assert c1 and c3
    assert c2, (
        "structural: a 0.3-lattice-aligned 0.9 m aperture always contains "
        "a clean 0.6 m cell whose stored distance >= 0.42 passes the 0.4 "
        "threshold (see decisions ledger)")


def test_safety_suite(window_reports, door_reports, cave_reports,
                      cave_perf_report):
    """No run in the acceptance set dips below r_robot; zero collisions."""
    t0 = time.perf_counter()
    r_robot = PlannerConfig().r_robot
    runs = [window_reports["fixed_coarse"], window_reports["fixed_fine"],
            window_reports["adaptive"], door_reports["fixed_coarse"],
            door_reports["fixed_fine"], door_reports["adaptive"],
            *cave_reports, cave_perf_report]
    worst = min(r.min_clearance_m for r in runs)
    collisions = sum(r.collided for r in runs)
    elapsed = time.perf_counter() - t0
    ok = worst >= r_robot - 1e-12 and collisions == 0
    criterion_line("safety-suite", ok,
                   f"({len(runs)} runs, min clearance {worst:.4f} m, "
                   f"{collisions} collisions)")
    assert collisions == 0
    assert worst >= r_robot - 1e-12
    assert elapsed < 600.0


def test_performance_budget(cave_perf_report):
    """Mean plan time <= 0.06 s and p99 <= 0.1 s over >= 500 rounds."""
    rows = cave_perf_report.rows
    times = np.array([r.plan_time_s for r in rows])
    mean = float(times.mean())
    p99 = float(np.percentile(times, 99))
    ok = len(rows) >= 500 and mean <= 0.06 and p99 <= 0.1
    criterion_line("performance-budget", ok,
                   f"({len(rows)} rounds, mean {mean*1e3:.1f} ms, "
                   f"p99 {p99*1e3:.1f} ms)")
    assert len(rows) >= 500
    assert mean <= 0.06
    assert p99 <= 0.1


def test_determinism():
    """Identical seed/trace/config produce byte-identical telemetry."""
    trace = JoystickTrace.constant(FULL_FORWARD, 12.0)
    scn = make_scenario("window")
    cfg = PlannerConfig(alpha_min=scn.alpha_min, alpha_max=scn.alpha_max)
    a = report_csv_bytes(run(scn, "adaptive", trace, cfg=cfg, timing="off"))
    b = report_csv_bytes(run(scn, "adaptive", trace, cfg=cfg, timing="off"))

    cave = make_scenario("clutter_cave", seed=3)
    cfg_c = PlannerConfig(alpha_min=cave.alpha_min, alpha_max=cave.alpha_max)
    trace_c = JoystickTrace.constant(FULL_FORWARD, 8.0)
    c = report_csv_bytes(run(cave, "fixed", trace_c, cfg=cfg_c,
                             fixed_alpha=0.3, timing="off"))
    d = report_csv_bytes(run(cave, "fixed", trace_c, cfg=cfg_c,
                             fixed_alpha=0.3, timing="off"))
    ok = a == b and c == d
    criterion_line("determinism", ok,
                   f"(window {len(a)} bytes, cave {len(c)} bytes)")
    assert a == b
    assert c == d
