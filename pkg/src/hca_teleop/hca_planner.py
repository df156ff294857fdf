"""Per-round planning: adapt voxel size until the plan checks feasible.

Each planning round starts one voxel-size step coarser than the previous
round, generates the joystick-matched primitive and its stopping fallback
at the speed bound for that resolution, rebuilds the local map, and
checks both primitives against the distance field. On a collision the
voxel size shrinks one step and the round retries, up to three map builds;
if all fail, the round reports a fallback and the caller executes the
previous round's stopping action.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .config import PlannerConfig
from .distance_field import DistanceField, compute, query_many
from .motion_primitives import (JoystickInput, MotionPrimitive, VehicleState,
                                hover_primitive, map_joystick, max_speed,
                                stopping_action)
from .occupancy_map import (Keyframe, KeyframeBuffer, build_map,
                            seed_robot_free, update_buffer, world_to_body)
from .sim_world import (Scenario, SimState, ground_truth_clearance,
                        render_depth, step)

OUTCOME_PLANNED = "planned"
OUTCOME_FALLBACK = "fallback"

CheckerFn = Callable[[MotionPrimitive, MotionPrimitive, DistanceField], bool]


@dataclass(frozen=True)
class PlanResult:
    outcome: str
    selected: MotionPrimitive | None
    stopping: MotionPrimitive | None
    voxel_size_out: float
    levels_tried: int
    v_x_limit: float
    round_duration: float           # wall-clock seconds, measured
    local_map: "LocalMap | None" = None   # last map built this round


def _dense_path_points(primitive: MotionPrimitive,
                       voxel_size: float) -> np.ndarray:
    """World-frame check points, subdivided so no voxel can be skipped.

    Target spacing is min(voxel/2, natural 0.02 s spacing at the local
    speed), floored at one centimeter.
    """
    samples = primitive.samples
    pts = np.array([s.position for _, s in samples], dtype=float)
    if len(samples) < 2:
        return pts
    speeds = np.array([s.speed for _, s in samples])
    out = [pts[:1]]
    for i in range(len(samples) - 1):
        seg = pts[i + 1] - pts[i]
        seg_len = float(np.linalg.norm(seg))
        v = max(speeds[i], speeds[i + 1])
        target = max(0.01, min(0.5 * voxel_size, 0.02 * v))
        n_sub = max(1, int(math.ceil(seg_len / target)))
        if n_sub > 1:
            fracs = (np.arange(1, n_sub) / n_sub)[:, None]
            out.append(pts[i] + fracs * seg)
        out.append(pts[i + 1][None, :])
    return np.concatenate(out, axis=0)


def in_collision(selected: MotionPrimitive, stopping: MotionPrimitive,
                 field: DistanceField, clearance: float) -> bool:
    """True when any checked point of either primitive gets closer than
    the clearance to the unsafe set; points outside the map count as
    colliding because the field reports zero there."""
    for prim in (selected, stopping):
        pts_world = _dense_path_points(prim, field.voxel_size)
        pts_body = world_to_body(field.origin_state, pts_world)
        d = query_many(field, pts_body)
        if bool((d < clearance).any()):
            return True
    return False


def hca_round(predicted_state: VehicleState, raw: JoystickInput,
              alpha_prev: float, buffer: KeyframeBuffer,
              cfg: PlannerConfig, adapt: bool = True,
              checker: CheckerFn | None = None) -> PlanResult:
    """One planning round over at most three map resolutions."""
    t_start = time.perf_counter()
    if adapt:
        alpha = min(max(alpha_prev + cfg.alpha_step, cfg.alpha_min),
                    cfg.alpha_max)
        max_failures = cfg.max_level_changes
    else:
        alpha = alpha_prev
        max_failures = 1

    levels = 0
    selected = stopping = local_map = None
    v_limit = 0.0
    while True:
        v_limit = max_speed(alpha, cfg)
        limits = cfg.limits.with_v_x(v_limit)
        selected = map_joystick(predicted_state, raw, limits, cfg)
        stopping = stopping_action(selected, cfg.dt_plan, limits,
                                   cfg.sample_dt)
        local_map = build_map(buffer, alpha, cfg.counts, cfg.sensor)
        local_map = seed_robot_free(
            local_map, cfg.clearance + math.sqrt(3.0) * alpha)
        dist_field = compute(local_map)
        if checker is not None:
            hit = checker(selected, stopping, dist_field)
        else:
            hit = in_collision(selected, stopping, dist_field, cfg.clearance)
        if not hit:
            break
        levels += 1
        if adapt:
            alpha = min(max(alpha - cfg.alpha_step, cfg.alpha_min),
                        cfg.alpha_max)
        if levels >= max_failures:
            break

    duration = time.perf_counter() - t_start
    if levels >= max_failures:
        return PlanResult(OUTCOME_FALLBACK, None, None, alpha, levels,
                          v_limit, duration, local_map)
    return PlanResult(OUTCOME_PLANNED, selected, stopping, alpha, levels,
                      v_limit, duration, local_map)


@dataclass
class RoundRecord:
    """Telemetry for one 10 Hz tick."""

    time_s: float
    position: np.ndarray
    speed_mps: float
    voxel_size_m: float
    levels_tried: int
    outcome: str
    plan_time_s: float
    min_clearance_m: float
    collided: bool


@dataclass
class TeleopPipeline:
    """Holds the loop state: simulator, keyframes, and the fallback chain."""

    scenario: Scenario
    cfg: PlannerConfig
    adapt: bool = True
    checker: CheckerFn | None = None
    keep_last_map: bool = False
    sim: SimState = dc_field(init=False)
    buffer: KeyframeBuffer | None = dc_field(init=False, default=None)
    alpha_prev: float = dc_field(init=False)
    prev_stop: MotionPrimitive | None = dc_field(init=False, default=None)
    last_map: object | None = dc_field(init=False, default=None)
    _next_capture: float = dc_field(init=False, default=0.0)

    def __post_init__(self):
        self.sim = SimState(vehicle=self.scenario.start, time=0.0)
        self.alpha_prev = self.cfg.alpha_max

    def _capture_if_due(self) -> None:
        if self.sim.time + 1e-9 < self._next_capture:
            return
        depth = render_depth(self.scenario.world, self.sim.vehicle,
                             self.scenario.camera)
        frame = Keyframe(state=self.sim.vehicle, depth=depth,
                         timestamp=self.sim.time)
        if self.buffer is None:
            self.buffer = update_buffer(None, frame,
                                        distance_threshold=self.cfg.beta)
        else:
            self.buffer = update_buffer(self.buffer, frame)
        while self._next_capture <= self.sim.time + 1e-9:
            self._next_capture += self.cfg.dt_sense

    def _predicted_state(self) -> VehicleState:
        if self.sim.executing is None:
            return self.sim.vehicle
        elapsed = self.sim.time - self.sim.executing_since
        return self.sim.executing.state_at(elapsed + self.cfg.dt_plan)

    def round(self, raw: JoystickInput) -> RoundRecord:
        """Sense, plan from the predicted state, advance one period."""
        t0 = self.sim.time
        start_state = self.sim.vehicle
        self._capture_if_due()
        predicted = self._predicted_state()
        result = hca_round(predicted, raw, self.alpha_prev, self.buffer,
                           self.cfg, adapt=self.adapt, checker=self.checker)
        self.alpha_prev = result.voxel_size_out
        if self.keep_last_map:
            self.last_map = result.local_map

        # advance one planning period along the currently executing plan
        n_sub = max(1, round(self.cfg.dt_plan / self.cfg.sample_dt))
        min_clear = math.inf
        collided = False
        for _ in range(n_sub):
            self.sim = step(self.sim, self.cfg.dt_plan / n_sub)
            clear = ground_truth_clearance(self.scenario.world,
                                           self.sim.vehicle.position)
            min_clear = min(min_clear, clear)
            if clear < self.cfg.r_robot:
                collided = True

        # the freshly planned primitive takes effect one period after the
        # round started (planning latency)
        if result.outcome == OUTCOME_PLANNED:
            self.sim = self.sim.with_primitive(result.selected, self.sim.time)
            self.prev_stop = result.stopping
        else:
            if self.prev_stop is None:
                self.prev_stop = hover_primitive(predicted)
            if self.sim.executing is not self.prev_stop:
                self.sim = self.sim.with_primitive(self.prev_stop,
                                                   self.sim.time)

        return RoundRecord(
            time_s=t0,
            position=np.asarray(start_state.position, dtype=float).copy(),
            speed_mps=start_state.speed,
            voxel_size_m=result.voxel_size_out,
            levels_tried=result.levels_tried,
            outcome=result.outcome,
            plan_time_s=result.round_duration,
            min_clearance_m=min_clear,
            collided=collided,
        )
