"""Forward-arc motion primitives and the resolution-coupled speed bound.

A primitive is a constant (or piecewise-ramped) command of forward speed,
vertical speed and yaw rate, propagated through unicycle kinematics in
closed form. The maximum forward speed is recomputed every planning round
from the local map's forward information horizon, so that a worst-case
stop always completes inside mapped space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import PlannerConfig, SpeedLimits

KIND_SELECTED = "selected"
KIND_STOPPING = "stopping"


def normalize_yaw(yaw: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    y = math.remainder(yaw, math.tau)
    if y <= -math.pi:
        y += math.tau
    return y


@dataclass(frozen=True)
class VehicleState:
    """World position, heading, and body-frame velocity commands."""

    position: np.ndarray            # (3,) world meters
    yaw: float                      # rad, normalized to (-pi, pi]
    v_x: float = 0.0                # m/s forward (body x)
    v_z: float = 0.0                # m/s vertical (body z)
    yaw_rate: float = 0.0           # rad/s

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    @property
    def speed(self) -> float:
        return math.hypot(self.v_x, self.v_z)


@dataclass(frozen=True)
class JoystickInput:
    """Raw operator axes (forward, vertical, yaw), each clamped to [-1, 1]."""

    forward: float = 0.0
    vertical: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        for name in ("forward", "vertical", "yaw"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, min(1.0, max(-1.0, v)))


@dataclass(frozen=True)
class _Segment:
    """One constant-acceleration stretch of a forward arc."""

    t0: float
    t1: float
    v0: float       # forward speed at t0
    a: float        # forward acceleration
    vz0: float      # vertical speed at t0
    az: float       # vertical acceleration
    omega: float    # yaw rate, constant over the segment


def _advance(x, y, z, yaw, v0, a, vz0, az, omega, tau, omega_eps):
    """Closed-form unicycle propagation over one segment interval."""
    if abs(omega) <= omega_eps:
        dist = v0 * tau + 0.5 * a * tau * tau
        x += dist * math.cos(yaw)
        y += dist * math.sin(yaw)
    else:
        yaw1 = yaw + omega * tau
        v1 = v0 + a * tau
        inv_w = 1.0 / omega
        x += (v1 * math.sin(yaw1) - v0 * math.sin(yaw)) * inv_w \
            + a * inv_w * inv_w * (math.cos(yaw1) - math.cos(yaw))
        y += (-v1 * math.cos(yaw1) + v0 * math.cos(yaw)) * inv_w \
            + a * inv_w * inv_w * (math.sin(yaw1) - math.sin(yaw))
    z += vz0 * tau + 0.5 * az * tau * tau
    return x, y, z, yaw + omega * tau, v0 + a * tau, vz0 + az * tau


@dataclass(frozen=True)
class MotionPrimitive:
    """A sampled forward-arc trajectory plus the command that produced it."""

    command: tuple[float, float, float]     # (v_x, v_z, omega) targets
    duration: float
    start: VehicleState
    kind: str
    segments: tuple[_Segment, ...]
    omega_eps: float = 1e-6
    samples: tuple[tuple[float, VehicleState], ...] = field(default=(), compare=False)

    def state_at(self, t: float) -> VehicleState:
        """Evaluate the closed-form trajectory at time t (clamped to [0, T])."""
        if t <= 0.0:
            return self.start
        if t >= self.duration and self.samples:
            return self.samples[-1][1]
        t = min(t, self.duration)
        x, y, z = (float(c) for c in self.start.position)
        yaw = self.start.yaw
        for seg in self.segments:
            tau = min(t, seg.t1) - seg.t0
            if tau <= 0.0:
                break
            x, y, z, yaw, v, vz = _advance(
                x, y, z, yaw, seg.v0, seg.a, seg.vz0, seg.az, seg.omega,
                tau, self.omega_eps)
            if t <= seg.t1:
                return VehicleState(np.array([x, y, z]), yaw,
                                    v_x=v, v_z=vz, yaw_rate=seg.omega)
        return VehicleState(np.array([x, y, z]), yaw, v_x=0.0, v_z=0.0,
                            yaw_rate=0.0)

    def path_length(self) -> float:
        """Arc length of the sampled trajectory (trapezoid on linear speeds)."""
        speeds = [s.speed for _, s in self.samples]
        times = [t for t, _ in self.samples]
        if len(times) < 2:
            return 0.0
        return float(np.trapezoid(speeds, times))


def _sample_times(duration: float, sample_dt: float) -> list[float]:
    if duration <= 0.0:
        return [0.0]
    n = int(duration / sample_dt)
    times = [i * sample_dt for i in range(n + 1)]
    if times[-1] < duration - 1e-12:
        times.append(duration)
    else:
        times[-1] = duration
    return times


def _build_primitive(start, command, duration, segments, sample_dt, kind,
                     omega_eps) -> MotionPrimitive:
    prim = MotionPrimitive(command=command, duration=duration, start=start,
                           kind=kind, segments=tuple(segments),
                           omega_eps=omega_eps)
    samples = [(t, prim.state_at(t)) for t in _sample_times(duration, sample_dt)]
    if kind == KIND_STOPPING and samples:
        t_end, s_end = samples[-1]
        samples[-1] = (t_end, VehicleState(s_end.position, s_end.yaw,
                                           v_x=0.0, v_z=0.0, yaw_rate=0.0))
    object.__setattr__(prim, "samples", tuple(samples))
    return prim


def max_speed(voxel_size: float, cfg: PlannerConfig) -> float:
    """Upper bound on forward speed for the given map resolution.

    The map certifies free space only out to the forward information
    horizon z_eq = min(z_max, (alpha/2) * nx). The bound is the largest V
    whose reaction travel plus braking distance fits inside that horizon:

        V * dt_latency + V^2 / (2 * a_x) = z_eq - (r_robot + r_coll)

    reduced by a constant safety margin for unmodeled actuation lag.
    """
    if voxel_size <= 0.0:
        raise ValueError("voxel_size must be positive")
    z_eq = min(cfg.z_max, 0.5 * voxel_size * cfg.counts.nx)
    margin = z_eq - cfg.clearance
    if margin <= 0.0:
        return 0.0
    t_l = cfg.latency_budget
    a = cfg.limits.a_x
    v_ideal = a * (math.sqrt(t_l * t_l + 2.0 * margin / a) - t_l)
    return max(0.0, v_ideal - cfg.limits.dv_margin)


def propagate(start: VehicleState, command: tuple[float, float, float],
              duration: float, sample_dt: float,
              omega_eps: float = 1e-6) -> list[tuple[float, VehicleState]]:
    """Constant-command forward arc sampled on a fixed time grid."""
    if sample_dt <= 0.0:
        raise ValueError("sample_dt must be positive")
    v_x, v_z, omega = command
    seg = _Segment(0.0, duration, v_x, 0.0, v_z, 0.0, omega)
    prim = _build_primitive(start, command, duration, [seg], sample_dt,
                            KIND_SELECTED, omega_eps)
    return list(prim.samples)


def snap_to_grid(value: float, bound: float, levels: int) -> float:
    """Snap to the nearest of `levels` uniform points on [-bound, bound].

    Exact half-step ties break toward zero.
    """
    if bound <= 0.0 or levels < 2:
        return 0.0
    step = 2.0 * bound / (levels - 1)
    if step <= 0.0:                 # denormal bound underflows the step
        return 0.0
    m = abs(value) / step
    k = math.floor(m + 0.5)
    if m + 0.5 == k:
        k -= 1
    k = min(k, (levels - 1) // 2)
    return math.copysign(k * step, value) if k else 0.0


def map_joystick(state: VehicleState, raw: JoystickInput, limits: SpeedLimits,
                 cfg: PlannerConfig) -> MotionPrimitive:
    """Map raw axes to the closest primitive on the command grid.

    Axes scale to the current bounds, snap to a uniform grid per axis, and
    the forward speed ramps from the state's current speed toward the
    command at the deceleration limit.
    """
    v_cmd = snap_to_grid(raw.forward * limits.v_x_max, limits.v_x_max,
                         cfg.joystick_levels)
    vz_cmd = snap_to_grid(raw.vertical * limits.v_z_max, limits.v_z_max,
                          cfg.joystick_levels)
    w_cmd = snap_to_grid(raw.yaw * limits.omega_max, limits.omega_max,
                         cfg.joystick_levels)

    duration = cfg.primitive_duration
    v0 = state.v_x
    dv = v_cmd - v0
    segments: list[_Segment] = []
    if abs(dv) < 1e-12:
        segments.append(_Segment(0.0, duration, v0, 0.0, vz_cmd, 0.0, w_cmd))
    else:
        a = math.copysign(limits.a_x, dv)
        t_ramp = abs(dv) / limits.a_x
        if t_ramp >= duration:
            segments.append(_Segment(0.0, duration, v0, a, vz_cmd, 0.0, w_cmd))
        else:
            segments.append(_Segment(0.0, t_ramp, v0, a, vz_cmd, 0.0, w_cmd))
            segments.append(_Segment(t_ramp, duration, v_cmd, 0.0, vz_cmd,
                                     0.0, w_cmd))
    start = VehicleState(state.position, state.yaw, v_x=v0, v_z=vz_cmd,
                         yaw_rate=w_cmd)
    return _build_primitive(start, (v_cmd, vz_cmd, w_cmd), duration, segments,
                            cfg.sample_dt, KIND_SELECTED, cfg.omega_eps)


def stopping_action(selected: MotionPrimitive, planning_dt: float,
                    limits: SpeedLimits,
                    sample_dt: float = 0.02) -> MotionPrimitive:
    """Fallback primitive: decelerate to rest along the current arc.

    Starts from the selected primitive's state one planning period in,
    scales (v_x, v_z) down together at rate a_x, and holds yaw rate until
    the speed reaches exactly zero.
    """
    s0 = selected.state_at(planning_dt)
    speed = s0.speed
    if speed <= 1e-12:
        rest = VehicleState(s0.position, s0.yaw, v_x=0.0, v_z=0.0,
                            yaw_rate=0.0)
        return MotionPrimitive(command=(0.0, 0.0, 0.0), duration=0.0,
                               start=rest, kind=KIND_STOPPING, segments=(),
                               samples=((0.0, rest),))
    t_stop = speed / limits.a_x
    omega = selected.command[2]
    seg = _Segment(0.0, t_stop, s0.v_x, -s0.v_x / t_stop,
                   s0.v_z, -s0.v_z / t_stop, omega)
    return _build_primitive(s0, (0.0, 0.0, omega), t_stop, [seg], sample_dt,
                            KIND_STOPPING, selected.omega_eps)


def hover_primitive(state: VehicleState) -> MotionPrimitive:
    """Zero-motion fallback for the cold-start case with no stored stop."""
    rest = VehicleState(state.position, state.yaw, v_x=0.0, v_z=0.0,
                        yaw_rate=0.0)
    return MotionPrimitive(command=(0.0, 0.0, 0.0), duration=0.0, start=rest,
                           kind=KIND_STOPPING, segments=(),
                           samples=((0.0, rest),))
