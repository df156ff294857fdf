import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hca_teleop.config import PlannerConfig, SpeedLimits
from hca_teleop.motion_primitives import (JoystickInput, VehicleState,
                                          hover_primitive, map_joystick,
                                          max_speed, propagate, snap_to_grid,
                                          stopping_action)


def cfg_with(a_x=0.5, dv=0.0, **kw) -> PlannerConfig:
    base = PlannerConfig(**kw)
    return replace(base, limits=replace(base.limits, a_x=a_x, dv_margin=dv))


def state_at(pos=(0.0, 0.0, 0.0), yaw=0.0, v_x=0.0, v_z=0.0):
    return VehicleState(np.array(pos, dtype=float), yaw=yaw, v_x=v_x, v_z=v_z)


def residual_for(alpha, cfg):
    """Stopping-distance identity the speed bound must satisfy (dv = 0)."""
    v = max_speed(alpha, cfg)
    z_eq = min(cfg.z_max, 0.5 * alpha * cfg.counts.nx)
    margin = z_eq - cfg.clearance
    lhs = v * cfg.latency_budget + v * v / (2.0 * cfg.limits.a_x)
    return lhs - margin


class TestMaxSpeed:
    def test_zero_exactly_at_information_horizon(self):
        # (alpha/2) * nx == r_robot + r_coll collapses the bound to zero
        cfg = cfg_with(a_x=0.5, dv=0.0)
        alpha = 2.0 * cfg.clearance / cfg.counts.nx   # z_eq == clearance
        assert max_speed(alpha, cfg) == 0.0

    def test_zero_below_horizon(self):
        cfg = cfg_with()
        assert max_speed(1e-4, cfg) == 0.0

    def test_table_defaults_satisfy_stopping_quadratic(self):
        cfg = cfg_with(a_x=0.5, dv=0.0)
        v = max_speed(0.5, cfg)
        assert 2.8 < v < 3.0
        margin = 10.0 - 0.4
        assert abs(residual_for(0.5, cfg)) <= 1e-9 * margin

    def test_small_alpha_caps_horizon_at_map_extent(self):
        cfg = cfg_with(a_x=0.5, dv=0.0)
        # alpha = 0.2, nx = 40: forward extent 4 m beats the 10 m range
        z_eq = min(cfg.z_max, 0.5 * 0.2 * cfg.counts.nx)
        assert z_eq == 4.0
        assert abs(residual_for(0.2, cfg)) <= 1e-9 * (z_eq - 0.4)

    def test_safety_margin_subtracts(self):
        lo = max_speed(0.5, cfg_with(dv=0.1))
        hi = max_speed(0.5, cfg_with(dv=0.0))
        assert lo == pytest.approx(hi - 0.1)

    @given(a1=st.floats(0.02, 0.5), a2=st.floats(0.02, 0.5))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_voxel_size(self, a1, a2):
        cfg = cfg_with(a_x=0.8, dv=0.0)
        if a1 > a2:
            a1, a2 = a2, a1
        assert max_speed(a1, cfg) <= max_speed(a2, cfg) + 1e-12

    @given(alpha=st.floats(0.05, 1.0), a_x=st.floats(0.2, 4.0),
           dt_p=st.floats(0.02, 0.3), dt_m=st.floats(0.02, 0.3),
           dt_s=st.floats(0.02, 0.3), z_max=st.floats(2.0, 20.0))
    @settings(max_examples=120, deadline=None)
    def test_quadratic_root_property(self, alpha, a_x, dt_p, dt_m, dt_s,
                                     z_max):
        cfg = cfg_with(a_x=a_x, dv=0.0, dt_plan=dt_p, dt_map=dt_m,
                       dt_sense=dt_s, z_max=z_max)
        z_eq = min(z_max, 0.5 * alpha * cfg.counts.nx)
        margin = z_eq - cfg.clearance
        if margin <= 0.0:
            assert max_speed(alpha, cfg) == 0.0
        else:
            assert abs(residual_for(alpha, cfg)) <= 1e-9 * margin


def rk4_unicycle(start, command, duration, n_steps=4000):
    """Independent numeric integration of the unicycle model."""
    v_x, v_z, omega = command
    x, y, z = (float(c) for c in start.position)
    yaw = start.yaw
    dt = duration / n_steps
    for _ in range(n_steps):
        def deriv(psi):
            return (v_x * math.cos(psi), v_x * math.sin(psi), v_z, omega)
        k1 = deriv(yaw)
        k2 = deriv(yaw + 0.5 * dt * k1[3])
        k3 = deriv(yaw + 0.5 * dt * k2[3])
        k4 = deriv(yaw + dt * k3[3])
        x += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        z += dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        yaw += dt * omega
    return np.array([x, y, z]), yaw


class TestPropagate:
    def test_straight_line(self):
        samples = propagate(state_at(), (1.0, 0.0, 0.0), 1.0, 0.02)
        t_end, end = samples[-1]
        assert t_end == 1.0
        np.testing.assert_allclose(end.position, [1.0, 0.0, 0.0], atol=1e-12)
        assert end.yaw == 0.0

    def test_quarter_arc(self):
        samples = propagate(state_at(), (math.pi / 2, 0.0, math.pi / 2),
                            1.0, 0.02)
        _, end = samples[-1]
        np.testing.assert_allclose(end.position, [1.0, 1.0, 0.0], atol=1e-12)
        assert end.yaw == pytest.approx(math.pi / 2)

    def test_sample_grid(self):
        samples = propagate(state_at(), (0.5, 0.1, 0.2), 1.0, 0.02)
        times = [t for t, _ in samples]
        assert len(times) == 51
        assert times[0] == 0.0 and times[-1] == 1.0
        assert all(b > a for a, b in zip(times, times[1:]))

    @given(v_x=st.floats(-3.0, 3.0), v_z=st.floats(-1.0, 1.0),
           omega=st.floats(-0.8, 0.8), yaw0=st.floats(-3.0, 3.0),
           duration=st.floats(0.1, 2.0))
    @settings(max_examples=40, deadline=None)
    def test_matches_ode_oracle(self, v_x, v_z, omega, yaw0, duration):
        start = state_at(yaw=yaw0)
        samples = propagate(start, (v_x, v_z, omega), duration, 0.02)
        _, end = samples[-1]
        pos_ref, _ = rk4_unicycle(start, (v_x, v_z, omega), duration)
        assert np.linalg.norm(end.position - pos_ref) <= 1e-6


class TestSnapToGrid:
    def test_examples(self):
        assert snap_to_grid(1.04, 2.0, 21) == pytest.approx(1.0)
        assert snap_to_grid(2.0, 2.0, 21) == pytest.approx(2.0)
        assert snap_to_grid(0.0, 2.0, 21) == 0.0
        # exact half-step tie rounds toward zero: 0.625 on a 0.25 grid
        assert snap_to_grid(0.625, 2.5, 21) == pytest.approx(0.5)
        assert snap_to_grid(-0.625, 2.5, 21) == pytest.approx(-0.5)

    def test_zero_bound_collapses(self):
        assert snap_to_grid(0.7, 0.0, 21) == 0.0

    @given(value=st.floats(-1.0, 1.0), bound=st.floats(0.01, 5.0))
    @settings(max_examples=80, deadline=None)
    def test_within_half_step(self, value, bound):
        target = value * bound
        snapped = snap_to_grid(target, bound, 21)
        step = 2.0 * bound / 20
        assert abs(snapped) <= bound + 1e-12
        assert abs(snapped - target) <= 0.5 * step + 1e-12


class TestMapJoystick:
    def cfg(self):
        return cfg_with(a_x=0.5, dv=0.0)

    def limits(self, v_x):
        return SpeedLimits(v_x_max=v_x, v_z_max=1.0, omega_max=0.8, a_x=0.5)

    def test_zero_input_hovers(self):
        prim = map_joystick(state_at(), JoystickInput(), self.limits(2.0),
                            self.cfg())
        assert prim.command == (0.0, 0.0, 0.0)
        _, end = prim.samples[-1]
        np.testing.assert_allclose(end.position, [0.0, 0.0, 0.0], atol=1e-12)

    def test_full_stick_hits_grid_endpoint(self):
        prim = map_joystick(state_at(v_x=2.0), JoystickInput(forward=1.0),
                            self.limits(2.0), self.cfg())
        assert prim.command[0] == pytest.approx(2.0)

    def test_snap_example(self):
        prim = map_joystick(state_at(), JoystickInput(forward=0.52),
                            self.limits(2.0), self.cfg())
        assert prim.command[0] == pytest.approx(1.0)

    def test_ramp_limited_by_a_x(self):
        prim = map_joystick(state_at(v_x=0.0), JoystickInput(forward=1.0),
                            self.limits(2.0), self.cfg())
        for (t0, s0), (t1, s1) in zip(prim.samples, prim.samples[1:]):
            accel = (s1.v_x - s0.v_x) / (t1 - t0)
            assert accel <= 0.5 + 1e-9

    @given(fwd=st.floats(-1.0, 1.0), vert=st.floats(-1.0, 1.0),
           yaw_ax=st.floats(-1.0, 1.0), v_max=st.floats(0.0, 3.0))
    @settings(max_examples=60, deadline=None)
    def test_command_within_limits(self, fwd, vert, yaw_ax, v_max):
        limits = self.limits(v_max)
        prim = map_joystick(state_at(),
                            JoystickInput(forward=fwd, vertical=vert,
                                          yaw=yaw_ax), limits, self.cfg())
        v, vz, w = prim.command
        assert abs(v) <= limits.v_x_max + 1e-12
        assert abs(vz) <= limits.v_z_max + 1e-12
        assert abs(w) <= limits.omega_max + 1e-12


class TestStoppingAction:
    def limits(self):
        return SpeedLimits(v_x_max=2.0, v_z_max=1.0, omega_max=0.8, a_x=0.5)

    def test_stop_from_rest_is_degenerate(self):
        sel = map_joystick(state_at(), JoystickInput(), self.limits(),
                           cfg_with())
        stop = stopping_action(sel, 0.1, self.limits())
        assert stop.duration == 0.0
        assert len(stop.samples) == 1
        assert stop.samples[0][1].speed == 0.0

    def test_duration_and_distance_closed_form(self):
        sel_samples_cmd = (1.0, 0.0, 0.0)
        sel = map_joystick(state_at(v_x=1.0), JoystickInput(forward=0.5),
                           self.limits(), cfg_with())
        assert sel.command == sel_samples_cmd
        stop = stopping_action(sel, 0.1, self.limits())
        assert stop.duration == pytest.approx(2.0)
        assert stop.path_length() == pytest.approx(1.0, abs=1e-6)

    def test_terminal_speed_exactly_zero(self):
        sel = map_joystick(state_at(v_x=1.7), JoystickInput(forward=1.0,
                                                            yaw=0.5),
                           self.limits(), cfg_with())
        stop = stopping_action(sel, 0.1, self.limits())
        _, end = stop.samples[-1]
        assert end.v_x == 0.0 and end.v_z == 0.0

    def test_travel_bounded_by_information_horizon(self):
        # a maximum-speed plan plus its stop must fit inside z_eq - clearance
        cfg = cfg_with(a_x=0.5, dv=0.0)
        for alpha in (0.2, 0.35, 0.5):
            v = max_speed(alpha, cfg)
            z_eq = min(cfg.z_max, 0.5 * alpha * cfg.counts.nx)
            limits = replace(cfg.limits, v_x_max=v)
            sel = map_joystick(state_at(v_x=v), JoystickInput(forward=1.0),
                               limits, cfg)
            stop = stopping_action(sel, cfg.dt_plan, limits, cfg.sample_dt)
            executed = sel.state_at(cfg.dt_plan).position[0]
            total = executed + stop.path_length()
            assert total <= z_eq - cfg.clearance + 1e-9

    def test_hover_primitive_is_stationary(self):
        prim = hover_primitive(state_at(pos=(1.0, 2.0, 3.0), yaw=0.3))
        assert prim.samples[0][1].speed == 0.0
        np.testing.assert_allclose(prim.samples[0][1].position,
                                   [1.0, 2.0, 3.0])
