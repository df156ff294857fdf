"""Planner configuration.

All tunables live here: loop timings, voxel-size bounds, grid dimensions,
sensing range, robot geometry, speed limits, and the occupancy sensor model.
Defaults match the parameter set used for every experiment scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class VoxelCounts:
    """Number of voxels per body axis. Fixed for the lifetime of a run."""

    nx: int = 40
    ny: int = 20
    nz: int = 20

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 2:
            raise ValueError(f"voxel counts must each be >= 2, got {self}")

    @property
    def total(self) -> int:
        return self.nx * self.ny * self.nz

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)


@dataclass(frozen=True)
class SpeedLimits:
    """Velocity command bounds for primitive generation.

    v_x_max is recomputed every planning round from the current voxel size;
    the other limits stay constant throughout a run.
    """

    v_x_max: float = 0.0        # m/s, forward; set per round
    v_z_max: float = 1.0        # m/s, vertical
    omega_max: float = 0.8      # rad/s, yaw
    a_x: float = 0.5            # m/s^2, max deceleration (also ramp accel)
    dv_margin: float = 0.1      # m/s, safety reduction for unmodeled lag

    def with_v_x(self, v_x_max: float) -> "SpeedLimits":
        return replace(self, v_x_max=v_x_max)


@dataclass(frozen=True)
class SensorModel:
    """Occupancy update model for depth-ray insertion.

    Log-odds increments follow common occupancy-mapping practice
    (p_hit=0.7, p_miss=0.4 equivalents) with clamping.
    """

    l_occ: float = 0.85
    l_free: float = -0.4
    l_min: float = -2.0
    l_max: float = 3.5
    occ_eps: float = 0.01       # classification band half-width around 0
    max_rays_per_build: int = 20000

    @property
    def l_thresh_occ(self) -> float:
        return self.occ_eps

    @property
    def l_thresh_free(self) -> float:
        return -self.occ_eps


@dataclass(frozen=True)
class PlannerConfig:
    """Everything the planning loop needs, in one immutable bundle."""

    dt_plan: float = 0.1        # s, planning period
    dt_map: float = 0.08        # s, mapping budget
    dt_sense: float = 0.07      # s, sensing period
    alpha_step: float = 0.01    # m, voxel-size change per collision level
    alpha_min: float = 0.1      # m
    alpha_max: float = 0.5      # m
    counts: VoxelCounts = field(default_factory=VoxelCounts)
    z_max: float = 10.0         # m, depth sensing range
    r_robot: float = 0.3        # m, robot half-extent (fits a cube of side 0.6)
    r_coll: float = 0.1         # m, extra collision tolerance
    beta: float = 0.5           # m, past-keyframe distance threshold
    max_level_changes: int = 3  # map rebuilds allowed per planning round
    limits: SpeedLimits = field(default_factory=SpeedLimits)
    sensor: SensorModel = field(default_factory=SensorModel)
    primitive_duration: float = 1.0   # s, selected-primitive horizon
    sample_dt: float = 0.02           # s, primitive sample spacing
    omega_eps: float = 1e-6           # rad/s, straight-line switch
    joystick_levels: int = 21         # grid points per command axis (odd: includes 0)

    def __post_init__(self):
        if not (self.alpha_min <= self.alpha_max):
            raise ValueError("alpha_min must not exceed alpha_max")
        if self.alpha_step <= 0:
            raise ValueError("alpha_step must be positive")

    @property
    def clearance(self) -> float:
        """Minimum allowed distance from the unsafe set, in meters."""
        return self.r_robot + self.r_coll

    @property
    def latency_budget(self) -> float:
        """Total reaction latency: sensing + mapping + two planning periods."""
        return self.dt_sense + self.dt_map + 2.0 * self.dt_plan
