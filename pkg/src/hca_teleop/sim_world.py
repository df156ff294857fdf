"""Ground-truth world, depth camera, and vehicle kinematics for the bench.

Worlds are collections of axis-aligned boxes. The depth camera renders
z-depth images by exact ray/AABB intersection, the vehicle tracks its
commanded primitive perfectly, and ground-truth clearance is the exact
Euclidean distance to the nearest obstacle surface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from ._kernels import _render_depth
from .motion_primitives import MotionPrimitive, VehicleState
from .occupancy_map import R_BODY_FROM_CAM, CameraIntrinsics, DepthImage


@dataclass(frozen=True)
class CameraModel:
    """Forward-facing depth camera (D455-class field of view by default)."""

    hfov_deg: float = 87.0
    vfov_deg: float = 58.0
    width: int = 160
    height: int = 90
    max_range: float = 10.0

    def intrinsics(self) -> CameraIntrinsics:
        fx = (self.width / 2.0) / math.tan(math.radians(self.hfov_deg) / 2.0)
        fy = (self.height / 2.0) / math.tan(math.radians(self.vfov_deg) / 2.0)
        return CameraIntrinsics(fx=fx, fy=fy, cx=(self.width - 1) / 2.0,
                                cy=(self.height - 1) / 2.0)


@lru_cache(maxsize=8)
def _pixel_dirs(camera: CameraModel) -> np.ndarray:
    """(H*W, 3) camera-frame ray directions with unit z components."""
    intr = camera.intrinsics()
    us = np.arange(camera.width, dtype=float)
    vs = np.arange(camera.height, dtype=float)
    uu, vv = np.meshgrid(us, vs)          # row-major: v varies by row
    dirs = np.stack([
        (uu.ravel() - intr.cx) / intr.fx,
        (vv.ravel() - intr.cy) / intr.fy,
        np.ones(camera.width * camera.height),
    ], axis=1)
    return np.ascontiguousarray(dirs)


@dataclass(frozen=True)
class World:
    """Obstacles as an (N, 6) array of AABBs: [min_xyz, max_xyz] rows."""

    name: str
    boxes: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boxes, dtype=float).reshape(-1, 6)
        if b.size and not (b[:, 3:] > b[:, :3]).all():
            raise ValueError("boxes must have positive extent")
        object.__setattr__(self, "boxes", b)

    @staticmethod
    def from_center_size(name: str, centers_sizes) -> "World":
        rows = []
        for center, size in centers_sizes:
            c = np.asarray(center, dtype=float)
            h = 0.5 * np.asarray(size, dtype=float)
            rows.append(np.concatenate([c - h, c + h]))
        boxes = np.array(rows) if rows else np.zeros((0, 6))
        return World(name=name, boxes=boxes)


def render_depth(world: World, state: VehicleState,
                 camera: CameraModel) -> DepthImage:
    """Noise-free z-depth image from the vehicle's pose."""
    c, s = math.cos(state.yaw), math.sin(state.yaw)
    rot_wb = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    rot_wc = rot_wb @ R_BODY_FROM_CAM
    out = np.empty(camera.width * camera.height)
    _render_depth(np.asarray(state.position, dtype=float),
                  np.ascontiguousarray(rot_wc), _pixel_dirs(camera),
                  world.boxes if world.boxes.size else np.zeros((0, 6)),
                  camera.max_range, out)
    depths = out.reshape(camera.height, camera.width)
    return DepthImage(width=camera.width, height=camera.height,
                      depths=depths, intrinsics=camera.intrinsics(),
                      max_range=camera.max_range)


def ground_truth_clearance(world: World, position: np.ndarray) -> float:
    """Exact distance from a point to the nearest obstacle surface (0 inside)."""
    if not world.boxes.size:
        return math.inf
    p = np.asarray(position, dtype=float)
    lo = world.boxes[:, :3]
    hi = world.boxes[:, 3:]
    outside = np.maximum(np.maximum(lo - p, p - hi), 0.0)
    dists = np.sqrt((outside ** 2).sum(axis=1))
    return float(dists.min())


@dataclass(frozen=True)
class SimState:
    """Vehicle state plus the primitive currently being tracked."""

    vehicle: VehicleState
    time: float = 0.0
    executing: MotionPrimitive | None = None
    executing_since: float = 0.0

    def with_primitive(self, primitive: MotionPrimitive,
                       start_time: float) -> "SimState":
        return replace(self, executing=primitive, executing_since=start_time)


def step(sim: SimState, dt: float) -> SimState:
    """Advance the simulation with perfect primitive tracking."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    t1 = sim.time + dt
    if sim.executing is None:
        return replace(sim, time=t1)
    vehicle = sim.executing.state_at(t1 - sim.executing_since)
    return replace(sim, time=t1, vehicle=vehicle)


@dataclass(frozen=True)
class Scenario:
    """A world, a start pose, a goal plane, and suggested voxel bounds."""

    name: str
    world: World
    start: VehicleState
    camera: CameraModel
    goal_x: float
    seed: int = 0
    alpha_min: float = 0.1
    alpha_max: float = 0.5


def _window_world() -> tuple[World, VehicleState, float]:
    # 0.9 x 0.9 aperture centered on the start pose, wall 10 m ahead
    wall_x0, wall_x1 = 10.0, 10.2
    z0 = 1.5
    half = 0.45
    boxes = [
        (wall_x0, -10.0, z0 - 6.0, wall_x1, -half, z0 + 6.0),      # left
        (wall_x0, half, z0 - 6.0, wall_x1, 10.0, z0 + 6.0),        # right
        (wall_x0, -half, z0 - 6.0, wall_x1, half, z0 - half),      # below
        (wall_x0, -half, z0 + half, wall_x1, half, z0 + 6.0),      # above
    ]
    world = World(name="window", boxes=np.array(boxes))
    start = VehicleState(np.array([0.0, 0.0, z0]), yaw=0.0)
    return world, start, wall_x1 + 2.0


def _door_world() -> tuple[World, VehicleState, float]:
    # 0.9 m wide doorway 12 m ahead; the start pose sits 0.15 m left of the
    # opening's center line so the aperture edges land on the 0.3 m lattice
    wall_x0, wall_x1 = 12.0, 12.2
    z0 = 1.0
    y_left, y_right = -0.3, 0.6                    # relative to start y = 0
    door_top, door_bottom = 1.0, -1.0              # relative to start z
    boxes = [
        (wall_x0, -10.0, z0 - 7.0, wall_x1, y_left, z0 + 7.0),
        (wall_x0, y_right, z0 - 7.0, wall_x1, 10.0, z0 + 7.0),
        (wall_x0, y_left, z0 + door_top, wall_x1, y_right, z0 + 7.0),
        (wall_x0, y_left, z0 - 7.0, wall_x1, y_right, z0 + door_bottom),
    ]
    world = World(name="door", boxes=np.array(boxes))
    start = VehicleState(np.array([0.0, 0.0, z0]), yaw=0.0)
    return world, start, wall_x1 + 2.0


def _clutter_cave_world(seed: int) -> tuple[World, VehicleState, float]:
    """Open region, seeded pillar clutter, then a 1 m passage entrance."""
    z0 = 1.5
    boxes = [
        # corridor shell: side walls, floor, ceiling
        (-1.0, 4.0, z0 - 3.0, 40.0, 4.6, z0 + 3.0),
        (-1.0, -4.6, z0 - 3.0, 40.0, -4.0, z0 + 3.0),
        (-1.0, -4.6, z0 - 3.3, 40.0, 4.6, z0 - 3.0),
        (-1.0, -4.6, z0 + 3.0, 40.0, 4.6, z0 + 3.3),
        (-1.0, -4.6, z0 - 3.0, -0.8, 4.6, z0 + 3.0),   # back wall
    ]
    rng = np.random.default_rng(seed)
    n_pillars = 14
    for _ in range(n_pillars):
        px = rng.uniform(15.5, 29.0)
        side = 1.0 if rng.random() < 0.5 else -1.0
        py = side * rng.uniform(0.9, 3.4)
        half = rng.uniform(0.15, 0.3)
        boxes.append((px - half, py - half, z0 - 3.0,
                      px + half, py + half, z0 + 3.0))
    # narrow passage wall at x = 30 with a 1.0 m gap on the center line
    gap = 0.5
    boxes.append((30.0, -4.0, z0 - 3.0, 30.2, -gap, z0 + 3.0))
    boxes.append((30.0, gap, z0 - 3.0, 30.2, 4.0, z0 + 3.0))
    boxes.append((30.0, -gap, z0 - 3.0, 30.2, gap, z0 - gap))
    boxes.append((30.0, -gap, z0 + gap, 30.2, gap, z0 + 3.0))
    # inner passage walls
    boxes.append((30.2, 1.5, z0 - 3.0, 38.0, 2.1, z0 + 3.0))
    boxes.append((30.2, -2.1, z0 - 3.0, 38.0, -1.5, z0 + 3.0))
    world = World(name="clutter_cave", boxes=np.array(boxes))
    start = VehicleState(np.array([0.0, 0.0, z0]), yaw=0.0)
    return world, start, 32.0


SCENARIO_NAMES = ("window", "clutter_cave", "door")


def make_scenario(name: str, seed: int = 0) -> Scenario:
    """Construct one of the named benchmark scenarios."""
    camera = CameraModel()
    if name == "window":
        world, start, goal_x = _window_world()
        return Scenario(name, world, start, camera, goal_x, seed,
                        alpha_min=0.1, alpha_max=0.5)
    if name == "door":
        world, start, goal_x = _door_world()
        return Scenario(name, world, start, camera, goal_x, seed,
                        alpha_min=0.3, alpha_max=0.6)
    if name == "clutter_cave":
        world, start, goal_x = _clutter_cave_world(seed)
        return Scenario(name, world, start, camera, goal_x, seed,
                        alpha_min=0.1, alpha_max=0.5)
    raise ValueError(f"unknown scenario {name!r}; "
                     f"expected one of {SCENARIO_NAMES}")


def scenario_to_dict(scn: Scenario) -> dict:
    centers = 0.5 * (scn.world.boxes[:, :3] + scn.world.boxes[:, 3:])
    sizes = scn.world.boxes[:, 3:] - scn.world.boxes[:, :3]
    return {
        "name": scn.name,
        "seed": scn.seed,
        "boxes": [{"center": c.tolist(), "size": s.tolist()}
                  for c, s in zip(centers, sizes)],
        "start": {"position": scn.start.position.tolist(),
                  "yaw": scn.start.yaw},
        "camera": {"hfov_deg": scn.camera.hfov_deg,
                   "vfov_deg": scn.camera.vfov_deg,
                   "width": scn.camera.width,
                   "height": scn.camera.height,
                   "max_range": scn.camera.max_range},
        "goal_x": scn.goal_x,
        "alpha_min": scn.alpha_min,
        "alpha_max": scn.alpha_max,
    }


def scenario_from_dict(data: dict) -> Scenario:
    world = World.from_center_size(
        data["name"], [(b["center"], b["size"]) for b in data["boxes"]])
    start = VehicleState(np.array(data["start"]["position"], dtype=float),
                         yaw=float(data["start"]["yaw"]))
    cam = CameraModel(**data["camera"])
    return Scenario(name=data["name"], world=world, start=start, camera=cam,
                    goal_x=float(data["goal_x"]), seed=int(data.get("seed", 0)),
                    alpha_min=float(data.get("alpha_min", 0.1)),
                    alpha_max=float(data.get("alpha_max", 0.5)))


def save_scenario(scn: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scn), indent=2))


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text()))
