"""Body-frame local occupancy grid built from at most two depth keyframes.

The grid keeps a fixed voxel count per axis; changing the voxel size
rescales the bounding box and the whole map is regenerated from the stored
keyframes. Log-odds evidence comes from ray casting every retained depth
pixel: traversed cells accumulate free evidence, return endpoints
accumulate hit evidence, and cells holding at least one hit in a given
insertion are exempt from that insertion's free updates so grazing rays
cannot erase observed surfaces.

Depth conventions: a finite pixel value is a z-depth return, +inf means
"no return within range" (carves free space out to the range limit), and
NaN means an invalid pixel that contributes nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._kernels import _ray_counts
from .config import SensorModel, VoxelCounts
from .motion_primitives import VehicleState

# camera frame: x right, y down, z forward (optical axis)
# body frame:   x forward, y left, z up
R_BODY_FROM_CAM = np.array([
    [0.0, 0.0, 1.0],
    [-1.0, 0.0, 0.0],
    [0.0, -1.0, 0.0],
])


class Occupancy(Enum):
    FREE = "free"
    OCCUPIED = "occupied"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float


@dataclass(frozen=True)
class DepthImage:
    """Dense z-depth measurement with pinhole intrinsics."""

    width: int
    height: int
    depths: np.ndarray              # (height, width) meters, row-major
    intrinsics: CameraIntrinsics
    max_range: float

    def __post_init__(self):
        d = np.asarray(self.depths, dtype=float).reshape(self.height,
                                                         self.width)
        object.__setattr__(self, "depths", d)
        finite = d[np.isfinite(d)]
        if finite.size and (finite.min() <= 0.0
                            or finite.max() > self.max_range + 1e-9):
            raise ValueError("finite depths must lie in (0, max_range]")


@dataclass(frozen=True)
class Keyframe:
    """A stored (pose, depth image) pair."""

    state: VehicleState
    depth: DepthImage
    timestamp: float


@dataclass(frozen=True)
class KeyframeBuffer:
    """The latest keyframe plus at most one past keyframe."""

    latest: Keyframe
    past: Keyframe | None
    distance_threshold: float


def update_buffer(buffer: KeyframeBuffer | None, new: Keyframe,
                  distance_threshold: float = 0.5) -> KeyframeBuffer:
    """Install a new latest keyframe, promoting the old one when the
    vehicle has moved beyond the distance threshold from the stored past
    keyframe (or when no past keyframe exists yet)."""
    if buffer is None:
        return KeyframeBuffer(latest=new, past=None,
                              distance_threshold=distance_threshold)
    if new.timestamp < buffer.latest.timestamp:
        raise ValueError("keyframes must arrive in time order")
    if buffer.past is None:
        past = buffer.latest
    else:
        moved = float(np.linalg.norm(new.state.position
                                     - buffer.past.state.position))
        past = buffer.latest if moved > buffer.distance_threshold \
            else buffer.past
    return KeyframeBuffer(latest=new, past=past,
                          distance_threshold=buffer.distance_threshold)


@dataclass(frozen=True)
class LocalMap:
    """Immutable log-odds voxel grid centered on a vehicle state."""

    voxel_size: float
    counts: VoxelCounts
    origin_state: VehicleState
    logodds: np.ndarray             # flat, length nx*ny*nz, C order
    sensor: SensorModel

    @property
    def bbox_min(self) -> np.ndarray:
        n = np.array(self.counts.as_tuple(), dtype=float)
        return -0.5 * self.voxel_size * n

    @property
    def bbox_max(self) -> np.ndarray:
        n = np.array(self.counts.as_tuple(), dtype=float)
        return 0.5 * self.voxel_size * n

    @classmethod
    def empty(cls, voxel_size: float, counts: VoxelCounts,
              origin_state: VehicleState,
              sensor: SensorModel | None = None) -> "LocalMap":
        sensor = sensor if sensor is not None else SensorModel()
        return cls(voxel_size=voxel_size, counts=counts,
                   origin_state=origin_state,
                   logodds=np.zeros(counts.total), sensor=sensor)


def world_to_body(origin: VehicleState, points: np.ndarray) -> np.ndarray:
    """World points into the body frame of the given state (yaw only)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = pts - origin.position
    c, s = math.cos(origin.yaw), math.sin(origin.yaw)
    out = np.empty_like(d)
    out[:, 0] = c * d[:, 0] + s * d[:, 1]
    out[:, 1] = -s * d[:, 0] + c * d[:, 1]
    out[:, 2] = d[:, 2]
    return out if np.asarray(points).ndim == 2 else out[0]


def body_to_world(origin: VehicleState, points: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    c, s = math.cos(origin.yaw), math.sin(origin.yaw)
    out = np.empty_like(pts)
    out[:, 0] = c * pts[:, 0] - s * pts[:, 1] + origin.position[0]
    out[:, 1] = s * pts[:, 0] + c * pts[:, 1] + origin.position[1]
    out[:, 2] = pts[:, 2] + origin.position[2]
    return out if np.asarray(points).ndim == 2 else out[0]


def world_to_voxel(local_map: LocalMap,
                   point: np.ndarray) -> tuple[int, int, int] | None:
    """Index of the half-open cell containing a body-frame point."""
    rel = (np.asarray(point, dtype=float) - local_map.bbox_min) \
        / local_map.voxel_size
    n = local_map.counts.as_tuple()
    idx = []
    for k in range(3):
        if not (0.0 <= rel[k] < n[k]):
            return None
        idx.append(int(rel[k]))
    return tuple(idx)


def flat_index(counts: VoxelCounts, index: tuple[int, int, int]) -> int:
    ix, iy, iz = index
    return (ix * counts.ny + iy) * counts.nz + iz


def classify(local_map: LocalMap, index: tuple[int, int, int]) -> Occupancy:
    """Three-way partition of a cell by its log-odds value."""
    n = local_map.counts.as_tuple()
    for k in range(3):
        if not (0 <= index[k] < n[k]):
            raise IndexError(f"voxel index {index} out of range {n}")
    value = local_map.logodds[flat_index(local_map.counts, index)]
    if value > local_map.sensor.l_thresh_occ:
        return Occupancy.OCCUPIED
    if value < local_map.sensor.l_thresh_free:
        return Occupancy.FREE
    return Occupancy.UNKNOWN


def class_codes(local_map: LocalMap) -> np.ndarray:
    """Vectorized classification: 0 free, 1 occupied, 2 unknown."""
    codes = np.full(local_map.counts.total, 2, dtype=np.uint8)
    codes[local_map.logodds > local_map.sensor.l_thresh_occ] = 1
    codes[local_map.logodds < local_map.sensor.l_thresh_free] = 0
    return codes


def unsafe_mask(local_map: LocalMap) -> np.ndarray:
    """Occupied-or-unknown cells: everything the planner must stay clear of."""
    return ~(local_map.logodds < local_map.sensor.l_thresh_free)


def voxel_centers(local_map: LocalMap) -> np.ndarray:
    """(N, 3) body-frame cell centers in flat-index order."""
    nx, ny, nz = local_map.counts.as_tuple()
    a = local_map.voxel_size
    gx = local_map.bbox_min[0] + (np.arange(nx) + 0.5) * a
    gy = local_map.bbox_min[1] + (np.arange(ny) + 0.5) * a
    gz = local_map.bbox_min[2] + (np.arange(nz) + 0.5) * a
    xx, yy, zz = np.meshgrid(gx, gy, gz, indexing="ij")
    return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)


def _keyframe_rays(local_map: LocalMap, frame: Keyframe,
                   stride: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ray origins/endpoints in the map body frame for one keyframe."""
    depth = frame.depth
    intr = depth.intrinsics
    d = depth.depths.ravel()
    if stride > 1:
        keep = np.arange(0, d.size, stride)
    else:
        keep = np.arange(d.size)
    d = d[keep]
    valid = ~np.isnan(d)
    keep = keep[valid]
    d = d[valid]
    is_hit = np.isfinite(d)
    reach = np.where(is_hit, d, depth.max_range)

    vs, us = np.divmod(keep, depth.width)
    dirs_cam = np.stack([
        (us - intr.cx) / intr.fx,
        (vs - intr.cy) / intr.fy,
        np.ones(keep.size),
    ], axis=1)

    cam_pos = world_to_body(local_map.origin_state,
                            frame.state.position.reshape(1, 3))[0]
    dyaw = frame.state.yaw - local_map.origin_state.yaw
    c, s = math.cos(dyaw), math.sin(dyaw)
    rot_z = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    rot = rot_z @ R_BODY_FROM_CAM
    dirs_body = dirs_cam @ rot.T
    endpoints = cam_pos + reach[:, None] * dirs_body
    origins = np.broadcast_to(cam_pos, endpoints.shape).copy()
    return origins, endpoints, is_hit


def insert_depth(local_map: LocalMap, frame: Keyframe,
                 stride: int = 1) -> LocalMap:
    """Ray-cast one keyframe into the map; returns the updated map.

    Cells traversed before a return accumulate l_free per ray, return
    endpoints accumulate l_occ per ray, and any cell with a hit this
    insertion skips its free updates. Values clamp to [l_min, l_max].
    """
    origins, endpoints, is_hit = _keyframe_rays(local_map, frame, stride)
    nx, ny, nz = local_map.counts.as_tuple()
    hits = np.zeros(local_map.counts.total, dtype=np.int64)
    frees = np.zeros(local_map.counts.total, dtype=np.int64)
    if origins.shape[0]:
        _ray_counts(np.ascontiguousarray(origins),
                    np.ascontiguousarray(endpoints),
                    np.ascontiguousarray(is_hit),
                    local_map.bbox_min, local_map.voxel_size,
                    nx, ny, nz, hits, frees)
    sensor = local_map.sensor
    logodds = local_map.logodds.copy()
    hit_cells = hits > 0
    logodds[hit_cells] += sensor.l_occ * hits[hit_cells]
    free_cells = ~hit_cells & (frees > 0)
    logodds[free_cells] += sensor.l_free * frees[free_cells]
    np.clip(logodds, sensor.l_min, sensor.l_max, out=logodds)
    return LocalMap(voxel_size=local_map.voxel_size, counts=local_map.counts,
                    origin_state=local_map.origin_state, logodds=logodds,
                    sensor=sensor)


def build_map(buffer: KeyframeBuffer, voxel_size: float, counts: VoxelCounts,
              sensor: SensorModel, alpha_min: float | None = None,
              alpha_max: float | None = None) -> LocalMap:
    """Regenerate the local map at the requested voxel size.

    The map is centered on the latest keyframe's state; the past keyframe
    (when held) is expressed in that frame and inserted second. The pixel
    stride is fixed by the ray budget for a two-keyframe build, so the ray
    pattern does not depend on buffer occupancy or voxel size.
    """
    if alpha_min is not None and voxel_size < alpha_min - 1e-12:
        raise ValueError(f"voxel_size {voxel_size} below minimum {alpha_min}")
    if alpha_max is not None and voxel_size > alpha_max + 1e-12:
        raise ValueError(f"voxel_size {voxel_size} above maximum {alpha_max}")
    depth = buffer.latest.depth
    pixels_two_frames = 2 * depth.width * depth.height
    stride = max(1, math.ceil(pixels_two_frames / sensor.max_rays_per_build))
    local_map = LocalMap.empty(voxel_size, counts, buffer.latest.state,
                               sensor)
    local_map = insert_depth(local_map, buffer.latest, stride=stride)
    if buffer.past is not None:
        local_map = insert_depth(local_map, buffer.past, stride=stride)
    return local_map


def seed_robot_free(local_map: LocalMap, radius: float) -> LocalMap:
    """Force non-occupied cells near the body origin to known-free.

    The vehicle's own presence certifies the space it occupies; with a
    forward-facing camera the cells beside and behind it are otherwise
    never observed and would keep even hovering infeasible. Cells with
    positive hit evidence are left untouched.
    """
    centers = voxel_centers(local_map)
    near = np.einsum("ij,ij->i", centers, centers) <= radius * radius
    seedable = near & (local_map.logodds <= local_map.sensor.l_thresh_occ)
    if not seedable.any():
        return local_map
    logodds = local_map.logodds.copy()
    logodds[seedable] = local_map.sensor.l_min
    return LocalMap(voxel_size=local_map.voxel_size, counts=local_map.counts,
                    origin_state=local_map.origin_state, logodds=logodds,
                    sensor=local_map.sensor)
