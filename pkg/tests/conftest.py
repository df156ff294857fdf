import numpy as np
import pytest

from hca_teleop import _kernels
from hca_teleop.config import SensorModel
from hca_teleop.motion_primitives import VehicleState
from hca_teleop.occupancy_map import (CameraIntrinsics, DepthImage, Keyframe,
                                      KeyframeBuffer)


@pytest.fixture(scope="session", autouse=True)
def compiled_kernels():
    _kernels.warmup()


@pytest.fixture
def sensor():
    return SensorModel()


def single_ray_image(depth: float, max_range: float = 10.0) -> DepthImage:
    """1x1 depth image whose only ray points along the camera axis (+x body)."""
    return DepthImage(width=1, height=1, depths=np.array([[depth]]),
                      intrinsics=CameraIntrinsics(fx=1.0, fy=1.0,
                                                  cx=0.0, cy=0.0),
                      max_range=max_range)


def keyframe_at(position, yaw=0.0, depth=2.0, t=0.0,
                max_range=10.0) -> Keyframe:
    state = VehicleState(np.asarray(position, dtype=float), yaw=yaw)
    return Keyframe(state=state, depth=single_ray_image(depth, max_range),
                    timestamp=t)


def buffer_of(latest: Keyframe, past: Keyframe | None = None,
              beta: float = 0.5) -> KeyframeBuffer:
    return KeyframeBuffer(latest=latest, past=past, distance_threshold=beta)
