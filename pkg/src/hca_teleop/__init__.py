"""Adaptive-speed, variable-resolution teleoperation simulator."""

from .config import PlannerConfig, SensorModel, SpeedLimits, VoxelCounts
from .distance_field import DistanceField, compute, query
from .harness import JoystickTrace, RunReport, run, write_report
from .hca_planner import PlanResult, TeleopPipeline, hca_round, in_collision
from .motion_primitives import (JoystickInput, MotionPrimitive, VehicleState,
                                map_joystick, max_speed, propagate,
                                stopping_action)
from .occupancy_map import (DepthImage, Keyframe, KeyframeBuffer, LocalMap,
                            Occupancy, build_map, classify, insert_depth,
                            update_buffer, world_to_voxel)
from .sim_world import (CameraModel, Scenario, SimState, World,
                        ground_truth_clearance, make_scenario, render_depth,
                        step)

__version__ = "0.1.0"

__all__ = [
    "PlannerConfig", "SensorModel", "SpeedLimits", "VoxelCounts",
    "DistanceField", "compute", "query",
    "JoystickTrace", "RunReport", "run", "write_report",
    "PlanResult", "TeleopPipeline", "hca_round", "in_collision",
    "JoystickInput", "MotionPrimitive", "VehicleState", "map_joystick",
    "max_speed", "propagate", "stopping_action",
    "DepthImage", "Keyframe", "KeyframeBuffer", "LocalMap", "Occupancy",
    "build_map", "classify", "insert_depth", "update_buffer",
    "world_to_voxel",
    "CameraModel", "Scenario", "SimState", "World",
    "ground_truth_clearance", "make_scenario", "render_depth", "step",
]
