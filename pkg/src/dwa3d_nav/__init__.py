"""Desk-scale UAV navigation stack: voxel mapping, a 3D dynamic-window
reactive planner, RRT*-based waypoint planning and a closed-loop simulator."""

from .config import (BeamParams, Discretization, Limits, ObjectiveWeights,
                     PlannerConfig)
from .global_planner import (GlobalPlannerConfig, Path, PlanningError, Variant,
                             load_path, plan_naive, plan_rrt_star)
from .local_planner import (DroneState, PlanResult, VelocityCommand, plan,
                            predict_pose, validate_weights)
from .scenarios import ScenarioSpec, builtin, load_scenario, save_scenario
from .simulator import FlightResult, SimConfig, Simulation, run_flight
from .voxel_map import OccupancyParams, VoxelMap

__version__ = "0.1.0"

__all__ = [
    "BeamParams", "Discretization", "Limits", "ObjectiveWeights",
    "PlannerConfig", "GlobalPlannerConfig", "Path", "PlanningError", "Variant",
    "load_path", "plan_naive", "plan_rrt_star", "DroneState", "PlanResult",
    "VelocityCommand", "plan", "predict_pose", "validate_weights",
    "ScenarioSpec", "builtin", "load_scenario", "save_scenario",
    "FlightResult", "SimConfig", "Simulation", "run_flight",
    "OccupancyParams", "VoxelMap", "__version__",
]
