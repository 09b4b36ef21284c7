"""Kinematic closed-loop flight simulator.

Each control cycle: simulated LiDAR scan, map integration, waypoint tracking,
one reactive planning step, first-order velocity dynamics, obstacle motion.
Ground-truth scene clearance drives the collision check; the planner only
ever sees the voxel map built from the scans.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from .config import PlannerConfig
from .flight_log import LogRecord, LogSummary, summarize, write_flight_log
from .global_planner import (GlobalPlannerConfig, Path, Variant, plan_naive,
                             plan_rrt_star)
from .local_planner import DroneState, PlanResult, plan, wrap_angle
from .scenarios import ScenarioSpec
from .scene import SensorModel, lidar_scan
from .voxel_map import VoxelMap

OUTCOME_SUCCESS = "success"
OUTCOME_COLLISION = "collision"
OUTCOME_TIMEOUT = "timeout"
OUTCOME_STALL = "stall"

EXIT_CODES = {OUTCOME_SUCCESS: 0, OUTCOME_COLLISION: 2,
              OUTCOME_TIMEOUT: 3, OUTCOME_STALL: 4}


@dataclass(frozen=True)
class SimConfig:
    timeout: float = 120.0          # simulated seconds
    init_scans: int = 3             # scans folded in before takeoff
    clear_radius: float = 1.0       # free bubble around the start pose
    map_resolution: float = 0.1
    map_margin: float = 0.3         # map extends this far beyond the arena
    waypoint_switch_radius: float = 0.3
    waypoint_patience: int = 100    # cycles without progress before skipping
    waypoint_progress_eps: float = 0.05
    stall_window: int = 150         # control cycles
    stall_eps: float = 0.02         # m of net motion below which we stall
    no_admissible_limit: int = 50   # consecutive empty windows before stall
    planner_bounds_inset: float = 0.5

    def __post_init__(self):
        if self.timeout <= 0.0 or self.map_resolution <= 0.0:
            raise ValueError("timeout and map_resolution must be positive")
        if self.stall_window < 2:
            raise ValueError("stall_window must be at least 2 cycles")


def step_dynamics(s: DroneState, cmd, limits, dt: float) -> DroneState:
    """First-order velocity response, then pose integration over dt.

    Velocities slew toward the command at the acceleration limits; the new
    yaw steers the translation, matching the planner's motion model.
    """
    def slew(current, target, rate):
        return current + max(-rate * dt, min(rate * dt, target - current))

    s.vcx = min(limits.vx_max, max(0.0, slew(s.vcx, cmd.vx, limits.ax_max)))
    s.vcz = min(limits.vz_max, max(-limits.vz_max,
                                   slew(s.vcz, cmd.vz, limits.az_max)))
    s.wcz = min(limits.wz_max, max(-limits.wz_max,
                                   slew(s.wcz, cmd.wz, limits.alpha_z_max)))
    s.psi = wrap_angle(s.psi + s.wcz * dt)
    s.x += s.vcx * dt * math.cos(s.psi)
    s.y += s.vcx * dt * math.sin(s.psi)
    s.z += s.vcz * dt
    return s


@dataclass
class TrackerState:
    """Walks the global waypoint list; the final waypoint is never skipped.

    A waypoint is passed either by proximity (within the switch radius) or by
    bypass: the vehicle is already closer to the next waypoint than the
    current one is. The bypass clause matters for not-size-aware paths, whose
    waypoints can hug obstacles so tightly that the vehicle can never close
    to within the switch radius without colliding.

    As a last resort, an intermediate waypoint the vehicle has stopped
    closing on for `patience` consecutive updates is skipped outright: a
    waypoint placed right against an obstacle surface can repel the reactive
    layer into a stable orbit that neither clause above ever exits. The final
    waypoint is still never skipped. `patience = 0` disables the timeout.
    """
    waypoints: List[np.ndarray]
    switch_radius: float
    index: int = 1                  # waypoint 0 is the start pose
    patience: int = 0
    progress_eps: float = 0.05
    _best: float = math.inf
    _stale: int = 0

    def update(self, position) -> np.ndarray:
        p = np.asarray(position, dtype=float)
        start_index = self.index
        while self.index < len(self.waypoints) - 1:
            wp = self.waypoints[self.index]
            nxt = self.waypoints[self.index + 1]
            if (np.linalg.norm(wp - p) <= self.switch_radius
                    or np.linalg.norm(nxt - p) < np.linalg.norm(nxt - wp)):
                self.index += 1
            else:
                break
        if self.index != start_index:
            self._best, self._stale = math.inf, 0
        elif self.patience and self.index < len(self.waypoints) - 1:
            d = float(np.linalg.norm(self.waypoints[self.index] - p))
            if d < self._best - self.progress_eps:
                self._best, self._stale = d, 0
            else:
                self._stale += 1
                if self._stale >= self.patience:
                    self.index += 1
                    self._best, self._stale = math.inf, 0
        return self.waypoints[self.index]


@dataclass
class FlightResult:
    outcome: str
    records: List[LogRecord]
    summary: LogSummary
    path: Path
    scenario: ScenarioSpec
    variant: Variant
    seed: int
    sim_time: float
    min_clearance: float
    final_state: DroneState

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.outcome]

    def header(self) -> dict:
        spec_doc = self.scenario.to_dict()
        return {
            "scenario": self.scenario.name,
            "bounds": spec_doc["bounds"],
            "primitives": spec_doc["primitives"],
            "seed": self.seed,
            "variant": self.variant.value,
            "avoidance": self.scenario.avoidance,
            "r_drone": self.scenario.r_drone,
            "start": list(self.scenario.start),
            "goal": list(self.scenario.goal),
            "goal_tolerance": self.scenario.goal_tolerance,
            "waypoints": [list(map(float, w)) for w in self.path.waypoints],
        }

    def write_log(self, path):
        write_flight_log(path, self.header(), self.records, self.summary)


def planner_config_for(spec: ScenarioSpec,
                       base: Optional[PlannerConfig] = None) -> PlannerConfig:
    """Apply the scenario's avoidance mode and limit overrides."""
    cfg = (base or PlannerConfig()).with_avoidance(spec.avoidance)
    if spec.vx_max_override is not None:
        cfg = replace(cfg, limits=replace(cfg.limits, vx_max=spec.vx_max_override))
    if spec.r_search_override is not None:
        cfg = replace(cfg, beam=replace(cfg.beam, r_search=spec.r_search_override))
    return cfg


def global_config_for(spec: ScenarioSpec, seed: int,
                      sim: SimConfig) -> GlobalPlannerConfig:
    lo = np.asarray(spec.bounds_lo, dtype=float) + sim.planner_bounds_inset
    hi = np.asarray(spec.bounds_hi, dtype=float) - sim.planner_bounds_inset
    kwargs = dict(rng_seed=seed, bounds_lo=tuple(lo), bounds_hi=tuple(hi))
    if spec.safety_override is not None:
        kwargs["safety_distance"] = spec.safety_override
    return GlobalPlannerConfig(**kwargs)


class Simulation:
    """One flight; step() advances a single control cycle."""

    # Denser than the sensor default: at 0.1 m voxels the flight-control maps
    # need ray spacing under one voxel out to r_search, or the gaps between
    # rays stay unknown and read as phantom obstacles.
    DEFAULT_SENSOR = SensorModel(azimuth_count=128, elevation_count=32)

    def __init__(self, spec: ScenarioSpec, variant="rrt-size", seed: int = 0,
                 planner: Optional[PlannerConfig] = None,
                 sim: SimConfig = SimConfig(),
                 sensor: Optional[SensorModel] = None,
                 global_config: Optional[GlobalPlannerConfig] = None,
                 path: Optional[Path] = None):
        self.spec = spec
        if path is not None:
            variant = path.variant   # replayed plans carry their own variant
        self.variant = Variant(variant) if not isinstance(variant, Variant) else variant
        if path is None and self.variant.value not in spec.applicable_variants:
            raise ValueError(
                f"variant {self.variant.value!r} is not applicable to "
                f"scenario {spec.name!r}")
        self.seed = seed
        self.sim = sim
        self.sensor = sensor or self.DEFAULT_SENSOR
        self.planner = planner_config_for(spec, planner)
        self.scene = spec.scene()
        self.t = 0.0
        self.records: List[LogRecord] = []
        self.min_clearance = math.inf
        self.outcome: Optional[str] = None
        self.last_plan: Optional[PlanResult] = None
        self._trail = deque(maxlen=sim.stall_window)

        lo = np.asarray(spec.bounds_lo, dtype=float) - sim.map_margin
        hi = np.asarray(spec.bounds_hi, dtype=float) + sim.map_margin
        ext = np.ceil((hi - lo) / sim.map_resolution).astype(int)
        self.vmap = VoxelMap(lo, sim.map_resolution, tuple(ext))

        sx, sy, sz, syaw = spec.start
        self.state = DroneState(sx, sy, sz, syaw)
        self.goal = np.asarray(spec.goal, dtype=float)
        self.vmap.set_free_sphere(self.state.position(), sim.clear_radius)
        for _ in range(sim.init_scans):
            self._scan()

        self._no_adm_streak = 0
        gcfg = global_config or global_config_for(spec, seed, sim)
        if path is not None:
            self.path = path
        elif self.variant == Variant.NAIVE:
            self.path = plan_naive(self.state.position(), self.goal, gcfg)
        else:
            self.path = plan_rrt_star(self.vmap, self.state.position(),
                                      self.goal, gcfg, self.variant)
        self.tracker = TrackerState(self.path.waypoints,
                                    sim.waypoint_switch_radius,
                                    patience=sim.waypoint_patience,
                                    progress_eps=sim.waypoint_progress_eps)

    # ------------------------------------------------------------------

    def _scan(self):
        pts = lidar_scan(self.scene, self.state.position(), self.state.psi,
                         self.sensor)
        self.vmap.integrate_scan(self.state.position(), pts)

    def _goal_distance(self) -> float:
        return float(np.linalg.norm(self.goal - self.state.position()))

    def step(self) -> Optional[str]:
        """Run one control cycle; returns the outcome once the flight ends."""
        if self.outcome is not None:
            return self.outcome
        s = self.state
        self._scan()

        clearance = self.scene.clearance(s.position())
        self.min_clearance = min(self.min_clearance, clearance)
        if clearance < self.spec.r_drone:
            self.outcome = OUTCOME_COLLISION

        subgoal = self.tracker.update(s.position())
        t0 = time.perf_counter()
        result = plan(s, subgoal, self.vmap, self.planner)
        planning_ms = (time.perf_counter() - t0) * 1e3
        self.last_plan = result
        self._no_adm_streak = (self._no_adm_streak + 1
                               if result.no_admissible else 0)
        cmd = result.command

        self.records.append(LogRecord(
            t=self.t, x=s.x, y=s.y, z=s.z, psi=s.psi,
            vcx=s.vcx, vcz=s.vcz, wcz=s.wcz,
            cmd_vx=cmd.vx, cmd_vz=cmd.vz, cmd_wz=cmd.wz,
            clearance=clearance, planning_ms=planning_ms,
            subgoal=[float(v) for v in subgoal],
            waypoint_index=self.tracker.index,
            n_admissible=result.n_admissible))
        if self.outcome is not None:
            return self.outcome

        step_dynamics(s, cmd, self.planner.limits, self.planner.control_period)
        self.scene.advance(self.planner.control_period)
        self.t += self.planner.control_period

        self._trail.append(s.position())
        if self._goal_distance() <= self.spec.goal_tolerance:
            self.outcome = OUTCOME_SUCCESS
        elif self.t >= self.sim.timeout:
            self.outcome = OUTCOME_TIMEOUT
        elif self._no_adm_streak >= self.sim.no_admissible_limit:
            self.outcome = OUTCOME_STALL
        elif (len(self._trail) == self.sim.stall_window
              and float(np.linalg.norm(self._trail[-1] - self._trail[0]))
              < self.sim.stall_eps):
            self.outcome = OUTCOME_STALL
        return self.outcome

    def run(self, on_cycle: Optional[Callable[["Simulation"], None]] = None
            ) -> FlightResult:
        while self.outcome is None:
            self.step()
            if on_cycle is not None:
                on_cycle(self)
        summary = summarize(self.records, self.outcome, self.t,
                            self.min_clearance)
        return FlightResult(
            outcome=self.outcome, records=self.records, summary=summary,
            path=self.path, scenario=self.spec, variant=self.variant,
            seed=self.seed, sim_time=self.t,
            min_clearance=self.min_clearance, final_state=self.state)


def run_flight(spec: ScenarioSpec, variant="rrt-size", seed: int = 0,
               planner: Optional[PlannerConfig] = None,
               sim: SimConfig = SimConfig(),
               sensor: Optional[SensorModel] = None,
               on_cycle=None) -> FlightResult:
    """Convenience wrapper: build a Simulation and run it to termination."""
    return Simulation(spec, variant, seed, planner, sim, sensor).run(on_cycle)
