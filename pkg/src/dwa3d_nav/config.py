"""Planner configuration: velocity limits, objective weights, beam geometry.

Defaults follow the recommended desk-scale values (0.3 m/s axes, 45 deg/s yaw,
1 m/s^2 accelerations, alpha/beta/gamma = 0.3/0.6/0.1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class Limits:
    """Velocity and acceleration bounds of the vehicle."""

    vx_max: float = 0.3          # m/s, forward
    vz_max: float = 0.3          # m/s, vertical (symmetric)
    wz_max: float = math.radians(45.0)   # rad/s, yaw rate
    ax_max: float = 1.0          # m/s^2
    az_max: float = 1.0          # m/s^2
    alpha_z_max: float = math.radians(100.0)  # rad/s^2
    a_brake_max: float = 1.0     # m/s^2, deceleration used in admissibility

    def __post_init__(self):
        for name in ("vx_max", "vz_max", "wz_max", "ax_max", "az_max",
                     "alpha_z_max", "a_brake_max"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"Limits.{name} must be strictly positive")


@dataclass(frozen=True)
class ObjectiveWeights:
    alpha: float = 0.3
    beta: float = 0.6
    gamma: float = 0.1
    k_psi: float = 0.2
    k_z: float = 0.8

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "k_psi", "k_z"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"ObjectiveWeights.{name} must be in [0, 1]")
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-9:
            raise ValueError("alpha + beta + gamma must equal 1")
        if abs(self.k_psi + self.k_z - 1.0) > 1e-9:
            raise ValueError("k_psi + k_z must equal 1")

    @classmethod
    def lateral_avoidance(cls, alpha=0.3, beta=0.6, gamma=0.1):
        """Height tracking dominates: obstacles are dodged sideways."""
        return cls(alpha, beta, gamma, k_psi=0.2, k_z=0.8)

    @classmethod
    def vertical_avoidance(cls, alpha=0.3, beta=0.6, gamma=0.1):
        """Goal orientation dominates: obstacles are flown over or under."""
        return cls(alpha, beta, gamma, k_psi=0.8, k_z=0.2)


@dataclass(frozen=True)
class BeamParams:
    """Geometry of the distance-evaluation ray fan."""

    r_search: float = 1.5
    lam_psi: float = 0.5
    lam_theta: float = 0.75
    psi_max: float = math.radians(90.0)
    theta_max: float = math.radians(90.0)
    d_psi: float = math.radians(10.0)
    d_theta: float = math.radians(10.0)
    r_drone: float = 0.4
    h_drone: float = 0.2

    def __post_init__(self):
        if self.d_psi <= 0.0 or self.d_theta <= 0.0:
            raise ValueError("angular steps must be strictly positive")
        if not (0.0 <= self.lam_psi <= 1.0 and 0.0 <= self.lam_theta <= 1.0):
            raise ValueError("lambda factors must be in [0, 1]")
        if self.r_search * (1.0 - self.lam_psi) <= self.r_drone:
            raise ValueError(
                "r_search * (1 - lam_psi) must exceed the drone radius")
        if self.r_search * (1.0 - self.lam_theta) <= self.h_drone:
            raise ValueError(
                "r_search * (1 - lam_theta) must exceed the drone height")


@dataclass(frozen=True)
class Discretization:
    vx_step: float = 0.05
    vz_step: float = 0.05
    wz_step: float = math.radians(2.5)

    def __post_init__(self):
        if min(self.vx_step, self.vz_step, self.wz_step) <= 0.0:
            raise ValueError("discretization steps must be strictly positive")


@dataclass(frozen=True)
class PlannerConfig:
    """Everything the local planner needs, with validated defaults."""

    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    limits: Limits = field(default_factory=Limits)
    beam: BeamParams = field(default_factory=BeamParams)
    steps: Discretization = field(default_factory=Discretization)
    dt: float = 1.0               # prediction horizon, 10x the control period
    control_period: float = 0.1  # s

    def __post_init__(self):
        if self.dt <= 0.0 or self.control_period <= 0.0:
            raise ValueError("dt and control_period must be strictly positive")

    def with_avoidance(self, mode: str) -> "PlannerConfig":
        if mode == "lateral":
            w = replace(self.weights, k_psi=0.2, k_z=0.8)
        elif mode == "vertical":
            w = replace(self.weights, k_psi=0.8, k_z=0.2)
        else:
            raise ValueError(f"unknown avoidance mode {mode!r}")
        return replace(self, weights=w)
