"""Thrust/mass/pitch sanity checks for the configured acceleration limits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

from .config import Limits


@dataclass(frozen=True)
class AirframeParams:
    mass: float = 3.65            # kg
    rotor_count: int = 6
    g: float = 9.8                # m/s^2
    theta_max: float = math.radians(25.0)  # pitch limit
    motor_max_thrust: float = 13.0         # N per motor

    def __post_init__(self):
        if (self.mass <= 0.0 or self.rotor_count <= 0 or self.g <= 0.0
                or self.theta_max <= 0.0 or self.motor_max_thrust <= 0.0):
            raise ValueError("airframe parameters must be strictly positive")


def hover_thrust_per_motor(a: AirframeParams, theta: float) -> float:
    """Per-motor thrust to hold altitude while pitched by theta."""
    if math.cos(theta) <= 0.0:
        raise ValueError("pitch must stay below 90 degrees")
    return a.g * a.mass / (a.rotor_count * math.cos(theta))


def max_forward_accel(a: AirframeParams, theta: float, thrust_per_motor: float) -> float:
    """Horizontal acceleration from the tilted total thrust (drag dismissed)."""
    return a.rotor_count * thrust_per_motor * math.sin(theta) / a.mass


def pitch_for_accel(ax: float, az: float, g: float = 9.8) -> float:
    """Pitch angle that yields the commanded horizontal/vertical acceleration."""
    if az + g <= 0.0:
        raise ValueError("az + g must be strictly positive")
    return math.atan(ax / (az + g))


def thrust_for_accel(a: AirframeParams, az: float, theta: float) -> float:
    """Per-motor thrust from the vertical force balance at pitch theta."""
    if math.cos(theta) <= 0.0:
        raise ValueError("pitch must stay below 90 degrees")
    return a.mass * (a.g + az) / (a.rotor_count * math.cos(theta))


@dataclass
class FeasibilityCheck:
    name: str
    passed: bool
    margin: float


@dataclass
class FeasibilityReport:
    checks: List[FeasibilityCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self):
        return [f"{'PASS' if c.passed else 'FAIL'}  {c.name}  "
                f"(margin {c.margin:+.4f})" for c in self.checks]


def check_limits_feasible(limits: Limits, a: AirframeParams) -> FeasibilityReport:
    """Can the airframe actually deliver the configured acceleration limits?"""
    rep = FeasibilityReport()
    t_hover = hover_thrust_per_motor(a, a.theta_max)
    rep.checks.append(FeasibilityCheck(
        "hover thrust at max pitch within motor limit",
        t_hover <= a.motor_max_thrust, a.motor_max_thrust - t_hover))
    ax_cap = max_forward_accel(a, a.theta_max, t_hover)
    rep.checks.append(FeasibilityCheck(
        "ax_max within forward-acceleration capability",
        limits.ax_max <= ax_cap, ax_cap - limits.ax_max))
    theta_req = pitch_for_accel(limits.ax_max, limits.az_max, a.g)
    rep.checks.append(FeasibilityCheck(
        "required pitch within pitch limit",
        theta_req <= a.theta_max, math.degrees(a.theta_max - theta_req)))
    t_req = thrust_for_accel(a, limits.az_max, theta_req)
    rep.checks.append(FeasibilityCheck(
        "combined-acceleration thrust within motor limit",
        t_req <= a.motor_max_thrust, a.motor_max_thrust - t_req))
    return rep
