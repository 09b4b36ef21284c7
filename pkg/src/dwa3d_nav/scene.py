"""Ground-truth scene geometry: primitives, simulated LiDAR and clearance.

Rings are discretized as a closed loop of 16 oriented boxes, so every query
(raycast and clearance) works on boxes and vertical cylinders only. Both the
sensor and the clearance use the same decomposition, keeping them consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

RING_SEGMENTS = 16


@dataclass
class Motion:
    velocity: Tuple[float, float, float]
    start_time: float = 0.0
    travel_distance: float = math.inf   # stop after covering this distance

    def offset(self, t: float) -> np.ndarray:
        v = np.asarray(self.velocity, dtype=float)
        speed = float(np.linalg.norm(v))
        if speed == 0.0 or t <= self.start_time:
            return np.zeros(3)
        travel = min(speed * (t - self.start_time), self.travel_distance)
        return v / speed * travel


@dataclass
class ScenePrimitive:
    kind: str                      # "box" | "cylinder" | "ring"
    position: Tuple[float, float, float]
    dimensions: Tuple[float, ...]  # box: (sx, sy, sz); cylinder: (radius, height);
                                   # ring: (major_radius, tube_radius)
    yaw: float = 0.0
    motion: Optional[Motion] = None

    def __post_init__(self):
        if self.kind not in ("box", "cylinder", "ring"):
            raise ValueError(f"unknown primitive kind {self.kind!r}")
        expected = {"box": 3, "cylinder": 2, "ring": 2}[self.kind]
        if len(self.dimensions) != expected:
            raise ValueError(f"{self.kind} needs {expected} dimensions")
        if min(self.dimensions) <= 0.0:
            raise ValueError("dimensions must be strictly positive")


@dataclass(frozen=True)
class SensorModel:
    azimuth_count: int = 64
    elevation_count: int = 16
    vertical_fov_deg: float = 90.0
    max_range: float = 7.0

    def __post_init__(self):
        if self.azimuth_count < 1 or self.elevation_count < 1:
            raise ValueError("ray counts must be at least 1")
        if not 0.0 < self.vertical_fov_deg <= 90.0:
            raise ValueError("vertical FOV must be in (0, 90] degrees")


@dataclass
class _OBB:
    center: np.ndarray
    half: np.ndarray
    rot: np.ndarray                # columns are the box axes in world frame


def _yaw_rot(yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ring_boxes(center, yaw, major_radius, tube_radius) -> List[_OBB]:
    # ring plane is vertical; the ring axis points along (cos yaw, sin yaw, 0)
    axis = np.array([math.cos(yaw), math.sin(yaw), 0.0])
    e1 = np.array([-math.sin(yaw), math.cos(yaw), 0.0])
    e2 = np.array([0.0, 0.0, 1.0])
    half_len = major_radius * math.tan(math.pi / RING_SEGMENTS)
    boxes = []
    for k in range(RING_SEGMENTS):
        phi = 2.0 * math.pi * (k + 0.5) / RING_SEGMENTS
        radial = math.cos(phi) * e1 + math.sin(phi) * e2
        tangent = -math.sin(phi) * e1 + math.cos(phi) * e2
        c = np.asarray(center, dtype=float) + major_radius * radial
        rot = np.column_stack([tangent, axis, radial])
        boxes.append(_OBB(c, np.array([half_len, tube_radius, tube_radius]), rot))
    return boxes


class Scene:
    """Primitive collection with time-dependent poses for moving actors."""

    def __init__(self, primitives: List[ScenePrimitive]):
        self.primitives = list(primitives)
        self.time = 0.0

    def advance(self, dt: float):
        self.time += dt

    def _posed(self):
        for p in self.primitives:
            pos = np.asarray(p.position, dtype=float)
            if p.motion is not None:
                pos = pos + p.motion.offset(self.time)
            yield p, pos

    def boxes_and_cylinders(self):
        boxes, cyls = [], []
        for p, pos in self._posed():
            if p.kind == "box":
                boxes.append(_OBB(pos, np.asarray(p.dimensions) / 2.0,
                                  _yaw_rot(p.yaw)))
            elif p.kind == "ring":
                boxes.extend(_ring_boxes(pos, p.yaw, *p.dimensions))
            else:
                cyls.append((pos, p.dimensions[0], p.dimensions[1]))
        return boxes, cyls

    def clearance(self, point) -> float:
        """Signed distance from point to the nearest primitive surface."""
        p = np.asarray(point, dtype=float)
        boxes, cyls = self.boxes_and_cylinders()
        best = math.inf
        for b in boxes:
            q = b.rot.T @ (p - b.center)
            dq = np.abs(q) - b.half
            outside = np.maximum(dq, 0.0)
            d = float(np.linalg.norm(outside) + min(0.0, float(dq.max())))
            best = min(best, d)
        for c, radius, height in cyls:
            dr = math.hypot(p[0] - c[0], p[1] - c[1]) - radius
            dz = max(c[2] - p[2], p[2] - (c[2] + height))
            if dr <= 0.0 and dz <= 0.0:
                d = max(dr, dz)
            else:
                d = math.hypot(max(dr, 0.0), max(dz, 0.0))
            best = min(best, d)
        return best


def _ray_box_t(origins, dirs, box: _OBB):
    """Slab test; entry t per ray or inf."""
    o = (origins - box.center) @ box.rot
    d = dirs @ box.rot
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d
        t1 = (-box.half - o) * inv
        t2 = (box.half - o) * inv
    tmin = np.where(np.isfinite(t1), np.minimum(t1, t2), -np.inf)
    tmax = np.where(np.isfinite(t2), np.maximum(t1, t2), np.inf)
    # axes the ray runs parallel to must already be inside the slab
    par_bad = np.any((d == 0.0) & (np.abs(o) > box.half), axis=1)
    lo = np.max(tmin, axis=1)
    hi = np.min(tmax, axis=1)
    t = np.where(lo >= 0.0, lo, np.where(hi >= 0.0, 0.0, np.inf))
    bad = (lo > hi) | (hi < 0.0) | par_bad
    return np.where(bad, np.inf, t)


def _ray_cylinder_t(origins, dirs, center, radius, height):
    n = origins.shape[0]
    t_best = np.full(n, np.inf)
    ox = origins[:, 0] - center[0]
    oy = origins[:, 1] - center[1]
    dx = dirs[:, 0]
    dy = dirs[:, 1]
    a = dx * dx + dy * dy
    b = 2.0 * (ox * dx + oy * dy)
    c = ox * ox + oy * oy - radius * radius
    disc = b * b - 4.0 * a * c
    with np.errstate(divide="ignore", invalid="ignore"):
        sq = np.sqrt(np.maximum(disc, 0.0))
        for sign in (-1.0, 1.0):
            t = (-b + sign * sq) / (2.0 * a)
            z = origins[:, 2] + t * dirs[:, 2]
            ok = (a > 0.0) & (disc >= 0.0) & (t >= 0.0) \
                & (z >= center[2]) & (z <= center[2] + height)
            t_best = np.where(ok & (t < t_best), t, t_best)
    # caps
    for zc in (center[2], center[2] + height):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (zc - origins[:, 2]) / dirs[:, 2]
            px = origins[:, 0] + t * dirs[:, 0] - center[0]
            py = origins[:, 1] + t * dirs[:, 1] - center[1]
            inside = px * px + py * py <= radius * radius
        ok = np.isfinite(t) & (t >= 0.0) & inside
        t_best = np.where(ok & (t < t_best), t, t_best)
    return t_best


def scan_rays(pose_xyz, yaw, sensor: SensorModel):
    """Unit ray directions of one scan, rotated with the vehicle yaw."""
    az = yaw + np.arange(sensor.azimuth_count) * (2.0 * math.pi / sensor.azimuth_count)
    half = math.radians(sensor.vertical_fov_deg) / 2.0
    if sensor.elevation_count == 1:
        el = np.array([0.0])
    else:
        el = np.linspace(-half, half, sensor.elevation_count)
    azg, elg = np.meshgrid(az, el, indexing="ij")
    ce = np.cos(elg).ravel()
    dirs = np.stack([np.cos(azg).ravel() * ce,
                     np.sin(azg).ravel() * ce,
                     np.sin(elg).ravel()], axis=1)
    return dirs


def lidar_scan(scene: Scene, pose_xyz, yaw, sensor: SensorModel) -> np.ndarray:
    """Hit points of one noise-free scan; misses are omitted. (N, 3)."""
    origin = np.asarray(pose_xyz, dtype=float)
    dirs = scan_rays(origin, yaw, sensor)
    origins = np.broadcast_to(origin, dirs.shape)
    t = np.full(dirs.shape[0], np.inf)
    boxes, cyls = scene.boxes_and_cylinders()
    for b in boxes:
        t = np.minimum(t, _ray_box_t(origins, dirs, b))
    for c, radius, height in cyls:
        t = np.minimum(t, _ray_cylinder_t(origins, dirs, c, radius, height))
    hit = t <= sensor.max_range
    return origin + t[hit, None] * dirs[hit]
