"""Dense 3D occupancy grid with log-odds cells and raycast queries.

Cells are tri-state: unknown (never enough evidence), free or occupied,
derived from a clamped log-odds value. Unknown counts as an obstacle for
all queries; that is the conservative choice for navigation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

_STATE_NAMES = {UNKNOWN: "unknown", FREE: "free", OCCUPIED: "occupied"}


@dataclass(frozen=True)
class OccupancyParams:
    """Log-odds update scheme; the hysteresis source for moving obstacles."""

    hit_logodds: float = 0.85
    miss_logodds: float = -0.40
    clamp_min: float = -2.0
    clamp_max: float = 3.5
    occupied_threshold: float = 0.0
    free_threshold: float = -0.4


@dataclass(frozen=True)
class RaycastResult:
    hit: str                      # "occupied" | "unknown" | "miss"
    distance: float               # m from origin to hit-voxel entry (or cast length)
    voxel: Optional[tuple] = None


class VoxelMap:
    def __init__(self, origin, resolution=0.10, extents=(60, 60, 30),
                 occupancy: OccupancyParams = OccupancyParams()):
        if resolution <= 0.0:
            raise ValueError("resolution must be strictly positive")
        self.origin = np.asarray(origin, dtype=float)
        self.resolution = float(resolution)
        self.extents = tuple(int(n) for n in extents)
        if min(self.extents) < 1:
            raise ValueError("extents must be at least 1 voxel per axis")
        self.occupancy = occupancy
        self.logodds = np.zeros(self.extents, dtype=np.float64)
        self.state = np.zeros(self.extents, dtype=np.uint8)  # all unknown
        self.skipped_points = 0

    # ---- geometry helpers -------------------------------------------------

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float) - self.origin
        hi = np.array(self.extents) * self.resolution
        return bool(np.all(p >= 0.0) and np.all(p < hi))

    def voxel_index(self, point):
        """Index of the voxel containing point, or None if outside."""
        p = (np.asarray(point, dtype=float) - self.origin) / self.resolution
        idx = np.floor(p).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.array(self.extents)):
            return None
        return tuple(int(i) for i in idx)

    def voxel_center(self, idx):
        return self.origin + (np.asarray(idx, dtype=float) + 0.5) * self.resolution

    def classify(self, idx) -> str:
        return _STATE_NAMES[int(self.state[idx])]

    # ---- updates ----------------------------------------------------------

    def integrate_scan(self, sensor_origin, points) -> int:
        """Fold one scan into the map; returns how many points were skipped.

        Voxels between the sensor and each hit get the miss decrement, hit
        voxels get the hit increment; everything clamps. Points outside the
        grid are skipped and tallied (scene/map mismatch signal).
        """
        so = np.asarray(sensor_origin, dtype=float)
        if not np.all(np.isfinite(so)) or not self.contains(so):
            raise ValueError("sensor_origin must be finite and inside the map")
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        if pts.size and not np.all(np.isfinite(pts)):
            raise ValueError("scan points must be finite")
        if pts.shape[0] == 0:
            return 0
        o = so - self.origin
        occ = self.occupancy
        skipped = _kernels.integrate_rays(
            self.state, self.logodds, o[0], o[1], o[2],
            np.ascontiguousarray(pts - self.origin), self.resolution,
            occ.hit_logodds, occ.miss_logodds, occ.clamp_min, occ.clamp_max,
            occ.occupied_threshold, occ.free_threshold)
        self.skipped_points += int(skipped)
        return int(skipped)

    def set_free_sphere(self, center, radius):
        """Force-clear all voxels whose center lies within radius of center."""
        c = np.asarray(center, dtype=float)
        lo_i, hi_i = self._index_window(c, radius)
        sl = tuple(slice(a, b) for a, b in zip(lo_i, hi_i))
        centers = self._block_centers(lo_i, hi_i)
        mask = np.sum((centers - c) ** 2, axis=-1) <= radius * radius
        self.logodds[sl][mask] = self.occupancy.clamp_min
        self.state[sl][mask] = FREE

    # ---- queries ----------------------------------------------------------

    def raycast(self, origin, direction, max_len, occupied_only=False) -> RaycastResult:
        """First occupied-or-unknown voxel along the ray, up to max_len."""
        d = np.asarray(direction, dtype=float)
        norm = float(np.linalg.norm(d))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("direction must be a unit vector")
        if max_len <= 0.0:
            raise ValueError("max_len must be strictly positive")
        o = np.asarray(origin, dtype=float) - self.origin
        code, dist, ix, iy, iz = _kernels.ray_first_nonfree(
            self.state, o[0], o[1], o[2], d[0], d[1], d[2],
            float(max_len), self.resolution, bool(occupied_only), 0.0)
        if code == _kernels.HIT_MISS:
            return RaycastResult("miss", float(max_len))
        return RaycastResult(_STATE_NAMES[int(code)], float(dist), (ix, iy, iz))

    def nearest_occupied_distance(self, point, radius) -> Optional[float]:
        """Distance to the nearest occupied-or-unknown voxel center, or None.

        A point inside a non-free voxel is at distance 0.
        """
        if radius <= 0.0:
            raise ValueError("radius must be strictly positive")
        p = np.asarray(point, dtype=float)
        idx = self.voxel_index(p)
        if idx is not None and self.state[idx] != FREE:
            return 0.0
        lo_i, hi_i = self._index_window(p, radius)
        if np.any(lo_i >= hi_i):
            return None
        sl = tuple(slice(a, b) for a, b in zip(lo_i, hi_i))
        nonfree = self.state[sl] != FREE
        if not nonfree.any():
            return None
        centers = self._block_centers(lo_i, hi_i)
        d = centers - p
        d2 = d[..., 0] ** 2 + d[..., 1] ** 2 + d[..., 2] ** 2
        best = float(np.sqrt(d2[nonfree].min()))
        return best if best <= radius else None

    def nonfree_centers(self, center=None, radius=None) -> np.ndarray:
        """Centers of all non-free voxels, optionally windowed. (N, 3)."""
        if center is None:
            lo_i = np.zeros(3, dtype=int)
            hi_i = np.array(self.extents, dtype=int)
        else:
            lo_i, hi_i = self._index_window(np.asarray(center, float), radius)
        sl = tuple(slice(a, b) for a, b in zip(lo_i, hi_i))
        mask = self.state[sl] != FREE
        return self._block_centers(lo_i, hi_i)[mask]

    def free_distance_block(self, center, radius):
        """Distance field of a window: per voxel, meters (center-to-center)
        to the nearest non-free voxel within the window. Returns (edt, lo_i);
        lo_i is the window's index offset in the grid. Distances to non-free
        voxels outside the window are not reflected, so the field is only
        valid for queries whose relevant obstacles lie inside the window."""
        from scipy.ndimage import distance_transform_edt
        lo_i, hi_i = self._index_window(np.asarray(center, float), radius)
        sl = tuple(slice(a, b) for a, b in zip(lo_i, hi_i))
        free = self.state[sl] == FREE
        if free.all():
            edt = np.full(free.shape, np.inf)
        else:
            edt = distance_transform_edt(free) * self.resolution
        return edt, lo_i.astype(np.int64)

    def occupied_centers(self) -> np.ndarray:
        mask = self.state == OCCUPIED
        lo_i = np.zeros(3, dtype=int)
        hi_i = np.array(self.extents, dtype=int)
        return self._block_centers(lo_i, hi_i)[mask]

    # ---- export -----------------------------------------------------------

    def dump(self, path):
        """Debug dump: header plus one 'ix iy iz state logodds' line per
        updated voxel. Not a compatibility format."""
        with open(path, "w") as fh:
            fh.write(f"# voxelmap resolution={self.resolution} "
                     f"extents={self.extents[0]}x{self.extents[1]}x{self.extents[2]} "
                     f"origin={self.origin[0]} {self.origin[1]} {self.origin[2]}\n")
            touched = np.argwhere((self.state != UNKNOWN) | (self.logodds != 0.0))
            for ix, iy, iz in touched:
                fh.write(f"{ix} {iy} {iz} "
                         f"{_STATE_NAMES[int(self.state[ix, iy, iz])]} "
                         f"{self.logodds[ix, iy, iz]:.6f}\n")

    def copy(self) -> "VoxelMap":
        m = VoxelMap(self.origin, self.resolution, self.extents, self.occupancy)
        m.logodds = self.logodds.copy()
        m.state = self.state.copy()
        m.skipped_points = self.skipped_points
        return m

    # ---- internals ---------------------------------------------------------

    def _index_window(self, point, radius):
        lo = (point - radius - self.origin) / self.resolution
        hi = (point + radius - self.origin) / self.resolution
        lo_i = np.maximum(np.floor(lo).astype(int), 0)
        hi_i = np.minimum(np.ceil(hi).astype(int) + 1, np.array(self.extents))
        return lo_i, hi_i

    def _block_centers(self, lo_i, hi_i):
        ax = [self.origin[k] + (np.arange(lo_i[k], hi_i[k]) + 0.5) * self.resolution
              for k in range(3)]
        gx, gy, gz = np.meshgrid(*ax, indexing="ij")
        return np.stack([gx, gy, gz], axis=-1)
