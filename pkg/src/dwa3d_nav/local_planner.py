"""3D dynamic-window local planner.

Each control period the planner discretizes the reachable velocity window,
drops candidates that could not brake before the nearest obstacle, scores
the rest with a weighted objective (goal heading in yaw and height, beam
obstacle distance, forward speed) and returns the argmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .config import BeamParams, Limits, ObjectiveWeights, PlannerConfig
from .voxel_map import FREE, VoxelMap


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


@dataclass
class DroneState:
    x: float
    y: float
    z: float
    psi: float
    vcx: float = 0.0
    vcz: float = 0.0
    wcz: float = 0.0

    def position(self):
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class VelocityCommand:
    vx: float
    vz: float
    wz: float

    def __post_init__(self):
        if not (math.isfinite(self.vx) and math.isfinite(self.vz)
                and math.isfinite(self.wz)):
            raise ValueError("velocity command must be finite")
        if self.vx < -1e-12:
            raise ValueError("backward motion (vx < 0) is not allowed")


STOP = VelocityCommand(0.0, 0.0, 0.0)


@dataclass
class SearchSpace:
    vx_values: List[float]
    vz_values: List[float]
    wz_values: List[float]

    def __iter__(self):
        for vx in self.vx_values:
            for vz in self.vz_values:
                for wz in self.wz_values:
                    yield VelocityCommand(vx, vz, wz)

    def __len__(self):
        return len(self.vx_values) * len(self.vz_values) * len(self.wz_values)


@dataclass
class CandidateScore:
    command: VelocityCommand
    pose: tuple                      # predicted (x', y', z', psi')
    admissible: bool
    head_psi: Optional[float] = None
    head_z: Optional[float] = None
    dist: Optional[float] = None
    vel: Optional[float] = None
    g: Optional[float] = None


@dataclass
class ConstraintCheck:
    name: str
    passed: bool
    margin: float


@dataclass
class WeightReport:
    checks: List[ConstraintCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self):
        out = []
        for c in self.checks:
            out.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  "
                       f"(margin {c.margin:+.4f})")
        return out


def validate_weights(w: ObjectiveWeights, limits: Limits, beam: BeamParams,
                     dt: float) -> WeightReport:
    """Check the analytic constraints the objective weights must satisfy."""
    rep = WeightReport()

    def add(name, margin):
        rep.checks.append(ConstraintCheck(name, margin > 0.0, margin))

    sum_err = abs(w.alpha + w.beta + w.gamma - 1.0)
    rep.checks.append(ConstraintCheck(
        "alpha + beta + gamma == 1", sum_err <= 1e-9, 1e-9 - sum_err))
    k_err = abs(w.k_psi + w.k_z - 1.0)
    rep.checks.append(ConstraintCheck(
        "k_psi + k_z == 1", k_err <= 1e-9, 1e-9 - k_err))
    add("beta > alpha", w.beta - w.alpha)
    add("beta * lam_psi > alpha * wz_max * dt / pi",
        w.beta * beam.lam_psi - w.alpha * limits.wz_max * dt / math.pi)
    add("beta > gamma", w.beta - w.gamma)
    add("alpha * max(k_z, k_psi) > gamma",
        w.alpha * max(w.k_z, w.k_psi) - w.gamma)
    return rep


def predict_pose(s: DroneState, v: VelocityCommand, dt: float):
    """Uniform-motion pose prediction; the new yaw steers the translation."""
    if dt <= 0.0:
        raise ValueError("dt must be strictly positive")
    psi_p = s.psi + v.wz * dt
    x_p = s.x + v.vx * dt * math.cos(psi_p)
    y_p = s.y + v.vx * dt * math.sin(psi_p)
    z_p = s.z + v.vz * dt
    return (x_p, y_p, z_p, psi_p)


def _axis_values(lo: float, hi: float, step: float) -> List[float]:
    # both interval endpoints are always candidates
    if hi < lo:
        lo = hi = 0.5 * (lo + hi)
    n = int(math.floor((hi - lo) / step + 1e-9))
    vals = [lo + k * step for k in range(n + 1)]
    if hi - vals[-1] > 1e-9:
        vals.append(hi)
    # Snap rounding residue to an exact zero: a candidate with vz = 5.6e-17
    # would otherwise get a beam elevation of atan2(vz, 0) = pi/2 and score
    # an empty fan pointed straight up instead of the hover fan.
    return [0.0 if abs(v) < 1e-12 else v for v in vals]


def build_search_space(s: DroneState, limits: Limits, steps, dt: float) -> SearchSpace:
    """Cartesian grid over the reachable window clipped to the hard limits."""
    vx = _axis_values(max(0.0, s.vcx - limits.ax_max * dt),
                      min(limits.vx_max, s.vcx + limits.ax_max * dt),
                      steps.vx_step)
    vz = _axis_values(max(-limits.vz_max, s.vcz - limits.az_max * dt),
                      min(limits.vz_max, s.vcz + limits.az_max * dt),
                      steps.vz_step)
    wz = _axis_values(max(-limits.wz_max, s.wcz - limits.alpha_z_max * dt),
                      min(limits.wz_max, s.wcz + limits.alpha_z_max * dt),
                      steps.wz_step)
    return SearchSpace(vx, vz, wz)


def admissible_speed_limit(d_col: float, a_brake: float) -> float:
    return math.sqrt(2.0 * max(0.0, d_col) * a_brake)


def is_admissible(v: VelocityCommand, pose, vmap: VoxelMap, limits: Limits,
                  beam: BeamParams) -> bool:
    """Braking-distance admissibility at the predicted position."""
    d = vmap.nearest_occupied_distance(pose[:3], beam.r_search)
    if d is None:
        return True
    d_col = max(0.0, d - beam.r_drone)
    v_xz = math.sqrt(v.vx * v.vx + v.vz * v.vz)
    return v_xz <= admissible_speed_limit(d_col, limits.a_brake_max)


def head_psi(pose, goal) -> float:
    """Alignment of the predicted yaw with the bearing to the goal, in [0, 1]."""
    dx = goal[0] - pose[0]
    dy = goal[1] - pose[1]
    if dx == 0.0 and dy == 0.0:
        return 1.0  # goal straight above/below: height term carries the signal
    psi_rel = math.atan2(dy, dx)
    return 1.0 - abs(wrap_angle(psi_rel - pose[3])) / math.pi


def head_z_batch(z_values, goal_z) -> List[float]:
    """Batch-normalized height alignment: 1 at the best, 0 at the worst."""
    if len(z_values) == 0:
        raise ValueError("head_z_batch needs at least one pose")
    dz = [abs(goal_z - z) for z in z_values]
    m = max(dz)
    if m == 0.0:
        return [1.0] * len(dz)
    return [1.0 - d / m for d in dz]


def ray_length(psi_i: float, theta_j: float, beam: BeamParams) -> float:
    """Direction-dependent cast length; full r_search straight ahead."""
    rho_psi = 1.0 - beam.lam_psi * abs(psi_i) / beam.psi_max
    rho_theta = 1.0 - beam.lam_theta * abs(theta_j) / beam.theta_max
    return beam.r_search * rho_psi * rho_theta


def beam_grid(beam: BeamParams):
    psis = np.array(_axis_values(-beam.psi_max, beam.psi_max, beam.d_psi))
    thetas = np.array(_axis_values(-beam.theta_max, beam.theta_max, beam.d_theta))
    return psis, thetas


def distance_term(pose, v: VelocityCommand, vmap: VoxelMap,
                  beam: BeamParams) -> float:
    """Normalized clearance along the velocity-oriented ray fan, in [0, 1]."""
    theta_beam = math.atan2(v.vz, v.vx) if (v.vx != 0.0 or v.vz != 0.0) else 0.0
    psis, thetas = beam_grid(beam)
    o = np.asarray(pose[:3], dtype=float) - vmap.origin
    dist_min = _kernels.beam_min_distance(
        vmap.state, vmap.resolution, o[0], o[1], o[2], pose[3], theta_beam,
        psis, thetas, beam.lam_psi, beam.lam_theta,
        beam.psi_max, beam.theta_max, beam.r_search)
    return max(0.0, (dist_min - beam.r_drone) / (beam.r_search - beam.r_drone))


def velocity_term(v: VelocityCommand, head_psi_score: float,
                  w: ObjectiveWeights, limits: Limits) -> float:
    """Forward-speed reward; gated on alignment when yaw heading dominates."""
    if w.k_z >= w.k_psi or (head_psi_score > 0.5 and w.k_z < w.k_psi):
        return v.vx / limits.vx_max
    return 0.0


@dataclass
class PlanResult:
    """Chosen command plus the full candidate table as parallel arrays.

    Columns: vx, vz, wz, x, y, z, psi, admissible (bool), head_psi, head_z,
    dist, vel, g; the term columns are NaN for inadmissible candidates.
    """

    command: VelocityCommand
    table: dict
    no_admissible: bool = False

    @property
    def n_candidates(self):
        return int(self.table["vx"].shape[0])

    @property
    def n_admissible(self):
        return int(np.count_nonzero(self.table["admissible"]))

    @property
    def scores(self) -> List[CandidateScore]:
        t = self.table
        out = []

        def opt(v):
            return None if math.isnan(v) else float(v)

        for i in range(self.n_candidates):
            adm = bool(t["admissible"][i])
            out.append(CandidateScore(
                VelocityCommand(float(t["vx"][i]), float(t["vz"][i]),
                                float(t["wz"][i])),
                (float(t["x"][i]), float(t["y"][i]), float(t["z"][i]),
                 float(t["psi"][i])),
                adm,
                head_psi=opt(t["head_psi"][i]), head_z=opt(t["head_z"][i]),
                dist=opt(t["dist"][i]), vel=opt(t["vel"][i]),
                g=opt(t["g"][i])))
        return out


def _tie_key(v: VelocityCommand):
    return (v.vx, -abs(v.wz), -abs(v.vz))


def _wrap_array(a):
    a = np.mod(a + np.pi, 2.0 * np.pi)
    a = np.where(a <= 0.0, a + 2.0 * np.pi, a)
    return a - np.pi


def plan(s: DroneState, subgoal, vmap: VoxelMap, config: PlannerConfig) -> PlanResult:
    """Pick the objective-maximizing velocity over the admissible window.

    Pure function of (state, subgoal, map snapshot, config). Ties resolve
    to larger vx, then smaller |wz|, then smaller |vz|, then enumeration
    order, so the result is independent of evaluation order.
    """
    w = config.weights
    limits = config.limits
    beam = config.beam
    goal = np.asarray(subgoal, dtype=float)
    if not np.all(np.isfinite(goal)):
        raise ValueError("subgoal must be finite")

    space = build_search_space(s, limits, config.steps, config.dt)
    gvx, gvz, gwz = np.meshgrid(np.array(space.vx_values),
                                np.array(space.vz_values),
                                np.array(space.wz_values), indexing="ij")
    vx = gvx.ravel()
    vz = gvz.ravel()
    wz = gwz.ravel()
    n = vx.shape[0]

    psi_p = s.psi + wz * config.dt
    x_p = s.x + vx * config.dt * np.cos(psi_p)
    y_p = s.y + vx * config.dt * np.sin(psi_p)
    z_p = s.z + vz * config.dt
    pos = np.stack([x_p, y_p, z_p], axis=1)

    # Nearest non-free voxel center per predicted position: one KD-tree over
    # the window that can contain anything within r_search of any candidate.
    reach = float(np.max(np.linalg.norm(pos - s.position(), axis=1), initial=0.0))
    window = reach + beam.r_search + 2.0 * vmap.resolution
    pts = vmap.nonfree_centers(s.position(), window)
    if pts.shape[0]:
        near_d, _ = cKDTree(pts).query(pos)
    else:
        near_d = np.full(n, np.inf)
    # a point inside a non-free voxel is at distance zero
    idx = np.floor((pos - vmap.origin) / vmap.resolution).astype(int)
    inside = np.all((idx >= 0) & (idx < np.array(vmap.extents)), axis=1)
    if inside.any():
        ii = idx[inside]
        nonfree = vmap.state[ii[:, 0], ii[:, 1], ii[:, 2]] != FREE
        sub = np.nonzero(inside)[0][nonfree]
        near_d[sub] = 0.0

    v_xz = np.sqrt(vx * vx + vz * vz)
    d_col = np.maximum(0.0, near_d - beam.r_drone)
    adm = ((near_d > beam.r_search)
           | (v_xz <= np.sqrt(2.0 * d_col * limits.a_brake_max)))

    nan = np.full(n, np.nan)
    table = {"vx": vx, "vz": vz, "wz": wz, "x": x_p, "y": y_p, "z": z_p,
             "psi": psi_p, "admissible": adm,
             "head_psi": nan.copy(), "head_z": nan.copy(),
             "dist": nan.copy(), "vel": nan.copy(), "g": nan.copy()}
    if not adm.any():
        return PlanResult(STOP, table, no_admissible=True)

    psis, thetas = beam_grid(beam)
    half_diag = math.sqrt(3.0) / 2.0 * vmap.resolution
    active = adm & (near_d <= beam.r_search + half_diag)
    theta_beams = np.arctan2(vz, vx)      # == 0 at hover by arctan2(0, 0)

    # fan vertical reach: a ray fan can only hit voxels whose centers lie in
    # [z + dn - half_diag, z + up + half_diag]; candidates with an empty
    # slab are certified all-miss without casting anything
    if pts.shape[0]:
        ray_z = (beam.r_search
                 * (1.0 - beam.lam_theta * np.abs(thetas) / beam.theta_max)
                 * np.sin(thetas[None, :] + theta_beams[:, None]))
        up = np.maximum(ray_z.max(axis=1), 0.0)
        dn = np.minimum(ray_z.min(axis=1), 0.0)
        zs = np.sort(pts[:, 2])
        lo_cnt = np.searchsorted(zs, z_p + dn - half_diag)
        hi_cnt = np.searchsorted(zs, z_p + up + half_diag)
        active &= hi_cnt > lo_cnt
    active = active.astype(np.uint8)
    pose_arr = np.stack([x_p - vmap.origin[0], y_p - vmap.origin[1],
                         z_p - vmap.origin[2], psi_p], axis=1)
    dist_min = np.full(n, beam.r_search)
    if active.any():
        edt, block_lo = vmap.free_distance_block(s.position(), window)
        _kernels.beam_min_distance_batch(
            vmap.state, vmap.resolution, pose_arr, theta_beams, active,
            psis, thetas, beam.lam_psi, beam.lam_theta,
            beam.psi_max, beam.theta_max, beam.r_search,
            edt, block_lo, beam.r_drone, dist_min)

    dx = goal[0] - x_p
    dy = goal[1] - y_p
    hp = 1.0 - np.abs(_wrap_array(np.arctan2(dy, dx) - psi_p)) / np.pi
    hp = np.where((dx == 0.0) & (dy == 0.0), 1.0, hp)

    dz = np.abs(float(goal[2]) - z_p[adm])
    dz_max = dz.max()
    hz_adm = np.ones(dz.shape[0]) if dz_max == 0.0 else 1.0 - dz / dz_max

    dist = np.maximum(0.0, (dist_min - beam.r_drone)
                      / (beam.r_search - beam.r_drone))
    if w.k_z >= w.k_psi:
        vel = vx / limits.vx_max
    else:
        vel = np.where(hp > 0.5, vx / limits.vx_max, 0.0)

    hz = np.full(n, np.nan)
    hz[adm] = hz_adm
    g = (w.alpha * (w.k_psi * hp + w.k_z * hz)
         + w.beta * dist + w.gamma * vel)

    table["head_psi"][adm] = hp[adm]
    table["head_z"] = hz
    table["dist"][adm] = dist[adm]
    table["vel"][adm] = vel[adm]
    table["g"][adm] = g[adm]

    # argmax with the deterministic tie-break, first enumeration index on
    # residual exact ties (lexsort is stable)
    cand = np.nonzero(adm)[0]
    order = np.lexsort((np.abs(vz[cand]), np.abs(wz[cand]),
                        -vx[cand], -g[cand]))
    best = cand[order[0]]
    return PlanResult(
        VelocityCommand(float(vx[best]), float(vz[best]), float(wz[best])),
        table)


def dump_scores(result: PlanResult, fh):
    """One structured text record per candidate, for offline inspection."""
    fh.write("vx vz wz x y z psi admissible head_psi head_z dist vel g\n")
    t = result.table
    for i in range(result.n_candidates):
        vals = [f"{t['vx'][i]:.6f}", f"{t['vz'][i]:.6f}", f"{t['wz'][i]:.6f}",
                f"{t['x'][i]:.6f}", f"{t['y'][i]:.6f}", f"{t['z'][i]:.6f}",
                f"{t['psi'][i]:.6f}", "1" if t["admissible"][i] else "0"]
        for col in ("head_psi", "head_z", "dist", "vel", "g"):
            v = t[col][i]
            vals.append("nan" if math.isnan(v) else f"{v:.9f}")
        fh.write(" ".join(vals) + "\n")
