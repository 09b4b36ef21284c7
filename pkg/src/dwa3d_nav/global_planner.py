"""RRT* waypoint planner with size-aware collision checking.

Three variants: a naive straight line, a not-size-aware planner that only
checks line of sight between waypoints, and a size-aware planner that keeps
a safety capsule around every path segment. Only voxels known occupied
block the global plan; unknown space is left to the reactive layer.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.spatial import cKDTree

from .voxel_map import VoxelMap


class Variant(enum.Enum):
    NAIVE = "naive"
    NOT_SIZE_AWARE = "rrt"
    SIZE_AWARE = "rrt-size"


class PlanningError(RuntimeError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


@dataclass
class Path:
    waypoints: List[np.ndarray]
    variant: Variant
    cost: float
    cost_history: List[float] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ValueError("a path needs at least two waypoints")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if np.allclose(a, b):
                raise ValueError("consecutive waypoints must be distinct")

    def length(self) -> float:
        return sum(float(np.linalg.norm(b - a))
                   for a, b in zip(self.waypoints, self.waypoints[1:]))


@dataclass(frozen=True)
class GlobalPlannerConfig:
    k_length: float = 1.0
    k_height: float = 0.5
    safety_distance: float = 0.5     # r_search / 2
    max_iterations: int = 5000
    steer_step: float = 0.5
    goal_bias: float = 0.1
    rewire_radius: float = 1.5
    rng_seed: int = 0
    bounds_lo: tuple = (-3.0, -3.0, 0.3)
    bounds_hi: tuple = (3.0, 3.0, 2.7)
    # reserved switch: the flight loop never asks for a new plan mid-flight;
    # the reactive layer alone absorbs everything the map learns after takeoff
    replan: bool = False

    def __post_init__(self):
        if self.safety_distance < 0.0:
            raise ValueError("safety_distance must be non-negative")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must be in [0, 1]")
        if self.steer_step <= 0.0:
            raise ValueError("steer_step must be strictly positive")


def plan_naive(start, goal, config: Optional[GlobalPlannerConfig] = None) -> Path:
    """Obstacle-blind two-waypoint path."""
    a = np.asarray(start, dtype=float)
    b = np.asarray(goal, dtype=float)
    if np.allclose(a, b):
        raise ValueError("start and goal coincide; nothing to plan")
    wps = [a, b]
    return Path(wps, Variant.NAIVE,
                cost=path_cost(wps, config or GlobalPlannerConfig()))


def _point_segment_dist(points, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(points - a, axis=-1)
    t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(points - proj, axis=-1)


class _OccupiedChecker:
    """Capsule and line-of-sight tests against the occupied voxel set."""

    def __init__(self, vmap: VoxelMap):
        self.vmap = vmap
        self.centers = vmap.occupied_centers()
        self.tree = cKDTree(self.centers) if self.centers.shape[0] else None

    def point_clear(self, p, safety: float) -> bool:
        p = np.asarray(p, dtype=float)
        if safety <= 0.0:
            idx = self.vmap.voxel_index(p)
            return idx is None or self.vmap.state[idx] != 2
        if self.tree is None:
            return True
        return not self.tree.query_ball_point(p, safety, return_length=True)

    def segment_clear(self, a, b, safety: float) -> bool:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        seg = b - a
        length = float(np.linalg.norm(seg))
        if length == 0.0:
            # goal-biased sampling can make a == b; fall back to a point test
            return self.point_clear(a, safety)
        if safety <= 0.0:
            res = self.vmap.raycast(a, seg / length, length, occupied_only=True)
            return res.hit == "miss"
        if self.tree is None:
            return True
        # coarse ball queries along the segment, then the exact capsule test
        h = max(safety, self.vmap.resolution)
        n = int(math.ceil(length / h)) + 1
        ts = np.linspace(0.0, 1.0, n)
        r = math.sqrt(safety * safety + (length / (n - 1) / 2.0) ** 2) if n > 1 else safety
        cand = set()
        for t in ts:
            cand.update(self.tree.query_ball_point(a + t * seg, r))
        if not cand:
            return True
        pts = self.centers[sorted(cand)]
        return bool(np.all(_point_segment_dist(pts, a, b) > safety))


def segment_clear(vmap: VoxelMap, a, b, safety: float) -> bool:
    """Line-of-sight (safety == 0) or capsule (safety > 0) clearance check."""
    return _OccupiedChecker(vmap).segment_clear(a, b, safety)


def path_cost(waypoints, config: GlobalPlannerConfig) -> float:
    """Length plus height-offset-from-goal cost D_wp."""
    wps = [np.asarray(w, dtype=float) for w in waypoints]
    if len(wps) < 2:
        raise ValueError("cost needs at least two waypoints")
    z_goal = wps[-1][2]
    length = sum(float(np.linalg.norm(b - a)) for a, b in zip(wps, wps[1:]))
    height = sum(abs(z_goal - w[2]) for w in wps[:-1])
    return config.k_length * length + config.k_height * height


def load_path(source) -> Path:
    """Rebuild the fixed waypoint plan recorded in a flight log.

    Lets a flight be replayed against the exact global path of an earlier
    run instead of planning a fresh one.
    """
    from .flight_log import read_flight_log
    log = read_flight_log(source)
    try:
        wps = [np.asarray(w, dtype=float) for w in log.header["waypoints"]]
        variant = Variant(log.header["variant"])
    except (KeyError, ValueError) as exc:
        raise PlanningError(f"log header has no usable path: {exc}") from exc
    return Path(wps, variant, cost=path_cost(wps, GlobalPlannerConfig()))


def _shortcut(waypoints, checker, safety):
    wps = list(waypoints)
    changed = True
    while changed and len(wps) > 2:
        changed = False
        i = 1
        while i < len(wps) - 1:
            if checker.segment_clear(wps[i - 1], wps[i + 1], safety):
                del wps[i]
                changed = True
            else:
                i += 1
    return wps


def plan_rrt_star(vmap: VoxelMap, start, goal, config: GlobalPlannerConfig,
                  variant: Variant = Variant.SIZE_AWARE) -> Path:
    """Sampling-based plan minimizing D_wp, post-processed by shortcutting.

    Deterministic for a given (map, config, seed). Raises PlanningError when
    no path reaches the goal within max_iterations.
    """
    if variant == Variant.NAIVE:
        return plan_naive(start, goal, config)
    safety = config.safety_distance if variant == Variant.SIZE_AWARE else 0.0
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    checker = _OccupiedChecker(vmap)
    if not checker.point_clear(start, safety):
        raise PlanningError("start is not clear at the requested safety distance")
    if not checker.point_clear(goal, safety):
        raise PlanningError("goal is not clear at the requested safety distance")

    rng = np.random.default_rng(config.rng_seed)
    lo = np.asarray(config.bounds_lo, dtype=float)
    hi = np.asarray(config.bounds_hi, dtype=float)
    z_goal = goal[2]

    nodes = [start]
    parents = [-1]
    costs = [0.0]
    children: List[set] = [set()]
    pos = np.empty((config.max_iterations + 1, 3))
    pos[0] = start
    n_nodes = 1
    best_goal_parent = -1
    best_goal_cost = math.inf
    history: List[float] = []

    def edge_cost(i_parent, p_child):
        return (config.k_length * float(np.linalg.norm(p_child - pos[i_parent]))
                + config.k_height * abs(z_goal - pos[i_parent][2]))

    def propagate(i):
        stack = [i]
        while stack:
            j = stack.pop()
            for c in children[j]:
                costs[c] = costs[j] + edge_cost(j, pos[c])
                stack.append(c)

    for _ in range(config.max_iterations):
        if rng.random() < config.goal_bias:
            sample = goal.copy()
        else:
            sample = lo + rng.random(3) * (hi - lo)
        d2 = np.sum((pos[:n_nodes] - sample) ** 2, axis=1)
        i_near = int(np.argmin(d2))
        delta = sample - pos[i_near]
        dist = float(np.linalg.norm(delta))
        if dist < 1e-9:
            history.append(best_goal_cost)
            continue
        if dist > config.steer_step:
            new = pos[i_near] + delta * (config.steer_step / dist)
        else:
            new = sample
        if not checker.point_clear(new, safety):
            history.append(best_goal_cost)
            continue

        # parent choice among near nodes, then the standard rewiring pass
        near = np.nonzero(np.sum((pos[:n_nodes] - new) ** 2, axis=1)
                          <= config.rewire_radius ** 2)[0]
        cand = list(near) if len(near) else [i_near]
        best_parent = -1
        best_cost = math.inf
        for j in cand:
            c = costs[j] + edge_cost(j, new)
            if c < best_cost and checker.segment_clear(pos[j], new, safety):
                best_parent = j
                best_cost = c
        if best_parent < 0:
            history.append(best_goal_cost)
            continue
        i_new = n_nodes
        nodes.append(new)
        parents.append(best_parent)
        costs.append(best_cost)
        children.append(set())
        children[best_parent].add(i_new)
        pos[i_new] = new
        n_nodes += 1

        for j in near:
            if j == best_parent or j == 0:
                continue
            c = costs[i_new] + edge_cost(i_new, pos[j])
            if c < costs[j] and checker.segment_clear(new, pos[j], safety):
                children[parents[j]].discard(j)
                parents[j] = i_new
                children[i_new].add(j)
                costs[j] = c
                propagate(j)

        gd = float(np.linalg.norm(goal - new))
        if gd <= config.rewire_radius and checker.segment_clear(new, goal, safety):
            c = costs[i_new] + edge_cost(i_new, goal)
            if c < best_goal_cost:
                best_goal_cost = c
                best_goal_parent = i_new
        elif best_goal_parent >= 0:
            # earlier goal attachment may have gotten cheaper through rewiring
            c = costs[best_goal_parent] + edge_cost(best_goal_parent, goal)
            best_goal_cost = min(best_goal_cost, c)
        history.append(best_goal_cost)

    if best_goal_parent < 0:
        raise PlanningError(
            f"no path found within {config.max_iterations} iterations",
            iterations=config.max_iterations)

    wps = [goal]
    i = best_goal_parent
    while i >= 0:
        wps.append(pos[i].copy())
        i = parents[i]
    wps.reverse()
    # drop duplicates the goal-bias sampling can create
    dedup = [wps[0]]
    for w in wps[1:]:
        if np.linalg.norm(w - dedup[-1]) > 1e-9:
            dedup.append(w)
    wps = _shortcut(dedup, checker, safety)
    return Path(wps, variant, cost=path_cost(wps, config), cost_history=history)
