"""End-to-end acceptance suite.

Each test covers one release criterion and prints a single
"ACCEPTANCE PASS/FAIL: <criterion>" line directly to the terminal
(bypassing capture) in addition to the usual pytest verdict.

The full four-seed flight matrix is flown once in a module-scoped fixture
and shared by the safety, narrow-gap and timing criteria.
"""

import math
import time

import numpy as np
import pytest

from oracles import brute_force_plan, oracle_raycast

from dwa3d_nav.config import (BeamParams, Discretization, Limits,
                              ObjectiveWeights, PlannerConfig)
from dwa3d_nav.feasibility import (AirframeParams, hover_thrust_per_motor,
                                   max_forward_accel, pitch_for_accel)
from dwa3d_nav.global_planner import GlobalPlannerConfig
from dwa3d_nav.local_planner import DroneState, plan, validate_weights
from dwa3d_nav.scenarios import BUILTIN_NAMES, builtin
from dwa3d_nav.simulator import Simulation, run_flight
from dwa3d_nav.voxel_map import FREE, OCCUPIED, UNKNOWN, VoxelMap

SEEDS = (0, 1, 2, 3)
R_DRONE = 0.4


@pytest.fixture()
def report(capfd):
    def _report(criterion, ok):
        with capfd.disabled():
            print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'}: {criterion}",
                  flush=True)
        assert ok, criterion
    return _report


@pytest.fixture(scope="module")
def fleet():
    """Every built-in scenario x applicable variant x four seeds."""
    results = {}
    for name in BUILTIN_NAMES:
        for variant in builtin(name).applicable_variants:
            for seed in SEEDS:
                results[(name, variant, seed)] = run_flight(
                    builtin(name), variant, seed)
    return results


# ---------------------------------------------------------------------------

def test_argmax_oracle_equivalence(report):
    rng = np.random.default_rng(42)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        m = VoxelMap(np.zeros(3), 0.1, (24, 24, 24))
        m.state[:, :, :] = rng.choice(
            [FREE, UNKNOWN, OCCUPIED], size=(24, 24, 24),
            p=[0.90, 0.05, 0.05]).astype(np.uint8)
        cfg = PlannerConfig(
            weights=(ObjectiveWeights.lateral_avoidance() if rng.random() < 0.5
                     else ObjectiveWeights.vertical_avoidance()),
            beam=BeamParams(r_search=float(rng.uniform(1.0, 1.5)),
                            d_psi=math.radians(30.0),
                            d_theta=math.radians(30.0)),
            steps=Discretization(vx_step=0.1, vz_step=0.15,
                                 wz_step=math.radians(15.0)))
        lim = cfg.limits
        s = DroneState(*rng.uniform(0.5, 1.9, 3), rng.uniform(-math.pi, math.pi))
        s.vcx = float(rng.uniform(0.0, lim.vx_max))
        s.vcz = float(rng.uniform(-lim.vz_max, lim.vz_max))
        s.wcz = float(rng.uniform(-lim.wz_max, lim.wz_max))
        subgoal = rng.uniform(0.3, 2.1, 3)

        got = plan(s, subgoal, m, cfg)
        want_cmd, want_none = brute_force_plan(s, subgoal, m, cfg)
        if got.no_admissible != want_none or got.command != want_cmd:
            mismatches += 1
    elapsed = time.perf_counter() - t0
    report("argmax oracle equivalence (200 instances, < 1 min)",
           mismatches == 0 and elapsed < 60.0)


def test_safety_invariant_all_scenarios(report, fleet):
    failures = [(key, res.outcome, round(res.min_clearance, 3))
                for key, res in fleet.items()
                if res.outcome != "success" or res.min_clearance < R_DRONE]
    report("safety invariant: all scenarios/variants/seeds succeed with "
           f"clearance >= 0.4 m{' ' + repr(failures) if failures else ''}",
           not failures)


def test_avoidance_preference_dichotomy(report, fleet):
    lat = fleet[("wall", "naive", 0)]
    z0 = lat.scenario.start[2]
    lat_z = max(abs(r.z - z0) for r in lat.records)
    lat_y = max(abs(r.y) for r in lat.records)

    spec = builtin("wall")
    spec.avoidance = "vertical"
    ver = run_flight(spec, "naive", 0)
    wall_top = 1.0
    ver_z = max(r.z for r in ver.records)
    ver_y = max(abs(r.y) for r in ver.records)

    ok = (lat.outcome == "success" and lat_z < 0.3 and lat_y > 0.75
          and ver.outcome == "success" and ver_z > wall_top and ver_y < 0.5)
    report("avoidance preference: lateral dodges sideways, vertical climbs "
           "over the wall", ok)


def _xy_distance_to_polyline(p, waypoints):
    p2 = np.asarray(p[:2], dtype=float)
    best = math.inf
    for a, b in zip(waypoints, waypoints[1:]):
        a2, b2 = a[:2], b[:2]
        ab = b2 - a2
        denom = float(ab @ ab)
        t = 0.0 if denom == 0.0 else float(np.clip((p2 - a2) @ ab / denom, 0, 1))
        best = min(best, float(np.linalg.norm(p2 - (a2 + t * ab))))
    return best


def test_two_step_avoidance_signature(report):
    # squeeze the waypoint planner's sampling bounds so its (not size-aware)
    # path must thread right past the wall edge; the reactive layer then has
    # to peel away from that path to keep its own clearance
    spec = builtin("wall")
    g = GlobalPlannerConfig(rng_seed=0, bounds_lo=(-2.5, -0.95, 0.6),
                            bounds_hi=(2.5, 0.95, 1.2))
    sim = Simulation(spec, "rrt", 0, global_config=g)
    wall_scene = spec.scene(include_shell=False)
    path_min = min(wall_scene.clearance(a + t * (b - a))
                   for a, b in zip(sim.path.waypoints, sim.path.waypoints[1:])
                   for t in np.linspace(0.0, 1.0, 100))
    res = sim.run()
    closest = min(range(len(res.records)),
                  key=lambda i: res.records[i].clearance)
    r = res.records[closest]
    deviation = _xy_distance_to_polyline((r.x, r.y), sim.path.waypoints)
    ok = (path_min < R_DRONE and res.outcome == "success"
          and deviation > 0.2)
    report("two-step avoidance: reactive layer deviates > 0.2 m from a "
           "path that hugs the wall edge", ok)


def test_narrow_gap_traversal(report, fleet):
    res = fleet[("narrow_gaps", "naive", 0)]
    margin = 0.05
    squeeze = res.min_clearance - R_DRONE   # body-to-surface slack at tightest
    ok = (res.outcome == "success" and 0.0 < squeeze <= 0.25 + margin)
    report("narrow gap traversal: success with tight but nonzero clearance",
           ok)


def test_planning_time_bounded(report, fleet):
    ok = True
    for name in ("zigzag", "wall", "narrow_gaps"):
        for variant in builtin(name).applicable_variants:
            for seed in SEEDS:
                s = fleet[(name, variant, seed)].summary
                if not (s.planning_ms_p95 < 100.0
                        and s.planning_ms_p95 / s.planning_ms_median < 3.0):
                    ok = False
    report("planning time: p95 < 100 ms and p95/median < 3 on the dense "
           "benches", ok)


def test_parameter_constraint_suite(report):
    lim = Limits()
    beam = BeamParams()

    def hand_eval(w, beam_p, dt):
        return {
            "alpha + beta + gamma == 1":
                abs(w.alpha + w.beta + w.gamma - 1.0) <= 1e-9,
            "k_psi + k_z == 1": abs(w.k_psi + w.k_z - 1.0) <= 1e-9,
            "beta > alpha": w.beta > w.alpha,
            "beta * lam_psi > alpha * wz_max * dt / pi":
                w.beta * beam_p.lam_psi > w.alpha * lim.wz_max * dt / math.pi,
            "beta > gamma": w.beta > w.gamma,
            "alpha * max(k_z, k_psi) > gamma":
                w.alpha * max(w.k_z, w.k_psi) > w.gamma,
        }

    fixtures = [
        (ObjectiveWeights(), beam, 1.0, True),                   # defaults
        (ObjectiveWeights(0.5, 0.4, 0.1), beam, 1.0, False),     # beta <= alpha
        (ObjectiveWeights(), beam, 5.0, False),                  # horizon too long
        (ObjectiveWeights(0.4, 0.45, 0.15, 0.2, 0.8), beam, 1.0, True),
        (ObjectiveWeights(0.3, 0.35, 0.35), beam, 1.0, False),   # gamma too big
    ]
    agree = True
    for w, beam_p, dt, want_ok in fixtures:
        rep = validate_weights(w, lim, beam_p, dt)
        expected = hand_eval(w, beam_p, dt)
        for check in rep.checks:
            if check.passed != expected[check.name]:
                agree = False
        if rep.ok != want_ok or rep.ok != all(expected.values()):
            agree = False
    # the sum-to-one constraints are enforced at construction time
    with pytest.raises(ValueError):
        ObjectiveWeights(0.4, 0.6, 0.1)
    with pytest.raises(ValueError):
        ObjectiveWeights(k_psi=0.5, k_z=0.6)
    report("parameter constraints: validator agrees with hand evaluation "
           "on all fixtures", agree)


def test_feasibility_reference_numbers(report):
    a = AirframeParams()
    hover = hover_thrust_per_motor(a, math.radians(25.0))
    pitch = math.degrees(pitch_for_accel(1.0, 1.0))
    ok = abs(hover - 6.57) <= 0.01 and abs(pitch - 5.3) <= 0.05
    report("feasibility numbers: hover thrust 6.57 N and unit-accel pitch "
           "5.3 deg", ok)


@pytest.mark.xfail(strict=True, reason=(
    "the tilted-thrust model gives g*tan(25 deg) = 4.57 m/s^2 for the "
    "max forward acceleration; the 4.5 +/- 0.05 reference window excludes "
    "it, so the published number is not reachable from the published model"))
def test_feasibility_max_forward_accel_reference(report):
    a = AirframeParams()
    hover = hover_thrust_per_motor(a, math.radians(25.0))
    ax = max_forward_accel(a, math.radians(25.0), hover)
    report("feasibility numbers: max forward acceleration 4.5 m/s^2",
           abs(ax - 4.5) <= 0.05)


def test_map_raycast_oracle(report):
    rng = np.random.default_rng(99)
    agree = True
    rays = 0
    while rays < 500:
        ext = tuple(int(v) for v in rng.integers(6, 33, size=3))
        res = float(rng.uniform(0.05, 0.3))
        origin = rng.uniform(-2.0, 2.0, size=3)
        m = VoxelMap(origin, res, ext)
        m.state[:, :, :] = rng.choice(
            [FREE, UNKNOWN, OCCUPIED], size=ext,
            p=[0.85, 0.07, 0.08]).astype(np.uint8)
        for _ in range(25):
            o = origin + rng.uniform(0.05, 0.95, size=3) * (np.array(ext) * res)
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            max_len = float(rng.uniform(0.3, 1.5)) * max(ext) * res
            got = m.raycast(o, d, max_len)
            want_state, want_t, want_vox = oracle_raycast(m, o, d, max_len)
            if (got.hit != want_state
                    or abs(got.distance - want_t) > 1e-9
                    or (want_vox is not None and got.voxel != want_vox)):
                agree = False
            rays += 1
    report("map raycast agrees with the exhaustive AABB oracle on 500 rays",
           agree)


def test_moving_obstacle_map_delay(report):
    spec = builtin("moving_continuous")
    ugv = spec.primitives[0]
    sim = Simulation(spec, "naive", 0)
    step_per_cycle = math.hypot(*ugv.motion.velocity) * 0.1
    lags = []
    while sim.outcome is None:
        sim.step()
        t = sim.scene.time
        if not 3.0 <= t <= 9.0:
            continue
        cy = ugv.position[1] + ugv.motion.offset(t)[1]
        m = sim.vmap
        occ = np.argwhere(m.state == OCCUPIED)
        centers = occ * m.resolution + m.origin + m.resolution / 2.0
        sel = ((np.abs(centers[:, 0] - ugv.position[0]) < 0.45)
               & (centers[:, 2] > 0.05) & (centers[:, 2] < 1.25)
               & (centers[:, 1] > -2.0) & (centers[:, 1] < 2.5))
        pts = centers[sel]
        if pts.shape[0] == 0:
            continue
        # centroid of the mapped footprint trails the true cart center
        lags.append((cy - float(pts[:, 1].mean())) / step_per_cycle)
    ok = (sim.outcome == "success" and len(lags) > 20
          and min(lags) >= 2.0)
    report("moving obstacle: mapped footprint lags ground truth by >= 2 "
           "control cycles and the flight succeeds", ok)
