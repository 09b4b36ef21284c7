"""Ground-truth geometry: clearance, motion, and simulated LiDAR soundness."""

import math

import numpy as np
import pytest

from dwa3d_nav.scene import (RING_SEGMENTS, Motion, Scene, ScenePrimitive,
                             SensorModel, lidar_scan, scan_rays)


# ---- clearance -------------------------------------------------------------

def test_box_clearance_hand_values():
    s = Scene([ScenePrimitive("box", (0.0, 0.0, 1.0), (2.0, 2.0, 2.0))])
    assert s.clearance((2.0, 0.0, 1.0)) == pytest.approx(1.0)       # face
    assert s.clearance((2.0, 2.0, 1.0)) == pytest.approx(math.sqrt(2))  # edge
    assert s.clearance((0.0, 0.0, 1.0)) == pytest.approx(-1.0)      # center
    assert s.clearance((0.5, 0.0, 1.0)) == pytest.approx(-0.5)      # inside


def test_yawed_box_clearance():
    # 45-degree yaw: the +x direction now faces a box edge
    s = Scene([ScenePrimitive("box", (0.0, 0.0, 1.0), (2.0, 2.0, 2.0),
                              yaw=math.pi / 4)])
    assert s.clearance((math.sqrt(2) + 0.5, 0.0, 1.0)) == pytest.approx(0.5)


def test_cylinder_clearance_hand_values():
    s = Scene([ScenePrimitive("cylinder", (0.0, 0.0, 0.0), (0.5, 2.0))])
    assert s.clearance((1.5, 0.0, 1.0)) == pytest.approx(1.0)   # side
    assert s.clearance((0.0, 0.0, 2.5)) == pytest.approx(0.5)   # above cap
    assert s.clearance((1.5, 0.0, 3.0)) == pytest.approx(math.hypot(1.0, 1.0))
    assert s.clearance((0.0, 0.0, 1.0)) == pytest.approx(-0.5)  # inside


def test_ring_clearance_close_to_analytic_torus():
    R, r = 0.9, 0.1
    s = Scene([ScenePrimitive("ring", (0.0, 0.0, 1.0), (R, r))])
    # center of the opening: analytic torus clearance is R - r; the 16-segment
    # discretization may deviate by at most the chord sagitta
    sagitta = R * (1.0 - math.cos(math.pi / RING_SEGMENTS))
    assert s.clearance((0.0, 0.0, 1.0)) == pytest.approx(R - r, abs=sagitta + 1e-9)
    # far away along the ring axis; the box corners can undercut the analytic
    # torus by sqrt(R^2 + half_chord^2) - R in addition to the sagitta
    half_chord = R * math.tan(math.pi / RING_SEGMENTS)
    corner = math.sqrt(R * R + half_chord * half_chord) - R
    d = s.clearance((3.0, 0.0, 1.0))
    assert d == pytest.approx(math.sqrt(3.0 ** 2 + R ** 2) - r,
                              abs=sagitta + corner + 1e-9)


# ---- motion ----------------------------------------------------------------

def test_motion_offset_phases():
    mo = Motion((0.0, 0.3, 0.0), start_time=2.0, travel_distance=0.6)
    assert np.allclose(mo.offset(0.0), [0, 0, 0])
    assert np.allclose(mo.offset(2.0), [0, 0, 0])
    assert np.allclose(mo.offset(3.0), [0, 0.3, 0])     # 1 s underway
    assert np.allclose(mo.offset(4.0), [0, 0.6, 0])     # travel cap reached
    assert np.allclose(mo.offset(50.0), [0, 0.6, 0])


def test_scene_advance_moves_primitive():
    p = ScenePrimitive("cylinder", (0.0, 0.0, 0.0), (0.25, 1.0),
                       motion=Motion((0.5, 0.0, 0.0)))
    s = Scene([p])
    c0 = s.clearance((1.0, 0.0, 0.5))
    s.advance(1.0)
    c1 = s.clearance((1.0, 0.0, 0.5))
    assert c0 == pytest.approx(0.75)
    assert c1 == pytest.approx(0.25)


# ---- primitive validation ----------------------------------------------------

def test_primitive_validation():
    with pytest.raises(ValueError):
        ScenePrimitive("sphere", (0, 0, 0), (1.0,))
    with pytest.raises(ValueError):
        ScenePrimitive("box", (0, 0, 0), (1.0, 1.0))       # wrong arity
    with pytest.raises(ValueError):
        ScenePrimitive("cylinder", (0, 0, 0), (0.0, 1.0))  # non-positive


def test_sensor_model_validation():
    with pytest.raises(ValueError):
        SensorModel(azimuth_count=0)
    with pytest.raises(ValueError):
        SensorModel(vertical_fov_deg=120.0)


# ---- rays and scans ----------------------------------------------------------

def test_scan_rays_shape_and_unit_norm():
    sm = SensorModel(azimuth_count=16, elevation_count=8)
    dirs = scan_rays((0, 0, 0), 0.3, sm)
    assert dirs.shape == (16 * 8, 3)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)


def test_lidar_scan_hand_geometry():
    # single horizontal ray pointing +x at a wall face at x = 2
    s = Scene([ScenePrimitive("box", (2.5, 0.0, 1.0), (1.0, 4.0, 2.0))])
    sm = SensorModel(azimuth_count=1, elevation_count=1)
    pts = lidar_scan(s, (0.0, 0.0, 1.0), 0.0, sm)
    assert pts.shape == (1, 3)
    assert np.allclose(pts[0], [2.0, 0.0, 1.0], atol=1e-12)


def test_lidar_scan_miss_returns_empty():
    s = Scene([ScenePrimitive("box", (20.0, 0.0, 1.0), (1.0, 1.0, 1.0))])
    sm = SensorModel(azimuth_count=1, elevation_count=1, max_range=5.0)
    pts = lidar_scan(s, (0.0, 0.0, 1.0), 0.0, sm)
    assert pts.shape[0] == 0


@pytest.mark.parametrize("prims", [
    [ScenePrimitive("box", (1.0, 0.5, 1.0), (0.6, 1.4, 1.2), yaw=0.4)],
    [ScenePrimitive("cylinder", (0.8, -0.6, 0.0), (0.3, 2.0))],
    [ScenePrimitive("ring", (1.2, 0.0, 1.0), (0.9, 0.1), yaw=0.7)],
    [ScenePrimitive("box", (1.5, 0.0, 1.0), (0.4, 2.0, 2.0)),
     ScenePrimitive("cylinder", (-1.0, 1.0, 0.0), (0.4, 1.5))],
])
def test_lidar_points_lie_on_surfaces(prims):
    # sensor soundness: every hit point re-intersects some primitive surface
    s = Scene(prims)
    pts = lidar_scan(s, (0.0, 0.0, 1.0), 0.2, SensorModel(64, 16))
    assert pts.shape[0] > 0
    for p in pts:
        assert abs(s.clearance(p)) < 1e-9
        assert np.linalg.norm(p - np.array([0.0, 0.0, 1.0])) <= 7.0 + 1e-9


def test_lidar_sees_moving_obstacle_at_current_pose():
    p = ScenePrimitive("cylinder", (2.0, 0.0, 0.0), (0.25, 2.0),
                       motion=Motion((0.0, 1.0, 0.0)))
    s = Scene([p])
    sm = SensorModel(azimuth_count=1, elevation_count=1)
    before = lidar_scan(s, (0.0, 0.0, 1.0), 0.0, sm)
    assert before.shape[0] == 1 and before[0][0] == pytest.approx(1.75)
    s.advance(1.0)  # cylinder moved 1 m in +y; the +x ray now misses it
    after = lidar_scan(s, (0.0, 0.0, 1.0), 0.0, sm)
    assert after.shape[0] == 0
