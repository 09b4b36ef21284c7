"""Helpers for building synthetic flight logs and locating fixture logs."""

import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def make_header(**overrides):
    h = {
        "type": "header",
        "schema_version": 1,
        "scenario": "toy",
        "bounds": {"lo": [-3.0, -3.0, 0.0], "hi": [3.0, 3.0, 3.0]},
        "primitives": [
            {"kind": "box", "position": [0.0, 0.0, 0.5],
             "dimensions": [0.3, 1.5, 1.0], "yaw": 0.0},
            {"kind": "cylinder", "position": [1.0, -1.0, 0.0],
             "dimensions": [0.25, 1.3], "yaw": 0.0},
            {"kind": "ring", "position": [0.5, 1.0, 1.0],
             "dimensions": [0.9, 0.1], "yaw": 0.0},
        ],
        "seed": 0,
        "variant": "naive",
        "avoidance": "lateral",
        "r_drone": 0.4,
        "start": [-2.0, 0.0, 0.9, 0.0],
        "goal": [2.0, 0.0, 0.9],
        "goal_tolerance": 0.3,
        "waypoints": [[-2.0, 0.0, 0.9], [2.0, 0.0, 0.9]],
    }
    h.update(overrides)
    return h


def make_record(t, **overrides):
    r = {
        "type": "record", "t": t,
        "x": -2.0 + 0.3 * t, "y": 0.1 * t, "z": 0.9, "psi": 0.0,
        "vcx": 0.3, "vcz": 0.0, "wcz": 0.0,
        "cmd_vx": 0.3, "cmd_vz": 0.0, "cmd_wz": 0.0,
        "clearance": 1.0 + 0.01 * t, "planning_ms": 40.0 + t,
        "subgoal": [2.0, 0.0, 0.9], "waypoint_index": 1,
        "n_admissible": 100,
    }
    r.update(overrides)
    return r


def make_summary(n, **overrides):
    s = {
        "type": "summary", "outcome": "success", "sim_time": 0.1 * n,
        "path_length": 0.03 * n, "min_clearance": 1.0, "n_records": n,
        "planning_ms_median": 41.0, "planning_ms_p95": 44.0,
        "planning_ms_max": 45.0,
    }
    s.update(overrides)
    return s


def write_log(path, lines):
    with open(path, "w", encoding="utf-8") as fh:
        for obj in lines:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
    return path


def fixture_logs(pattern="*.log"):
    """Real logs produced by the flight simulator's CLI, committed as fixtures."""
    return sorted(FIXTURES.glob(pattern))


def require_fixtures(pattern="*.log", minimum=1):
    logs = fixture_logs(pattern)
    if len(logs) < minimum:
        pytest.skip(f"fixture logs matching {pattern!r} not generated yet "
                    "(see tests/fixtures/README.md)")
    return logs
