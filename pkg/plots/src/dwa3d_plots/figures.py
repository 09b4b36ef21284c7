"""The five figure kinds rendered from flight logs.

All rendering is deterministic: fixed style constants, logs sorted by path,
PNG output with the varying metadata stripped, so identical inputs produce
byte-identical image files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle, Polygon

from .logdata import FlightLog, LogSchemaError, load_logs

KINDS = ("TopView", "SideView", "Trajectory3D", "Velocities", "TimingBox")

# Fixed style: one color per avoidance mode, cycling linestyles to keep
# several traces of the same mode distinguishable.
AVOIDANCE_COLORS = {"lateral": "tab:blue", "vertical": "tab:orange"}
LINESTYLES = ("-", "--", "-.", ":")
PATH_COLOR = "0.45"
OBSTACLE_COLOR = "0.55"
COMMANDED_COLOR = "red"
EXECUTED_COLOR = "blue"
DPI = 100
# PNG metadata normally records the matplotlib version; strip it so the
# bytes depend on the figure contents alone.
SAVE_KW = {"dpi": DPI, "metadata": {"Software": None}, "format": "png"}


@dataclass(frozen=True)
class FigureRequest:
    """What to render: which logs, which figure kind, where to write it."""

    log_paths: list
    kind: str
    out_path: Path
    avoidance_colors: dict = field(default_factory=lambda: dict(AVOIDANCE_COLORS))

    def __post_init__(self):
        if not self.log_paths:
            raise LogSchemaError("no log files given")
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")


def _trace_style(log: FlightLog, index: int, colors: dict) -> dict:
    color = colors.get(log.avoidance, "tab:green")
    return {
        "color": color,
        "linestyle": LINESTYLES[index % len(LINESTYLES)],
        "linewidth": 1.4,
        "label": log.label,
    }


# --------------------------------------------------------------------------
# Scene primitive silhouettes
# --------------------------------------------------------------------------

def _box_corners_xy(position, dimensions, yaw):
    cx, cy = position[0], position[1]
    hx, hy = dimensions[0] / 2.0, dimensions[1] / 2.0
    c, s = math.cos(yaw), math.sin(yaw)
    corners = []
    for dx, dy in ((-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)):
        corners.append((cx + c * dx - s * dy, cy + s * dx + c * dy))
    return corners


def _draw_primitives_top(ax, primitives):
    """Obstacle footprints in the x-y plane."""
    for p in primitives:
        pos, dim, yaw = p["position"], p["dimensions"], p.get("yaw", 0.0)
        if p["kind"] == "box":
            ax.add_patch(Polygon(_box_corners_xy(pos, dim, yaw),
                                 closed=True, facecolor=OBSTACLE_COLOR,
                                 edgecolor="black", alpha=0.6, zorder=1))
        elif p["kind"] == "cylinder":
            ax.add_patch(Circle((pos[0], pos[1]), dim[0],
                                facecolor=OBSTACLE_COLOR, edgecolor="black",
                                alpha=0.6, zorder=1))
        elif p["kind"] == "ring":
            # A ring stands in a vertical plane whose normal points along
            # yaw; seen from above it is a bar of length 2*(R + r).
            reach = dim[0] + dim[1]
            ux, uy = -math.sin(yaw), math.cos(yaw)  # in-plane direction
            a = (pos[0] - reach * ux, pos[1] - reach * uy)
            b = (pos[0] + reach * ux, pos[1] + reach * uy)
            ax.plot([a[0], b[0]], [a[1], b[1]], color=OBSTACLE_COLOR,
                    linewidth=2.0 * dim[1] * DPI / 2.54, alpha=0.6,
                    solid_capstyle="butt", zorder=1)


def _draw_primitives_side(ax, primitives):
    """Obstacle silhouettes in the x-z plane."""
    for p in primitives:
        pos, dim = p["position"], p["dimensions"]
        if p["kind"] == "box":
            xs = [c[0] for c in _box_corners_xy(pos, dim, p.get("yaw", 0.0))]
            z0 = pos[2] - dim[2] / 2.0
            corners = [(min(xs), z0), (max(xs), z0),
                       (max(xs), z0 + dim[2]), (min(xs), z0 + dim[2])]
        elif p["kind"] == "cylinder":
            corners = [(pos[0] - dim[0], pos[2]), (pos[0] + dim[0], pos[2]),
                       (pos[0] + dim[0], pos[2] + dim[1]),
                       (pos[0] - dim[0], pos[2] + dim[1])]
        elif p["kind"] == "ring":
            # Outline circle of the torus center line; the tube thickness
            # is rendered by the line width.
            ax.add_patch(Circle((pos[0], pos[2]), dim[0], fill=False,
                                edgecolor=OBSTACLE_COLOR,
                                linewidth=2.0 * dim[1] * DPI / 2.54,
                                alpha=0.6, zorder=1))
            continue
        else:  # pragma: no cover - loader already rejects unknown kinds
            continue
        ax.add_patch(Polygon(corners, closed=True, facecolor=OBSTACLE_COLOR,
                             edgecolor="black", alpha=0.6, zorder=1))


# --------------------------------------------------------------------------
# Figure kinds
# --------------------------------------------------------------------------

def _planar_view(logs, req, axes_of):
    """Shared body of TopView and SideView: trajectory + global path + scene."""
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    _draw = _draw_primitives_top if axes_of == ("x", "y") else _draw_primitives_side
    _draw(ax, logs[0].header["primitives"])
    h_key, v_key = axes_of
    hv_index = {"x": 0, "y": 1, "z": 2}
    for i, log in enumerate(logs):
        wps = np.asarray(log.header["waypoints"], dtype=float)
        ax.plot(wps[:, hv_index[h_key]], wps[:, hv_index[v_key]],
                color=PATH_COLOR, linestyle=":", linewidth=1.0,
                marker="x", markersize=4, zorder=2,
                label="global path" if i == 0 else None)
        ax.plot(log.column(h_key), log.column(v_key),
                zorder=3, **_trace_style(log, i, req.avoidance_colors))
    start = logs[0].header["start"]
    goal = logs[0].header["goal"]
    ax.plot(start[hv_index[h_key]], start[hv_index[v_key]], "ko",
            markersize=6, zorder=4, label="start")
    ax.plot(goal[hv_index[h_key]], goal[hv_index[v_key]], "k*",
            markersize=10, zorder=4, label="goal")
    lo, hi = logs[0].header["bounds"]["lo"], logs[0].header["bounds"]["hi"]
    ax.set_xlim(lo[hv_index[h_key]], hi[hv_index[h_key]])
    ax.set_ylim(lo[hv_index[v_key]], hi[hv_index[v_key]])
    ax.set_aspect("equal")
    ax.set_xlabel(f"{h_key} (m)")
    ax.set_ylabel(f"{v_key} (m)")
    title = "Top view" if axes_of == ("x", "y") else "Side view"
    ax.set_title(f"{title} — {logs[0].scenario}")
    ax.legend(loc="upper right", fontsize=7)
    return fig


def _fig_top_view(logs, req):
    return _planar_view(logs, req, ("x", "y"))


def _fig_side_view(logs, req):
    return _planar_view(logs, req, ("x", "z"))


def _fig_trajectory_3d(logs, req):
    fig = plt.figure(figsize=(7.0, 5.5))
    ax = fig.add_subplot(projection="3d")
    for i, log in enumerate(logs):
        wps = np.asarray(log.header["waypoints"], dtype=float)
        ax.plot(wps[:, 0], wps[:, 1], wps[:, 2], color=PATH_COLOR,
                linestyle=":", linewidth=1.0, marker="x", markersize=3,
                label="global path" if i == 0 else None)
        ax.plot(log.column("x"), log.column("y"), log.column("z"),
                **_trace_style(log, i, req.avoidance_colors))
    start, goal = logs[0].header["start"], logs[0].header["goal"]
    ax.scatter([start[0]], [start[1]], [start[2]], color="black", marker="o",
               label="start")
    ax.scatter([goal[0]], [goal[1]], [goal[2]], color="black", marker="*",
               s=60, label="goal")
    lo, hi = logs[0].header["bounds"]["lo"], logs[0].header["bounds"]["hi"]
    ax.set_xlim(lo[0], hi[0])
    ax.set_ylim(lo[1], hi[1])
    ax.set_zlim(lo[2], hi[2])
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_zlabel("z (m)")
    ax.set_title(f"Trajectories — {logs[0].scenario}")
    ax.legend(loc="upper right", fontsize=7)
    return fig


def _fig_velocities(logs, req):
    """Commanded (red) vs executed (blue) velocity series, one row per axis."""
    pairs = (("cmd_vx", "vcx", "forward (m/s)"),
             ("cmd_vz", "vcz", "vertical (m/s)"),
             ("cmd_wz", "wcz", "yaw rate (rad/s)"))
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 6.5), sharex=True)
    for row, (cmd_key, exe_key, ylabel) in zip(axes, pairs):
        for i, log in enumerate(logs):
            t = log.column("t")
            ls = LINESTYLES[i % len(LINESTYLES)]
            row.plot(t, log.column(cmd_key), color=COMMANDED_COLOR,
                     linestyle=ls, linewidth=1.0,
                     label=f"commanded {log.label}" if len(logs) > 1 else "commanded")
            row.plot(t, log.column(exe_key), color=EXECUTED_COLOR,
                     linestyle=ls, linewidth=1.0,
                     label=f"executed {log.label}" if len(logs) > 1 else "executed")
        row.set_ylabel(ylabel, fontsize=8)
        row.grid(True, linewidth=0.3, alpha=0.5)
    axes[0].legend(loc="upper right", fontsize=6)
    axes[-1].set_xlabel("time (s)")
    axes[0].set_title("Velocity profiles: commanded (red) vs executed (blue)")
    return fig


def _fig_timing_box(logs, req):
    """Planning-time boxplots: one box per flight plus a pooled box per scenario."""
    by_scenario: dict[str, list[FlightLog]] = {}
    for log in logs:
        by_scenario.setdefault(log.scenario, []).append(log)
    data, labels, positions = [], [], []
    pos = 1.0
    for scenario in sorted(by_scenario):
        group = by_scenario[scenario]
        pooled: list[float] = []
        for log in group:
            series = log.column("planning_ms")
            pooled.extend(series)
            data.append(series)
            labels.append(f"{scenario}\n{log.variant} {log.avoidance[:3]} s{log.seed}")
            positions.append(pos)
            pos += 1.0
        if len(group) > 1:
            data.append(pooled)
            labels.append(f"{scenario}\n(all)")
            positions.append(pos)
            pos += 1.0
        pos += 0.8  # gap between scenario groups
    fig, ax = plt.subplots(figsize=(max(7.0, 0.8 * len(data)), 4.5))
    ax.boxplot(data, positions=positions, widths=0.6, showfliers=False)
    ax.set_xticks(positions)
    ax.set_xticklabels(labels, fontsize=6)
    ax.set_ylabel("planning time (ms)")
    ax.set_title("Planning time per flight and per scenario")
    ax.grid(True, axis="y", linewidth=0.3, alpha=0.5)
    return fig


_RENDERERS = {
    "TopView": _fig_top_view,
    "SideView": _fig_side_view,
    "Trajectory3D": _fig_trajectory_3d,
    "Velocities": _fig_velocities,
    "TimingBox": _fig_timing_box,
}


def render(req: FigureRequest) -> Path:
    """Render the requested figure to ``req.out_path`` and return that path."""
    logs = load_logs(list(req.log_paths))
    fig = _RENDERERS[req.kind](logs, req)
    out = Path(req.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.savefig(out, **SAVE_KW)
    finally:
        plt.close(fig)
    return out
