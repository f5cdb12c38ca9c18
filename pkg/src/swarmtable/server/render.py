"""Matplotlib rendering of world snapshots: top-down table figures."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # file output only; no display in headless runs
import matplotlib.pyplot as plt
from matplotlib.patches import Circle as MplCircle
from matplotlib.patches import Rectangle as MplRect

ROBOT_COLOR = "#2b6cb0"
OBJECT_COLORS = {"light": "#f6ad55", "heavy": "#9b2c2c", "fixed": "#4a5568"}


def render_snapshot(snapshot: dict, out_path: str | Path, title: str = "") -> Path:
    """Draw a snapshot (robots, objects, trails, grid) to a PNG file."""
    size = snapshot["table_size_mm"]
    grid_n = snapshot["grid_n"]
    cell = size / grid_n

    fig, ax = plt.subplots(figsize=(7, 7))
    ax.set_xlim(0, size)
    ax.set_ylim(0, size)
    ax.set_aspect("equal")
    ax.set_xlabel("east (mm)")
    ax.set_ylabel("north (mm)")
    if title:
        ax.set_title(title)
    for i in range(grid_n + 1):
        ax.axvline(i * cell, color="0.92", lw=0.5, zorder=0)
        ax.axhline(i * cell, color="0.92", lw=0.5, zorder=0)

    for name, trail in snapshot.get("trails", {}).items():
        if len(trail) >= 2:
            xs = [p[0] for p in trail]
            ys = [p[1] for p in trail]
            ax.plot(xs, ys, lw=1.2, alpha=0.8, zorder=1, label=f"{name} trail")

    for oid, obj in snapshot.get("objects", {}).items():
        color = OBJECT_COLORS.get(obj["mass_class"], "#999999")
        shape = obj["shape"]
        if shape["kind"] == "circle":
            ax.add_patch(MplCircle((obj["x"], obj["y"]), shape["radius_mm"],
                                   color=color, alpha=0.8, zorder=2))
        else:
            ax.add_patch(MplRect((obj["x"] - shape["w_mm"] / 2, obj["y"] - shape["h_mm"] / 2),
                                 shape["w_mm"], shape["h_mm"],
                                 color=color, alpha=0.8, zorder=2))
        ax.annotate(oid, (obj["x"], obj["y"]), fontsize=7, ha="center",
                    va="bottom", xytext=(0, 6), textcoords="offset points")

    for rid, robot in snapshot.get("robots", {}).items():
        half = robot.get("footprint_mm", 32.0) / 2
        ax.add_patch(MplRect((robot["x"] - half, robot["y"] - half), 2 * half, 2 * half,
                             color=ROBOT_COLOR, alpha=0.9, zorder=3))
        heading = math.radians(robot["heading"])
        ax.annotate("", xy=(robot["x"] + 1.6 * half * math.cos(heading),
                            robot["y"] + 1.6 * half * math.sin(heading)),
                    xytext=(robot["x"], robot["y"]),
                    arrowprops=dict(arrowstyle="->", color="black", lw=1.2), zorder=4)
        ax.annotate(rid, (robot["x"], robot["y"]), fontsize=7, ha="center",
                    va="top", xytext=(0, -8), textcoords="offset points", zorder=4)

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return out_path
