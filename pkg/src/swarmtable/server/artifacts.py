"""Run artifacts: trail SVG, final world JSON, and delimited pose/trail tables."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from ..world import World

_TRAIL_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def trails_svg(world: World) -> str:
    """SVG document with one polyline per robot/object trail, north up."""
    size = world.cfg.table_size_mm
    cell = world.cfg.cell_mm
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size:g} {size:g}" '
        f'width="600" height="600">',
        f'<rect x="0" y="0" width="{size:g}" height="{size:g}" fill="white" stroke="black"/>',
    ]
    for i in range(1, world.cfg.grid_n):
        p = i * cell
        lines.append(f'<line x1="{p:.2f}" y1="0" x2="{p:.2f}" y2="{size:g}" '
                     'stroke="#eeeeee" stroke-width="0.5"/>')
        lines.append(f'<line x1="0" y1="{p:.2f}" x2="{size:g}" y2="{p:.2f}" '
                     'stroke="#eeeeee" stroke-width="0.5"/>')

    def flip(y: float) -> float:
        return size - y  # SVG y grows downward; the table's north is up

    trails = {**{rid: r.trail for rid, r in world.robots.items()},
              **{oid: o.trail for oid, o in world.objects.items()}}
    color_idx = 0
    for name, trail in trails.items():
        if not trail:
            continue
        color = _TRAIL_COLORS[color_idx % len(_TRAIL_COLORS)]
        color_idx += 1
        points = " ".join(f"{x:.2f},{flip(y):.2f}" for x, y in trail)
        lines.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                     f'stroke-width="2"><title>{name}</title></polyline>')
    lines.append("</svg>")
    return "\n".join(lines)


def write_world_json(world: World, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(world.snapshot(), f, separators=(",", ":"))
        f.write("\n")


def write_poses_csv(snapshot: dict, path: str | Path) -> None:
    """Final poses of everything on the table, one row per entity."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "kind", "x_mm", "y_mm", "heading_deg", "col", "row"])
        for rid, r in snapshot.get("robots", {}).items():
            writer.writerow([rid, "robot", f"{r['x']:.3f}", f"{r['y']:.3f}",
                             f"{r['heading']:.2f}", r["cell"][0], r["cell"][1]])
        for oid, o in snapshot.get("objects", {}).items():
            writer.writerow([oid, o["shape"]["kind"], f"{o['x']:.3f}", f"{o['y']:.3f}",
                             f"{o['heading']:.2f}", o["cell"][0], o["cell"][1]])


def write_trails_csv(snapshot: dict, path: str | Path) -> None:
    """Every recorded trail point in long form: (id, index, x, y)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "point", "x_mm", "y_mm"])
        for name, trail in snapshot.get("trails", {}).items():
            for i, (x, y) in enumerate(trail):
                writer.writerow([name, i, f"{x:.3f}", f"{y:.3f}"])


def write_run_artifacts(world: World, out_dir: str | Path) -> dict[str, Path]:
    """Standard artifact set for a finished run; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "world": out / "world_final.json",
        "svg": out / "trails.svg",
        "poses": out / "poses.csv",
        "trail_points": out / "trail_points.csv",
    }
    write_world_json(world, paths["world"])
    paths["svg"].write_text(trails_svg(world))
    snap = world.snapshot()
    write_poses_csv(snap, paths["poses"])
    write_trails_csv(snap, paths["trail_points"])
    return paths
