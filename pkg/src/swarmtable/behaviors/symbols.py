"""Letter visualization: trajectory tracing and multi-robot formations.

Glyphs are polyline strokes authored on a 5x7 design grid and normalized into
the unit box at load time. Letters are placed upright in the world frame
(never mirrored vertically) and only uppercase A-Z is supported.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from ..geometry import (
    BoundsError,
    GridCoord,
    Hold,
    KinematicConfig,
    MetaAction,
    Translate,
    grid_to_world,
    world_to_grid,
)

# design grid extents (points run 0..4 horizontally, 0..6 vertically)
_DESIGN_W = 4.0
_DESIGN_H = 6.0
_ASPECT = _DESIGN_W / _DESIGN_H

PEN_UP_MS = 200.0


@dataclass(frozen=True)
class SymbolTemplate:
    glyph: str
    strokes: tuple[tuple[tuple[float, float], ...], ...]  # normalized [0,1]^2, y up

    @property
    def min_robots(self) -> int:
        return len(self.strokes)


_font_cache: Optional[dict[str, SymbolTemplate]] = None


def load_font() -> dict[str, SymbolTemplate]:
    """All glyph templates, loaded once from the packaged stroke font."""
    global _font_cache
    if _font_cache is None:
        raw = json.loads(
            resources.files("swarmtable.assets").joinpath("stroke_font_5x7.json").read_text()
        )
        font = {}
        for glyph, strokes in raw.items():
            norm = tuple(
                tuple((x / _DESIGN_W, y / _DESIGN_H) for x, y in stroke)
                for stroke in strokes
            )
            font[glyph] = SymbolTemplate(glyph, norm)
        _font_cache = font
    return _font_cache


def get_template(glyph: str) -> SymbolTemplate:
    font = load_font()
    if glyph not in font:
        raise KeyError(f"no template for glyph {glyph!r} (uppercase A-Z only)")
    return font[glyph]


def place_strokes(
    glyph: str, origin: GridCoord, scale: float, cfg: KinematicConfig
) -> list[list[tuple[float, float]]]:
    """Template strokes in world millimeters for a glyph anchored at a cell.

    ``scale`` is the glyph height in cells; width preserves the 5x7 aspect.
    The anchor is the center of the origin cell (bottom-left of the glyph box).
    """
    if scale <= 0:
        raise ValueError("scale must be a positive number of cells")
    template = get_template(glyph)
    ax, ay = grid_to_world(origin, cfg)
    height = scale * cfg.cell_mm
    width = height * _ASPECT
    placed = [
        [(ax + u * width, ay + v * height) for u, v in stroke]
        for stroke in template.strokes
    ]
    for stroke in placed:
        for x, y in stroke:
            if not (0 <= x <= cfg.table_size_mm and 0 <= y <= cfg.table_size_mm):
                raise BoundsError(
                    f"glyph {glyph!r} at ({origin.col},{origin.row}) scale {scale} leaves the table"
                )
    return placed


def symbol_trajectory(
    glyph: str, origin: GridCoord, scale: float, cfg: KinematicConfig, speed: int = 2
) -> list[MetaAction]:
    """Single-robot trace of a glyph: drive each stroke in order.

    Pen-up travel between strokes is marked by a short hold so downstream
    consumers can tell strokes apart in the command stream.
    """
    strokes = place_strokes(glyph, origin, scale, cfg)
    actions: list[MetaAction] = []
    for i, stroke in enumerate(strokes):
        if i > 0:
            actions.append(Hold(PEN_UP_MS))
        for point in stroke:
            actions.append(Translate(point, speed))
    return actions


def _arc_table(strokes: list[list[tuple[float, float]]]) -> tuple[list[tuple[float, float, tuple[float, float], tuple[float, float]]], float]:
    """Flatten strokes into segments with cumulative arc length."""
    segments = []
    total = 0.0
    for stroke in strokes:
        for a, b in zip(stroke, stroke[1:]):
            length = math.hypot(b[0] - a[0], b[1] - a[1])
            if length == 0:
                continue
            segments.append((total, total + length, a, b))
            total += length
    return segments, total


def _point_at(segments, total: float, s: float) -> tuple[float, float]:
    s = max(0.0, min(s, total))
    for s0, s1, a, b in segments:
        if s <= s1 or (s0, s1, a, b) == segments[-1]:
            if s < s0:
                s = s0
            t = 0.0 if s1 == s0 else (s - s0) / (s1 - s0)
            return (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)
    return segments[-1][3]


def symbol_formation(
    glyph: str, robot_count: int, origin: GridCoord, scale: float, cfg: KinematicConfig
) -> list[GridCoord]:
    """Distinct grid cells for robots forming a glyph, sampled along its strokes.

    Samples are spaced uniformly by arc length (endpoints included) and then
    snapped to cells; snap collisions walk forward along the strokes until a
    free cell appears.
    """
    template = get_template(glyph)
    if robot_count < template.min_robots:
        raise ValueError(
            f"glyph {glyph!r} needs at least {template.min_robots} robots, got {robot_count}"
        )
    strokes = place_strokes(glyph, origin, scale, cfg)
    segments, total = _arc_table(strokes)
    if robot_count == 1:
        offsets = [total / 2.0]
    else:
        offsets = [i * total / (robot_count - 1) for i in range(robot_count)]

    cells: list[GridCoord] = []
    taken: set[tuple[int, int]] = set()
    nudge = 0.3 * cfg.cell_mm
    for s in offsets:
        probe = s
        for _ in range(int(total / nudge) + 2):
            cell = world_to_grid(_point_at(segments, total, probe), cfg)
            key = (cell.col, cell.row)
            if key not in taken:
                taken.add(key)
                cells.append(cell)
                break
            probe = (probe + nudge) % total if total > 0 else probe
        else:
            raise ValueError(
                f"cannot place {robot_count} robots on distinct cells for glyph {glyph!r} at scale {scale}"
            )
    return cells


def hausdorff_mm(
    a: list[list[tuple[float, float]]],
    b: list[list[tuple[float, float]]],
    sample_mm: float = 2.0,
) -> float:
    """Symmetric Hausdorff distance between two polyline sets, by dense sampling."""

    def sample(polylines):
        pts = []
        for line in polylines:
            if len(line) == 1:
                pts.append(line[0])
                continue
            for p, q in zip(line, line[1:]):
                length = math.hypot(q[0] - p[0], q[1] - p[1])
                n = max(1, int(length / sample_mm))
                for i in range(n + 1):
                    t = i / n
                    pts.append((p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t))
        return pts

    pa, pb = sample(a), sample(b)
    if not pa or not pb:
        raise ValueError("cannot compare empty polyline sets")

    def directed(src, dst):
        worst = 0.0
        for x, y in src:
            best = min((x - u) ** 2 + (y - v) ** 2 for u, v in dst)
            worst = max(worst, best)
        return math.sqrt(worst)

    return max(directed(pa, pb), directed(pb, pa))
