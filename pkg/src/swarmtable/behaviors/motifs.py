"""Non-verbal expression motifs: small parameterized motion templates.

Each motif instantiates to a protocol action sequence at the robots' current
poses. Geometry constants (one-cell hops, the two-cell argument gap) follow
the customary staging of these gestures; they are template data, not physics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from ..geometry import GridCoord, KinematicConfig, Pose, world_to_grid
from ..protocol import ActionSequence, ActionStep, RobotTrack

APPROACH_GAP_CELLS = 2.0
MIN_CLEARANCE_MM = 48.0  # 1.5 footprints, keeps gestures collision-free


@dataclass(frozen=True)
class Motif:
    name: str
    roles: int
    build: Callable[[list[Pose], KinematicConfig], ActionSequence]


def _clamp_cell(col: int, row: int, n: int) -> GridCoord:
    return GridCoord(min(max(col, 0), n - 1), min(max(row, 0), n - 1))


def _step_cell(pose: Pose, cfg: KinematicConfig, forward: bool = True) -> GridCoord:
    """Neighboring cell one hop along (or against) the robot's heading."""
    cell = world_to_grid(pose.xy, cfg)
    sign = 1 if forward else -1
    dc = round(math.cos(math.radians(pose.heading))) * sign
    dr = round(math.sin(math.radians(pose.heading))) * sign
    if dc == 0 and dr == 0:
        dc = sign
    target = _clamp_cell(cell.col + dc, cell.row + dr, cfg.grid_n)
    if target == cell:  # at the table edge: hop the other way instead
        target = _clamp_cell(cell.col - dc, cell.row - dr, cfg.grid_n)
    return target


def _build_excitement(poses: list[Pose], cfg: KinematicConfig) -> ActionSequence:
    # hop forward one cell, then spin a full circle
    pose = poses[0]
    target = _step_cell(pose, cfg, forward=True)
    return ActionSequence(robots=(RobotTrack("actor0", (
        ActionStep.translate((target.col, target.row), 2),
        ActionStep.rotate(360.0, 3),
    )),))


def _build_sadness(poses: list[Pose], cfg: KinematicConfig) -> ActionSequence:
    # turn away slowly and slink back a cell
    pose = poses[0]
    target = _step_cell(pose, cfg, forward=False)
    return ActionSequence(robots=(RobotTrack("actor0", (
        ActionStep.rotate(180.0, 1),
        ActionStep.translate((target.col, target.row), 1),
    )),))


def _meeting_cells(a: Pose, b: Pose, cfg: KinematicConfig) -> tuple[GridCoord, GridCoord]:
    """Approach cells on the a-b line leaving roughly the standard gap."""
    gap = APPROACH_GAP_CELLS * cfg.cell_mm
    dist = math.hypot(b.x - a.x, b.y - a.y)
    if dist < 1e-9:
        raise ValueError("paired motif robots share a position")
    ux, uy = (b.x - a.x) / dist, (b.y - a.y) / dist
    mx, my = (a.x + b.x) / 2.0, (a.y + b.y) / 2.0
    ca = world_to_grid((min(max(mx - ux * gap / 2, 0), cfg.table_size_mm),
                        min(max(my - uy * gap / 2, 0), cfg.table_size_mm)), cfg)
    cb = world_to_grid((min(max(mx + ux * gap / 2, 0), cfg.table_size_mm),
                        min(max(my + uy * gap / 2, 0), cfg.table_size_mm)), cfg)
    # snapping may have eaten the clearance; back robot a off along the line
    for _ in range(3):
        pa = ((ca.col + 0.5) * cfg.cell_mm, (ca.row + 0.5) * cfg.cell_mm)
        pb = ((cb.col + 0.5) * cfg.cell_mm, (cb.row + 0.5) * cfg.cell_mm)
        if math.hypot(pb[0] - pa[0], pb[1] - pa[1]) >= MIN_CLEARANCE_MM:
            break
        ca = _clamp_cell(int(ca.col - round(ux)), int(ca.row - round(uy)), cfg.grid_n)
    return ca, cb


def _retreat_cell(approach: GridCoord, away: tuple[float, float], cfg: KinematicConfig) -> GridCoord:
    dc = round(away[0] * 2)
    dr = round(away[1] * 2)
    return _clamp_cell(approach.col + dc, approach.row + dr, cfg.grid_n)


def _build_pair_meeting(spin: bool):
    def build(poses: list[Pose], cfg: KinematicConfig) -> ActionSequence:
        a, b = poses
        ca, cb = _meeting_cells(a, b, cfg)
        dist = math.hypot(b.x - a.x, b.y - a.y)
        ux, uy = (b.x - a.x) / dist, (b.y - a.y) / dist
        ra = _retreat_cell(ca, (-ux, -uy), cfg)
        rb = _retreat_cell(cb, (ux, uy), cfg)
        if spin:  # argument: charge in, rant in circles, storm off
            middle = (ActionStep.rotate(360.0, 3),)
            approach_speed = 3
        else:     # greeting: walk up, exchange a small bow
            middle = (ActionStep.rotate(15.0, 1), ActionStep.rotate(-15.0, 1))
            approach_speed = 2
        return ActionSequence(robots=(
            RobotTrack("actor0", (
                ActionStep.pair_orient("face_to_face", "actor1", 2),
                ActionStep.translate((ca.col, ca.row), approach_speed),
                *middle,
                ActionStep.translate((ra.col, ra.row), 2),
            )),
            RobotTrack("actor1", (
                ActionStep.translate((cb.col, cb.row), approach_speed),
                *middle,
                ActionStep.translate((rb.col, rb.row), 2),
            )),
        ))

    return build


MOTIFS: dict[str, Motif] = {
    "excitement": Motif("excitement", 1, _build_excitement),
    "sadness": Motif("sadness", 1, _build_sadness),
    "greeting": Motif("greeting", 2, _build_pair_meeting(spin=False)),
    "argument": Motif("argument", 2, _build_pair_meeting(spin=True)),
    "celebration_spin": Motif("celebration_spin", 1, _build_excitement),
}


def instantiate_motif(
    name: str, poses: dict[str, Pose], cfg: KinematicConfig
) -> ActionSequence:
    """Bind a motif template to concrete robots at their current poses.

    ``poses`` maps the participating robot ids in role order; its length must
    match the motif arity. The returned sequence uses the real robot ids.
    """
    if name not in MOTIFS:
        raise KeyError(f"unknown motif {name!r}")
    motif = MOTIFS[name]
    if len(poses) != motif.roles:
        raise ValueError(f"motif {name!r} takes {motif.roles} robot(s), got {len(poses)}")
    ids = list(poses.keys())
    seq = motif.build(list(poses.values()), cfg)
    renames = {f"actor{i}": rid for i, rid in enumerate(ids)}

    def rebind(step: ActionStep) -> ActionStep:
        if step.type == "pair_orient":
            return ActionStep.pair_orient(step.mode, renames.get(step.partner, step.partner), step.speed)
        return step

    return ActionSequence(
        robots=tuple(
            RobotTrack(renames[t.id], tuple(rebind(s) for s in t.actions))
            for t in seq.robots
        ),
        parallel=seq.parallel,
    )
