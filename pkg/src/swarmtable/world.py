"""Deterministic tabletop world simulation.

Robots consume timed wheel commands on a fixed tick (default 20 ms), with
commands split exactly across tick boundaries so the tick size never changes
where a command chain ends up. Object pushing is kinematic: light objects
inherit the contact robot's motion, heavy objects move only under two or more
aligned pushers, fixed objects stop the robot. Everything iterates in
insertion order, so identical inputs produce bit-identical state histories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

from .geometry import (
    GridCoord,
    KinematicConfig,
    MotorCommand,
    Pose,
    RotateTo,
    Translate,
    apply,
    apply_chain,
    compile_action,
    compile_rotate_angle,
    grid_to_world,
    pair_orient_headings,
    split_command,
    world_to_grid,
)
from .protocol import ActionSequence

DEFAULT_TICK_MS = 20.0
DEFAULT_FOOTPRINT_MM = 32.0
OCCUPANCY_THRESHOLD = 0.25       # fraction of cell area
HEAVY_MIN_PUSHERS = 2
HEAVY_ALIGN_DEG = 30.0
_EPS = 1e-9


@dataclass(frozen=True)
class Circle:
    radius_mm: float


@dataclass(frozen=True)
class Rect:
    w_mm: float
    h_mm: float


Shape = Union[Circle, Rect]


@dataclass
class QueuedCommand:
    cmd: MotorCommand
    step_idx: int = -1


@dataclass
class RobotState:
    """One robot: pose, square footprint, and its pending command queue."""

    id: str
    pose: Pose
    footprint_mm: float = DEFAULT_FOOTPRINT_MM
    queue: list[QueuedCommand] = field(default_factory=list)
    head_remaining_ms: float = 0.0
    trail: list[tuple[float, float]] = field(default_factory=list)

    @property
    def moving(self) -> bool:
        return bool(self.queue)

    @property
    def radius_mm(self) -> float:
        # contact disc inscribed in the square footprint
        return self.footprint_mm / 2.0

    def enqueue(self, cmd: MotorCommand, step_idx: int = -1) -> None:
        self.queue.append(QueuedCommand(cmd, step_idx))
        if len(self.queue) == 1:
            self.head_remaining_ms = cmd.duration_ms

    def clone(self) -> "RobotState":
        c = RobotState(self.id, self.pose, self.footprint_mm)
        c.queue = [QueuedCommand(q.cmd, q.step_idx) for q in self.queue]
        c.head_remaining_ms = self.head_remaining_ms
        c.trail = list(self.trail)
        return c


@dataclass
class TableObject:
    """A pushable or fixed prop on the table. Rects are axis-aligned."""

    id: str
    shape: Shape
    pose: Pose
    mass_class: str = "light"  # light | heavy | fixed
    trail: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.mass_class not in ("light", "heavy", "fixed"):
            raise ValueError(f"unknown mass class {self.mass_class!r}")

    def clone(self) -> "TableObject":
        c = TableObject(self.id, self.shape, self.pose, self.mass_class)
        c.trail = list(self.trail)
        return c


@dataclass
class Violation:
    robot: str
    step: int
    kind: str  # out_of_bounds | predicted_collision | unknown_robot | bad_speed
    detail: str

    def to_dict(self) -> dict:
        return {"robot": self.robot, "step": self.step, "kind": self.kind, "detail": self.detail}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{v.kind}[{v.robot}#{v.step}]: {v.detail}" for v in self.violations)


@dataclass(frozen=True)
class OccupancyGrid:
    """Boolean 30x30 map plus the id responsible for each blocked cell."""

    grid_n: int
    occupied: frozenset[tuple[int, int]]
    occupant: dict[tuple[int, int], str]

    def is_occupied(self, col: int, row: int) -> bool:
        return (col, row) in self.occupied


class World:
    """Single-writer simulation state. Snapshots are plain dicts, safe to share."""

    def __init__(self, cfg: Optional[KinematicConfig] = None, rng_seed: int = 0):
        self.cfg = cfg or KinematicConfig()
        self.robots: dict[str, RobotState] = {}
        self.objects: dict[str, TableObject] = {}
        self.clock_ms: float = 0.0
        self.rng_seed = rng_seed
        self.events: list[dict] = []

    # --- construction -------------------------------------------------------

    def add_robot(self, rid: str, cell: GridCoord, heading: float = 90.0,
                  footprint_mm: float = DEFAULT_FOOTPRINT_MM) -> RobotState:
        if rid in self.robots:
            raise ValueError(f"duplicate robot id {rid!r}")
        x, y = grid_to_world(cell, self.cfg)
        robot = RobotState(rid, Pose(x, y, heading), footprint_mm)
        self.robots[rid] = robot
        return robot

    def add_object(self, oid: str, shape: Shape, cell: GridCoord,
                   mass_class: str = "light", heading: float = 0.0) -> TableObject:
        if oid in self.objects:
            raise ValueError(f"duplicate object id {oid!r}")
        x, y = grid_to_world(cell, self.cfg)
        obj = TableObject(oid, shape, Pose(x, y, heading), mass_class)
        self.objects[oid] = obj
        return obj

    @classmethod
    def from_scenario(cls, data: dict, cfg: Optional[KinematicConfig] = None) -> "World":
        """Build a world from the scenario file's world section."""
        world = cls(cfg=cfg, rng_seed=int(data.get("seed", 0)))
        for spec in data.get("robots", []):
            cell = GridCoord(int(spec["cell"][0]), int(spec["cell"][1]))
            world.add_robot(spec["id"], cell, float(spec.get("heading", 90.0)),
                            float(spec.get("footprint_mm", DEFAULT_FOOTPRINT_MM)))
        for spec in data.get("objects", []):
            raw = spec["shape"]
            if raw["kind"] == "circle":
                shape: Shape = Circle(float(raw["radius_mm"]))
            elif raw["kind"] == "rect":
                shape = Rect(float(raw["w_mm"]), float(raw["h_mm"]))
            else:
                raise ValueError(f"unknown shape kind {raw['kind']!r}")
            cell = GridCoord(int(spec["cell"][0]), int(spec["cell"][1]))
            world.add_object(spec["id"], shape, cell, spec.get("mass_class", "light"),
                             float(spec.get("heading", 0.0)))
        return world

    def clone(self) -> "World":
        w = World(self.cfg, self.rng_seed)
        w.clock_ms = self.clock_ms
        w.robots = {rid: r.clone() for rid, r in self.robots.items()}
        w.objects = {oid: o.clone() for oid, o in self.objects.items()}
        w.events = list(self.events)
        return w

    # --- queries -------------------------------------------------------------

    def poses(self) -> dict[str, Pose]:
        return {rid: r.pose for rid, r in self.robots.items()}

    def robot_cell(self, rid: str) -> GridCoord:
        return world_to_grid(self.robots[rid].pose.xy, self.cfg)

    def any_moving(self) -> bool:
        return any(r.moving for r in self.robots.values())

    def rest_overlaps(self) -> list[tuple[str, str]]:
        """Robot pairs sharing a grid cell while idle (reported, never enforced)."""
        seen: dict[tuple[int, int], str] = {}
        out = []
        for rid, robot in self.robots.items():
            if robot.moving:
                continue
            cell = world_to_grid(robot.pose.xy, self.cfg)
            key = (cell.col, cell.row)
            if key in seen:
                out.append((seen[key], rid))
            else:
                seen[key] = rid
        return out

    # --- stepping -------------------------------------------------------------

    def step(self, dt_ms: float = DEFAULT_TICK_MS) -> list[dict]:
        """Advance the world by one tick; returns the events raised during it."""
        if dt_ms <= 0:
            raise ValueError("tick must be positive")
        tick_events: list[dict] = []
        heavy_contacts: dict[str, list[tuple[str, tuple[float, float], float]]] = {}

        for rid, robot in self.robots.items():
            budget = dt_ms
            while budget > _EPS and robot.queue:
                head = robot.queue[0]
                take = min(budget, robot.head_remaining_ms)
                piece, _ = split_command(head.cmd, take)
                before = robot.pose
                robot.pose = apply(before, piece, self.cfg)
                dx = robot.pose.x - before.x
                dy = robot.pose.y - before.y
                if dx * dx + dy * dy > _EPS:
                    self._resolve_contacts(robot, (dx, dy), heavy_contacts, tick_events)
                    self._clamp(robot, tick_events)
                    robot.trail.append(robot.pose.xy)
                robot.head_remaining_ms -= take
                budget -= take
                if robot.head_remaining_ms <= _EPS:
                    robot.queue.pop(0)
                    if robot.queue:
                        robot.head_remaining_ms = robot.queue[0].cmd.duration_ms
                    else:
                        robot.head_remaining_ms = 0.0

        self._resolve_heavy(heavy_contacts, tick_events)
        self.clock_ms += dt_ms
        for ev in tick_events:
            ev.setdefault("clock_ms", self.clock_ms)
        self.events.extend(tick_events)
        return tick_events

    def run_until_quiescent(
        self,
        tick_ms: float = DEFAULT_TICK_MS,
        max_ms: float = 600_000.0,
        on_tick: Optional[Callable[["World"], None]] = None,
    ) -> list[dict]:
        """Tick until every robot queue drains; returns all events raised."""
        collected: list[dict] = []
        elapsed = 0.0
        while self.any_moving():
            if elapsed >= max_ms:
                raise RuntimeError(f"world did not quiesce within {max_ms} ms")
            collected.extend(self.step(tick_ms))
            elapsed += tick_ms
            if on_tick is not None:
                on_tick(self)
        return collected

    # --- contact resolution ----------------------------------------------------

    def _penetration(self, robot: RobotState, obj: TableObject) -> float:
        px, py = robot.pose.x, robot.pose.y
        if isinstance(obj.shape, Circle):
            dist = math.hypot(px - obj.pose.x, py - obj.pose.y)
            return robot.radius_mm + obj.shape.radius_mm - dist
        half_w = obj.shape.w_mm / 2.0
        half_h = obj.shape.h_mm / 2.0
        cx = min(max(px, obj.pose.x - half_w), obj.pose.x + half_w)
        cy = min(max(py, obj.pose.y - half_h), obj.pose.y + half_h)
        return robot.radius_mm - math.hypot(px - cx, py - cy)

    def _resolve_contacts(
        self,
        robot: RobotState,
        delta: tuple[float, float],
        heavy_contacts: dict[str, list[tuple[str, tuple[float, float], float]]],
        events: list[dict],
    ) -> None:
        for oid, obj in self.objects.items():
            if self._penetration(robot, obj) <= 0:
                continue
            toward = (obj.pose.x - robot.pose.x) * delta[0] + (obj.pose.y - robot.pose.y) * delta[1]
            if toward <= 0:
                continue
            if obj.mass_class == "fixed":
                robot.pose = Pose(robot.pose.x - delta[0], robot.pose.y - delta[1],
                                  robot.pose.heading)
                events.append({"kind": "blocked", "robot": robot.id, "object": oid})
                return
            if obj.mass_class == "light":
                self._move_object(obj, delta)
            else:  # heavy: aggregate, resolve after all robots advanced
                heavy_contacts.setdefault(oid, []).append(
                    (robot.id, delta, robot.pose.heading)
                )

    def _resolve_heavy(
        self,
        heavy_contacts: dict[str, list[tuple[str, tuple[float, float], float]]],
        events: list[dict],
    ) -> None:
        for oid, contacts in heavy_contacts.items():
            pushers = {rid for rid, _, _ in contacts}
            if len(pushers) < HEAVY_MIN_PUSHERS:
                continue
            sx = sum(d[0] for _, d, _ in contacts)
            sy = sum(d[1] for _, d, _ in contacts)
            norm = math.hypot(sx, sy)
            if norm < _EPS:
                continue
            push_heading = math.degrees(math.atan2(sy, sx))
            aligned = all(
                abs(_heading_diff(h, push_heading)) <= HEAVY_ALIGN_DEG
                for _, _, h in contacts
            )
            if not aligned:
                continue
            # distinct robots' mean displacement, not per-contact mean
            per_robot: dict[str, tuple[float, float]] = {}
            for rid, d, _ in contacts:
                prev = per_robot.get(rid, (0.0, 0.0))
                per_robot[rid] = (prev[0] + d[0], prev[1] + d[1])
            mx = sum(v[0] for v in per_robot.values()) / len(per_robot)
            my = sum(v[1] for v in per_robot.values()) / len(per_robot)
            self._move_object(self.objects[oid], (mx, my))

    def _move_object(self, obj: TableObject, delta: tuple[float, float]) -> None:
        x = min(max(obj.pose.x + delta[0], 0.0), self.cfg.table_size_mm)
        y = min(max(obj.pose.y + delta[1], 0.0), self.cfg.table_size_mm)
        obj.pose = Pose(x, y, obj.pose.heading)
        obj.trail.append(obj.pose.xy)

    def _clamp(self, robot: RobotState, events: list[dict]) -> None:
        x = min(max(robot.pose.x, 0.0), self.cfg.table_size_mm)
        y = min(max(robot.pose.y, 0.0), self.cfg.table_size_mm)
        if x != robot.pose.x or y != robot.pose.y:
            robot.pose = Pose(x, y, robot.pose.heading)
            events.append({"kind": "boundary", "robot": robot.id})

    # --- occupancy --------------------------------------------------------------

    def occupancy(self, exclude: tuple[str, ...] = ()) -> OccupancyGrid:
        """Cells more than 25% covered by any robot footprint or object."""
        n = self.cfg.grid_n
        cell = self.cfg.cell_mm
        occupied: set[tuple[int, int]] = set()
        occupant: dict[tuple[int, int], str] = {}

        def mark(cells: list[tuple[int, int]], owner: str) -> None:
            for key in cells:
                if key not in occupied:
                    occupied.add(key)
                    occupant[key] = owner

        for rid, robot in self.robots.items():
            if rid in exclude:
                continue
            half = robot.footprint_mm / 2.0
            mark(_rect_cells(robot.pose.x, robot.pose.y, half * 2, half * 2, cell, n), rid)
        for oid, obj in self.objects.items():
            if oid in exclude:
                continue
            if isinstance(obj.shape, Rect):
                mark(_rect_cells(obj.pose.x, obj.pose.y, obj.shape.w_mm, obj.shape.h_mm, cell, n), oid)
            else:
                mark(_circle_cells(obj.pose.x, obj.pose.y, obj.shape.radius_mm, cell, n), oid)
        return OccupancyGrid(n, frozenset(occupied), occupant)

    # --- snapshots ---------------------------------------------------------------

    def snapshot(self, include_trails: bool = True) -> dict:
        robots: dict[str, Any] = {}
        for rid, r in self.robots.items():
            cell = world_to_grid(r.pose.xy, self.cfg)
            robots[rid] = {
                "x": r.pose.x, "y": r.pose.y, "heading": r.pose.heading,
                "cell": [cell.col, cell.row], "moving": r.moving,
                "footprint_mm": r.footprint_mm,
            }
        objects: dict[str, Any] = {}
        for oid, o in self.objects.items():
            cell = world_to_grid(o.pose.xy, self.cfg)
            shape = ({"kind": "circle", "radius_mm": o.shape.radius_mm}
                     if isinstance(o.shape, Circle)
                     else {"kind": "rect", "w_mm": o.shape.w_mm, "h_mm": o.shape.h_mm})
            objects[oid] = {
                "x": o.pose.x, "y": o.pose.y, "heading": o.pose.heading,
                "cell": [cell.col, cell.row], "shape": shape, "mass_class": o.mass_class,
            }
        snap = {
            "clock_ms": self.clock_ms,
            "table_size_mm": self.cfg.table_size_mm,
            "grid_n": self.cfg.grid_n,
            "robots": robots,
            "objects": objects,
        }
        if include_trails:
            snap["trails"] = {
                **{rid: [list(p) for p in r.trail] for rid, r in self.robots.items()},
                **{oid: [list(p) for p in o.trail] for oid, o in self.objects.items()},
            }
        return snap


def _heading_diff(a: float, b: float) -> float:
    d = math.fmod(a - b, 360.0)
    if d > 180.0:
        d -= 360.0
    elif d < -180.0:
        d += 360.0
    return d


def _cell_range(lo: float, hi: float, cell: float, n: int) -> range:
    first = max(int(math.floor(lo / cell)), 0)
    last = min(int(math.floor(hi / cell)), n - 1)
    return range(first, last + 1)


def _rect_cells(cx: float, cy: float, w: float, h: float, cell: float, n: int) -> list[tuple[int, int]]:
    """Cells whose analytic intersection with an axis-aligned rect exceeds the threshold."""
    x0, x1 = cx - w / 2.0, cx + w / 2.0
    y0, y1 = cy - h / 2.0, cy + h / 2.0
    out = []
    threshold = OCCUPANCY_THRESHOLD * cell * cell
    for col in _cell_range(x0, x1, cell, n):
        for row in _cell_range(y0, y1, cell, n):
            ox = min(x1, (col + 1) * cell) - max(x0, col * cell)
            oy = min(y1, (row + 1) * cell) - max(y0, row * cell)
            if ox > 0 and oy > 0 and ox * oy > threshold:
                out.append((col, row))
    return out


def _circle_cells(cx: float, cy: float, radius: float, cell: float, n: int) -> list[tuple[int, int]]:
    """Cells more than threshold-covered by a circle, by 12x12 supersampling."""
    out = []
    samples = 12
    threshold = OCCUPANCY_THRESHOLD * samples * samples
    r2 = radius * radius
    for col in _cell_range(cx - radius, cx + radius, cell, n):
        for row in _cell_range(cy - radius, cy + radius, cell, n):
            hits = 0
            for i in range(samples):
                px = col * cell + (i + 0.5) * cell / samples
                for j in range(samples):
                    py = row * cell + (j + 0.5) * cell / samples
                    if (px - cx) ** 2 + (py - cy) ** 2 <= r2:
                        hits += 1
            if hits > threshold:
                out.append((col, row))
    return out


# --- sequence compilation and validation ------------------------------------------


class SequenceError(ValueError):
    """Structural problem found while compiling a sequence (also used as data)."""

    def __init__(self, violation: Violation):
        super().__init__(violation.detail)
        self.violation = violation


def compile_tracks(world: World, seq: ActionSequence) -> dict[str, list[QueuedCommand]]:
    """Compile an action sequence to per-robot wheel-command queues.

    Poses are tracked forward analytically per robot, so later steps compile
    against where the robot will actually be. A pair_orient step is a
    two-robot step: it appends the partner's rotation to the partner's queue
    as well. With parallel=False, each robot's track is delayed by holds until
    the previous tracks complete.
    """
    poses = {rid: r.pose for rid, r in world.robots.items()}
    queues: dict[str, list[QueuedCommand]] = {}

    def emit(rid: str, cmds, step_idx: int) -> float:
        total = 0.0
        for cmd in cmds:
            queues.setdefault(rid, []).append(QueuedCommand(cmd, step_idx))
            total += cmd.duration_ms
        poses[rid] = apply_chain(poses[rid], list(cmds), world.cfg)
        return total

    serial_offset = 0.0
    for track in seq.robots:
        rid = track.id
        if rid not in world.robots:
            raise SequenceError(Violation(rid, -1, "unknown_robot", f"robot {rid!r} not in world"))
        track_ms = 0.0
        if not seq.parallel and serial_offset > 0:
            track_ms += emit(rid, [MotorCommand(0, 0, serial_offset)], -1)
        for idx, step in enumerate(track.actions):
            if step.type != "wait" and step.speed not in (1, 2, 3):
                raise SequenceError(Violation(rid, idx, "bad_speed", f"speed {step.speed!r} outside 1..3"))
            if step.type == "translate":
                col, row = step.target
                if not (0 <= col < world.cfg.grid_n and 0 <= row < world.cfg.grid_n):
                    raise SequenceError(Violation(
                        rid, idx, "out_of_bounds",
                        f"target ({col}, {row}) outside {world.cfg.grid_n}x{world.cfg.grid_n} grid"))
                target = grid_to_world(GridCoord(col, row), world.cfg)
                track_ms += emit(rid, compile_action(Translate(target, step.speed), poses[rid], world.cfg), idx)
            elif step.type == "rotate":
                track_ms += emit(rid, compile_rotate_angle(poses[rid], step.angle, step.pivot, step.speed, world.cfg), idx)
            elif step.type == "wait":
                track_ms += emit(rid, [MotorCommand(0, 0, step.duration_ms)], idx)
            else:  # pair_orient
                partner = step.partner
                if partner == rid:
                    raise SequenceError(Violation(rid, idx, "unknown_robot", "pair_orient partner is self"))
                if partner not in world.robots:
                    raise SequenceError(Violation(rid, idx, "unknown_robot", f"partner {partner!r} not in world"))
                ha, hb = pair_orient_headings(step.mode, poses[rid].xy, poses[partner].xy)
                track_ms += emit(rid, compile_action(RotateTo(ha, step.speed), poses[rid], world.cfg), idx)
                emit(partner, compile_action(RotateTo(hb, step.speed), poses[partner], world.cfg), idx)
        serial_offset += track_ms
    return queues


def dispatch(world: World, queues: dict[str, list[QueuedCommand]]) -> None:
    """Append compiled queues onto the robots, preserving per-robot order."""
    for rid, cmds in queues.items():
        for qc in cmds:
            world.robots[rid].enqueue(qc.cmd, qc.step_idx)


def validate_sequence(world: World, seq: ActionSequence,
                      tick_ms: float = DEFAULT_TICK_MS) -> ValidationReport:
    """Dry-run a sequence on a copy of the world and report every violation.

    Structural problems (unknown ids, bad speeds, out-of-range targets) are
    collected without simulating; otherwise the copy is run to quiescence and
    any two robots predicted in the same grid cell during the same tick are
    flagged as collisions. Errors are data: this never raises for bad plans.
    """
    report = ValidationReport()
    probe = world.clone()
    try:
        queues = compile_tracks(probe, seq)
    except SequenceError as e:
        report.violations.append(e.violation)
        return report

    dispatch(probe, queues)
    flagged: set[tuple[str, str]] = set()
    guard_ms = 600_000.0
    elapsed = 0.0
    while probe.any_moving() and elapsed < guard_ms:
        active_step = {rid: (r.queue[0].step_idx if r.queue else -1)
                       for rid, r in probe.robots.items()}
        probe.step(tick_ms)
        elapsed += tick_ms
        cells: dict[tuple[int, int], str] = {}
        for rid, robot in probe.robots.items():
            cell = world_to_grid(robot.pose.xy, probe.cfg)
            key = (cell.col, cell.row)
            if key in cells:
                pair = tuple(sorted((cells[key], rid)))
                if pair not in flagged:
                    flagged.add(pair)
                    mover = rid if active_step.get(rid, -1) >= 0 else cells[key]
                    report.violations.append(Violation(
                        mover, active_step.get(mover, -1), "predicted_collision",
                        f"robots {pair[0]!r} and {pair[1]!r} share cell {key} at t={probe.clock_ms:.0f}ms"))
            else:
                cells[key] = rid
    return report
