"""Coordinate system, differential-drive kinematics and the meta-action compiler.

The tabletop is a square of ``table_size_mm`` per side, divided into an
``grid_n`` x ``grid_n`` game coordinate system (columns grow east, rows grow
north). Robot headings are degrees counterclockwise from the +x (east) axis,
normalized to [0, 360).

All motion is expressed as timed wheel commands for a two-wheel differential
drive. ``apply`` is the exact closed-form forward-kinematics update shared by
the simulator and by every test oracle, so compiler and integrator can never
drift apart for any calibration constants.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Union

# Device speed levels exposed to planners (1..3), mapping to wheel speed
# units 10/20/30 on the hardware scale.
SPEED_LEVELS = (1, 2, 3)
MAX_WHEEL_UNITS = 30

PAIR_MODES = (
    "face_to_face",
    "back_to_back",
    "face_to_back",
    "parallel",
    "counter_parallel",
)


class ConfigError(ValueError):
    """Invalid kinematic configuration."""


class BoundsError(ValueError):
    """Coordinate or target outside the table / grid."""


def normalize_heading(deg: float) -> float:
    """Wrap an angle in degrees into [0, 360)."""
    h = math.fmod(deg, 360.0)
    if h < 0:
        h += 360.0
    # fmod can return 360.0 - epsilon artifacts that round to 360 exactly
    return 0.0 if h == 360.0 else h


def angle_diff(target: float, current: float) -> float:
    """Signed shortest rotation from ``current`` to ``target``, in (-180, 180]."""
    d = math.fmod(target - current, 360.0)
    if d > 180.0:
        d -= 360.0
    elif d <= -180.0:
        d += 360.0
    return d


def bearing(from_xy: tuple[float, float], to_xy: tuple[float, float]) -> float:
    """Heading (deg CCW from east) pointing from one point at another."""
    dx = to_xy[0] - from_xy[0]
    dy = to_xy[1] - from_xy[1]
    return normalize_heading(math.degrees(math.atan2(dy, dx)))


@dataclass(frozen=True)
class KinematicConfig:
    """Table geometry plus the two calibration constants.

    ``track_width_mm`` and ``velocity_gain`` stand in for the wheel geometry
    and speed-unit scaling of the physical platform; correctness of every
    kinematic property is defined relative to this config, not hardware.
    """

    table_size_mm: float = 1000.0
    grid_n: int = 30
    track_width_mm: float = 26.0   # distance between wheel contact points
    velocity_gain: float = 3.0     # mm/s per wheel speed unit

    def __post_init__(self) -> None:
        if self.table_size_mm <= 0:
            raise ConfigError("table_size_mm must be positive")
        if self.grid_n < 1:
            raise ConfigError("grid_n must be at least 1")
        if self.track_width_mm <= 0:
            raise ConfigError("track_width_mm must be positive")
        if self.velocity_gain <= 0:
            raise ConfigError("velocity_gain must be positive")

    @property
    def cell_mm(self) -> float:
        return self.table_size_mm / self.grid_n

    @classmethod
    def from_dict(cls, data: dict) -> "KinematicConfig":
        known = {
            "table_size_mm": data.get("table_size_mm", 1000.0),
            "grid_n": data.get("grid_n", 30),
            "track_width_mm": data.get("track_width_mm", 26.0),
            "velocity_gain": data.get("velocity_gain", 3.0),
        }
        return cls(**known)

    @classmethod
    def from_json(cls, path: str) -> "KinematicConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class Pose:
    """Continuous robot pose: position in mm, heading in degrees CCW from east."""

    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("pose coordinates must be finite")
        object.__setattr__(self, "heading", normalize_heading(self.heading))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class GridCoord:
    """Discrete game coordinate: column (east) and row (north), 0-based."""

    col: int
    row: int

    def as_list(self) -> list[int]:
        return [self.col, self.row]


def grid_to_world(c: GridCoord, cfg: KinematicConfig) -> tuple[float, float]:
    """Center of a grid cell in table millimeters.

    Raises BoundsError if the cell is outside the grid.
    """
    if not (0 <= c.col < cfg.grid_n and 0 <= c.row < cfg.grid_n):
        raise BoundsError(f"grid cell ({c.col}, {c.row}) outside 0..{cfg.grid_n - 1}")
    cell = cfg.cell_mm
    return ((c.col + 0.5) * cell, (c.row + 0.5) * cell)


def world_to_grid(p: tuple[float, float], cfg: KinematicConfig) -> GridCoord:
    """Grid cell containing a table point; the table edge belongs to the last cell."""
    x, y = p
    if not (0 <= x <= cfg.table_size_mm and 0 <= y <= cfg.table_size_mm):
        raise BoundsError(f"point ({x:.2f}, {y:.2f}) outside table")
    cell = cfg.cell_mm
    col = min(int(x / cell), cfg.grid_n - 1)
    row = min(int(y / cell), cfg.grid_n - 1)
    return GridCoord(col, row)


def require_speed(level: int) -> int:
    if level not in SPEED_LEVELS:
        raise ValueError(f"speed level must be one of {SPEED_LEVELS}, got {level!r}")
    return level


def speed_to_velocity(level: int, cfg: KinematicConfig) -> float:
    """Linear wheel velocity in mm/s for a speed level (units 10/20/30)."""
    require_speed(level)
    return cfg.velocity_gain * 10.0 * level


@dataclass(frozen=True)
class MotorCommand:
    """Timed wheel command: signed speed units per wheel plus a duration.

    Zero-speed commands are holds (waits). Duration is kept as float
    milliseconds so command chains reproduce their targets exactly.
    """

    left: int
    right: int
    duration_ms: float

    def __post_init__(self) -> None:
        if abs(self.left) > MAX_WHEEL_UNITS or abs(self.right) > MAX_WHEEL_UNITS:
            raise ValueError("wheel speed unit out of range")
        if self.duration_ms <= 0:
            raise ValueError("duration must be positive")

    @property
    def is_hold(self) -> bool:
        return self.left == 0 and self.right == 0


# --- meta-actions ----------------------------------------------------------


@dataclass(frozen=True)
class RotateTo:
    """Spin in place (wheels counter-rotating) until facing a target heading."""

    target_heading: float
    speed: int = 1


@dataclass(frozen=True)
class WheelPivot:
    """Rotate about one wheel by a signed angle; the pivot wheel stays put."""

    pivot: str  # "left" | "right"
    angle: float
    speed: int = 1


@dataclass(frozen=True)
class Translate:
    """Turn toward a continuous target point, then drive straight to it."""

    target: tuple[float, float]
    speed: int = 1


@dataclass(frozen=True)
class PairOrient:
    """Adjust this robot's heading relative to a partner robot.

    The compiled commands cover the first (self) robot only; the partner's
    target heading comes from pair_orient_headings with the roles swapped in.
    """

    mode: str
    partner: str
    speed: int = 1


@dataclass(frozen=True)
class Hold:
    """Stand still for a duration."""

    duration_ms: float


MetaAction = Union[RotateTo, WheelPivot, Translate, PairOrient, Hold]


def pair_orient_headings(
    mode: str, a_xy: tuple[float, float], b_xy: tuple[float, float]
) -> tuple[float, float]:
    """Target headings (deg) for robots A and B under a pair-orientation mode.

    With beta = bearing(A -> B):
      face_to_face:     A faces B, B faces A.
      back_to_back:     both reversed.
      face_to_back:     both face along A -> B (A looks at B's back).
      parallel:         both take the counterclockwise perpendicular beta + 90.
      counter_parallel: A takes beta + 90, B the opposite perpendicular.
    """
    if mode not in PAIR_MODES:
        raise ValueError(f"unknown pair orientation mode {mode!r}")
    beta = bearing(a_xy, b_xy)
    if mode == "face_to_face":
        return beta, normalize_heading(beta + 180.0)
    if mode == "back_to_back":
        return normalize_heading(beta + 180.0), beta
    if mode == "face_to_back":
        return beta, beta
    if mode == "parallel":
        p = normalize_heading(beta + 90.0)
        return p, p
    # counter_parallel
    return normalize_heading(beta + 90.0), normalize_heading(beta - 90.0)


def _rotation_duration_ms(angle_deg: float, radius_mm: float, v_mm_s: float) -> float:
    """Time for the moving wheel(s) to sweep ``angle_deg`` on a circle of ``radius_mm``."""
    arc = abs(math.radians(angle_deg)) * radius_mm
    return arc / v_mm_s * 1000.0


def compile_rotate_angle(
    pose: Pose, angle: float, pivot: str, speed: int, cfg: KinematicConfig
) -> list[MotorCommand]:
    """One wheel command realizing a signed rotation about the center or a wheel.

    ``pivot`` is "center", "left" or "right". Positive angles are
    counterclockwise. Angles beyond +-180 are honored as given (full spins
    are legitimate expressive moves); shortest-arc reduction is the caller's
    business.
    """
    require_speed(speed)
    if pivot not in ("center", "left", "right"):
        raise ValueError(f"unknown pivot {pivot!r}")
    if angle == 0:
        return []
    u = 10 * speed
    v = speed_to_velocity(speed, cfg)
    if pivot == "center":
        duration = _rotation_duration_ms(angle, cfg.track_width_mm / 2.0, v)
        if angle > 0:
            return [MotorCommand(-u, u, duration)]
        return [MotorCommand(u, -u, duration)]
    duration = _rotation_duration_ms(angle, cfg.track_width_mm, v)
    if pivot == "left":
        # left wheel holds; right wheel forward turns CCW
        return [MotorCommand(0, u if angle > 0 else -u, duration)]
    # right wheel holds; left wheel forward turns CW
    return [MotorCommand(-u if angle > 0 else u, 0, duration)]


def compile_action(
    meta: MetaAction,
    pose: Pose,
    cfg: KinematicConfig,
    partner_pose: Optional[Pose] = None,
) -> list[MotorCommand]:
    """Compile a meta-action into timed wheel commands for the robot at ``pose``.

    Rotations pick the shorter arc. A translation is an in-place turn toward
    the target bearing followed by a straight drive; durations come from the
    commanded displacement and the configured wheel velocity. Zero-displacement
    actions compile to an empty list.
    """
    if isinstance(meta, Hold):
        if meta.duration_ms <= 0:
            raise ValueError("hold duration must be positive")
        return [MotorCommand(0, 0, meta.duration_ms)]

    if isinstance(meta, RotateTo):
        delta = angle_diff(normalize_heading(meta.target_heading), pose.heading)
        if delta == 0:
            return []
        return compile_rotate_angle(pose, delta, "center", meta.speed, cfg)

    if isinstance(meta, WheelPivot):
        return compile_rotate_angle(pose, meta.angle, meta.pivot, meta.speed, cfg)

    if isinstance(meta, Translate):
        tx, ty = meta.target
        if not (0 <= tx <= cfg.table_size_mm and 0 <= ty <= cfg.table_size_mm):
            raise BoundsError(f"translate target ({tx:.2f}, {ty:.2f}) outside table")
        dist = math.hypot(tx - pose.x, ty - pose.y)
        if dist == 0:
            return []
        heading = bearing(pose.xy, (tx, ty))
        cmds = compile_action(RotateTo(heading, meta.speed), pose, cfg)
        u = 10 * meta.speed
        v = speed_to_velocity(meta.speed, cfg)
        cmds.append(MotorCommand(u, u, dist / v * 1000.0))
        return cmds

    if isinstance(meta, PairOrient):
        if partner_pose is None:
            raise ValueError("pair orientation requires the partner pose")
        ha, _ = pair_orient_headings(meta.mode, pose.xy, partner_pose.xy)
        return compile_action(RotateTo(ha, meta.speed), pose, cfg)

    raise TypeError(f"unknown meta-action {meta!r}")


def apply(pose: Pose, cmd: MotorCommand, cfg: KinematicConfig) -> Pose:
    """Exact closed-form unicycle update for one wheel command.

    Equal wheels drive a straight line, opposite wheels spin in place, and the
    general case is an arc about the instantaneous center of rotation. Bounds
    are not enforced here; clamping is the simulator's job.
    """
    t = cmd.duration_ms / 1000.0
    vl = cfg.velocity_gain * cmd.left
    vr = cfg.velocity_gain * cmd.right
    v = (vl + vr) / 2.0
    theta = math.radians(pose.heading)
    if cmd.left == cmd.right:
        return Pose(
            pose.x + v * t * math.cos(theta),
            pose.y + v * t * math.sin(theta),
            pose.heading,
        )
    omega = (vr - vl) / cfg.track_width_mm  # rad/s, CCW positive
    theta2 = theta + omega * t
    if v == 0.0:
        return Pose(pose.x, pose.y, math.degrees(theta2))
    r = v / omega
    x = pose.x + r * (math.sin(theta2) - math.sin(theta))
    y = pose.y - r * (math.cos(theta2) - math.cos(theta))
    return Pose(x, y, math.degrees(theta2))


def apply_chain(pose: Pose, cmds: list[MotorCommand], cfg: KinematicConfig) -> Pose:
    for cmd in cmds:
        pose = apply(pose, cmd, cfg)
    return pose


def split_command(cmd: MotorCommand, ms: float) -> tuple[MotorCommand, Optional[MotorCommand]]:
    """Split a command at ``ms``; returns (head, tail-or-None). Exact in duration."""
    if ms >= cmd.duration_ms:
        return cmd, None
    head = MotorCommand(cmd.left, cmd.right, ms)
    tail = MotorCommand(cmd.left, cmd.right, cmd.duration_ms - ms)
    return head, tail
