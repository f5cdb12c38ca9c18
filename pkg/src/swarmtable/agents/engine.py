"""Two-agent turn pipeline: referee (coordinator) and motion planner (controller).

The coordinator rules on the player's command at the game level and emits
per-gadget directives; the controller turns directives into an action
sequence, which is validated against the world and the active relationship
policies before anyone is allowed to dispatch it. Invalid sequences are sent
back with the validation report for a bounded number of repairs; navigable
point-to-point directives fall back to the deterministic planner when the
model keeps failing.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..behaviors.policies import PolicyContext, run_policy_validators
from ..geometry import GridCoord, Pose
from ..planning import plan_path, waypoints
from ..protocol import (
    ActionSequence,
    ActionStep,
    ControllerOutput,
    ParseError,
    RobotTrack,
    extract_block,
    format_counterexample,
    parse_lenient,
    serialize,
)
from ..world import World, validate_sequence
from .prompts import compose_prompts

REPAIR_BUDGET = 2          # controller re-prompts after the first attempt
COORDINATOR_RETRIES = 1    # format-reminder re-prompts

_POINT_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


class AgentFormatError(Exception):
    """Agent output stayed unparseable after the format reminder."""

    def __init__(self, role: str, raw: str):
        super().__init__(f"{role} reply had no parseable block after re-prompt")
        self.role = role
        self.raw = raw


class ControllerFailure(Exception):
    """Repair budget exhausted on a directive the planner cannot take over."""

    def __init__(self, problems: list[str]):
        super().__init__("controller failed: " + "; ".join(problems))
        self.problems = problems


@dataclass
class TranscriptEntry:
    turn: int
    actor: str    # user | coordinator | controller | system
    kind: str     # command | ruling | agent_reply | dispatch | event | failure | register
    payload: Any  # text or a JSON-able dict
    ts: float     # simulation clock, ms

    def to_dict(self) -> dict:
        return {"turn": self.turn, "actor": self.actor, "kind": self.kind,
                "payload": self.payload, "ts": self.ts}


class Transcript:
    """Append-only turn log; the sink (if any) is flushed per entry."""

    def __init__(self, sink: Optional[Callable[[dict], None]] = None):
        self.entries: list[TranscriptEntry] = []
        self._sink = sink

    def append(self, actor: str, kind: str, payload: Any, ts: float) -> TranscriptEntry:
        entry = TranscriptEntry(len(self.entries), actor, kind, payload, ts)
        self.entries.append(entry)
        if self._sink is not None:
            self._sink(entry.to_dict())
        return entry


@dataclass
class Directive:
    gadget: str
    directive: str

    def to_dict(self) -> dict:
        return {"gadget": self.gadget, "directive": self.directive}


@dataclass
class CoordinatorOutput:
    ruling: str
    directives: list[Directive]
    game_over: bool = False


@dataclass
class ControllerResult:
    output: ControllerOutput
    repairs: int = 0
    fallback: bool = False


@dataclass
class AgentSession:
    """Everything the two agents share for one game."""

    world: World
    gateway: Any
    rules_text: str
    board_mapping: dict[str, list[int]] = field(default_factory=dict)
    ownership: dict[str, str] = field(default_factory=dict)
    behaviors: tuple[str, ...] = ()
    relationships: tuple[str, ...] = ()
    transcript: Transcript = field(default_factory=Transcript)
    pose_provider: Optional[Callable[[], dict[str, Pose]]] = None
    last_sequence: Optional[ActionSequence] = None

    @property
    def grid_n(self) -> int:
        return self.world.cfg.grid_n

    @property
    def addons(self) -> tuple[str, ...]:
        return tuple(self.behaviors) + tuple(self.relationships)

    def clock(self) -> float:
        return self.world.clock_ms

    def current_poses(self) -> dict[str, Pose]:
        if self.pose_provider is not None:
            return self.pose_provider()
        return self.world.poses()

    def game_context(self, limit: int = 20) -> list[tuple[str, str]]:
        """Game-level transcript tail: player commands and referee rulings only."""
        rows = [(e.actor, e.payload) for e in self.transcript.entries
                if e.kind in ("command", "ruling") and isinstance(e.payload, str)]
        return rows[-limit:]

    def policy_context(self, prior: Optional[ActionSequence] = None,
                       feedback: Optional[str] = None) -> PolicyContext:
        return PolicyContext(ownership=dict(self.ownership), prior=prior, feedback=feedback)


# --- coordinator -------------------------------------------------------------


def _parse_coordinator_reply(text: str) -> CoordinatorOutput:
    ruling, obj, _ = extract_block(text)
    raw_directives = obj.get("directives", [])
    if not isinstance(raw_directives, list):
        raise ParseError("'directives' must be a list")
    directives = []
    for item in raw_directives:
        if not isinstance(item, dict):
            raise ParseError("directive entries must be objects")
        gadget = item.get("gadget") or item.get("id") or item.get("robot")
        text_part = item.get("directive") or item.get("text") or ""
        if not gadget or not text_part:
            raise ParseError("directive needs 'gadget' and 'directive'")
        directives.append(Directive(str(gadget), str(text_part)))
    game_over = bool(obj.get("game_over", False))
    return CoordinatorOutput(ruling=ruling, directives=directives, game_over=game_over)


def coordinator_turn(session: AgentSession, user_command: Optional[str]) -> CoordinatorOutput:
    """Run the referee on a player command (or on game start when None).

    The raw reply lands in the transcript for every gateway call. One format
    reminder is allowed; after that the failure is surfaced to the caller.
    """
    bundle = compose_prompts("coordinator", session, ())
    if user_command is None:
        bundle.context.append(("system", "Initialize the game from the rules above."))
    else:
        session.transcript.append("user", "command", user_command, session.clock())
        bundle.context.append(("user", user_command))

    last_text = ""
    for attempt in range(1 + COORDINATOR_RETRIES):
        text = session.gateway.chat(bundle)
        session.transcript.append("coordinator", "ruling", text, session.clock())
        last_text = text
        try:
            return _parse_coordinator_reply(text)
        except ParseError:
            if attempt < COORDINATOR_RETRIES:
                bundle.context.append((
                    "system",
                    "Your reply was missing the JSON block. Repeat the ruling and end "
                    "with one fenced JSON object holding 'directives' and 'game_over'."))
    raise AgentFormatError("coordinator", last_text)


# --- controller ----------------------------------------------------------------


def _directives_text(directives: list[Directive]) -> str:
    lines = [f"- {d.gadget}: {d.directive}" for d in directives]
    return "Directives from the coordinator:\n" + "\n".join(lines)


def _occupancy_note(session: AgentSession) -> Optional[str]:
    if "scene_interaction" not in session.behaviors:
        return None
    occ = session.world.occupancy()
    if not occ.occupied:
        return None
    cells = ", ".join(f"({c}, {r})" for c, r in sorted(occ.occupied))
    return f"Occupied cells on the table: {cells}."


def resolve_point_move(session: AgentSession, directive: Directive) -> Optional[tuple[str, GridCoord]]:
    """Read a point-to-point move out of a directive, if there is one.

    A directive qualifies when its gadget names a robot on the table and the
    text ends with a destination: either a named cell from the board mapping
    or an explicit (col, row) pair. The last position reference wins.
    """
    rid = directive.gadget
    if rid not in session.world.robots:
        return None
    dest: Optional[GridCoord] = None
    dest_at = -1
    for m in _POINT_RE.finditer(directive.directive):
        col, row = int(m.group(1)), int(m.group(2))
        if 0 <= col < session.grid_n and 0 <= row < session.grid_n:
            dest = GridCoord(col, row)
            dest_at = m.start()
    for name, cell in session.board_mapping.items():
        for m in re.finditer(rf"\b{re.escape(name)}\b", directive.directive):
            if m.start() > dest_at:
                dest = GridCoord(int(cell[0]), int(cell[1]))
                dest_at = m.start()
    if dest is None:
        return None
    return rid, dest


def _planner_fallback(session: AgentSession, directives: list[Directive]) -> Optional[ActionSequence]:
    """Deterministic route for point moves when the model keeps failing."""
    tracks = []
    for directive in directives:
        resolved = resolve_point_move(session, directive)
        if resolved is None:
            return None
        rid, dest = resolved
        occupied = set(session.world.occupancy(exclude=(rid,)).occupied)
        start = session.world.robot_cell(rid)
        if (dest.col, dest.row) in occupied:
            return None
        path = plan_path(occupied, start, dest, session.grid_n)
        if not path:
            return None
        steps = tuple(ActionStep.translate((w.col, w.row), 2) for w in waypoints(path))
        tracks.append(RobotTrack(rid, steps))
    if not tracks:
        return None
    return ActionSequence(robots=tuple(tracks))


def _check_sequence(session: AgentSession, seq: ActionSequence,
                    ctx: PolicyContext) -> list[str]:
    problems: list[str] = []
    report = validate_sequence(session.world, seq)
    if not report.ok:
        problems.extend(f"{v.kind}: {v.detail}" for v in report.violations)
    problems.extend(run_policy_validators(session.relationships, seq, ctx))
    return problems


def controller_turn(
    session: AgentSession,
    directives: list[Directive],
    poses: Optional[dict[str, Pose]] = None,
    prior: Optional[ActionSequence] = None,
    feedback: Optional[str] = None,
) -> ControllerResult:
    """Plan motion for the directives, with validation, repairs, and fallback.

    Every accepted sequence has passed world validation plus the active policy
    validators. The gateway is consulted at most 1 + REPAIR_BUDGET times.
    """
    poses = poses if poses is not None else session.current_poses()
    missing = [d.gadget for d in directives
               if d.gadget in session.world.robots and d.gadget not in poses]
    if missing:
        raise ValueError(f"poses missing for directive targets: {missing}")

    bundle = compose_prompts("controller", session, session.addons)
    bundle.context.append(("coordinator", _directives_text(directives)))
    note = _occupancy_note(session)
    if note:
        bundle.context.append(("system", note))
    if prior is not None and feedback is not None:
        bundle.context.append((
            "system",
            f"Previous plan: {serialize(prior)}\nPlayer feedback: {feedback!r}. "
            "Adjust the plan to honor the feedback."))
    ctx = session.policy_context(prior=prior, feedback=feedback)

    problems: list[str] = []
    for attempt in range(1 + REPAIR_BUDGET):
        text = session.gateway.chat(bundle)
        session.transcript.append("controller", "agent_reply", text, session.clock())
        parse_failed = False
        try:
            output = parse_lenient(text)
        except ParseError as e:
            problems = [f"unparseable reply: {e}"]
            parse_failed = True
        else:
            problems = _check_sequence(session, output.sequence, ctx)
            if not problems:
                return ControllerResult(output=output, repairs=attempt)
        if attempt < REPAIR_BUDGET:
            reminder = ("That sequence was rejected:\n- " + "\n- ".join(problems) +
                        "\nReply again with the corrected two-stage answer.")
            if parse_failed:
                # few-shot counterexample from the shipped corpus
                messy, canonical = format_counterexample()
                reminder += ("\nA reply like this parses correctly:\n" + messy.strip() +
                             "\nwhich normalizes to:\n" + canonical.strip())
            bundle.context.append(("system", reminder))

    fallback = _planner_fallback(session, directives)
    if fallback is not None:
        fb_problems = _check_sequence(session, fallback, ctx)
        if not fb_problems:
            narration = "Planner fallback: routing each gadget along a clear shortest path."
            return ControllerResult(
                output=ControllerOutput(narration=narration, sequence=fallback),
                repairs=REPAIR_BUDGET, fallback=True)
        problems.extend(fb_problems)
    session.transcript.append("system", "failure",
                              {"problems": problems}, session.clock())
    raise ControllerFailure(problems)


def apprentice_feedback(session: AgentSession, prior: ActionSequence,
                        feedback: str) -> ControllerResult:
    """Re-plan the previous sequence under player guidance.

    Requires the apprentice policy and a non-empty prior plan. Speed feedback
    is post-validated by the apprentice compliance check inside the loop.
    """
    if "apprentice" not in session.relationships:
        raise ValueError("apprentice feedback requires the apprentice policy")
    if prior is None or not prior.robots:
        raise ValueError("no prior sequence to adjust")
    directive = Directive(
        gadget=prior.robots[0].id,
        directive=f"Adjust the previous plan per player feedback: {feedback}")
    return controller_turn(session, [directive], prior=prior, feedback=feedback)


def dispatched_entry(session: AgentSession, seq: ActionSequence) -> None:
    """Record a dispatched sequence exactly once, in canonical form."""
    session.transcript.append("system", "dispatch",
                              json.loads(serialize(seq)), session.clock())
    session.last_sequence = seq
