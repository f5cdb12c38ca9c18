"""Multi-robot action sequence format: canonical JSON plus a lenient reader.

The canonical wire form is strict JSON with a fixed key order so sequences can
be golden-tested byte for byte. Planner agents, however, emit dict-literal
blocks embedded in prose (single quotes, trailing commas, bare keys, tuples),
so ``parse_lenient`` extracts and normalizes the last well-formed block from
free text without ever fabricating steps.
"""

from __future__ import annotations

import ast
import json
import logging
import re
from dataclasses import dataclass
from typing import Any, Optional

logger = logging.getLogger(__name__)

STEP_TYPES = ("translate", "rotate", "pair_orient", "wait")
PIVOTS = ("center", "left", "right")
PAIR_MODES = (
    "face_to_face",
    "back_to_back",
    "face_to_back",
    "parallel",
    "counter_parallel",
)


class ParseError(ValueError):
    """Base class for protocol parse failures."""


class ExtractionError(ParseError):
    """No structured block could be located in the text."""


class SchemaError(ParseError):
    """A block was found/parsed but violates the sequence schema."""

    def __init__(self, message: str, path: str = "$", block: Optional[str] = None):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.block = block


class StrictSyntaxError(ParseError):
    """Malformed JSON, with the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class ActionStep:
    """One meta-action of a robot track.

    Exactly the fields demanded by ``type`` are set: translate carries a grid
    target, rotate a signed angle and pivot, pair_orient a mode and partner,
    wait a duration. Speed is present for everything but wait.
    """

    type: str
    target: Optional[tuple[int, int]] = None
    angle: Optional[float] = None
    pivot: Optional[str] = None
    mode: Optional[str] = None
    partner: Optional[str] = None
    duration_ms: Optional[float] = None
    speed: Optional[int] = None

    @staticmethod
    def translate(target: tuple[int, int], speed: int) -> "ActionStep":
        return ActionStep(type="translate", target=(int(target[0]), int(target[1])), speed=speed)

    @staticmethod
    def rotate(angle: float, speed: int, pivot: str = "center") -> "ActionStep":
        return ActionStep(type="rotate", angle=angle, pivot=pivot, speed=speed)

    @staticmethod
    def pair_orient(mode: str, partner: str, speed: int) -> "ActionStep":
        return ActionStep(type="pair_orient", mode=mode, partner=partner, speed=speed)

    @staticmethod
    def wait(duration_ms: float) -> "ActionStep":
        return ActionStep(type="wait", duration_ms=duration_ms)


@dataclass(frozen=True)
class RobotTrack:
    id: str
    actions: tuple[ActionStep, ...] = ()


@dataclass(frozen=True)
class ActionSequence:
    """Plan for several robots: tracks run concurrently unless parallel=False."""

    robots: tuple[RobotTrack, ...] = ()
    parallel: bool = True

    def robot_ids(self) -> list[str]:
        return [t.id for t in self.robots]


@dataclass(frozen=True)
class ControllerOutput:
    """Two-stage planner reply: prose narration plus the structured sequence."""

    narration: str
    sequence: ActionSequence


# --- canonical serialization -------------------------------------------------


def _step_to_obj(step: ActionStep) -> dict:
    obj: dict[str, Any] = {"type": step.type}
    if step.type == "translate":
        obj["target"] = [step.target[0], step.target[1]]
    elif step.type == "rotate":
        obj["angle"] = step.angle
        obj["pivot"] = step.pivot
    elif step.type == "pair_orient":
        obj["mode"] = step.mode
        obj["partner"] = step.partner
    elif step.type == "wait":
        obj["duration_ms"] = step.duration_ms
    if step.type != "wait":
        obj["speed"] = step.speed
    return obj


def to_obj(seq: ActionSequence) -> dict:
    """Plain-dict form of a sequence in canonical key order."""
    return {
        "robots": [
            {"id": t.id, "actions": [_step_to_obj(s) for s in t.actions]}
            for t in seq.robots
        ],
        "parallel": seq.parallel,
    }


def serialize(seq: ActionSequence) -> str:
    """Canonical JSON text: fixed key order, compact separators, no trailing junk."""
    return json.dumps(to_obj(seq), separators=(",", ":"))


# --- normalization / schema --------------------------------------------------

_KNOWN_STEP_KEYS = {
    "translate": {"type", "target", "speed"},
    "rotate": {"type", "angle", "pivot", "speed"},
    "pair_orient": {"type", "mode", "partner", "speed"},
    "wait": {"type", "duration_ms"},
}


def _require(cond: bool, message: str, path: str, block: Optional[str] = None) -> None:
    if not cond:
        raise SchemaError(message, path, block)


def _normalize_step(obj: Any, path: str, block: Optional[str]) -> ActionStep:
    _require(isinstance(obj, dict), f"step must be an object, got {type(obj).__name__}", path, block)
    stype = obj.get("type")
    _require(isinstance(stype, str), "step missing 'type'", path + ".type", block)
    _require(stype in STEP_TYPES, f"unknown step type {stype!r}", path + ".type", block)

    unknown = set(obj) - _KNOWN_STEP_KEYS[stype]
    if unknown:
        logger.warning("ignoring unknown step keys %s at %s", sorted(unknown), path)

    if stype == "wait":
        dur = obj.get("duration_ms")
        _require(isinstance(dur, (int, float)) and not isinstance(dur, bool) and dur > 0,
                 "wait needs a positive duration_ms", path + ".duration_ms", block)
        return ActionStep.wait(float(dur))

    speed = obj.get("speed")
    _require(isinstance(speed, int) and not isinstance(speed, bool),
             "speed must be an integer", path + ".speed", block)
    _require(speed in (1, 2, 3), f"speed {speed} outside 1..3", path + ".speed", block)

    if stype == "translate":
        target = obj.get("target")
        _require(isinstance(target, (list, tuple)) and len(target) == 2,
                 "translate target must be [col, row]", path + ".target", block)
        col, row = target
        ok = all(isinstance(v, (int, float)) and not isinstance(v, bool) and float(v).is_integer()
                 for v in (col, row))
        _require(ok, "target coordinates must be integers", path + ".target", block)
        return ActionStep.translate((int(col), int(row)), speed)

    if stype == "rotate":
        angle = obj.get("angle")
        _require(isinstance(angle, (int, float)) and not isinstance(angle, bool),
                 "rotate needs a numeric angle", path + ".angle", block)
        pivot = obj.get("pivot", "center")
        _require(pivot in PIVOTS, f"unknown pivot {pivot!r}", path + ".pivot", block)
        return ActionStep.rotate(float(angle), speed, pivot)

    # pair_orient
    mode = obj.get("mode")
    _require(mode in PAIR_MODES, f"unknown pair mode {mode!r}", path + ".mode", block)
    partner = obj.get("partner")
    _require(isinstance(partner, str) and partner != "", "pair_orient needs a partner id",
             path + ".partner", block)
    return ActionStep.pair_orient(mode, partner, speed)


def normalize_sequence(obj: Any, block: Optional[str] = None) -> ActionSequence:
    """Validate a plain dict against the sequence schema and build the value type."""
    _require(isinstance(obj, dict), "sequence must be an object", "$", block)
    robots = obj.get("robots")
    _require(isinstance(robots, (list, tuple)), "'robots' must be a list", "$.robots", block)
    parallel = obj.get("parallel", True)
    _require(isinstance(parallel, bool), "'parallel' must be a boolean", "$.parallel", block)

    tracks: list[RobotTrack] = []
    seen: set[str] = set()
    for i, entry in enumerate(robots):
        path = f"$.robots[{i}]"
        _require(isinstance(entry, dict), "robot entry must be an object", path, block)
        rid = entry.get("id")
        _require(isinstance(rid, str) and rid != "", "robot entry needs an 'id'", path + ".id", block)
        _require(rid not in seen, f"duplicate robot id {rid!r}", path + ".id", block)
        seen.add(rid)
        actions = entry.get("actions")
        _require(isinstance(actions, (list, tuple)), "'actions' must be a list", path + ".actions", block)
        steps = tuple(
            _normalize_step(a, f"{path}.actions[{j}]", block) for j, a in enumerate(actions)
        )
        tracks.append(RobotTrack(id=rid, actions=steps))
    return ActionSequence(robots=tuple(tracks), parallel=parallel)


def parse_strict(text: str) -> ActionSequence:
    """Inverse of ``serialize``: canonical JSON in, sequence out."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise StrictSyntaxError(e.msg, e.pos) from e
    return normalize_sequence(obj)


# --- lenient extraction -------------------------------------------------------

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*[ \t]*\n(.*?)```", re.DOTALL)
_BARE_KEY_RE = re.compile(r"([{,]\s*)([A-Za-z_][A-Za-z0-9_]*)(\s*:)")
_JSON_WORDS = ((re.compile(r"\btrue\b"), "True"),
               (re.compile(r"\bfalse\b"), "False"),
               (re.compile(r"\bnull\b"), "None"))


def _try_read_dict(text: str) -> Optional[dict]:
    """Parse one candidate block as a dict, tolerating dict-literal syntax."""
    text = text.strip()
    if not text.startswith("{"):
        return None
    try:
        obj = json.loads(text)
        return obj if isinstance(obj, dict) else None
    except json.JSONDecodeError:
        pass
    for candidate in (text, _BARE_KEY_RE.sub(r'\1"\2"\3', text)):
        fixed = candidate
        for pattern, repl in _JSON_WORDS:
            fixed = pattern.sub(repl, fixed)
        try:
            obj = ast.literal_eval(fixed)
        except (ValueError, SyntaxError):
            continue
        if isinstance(obj, dict):
            return _tuples_to_lists(obj)
    return None


def _tuples_to_lists(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_tuples_to_lists(v) for v in value]
    if isinstance(value, list):
        return [_tuples_to_lists(v) for v in value]
    if isinstance(value, dict):
        return {k: _tuples_to_lists(v) for k, v in value.items()}
    return value


def _balanced_spans(text: str) -> list[tuple[int, int]]:
    """Spans of top-level brace-balanced regions, quote-aware."""
    spans = []
    depth = 0
    start = -1
    quote: Optional[str] = None
    i = 0
    while i < len(text):
        ch = text[i]
        if quote is not None:
            if ch == "\\":
                i += 2
                continue
            if ch == quote:
                quote = None
        elif depth > 0 and ch in "\"'":
            # quotes only matter inside a block; prose apostrophes are not strings
            quote = ch
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}":
            if depth > 0:
                depth -= 1
                if depth == 0:
                    spans.append((start, i + 1))
        i += 1
    return spans


def extract_block(text: str) -> tuple[str, dict, str]:
    """Locate the last well-formed dict-literal block in free text.

    Fenced code blocks are preferred; otherwise the whole text is scanned for
    brace-balanced regions. Returns (narration, parsed dict, raw block text)
    where narration is everything before the winning block.

    Raises ExtractionError when nothing parseable exists.
    """
    candidates: list[tuple[int, str]] = []
    for m in _FENCE_RE.finditer(text):
        candidates.append((m.start(), m.group(1)))
    if candidates:
        for start, body in reversed(candidates):
            for span in reversed(_balanced_spans(body)):
                obj = _try_read_dict(body[span[0]:span[1]])
                if obj is not None:
                    return text[:start].strip(), obj, body[span[0]:span[1]]
    for span in reversed(_balanced_spans(text)):
        raw = text[span[0]:span[1]]
        obj = _try_read_dict(raw)
        if obj is not None:
            return text[:span[0]].strip(), obj, raw
    raise ExtractionError("no structured block found in text")


def parse_lenient(model_text: str) -> ControllerOutput:
    """Split planner prose into narration and a validated action sequence.

    The last well-formed dict block wins (narration earlier in the reply may
    itself contain stray braces). Tolerated deviations from canonical JSON:
    single quotes, trailing commas, unquoted identifier keys, tuples for
    coordinate pairs, Python-style booleans, surrounding prose and code
    fences. Steps are never invented: everything comes from entries present
    in the block.
    """
    narration, obj, raw = extract_block(model_text)
    sequence = normalize_sequence(obj, block=raw)
    return ControllerOutput(narration=narration, sequence=sequence)


def corpus_dir():
    """Directory of (messy, canonical) reply pairs shipped with the package."""
    from importlib import resources

    return resources.files("swarmtable.assets").joinpath("parser_corpus")


def corpus_pairs() -> list[tuple[str, str]]:
    """All corpus pairs as (messy text, canonical JSON), sorted by name."""
    root = corpus_dir()
    pairs = []
    for item in sorted(root.iterdir(), key=lambda p: p.name):
        if item.name.endswith(".messy.txt"):
            canonical = root.joinpath(item.name.replace(".messy.txt", ".canonical.json"))
            pairs.append((item.read_text(), canonical.read_text()))
    return pairs


def format_counterexample() -> tuple[str, str]:
    """One (messy, canonical) pair, for few-shot format repair prompts."""
    return corpus_pairs()[0]
