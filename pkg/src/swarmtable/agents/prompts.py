"""Prompt assembly: role bases, add-on exemplar packs, and live turn context.

All prompt text lives in plain-text asset files so wording changes never touch
code. Add-on files interleave free text with exemplar pairs delimited by
``=== EXAMPLE INPUT ===`` / ``=== EXAMPLE OUTPUT ===`` markers.

Robot poses are turned into text in exactly one place (``render_pose``); the
referee role never goes anywhere near it, which is what keeps the coordinator
verifiably free of physical state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from ..behaviors.policies import BEHAVIOR_TAGS, RELATIONSHIP_KINDS, policy_pack
from ..geometry import Pose

_BEHAVIOR_ASSETS = {tag: f"addon_{tag}" for tag in BEHAVIOR_TAGS}


class CompositionError(ValueError):
    """An add-on was requested for a role that cannot carry it."""


@dataclass
class PromptBundle:
    """Everything one agent call sees: system text, exemplars, live context."""

    role: str  # "coordinator" | "controller"
    system: str
    exemplars: list[tuple[str, str]] = field(default_factory=list)
    context: list[tuple[str, str]] = field(default_factory=list)  # (actor, text)
    addons: tuple[str, ...] = ()

    def render_text(self) -> str:
        """Deterministic flat text of the full bundle (recorded by the mock)."""
        parts = [f"[system]\n{self.system}"]
        for i, (given, expected) in enumerate(self.exemplars):
            parts.append(f"[example {i} input]\n{given}")
            parts.append(f"[example {i} output]\n{expected}")
        for actor, text in self.context:
            parts.append(f"[{actor}]\n{text}")
        return "\n\n".join(parts)

    def as_messages(self) -> list[dict]:
        """Chat-completion message list for the live backend."""
        system = self.system
        if self.exemplars:
            blocks = []
            for given, expected in self.exemplars:
                blocks.append(f"Example input:\n{given}\nExample output:\n{expected}")
            system = system + "\n\n" + "\n\n".join(blocks)
        messages = [{"role": "system", "content": system}]
        for actor, text in self.context:
            role = "assistant" if actor in ("coordinator", "controller") else "user"
            messages.append({"role": role, "content": f"[{actor}] {text}"})
        return messages


def _render(template: str, mapping: dict[str, str]) -> str:
    for key, value in mapping.items():
        template = template.replace(f"[[{key}]]", value)
    return template


def _read_asset(name: str) -> str:
    return resources.files("swarmtable.assets.prompts").joinpath(f"{name}.txt").read_text()


def load_prompt_asset(name: str) -> tuple[str, list[tuple[str, str]]]:
    """Asset text split into prose and its exemplar (input, output) pairs."""
    raw = _read_asset(name)
    chunks = raw.split("=== EXAMPLE INPUT ===")
    prose = chunks[0].strip()
    exemplars = []
    for chunk in chunks[1:]:
        if "=== EXAMPLE OUTPUT ===" not in chunk:
            raise ValueError(f"asset {name!r} has an input without an output")
        given, expected = chunk.split("=== EXAMPLE OUTPUT ===", 1)
        exemplars.append((given.strip(), expected.strip()))
    return prose, exemplars


def render_pose(rid: str, pose: Pose) -> str:
    """The one and only serialization of a robot pose into prompt text."""
    return f"{rid}: pose_mm=({pose.x:.2f}, {pose.y:.2f}, heading={pose.heading:.1f})"


def render_board_note(board_mapping: Optional[dict[str, list[int]]]) -> str:
    if not board_mapping:
        return ""
    cells = ", ".join(f"{name}=({c[0]}, {c[1]})" for name, c in board_mapping.items())
    return f"Named cells on the map: {cells}."


def compose_prompts(role: str, session, addons: tuple[str, ...]) -> PromptBundle:
    """Assemble the bundle for one agent role with its add-on packs.

    The coordinator gets the rules, the map settings and the game-level
    transcript, never poses. The controller gets the meta-action contract,
    one exemplar block per add-on (behaviors first, then relationships, in
    declaration order) and the current robot poses.
    """
    for addon in addons:
        if addon not in BEHAVIOR_TAGS and addon not in RELATIONSHIP_KINDS:
            raise CompositionError(f"unknown add-on {addon!r}")
    if role == "coordinator":
        if addons:
            kind = "relationship" if any(a in RELATIONSHIP_KINDS for a in addons) else "behavior"
            raise CompositionError(
                f"{kind} add-ons attach to the controller, not the coordinator")
        system = _render(_read_asset("coordinator_base"), {
            "GRID_N": str(session.grid_n),
            "RULES": session.rules_text,
            "BOARD_NOTE": render_board_note(session.board_mapping),
        })
        bundle = PromptBundle(role="coordinator", system=system)
        for actor, text in session.game_context():
            bundle.context.append((actor, text))
        return bundle

    if role != "controller":
        raise ValueError(f"unknown agent role {role!r}")

    system = _render(_read_asset("controller_base"), {
        "GRID_N": str(session.grid_n),
        "GRID_MAX": str(session.grid_n - 1),
    })
    ordered = [a for a in BEHAVIOR_TAGS if a in addons] + \
              [a for a in RELATIONSHIP_KINDS if a in addons]
    bundle = PromptBundle(role="controller", system=system, addons=tuple(ordered))
    for addon in ordered:
        asset = _BEHAVIOR_ASSETS.get(addon) or policy_pack(addon).prompt_assets[0]
        prose, exemplars = load_prompt_asset(asset)
        bundle.system += f"\n\n{prose}"
        bundle.exemplars.extend(exemplars)

    poses = session.current_poses()
    pose_lines = "\n".join(render_pose(rid, p) for rid, p in poses.items())
    board = render_board_note(session.board_mapping)
    if board:
        pose_lines = board + "\n" + pose_lines
    bundle.context.append(("system", f"Current robot poses:\n{pose_lines}"))
    return bundle
