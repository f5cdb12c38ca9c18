"""Relationship policies: prompt add-ons paired with machine-checkable validators.

Prompt text alone cannot be tested, so every stance ships a deterministic
post-validator that the turn pipeline runs on each generated sequence before
dispatch. Sequences violating a policy are sent back through the repair loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..protocol import ActionSequence

BEHAVIOR_TAGS = (
    "object_actuation",
    "symbol_visualization",
    "non_verbal_expression",
    "scene_interaction",
)

RELATIONSHIP_KINDS = ("apprentice", "opponent", "teammate", "designer")

SPEED_UP_WORDS = ("faster", "speed up", "quicker", "hurry")
SLOW_DOWN_WORDS = ("slower", "slow down", "gentler")


@dataclass
class PolicyContext:
    """What a validator may look at: ownership plus the apprentice dialogue state."""

    ownership: dict[str, str] = field(default_factory=dict)  # robot id -> user|system|idle
    prior: Optional[ActionSequence] = None
    feedback: Optional[str] = None

    def owned_by(self, kind: str) -> set[str]:
        return {rid for rid, owner in self.ownership.items() if owner == kind}


Validator = Callable[[ActionSequence, PolicyContext], list[str]]


@dataclass(frozen=True)
class PolicyPack:
    kind: str
    prompt_assets: tuple[str, ...]
    validators: tuple[Validator, ...]


def _commanded_ids(seq: ActionSequence) -> set[str]:
    ids = set(seq.robot_ids())
    for track in seq.robots:
        for step in track.actions:
            if step.type == "pair_orient" and step.partner:
                ids.add(step.partner)  # the partner rotates too
    return ids


def _no_user_robots(seq: ActionSequence, ctx: PolicyContext) -> list[str]:
    hits = sorted(_commanded_ids(seq) & ctx.owned_by("user"))
    if hits:
        return [f"sequence commands user-owned robot(s) {', '.join(hits)}; "
                "system characters may only drive system-owned gadgets"]
    return []


def _designer_pool(seq: ActionSequence, ctx: PolicyContext) -> list[str]:
    idle = ctx.owned_by("idle")
    minted = sorted(_commanded_ids(seq) & idle)
    unknown = sorted(_commanded_ids(seq) - set(ctx.ownership))
    problems = []
    if unknown:
        problems.append(f"sequence names robots not on the table: {', '.join(unknown)}")
    if minted and len(minted) > len(idle):
        problems.append("more new characters than idle robots available")
    if not idle and any(step for t in seq.robots for step in t.actions) and minted:
        problems.append("idle pool is empty; no robots left to cast")
    return problems


def _translate_speeds(seq: Optional[ActionSequence]) -> list[int]:
    if seq is None:
        return []
    return [s.speed for t in seq.robots for s in t.actions if s.type == "translate"]


def wants_speed_up(feedback: str) -> bool:
    low = feedback.lower()
    return any(w in low for w in SPEED_UP_WORDS)


def wants_slow_down(feedback: str) -> bool:
    low = feedback.lower()
    return any(w in low for w in SLOW_DOWN_WORDS)


def _apprentice_compliance(seq: ActionSequence, ctx: PolicyContext) -> list[str]:
    if ctx.feedback is None or ctx.prior is None:
        return []
    prior = _translate_speeds(ctx.prior)
    new = _translate_speeds(seq)
    if not prior or not new:
        return []
    if wants_speed_up(ctx.feedback):
        if any(s < min(prior) for s in new):
            return ["speed feedback ignored: some moves are slower than before"]
        if max(new) <= max(prior) and max(prior) < 3:
            return ["speed feedback ignored: nothing moves strictly faster"]
    elif wants_slow_down(ctx.feedback):
        if any(s > max(prior) for s in new):
            return ["slow-down feedback ignored: some moves got faster"]
        # min speed is the floor; staying at 1 is compliant
        if min(new) >= min(prior) and min(prior) > 1:
            return ["slow-down feedback ignored: nothing moves strictly slower"]
    return []


_PACKS = {
    "apprentice": PolicyPack("apprentice", ("addon_apprentice",), (_apprentice_compliance,)),
    "opponent": PolicyPack("opponent", ("addon_opponent",), (_no_user_robots,)),
    "teammate": PolicyPack("teammate", ("addon_teammate",), (_no_user_robots,)),
    "designer": PolicyPack("designer", ("addon_designer",), (_designer_pool,)),
}


def policy_pack(kind: str) -> PolicyPack:
    if kind not in _PACKS:
        raise KeyError(f"unknown relationship policy {kind!r}")
    return _PACKS[kind]


def run_policy_validators(
    kinds: tuple[str, ...], seq: ActionSequence, ctx: PolicyContext
) -> list[str]:
    problems: list[str] = []
    for kind in kinds:
        for validator in policy_pack(kind).validators:
            problems.extend(validator(seq, ctx))
    # idle robots may only be commanded when a designer is on duty
    if "designer" not in kinds:
        idle_hits = sorted(_commanded_ids(seq) & ctx.owned_by("idle"))
        if idle_hits and kinds:
            problems.append(
                f"sequence commands idle robot(s) {', '.join(idle_hits)} without a designer policy")
    return problems
