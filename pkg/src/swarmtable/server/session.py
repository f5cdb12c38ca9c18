"""Game sessions: the full command pipeline over one world.

A session owns its world, transcript, gateway and stream. Turns are
synchronous: the referee rules, the planner produces a validated sequence,
the driver dispatches it, and the world runs to quiescence before the turn
result returns. All timestamps are simulation clock, so a rerun of the same
scenario and script is byte-identical.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from ..agents.engine import (
    AgentFormatError,
    AgentSession,
    ControllerFailure,
    Transcript,
    apprentice_feedback,
    controller_turn,
    coordinator_turn,
    dispatched_entry,
)
from ..agents.gateway import GatewayConfig, MockGateway, build_gateway
from ..behaviors.policies import wants_slow_down, wants_speed_up
from ..geometry import Pose
from ..protocol import ActionSequence, serialize
from ..world import QueuedCommand, World, compile_tracks
from .scenario import Scenario, ScenarioError


class PhaseError(RuntimeError):
    """Command submitted outside the running phase."""


class SimPoseProvider:
    """Poses straight from the simulator, stamped with the world clock."""

    source = "simulator"

    def __init__(self, world: World):
        self.world = world

    def poses(self) -> dict[str, Pose]:
        return self.world.poses()

    def stamp(self) -> float:
        return self.world.clock_ms


class ExternalPoseProvider:
    """Pose injection endpoint stand-in for an overhead tracking pipeline."""

    source = "external"

    def __init__(self, world: World):
        self.world = world
        self._poses: dict[str, Pose] = world.poses()
        self._stamp: float = world.clock_ms

    def update(self, poses: dict[str, Pose], stamp: float) -> None:
        limit = self.world.cfg.table_size_mm
        for rid, pose in poses.items():
            if not (0 <= pose.x <= limit and 0 <= pose.y <= limit):
                raise ValueError(f"injected pose for {rid!r} outside the table")
            self._poses[rid] = pose
        self._stamp = stamp

    def poses(self) -> dict[str, Pose]:
        return dict(self._poses)

    def stamp(self) -> float:
        return self._stamp


class SimDriver:
    """Feeds compiled wheel commands straight into the simulation."""

    def __init__(self, world: World):
        self.world = world

    def send(self, queues: dict[str, list[QueuedCommand]]) -> None:
        for rid, cmds in queues.items():
            for qc in cmds:
                self.world.robots[rid].enqueue(qc.cmd, qc.step_idx)


class LogDriver:
    """Hardware stand-in: logs intended wheel commands instead of driving motors."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text("")

    def send(self, queues: dict[str, list[QueuedCommand]]) -> None:
        with open(self.path, "a", encoding="utf-8") as f:
            for rid, cmds in queues.items():
                for qc in cmds:
                    f.write(json.dumps({
                        "robot": rid, "left": qc.cmd.left, "right": qc.cmd.right,
                        "duration_ms": qc.cmd.duration_ms, "step": qc.step_idx,
                    }) + "\n")
            f.flush()


@dataclass
class TurnResult:
    ok: bool
    ruling: str = ""
    directives: list[dict] = field(default_factory=list)
    dispatched: list[str] = field(default_factory=list)  # canonical sequence JSON
    events: list[dict] = field(default_factory=list)
    elapsed_ms: float = 0.0
    repairs: int = 0
    fallback: bool = False
    game_over: bool = False
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok, "ruling": self.ruling, "directives": self.directives,
            "dispatched": self.dispatched, "events": self.events,
            "elapsed_ms": self.elapsed_ms, "repairs": self.repairs,
            "fallback": self.fallback, "game_over": self.game_over, "error": self.error,
        }


class GameSession:
    """One running game: world + agents + stream, with a strictly serial pipeline."""

    def __init__(
        self,
        scenario: Scenario,
        transcript_path: Optional[str | Path] = None,
        gateway: Optional[Any] = None,
        gateway_config: Optional[GatewayConfig] = None,
        extra_driver: Optional[Any] = None,
        tick_ms: float = 20.0,
    ):
        problems = scenario.problems()
        if problems:
            raise ScenarioError(problems)
        self.id = uuid.uuid4().hex[:12]
        self.scenario = scenario
        self.phase = "lobby"
        self.tick_ms = tick_ms
        self.world = scenario.build_world()
        self._lock = threading.Lock()

        self._transcript_file = None
        if transcript_path is not None:
            Path(transcript_path).parent.mkdir(parents=True, exist_ok=True)
            self._transcript_file = open(transcript_path, "w", encoding="utf-8")
        self._stream: list[dict] = []
        self._seq = 0

        transcript = Transcript(sink=self._transcript_sink)

        if gateway is None:
            if gateway_config is not None:
                gateway = build_gateway(gateway_config, base_dir=scenario.base_dir)
            else:
                script = scenario.mock_script_path()
                if script is None:
                    raise ScenarioError(["scenario has no mock script and no gateway was supplied"])
                gateway = MockGateway.from_file(script)
        self.gateway = gateway

        if scenario.pose_source == "external":
            self.pose_provider: Any = ExternalPoseProvider(self.world)
        else:
            self.pose_provider = SimPoseProvider(self.world)

        self.driver = SimDriver(self.world)
        self.extra_driver = extra_driver

        self.agents = AgentSession(
            world=self.world,
            gateway=gateway,
            rules_text=scenario.rules_text,
            board_mapping=scenario.board_mapping,
            ownership=dict(scenario.robot_ownership),
            behaviors=scenario.behaviors,
            relationships=scenario.relationships,
            transcript=transcript,
            pose_provider=self.pose_provider.poses,
        )

    # --- stream plumbing -----------------------------------------------------

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _transcript_sink(self, entry: dict) -> None:
        if self._transcript_file is not None:
            self._transcript_file.write(json.dumps(entry, separators=(",", ":")) + "\n")
            self._transcript_file.flush()
        self._stream.append({"v": 1, "kind": "transcript", "seq": self._next_seq(),
                             "entry": entry})

    def _publish_snapshot(self, world: Optional[World] = None) -> None:
        snap = (world or self.world).snapshot()
        self._stream.append({"v": 1, "kind": "snapshot", "seq": self._next_seq(),
                             "state": snap})

    def stream_since(self, after_seq: int) -> list[dict]:
        """Messages with seq greater than ``after_seq`` (monotone, never reordered)."""
        return [m for m in self._stream if m["seq"] > after_seq]

    def heartbeat(self) -> dict:
        # reads the counter without consuming it: heartbeats are liveness,
        # not state, and must not perturb subscribers' snapshot ordering
        return {"v": 1, "kind": "heartbeat", "seq": self._seq,
                "clock_ms": self.world.clock_ms}

    # --- lifecycle --------------------------------------------------------------

    def start(self) -> TurnResult:
        """Run the referee's initialization turn and enter the running phase."""
        if self.phase != "lobby":
            raise PhaseError(f"session already {self.phase}")
        try:
            out = coordinator_turn(self.agents, None)
        except AgentFormatError as e:
            self.phase = "ended"
            return TurnResult(ok=False, error=str(e))
        self.phase = "running"
        self._publish_snapshot()
        return TurnResult(ok=True, ruling=out.ruling,
                          directives=[d.to_dict() for d in out.directives])

    def transcript_entries(self) -> list[dict]:
        return [e.to_dict() for e in self.agents.transcript.entries]

    def snapshot(self) -> dict:
        return self.world.snapshot()

    def close(self) -> None:
        if self._transcript_file is not None:
            self._transcript_file.close()
            self._transcript_file = None

    # --- the turn pipeline ----------------------------------------------------------

    def submit_command(self, text: str) -> TurnResult:
        """Referee, plan, validate, dispatch, and run the table to quiescence."""
        with self._lock:
            if self.phase != "running":
                raise PhaseError(f"session is {self.phase}, not running")
            try:
                ruling = coordinator_turn(self.agents, text)
            except AgentFormatError as e:
                return TurnResult(ok=False, error=str(e))

            result = TurnResult(ok=True, ruling=ruling.ruling,
                                directives=[d.to_dict() for d in ruling.directives],
                                game_over=ruling.game_over)

            feedback_turn = (
                "apprentice" in self.agents.relationships
                and self.agents.last_sequence is not None
                and (wants_speed_up(text) or wants_slow_down(text))
            )
            if ruling.directives or feedback_turn:
                try:
                    if feedback_turn:
                        ctrl = apprentice_feedback(self.agents, self.agents.last_sequence, text)
                    else:
                        ctrl = controller_turn(self.agents, ruling.directives)
                except (ControllerFailure, AgentFormatError, ValueError) as e:
                    result.ok = False
                    result.error = str(e)
                else:
                    result.repairs = ctrl.repairs
                    result.fallback = ctrl.fallback
                    self._dispatch(ctrl.output.sequence, result)

            if ruling.game_over:
                self.phase = "ended"
            return result

    def _dispatch(self, seq: ActionSequence, result: TurnResult) -> None:
        self._register_npcs(seq)
        queues = compile_tracks(self.world, seq)
        dispatched_entry(self.agents, seq)
        result.dispatched.append(serialize(seq))
        self.driver.send(queues)
        if self.extra_driver is not None:
            self.extra_driver.send(queues)
        started = self.world.clock_ms
        events = self.world.run_until_quiescent(
            tick_ms=self.tick_ms, on_tick=self._publish_snapshot)
        for event in events:
            self.agents.transcript.append("system", "event", event, self.world.clock_ms)
        result.events.extend(events)
        result.elapsed_ms += self.world.clock_ms - started
        self._publish_snapshot()

    def _register_npcs(self, seq: ActionSequence) -> None:
        """Under a designer policy, commanding an idle robot casts it as an NPC."""
        if "designer" not in self.agents.relationships:
            return
        commanded = set(seq.robot_ids())
        for track in seq.robots:
            for step in track.actions:
                if step.type == "pair_orient" and step.partner:
                    commanded.add(step.partner)
        for rid in sorted(commanded):
            if self.agents.ownership.get(rid) == "idle":
                self.agents.ownership[rid] = "system"
                self.agents.transcript.append(
                    "system", "register", {"robot": rid, "owner": "system"},
                    self.world.clock_ms)


def replay_transcript(scenario: Scenario, transcript_lines: list[dict],
                      tick_ms: float = 20.0) -> World:
    """Re-execute a transcript's dispatched sequences on a fresh world.

    Gateways are not consulted: the dispatch entries already carry the exact
    sequences, so the final world state is reproducible from the log alone.
    """
    from ..protocol import normalize_sequence

    world = scenario.build_world()
    for entry in transcript_lines:
        if entry.get("kind") != "dispatch":
            continue
        seq = normalize_sequence(entry["payload"])
        queues = compile_tracks(world, seq)
        for rid, cmds in queues.items():
            for qc in cmds:
                world.robots[rid].enqueue(qc.cmd, qc.step_idx)
        world.run_until_quiescent(tick_ms=tick_ms)
    return world
