"""Session server: scenarios, the turn pipeline, artifacts, HTTP/WS API."""

from .artifacts import trails_svg, write_run_artifacts, write_world_json
from .scenario import Scenario, ScenarioError, bundled_path, list_bundled, load_bundled
from .session import (
    ExternalPoseProvider,
    GameSession,
    LogDriver,
    PhaseError,
    SimDriver,
    SimPoseProvider,
    TurnResult,
    replay_transcript,
)

__all__ = [
    "trails_svg",
    "write_run_artifacts",
    "write_world_json",
    "Scenario",
    "ScenarioError",
    "bundled_path",
    "list_bundled",
    "load_bundled",
    "ExternalPoseProvider",
    "GameSession",
    "LogDriver",
    "PhaseError",
    "SimDriver",
    "SimPoseProvider",
    "TurnResult",
    "replay_transcript",
]
