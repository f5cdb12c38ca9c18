"""Two-agent orchestration: prompt assembly, gateway, and turn pipeline."""

from .engine import (
    AgentFormatError,
    AgentSession,
    ControllerFailure,
    ControllerResult,
    CoordinatorOutput,
    Directive,
    Transcript,
    TranscriptEntry,
    apprentice_feedback,
    controller_turn,
    coordinator_turn,
    dispatched_entry,
)
from .gateway import (
    GatewayConfig,
    GatewayError,
    LiveBackend,
    LiveGateway,
    MockBackend,
    MockGateway,
    MockScriptError,
    TransportError,
    build_gateway,
    gateway_chat,
)
from .prompts import CompositionError, PromptBundle, compose_prompts, render_pose

__all__ = [
    "AgentFormatError",
    "AgentSession",
    "ControllerFailure",
    "ControllerResult",
    "CoordinatorOutput",
    "Directive",
    "Transcript",
    "TranscriptEntry",
    "apprentice_feedback",
    "controller_turn",
    "coordinator_turn",
    "dispatched_entry",
    "GatewayConfig",
    "GatewayError",
    "LiveBackend",
    "LiveGateway",
    "MockBackend",
    "MockGateway",
    "MockScriptError",
    "TransportError",
    "build_gateway",
    "gateway_chat",
    "CompositionError",
    "PromptBundle",
    "compose_prompts",
    "render_pose",
]
