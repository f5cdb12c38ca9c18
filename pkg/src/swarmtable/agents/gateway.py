"""Language-model gateway: a deterministic scripted mock plus a live HTTP backend.

The mock is the primary test backend; it replays responses keyed by
(agent role, per-role turn index) from a script file and records every bundle
it is shown, which is what the reality-agnosticism checks scan. The live
backend speaks the common chat-completion wire format and is configuration
only: nothing in the test suite depends on it.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import httpx

from .prompts import PromptBundle

logger = logging.getLogger(__name__)


class GatewayError(Exception):
    """Base class for gateway failures."""


class MockScriptError(GatewayError):
    """The scripted mock has no response for this (role, turn)."""


class TransportError(GatewayError):
    """The live backend stayed unreachable across all retry attempts."""


@dataclass(frozen=True)
class LiveBackend:
    endpoint: str
    model: str
    api_key_env: str = "SWARMTABLE_API_KEY"
    temperature: float = 0.0
    timeout_ms: float = 30000.0


@dataclass(frozen=True)
class MockBackend:
    script_path: str


@dataclass(frozen=True)
class GatewayConfig:
    """Exactly one backend: scripted mock or live chat-completion endpoint."""

    mock: Optional[MockBackend] = None
    live: Optional[LiveBackend] = None

    def __post_init__(self) -> None:
        if (self.mock is None) == (self.live is None):
            raise ValueError("configure exactly one gateway backend")

    @classmethod
    def from_dict(cls, data: dict) -> "GatewayConfig":
        backend = data.get("backend", "mock")
        if backend == "mock":
            return cls(mock=MockBackend(script_path=data["script_path"]))
        return cls(live=LiveBackend(
            endpoint=data["endpoint"],
            model=data["model"],
            api_key_env=data.get("api_key_env", "SWARMTABLE_API_KEY"),
            temperature=float(data.get("temperature", 0.0)),
            timeout_ms=float(data.get("timeout_ms", 30000.0)),
        ))


@dataclass
class RecordedCall:
    role: str
    turn: int
    rendered: str


class MockGateway:
    """Deterministic scripted stand-in for the language model.

    The script is a JSON array of {"role", "turn", "response"} entries; turn
    counts calls per role from zero. Asking beyond the script is a fixture
    error, never an improvised answer.
    """

    def __init__(self, script: list[dict]):
        self.responses: dict[tuple[str, int], str] = {}
        for entry in script:
            key = (entry["role"], int(entry["turn"]))
            if key in self.responses:
                raise ValueError(f"duplicate mock script entry for {key}")
            self.responses[key] = entry["response"]
        self.counters: dict[str, int] = {}
        self.calls: list[RecordedCall] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "MockGateway":
        with open(path, "r", encoding="utf-8") as f:
            return cls(json.load(f))

    def chat(self, bundle: PromptBundle) -> str:
        turn = self.counters.get(bundle.role, 0)
        self.counters[bundle.role] = turn + 1
        self.calls.append(RecordedCall(bundle.role, turn, bundle.render_text()))
        key = (bundle.role, turn)
        if key not in self.responses:
            raise MockScriptError(
                f"mock script exhausted: no response for role {bundle.role!r} turn {turn}")
        return self.responses[key]


class LiveGateway:
    """Chat-completion HTTP backend with bounded retries."""

    ATTEMPTS = 3

    def __init__(self, backend: LiveBackend):
        self.backend = backend

    def chat(self, bundle: PromptBundle) -> str:
        api_key = os.environ.get(self.backend.api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.backend.model,
            "temperature": self.backend.temperature,
            "messages": bundle.as_messages(),
        }
        timeout = self.backend.timeout_ms / 1000.0
        last_error: Exception | None = None
        for attempt in range(self.ATTEMPTS):
            try:
                resp = httpx.post(self.backend.endpoint, json=payload,
                                  headers=headers, timeout=timeout)
                if resp.status_code >= 500:
                    raise httpx.HTTPStatusError(
                        f"server error {resp.status_code}", request=resp.request, response=resp)
                resp.raise_for_status()
                data = resp.json()
                return data["choices"][0]["message"]["content"]
            except (httpx.TransportError, httpx.HTTPStatusError) as e:
                last_error = e
                if attempt < self.ATTEMPTS - 1:
                    time.sleep(0.2 * (2 ** attempt))
        raise TransportError(f"gateway unreachable after {self.ATTEMPTS} attempts: {last_error}")


def build_gateway(cfg: GatewayConfig, base_dir: Optional[Path] = None):
    if cfg.mock is not None:
        path = Path(cfg.mock.script_path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return MockGateway.from_file(path)
    return LiveGateway(cfg.live)


def gateway_chat(gateway, bundle: PromptBundle) -> str:
    """Send one prompt bundle and return the assistant text."""
    return gateway.chat(bundle)
