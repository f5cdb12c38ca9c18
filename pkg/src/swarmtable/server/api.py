"""HTTP/WS surface for the operator console.

Endpoints:
  POST /sessions                  create a session from a scenario document
                                  (or {"scenario": "<bundled name>"})
  GET  /sessions/{id}             phase + current snapshot
  POST /sessions/{id}/commands    submit one game command, returns the turn result
  POST /sessions/{id}/poses       external pose injection (tracking stand-in)
  GET  /sessions/{id}/transcript  JSON-lines transcript
  GET  /scenarios                 bundled scenario names
  GET  /scenarios/{name}          bundled scenario document
  WS   /sessions/{id}/stream      versioned snapshot/transcript-delta messages
"""

from __future__ import annotations

import asyncio
import json
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from ..geometry import Pose
from .scenario import Scenario, ScenarioError, list_bundled, load_bundled
from .session import ExternalPoseProvider, GameSession, PhaseError

HEARTBEAT_S = 1.0
POLL_S = 0.02


class CommandBody(BaseModel):
    text: str


class PoseBody(BaseModel):
    poses: dict[str, dict]
    stamp_ms: Optional[float] = None


def create_app() -> FastAPI:
    app = FastAPI(title="swarmtable", version="0.1.0")
    sessions: dict[str, GameSession] = {}

    def get_session(session_id: str) -> GameSession:
        if session_id not in sessions:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return sessions[session_id]

    @app.get("/health")
    def health() -> dict:
        return {"ok": True}

    @app.get("/scenarios")
    def scenarios() -> dict:
        return {"scenarios": list_bundled()}

    @app.get("/scenarios/{name}")
    def scenario_doc(name: str) -> dict:
        try:
            return load_bundled(name).to_dict()
        except FileNotFoundError as e:
            raise HTTPException(status_code=404, detail=str(e))

    @app.post("/sessions")
    def create_session(body: dict) -> dict:
        try:
            if "scenario" in body and isinstance(body["scenario"], str):
                scenario = load_bundled(body["scenario"])
            else:
                scenario = Scenario.from_dict(body)
        except FileNotFoundError as e:
            raise HTTPException(status_code=404, detail=str(e))
        try:
            session = GameSession(scenario)
        except ScenarioError as e:
            raise HTTPException(status_code=422, detail=e.problems)
        init = session.start()
        sessions[session.id] = session
        return {"id": session.id, "name": scenario.name, "phase": session.phase,
                "init": init.to_dict()}

    @app.get("/sessions/{session_id}")
    def session_state(session_id: str) -> dict:
        session = get_session(session_id)
        return {"id": session.id, "name": session.scenario.name, "phase": session.phase,
                "clock_ms": session.world.clock_ms, "snapshot": session.snapshot()}

    @app.post("/sessions/{session_id}/commands")
    def submit(session_id: str, body: CommandBody) -> dict:
        session = get_session(session_id)
        try:
            result = session.submit_command(body.text)
        except PhaseError as e:
            raise HTTPException(status_code=409, detail=str(e))
        return result.to_dict()

    @app.post("/sessions/{session_id}/poses")
    def inject_poses(session_id: str, body: PoseBody) -> dict:
        session = get_session(session_id)
        provider = session.pose_provider
        if not isinstance(provider, ExternalPoseProvider):
            raise HTTPException(status_code=409,
                                detail="session does not use an external pose source")
        try:
            poses = {rid: Pose(float(p["x"]), float(p["y"]), float(p.get("heading", 0.0)))
                     for rid, p in body.poses.items()}
            provider.update(poses, body.stamp_ms if body.stamp_ms is not None
                            else session.world.clock_ms)
        except (KeyError, ValueError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"ok": True, "stamp_ms": provider.stamp()}

    @app.get("/sessions/{session_id}/transcript")
    def transcript(session_id: str) -> PlainTextResponse:
        session = get_session(session_id)
        lines = "".join(json.dumps(e, separators=(",", ":")) + "\n"
                        for e in session.transcript_entries())
        return PlainTextResponse(lines, media_type="application/x-ndjson")

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str) -> None:
        if session_id not in sessions:
            await websocket.close(code=4404)
            return
        session = sessions[session_id]
        await websocket.accept()
        last_seq = 0
        idle = 0.0
        try:
            # opening snapshot so late subscribers can render immediately
            opening = {"v": 1, "kind": "snapshot", "seq": last_seq,
                       "state": session.snapshot()}
            await websocket.send_text(json.dumps(opening, separators=(",", ":")))
            while True:
                fresh = session.stream_since(last_seq)
                if fresh:
                    for message in fresh:
                        await websocket.send_text(json.dumps(message, separators=(",", ":")))
                        last_seq = message["seq"]
                    idle = 0.0
                else:
                    idle += POLL_S
                    if idle >= HEARTBEAT_S:
                        await websocket.send_text(json.dumps(
                            session.heartbeat(), separators=(",", ":")))
                        idle = 0.0
                await asyncio.sleep(POLL_S)
        except WebSocketDisconnect:
            return

    return app


app = create_app()
