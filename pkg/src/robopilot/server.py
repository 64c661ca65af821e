"""HTTP gateway: session endpoints and the line-delimited event stream."""

from __future__ import annotations

import json
import queue
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

from .errors import (
    BackendError,
    InvalidConfig,
    NoPendingConfirmation,
    SessionBusy,
    UnknownScenario,
    UnknownSession,
)
from .session import Session, SessionService, event_to_wire


def _json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n"


def build_app(service: SessionService) -> FastAPI:
    app = FastAPI(title="robopilot gateway")

    @app.exception_handler(UnknownSession)
    async def _unknown_session(request: Request, exc: UnknownSession):
        return JSONResponse({"error": str(exc)}, status_code=404)

    @app.exception_handler(UnknownScenario)
    async def _unknown_scenario(request: Request, exc: UnknownScenario):
        return JSONResponse({"error": str(exc)}, status_code=404)

    @app.exception_handler(InvalidConfig)
    async def _invalid_config(request: Request, exc: InvalidConfig):
        return JSONResponse({"error": str(exc)}, status_code=422)

    @app.exception_handler(SessionBusy)
    async def _busy(request: Request, exc: SessionBusy):
        return JSONResponse({"error": str(exc)}, status_code=409)

    @app.exception_handler(NoPendingConfirmation)
    async def _no_pending(request: Request, exc: NoPendingConfirmation):
        return JSONResponse({"error": str(exc)}, status_code=409)

    @app.post("/sessions")
    def create_session(body: dict):
        session = service.create_session(
            body.get("scenario", "testbed"), body.get("config") or {}
        )
        return {"id": session.id}

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: dict):
        session = service.get(session_id)
        text = body.get("text", "")
        language = body.get("language")
        return StreamingResponse(
            _turn_stream(session, text, language),
            media_type="application/x-ndjson",
        )

    @app.post("/sessions/{session_id}/confirm")
    def confirm(session_id: str, body: dict):
        session = service.get(session_id)
        session.confirm(body.get("decision", "deny"))
        return {"ok": True}

    @app.post("/sessions/{session_id}/estop")
    def estop(session_id: str):
        session = service.get(session_id)
        tick = session.estop()
        return {"ok": True, "ack_tick": tick}

    @app.post("/sessions/{session_id}/override")
    def override(session_id: str, body: dict):
        session = service.get(session_id)
        obs = session.override(body.get("tool", ""), body.get("args") or {})
        return json.loads(obs.rendered_text)

    @app.get("/sessions/{session_id}/transcript")
    def transcript(session_id: str):
        session = service.get(session_id)
        return PlainTextResponse(session.export_transcript())

    @app.get("/sessions/{session_id}/metrics")
    def metrics(session_id: str):
        session = service.get(session_id)
        return session.metrics_snapshot()

    return app


def _turn_stream(session: Session, text: str, language: str | None):
    """Run the turn in a worker thread and relay its events as NDJSON.

    When a confirmation is pending the queue stays open; the confirm
    endpoint resumes the parked turn and its events continue to flow
    through the same queue."""
    q: queue.Queue = queue.Queue()
    error_slot: list[str] = []

    def run() -> None:
        try:
            session.post_message(text, language, stream_queue=q)
        except SessionBusy as exc:
            error_slot.append(str(exc))
            q.put(None)
        except BackendError as exc:
            error_slot.append(f"model backend unavailable: {exc}")
            q.put(None)

    threading.Thread(target=run, daemon=True).start()
    while True:
        event = q.get()
        if event is None:
            if error_slot:
                yield _json_line({"kind": "error", "message": error_slot[0]})
            return
        yield _json_line(event_to_wire(event))
