"""Session-oriented HTTP service over the runtime.

Routes (all bodies JSON; error bodies are {"code", "message"}):

    POST   /v1/sessions                         create session (201)
    POST   /v1/sessions/{sid}/utterance         run one turn (200; 409 busy)
    POST   /v1/sessions/{sid}/percepts          ingest a percept event (202)
    GET    /v1/sessions/{sid}/state             affect + counters
    GET    /v1/sessions/{sid}/turns/{tid}/trace ordered stage events
    GET    /v1/sessions/{sid}/events            SSE stream (turn_event,
                                                behavior_script, gap frames)
    POST   /v1/knowledge/ingest                 chunk+embed+store documents
    GET    /v1/users/{uid}/memory/segments      episodic segment index
    DELETE /v1/sessions/{sid}                   close (flushes episodic tail)

One turn at a time per session: a second concurrent utterance gets 409
turn_in_flight, mirroring the single-party interaction rule.
"""

from __future__ import annotations

import json
import queue

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from starlette.concurrency import run_in_threadpool

from .chunking import KnowledgeDoc
from .errors import (
    ProviderUnavailableError,
    TurnInFlightError,
    UnknownSessionError,
    ValidationError,
)
from .perception import PerceptEvent
from .runtime import Runtime

SSE_POLL_S = 0.2


def error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def build_app(runtime: Runtime) -> FastAPI:
    app = FastAPI(title="aria", version="0.1.0")
    app.state.runtime = runtime
    # the browser console is served from its own origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(UnknownSessionError)
    async def _unknown_session(_req, exc):
        return error_response(404, "unknown_session", str(exc))

    @app.exception_handler(TurnInFlightError)
    async def _turn_in_flight(_req, exc):
        return error_response(409, "turn_in_flight", str(exc))

    @app.exception_handler(ValidationError)
    async def _validation_failed(_req, exc):
        return error_response(400, "validation_failed", str(exc))

    @app.exception_handler(ProviderUnavailableError)
    async def _provider_unavailable(_req, exc):
        return error_response(502, "provider_unavailable", str(exc))

    async def read_json(request: Request) -> dict:
        try:
            body = await request.json()
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ValidationError(f"body is not valid JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise ValidationError("body must be a JSON object")
        return body

    @app.post("/v1/sessions", status_code=201)
    async def create_session(request: Request):
        body = await read_json(request)
        user_id = body.get("user_id")
        face_ref = body.get("face_ref")
        if user_id is not None and not isinstance(user_id, str):
            raise ValidationError("user_id must be a string")
        if face_ref is not None and not isinstance(face_ref, str):
            raise ValidationError("face_ref must be a string")
        session = await run_in_threadpool(runtime.create_session, user_id, face_ref)
        return {"session_id": session.session_id, "user_id": session.user_id}

    @app.post("/v1/sessions/{session_id}/utterance")
    async def utterance(session_id: str, request: Request):
        body = await read_json(request)
        text = body.get("text")
        if not isinstance(text, str) or not text:
            raise ValidationError("utterance needs a non-empty 'text'")
        response, script = await run_in_threadpool(runtime.run_turn, session_id, text)
        return {
            "turn_id": response.turn_id,
            "answer": response.answer,
            "emotion": response.emotion,
            "intensity": response.intensity,
            "base_intensity": response.base_intensity,
            "cause": response.cause,
            "category": response.interaction_category,
            "behavior_script": script.as_dict(),
        }

    @app.post("/v1/sessions/{session_id}/percepts", status_code=202)
    async def percepts(session_id: str, request: Request):
        body = await read_json(request)
        kind = body.get("kind")
        payload = body.get("payload", {})
        timestamp = body.get("timestamp", runtime.clock())
        if not isinstance(kind, str):
            raise ValidationError("percept needs a string 'kind'")
        if not isinstance(payload, dict):
            raise ValidationError("percept 'payload' must be an object")
        if not isinstance(timestamp, (int, float)):
            raise ValidationError("percept 'timestamp' must be a number")
        event = PerceptEvent(
            session_id=session_id, kind=kind, payload=payload, timestamp=float(timestamp)
        )
        return await run_in_threadpool(runtime.ingest_percept, event)

    @app.get("/v1/sessions/{session_id}/state")
    async def state(session_id: str):
        session = runtime.get_session(session_id)
        snap = session.affect.snapshot()
        return {
            "session_id": session.session_id,
            "user_id": session.user_id,
            "status": session.status,
            "mood": snap["mood"],
            "default_mood": snap["default_mood"],
            "active_emotions": snap["active_emotions"],
            "history_length": len(session.history),
            "turn_counter": session.turn_counter,
        }

    @app.get("/v1/sessions/{session_id}/turns/{turn_id}/trace")
    async def trace(session_id: str, turn_id: str):
        runtime.get_session(session_id)
        events = runtime.traces.get(session_id, turn_id)
        if events is None:
            raise ValidationError(f"no trace for turn {turn_id!r}")
        return {"session_id": session_id, "turn_id": turn_id,
                "events": [e.as_dict() for e in events]}

    @app.post("/v1/knowledge/ingest")
    async def ingest(request: Request):
        body = await read_json(request)
        documents = body.get("documents")
        if not isinstance(documents, list) or not documents:
            raise ValidationError("ingest needs a non-empty 'documents' list")
        docs = []
        for i, raw in enumerate(documents):
            if not isinstance(raw, dict):
                raise ValidationError(f"documents[{i}] must be an object")
            try:
                docs.append(
                    KnowledgeDoc(
                        doc_id=raw.get("doc_id", ""),
                        source=raw.get("source", ""),
                        text=raw.get("text", ""),
                        metadata=raw.get("metadata", {}),
                    )
                )
            except ValidationError as exc:
                raise ValidationError(f"documents[{i}]: {exc}") from exc

        def _ingest_all() -> int:
            total = 0
            for doc in docs:
                total += len(runtime.memory.ingest_document(doc))
            runtime.memory.flush()
            return total

        stored = await run_in_threadpool(_ingest_all)
        return {"chunks_stored": stored}

    @app.get("/v1/users/{user_id}/memory/segments")
    async def segments(user_id: str):
        return {"user_id": user_id, "segments": runtime.memory.list_segments(user_id)}

    @app.delete("/v1/sessions/{session_id}")
    async def close_session(session_id: str):
        await run_in_threadpool(runtime.close_session, session_id)
        return {"session_id": session_id, "status": "closed"}

    @app.get("/v1/sessions/{session_id}/events")
    async def events(session_id: str):
        runtime.get_session(session_id)
        sub = runtime.bus.subscribe(session_id)

        async def stream():
            try:
                while True:
                    dropped = sub.take_gap()
                    if dropped:
                        yield _frame("gap", {"dropped": dropped})
                    try:
                        frame = await run_in_threadpool(sub.frames.get, True, SSE_POLL_S)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield _frame(frame["type"], frame["data"])
            finally:
                runtime.bus.unsubscribe(session_id, sub)

        return StreamingResponse(
            stream(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    @app.get("/v1/health")
    async def health():
        return {"status": "ok"}

    return app


def _frame(event_type: str, data: dict) -> str:
    return f"event: {event_type}\ndata: {json.dumps(data, ensure_ascii=False)}\n\n"
