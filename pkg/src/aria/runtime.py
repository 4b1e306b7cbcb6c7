"""Wires configuration into a running agent: one runtime, many sessions.

The runtime owns the shared components (gateway, embedder, vector store,
tool registry, user registry, event bus) and the session table. Everything
the HTTP service and the CLI do goes through here, so an offline test can
drive the exact same object with a scripted provider and a manual clock.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from pathlib import Path
from typing import Callable

from .behavior import BehaviorScript
from .config import AgentSettings
from .embeddings import HashEmbedder, HttpEmbedder
from .errors import ConfigError, UnknownSessionError, ValidationError
from .events import EventBus, SessionLog, TurnEvent, TurnTraceStore
from .llm import HttpChatProvider, ScriptedProvider, load_script
from .memory import MemoryService
from .orchestrator import AgentResponse, Orchestrator, Session
from .perception import PerceptEvent, SessionPercepts, UserRegistry
from .tools import build_registry
from .vectorstore import VectorStore

logger = logging.getLogger(__name__)


class Runtime:
    def __init__(self, settings: AgentSettings, clock: Callable[[], float] = time.time) -> None:
        self.settings = settings
        self.clock = clock
        self.data_dir = Path(settings.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

        if settings.embedding.mode == "hash":
            self.embedder = HashEmbedder(settings.embedding.dimension)
        elif settings.embedding.mode == "http":
            self.embedder = HttpEmbedder(
                endpoint=settings.embedding.endpoint,
                dimension=settings.embedding.dimension,
                model=settings.embedding.model,
                api_key_env=settings.embedding.api_key_env,
                timeout_s=settings.embedding.timeout_s,
            )
        else:
            raise ConfigError(f"unknown embedding mode {settings.embedding.mode!r}")

        self.store = VectorStore(settings.embedding.dimension, root=self.data_dir)
        self.memory = MemoryService(
            embedder=self.embedder,
            store=self.store,
            chunk_size=settings.memory.chunk_size,
            chunk_overlap=settings.memory.chunk_overlap,
            knowledge_top_k=settings.memory.knowledge_top_k,
            memory_top_k=settings.memory.memory_top_k,
            root=self.data_dir,
        )

        if settings.provider.mode == "scripted":
            if settings.provider.script_path:
                self.gateway = load_script(settings.provider.script_path)
            else:
                self.gateway = ScriptedProvider([], fallback=settings.provider.fallback)
        elif settings.provider.mode == "http":
            if not settings.provider.endpoint:
                raise ConfigError("provider.mode http needs provider.endpoint")
            self.gateway = HttpChatProvider(
                endpoint=settings.provider.endpoint,
                model=settings.provider.model,
                api_key_env=settings.provider.api_key_env,
                timeout_s=settings.provider.timeout_s,
                retries=settings.provider.retries,
            )
        else:
            raise ConfigError(f"unknown provider mode {settings.provider.mode!r}")

        self.tools = build_registry(
            enabled=settings.tools.enabled,
            mode=settings.tools.mode,
            fixture_dir=settings.tools.fixture_dir or None,
            endpoints=settings.tools.endpoints,
            observation_budget=settings.tools.observation_budget,
            summarizer=self.gateway,
        )

        self.users = UserRegistry(self.data_dir / "users.json")
        self.personality, self.affect_config = settings.affect.build()

        self.bus = EventBus()
        self.traces = TurnTraceStore()
        self._logs: dict[str, SessionLog] = {}
        self._event_seq = 0
        self._emit_lock = threading.Lock()

        self.orchestrator = Orchestrator(
            gateway=self.gateway,
            memory=self.memory,
            tools=self.tools,
            persona=settings.persona,
            affect_enabled=settings.affect.enabled,
            max_iterations=settings.max_iterations,
            history_window=settings.memory.history_window,
            temperature=settings.provider.temperature,
            clock=clock,
            emit=self._emit_event,
        )

        self.sessions: dict[str, Session] = {}
        self._sessions_lock = threading.Lock()

    # ---------------------------------------------------------------- events

    def _emit_event(self, session_id: str, turn_id: str, stage: str, payload: dict, ts: float) -> None:
        with self._emit_lock:
            self._event_seq += 1
            seq = self._event_seq
        event = TurnEvent(
            session_id=session_id,
            turn_id=turn_id,
            stage=stage,
            payload=payload,
            timestamp=ts,
            seq=seq,
        )
        self.traces.add(event)
        self._session_log(session_id).append(event.as_dict())
        self.bus.publish(session_id, "turn_event", event.as_dict())
        if stage == "behavior_emitted":
            self.bus.publish(session_id, "behavior_script", payload["script"])
            self._behavior_log(payload["script"])

    def _session_log(self, session_id: str) -> SessionLog:
        log = self._logs.get(session_id)
        if log is None:
            log = SessionLog(self.data_dir / "logs" / f"{session_id}.jsonl")
            self._logs[session_id] = log
        return log

    def _behavior_log(self, script: dict) -> None:
        path = self.data_dir / "logs" / "behavior.jsonl"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(script, ensure_ascii=False) + "\n")

    # -------------------------------------------------------------- sessions

    def create_session(
        self, user_id: str | None = None, face_ref: str | None = None
    ) -> Session:
        now = self.clock()
        resolved = self.users.identify_or_register(
            face_ref=face_ref, claimed_user_id=user_id, now=now
        )
        session = Session(
            session_id=f"s-{uuid.uuid4().hex[:12]}",
            user_id=resolved,
            created_at=now,
            personality=self.personality,
            affect_config=self.affect_config,
        )
        session.percepts = SessionPercepts(
            staleness_timeout_s=self.settings.percept_staleness_s
        )
        with self._sessions_lock:
            self.sessions[session.session_id] = session
        return session

    def get_session(self, session_id: str) -> Session:
        with self._sessions_lock:
            session = self.sessions.get(session_id)
        if session is None or session.status != "active":
            raise UnknownSessionError(f"unknown or closed session {session_id!r}")
        return session

    def close_session(self, session_id: str) -> None:
        session = self.get_session(session_id)
        with session.turn_lock:  # wait out any in-flight turn
            self.orchestrator.flush_session(session, self.clock())
            if session.pending_segments:
                logger.error(
                    "session %s closed with %d unstored segments",
                    session_id,
                    len(session.pending_segments),
                )
            session.status = "closed"
        self.memory.flush()

    # ----------------------------------------------------------------- turns

    def run_turn(self, session_id: str, text: str, block: bool = False) -> tuple[AgentResponse, BehaviorScript]:
        if not text:
            raise ValidationError("utterance text must be non-empty")
        session = self.get_session(session_id)
        return self.orchestrator.run_turn(session, text, block=block)

    # --------------------------------------------------------------- percepts

    def ingest_percept(self, event: PerceptEvent) -> dict:
        """Apply a percept event; utterances run a turn on a worker thread."""
        session = self.get_session(event.session_id)
        if event.kind in ("user_emotion", "user_location"):
            applied = session.percepts.update(event)
            if not applied:
                logger.warning("stale percept ignored for session %s", event.session_id)
            return {"status": "applied" if applied else "ignored_stale"}
        if event.kind == "utterance":
            thread = threading.Thread(
                target=self._percept_turn,
                args=(event.session_id, event.payload["text"]),
                daemon=True,
            )
            thread.start()
            return {"status": "turn_enqueued"}
        if event.kind == "user_enter":
            return {"status": "episode_open"}
        if event.kind == "user_leave":
            with session.turn_lock:
                self.orchestrator.flush_session(session, self.clock())
            self.memory.flush()
            return {"status": "episode_flushed"}
        return {"status": "ignored"}

    def _percept_turn(self, session_id: str, text: str) -> None:
        try:
            self.run_turn(session_id, text, block=True)
        except Exception as exc:
            logger.error("percept-driven turn failed: %s", exc)

    # ------------------------------------------------------------- lifecycle

    def shutdown(self) -> None:
        with self._sessions_lock:
            open_ids = [s.session_id for s in self.sessions.values() if s.status == "active"]
        for sid in open_ids:
            try:
                self.close_session(sid)
            except Exception as exc:
                logger.warning("close of %s during shutdown failed: %s", sid, exc)
        self.memory.flush()
