"""The reasoning-and-acting turn loop.

One turn: contextualize the utterance, retrieve knowledge and episodic
memories, snapshot the short-term history and percepts, assemble the prompt,
then alternate completions and tool executions until the model produces a
final response (or the tool budget runs out). The final response updates
short-term and episodic memory, feeds the affect engine, and is realized as
a behavior script.

Turns are strictly serial per session; distinct sessions are independent.
A provider failure surfaces to the caller before any session state has
been mutated.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from .affect import AffectConfig, AffectState, Cause, EmotionCategory, PersonalityProfile
from .behavior import BehaviorScript, realize
from .errors import TurnInFlightError
from .llm import OBSERVATION_PREFIX, ChatMessage, CompletionRequest, LLMProvider
from .memory import MemoryService
from .parsing import FinalResponse, ToolRequest, parse_directive
from .perception import SessionPercepts
from .prompting import PersonaConfig, TurnContext, UserData, build_prompt, bundle_text
from .segmentation import EpisodicSegment, Interaction, SessionSegmenter
from .tools import ToolInvocation, ToolRegistry

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 5
DEFAULT_HISTORY_WINDOW = 20

EmitFn = Callable[[str, str, str, dict, float], None]


def iteration_limit_answer(max_iterations: int) -> str:
    return (
        f"I could not finish looking that up within {max_iterations} tool calls. "
        "Could you rephrase or narrow down the question?"
    )


@dataclass
class Session:
    session_id: str
    user_id: str
    created_at: float
    personality: PersonalityProfile
    affect_config: AffectConfig
    status: str = "active"
    turn_counter: int = 0
    history: list[ChatMessage] = field(default_factory=list)
    percepts: SessionPercepts = field(default_factory=SessionPercepts)
    pending_segments: list[EpisodicSegment] = field(default_factory=list)
    turn_lock: threading.Lock = field(default_factory=threading.Lock)
    affect: AffectState = field(init=False)
    segmenter: SessionSegmenter = field(init=False)

    def __post_init__(self) -> None:
        self.affect = AffectState(self.personality, self.affect_config, now=self.created_at)
        self.segmenter = SessionSegmenter(user_id=self.user_id, session_id=self.session_id)


@dataclass
class AgentResponse:
    turn_id: str
    answer: str
    emotion: str
    intensity: float  # balanced (mood-aligned) intensity
    base_intensity: float
    cause: str
    interaction_category: str
    tool_trace: list[ToolInvocation]
    knowledge_used: list
    memories_used: list
    latency_s: float


class Orchestrator:
    def __init__(
        self,
        gateway: LLMProvider,
        memory: MemoryService,
        tools: ToolRegistry,
        persona: PersonaConfig,
        affect_enabled: bool = True,
        max_iterations: int = DEFAULT_MAX_ITERATIONS,
        history_window: int = DEFAULT_HISTORY_WINDOW,
        temperature: float = 0.2,
        clock: Callable[[], float] = time.time,
        emit: EmitFn | None = None,
    ) -> None:
        self.gateway = gateway
        self.memory = memory
        self.tools = tools
        self.persona = persona
        self.affect_enabled = affect_enabled
        self.max_iterations = max_iterations
        self.history_window = history_window
        self.temperature = temperature
        self.clock = clock
        self._emit = emit or (lambda *_: None)

    # ------------------------------------------------------------------ turn

    def gather_context(self, session: Session, user_text: str, now: float) -> TurnContext:
        """Step 1: collect everything the prompt needs.

        A failing retrieval source degrades to an empty block; the turn
        never aborts here.
        """
        history = list(session.history[-self.history_window :])
        query = self.memory.contextualize(user_text, history, self.gateway)
        self._emit(session.session_id, self._turn_id(session), "contextualized",
                   {"query": query}, now)

        try:
            knowledge = self.memory.retrieve_knowledge(query)
        except Exception as exc:
            logger.warning("knowledge retrieval failed: %s", exc)
            knowledge = []
        try:
            memories = self.memory.retrieve_memories(session.user_id, query)
        except Exception as exc:
            logger.warning("memory retrieval failed: %s", exc)
            memories = []
        self._emit(
            session.session_id,
            self._turn_id(session),
            "retrieved",
            {
                "knowledge": [_passage_summary(p) for p in knowledge],
                "memories": [_passage_summary(p) for p in memories],
            },
            now,
        )

        snap = session.percepts.snapshot(now)
        return TurnContext(
            session_id=session.session_id,
            user_id=session.user_id,
            user_text=user_text,
            contextualized_query=query,
            retrieved_knowledge=knowledge,
            retrieved_memories=memories,
            chat_history=history,
            user_data=UserData(
                identity=session.user_id,
                detected_emotion=snap.detected_emotion,
                location=snap.location,
            ),
            tool_block=self.tools.describe_all(),
        )

    def run_turn(self, session: Session, user_text: str, block: bool = False) -> tuple[AgentResponse, BehaviorScript]:
        if not session.turn_lock.acquire(blocking=block):
            raise TurnInFlightError(f"session {session.session_id} has a turn in flight")
        try:
            return self._run_turn_locked(session, user_text)
        finally:
            session.turn_lock.release()

    def _run_turn_locked(self, session: Session, user_text: str) -> tuple[AgentResponse, BehaviorScript]:
        started = self.clock()
        now = started
        session.turn_counter += 1
        turn_id = self._turn_id(session)
        sid = session.session_id
        self._emit(sid, turn_id, "received", {"text": user_text}, now)

        ctx = self.gather_context(session, user_text, now)
        bundle = build_prompt(ctx, self.persona)
        self._emit(sid, turn_id, "prompt_built",
                   {"blocks": [{"role": m.role, "content": m.content} for m in bundle.messages],
                    "flat": bundle_text(bundle)},
                   now)

        messages = list(bundle.messages)
        trace: list[ToolInvocation] = []
        final: FinalResponse | None = None
        for round_no in range(self.max_iterations + 1):
            raw = self.gateway.complete(
                CompletionRequest(messages=messages, temperature=self.temperature)
            )
            directive = parse_directive(raw)
            if isinstance(directive, FinalResponse):
                final = directive
                break
            assert isinstance(directive, ToolRequest)
            if round_no == self.max_iterations:
                final = FinalResponse(answer=iteration_limit_answer(self.max_iterations))
                break
            invocation = self.tools.execute(directive.tool_name, directive.tool_input, now=self.clock)
            trace.append(invocation)
            self._emit(
                sid,
                turn_id,
                "tool_called",
                {
                    "tool": invocation.tool_name,
                    "input": invocation.input,
                    "observation": invocation.outcome.text,
                    "truncated": invocation.outcome.truncated,
                    "error": invocation.outcome.error,
                },
                now,
            )
            messages.append(ChatMessage(role="assistant", content=raw))
            messages.append(
                ChatMessage(role="user", content=f"{OBSERVATION_PREFIX} {invocation.outcome.text}")
            )

        assert final is not None

        # Balance the expressed intensity against the current mood before the
        # new emotion itself is appraised into the engine.
        if self.affect_enabled:
            session.affect.advance_to(now)
            emotion = final.emotion
            base = final.intensity
            effective = session.affect.expressed_intensity(emotion, base)
        else:
            emotion = EmotionCategory.NEUTRAL
            base = 0.0
            effective = 0.0

        self._emit(
            sid,
            turn_id,
            "completed",
            {
                "answer": final.answer,
                "emotion": emotion,
                "base_intensity": base,
                "intensity": effective,
                "cause": final.cause if self.affect_enabled else Cause.NONE,
                "category": final.interaction_category,
                "tool_rounds": len(trace),
            },
            now,
        )

        response = AgentResponse(
            turn_id=turn_id,
            answer=final.answer,
            emotion=emotion,
            intensity=effective,
            base_intensity=base,
            cause=final.cause if self.affect_enabled else Cause.NONE,
            interaction_category=final.interaction_category,
            tool_trace=trace,
            knowledge_used=ctx.retrieved_knowledge,
            memories_used=ctx.retrieved_memories,
            latency_s=self.clock() - started,
        )
        script = self.post_turn(session, response, user_text, now)
        return response, script

    def post_turn(
        self, session: Session, response: AgentResponse, user_text: str, now: float
    ) -> BehaviorScript:
        """Propagate a finished turn into memory, affect, and behavior."""
        user_msg = ChatMessage(role="user", content=user_text, timestamp=now)
        assistant_msg = ChatMessage(role="assistant", content=response.answer, timestamp=now)
        session.history.extend([user_msg, assistant_msg])

        interaction = Interaction(
            user_message=user_msg,
            assistant_message=assistant_msg,
            index=len(session.segmenter.interactions),
        )
        self._retry_pending_segments(session)
        for segment in session.segmenter.add(interaction, now):
            self._store_segment(session, segment)

        if self.affect_enabled:
            session.affect.appraise_event(response.emotion, response.base_intensity,
                                          response.cause, now)
        self._emit(
            session.session_id,
            response.turn_id,
            "affect_updated",
            {"affect": session.affect.snapshot(), "effective_intensity": response.intensity},
            now,
        )

        script = realize(
            turn_id=response.turn_id,
            answer=response.answer,
            emotion=response.emotion,
            intensity=response.intensity,
            interaction_category=response.interaction_category,
            percepts=session.percepts.snapshot(now),
            issued_at=now,
        )
        self._emit(session.session_id, response.turn_id, "behavior_emitted",
                   {"script": script.as_dict()}, now)
        return script

    # ----------------------------------------------------------------- close

    def flush_session(self, session: Session, now: float) -> EpisodicSegment | None:
        """Flush the trailing partial episodic segment (session close / user leave)."""
        self._retry_pending_segments(session)
        segment = session.segmenter.flush(now)
        if segment is not None:
            self._store_segment(session, segment)
        return segment

    def _store_segment(self, session: Session, segment: EpisodicSegment) -> None:
        try:
            self.memory.store_segment(segment)
        except Exception as exc:
            logger.warning("segment embedding failed, queued for retry: %s", exc)
            session.pending_segments.append(segment)

    def _retry_pending_segments(self, session: Session) -> None:
        if not session.pending_segments:
            return
        still_pending: list[EpisodicSegment] = []
        for segment in session.pending_segments:
            try:
                self.memory.store_segment(segment)
            except Exception as exc:
                logger.warning("segment retry failed: %s", exc)
                still_pending.append(segment)
        session.pending_segments = still_pending

    @staticmethod
    def _turn_id(session: Session) -> str:
        return f"t{session.turn_counter:06d}"


def _passage_summary(p) -> dict:
    return {
        "chunk_id": p.chunk.chunk_id,
        "space_id": p.chunk.space_id,
        "score": p.score,
        "rank": p.rank,
        "span": list(p.chunk.span),
        "text": p.chunk.text,
    }
