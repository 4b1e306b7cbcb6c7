"""Turn events: the pipeline trace, the session log, and SSE fan-out.

Every turn emits stage events in a fixed order (received, contextualized,
retrieved, prompt_built, tool_called*, completed, affect_updated,
behavior_emitted). The bus forwards each event to any subscribers of the
session with a bounded per-subscriber queue; a slow consumer loses events
but is told so with a gap marker frame carrying the drop count.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path

STAGES = (
    "received",
    "contextualized",
    "retrieved",
    "prompt_built",
    "tool_called",
    "completed",
    "affect_updated",
    "behavior_emitted",
)

DEFAULT_QUEUE_SIZE = 512


@dataclass
class TurnEvent:
    session_id: str
    turn_id: str
    stage: str
    payload: dict
    timestamp: float
    seq: int

    def as_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "turn_id": self.turn_id,
            "stage": self.stage,
            "payload": self.payload,
            "timestamp": self.timestamp,
            "seq": self.seq,
        }


@dataclass
class Subscription:
    frames: "queue.Queue[dict]"
    dropped: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def take_gap(self) -> int:
        with self.lock:
            n, self.dropped = self.dropped, 0
            return n


class EventBus:
    def __init__(self, queue_size: int = DEFAULT_QUEUE_SIZE) -> None:
        self._subs: dict[str, list[Subscription]] = {}
        self._lock = threading.Lock()
        self._queue_size = queue_size

    def subscribe(self, session_id: str) -> Subscription:
        sub = Subscription(frames=queue.Queue(maxsize=self._queue_size))
        with self._lock:
            self._subs.setdefault(session_id, []).append(sub)
        return sub

    def unsubscribe(self, session_id: str, sub: Subscription) -> None:
        with self._lock:
            subs = self._subs.get(session_id, [])
            if sub in subs:
                subs.remove(sub)

    def publish(self, session_id: str, frame_type: str, data: dict) -> None:
        frame = {"type": frame_type, "data": data}
        with self._lock:
            subs = list(self._subs.get(session_id, []))
        for sub in subs:
            try:
                sub.frames.put_nowait(frame)
            except queue.Full:
                with sub.lock:
                    sub.dropped += 1


class SessionLog:
    """Append-only JSON-lines log; the transcript that `replay` consumes."""

    def __init__(self, path: Path) -> None:
        self.path = path
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        with self._lock, open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


class TurnTraceStore:
    """In-memory ordered event lists, keyed by (session_id, turn_id)."""

    def __init__(self) -> None:
        self._traces: dict[tuple[str, str], list[TurnEvent]] = {}
        self._lock = threading.Lock()

    def add(self, event: TurnEvent) -> None:
        with self._lock:
            self._traces.setdefault((event.session_id, event.turn_id), []).append(event)

    def get(self, session_id: str, turn_id: str) -> list[TurnEvent] | None:
        with self._lock:
            events = self._traces.get((session_id, turn_id))
            return list(events) if events is not None else None
