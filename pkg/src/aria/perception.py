"""Typed ingestion point standing in for the hardware perception stack.

Upstream recognizers are reduced to two contracts: an opaque `face_ref`
identifying a recognized face, and timestamped percept events (utterance,
user_emotion, user_location, user_enter, user_leave). The registry maps
face refs and claimed ids to stable user records; the per-session snapshot
keeps only the latest emotion and location and treats anything older than
the staleness timeout as absent.
"""

from __future__ import annotations

import json
import re
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .affect import EmotionCategory
from .errors import AmbiguityError, ValidationError

STALENESS_TIMEOUT_S = 30.0

EVENT_KINDS = ("utterance", "user_emotion", "user_location", "user_enter", "user_leave")

_USER_ID_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


@dataclass
class UserRecord:
    user_id: str
    display_name: str | None = None
    face_ref: str | None = None
    first_seen: float = 0.0
    last_seen: float = 0.0


@dataclass
class PerceptEvent:
    session_id: str
    kind: str
    payload: dict
    timestamp: float

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValidationError(f"unknown percept kind {self.kind!r}")
        if self.kind == "utterance":
            text = self.payload.get("text")
            if not isinstance(text, str) or not text:
                raise ValidationError("utterance payload needs non-empty 'text'")
        elif self.kind == "user_emotion":
            EmotionCategory.parse(str(self.payload.get("category", "")))
            conf = self.payload.get("confidence")
            if not isinstance(conf, (int, float)) or not 0.0 <= conf <= 1.0:
                raise ValidationError("user_emotion payload needs confidence in [0,1]")
        elif self.kind == "user_location":
            point = self.payload.get("point")
            if (
                not isinstance(point, (list, tuple))
                or len(point) != 3
                or not all(isinstance(v, (int, float)) for v in point)
            ):
                raise ValidationError("user_location payload needs a 3D 'point'")


class UserRegistry:
    """face_ref / user_id identity store, persisted as one JSON file."""

    def __init__(self, path: str | Path | None = None, id_factory=None) -> None:
        self.path = Path(path) if path is not None else None
        self._users: dict[str, UserRecord] = {}
        self._by_face: dict[str, str] = {}
        self._lock = threading.RLock()
        self._id_factory = id_factory or (lambda: f"u-{uuid.uuid4().hex[:8]}")
        if self.path is not None and self.path.exists():
            self._load()

    def identify_or_register(
        self,
        face_ref: str | None = None,
        claimed_user_id: str | None = None,
        now: float = 0.0,
    ) -> str:
        with self._lock:
            by_face = self._by_face.get(face_ref) if face_ref else None
            by_claim = claimed_user_id if claimed_user_id in self._users else None
            if by_face and by_claim and by_face != by_claim:
                raise AmbiguityError(
                    f"face_ref maps to {by_face!r} but claimed id is {by_claim!r}"
                )
            user_id = by_face or by_claim
            if user_id is not None:
                record = self._users[user_id]
                record.last_seen = max(record.last_seen, now)
                if face_ref and record.face_ref is None:
                    record.face_ref = face_ref
                    self._by_face[face_ref] = user_id
                self._save()
                return user_id
            user_id = claimed_user_id or self._id_factory()
            if not _USER_ID_RE.match(user_id):
                raise ValidationError(f"user id {user_id!r} must match {_USER_ID_RE.pattern}")
            record = UserRecord(
                user_id=user_id,
                face_ref=face_ref,
                first_seen=now,
                last_seen=now,
            )
            self._users[user_id] = record
            if face_ref:
                self._by_face[face_ref] = user_id
            self._save()
            return user_id

    def get(self, user_id: str) -> UserRecord | None:
        with self._lock:
            return self._users.get(user_id)

    def __len__(self) -> int:
        return len(self._users)

    def _save(self) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            uid: {
                "user_id": r.user_id,
                "display_name": r.display_name,
                "face_ref": r.face_ref,
                "first_seen": r.first_seen,
                "last_seen": r.last_seen,
            }
            for uid, r in self._users.items()
        }
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        tmp.replace(self.path)

    def _load(self) -> None:
        assert self.path is not None
        payload = json.loads(self.path.read_text(encoding="utf-8"))
        for uid, rec in payload.items():
            record = UserRecord(**rec)
            self._users[uid] = record
            if record.face_ref:
                self._by_face[record.face_ref] = uid


@dataclass
class _Stamped:
    value: object
    timestamp: float


@dataclass
class PerceptSnapshot:
    """What the orchestrator sees: only fresh values survive."""

    detected_emotion: tuple[str, float] | None = None
    location: tuple[float, float, float] | None = None


@dataclass
class SessionPercepts:
    """Latest-wins percept state for one session."""

    staleness_timeout_s: float = STALENESS_TIMEOUT_S
    _emotion: _Stamped | None = field(default=None, repr=False)
    _location: _Stamped | None = field(default=None, repr=False)

    def update(self, event: PerceptEvent) -> bool:
        """Apply an emotion/location event; stale (older) events are ignored."""
        if event.kind == "user_emotion":
            if self._emotion and event.timestamp < self._emotion.timestamp:
                return False
            value = (
                EmotionCategory.parse(event.payload["category"]),
                float(event.payload["confidence"]),
            )
            self._emotion = _Stamped(value, event.timestamp)
            return True
        if event.kind == "user_location":
            if self._location and event.timestamp < self._location.timestamp:
                return False
            x, y, z = event.payload["point"]
            self._location = _Stamped((float(x), float(y), float(z)), event.timestamp)
            return True
        return False

    def snapshot(self, now: float) -> PerceptSnapshot:
        snap = PerceptSnapshot()
        if self._emotion and now - self._emotion.timestamp <= self.staleness_timeout_s:
            snap.detected_emotion = self._emotion.value  # type: ignore[assignment]
        if self._location and now - self._location.timestamp <= self.staleness_timeout_s:
            snap.location = self._location.value  # type: ignore[assignment]
        return snap
