"""Sliding-window segmentation of conversations into episodic memory units.

A session's interactions (one user message + one assistant message each) are
grouped into five-interaction segments; consecutive full segments share
exactly one interaction, so a new segment is emitted every four fresh
interactions. Closing the session (or an episode within it) flushes a
trailing partial segment covering whatever is not yet stored, plus one
overlap interaction when available.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError
from .llm import ChatMessage

SEGMENT_WINDOW = 5
SEGMENT_STRIDE = 4


def user_space(user_id: str) -> str:
    return f"user:{user_id}"


@dataclass
class Interaction:
    """One back-and-forth: exactly one user and one assistant message."""

    user_message: ChatMessage
    assistant_message: ChatMessage
    index: int

    def __post_init__(self) -> None:
        if self.user_message.role != "user" or self.assistant_message.role != "assistant":
            raise ValidationError("interaction needs a user message then an assistant message")


@dataclass
class EpisodicSegment:
    user_id: str
    session_id: str
    interactions: list[Interaction]
    finalized_at: float
    start: int
    end: int

    def render(self) -> str:
        """Canonical text form used for embedding and storage."""
        lines = []
        for it in self.interactions:
            lines.append(f"User: {it.user_message.content}")
            lines.append(f"Assistant: {it.assistant_message.content}")
        return "\n".join(lines)

    def chunk_id(self) -> str:
        return f"{self.session_id}/seg/{self.start}-{self.end}"


@dataclass
class SessionSegmenter:
    """Accumulates a session's interactions and emits segments.

    `add` returns the full segments that became due; `flush` returns the
    trailing partial segment (or nothing when coverage is already complete)
    and restarts the window so a later episode in the same session does not
    straddle the flush point.
    """

    user_id: str
    session_id: str
    interactions: list[Interaction] = field(default_factory=list)
    covered_until: int = 0
    window_base: int = 0

    def add(self, interaction: Interaction, now: float) -> list[EpisodicSegment]:
        expected = len(self.interactions)
        if interaction.index != expected:
            raise ValidationError(
                f"interaction index {interaction.index} out of order (expected {expected})"
            )
        self.interactions.append(interaction)
        emitted: list[EpisodicSegment] = []
        n = len(self.interactions)
        if n - self.window_base >= SEGMENT_WINDOW and (
            n - self.window_base - SEGMENT_WINDOW
        ) % SEGMENT_STRIDE == 0:
            start = n - SEGMENT_WINDOW
            emitted.append(self._segment(start, n, now))
            self.covered_until = n
        return emitted

    def flush(self, now: float) -> EpisodicSegment | None:
        """Emit the trailing partial segment, if any interactions are uncovered."""
        n = len(self.interactions)
        if n <= self.covered_until:
            self.window_base = n
            return None
        start = self.covered_until - 1 if self.covered_until > 0 else 0
        start = max(start, self.window_base)
        segment = self._segment(start, n, now)
        self.covered_until = n
        self.window_base = n
        return segment

    def _segment(self, start: int, end: int, now: float) -> EpisodicSegment:
        return EpisodicSegment(
            user_id=self.user_id,
            session_id=self.session_id,
            interactions=self.interactions[start:end],
            finalized_at=now,
            start=start,
            end=end,
        )
