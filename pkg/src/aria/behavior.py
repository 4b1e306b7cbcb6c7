"""Outbound behavior contract toward any robot or avatar control stack.

A turn's final answer, the affect snapshot, and the current percepts are
folded into one BehaviorScript: the utterance, a facial expression (emotion
category plus the balanced intensity), a gesture tag looked up from the
interaction category, and a gaze directive that targets the user's location
while it is fresh and falls back to idle otherwise. No actuation happens
here; scripts are emitted on the event stream and appended to a log.
"""

from __future__ import annotations

from dataclasses import dataclass

from .perception import PerceptSnapshot


class GestureTag:
    GREET = "greet"
    OFFENDED = "offended"
    APPRECIATIVE = "appreciative"
    EXPLAIN = "explain"
    AFFIRM = "affirm"
    NEGATE = "negate"
    FAREWELL = "farewell"
    IDLE = "idle"

    ALL = (GREET, OFFENDED, APPRECIATIVE, EXPLAIN, AFFIRM, NEGATE, FAREWELL, IDLE)


# Total over the interaction-category enumeration; unlisted -> idle.
CATEGORY_GESTURES: dict[str, str] = {
    "greeting": GestureTag.GREET,
    "insult": GestureTag.OFFENDED,
    "compliment": GestureTag.APPRECIATIVE,
    "question": GestureTag.EXPLAIN,
    "statement": GestureTag.EXPLAIN,
    "farewell": GestureTag.FAREWELL,
    "other": GestureTag.IDLE,
}


@dataclass
class BehaviorScript:
    turn_id: str
    utterance: str
    facial_expression: dict
    gesture: str
    gaze: dict
    issued_at: float

    def as_dict(self) -> dict:
        return {
            "turn_id": self.turn_id,
            "utterance": self.utterance,
            "facial_expression": self.facial_expression,
            "gesture": self.gesture,
            "gaze": self.gaze,
            "issued_at": self.issued_at,
        }


def realize(
    turn_id: str,
    answer: str,
    emotion: str,
    intensity: float,
    interaction_category: str,
    percepts: PerceptSnapshot,
    issued_at: float,
) -> BehaviorScript:
    """Build the behavior script for one completed turn."""
    gesture = CATEGORY_GESTURES.get(interaction_category, GestureTag.IDLE)
    if percepts.location is not None:
        gaze = {"mode": "look_at_user", "target": list(percepts.location)}
    else:
        gaze = {"mode": "idle", "target": None}
    return BehaviorScript(
        turn_id=turn_id,
        utterance=answer,
        facial_expression={"emotion": emotion, "intensity": intensity},
        gesture=gesture,
        gaze=gaze,
        issued_at=issued_at,
    )
