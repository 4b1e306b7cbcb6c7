"""Line-tag grammar for model output.

Tool requests:

    Thought: <free text>
    Action: <tool name>
    Action Input: {"field": "value"}

Final responses:

    Thought: <optional>
    Answer: <free text, may span lines>
    Emotion: happiness | sadness | anger | fear | disgust | surprise | neutral
    Intensity: 0.0 .. 1.0
    Cause: user | self | third-party | none
    Category: greeting | insult | compliment | question | statement | farewell | other

Keys are case-insensitive; the first occurrence of a key wins; unknown
lines are ignored; a value runs until the next key line. Parsing is total:
any text without an Action line or an Answer line becomes a neutral
FinalResponse that carries the raw text as its answer. Note that answers
containing lines that themselves look like key lines are not representable
by this grammar (the embedded key would win on re-parse).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .affect import Cause, EmotionCategory
from .errors import ValidationError

INTERACTION_CATEGORIES = (
    "greeting",
    "insult",
    "compliment",
    "question",
    "statement",
    "farewell",
    "other",
)

_KEYS = ("thought", "action", "action input", "answer", "emotion", "intensity", "cause", "category")

_KEY_LINE = re.compile(
    r"^\s*(?P<key>" + "|".join(k.replace(" ", r"\s+") for k in _KEYS) + r")\s*:(?P<rest>.*)$",
    re.IGNORECASE,
)


@dataclass
class ToolRequest:
    tool_name: str
    tool_input: dict
    thought: str = ""


@dataclass
class FinalResponse:
    answer: str
    emotion: str = EmotionCategory.NEUTRAL
    intensity: float = 0.0
    cause: str = Cause.NONE
    interaction_category: str = "other"
    thought: str = ""


AgentDirective = ToolRequest | FinalResponse


def _collect_fields(raw: str) -> dict[str, str]:
    """First-wins key/value extraction; values run until the next key line."""
    fields: dict[str, str] = {}
    current: str | None = None
    for line in raw.split("\n"):
        m = _KEY_LINE.match(line)
        if m:
            key = re.sub(r"\s+", " ", m.group("key").lower())
            rest = m.group("rest")
            if rest.startswith(" "):
                rest = rest[1:]
            if key in fields:
                current = None  # first occurrence wins; later ones are prose
                continue
            fields[key] = rest
            current = key
        elif current is not None:
            fields[current] += "\n" + line
    return fields


def _parse_tool_input(value: str) -> dict:
    value = value.strip()
    if not value:
        return {}
    try:
        # raw_decode tolerates trailing prose after the JSON object
        parsed, _ = json.JSONDecoder().raw_decode(value)
        if isinstance(parsed, dict):
            return parsed
    except json.JSONDecodeError:
        pass
    return {"input": value}


def parse_directive(raw: str) -> AgentDirective:
    """Parse model text into a directive. Never raises."""
    if not isinstance(raw, str):
        raw = str(raw)
    fields = _collect_fields(raw)

    action = fields.get("action", "").strip()
    if action:
        return ToolRequest(
            tool_name=action,
            tool_input=_parse_tool_input(fields.get("action input", "")),
            thought=fields.get("thought", ""),
        )

    if "answer" in fields:
        emotion = EmotionCategory.NEUTRAL
        if "emotion" in fields:
            try:
                emotion = EmotionCategory.parse(fields["emotion"])
            except ValidationError:
                pass
        intensity = 0.0
        if "intensity" in fields:
            try:
                intensity = min(1.0, max(0.0, float(fields["intensity"].strip())))
            except ValueError:
                pass
        cause = Cause.NONE
        if "cause" in fields:
            try:
                cause = Cause.parse(fields["cause"])
            except ValidationError:
                pass
        category = fields.get("category", "").strip().lower()
        if category not in INTERACTION_CATEGORIES:
            category = "other"
        return FinalResponse(
            answer=fields["answer"],
            emotion=emotion,
            intensity=intensity,
            cause=cause,
            interaction_category=category,
            thought=fields.get("thought", ""),
        )

    return FinalResponse(answer=raw)


def render_directive(directive: AgentDirective) -> str:
    """Inverse of parse_directive for representable directives."""
    lines: list[str] = []
    if isinstance(directive, ToolRequest):
        if directive.thought:
            lines.append(f"Thought: {directive.thought}")
        lines.append(f"Action: {directive.tool_name}")
        lines.append(f"Action Input: {json.dumps(directive.tool_input, ensure_ascii=False)}")
    else:
        if directive.thought:
            lines.append(f"Thought: {directive.thought}")
        lines.append(f"Answer: {directive.answer}")
        lines.append(f"Emotion: {directive.emotion}")
        lines.append(f"Intensity: {directive.intensity!r}")
        lines.append(f"Cause: {directive.cause}")
        lines.append(f"Category: {directive.interaction_category}")
    return "\n".join(lines)
