"""Prompt assembly for one turn.

The prompt is a fixed sequence of messages: the persona system block, one
instructions block (knowledge, long-term memories, user data, tool
specifications, response-format rules, in that order, each section present
even when empty), the short-term history window, and the current user
message. Rendering is deterministic: the same context always produces the
same bytes, which the golden-file tests pin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .llm import ChatMessage
from .vectorstore import RetrievedPassage

DEFAULT_PERSONA = (
    "You are {name}, a social companion agent. {role}\n"
    "Stay in character, be concise and warm, and use the provided knowledge "
    "and memories when they are relevant."
)

DEFAULT_ROLE = "You chat with visitors, remember returning users, and help with everyday questions."

# Placeholders: knowledge, memories, user_data, tools, format_rules.
DEFAULT_INSTRUCTIONS = """## Knowledge
{knowledge}

## Long-term memories
{memories}

## User data
{user_data}

## Tools
{tools}

## Response format
{format_rules}"""

FORMAT_RULES = """When you need external information, reply exactly in this form:
Thought: <why you need the tool>
Action: <tool name>
Action Input: <JSON object with the tool's input fields>

When you can answer, reply exactly in this form:
Answer: <your reply to the user>
Emotion: <happiness|sadness|anger|fear|disgust|surprise|neutral>
Intensity: <number between 0 and 1>
Cause: <user|self|third-party|none>
Category: <greeting|insult|compliment|question|statement|farewell|other>"""

EMPTY_SECTION = "(none)"


@dataclass
class PersonaConfig:
    name: str = "Aria"
    role: str = DEFAULT_ROLE
    template: str = DEFAULT_PERSONA
    instructions_template: str = DEFAULT_INSTRUCTIONS

    def render(self) -> str:
        return self.template.format(name=self.name, role=self.role)


@dataclass
class UserData:
    identity: str = "unknown user"
    detected_emotion: tuple[str, float] | None = None
    location: tuple[float, float, float] | None = None


@dataclass
class TurnContext:
    session_id: str
    user_id: str
    user_text: str
    contextualized_query: str
    retrieved_knowledge: list[RetrievedPassage] = field(default_factory=list)
    retrieved_memories: list[RetrievedPassage] = field(default_factory=list)
    chat_history: list[ChatMessage] = field(default_factory=list)
    user_data: UserData = field(default_factory=UserData)
    tool_block: str = EMPTY_SECTION


@dataclass
class PromptBundle:
    messages: list[ChatMessage]


def _passage_lines(passages: list[RetrievedPassage]) -> str:
    if not passages:
        return EMPTY_SECTION
    return "\n".join(f"[{p.rank}] {p.chunk.text}" for p in passages)


def _user_data_lines(data: UserData) -> str:
    lines = [f"Identity: {data.identity}"]
    if data.detected_emotion is not None:
        category, confidence = data.detected_emotion
        lines.append(f"Detected user emotion: {category} (confidence {confidence:.2f})")
    else:
        lines.append("Detected user emotion: (none)")
    if data.location is not None:
        x, y, z = data.location
        lines.append(f"User location: ({x:.2f}, {y:.2f}, {z:.2f}) m")
    else:
        lines.append("User location: (none)")
    return "\n".join(lines)


def render_instructions(ctx: TurnContext, template: str = DEFAULT_INSTRUCTIONS) -> str:
    return template.format(
        knowledge=_passage_lines(ctx.retrieved_knowledge),
        memories=_passage_lines(ctx.retrieved_memories),
        user_data=_user_data_lines(ctx.user_data),
        tools=ctx.tool_block or EMPTY_SECTION,
        format_rules=FORMAT_RULES,
    )


def build_prompt(ctx: TurnContext, persona: PersonaConfig) -> PromptBundle:
    messages = [
        ChatMessage(role="system", content=persona.render()),
        ChatMessage(role="system", content=render_instructions(ctx, persona.instructions_template)),
    ]
    messages.extend(ctx.chat_history)
    messages.append(ChatMessage(role="user", content=ctx.user_text))
    return PromptBundle(messages=messages)


def bundle_text(bundle: PromptBundle) -> str:
    """Canonical flattened form used by golden tests and the turn trace."""
    parts = [f"<{m.role}>\n{m.content}" for m in bundle.messages]
    return "\n\n".join(parts) + "\n"
