"""Tool registry and the four standard executors.

Tools never crash a turn: schema violations, unknown tools, upstream HTTP
failures, and executor bugs all surface as degraded Observations that flow
back to the model as text. Observation text is capped at a configurable
budget; clipped results carry truncated=True.

Each standard tool (internet search, news, weather, wikipedia) has a live
HTTP client configured by an endpoint template and a fixture mode that
answers from a JSON file keyed by the canonical input, which keeps every
test and demo offline. News and weather responses are passed through one
summarisation call on the gateway so the agent sees a short condition
summary rather than raw payloads.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import httpx

from .errors import ConfigError, ValidationError
from .llm import ChatMessage, CompletionRequest, LLMProvider

logger = logging.getLogger(__name__)

DEFAULT_OBSERVATION_BUDGET = 1500

SUMMARIZE_TEMPLATE = (
    "Summarise the following raw tool output in at most three sentences, "
    "keeping only what a person would want to hear. Output the summary only."
)

_FIELD_TYPES: dict[str, type | tuple[type, ...]] = {
    "string": str,
    "number": (int, float),
    "boolean": bool,
}


@dataclass(frozen=True)
class ToolField:
    name: str
    type: str = "string"
    required: bool = True

    def __post_init__(self) -> None:
        if self.type not in _FIELD_TYPES:
            raise ConfigError(f"unknown field type {self.type!r}")


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    input_schema: tuple[ToolField, ...]

    def __post_init__(self) -> None:
        if not self.name or not self.description:
            raise ConfigError("tool name and description must be non-empty")

    def validate_input(self, payload: dict) -> None:
        known = {f.name: f for f in self.input_schema}
        for f in self.input_schema:
            if f.required and f.name not in payload:
                raise ValidationError(f"tool {self.name!r}: missing required field {f.name!r}")
        for key, value in payload.items():
            f = known.get(key)
            if f is None:
                raise ValidationError(f"tool {self.name!r}: unknown field {key!r}")
            expected = _FIELD_TYPES[f.type]
            if isinstance(value, bool) and f.type != "boolean":
                raise ValidationError(f"tool {self.name!r}: field {key!r} must be {f.type}")
            if not isinstance(value, expected):
                raise ValidationError(f"tool {self.name!r}: field {key!r} must be {f.type}")


@dataclass
class Observation:
    text: str
    source_attribution: list[str] = field(default_factory=list)
    truncated: bool = False
    error: bool = False


@dataclass
class ToolInvocation:
    tool_name: str
    input: dict
    started_at: float
    finished_at: float
    outcome: Observation


Executor = Callable[[dict], Observation]


def clip(text: str, budget: int) -> Observation:
    if len(text) > budget:
        return Observation(text=text[:budget], truncated=True)
    return Observation(text=text)


class ToolRegistry:
    """Ordered registry; rendering and execution preserve registration order."""

    def __init__(self, observation_budget: int = DEFAULT_OBSERVATION_BUDGET) -> None:
        self.observation_budget = observation_budget
        self._tools: dict[str, tuple[ToolSpec, Executor]] = {}

    def register(self, spec: ToolSpec, executor: Executor) -> None:
        if spec.name in self._tools:
            raise ConfigError(f"tool {spec.name!r} already registered")
        self._tools[spec.name] = (spec, executor)

    def specs(self) -> list[ToolSpec]:
        return [spec for spec, _ in self._tools.values()]

    def describe_all(self) -> str:
        """Prompt block listing every active tool; byte-stable."""
        if not self._tools:
            return "(no tools available)"
        lines = []
        for spec, _ in self._tools.values():
            lines.append(f"- {spec.name}: {spec.description}")
            for f in spec.input_schema:
                req = "required" if f.required else "optional"
                lines.append(f"    input {f.name} ({f.type}, {req})")
        return "\n".join(lines)

    def execute(self, tool_name: str, payload: dict, now: Callable[[], float] = time.time) -> ToolInvocation:
        started = now()
        entry = self._tools.get(tool_name)
        if entry is None:
            outcome = Observation(text=f"tool '{tool_name}' not available", error=True)
            return ToolInvocation(tool_name, payload, started, now(), outcome)
        spec, executor = entry
        try:
            spec.validate_input(payload)
        except ValidationError as exc:
            outcome = Observation(text=f"invalid input: {exc}", error=True)
            return ToolInvocation(tool_name, payload, started, now(), outcome)
        try:
            outcome = executor(payload)
        except Exception as exc:  # error containment: the loop must survive
            logger.warning("tool %s failed: %s", tool_name, exc)
            outcome = Observation(text=f"tool '{tool_name}' failed: {exc}", error=True)
        if len(outcome.text) > self.observation_budget:
            outcome.text = outcome.text[: self.observation_budget]
            outcome.truncated = True
        return ToolInvocation(tool_name, payload, started, now(), outcome)


# ----------------------------------------------------------- standard tools

STANDARD_SPECS: dict[str, ToolSpec] = {
    "internet_search": ToolSpec(
        name="internet_search",
        description=(
            "Search the internet for up-to-date or niche information and "
            "return the top result snippets."
        ),
        input_schema=(ToolField("query"),),
    ),
    "news_search": ToolSpec(
        name="news_search",
        description="Fetch and summarise the latest news headlines on a topic.",
        input_schema=(ToolField("topic"),),
    ),
    "weather_search": ToolSpec(
        name="weather_search",
        description=(
            "Look up current weather conditions for a location and return a "
            "short condition summary."
        ),
        input_schema=(ToolField("location"),),
    ),
    "wikipedia": ToolSpec(
        name="wikipedia",
        description="Retrieve an encyclopedia summary of a topic.",
        input_schema=(ToolField("topic"),),
    ),
}

SUMMARISED_TOOLS = ("news_search", "weather_search")


def canonical_input(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False)


def fixture_executor(tool_name: str, fixture_dir: str | Path) -> Executor:
    """Answer from <fixture_dir>/<tool>.json, keyed by the canonical input."""
    path = Path(fixture_dir) / f"{tool_name}.json"

    def run(payload: dict) -> Observation:
        if not path.exists():
            return Observation(text=f"no fixtures for tool '{tool_name}'", error=True)
        table = json.loads(path.read_text(encoding="utf-8"))
        key = canonical_input(payload)
        if key not in table:
            return Observation(text=f"no fixture entry for {key}", error=True)
        return Observation(text=table[key])

    return run


def http_executor(
    tool_name: str,
    endpoint_template: str,
    timeout_s: float = 30.0,
    summarizer: LLMProvider | None = None,
) -> Executor:
    """GET the templated endpoint; optionally summarise via the gateway."""

    def run(payload: dict) -> Observation:
        url = endpoint_template.format(**payload)
        try:
            resp = httpx.get(url, timeout=timeout_s)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            return Observation(text=f"tool '{tool_name}' upstream failure: {exc}", error=True)
        try:
            body = resp.json()
            text = json.dumps(body, ensure_ascii=False)
        except ValueError:
            text = resp.text
        if summarizer is not None and tool_name in SUMMARISED_TOOLS:
            try:
                text = summarizer.complete(
                    CompletionRequest(
                        messages=[
                            ChatMessage(role="system", content=SUMMARIZE_TEMPLATE),
                            ChatMessage(role="user", content=text[:6000]),
                        ],
                        temperature=0.0,
                    )
                ).strip()
            except Exception as exc:
                logger.warning("summariser failed for %s: %s", tool_name, exc)
        return Observation(text=text)

    return run


def build_registry(
    enabled: list[str],
    mode: str = "fixture",
    fixture_dir: str | Path | None = None,
    endpoints: dict[str, str] | None = None,
    observation_budget: int = DEFAULT_OBSERVATION_BUDGET,
    summarizer: LLMProvider | None = None,
) -> ToolRegistry:
    registry = ToolRegistry(observation_budget=observation_budget)
    for name in enabled:
        spec = STANDARD_SPECS.get(name)
        if spec is None:
            raise ConfigError(f"unknown tool {name!r}")
        if mode == "fixture":
            if fixture_dir is None:
                raise ConfigError("fixture mode needs a fixture_dir")
            executor = fixture_executor(name, fixture_dir)
        elif mode == "live":
            template = (endpoints or {}).get(name)
            if not template:
                raise ConfigError(f"live mode needs an endpoint template for {name!r}")
            executor = http_executor(name, template, summarizer=summarizer)
        else:
            raise ConfigError(f"unknown tools mode {mode!r}")
        registry.register(spec, executor)
    return registry
