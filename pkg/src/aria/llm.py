"""Chat-completion gateway.

`HttpChatProvider` speaks the widely adopted chat-completion JSON dialect
(model, messages[{role, content}], temperature) against any configured
endpoint, with exponential-backoff retries on transient failures.

`ScriptedProvider` answers from an ordered rule list and is the backbone of
every offline test and demo: rules match a substring of the last real user
utterance, optionally gated on whether a tool observation has been fed back
into the conversation, and may be single-use. First matching rule wins.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import httpx

from .errors import ConfigError, ProtocolError, ProviderUnavailableError, ValidationError

ROLES = ("system", "user", "assistant", "tool")

OBSERVATION_PREFIX = "Observation:"

DEFAULT_FALLBACK = "I am not sure how to respond to that."


@dataclass
class ChatMessage:
    role: str
    content: str
    name: str | None = None
    timestamp: float | None = None

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValidationError(f"unknown role {self.role!r}")
        if self.role in ("user", "assistant") and not self.content:
            raise ValidationError(f"{self.role} message must have content")


@dataclass
class CompletionRequest:
    messages: list[ChatMessage]
    temperature: float = 0.2
    max_output: int | None = None
    stop_markers: list[str] | None = None

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValidationError("request needs at least one message")
        if self.messages[0].role != "system":
            raise ValidationError("first message must have role system")
        if self.temperature < 0:
            raise ValidationError("temperature must be >= 0")

    def wire_payload(self, model: str) -> dict:
        payload: dict = {
            "model": model,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "temperature": self.temperature,
        }
        if self.max_output is not None:
            payload["max_tokens"] = self.max_output
        if self.stop_markers:
            payload["stop"] = self.stop_markers
        return payload


class LLMProvider(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


class HttpChatProvider:
    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str = "",
        timeout_s: float = 30.0,
        retries: int = 3,
        backoff_s: float = 0.5,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.retries = retries
        self.backoff_s = backoff_s
        self._sleep = sleep

    def complete(self, request: CompletionRequest) -> str:
        headers = {}
        key = os.environ.get(self.api_key_env, "") if self.api_key_env else ""
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = request.wire_payload(self.model)
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = httpx.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout_s
                )
                if resp.status_code >= 500:
                    raise httpx.TransportError(f"server error {resp.status_code}")
                resp.raise_for_status()
                body = resp.json()
                try:
                    return body["choices"][0]["message"]["content"]
                except (KeyError, IndexError, TypeError) as exc:
                    raise ProtocolError(f"unexpected completion payload: {body!r}") from exc
            except (httpx.TimeoutException, httpx.TransportError) as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    self._sleep(self.backoff_s * (2**attempt))
            except httpx.HTTPStatusError as exc:
                raise ProviderUnavailableError(f"provider rejected request: {exc}") from exc
        raise ProviderUnavailableError(
            f"provider unreachable after {self.retries} attempts: {last_error}"
        )


@dataclass
class ScriptedRule:
    """One fixture rule.

    `match` is a case-insensitive substring tested against the last real user
    utterance (tool observations fed back as user messages are skipped).
    `when_observation` gates on whether such an observation exists after that
    utterance: True = only then, False = only without one, None = either.
    """

    match: str
    response: str
    when_observation: bool | None = None
    consume_once: bool = False
    consumed: bool = field(default=False, compare=False)


def _split_conversation(messages: list[ChatMessage]) -> tuple[str, bool]:
    """Last real user utterance and whether an observation follows it."""
    has_observation = False
    for msg in reversed(messages):
        if msg.role != "user":
            continue
        if msg.content.startswith(OBSERVATION_PREFIX):
            has_observation = True
            continue
        return msg.content, has_observation
    return "", has_observation


class ScriptedProvider:
    """Deterministic rule-based provider for offline runs."""

    def __init__(self, rules: list[ScriptedRule], fallback: str = DEFAULT_FALLBACK) -> None:
        _validate_rules(rules)
        self.rules = rules
        self.fallback = fallback
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> str:
        utterance, has_observation = _split_conversation(request.messages)
        needle_source = utterance.lower()
        with self._lock:
            for rule in self.rules:
                if rule.consume_once and rule.consumed:
                    continue
                if rule.when_observation is not None and rule.when_observation != has_observation:
                    continue
                if rule.match.lower() in needle_source:
                    if rule.consume_once:
                        rule.consumed = True
                    return rule.response
        return self.fallback

    def reset(self) -> None:
        with self._lock:
            for rule in self.rules:
                rule.consumed = False


def _validate_rules(rules: list[ScriptedRule]) -> None:
    unconditional_seen = False
    seen: list[tuple[str, bool | None]] = []
    for i, rule in enumerate(rules):
        key = (rule.match.lower(), rule.when_observation)
        if unconditional_seen:
            raise ConfigError(f"rule {i} is unreachable: follows an unconditional rule")
        if key in seen:
            raise ConfigError(
                f"rule {i} is unreachable: duplicates an earlier always-available rule"
            )
        if not rule.consume_once:
            seen.append(key)
            if rule.match == "" and rule.when_observation is None:
                unconditional_seen = True


def load_script(path: str | Path) -> ScriptedProvider:
    """Load a scripted provider from a JSON rules file.

    The file is either a JSON array of rule objects or an object with
    optional "fallback" and a "rules" array. Rule objects carry `match`,
    `response`, and optional `when_observation` / `consume_once`.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read script {path}: {exc}") from exc
    fallback = DEFAULT_FALLBACK
    if isinstance(raw, dict):
        fallback = raw.get("fallback", DEFAULT_FALLBACK)
        entries = raw.get("rules", [])
    else:
        entries = raw
    if not isinstance(entries, list):
        raise ConfigError(f"{path}: rules must be a list")
    rules = []
    for i, entry in enumerate(entries):
        try:
            rules.append(
                ScriptedRule(
                    match=entry["match"],
                    response=entry["response"],
                    when_observation=entry.get("when_observation"),
                    consume_once=bool(entry.get("consume_once", False)),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"{path}: rule {i} malformed: {exc}") from exc
    return ScriptedProvider(rules, fallback=fallback)
