"""Runtime configuration: one JSON file plus environment overrides.

Every constant that the tests pin has its default here; a config file only
needs the keys it wants to change. Environment variables override the file:

    ARIA_DATA_DIR, ARIA_LLM_ENDPOINT, ARIA_LLM_MODEL, ARIA_LLM_API_KEY_ENV,
    ARIA_EMBED_ENDPOINT
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .affect import AffectConfig, PadVector, PersonalityProfile
from .errors import ConfigError
from .prompting import PersonaConfig


@dataclass
class ProviderSettings:
    mode: str = "scripted"  # scripted | http
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "ARIA_API_KEY"
    timeout_s: float = 30.0
    retries: int = 3
    temperature: float = 0.2
    script_path: str = ""
    fallback: str = "I am not sure how to respond to that."


@dataclass
class EmbeddingSettings:
    mode: str = "hash"  # hash | http
    dimension: int = 256
    endpoint: str = ""
    model: str = ""
    api_key_env: str = ""
    timeout_s: float = 30.0


@dataclass
class MemorySettings:
    chunk_size: int = 1000
    chunk_overlap: int = 200
    knowledge_top_k: int = 5
    memory_top_k: int = 5
    history_window: int = 20


@dataclass
class AffectSettings:
    enabled: bool = True
    personality: dict = field(default_factory=dict)
    decay_tau: float = 60.0
    expiry_threshold: float = 0.05
    pull_rate: float = 0.1
    return_rate: float = 0.02
    balance_gain: float = 0.5
    emotion_pad_map: dict | None = None

    def build(self) -> tuple[PersonalityProfile, AffectConfig]:
        personality = PersonalityProfile(**self.personality)
        kwargs: dict = {
            "decay_tau": self.decay_tau,
            "expiry_threshold": self.expiry_threshold,
            "pull_rate": self.pull_rate,
            "return_rate": self.return_rate,
            "balance_gain": self.balance_gain,
        }
        if self.emotion_pad_map is not None:
            kwargs["emotion_pad_map"] = {
                cat: PadVector(*vec) for cat, vec in self.emotion_pad_map.items()
            }
        return personality, AffectConfig(**kwargs)


@dataclass
class ToolsSettings:
    mode: str = "fixture"  # fixture | live
    enabled: list[str] = field(
        default_factory=lambda: ["internet_search", "news_search", "weather_search", "wikipedia"]
    )
    fixture_dir: str = ""
    endpoints: dict = field(default_factory=dict)
    observation_budget: int = 1500


@dataclass
class ServiceSettings:
    host: str = "127.0.0.1"
    port: int = 8080


@dataclass
class AgentSettings:
    data_dir: str = "data"
    persona: PersonaConfig = field(default_factory=PersonaConfig)
    provider: ProviderSettings = field(default_factory=ProviderSettings)
    embedding: EmbeddingSettings = field(default_factory=EmbeddingSettings)
    memory: MemorySettings = field(default_factory=MemorySettings)
    affect: AffectSettings = field(default_factory=AffectSettings)
    tools: ToolsSettings = field(default_factory=ToolsSettings)
    service: ServiceSettings = field(default_factory=ServiceSettings)
    max_iterations: int = 5
    percept_staleness_s: float = 30.0

    def as_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {
    "persona": PersonaConfig,
    "provider": ProviderSettings,
    "embedding": EmbeddingSettings,
    "memory": MemorySettings,
    "affect": AffectSettings,
    "tools": ToolsSettings,
    "service": ServiceSettings,
}

_ENV_OVERRIDES = {
    "ARIA_DATA_DIR": ("data_dir",),
    "ARIA_LLM_ENDPOINT": ("provider", "endpoint"),
    "ARIA_LLM_MODEL": ("provider", "model"),
    "ARIA_LLM_API_KEY_ENV": ("provider", "api_key_env"),
    "ARIA_EMBED_ENDPOINT": ("embedding", "endpoint"),
}


def _resolve_persona_templates(section: dict, base: Path | None) -> dict:
    """Template text may live in files: template_path / instructions_template_path."""
    for path_key, text_key in (
        ("template_path", "template"),
        ("instructions_template_path", "instructions_template"),
    ):
        rel = section.pop(path_key, None)
        if rel:
            path = Path(rel)
            if base is not None and not path.is_absolute():
                path = base / path
            try:
                section[text_key] = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read persona template {path}: {exc}") from exc
    return section


def load_settings(path: str | Path | None = None, env: dict | None = None) -> AgentSettings:
    """Build settings from an optional JSON file and environment overrides."""
    env = os.environ if env is None else env
    raw: dict = {}
    base: Path | None = None
    if path is not None:
        path = Path(path)
        base = path.parent
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config root must be an object")

    settings = AgentSettings()
    for key, value in raw.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key!r} must be an object")
            if key == "persona":
                value = _resolve_persona_templates(dict(value), base)
            section_cls = _SECTIONS[key]
            try:
                setattr(settings, key, section_cls(**value))
            except TypeError as exc:
                raise ConfigError(f"config section {key!r}: {exc}") from exc
        elif hasattr(settings, key):
            setattr(settings, key, value)
        else:
            raise ConfigError(f"unknown config key {key!r}")

    for var, target in _ENV_OVERRIDES.items():
        if var in env and env[var]:
            obj = settings
            for attr in target[:-1]:
                obj = getattr(obj, attr)
            setattr(obj, target[-1], env[var])

    # Paths in the file are relative to the file itself.
    if base is not None:
        for resolve in (
            ("data_dir",),
            ("provider", "script_path"),
            ("tools", "fixture_dir"),
        ):
            obj = settings
            for attr in resolve[:-1]:
                obj = getattr(obj, attr)
            value = getattr(obj, resolve[-1])
            if value and not Path(value).is_absolute():
                setattr(obj, resolve[-1], str((base / value).resolve()))
    return settings
