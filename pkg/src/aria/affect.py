"""Emotion-mood-personality dynamics in Pleasure-Arousal-Dominance space.

The model places every affective quantity in PAD space ([-1, 1] per axis):

* Personality (Big Five traits) maps linearly to a *default mood*, the
  stable attractor of the system.
* Emotions are short-lived instances anchored at a per-category PAD point,
  scaled by intensity, and decaying exponentially with time constant
  ``decay_tau``. Instances expire once their intensity falls below
  ``expiry_threshold``.
* Mood is a slow-moving PAD point. While emotions are active it is pulled
  toward their intensity-weighted center; otherwise it relaxes back to the
  personality default. Both moves are rate-limited per second and clamped
  to the cube after every update.
* Expressed intensity is the raw intensity rebalanced by how well the
  emotion aligns with the current mood (cosine similarity): mood-congruent
  emotions are amplified, incongruent ones attenuated.

All state transitions are pure functions of (state, dt); `AffectState` is a
thin stateful wrapper that serializes per-session use. Callers own the
clock: timestamps are plain seconds and never read from the wall here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import ValidationError

__all__ = [
    "PadVector",
    "PersonalityProfile",
    "EmotionCategory",
    "Cause",
    "EmotionInstance",
    "MoodState",
    "AffectConfig",
    "default_mood",
    "appraise",
    "emotion_center",
    "tick",
    "effective_intensity",
    "AffectState",
    "run_scenario",
]


def _clamp(x: float, lo: float = -1.0, hi: float = 1.0) -> float:
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class PadVector:
    """A point in Pleasure-Arousal-Dominance space, each axis in [-1, 1]."""

    pleasure: float = 0.0
    arousal: float = 0.0
    dominance: float = 0.0

    def clamped(self) -> "PadVector":
        return PadVector(_clamp(self.pleasure), _clamp(self.arousal), _clamp(self.dominance))

    def scale(self, k: float) -> "PadVector":
        return PadVector(self.pleasure * k, self.arousal * k, self.dominance * k)

    def add(self, other: "PadVector") -> "PadVector":
        return PadVector(
            self.pleasure + other.pleasure,
            self.arousal + other.arousal,
            self.dominance + other.dominance,
        )

    def sub(self, other: "PadVector") -> "PadVector":
        return self.add(other.scale(-1.0))

    def dot(self, other: "PadVector") -> float:
        return (
            self.pleasure * other.pleasure
            + self.arousal * other.arousal
            + self.dominance * other.dominance
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def distance(self, other: "PadVector") -> float:
        return self.sub(other).norm()

    def cosine(self, other: "PadVector") -> float:
        """Cosine similarity; 0 when either vector has zero norm."""
        na, nb = self.norm(), other.norm()
        if na == 0.0 or nb == 0.0:
            return 0.0
        return self.dot(other) / (na * nb)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.pleasure, self.arousal, self.dominance)

    def as_dict(self) -> dict[str, float]:
        return {"pleasure": self.pleasure, "arousal": self.arousal, "dominance": self.dominance}


ORIGIN = PadVector(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class PersonalityProfile:
    """Big Five traits, each in [-1, 1]. Immutable per agent configuration."""

    openness: float = 0.0
    conscientiousness: float = 0.0
    extraversion: float = 0.0
    agreeableness: float = 0.0
    neuroticism: float = 0.0

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if not -1.0 <= value <= 1.0:
                raise ValidationError(f"trait {name}={value} outside [-1, 1]")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (
            self.openness,
            self.conscientiousness,
            self.extraversion,
            self.agreeableness,
            self.neuroticism,
        )

    def as_dict(self) -> dict[str, float]:
        return {
            "openness": self.openness,
            "conscientiousness": self.conscientiousness,
            "extraversion": self.extraversion,
            "agreeableness": self.agreeableness,
            "neuroticism": self.neuroticism,
        }


class EmotionCategory:
    """The six basic emotion categories plus neutral, as plain strings."""

    HAPPINESS = "happiness"
    SADNESS = "sadness"
    ANGER = "anger"
    FEAR = "fear"
    DISGUST = "disgust"
    SURPRISE = "surprise"
    NEUTRAL = "neutral"

    ALL = (HAPPINESS, SADNESS, ANGER, FEAR, DISGUST, SURPRISE, NEUTRAL)

    @classmethod
    def parse(cls, value: str) -> str:
        v = value.strip().lower()
        if v not in cls.ALL:
            raise ValidationError(f"unknown emotion category: {value!r}")
        return v


class Cause:
    """Who an emotion is attributed to."""

    USER = "user"
    SELF = "self"
    THIRD_PARTY = "third-party"
    NONE = "none"

    ALL = (USER, SELF, THIRD_PARTY, NONE)

    @classmethod
    def parse(cls, value: str) -> str:
        v = value.strip().lower().replace("_", "-").replace(" ", "-")
        if v == "third-party" or v in cls.ALL:
            return v
        raise ValidationError(f"unknown cause: {value!r}")


# Personality -> PAD linear map. Rows are P, A, D; columns are the Big Five
# in O, C, E, A, N order.
DEFAULT_PERSONALITY_TO_PAD: tuple[tuple[float, ...], ...] = (
    (0.00, 0.00, 0.21, 0.59, 0.19),
    (0.15, 0.00, 0.00, 0.30, -0.57),
    (0.25, 0.17, 0.60, -0.32, 0.00),
)

DEFAULT_EMOTION_PAD_MAP: dict[str, PadVector] = {
    EmotionCategory.HAPPINESS: PadVector(0.50, 0.30, 0.20),
    EmotionCategory.SADNESS: PadVector(-0.50, -0.30, -0.40),
    EmotionCategory.ANGER: PadVector(-0.60, 0.60, 0.30),
    EmotionCategory.FEAR: PadVector(-0.60, 0.60, -0.50),
    EmotionCategory.DISGUST: PadVector(-0.40, 0.20, 0.10),
    EmotionCategory.SURPRISE: PadVector(0.20, 0.70, 0.00),
    EmotionCategory.NEUTRAL: ORIGIN,
}


@dataclass(frozen=True)
class AffectConfig:
    """Constants of the dynamics model.

    decay_tau
        Emotion half-life scale in seconds (intensity decays as exp(-t/tau)).
    expiry_threshold
        Instances below this intensity are dropped.
    pull_rate / return_rate
        Per-second rates for the mood pull toward active emotions and the
        relaxation back to the personality default.
    balance_gain
        Strength of the mood-alignment rebalancing of expressed intensity.
    """

    emotion_pad_map: dict[str, PadVector] = field(
        default_factory=lambda: dict(DEFAULT_EMOTION_PAD_MAP)
    )
    decay_tau: float = 60.0
    expiry_threshold: float = 0.05
    pull_rate: float = 0.1
    return_rate: float = 0.02
    balance_gain: float = 0.5
    personality_to_pad: tuple[tuple[float, ...], ...] = DEFAULT_PERSONALITY_TO_PAD

    def __post_init__(self) -> None:
        if self.decay_tau <= 0:
            raise ValidationError("decay_tau must be > 0")
        if not 0.0 < self.expiry_threshold < 1.0:
            raise ValidationError("expiry_threshold must be in (0, 1)")
        for name in ("pull_rate", "return_rate"):
            rate = getattr(self, name)
            if not 0.0 < rate <= 1.0:
                raise ValidationError(f"{name} must be in (0, 1] per second")
        if self.balance_gain < 0:
            raise ValidationError("balance_gain must be >= 0")
        for cat, pad in self.emotion_pad_map.items():
            if any(abs(c) > 1.0 for c in pad.as_tuple()):
                raise ValidationError(f"emotion_pad_map[{cat}] outside [-1,1]^3")


@dataclass
class EmotionInstance:
    """One live emotion.

    `intensity` and `pad` hold the *current* decayed values; `tick` refreshes
    both from the closed form base * exp(-(now - created_at) / tau), so the
    decay never accumulates floating-point drift.
    """

    category: str
    base_intensity: float
    cause: str
    created_at: float
    intensity: float
    pad: PadVector

    def intensity_at(self, now: float, config: AffectConfig) -> float:
        elapsed = max(0.0, now - self.created_at)
        return self.base_intensity * math.exp(-elapsed / config.decay_tau)


@dataclass(frozen=True)
class MoodState:
    """Current and default (personality-derived) mood, plus the clock."""

    current: PadVector
    default: PadVector
    last_update: float


def default_mood(personality: PersonalityProfile, config: AffectConfig | None = None) -> PadVector:
    """Map Big Five traits to the default PAD mood (clamped linear map)."""
    config = config or AffectConfig()
    traits = personality.as_tuple()
    rows = config.personality_to_pad
    p, a, d = (sum(coef * t for coef, t in zip(row, traits)) for row in rows)
    return PadVector(p, a, d).clamped()


def appraise(
    category: str,
    intensity: float,
    cause: str,
    now: float,
    config: AffectConfig | None = None,
) -> EmotionInstance:
    """Create a live emotion instance from an appraisal result.

    Neutral yields a PAD of the origin and never contributes to the mood
    pull. Unknown categories are rejected.
    """
    config = config or AffectConfig()
    category = EmotionCategory.parse(category)
    cause = Cause.parse(cause)
    if not 0.0 <= intensity <= 1.0:
        raise ValidationError(f"intensity {intensity} outside [0, 1]")
    anchor = config.emotion_pad_map[category]
    return EmotionInstance(
        category=category,
        base_intensity=intensity,
        cause=cause,
        created_at=now,
        intensity=intensity,
        pad=anchor.scale(intensity),
    )


def emotion_center(active: list[EmotionInstance]) -> PadVector | None:
    """Intensity-weighted mean of the non-neutral instances' PAD points.

    Returns None when no non-neutral instance is live.
    """
    live = [e for e in active if e.category != EmotionCategory.NEUTRAL]
    total = sum(e.intensity for e in live)
    if not live or total == 0.0:
        return None
    if len(live) == 1:
        return live[0].pad
    acc = ORIGIN
    for e in live:
        acc = acc.add(e.pad.scale(e.intensity))
    return acc.scale(1.0 / total)


def tick(
    mood: MoodState,
    active: list[EmotionInstance],
    dt: float,
    config: AffectConfig | None = None,
) -> tuple[MoodState, list[EmotionInstance]]:
    """Advance the affect state by dt seconds.

    Decays every instance, drops the expired ones, then moves the mood:
    toward the active-emotion center with step min(1, pull_rate*dt*S) where
    S is the summed intensity of non-neutral instances, or back toward the
    default mood with step min(1, return_rate*dt) when nothing is active.
    The result is clamped to [-1, 1]^3.
    """
    if dt <= 0:
        raise ValidationError("dt must be > 0")
    config = config or AffectConfig()
    now = mood.last_update + dt

    survivors: list[EmotionInstance] = []
    for inst in active:
        current = inst.intensity_at(now, config)
        if current < config.expiry_threshold:
            continue
        anchor = config.emotion_pad_map[inst.category]
        survivors.append(replace(inst, intensity=current, pad=anchor.scale(current)))

    center = emotion_center(survivors)
    if center is not None:
        strength = sum(
            e.intensity for e in survivors if e.category != EmotionCategory.NEUTRAL
        )
        step = min(1.0, config.pull_rate * dt * strength)
        target = center
    else:
        step = min(1.0, config.return_rate * dt)
        target = mood.default

    moved = mood.current.add(target.sub(mood.current).scale(step)).clamped()
    return MoodState(current=moved, default=mood.default, last_update=now), survivors


def effective_intensity(
    base: float,
    emotion_pad: PadVector,
    mood: PadVector,
    config: AffectConfig | None = None,
) -> float:
    """Rebalance a raw intensity by its cosine alignment with the mood.

    clamp(base * (1 + balance_gain * align), 0, 1); align is 0 whenever
    either vector has zero norm, so a neutral mood leaves base unchanged.
    """
    if not 0.0 <= base <= 1.0:
        raise ValidationError(f"base intensity {base} outside [0, 1]")
    config = config or AffectConfig()
    align = emotion_pad.cosine(mood)
    return _clamp(base * (1.0 + config.balance_gain * align), 0.0, 1.0)


class AffectState:
    """Per-session affect state: one mood plus the live emotion instances.

    Mutations are expected to be serialized by the owner (one session, one
    writer); the underlying transitions are the pure functions above.
    """

    def __init__(
        self,
        personality: PersonalityProfile,
        config: AffectConfig | None = None,
        now: float = 0.0,
    ) -> None:
        self.config = config or AffectConfig()
        self.personality = personality
        base = default_mood(personality, self.config)
        self.mood = MoodState(current=base, default=base, last_update=now)
        self.active: list[EmotionInstance] = []

    def advance_to(self, now: float) -> None:
        """Tick the state up to an absolute timestamp (no-op if not later)."""
        dt = now - self.mood.last_update
        if dt > 0:
            self.mood, self.active = tick(self.mood, self.active, dt, self.config)

    def appraise_event(self, category: str, intensity: float, cause: str, now: float) -> EmotionInstance:
        self.advance_to(now)
        inst = appraise(category, intensity, cause, now, self.config)
        self.active.append(inst)
        return inst

    def expressed_intensity(self, category: str, base: float) -> float:
        """Effective intensity of `category` at `base` under the current mood."""
        anchor = self.config.emotion_pad_map[EmotionCategory.parse(category)]
        return effective_intensity(base, anchor, self.mood.current, self.config)

    def snapshot(self) -> dict:
        return {
            "mood": self.mood.current.as_dict(),
            "default_mood": self.mood.default.as_dict(),
            "active_emotions": [
                {
                    "category": e.category,
                    "intensity": e.intensity,
                    "base_intensity": e.base_intensity,
                    "cause": e.cause,
                    "created_at": e.created_at,
                }
                for e in self.active
            ],
            "last_update": self.mood.last_update,
        }


def run_scenario(scenario: dict) -> list[dict]:
    """Step the engine over a scripted stimulus timeline.

    Scenario keys: `personality` (trait map, optional), `config` (constant
    overrides, optional), `duration_s`, `step_s`, and `stimuli`, a list of
    {"t": seconds, "category": ..., "intensity": ..., "cause": ...}.

    Returns one row per step: t, P, A, D, active_emotion (strongest live
    category or "none") and its current intensity.
    """
    traits = scenario.get("personality", {})
    personality = PersonalityProfile(**traits)
    overrides = dict(scenario.get("config", {}))
    if "emotion_pad_map" in overrides:
        overrides["emotion_pad_map"] = {
            cat: PadVector(*vec) for cat, vec in overrides["emotion_pad_map"].items()
        }
    config = AffectConfig(**overrides)
    duration = float(scenario.get("duration_s", 60.0))
    step = float(scenario.get("step_s", 1.0))
    if step <= 0 or duration < 0:
        raise ValidationError("duration_s must be >= 0 and step_s > 0")
    stimuli = sorted(scenario.get("stimuli", []), key=lambda s: float(s["t"]))

    state = AffectState(personality, config, now=0.0)
    rows: list[dict] = []
    pending = list(stimuli)
    t = 0.0
    steps = int(round(duration / step))
    for i in range(steps + 1):
        t = i * step
        while pending and float(pending[0]["t"]) <= t:
            stim = pending.pop(0)
            state.appraise_event(
                stim["category"],
                float(stim["intensity"]),
                stim.get("cause", Cause.NONE),
                now=t,
            )
        state.advance_to(t)
        strongest = max(
            (e for e in state.active), key=lambda e: e.intensity, default=None
        )
        rows.append(
            {
                "t": t,
                "P": state.mood.current.pleasure,
                "A": state.mood.current.arousal,
                "D": state.mood.current.dominance,
                "active_emotion": strongest.category if strongest else "none",
                "intensity": strongest.intensity if strongest else 0.0,
            }
        )
    return rows
