#!/usr/bin/env python3
"""Affective-system ablation: the same exchange with and without affect.

With the affect system on, a burst of positive interactions lifts the mood,
and a later happy response is expressed more intensely than its raw value
(mood-congruent amplification). With affect off, the behavior script always
carries (neutral, 0). Also dumps a short PAD trace per turn.
"""

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from aria.config import load_settings
from aria.runtime import Runtime

RULES = [
    {
        "match": "great to see you",
        "response": "Answer: And you! This makes my day.\n"
        "Emotion: happiness\nIntensity: 1.0\nCause: user\nCategory: greeting",
    },
    {
        "match": "good news",
        "response": "Answer: That is wonderful to hear!\n"
        "Emotion: happiness\nIntensity: 0.6\nCause: user\nCategory: statement",
    },
]

TURNS = ["Great to see you!", "I have good news."]


def run_variant(enabled: bool) -> None:
    label = "affect enabled" if enabled else "affect disabled"
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "rules.json").write_text(json.dumps(RULES), encoding="utf-8")
        settings = load_settings(None)
        settings.data_dir = str(tmp / "data")
        settings.provider.script_path = str(tmp / "rules.json")
        settings.tools.enabled = []
        settings.affect.enabled = enabled
        clock = {"now": 1000.0}
        runtime = Runtime(settings, clock=lambda: clock["now"])
        session = runtime.create_session(user_id="demo")
        print(f"=== {label} ===")
        for text in TURNS:
            response, script = runtime.run_turn(session.session_id, text)
            mood = session.affect.mood.current
            face = script.facial_expression
            print(f"  user:  {text}")
            print(f"  agent: {response.answer}")
            print(
                f"    expressed {face['emotion']}({face['intensity']:.3f})"
                f"  raw intensity {response.base_intensity:.2f}"
                f"  mood P={mood.pleasure:+.3f} A={mood.arousal:+.3f} D={mood.dominance:+.3f}"
            )
            clock["now"] += 10.0
        runtime.close_session(session.session_id)
        print()


def main() -> None:
    run_variant(enabled=True)
    run_variant(enabled=False)


if __name__ == "__main__":
    main()
