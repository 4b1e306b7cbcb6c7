#!/usr/bin/env python3
"""Tool-use ablation: the same weather question with and without the tool.

Runs two offline runtimes (scripted provider, fixture weather data). The
first has the weather tool enabled and answers from the live observation;
the second has it disabled and must answer without external data. Prints
both turn traces.
"""

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from aria.config import load_settings
from aria.runtime import Runtime

QUESTION = "What's the weather like in Geneva today?"

TOOL_RULES = [
    {
        "match": "weather",
        "when_observation": False,
        "response": 'Thought: I need live data.\nAction: weather_search\nAction Input: {"location": "Geneva"}',
    },
    {
        "match": "weather",
        "when_observation": True,
        "response": "Answer: Right now in Geneva it is 18°C with light rain, take a jacket.\n"
        "Emotion: happiness\nIntensity: 0.4\nCause: none\nCategory: question",
    },
]

NO_TOOL_RULES = [
    {
        "match": "weather",
        "response": "Answer: I cannot reach live weather data right now, sorry.\n"
        "Emotion: sadness\nIntensity: 0.3\nCause: self\nCategory: question",
    }
]


def run_variant(label: str, rules: list, enabled_tools: list[str]) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "rules.json").write_text(json.dumps(rules), encoding="utf-8")
        (tmp / "fixtures").mkdir()
        (tmp / "fixtures" / "weather_search.json").write_text(
            json.dumps({'{"location": "Geneva"}': "Geneva: 18°C, light rain"}),
            encoding="utf-8",
        )
        settings = load_settings(None)
        settings.data_dir = str(tmp / "data")
        settings.provider.script_path = str(tmp / "rules.json")
        settings.tools.fixture_dir = str(tmp / "fixtures")
        settings.tools.enabled = enabled_tools
        runtime = Runtime(settings)
        session = runtime.create_session(user_id="demo")
        response, script = runtime.run_turn(session.session_id, QUESTION)
        print(f"=== {label} ===")
        print(f"  question:    {QUESTION}")
        for inv in response.tool_trace:
            print(f"  tool call:   {inv.tool_name}({inv.input}) -> {inv.outcome.text}")
        if not response.tool_trace:
            print("  tool call:   (none)")
        print(f"  answer:      {response.answer}")
        print(f"  emotion:     {response.emotion}({response.intensity:.2f})"
              f"  gesture: {script.gesture}")
        print()


def main() -> None:
    run_variant("tools enabled", TOOL_RULES,
                ["internet_search", "news_search", "weather_search", "wikipedia"])
    run_variant("weather tool disabled", NO_TOOL_RULES,
                ["internet_search", "news_search", "wikipedia"])


if __name__ == "__main__":
    main()
