#!/usr/bin/env python3
"""Record a scripted service session for the console test suite.

Runs the real service (scripted provider, fixture tools, hash embedder),
drives a three-turn session over HTTP while capturing the raw SSE byte
stream, and writes everything the console tests need into
frontend/tests/fixtures/recorded_session.json.

Scenario: the user is known from an earlier session (one stored episodic
segment) and one knowledge document is ingested. Turn 1 greets, turn 2
calls the weather tool, turn 3 recalls the stored fact.
"""

import json
import socket
import sys
import tempfile
import threading
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import httpx
import uvicorn

from aria.config import load_settings
from aria.runtime import Runtime
from aria.service import build_app

RULES = [
    {
        "match": "weather",
        "when_observation": False,
        "response": 'Thought: I need live data.\nAction: weather_search\nAction Input: {"location": "Geneva"}',
    },
    {
        "match": "weather",
        "when_observation": True,
        "response": "Answer: Right now in Geneva it is 18°C with light rain.\n"
        "Emotion: happiness\nIntensity: 0.4\nCause: none\nCategory: question",
    },
    {
        "match": "favorite color is teal",
        "response": "Answer: Teal, lovely choice. I will remember that.\n"
        "Emotion: happiness\nIntensity: 0.3\nCause: user\nCategory: statement",
    },
    {
        "match": "what is my favorite color",
        "response": "Answer: You told me before: your favorite color is teal.\n"
        "Emotion: happiness\nIntensity: 0.5\nCause: user\nCategory: question",
    },
    {
        "match": "hello",
        "response": "Answer: Hello again! Good to see you.\n"
        "Emotion: happiness\nIntensity: 0.6\nCause: user\nCategory: greeting",
    },
]

TURNS = [
    "hello!",
    "what's the weather in Geneva?",
    "so, what is my favorite color?",
]


def main() -> None:
    out_path = Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures"
    out_path.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "rules.json").write_text(json.dumps(RULES), encoding="utf-8")
        (tmp / "fixtures").mkdir()
        (tmp / "fixtures" / "weather_search.json").write_text(
            json.dumps({'{"location": "Geneva"}': "Geneva: 18°C, light rain"}),
            encoding="utf-8",
        )
        settings = load_settings(None)
        settings.data_dir = str(tmp / "data")
        settings.provider.script_path = str(tmp / "rules.json")
        settings.tools.fixture_dir = str(tmp / "fixtures")
        runtime = Runtime(settings)
        app = build_app(runtime)

        sock = socket.socket()
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
        sock.close()
        server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error"))
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        while not server.started:
            time.sleep(0.01)
        base = f"http://127.0.0.1:{port}"

        # prior session: store the fact, flush it as an episodic segment
        prior = httpx.post(f"{base}/v1/sessions", json={"user_id": "sam"}).json()
        httpx.post(
            f"{base}/v1/sessions/{prior['session_id']}/utterance",
            json={"text": "by the way, my favorite color is teal"},
            timeout=10,
        )
        httpx.delete(f"{base}/v1/sessions/{prior['session_id']}")

        httpx.post(
            f"{base}/v1/knowledge/ingest",
            json={"documents": [{"doc_id": "handbook", "source": "docs",
                                  "text": "The reception desk is staffed from nine to five on weekdays."}]},
        )

        session = httpx.post(f"{base}/v1/sessions", json={"user_id": "sam"}).json()
        sid = session["session_id"]

        sse_chunks: list[str] = []
        stream_ready = threading.Event()
        done = threading.Event()

        def capture() -> None:
            with httpx.stream("GET", f"{base}/v1/sessions/{sid}/events", timeout=30) as resp:
                for chunk in resp.iter_text():
                    sse_chunks.append(chunk)
                    if ": keepalive" in chunk:
                        stream_ready.set()
                    if "".join(sse_chunks).count("event: behavior_script") >= len(TURNS):
                        done.set()
                        return

        capture_thread = threading.Thread(target=capture, daemon=True)
        capture_thread.start()
        assert stream_ready.wait(timeout=10), "SSE stream did not come up"

        responses = []
        for text in TURNS:
            resp = httpx.post(
                f"{base}/v1/sessions/{sid}/utterance", json={"text": text}, timeout=30
            )
            responses.append(resp.json())
        assert done.wait(timeout=10), "did not see all behavior_script frames"
        capture_thread.join(timeout=10)

        weather_turn = responses[1]["turn_id"]
        trace = httpx.get(f"{base}/v1/sessions/{sid}/turns/{weather_turn}/trace").json()
        segments = httpx.get(f"{base}/v1/users/sam/memory/segments").json()
        httpx.delete(f"{base}/v1/sessions/{sid}")

        server.should_exit = True
        thread.join(timeout=5)

    fixture = {
        "base_note": "captured from a live scripted service run by scripts/record_console_fixture.py",
        "session": session,
        "turn_texts": TURNS,
        "responses": responses,
        "sse_text": "".join(sse_chunks),
        "weather_trace": trace,
        "segments": segments,
    }
    target = out_path / "recorded_session.json"
    target.write_text(json.dumps(fixture, ensure_ascii=False, indent=2), encoding="utf-8")
    frames = fixture["sse_text"].count("event: turn_event")
    print(f"wrote {target} ({frames} turn_event frames, {len(responses)} turns)")


if __name__ == "__main__":
    main()
