import json

import httpx
import pytest

from aria.errors import ConfigError, ProtocolError, ProviderUnavailableError, ValidationError
from aria.llm import (
    ChatMessage,
    CompletionRequest,
    HttpChatProvider,
    ScriptedProvider,
    ScriptedRule,
    load_script,
)


def req(*contents: str, observation: bool = False) -> CompletionRequest:
    messages = [ChatMessage(role="system", content="persona")]
    for c in contents:
        messages.append(ChatMessage(role="user", content=c))
        messages.append(ChatMessage(role="assistant", content="ok"))
    messages.append(ChatMessage(role="user", content=contents[-1]))
    if observation:
        messages.append(ChatMessage(role="assistant", content="Action: x"))
        messages.append(ChatMessage(role="user", content="Observation: result text"))
    return CompletionRequest(messages=messages)


class TestMessages:
    def test_roles_validated(self):
        with pytest.raises(ValidationError):
            ChatMessage(role="wizard", content="x")

    def test_empty_user_content_rejected(self):
        with pytest.raises(ValidationError):
            ChatMessage(role="user", content="")

    def test_request_needs_system_first(self):
        with pytest.raises(ValidationError):
            CompletionRequest(messages=[ChatMessage(role="user", content="hi")])

    def test_wire_payload_shape(self):
        r = CompletionRequest(
            messages=[
                ChatMessage(role="system", content="s"),
                ChatMessage(role="user", content="u"),
            ],
            temperature=0.0,
            max_output=64,
            stop_markers=["END"],
        )
        payload = r.wire_payload("test-model")
        assert payload == {
            "model": "test-model",
            "messages": [{"role": "system", "content": "s"}, {"role": "user", "content": "u"}],
            "temperature": 0.0,
            "max_tokens": 64,
            "stop": ["END"],
        }

    def test_wire_round_trip(self):
        r = CompletionRequest(
            messages=[
                ChatMessage(role="system", content="s"),
                ChatMessage(role="user", content="hello é世"),
            ]
        )
        parsed = json.loads(json.dumps(r.wire_payload("m")))
        rebuilt = CompletionRequest(
            messages=[ChatMessage(role=m["role"], content=m["content"]) for m in parsed["messages"]],
            temperature=parsed["temperature"],
        )
        assert rebuilt.wire_payload("m") == r.wire_payload("m")

    def test_wire_golden_file(self):
        from pathlib import Path

        r = CompletionRequest(
            messages=[
                ChatMessage(role="system", content="You are a helpful desk agent."),
                ChatMessage(role="user", content="What are the opening hours?"),
                ChatMessage(role="assistant", content="Answer: Nine to five."),
                ChatMessage(role="user", content="Observation: desk opens 09:00"),
            ],
            temperature=0.2,
            max_output=256,
            stop_markers=["Observation:"],
        )
        serialized = json.dumps(r.wire_payload("chat-model"), indent=2, ensure_ascii=False)
        golden = Path(__file__).parent / "golden" / "wire_request.json"
        import os

        if os.environ.get("ARIA_REGEN_GOLDENS"):
            golden.write_text(serialized + "\n", encoding="utf-8")
        assert json.loads(serialized) == json.loads(golden.read_text(encoding="utf-8"))


class TestScriptedProvider:
    def test_substring_match(self):
        p = ScriptedProvider([ScriptedRule(match="weather", response="sunny")])
        assert p.complete(req("what's the weather like?")) == "sunny"

    def test_no_match_falls_back(self):
        p = ScriptedProvider([ScriptedRule(match="weather", response="sunny")], fallback="dunno")
        assert p.complete(req("tell me a joke")) == "dunno"

    def test_deterministic(self):
        p = ScriptedProvider([ScriptedRule(match="x", response="y")])
        r = req("say x")
        assert p.complete(r) == p.complete(r) == "y"

    def test_first_match_wins_order_sensitive(self):
        a = ScriptedProvider(
            [ScriptedRule(match="weather in geneva", response="specific"),
             ScriptedRule(match="weather", response="generic")]
        )
        b = ScriptedProvider(
            [ScriptedRule(match="weather", response="generic"),
             ScriptedRule(match="weather in geneva", response="specific")]
        )
        question = req("weather in Geneva please")
        assert a.complete(question) == "specific"
        assert b.complete(question) == "generic"

    def test_consume_once(self):
        p = ScriptedProvider(
            [ScriptedRule(match="hi", response="first", consume_once=True),
             ScriptedRule(match="hi", response="second")]
        )
        assert p.complete(req("hi")) == "first"
        assert p.complete(req("hi")) == "second"

    def test_observation_gate(self):
        p = ScriptedProvider(
            [ScriptedRule(match="weather", when_observation=False, response="Action: weather_search"),
             ScriptedRule(match="weather", when_observation=True, response="Answer: 18C")]
        )
        assert p.complete(req("weather?")) == "Action: weather_search"
        assert p.complete(req("weather?", observation=True)) == "Answer: 18C"

    def test_match_targets_utterance_not_observation(self):
        p = ScriptedProvider([ScriptedRule(match="result text", response="leaked")], fallback="ok")
        assert p.complete(req("weather?", observation=True)) == "ok"

    def test_reset_restores_consume_once(self):
        p = ScriptedProvider([ScriptedRule(match="a", response="r", consume_once=True)], fallback="f")
        assert p.complete(req("a")) == "r"
        assert p.complete(req("a")) == "f"
        p.reset()
        assert p.complete(req("a")) == "r"


class TestScriptLoading:
    def test_empty_rules_always_fallback(self, tmp_path):
        path = tmp_path / "rules.json"
        path.write_text(json.dumps({"fallback": "nothing", "rules": []}))
        p = load_script(path)
        assert p.complete(req("anything")) == "nothing"

    def test_array_form(self, tmp_path):
        path = tmp_path / "rules.json"
        path.write_text(json.dumps([{"match": "a", "response": "b"}]))
        assert load_script(path).complete(req("say a")) == "b"

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('[\n{"match": "a", }\n]')
        with pytest.raises(ConfigError, match=r":2:"):
            load_script(path)

    def test_duplicate_after_unconditional_rejected(self, tmp_path):
        path = tmp_path / "dup.json"
        path.write_text(
            json.dumps([
                {"match": "hello", "response": "a"},
                {"match": "hello", "response": "b"},
            ])
        )
        with pytest.raises(ConfigError, match="unreachable"):
            load_script(path)

    def test_anything_after_catch_all_rejected(self):
        with pytest.raises(ConfigError, match="unreachable"):
            ScriptedProvider(
                [ScriptedRule(match="", response="everything"),
                 ScriptedRule(match="x", response="never")]
            )

    def test_duplicate_after_consume_once_allowed(self):
        ScriptedProvider(
            [ScriptedRule(match="x", response="a", consume_once=True),
             ScriptedRule(match="x", response="b")]
        )


class TestHttpProvider:
    def test_success(self, monkeypatch):
        def handler(request):
            body = json.loads(request.content)
            assert body["model"] == "m"
            return httpx.Response(200, json={"choices": [{"message": {"content": "hi there"}}]})

        transport = httpx.MockTransport(handler)
        monkeypatch.setattr(
            httpx, "post", lambda url, **kw: httpx.Client(transport=transport).post(url, **kw)
        )
        provider = HttpChatProvider(endpoint="http://llm.test", model="m", sleep=lambda _: None)
        assert provider.complete(req("hello")) == "hi there"

    def test_retries_then_succeeds(self, monkeypatch):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] < 3:
                return httpx.Response(503)
            return httpx.Response(200, json={"choices": [{"message": {"content": "late"}}]})

        transport = httpx.MockTransport(handler)
        monkeypatch.setattr(
            httpx, "post", lambda url, **kw: httpx.Client(transport=transport).post(url, **kw)
        )
        provider = HttpChatProvider(endpoint="http://llm.test", model="m", sleep=lambda _: None)
        assert provider.complete(req("x")) == "late"
        assert calls["n"] == 3

    def test_exhausted_retries(self, monkeypatch):
        transport = httpx.MockTransport(lambda r: httpx.Response(500))
        monkeypatch.setattr(
            httpx, "post", lambda url, **kw: httpx.Client(transport=transport).post(url, **kw)
        )
        provider = HttpChatProvider(endpoint="http://llm.test", model="m", sleep=lambda _: None)
        with pytest.raises(ProviderUnavailableError):
            provider.complete(req("x"))

    def test_malformed_payload(self, monkeypatch):
        transport = httpx.MockTransport(lambda r: httpx.Response(200, json={"weird": 1}))
        monkeypatch.setattr(
            httpx, "post", lambda url, **kw: httpx.Client(transport=transport).post(url, **kw)
        )
        provider = HttpChatProvider(endpoint="http://llm.test", model="m", sleep=lambda _: None)
        with pytest.raises(ProtocolError):
            provider.complete(req("x"))
