import json

import pytest

from aria.config import load_settings
from aria.errors import ConfigError
from aria.prompting import DEFAULT_INSTRUCTIONS


def write(tmp_path, body) -> str:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(body), encoding="utf-8")
    return str(path)


def test_defaults_without_file():
    s = load_settings(None)
    assert s.memory.chunk_size == 1000
    assert s.memory.chunk_overlap == 200
    assert s.memory.knowledge_top_k == 5
    assert s.memory.history_window == 20
    assert s.max_iterations == 5
    assert s.tools.observation_budget == 1500
    assert s.affect.decay_tau == 60.0
    assert s.provider.timeout_s == 30.0
    assert s.provider.retries == 3
    assert s.provider.temperature == 0.2
    assert s.percept_staleness_s == 30.0


def test_section_overrides(tmp_path):
    cfg = write(tmp_path, {"memory": {"chunk_size": 500, "chunk_overlap": 100},
                            "max_iterations": 3})
    s = load_settings(cfg)
    assert s.memory.chunk_size == 500
    assert s.memory.chunk_overlap == 100
    assert s.memory.knowledge_top_k == 5  # untouched default
    assert s.max_iterations == 3


def test_unknown_key_rejected(tmp_path):
    cfg = write(tmp_path, {"memoryy": {}})
    with pytest.raises(ConfigError):
        load_settings(cfg)


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{\n  broken\n}", encoding="utf-8")
    with pytest.raises(ConfigError, match=":2:"):
        load_settings(str(path))


def test_env_overrides(tmp_path):
    cfg = write(tmp_path, {"provider": {"mode": "http", "endpoint": "http://file"}})
    s = load_settings(cfg, env={"ARIA_LLM_ENDPOINT": "http://env", "ARIA_LLM_MODEL": "m2"})
    assert s.provider.endpoint == "http://env"
    assert s.provider.model == "m2"


def test_relative_paths_resolve_against_config(tmp_path):
    (tmp_path / "rules.json").write_text("[]", encoding="utf-8")
    cfg = write(tmp_path, {"data_dir": "state",
                            "provider": {"mode": "scripted", "script_path": "rules.json"}})
    s = load_settings(cfg)
    assert s.data_dir == str((tmp_path / "state").resolve())
    assert s.provider.script_path == str((tmp_path / "rules.json").resolve())


def test_persona_templates_from_files(tmp_path):
    (tmp_path / "persona.txt").write_text("I am {name}. {role}", encoding="utf-8")
    (tmp_path / "instructions.txt").write_text(
        "K:{knowledge}|M:{memories}|U:{user_data}|T:{tools}|F:{format_rules}",
        encoding="utf-8",
    )
    cfg = write(
        tmp_path,
        {
            "persona": {
                "name": "Dot",
                "role": "Desk helper.",
                "template_path": "persona.txt",
                "instructions_template_path": "instructions.txt",
            }
        },
    )
    s = load_settings(cfg)
    assert s.persona.render() == "I am Dot. Desk helper."
    assert s.persona.instructions_template.startswith("K:{knowledge}")


def test_persona_template_defaults():
    s = load_settings(None)
    assert s.persona.instructions_template == DEFAULT_INSTRUCTIONS


def test_missing_template_file(tmp_path):
    cfg = write(tmp_path, {"persona": {"template_path": "missing.txt"}})
    with pytest.raises(ConfigError):
        load_settings(cfg)


def test_affect_settings_build():
    s = load_settings(None)
    s.affect.personality = {"extraversion": 0.5}
    personality, config = s.affect.build()
    assert personality.extraversion == 0.5
    assert config.decay_tau == 60.0
