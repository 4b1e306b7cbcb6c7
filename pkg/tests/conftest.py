import json
import socket
import threading
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from aria.config import AgentSettings, load_settings


def write_rules(path: Path, rules: list[dict], fallback: str | None = None) -> Path:
    body: dict | list = rules if fallback is None else {"fallback": fallback, "rules": rules}
    path.write_text(json.dumps(body), encoding="utf-8")
    return path


def write_fixture(fixture_dir: Path, tool: str, table: dict) -> None:
    fixture_dir.mkdir(parents=True, exist_ok=True)
    (fixture_dir / f"{tool}.json").write_text(json.dumps(table), encoding="utf-8")


def offline_settings(tmp_path: Path) -> AgentSettings:
    """Settings for a fully offline runtime: scripted LLM, hash embedder,
    fixture tools, data under tmp_path."""
    settings = load_settings(None)
    settings.data_dir = str(tmp_path / "data")
    settings.tools.fixture_dir = str(tmp_path / "fixtures")
    Path(settings.tools.fixture_dir).mkdir(parents=True, exist_ok=True)
    return settings


class ManualClock:
    def __init__(self, start: float = 1000.0) -> None:
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, dt: float) -> float:
        self.now += dt
        return self.now


@pytest.fixture
def clock() -> ManualClock:
    return ManualClock()


@contextmanager
def live_server(app):
    """Serve an app on a real socket; needed for endless SSE streams, which
    the in-process test client would buffer forever."""
    import uvicorn

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server failed to start")
        time.sleep(0.01)
    try:
        yield f"http://127.0.0.1:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=5)


# One pass/fail line per acceptance criterion at the end of the run.
_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::", 1)[1]
    _acceptance_results.append((name, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"{outcome}  {name}")
