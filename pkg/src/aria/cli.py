"""Operator entry points.

    aria serve      --config cfg.json                 run the HTTP service
    aria ingest     --config cfg.json FILE...         chunk+embed+store documents
    aria chat       --config cfg.json [--user ID] [--scripted RULES]
    aria replay     TRANSCRIPT.jsonl --config cfg.json
    aria affect-sim --scenario S.json --out TRACE.csv

Exit codes: 0 ok, 1 usage, 2 configuration, 3 divergence or provider failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import tempfile
from pathlib import Path

from .affect import run_scenario
from .chunking import KnowledgeDoc
from .config import load_settings
from .errors import AriaError, ConfigError, ProviderUnavailableError
from .llm import load_script
from .runtime import Runtime

USAGE_EXIT = 1
CONFIG_EXIT = 2
DIVERGENCE_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse defaults to exit 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(USAGE_EXIT)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aria", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the session service")
    serve.add_argument("--config", required=True)
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)

    ingest = sub.add_parser("ingest", help="ingest knowledge documents")
    ingest.add_argument("--config", required=True)
    ingest.add_argument("files", nargs="+")

    chat = sub.add_parser("chat", help="interactive terminal chat")
    chat.add_argument("--config", required=True)
    chat.add_argument("--user", default=None)
    chat.add_argument("--scripted", default=None, help="override provider with a rules file")

    replay = sub.add_parser("replay", help="re-run a recorded session transcript")
    replay.add_argument("transcript")
    replay.add_argument("--config", required=True)

    sim = sub.add_parser("affect-sim", help="run the offline affect simulator")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--out", required=True)

    return parser


def _load_documents(path: Path) -> list[KnowledgeDoc]:
    if path.suffix.lower() == ".json":
        raw = json.loads(path.read_text(encoding="utf-8"))
        entries = raw if isinstance(raw, list) else [raw]
        return [
            KnowledgeDoc(
                doc_id=e.get("doc_id", path.stem),
                source=e.get("source", str(path)),
                text=e.get("text", ""),
                metadata=e.get("metadata", {}),
            )
            for e in entries
        ]
    text = path.read_text(encoding="utf-8")
    return [KnowledgeDoc(doc_id=path.stem, source=str(path), text=text)]


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_app

    settings = load_settings(args.config)
    if args.host:
        settings.service.host = args.host
    if args.port:
        settings.service.port = args.port
    runtime = Runtime(settings)
    app = build_app(runtime)
    try:
        uvicorn.run(app, host=settings.service.host, port=settings.service.port)
    finally:
        runtime.shutdown()
    return 0


def cmd_ingest(args) -> int:
    settings = load_settings(args.config)
    runtime = Runtime(settings)
    for name in args.files:
        path = Path(name)
        total = 0
        for doc in _load_documents(path):
            total += len(runtime.memory.ingest_document(doc))
        noun = "chunk" if total == 1 else "chunks"
        print(f"{path}: {total} {noun}")
    runtime.memory.flush()
    return 0


def cmd_chat(args) -> int:
    settings = load_settings(args.config)
    runtime = Runtime(settings)
    if args.scripted:
        provider = load_script(args.scripted)
        runtime.gateway = provider
        runtime.orchestrator.gateway = provider
    session = runtime.create_session(user_id=args.user)
    print(f"session {session.session_id} as user {session.user_id} (ctrl-d to quit)")
    try:
        while True:
            try:
                text = input("you> ").strip()
            except EOFError:
                print()
                break
            if not text:
                continue
            response, script = runtime.run_turn(session.session_id, text, block=True)
            print(f"{settings.persona.name}> {response.answer}")
            print(f"  emotion: {response.emotion}({response.intensity:.2f})"
                  f"  gesture: {script.gesture}")
            for passage in (response.knowledge_used + response.memories_used)[:5]:
                preview = passage.chunk.text.replace("\n", " ")[:80]
                print(f"  [{passage.chunk.space_id} #{passage.rank} {passage.score:.3f}] {preview}")
    finally:
        runtime.close_session(session.session_id)
        runtime.shutdown()
    return 0


def _transcript_turns(path: Path) -> list[dict]:
    """Group a session log back into turns with their recorded outputs."""
    turns: dict[str, dict] = {}
    order: list[str] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            record = json.loads(line)
            tid = record["turn_id"]
            if tid not in turns:
                turns[tid] = {"turn_id": tid}
                order.append(tid)
            if record["stage"] == "received":
                turns[tid]["text"] = record["payload"]["text"]
                turns[tid]["timestamp"] = record["timestamp"]
            elif record["stage"] == "completed":
                turns[tid]["completed"] = record["payload"]
    return [turns[t] for t in order if "text" in turns[t] and "completed" in turns[t]]


def cmd_replay(args) -> int:
    transcript = Path(args.transcript)
    if not transcript.exists():
        print(f"transcript not found: {transcript}", file=sys.stderr)
        return USAGE_EXIT
    turns = _transcript_turns(transcript)
    if not turns:
        print("transcript contains no complete turns", file=sys.stderr)
        return DIVERGENCE_EXIT

    settings = load_settings(args.config)
    clock_holder = {"now": turns[0]["timestamp"]}
    with tempfile.TemporaryDirectory(prefix="aria-replay-") as tmp:
        settings.data_dir = tmp  # replay always starts from a clean slate
        runtime = Runtime(settings, clock=lambda: clock_holder["now"])
        session = runtime.create_session()
        divergences = 0
        for turn in turns:
            clock_holder["now"] = turn["timestamp"]
            try:
                response, _ = runtime.run_turn(session.session_id, turn["text"], block=True)
            except ProviderUnavailableError as exc:
                print(f"{turn['turn_id']}: provider failure: {exc}", file=sys.stderr)
                return DIVERGENCE_EXIT
            recorded = turn["completed"]
            got = {
                "answer": response.answer,
                "emotion": response.emotion,
                "intensity": response.intensity,
                "cause": response.cause,
                "category": response.interaction_category,
            }
            expected = {k: recorded[k] for k in got}
            if got != expected:
                divergences += 1
                print(f"divergence at {turn['turn_id']}:")
                for key in got:
                    if got[key] != expected[key]:
                        print(f"  {key}: recorded {expected[key]!r} got {got[key]!r}")
        runtime.shutdown()
    if divergences:
        print(f"{divergences} diverging turn(s)")
        return DIVERGENCE_EXIT
    print(f"replayed {len(turns)} turn(s), no divergence")
    return 0


def cmd_affect_sim(args) -> int:
    scenario = json.loads(Path(args.scenario).read_text(encoding="utf-8"))
    rows = run_scenario(scenario)
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=["t", "P", "A", "D", "active_emotion", "intensity"])
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


COMMANDS = {
    "serve": cmd_serve,
    "ingest": cmd_ingest,
    "chat": cmd_chat,
    "replay": cmd_replay,
    "affect-sim": cmd_affect_sim,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return CONFIG_EXIT
    except ProviderUnavailableError as exc:
        print(f"provider failure: {exc}", file=sys.stderr)
        return DIVERGENCE_EXIT
    except AriaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
