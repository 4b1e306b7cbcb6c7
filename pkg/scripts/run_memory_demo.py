#!/usr/bin/env python3
"""Long-term memory demo: a fact from one session is recalled in the next.

Session 1 (user "sam") states a fact; closing the session flushes it into
the user's episodic vector space. Session 2 asks about it: the segment is
retrieved and the answer restates the fact. Prints the retrieved passages
with their similarity scores.
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
        "match": "favorite color is teal",
        "response": "Answer: Teal, lovely choice. I will remember that.\n"
        "Emotion: happiness\nIntensity: 0.3\nCause: user\nCategory: statement",
    },
    {
        "match": "what is my favorite color",
        "response": "Answer: You told me before: your favorite color is teal.\n"
        "Emotion: happiness\nIntensity: 0.5\nCause: user\nCategory: question",
    },
]


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "rules.json").write_text(json.dumps(RULES), encoding="utf-8")
        settings = load_settings(None)
        settings.data_dir = str(tmp / "data")
        settings.provider.script_path = str(tmp / "rules.json")
        settings.tools.enabled = []
        runtime = Runtime(settings)

        s1 = runtime.create_session(user_id="sam")
        print("=== session 1 ===")
        response, _ = runtime.run_turn(s1.session_id, "By the way, my favorite color is teal.")
        print(f"  user:  By the way, my favorite color is teal.")
        print(f"  agent: {response.answer}")
        runtime.close_session(s1.session_id)
        print(f"  (session closed; {len(runtime.memory.list_segments('sam'))} segment stored)")

        s2 = runtime.create_session(user_id="sam")
        print("=== session 2 (same user, later) ===")
        response, _ = runtime.run_turn(s2.session_id, "Do you remember what is my favorite color?")
        print(f"  user:  Do you remember what is my favorite color?")
        for p in response.memories_used:
            preview = p.chunk.text.replace("\n", " | ")
            print(f"  retrieved memory (rank {p.rank}, score {p.score:.3f}): {preview}")
        print(f"  agent: {response.answer}")
        runtime.close_session(s2.session_id)


if __name__ == "__main__":
    main()
