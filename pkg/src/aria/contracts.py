"""Accessors for the published JSON schemas of the service wire format."""

from __future__ import annotations

import json
from importlib import resources


def load_schema(name: str) -> dict:
    """Load one of the bundled schema documents ("common" or "responses")."""
    path = resources.files("aria") / "schemas" / f"{name}.json"
    return json.loads(path.read_text(encoding="utf-8"))


def schema_ids() -> dict[str, dict]:
    """All bundled schema documents keyed by their $id."""
    docs = [load_schema("common"), load_schema("responses")]
    return {doc["$id"]: doc for doc in docs}
