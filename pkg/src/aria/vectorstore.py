"""Exact top-k cosine vector store with per-space isolation and persistence.

Spaces are independent namespaces ("knowledge", "user:<id>", ...); a query
against one space never sees another's chunks. Search is exact: every
stored vector is scored and results are ordered by cosine similarity
descending, ties broken by ascending insertion sequence.

Persistence is a snapshot file plus an append-only journal per space.
Every upsert is journaled immediately; `flush` rewrites the snapshot
(header line with dimension/count/next_seq, then one JSON record per chunk)
and truncates the journal, so a crash between flushes loses nothing.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chunking import Chunk
from .errors import ValidationError


@dataclass
class RetrievedPassage:
    chunk: Chunk
    score: float
    rank: int


def space_dir(root: Path, space_id: str) -> Path:
    """Directory layout: knowledge/ at the root, memory/<user_id>/ per user."""
    if space_id == "knowledge":
        return root / "knowledge"
    if space_id.startswith("user:"):
        return root / "memory" / space_id.split(":", 1)[1]
    return root / "spaces" / space_id


class _Space:
    def __init__(self, space_id: str, dimension: int) -> None:
        self.space_id = space_id
        self.dimension = dimension
        self.records: list[Chunk] = []
        self.by_id: dict[str, int] = {}
        self.next_seq = 0
        self.matrix: np.ndarray | None = None
        self.norms: np.ndarray | None = None
        self.lock = threading.RLock()
        self.dirty = False

    def put(self, chunk: Chunk, seq: int | None = None) -> None:
        idx = self.by_id.get(chunk.chunk_id)
        if idx is None:
            chunk.insertion_seq = self.next_seq if seq is None else seq
            self.by_id[chunk.chunk_id] = len(self.records)
            self.records.append(chunk)
        else:
            # Replacement keeps the original insertion_seq so retrieval
            # tie-breaks stay stable across re-ingestion.
            chunk.insertion_seq = self.records[idx].insertion_seq if seq is None else seq
            self.records[idx] = chunk
        self.next_seq = max(self.next_seq, chunk.insertion_seq + 1)
        self.matrix = None
        self.dirty = True

    def ensure_matrix(self) -> None:
        if self.matrix is None:
            self.matrix = np.array(
                [r.embedding for r in self.records], dtype=np.float64
            ).reshape(len(self.records), self.dimension)
            # Per-row norm, not norm(matrix, axis=1): the reduction order must
            # match a plain per-record scan so equal cosines stay bit-equal
            # and the seq tie rule fires identically everywhere.
            self.norms = np.array([float(np.linalg.norm(row)) for row in self.matrix])


class VectorStore:
    """In-memory exact-search store, optionally persisted under `root`."""

    def __init__(self, dimension: int, root: str | Path | None = None) -> None:
        if dimension <= 0:
            raise ValidationError("dimension must be > 0")
        self.dimension = dimension
        self.root = Path(root) if root is not None else None
        self._spaces: dict[str, _Space] = {}
        self._lock = threading.RLock()
        if self.root is not None:
            self._load_all()

    # ---------------------------------------------------------------- spaces

    def _space(self, space_id: str) -> _Space:
        with self._lock:
            sp = self._spaces.get(space_id)
            if sp is None:
                sp = _Space(space_id, self.dimension)
                self._spaces[space_id] = sp
            return sp

    def spaces(self) -> list[str]:
        with self._lock:
            return sorted(self._spaces)

    def size(self, space_id: str) -> int:
        return len(self._space(space_id).records)

    # ----------------------------------------------------------------- write

    def upsert(self, space_id: str, chunks: list[Chunk]) -> int:
        """Store chunks (replacing same chunk_id); returns how many were stored."""
        for c in chunks:
            if c.embedding is None or len(c.embedding) != self.dimension:
                got = "missing" if c.embedding is None else len(c.embedding)
                raise ValidationError(
                    f"chunk {c.chunk_id!r}: embedding dimension {got} != {self.dimension}"
                )
        sp = self._space(space_id)
        with sp.lock:
            for c in chunks:
                c.space_id = space_id
                sp.put(c)
                self._journal(sp, c)
        return len(chunks)

    # ------------------------------------------------------------------ read

    def retrieve(self, space_id: str, query_embedding: list[float], k: int = 5) -> list[RetrievedPassage]:
        """Exact top-k by cosine similarity, ties by ascending insertion_seq."""
        if k < 1:
            raise ValidationError("k must be >= 1")
        if len(query_embedding) != self.dimension:
            raise ValidationError(
                f"query dimension {len(query_embedding)} != {self.dimension}"
            )
        sp = self._space(space_id)
        with sp.lock:
            if not sp.records:
                return []
            sp.ensure_matrix()
            q = np.asarray(query_embedding, dtype=np.float64)
            qnorm = float(np.linalg.norm(q))
            # Scored record by record with sequential dot products. A matrix
            # product would be faster but sums in a different order, and then
            # two records whose cosines are mathematically equal can come out
            # one ulp apart, bypassing the documented seq tie rule.
            scores = np.empty(len(sp.records))
            for i, row in enumerate(sp.matrix):
                denom = sp.norms[i] * qnorm
                scores[i] = float(np.dot(row, q)) / denom if denom > 0.0 else 0.0
            order = sorted(
                range(len(sp.records)),
                key=lambda i: (-scores[i], sp.records[i].insertion_seq),
            )[:k]
            return [
                RetrievedPassage(chunk=sp.records[i], score=float(scores[i]), rank=r + 1)
                for r, i in enumerate(order)
            ]

    # ----------------------------------------------------------- persistence

    def _paths(self, space_id: str) -> tuple[Path, Path]:
        assert self.root is not None
        d = space_dir(self.root, space_id)
        return d / "snapshot.jsonl", d / "journal.jsonl"

    @staticmethod
    def _record(chunk: Chunk) -> dict:
        return {
            "id": chunk.chunk_id,
            "space": chunk.space_id,
            "span": list(chunk.span),
            "seq": chunk.insertion_seq,
            "text": chunk.text,
            "vector": chunk.embedding,
        }

    @staticmethod
    def _chunk(rec: dict) -> Chunk:
        return Chunk(
            chunk_id=rec["id"],
            space_id=rec["space"],
            text=rec["text"],
            span=(rec["span"][0], rec["span"][1]),
            embedding=rec["vector"],
            insertion_seq=rec["seq"],
        )

    def _journal(self, sp: _Space, chunk: Chunk) -> None:
        if self.root is None:
            return
        _, journal = self._paths(sp.space_id)
        journal.parent.mkdir(parents=True, exist_ok=True)
        with open(journal, "a", encoding="utf-8") as f:
            f.write(json.dumps({"op": "upsert", "record": self._record(chunk)}) + "\n")
            f.flush()
            os.fsync(f.fileno())

    def flush(self) -> None:
        """Write snapshots for dirty spaces and truncate their journals."""
        if self.root is None:
            return
        with self._lock:
            spaces = list(self._spaces.values())
        for sp in spaces:
            with sp.lock:
                if not sp.dirty:
                    continue
                snapshot, journal = self._paths(sp.space_id)
                snapshot.parent.mkdir(parents=True, exist_ok=True)
                tmp = snapshot.with_suffix(".tmp")
                with open(tmp, "w", encoding="utf-8") as f:
                    header = {
                        "dimension": self.dimension,
                        "count": len(sp.records),
                        "next_seq": sp.next_seq,
                    }
                    f.write(json.dumps(header) + "\n")
                    for rec in sp.records:
                        f.write(json.dumps(self._record(rec)) + "\n")
                    f.flush()
                    os.fsync(f.fileno())
                tmp.replace(snapshot)
                with open(journal, "w", encoding="utf-8"):
                    pass
                sp.dirty = False

    def _load_all(self) -> None:
        assert self.root is not None
        candidates: list[Path] = []
        for sub in ("knowledge", "spaces"):
            d = self.root / sub
            if d.is_dir():
                candidates.append(d)
        mem = self.root / "memory"
        if mem.is_dir():
            candidates.extend(p for p in mem.iterdir() if p.is_dir())
        for d in candidates:
            snapshot = d / "snapshot.jsonl"
            journal = d / "journal.jsonl"
            records: dict[str, dict] = {}
            next_seq = 0
            if snapshot.exists():
                with open(snapshot, encoding="utf-8") as f:
                    header = json.loads(f.readline())
                    if header["dimension"] != self.dimension:
                        raise ValidationError(
                            f"snapshot {snapshot} has dimension {header['dimension']}, "
                            f"store expects {self.dimension}"
                        )
                    next_seq = header.get("next_seq", 0)
                    for line in f:
                        if line.strip():
                            rec = json.loads(line)
                            records[rec["id"]] = rec
            if journal.exists():
                with open(journal, encoding="utf-8") as f:
                    for line in f:
                        if not line.strip():
                            continue
                        entry = json.loads(line)
                        if entry.get("op") == "upsert":
                            rec = entry["record"]
                            records[rec["id"]] = rec
                            next_seq = max(next_seq, rec["seq"] + 1)
            if not records:
                continue
            ordered = sorted(records.values(), key=lambda r: r["seq"])
            space_id = ordered[0]["space"]
            sp = self._space(space_id)
            with sp.lock:
                for rec in ordered:
                    sp.put(self._chunk(rec), seq=rec["seq"])
                sp.next_seq = max(sp.next_seq, next_seq)
                sp.dirty = False
