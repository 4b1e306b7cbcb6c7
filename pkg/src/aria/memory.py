"""Dual-strategy retrieval memory: static knowledge plus per-user episodes.

One facade owns the embedding provider, the vector store, and the episodic
segment ledger. Knowledge documents are chunked with a fixed window;
episodic segments arrive from the per-session segmenters and land in the
owning user's space. Follow-up queries are rewritten into standalone form
with one low-temperature gateway call before retrieval; any failure there
degrades to the raw query instead of aborting the turn.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path

from .chunking import (
    DEFAULT_CHUNK_OVERLAP,
    DEFAULT_CHUNK_SIZE,
    KNOWLEDGE_SPACE,
    Chunk,
    KnowledgeDoc,
    chunk_knowledge,
)
from .embeddings import EmbeddingProvider
from .llm import ChatMessage, CompletionRequest, LLMProvider
from .segmentation import EpisodicSegment, user_space
from .vectorstore import RetrievedPassage, VectorStore

logger = logging.getLogger(__name__)

CONTEXTUALIZER_TEMPLATE = (
    "Rewrite the latest user question as a standalone question that can be "
    "understood without the chat history. Use the history only to resolve "
    "references; do not answer the question. Reply with the reformulated "
    "question and nothing else."
)


class MemoryService:
    def __init__(
        self,
        embedder: EmbeddingProvider,
        store: VectorStore,
        chunk_size: int = DEFAULT_CHUNK_SIZE,
        chunk_overlap: int = DEFAULT_CHUNK_OVERLAP,
        knowledge_top_k: int = 5,
        memory_top_k: int = 5,
        root: str | Path | None = None,
    ) -> None:
        self.embedder = embedder
        self.store = store
        self.chunk_size = chunk_size
        self.chunk_overlap = chunk_overlap
        self.knowledge_top_k = knowledge_top_k
        self.memory_top_k = memory_top_k
        self.root = Path(root) if root is not None else None
        self._segment_lock = threading.Lock()

    # ------------------------------------------------------------- knowledge

    def ingest_document(self, doc: KnowledgeDoc) -> list[Chunk]:
        chunks = chunk_knowledge(doc, self.chunk_size, self.chunk_overlap)
        for c in chunks:
            c.embedding = self.embedder.embed(c.text)
        self.store.upsert(KNOWLEDGE_SPACE, chunks)
        return chunks

    def retrieve_knowledge(self, query: str, k: int | None = None) -> list[RetrievedPassage]:
        return self.store.retrieve(
            KNOWLEDGE_SPACE, self.embedder.embed(query), k or self.knowledge_top_k
        )

    # -------------------------------------------------------------- episodic

    def store_segment(self, segment: EpisodicSegment) -> Chunk:
        text = segment.render()
        chunk = Chunk(
            chunk_id=segment.chunk_id(),
            space_id=user_space(segment.user_id),
            text=text,
            span=(segment.start, segment.end),
            embedding=self.embedder.embed(text),
        )
        self.store.upsert(chunk.space_id, [chunk])
        self._append_segment_record(segment)
        return chunk

    def retrieve_memories(self, user_id: str, query: str, k: int | None = None) -> list[RetrievedPassage]:
        return self.store.retrieve(
            user_space(user_id), self.embedder.embed(query), k or self.memory_top_k
        )

    def list_segments(self, user_id: str) -> list[dict]:
        if self.root is None:
            return []
        path = self._segments_path(user_id)
        if not path.exists():
            return []
        out = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    out.append(json.loads(line))
        return out

    def _segments_path(self, user_id: str) -> Path:
        assert self.root is not None
        return self.root / "memory" / user_id / "segments.jsonl"

    def _append_segment_record(self, segment: EpisodicSegment) -> None:
        if self.root is None:
            return
        path = self._segments_path(segment.user_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        record = {
            "user_id": segment.user_id,
            "session_id": segment.session_id,
            "span": [segment.start, segment.end],
            "interactions": len(segment.interactions),
            "finalized_at": segment.finalized_at,
            "chunk_id": segment.chunk_id(),
        }
        with self._segment_lock, open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record) + "\n")

    # ------------------------------------------------------- contextualizer

    def contextualize(
        self, query: str, chat_history: list[ChatMessage], gateway: LLMProvider
    ) -> str:
        """Rewrite a follow-up query into standalone form using the history.

        Empty history short-circuits without touching the gateway; gateway
        failures or empty replies fall back to the raw query.
        """
        if not chat_history:
            return query
        messages = [ChatMessage(role="system", content=CONTEXTUALIZER_TEMPLATE)]
        messages.extend(chat_history)
        messages.append(ChatMessage(role="user", content=query))
        try:
            reply = gateway.complete(CompletionRequest(messages=messages, temperature=0.0))
        except Exception as exc:
            logger.warning("contextualizer failed, using raw query: %s", exc)
            return query
        reply = reply.strip()
        return reply if reply else query

    def flush(self) -> None:
        self.store.flush()
