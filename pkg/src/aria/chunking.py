"""Fixed-size knowledge chunking with overlap.

Chunk i covers [i*(size-overlap), i*(size-overlap)+size), capped at the
document length. Generation stops once a chunk reaches the end of the text,
so every chunk contributes at least one new character and stripping the
first `overlap` characters of each chunk after the first reconstructs the
document exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError

KNOWLEDGE_SPACE = "knowledge"

DEFAULT_CHUNK_SIZE = 1000
DEFAULT_CHUNK_OVERLAP = 200


@dataclass
class KnowledgeDoc:
    doc_id: str
    source: str
    text: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValidationError("doc_id must be non-empty")
        if not self.text:
            raise ValidationError(f"document {self.doc_id!r} has empty text")


@dataclass
class Chunk:
    """An embedded retrieval unit.

    `span` is [start, end) in characters for knowledge chunks, or an
    interaction index range for episodic segments. `insertion_seq` is
    assigned by the vector store.
    """

    chunk_id: str
    space_id: str
    text: str
    span: tuple[int, int]
    embedding: list[float] | None = None
    insertion_seq: int = -1


def chunk_spans(length: int, size: int, overlap: int) -> list[tuple[int, int]]:
    """Spans produced by the sliding window over a text of `length` chars."""
    if length <= 0:
        raise ValidationError("text must be non-empty")
    if size <= 0:
        raise ValidationError("chunk size must be > 0")
    if not 0 <= overlap < size:
        raise ValidationError(f"overlap {overlap} must satisfy 0 <= overlap < size {size}")
    stride = size - overlap
    spans: list[tuple[int, int]] = []
    i = 0
    while True:
        start = i * stride
        if start >= length:
            break
        end = min(start + size, length)
        spans.append((start, end))
        if end >= length:
            break
        i += 1
    return spans


def chunk_knowledge(
    doc: KnowledgeDoc,
    size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_CHUNK_OVERLAP,
) -> list[Chunk]:
    """Split a document into overlapping chunks (embeddings unset)."""
    spans = chunk_spans(len(doc.text), size, overlap)
    return [
        Chunk(
            chunk_id=f"{doc.doc_id}#k{idx}",
            space_id=KNOWLEDGE_SPACE,
            text=doc.text[s:e],
            span=(s, e),
        )
        for idx, (s, e) in enumerate(spans)
    ]


def reconstruct(chunks: list[Chunk], overlap: int = DEFAULT_CHUNK_OVERLAP) -> str:
    """Invert chunk_knowledge: drop each interior overlap and concatenate."""
    if not chunks:
        return ""
    return chunks[0].text + "".join(c.text[overlap:] for c in chunks[1:])
