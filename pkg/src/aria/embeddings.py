"""Embedding providers behind one small interface.

`HashEmbedder` is the deterministic offline provider used by the test and
fixture configurations: lowercase, split on non-alphanumeric runs, hash each
token into one of `dimension` buckets (crc32, stable across platforms),
count, L2-normalize. Identical texts always embed identically and word
order never matters, which makes retrieval assertions exact.

`HttpEmbedder` posts to any JSON embeddings endpoint speaking the common
{"model", "input": [...]} -> {"data": [{"embedding": [...]}]} shape.
"""

from __future__ import annotations

import os
import re
import zlib
from typing import Protocol

import httpx
import numpy as np

from .errors import RetryableError, ValidationError

DEFAULT_DIMENSION = 256

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class EmbeddingProvider(Protocol):
    dimension: int

    def embed(self, text: str) -> list[float]: ...


class HashEmbedder:
    def __init__(self, dimension: int = DEFAULT_DIMENSION) -> None:
        if dimension <= 0:
            raise ValidationError("embedding dimension must be > 0")
        self.dimension = dimension

    def embed(self, text: str) -> list[float]:
        if not text:
            raise ValidationError("cannot embed empty text")
        tokens = _TOKEN_RE.findall(text.lower())
        if not tokens:
            # Punctuation-only text: treat the stripped text as one token so
            # the output still has unit norm.
            tokens = [text.strip() or text]
        counts = np.zeros(self.dimension, dtype=np.float64)
        for tok in tokens:
            counts[zlib.crc32(tok.encode("utf-8")) % self.dimension] += 1.0
        return (counts / np.linalg.norm(counts)).tolist()


class HttpEmbedder:
    """Client for an external embeddings endpoint."""

    def __init__(
        self,
        endpoint: str,
        dimension: int,
        model: str = "",
        api_key_env: str = "",
        timeout_s: float = 30.0,
    ) -> None:
        self.endpoint = endpoint
        self.dimension = dimension
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s

    def embed(self, text: str) -> list[float]:
        if not text:
            raise ValidationError("cannot embed empty text")
        headers = {}
        key = os.environ.get(self.api_key_env, "") if self.api_key_env else ""
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload: dict = {"input": [text]}
        if self.model:
            payload["model"] = self.model
        try:
            resp = httpx.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout_s)
            resp.raise_for_status()
            vector = resp.json()["data"][0]["embedding"]
        except (httpx.TimeoutException, httpx.TransportError) as exc:
            raise RetryableError(f"embedding endpoint unavailable: {exc}") from exc
        except (httpx.HTTPStatusError, KeyError, IndexError, ValueError) as exc:
            raise RetryableError(f"embedding endpoint returned bad payload: {exc}") from exc
        if len(vector) != self.dimension:
            raise ValidationError(
                f"embedding dimension {len(vector)} != configured {self.dimension}"
            )
        return [float(x) for x in vector]
