"""Deterministic feature-hashing text embedder.

Each lowercased whitespace token is hashed to a bucket in ``[0, d)`` and a
sign in ``{-1, +1}`` (independent keyed BLAKE2b digests, so results do not
depend on ``PYTHONHASHSEED`` or the platform). Signed counts are summed and
the row is L2-normalised; empty text embeds to the zero vector.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Protocol, Sequence

import numpy as np


class EmbeddingProvider(Protocol):
    dim: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


@lru_cache(maxsize=65536)
def _token_slot(token: str, dim: int) -> tuple[int, float]:
    raw = token.encode("utf-8")
    idx = int.from_bytes(hashlib.blake2b(raw, digest_size=8, key=b"bucket").digest(), "little") % dim
    sign = 1.0 if hashlib.blake2b(raw, digest_size=1, key=b"sign").digest()[0] & 1 else -1.0
    return idx, sign


@dataclass(frozen=True)
class HashingEmbedder:
    dim: int

    def embed_one(self, text: str) -> np.ndarray:
        row = np.zeros(self.dim)
        for tok in text.lower().split():
            idx, sign = _token_slot(tok, self.dim)
            row[idx] += sign
        norm = np.linalg.norm(row)
        return row / norm if norm > 0 else row

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            out[i] = self.embed_one(text)
        return out


def embed_texts(texts: Sequence[str], provider: EmbeddingProvider) -> np.ndarray:
    return provider.embed(texts)
