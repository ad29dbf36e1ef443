"""Embedding-based retrieval: a deterministic built-in embedder plus a remote client.

The built-in embedder hashes character trigrams of normalized text into a
fixed-width bag with FNV-1a, one signed bucket per trigram. It is not a
learned model; it exists so indexes build and latency tests run without a
network dependency, and so two builds of the same catalog are bit-identical.
The remote client speaks the common embeddings wire shape:
POST {"model": ..., "input": [...]} -> {"data": [{"embedding": [...]}]}.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np

try:
    import httpx
except ImportError:  # pragma: no cover - only the remote client needs it
    httpx = None

from .catalog import Catalog, normalize_text, sku_document

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a(data: bytes, seed: int = _FNV_OFFSET) -> int:
    h = seed
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


class EmbeddingError(RuntimeError):
    """Raised when an embedding provider cannot produce vectors."""


class BuiltinEmbedder:
    """Hashed character-trigram embedder; deterministic, dependency-free."""

    def __init__(self, dimension: int = 384):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.name = f"builtin-trigram-{dimension}"
        self._gram_cache: dict[str, tuple[int, float]] = {}

    def _bucket(self, gram: str) -> tuple[int, float]:
        cached = self._gram_cache.get(gram)
        if cached is not None:
            return cached
        raw = gram.encode("utf-8")
        col = _fnv1a(raw) % self.dimension
        sign = 1.0 if _fnv1a(raw, seed=_fnv1a(b"sign")) & 1 else -1.0
        self._gram_cache[gram] = (col, sign)
        return col, sign

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=np.float64)
        norm = normalize_text(text)
        for i in range(len(norm) - 2):
            col, sign = self._bucket(norm[i : i + 3])
            vec[col] += sign
        length = float(np.sqrt(np.dot(vec, vec)))
        if length > 0.0:
            vec /= length
        return vec

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            out[i] = self.embed(text)
        return out


class RemoteEmbeddingClient:
    """HTTP embedding provider with retries and local re-normalization."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        dimension: int,
        timeout_ms: int = 2000,
        max_retries: int = 2,
        batch_size: int = 64,
        auth_env: str | None = None,
        transport=None,
    ):
        if httpx is None:  # pragma: no cover
            raise EmbeddingError("httpx is required for remote embeddings")
        self.endpoint = endpoint
        self.model = model
        self.dimension = dimension
        self.name = f"remote:{model}"
        self.max_retries = max_retries
        self.batch_size = batch_size
        headers = {}
        if auth_env:
            token = os.environ.get(auth_env)
            if not token:
                raise EmbeddingError(f"auth environment variable {auth_env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(
            timeout=timeout_ms / 1000.0, headers=headers, transport=transport
        )

    def _post_batch(self, texts: list[str]) -> list[list[float]]:
        payload = {"model": self.model, "input": texts}
        delay = 0.2
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = self._client.post(self.endpoint, json=payload)
            except httpx.HTTPError as exc:
                last_error = exc
            else:
                if resp.status_code == 200:
                    data = resp.json()["data"]
                    return [item["embedding"] for item in data]
                if resp.status_code not in (429,) and resp.status_code < 500:
                    raise EmbeddingError(
                        f"embedding endpoint returned {resp.status_code}: {resp.text[:200]}"
                    )
                last_error = EmbeddingError(
                    f"embedding endpoint returned {resp.status_code}: {resp.text[:200]}"
                )
            if attempt < self.max_retries:
                time.sleep(delay)
                delay *= 2
        raise EmbeddingError(f"embedding request failed after retries: {last_error}")

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        rows: list[list[float]] = []
        for start in range(0, len(texts), self.batch_size):
            rows.extend(self._post_batch(texts[start : start + self.batch_size]))
        out = np.asarray(rows, dtype=np.float64)
        if out.ndim != 2 or out.shape != (len(texts), self.dimension):
            actual = out.shape[1] if out.ndim == 2 else "?"
            raise EmbeddingError(
                f"expected {self.dimension}-dim embeddings, got {actual} from {self.model}"
            )
        norms = np.sqrt((out * out).sum(axis=1))
        nonzero = norms > 0.0
        out[nonzero] /= norms[nonzero, np.newaxis]
        return out

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def close(self):
        self._client.close()


@dataclass(frozen=True)
class EmbeddingIndex:
    provider_name: str
    dimension: int
    sku_ids: np.ndarray
    matrix: np.ndarray  # row-per-document, unit length (or zero)


def build_embedding_index(catalog: Catalog, provider) -> EmbeddingIndex:
    docs = [sku_document(r) for r in catalog]
    matrix = provider.embed_batch(docs)
    return EmbeddingIndex(
        provider_name=provider.name,
        dimension=matrix.shape[1] if matrix.ndim == 2 else provider.dimension,
        sku_ids=np.array([r.sku_id for r in catalog], dtype=np.int64),
        matrix=matrix,
    )


def top_k_semantic(
    index: EmbeddingIndex, query: str, provider, k: int = 50
) -> list[tuple[int, float]]:
    """Best k documents by cosine against the query embedding.

    Unlike the lexical branch, zero scores stay in; a dense embedding rarely
    yields exact zeros, and the cut is k regardless.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if provider.name != index.provider_name:
        raise EmbeddingError(
            f"index built with {index.provider_name!r} but queried via {provider.name!r}"
        )
    qvec = provider.embed(query)
    scores = index.matrix @ qvec
    take = min(k, scores.size)
    order = np.lexsort((index.sku_ids, -scores))[:take]
    return [(int(index.sku_ids[i]), float(scores[i])) for i in order]
