"""Embedding-based metrics behind a provider abstraction.

Providers turn text/images into unit vectors; the metric math here is pure.
No model weights ship with this package: use :class:`MockProvider` for
deterministic offline runs or :class:`RemoteProvider` against an embedding
service speaking the JSON protocol below.

Remote wire protocol: request ``{"kind": "token"|"text"|"image", "payload": str}``,
response ``{"vectors": [[float, ...], ...]}``.
"""

from __future__ import annotations

import hashlib
import json
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .lexical import tokenize

_UNIT_NORM_TOL = 1e-6


class ProviderError(RuntimeError):
    """A provider returned malformed or non-unit vectors."""


class EmbeddingProvider(ABC):
    """Deterministic source of unit-norm embeddings."""

    @abstractmethod
    def embed_tokens(self, text: str) -> np.ndarray:
        """Per-token unit vectors, shape (n_tokens, dim)."""

    @abstractmethod
    def embed_text(self, text: str) -> np.ndarray:
        """Whole-text unit vector, shape (dim,)."""

    @abstractmethod
    def embed_image(self, ref: str) -> np.ndarray:
        """Unit vector for an image reference, shape (dim,)."""


class MockProvider(EmbeddingProvider):
    """Hash-seeded unit vectors, stable across processes for a given seed.

    Distinct keys map to distinct pseudo-random directions, so cosines
    between different tokens are strictly inside (-1, 1) almost surely.
    """

    def __init__(self, seed: int = 0, dim: int = 32) -> None:
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.seed = seed
        self.dim = dim

    def _vector(self, kind: str, key: str) -> np.ndarray:
        digest = hashlib.sha256(f"{self.seed}:{kind}:{key}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)

    def embed_tokens(self, text: str) -> np.ndarray:
        tokens = tokenize(text)
        if not tokens:
            return np.zeros((0, self.dim))
        return np.stack([self._vector("token", t) for t in tokens])

    def embed_text(self, text: str) -> np.ndarray:
        return self._vector("text", text)

    def embed_image(self, ref: str) -> np.ndarray:
        return self._vector("image", ref)


def _check_unit(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=-1)
    if not np.all(np.abs(norms - 1.0) <= _UNIT_NORM_TOL):
        raise ProviderError("provider returned non-unit vectors")
    return vectors


class RemoteProvider(EmbeddingProvider):
    """Client for a remote embedding service.

    ``transport`` maps a request dict to a response dict; the default posts
    JSON to ``endpoint`` with :mod:`requests`. Concurrent callers are capped
    at ``max_in_flight`` outstanding requests.
    """

    def __init__(
        self,
        endpoint: str,
        *,
        transport: Callable[[dict], dict] | None = None,
        timeout: float = 30.0,
        max_in_flight: int = 4,
    ) -> None:
        self.endpoint = endpoint
        self.timeout = timeout
        self._transport = transport or self._http_transport
        self._gate = threading.Semaphore(max_in_flight)

    def _http_transport(self, request: dict) -> dict:
        import requests

        response = requests.post(self.endpoint, json=request, timeout=self.timeout)
        response.raise_for_status()
        return response.json()

    def _call(self, kind: str, payload: str) -> np.ndarray:
        with self._gate:
            reply = self._transport({"kind": kind, "payload": payload})
        vectors = reply.get("vectors") if isinstance(reply, dict) else None
        if not vectors:
            raise ProviderError(f"no vectors in provider response for kind={kind!r}")
        return _check_unit(np.asarray(vectors, dtype=float))

    def embed_tokens(self, text: str) -> np.ndarray:
        return self._call("token", text)

    def embed_text(self, text: str) -> np.ndarray:
        return self._call("text", text)[0]

    def embed_image(self, ref: str) -> np.ndarray:
        return self._call("image", ref)[0]


class CachingProvider(EmbeddingProvider):
    """Memoizes another provider by input key, optionally on disk.

    Disk entries are one JSON file per request, named by the content hash of
    (kind, payload), so caches survive across processes.
    """

    def __init__(self, inner: EmbeddingProvider, cache_dir: str | Path | None = None) -> None:
        self.inner = inner
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        if self.cache_dir is not None:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._memory: dict[tuple[str, str], np.ndarray] = {}
        self._lock = threading.Lock()

    @staticmethod
    def _key(kind: str, payload: str) -> str:
        return hashlib.sha256(f"{kind}\x00{payload}".encode("utf-8")).hexdigest()

    def _lookup(self, kind: str, payload: str, compute: Callable[[], np.ndarray]) -> np.ndarray:
        with self._lock:
            cached = self._memory.get((kind, payload))
        if cached is not None:
            return cached
        path = None
        if self.cache_dir is not None:
            path = self.cache_dir / f"{self._key(kind, payload)}.json"
            if path.exists():
                vectors = np.asarray(json.loads(path.read_text())["vectors"], dtype=float)
                with self._lock:
                    self._memory[(kind, payload)] = vectors
                return vectors
        vectors = compute()
        with self._lock:
            self._memory[(kind, payload)] = vectors
        if path is not None:
            path.write_text(json.dumps({"vectors": np.atleast_2d(vectors).tolist()}))
        return vectors

    def embed_tokens(self, text: str) -> np.ndarray:
        return self._lookup("token", text, lambda: self.inner.embed_tokens(text))

    def embed_text(self, text: str) -> np.ndarray:
        vectors = self._lookup("text", text, lambda: np.atleast_2d(self.inner.embed_text(text)))
        return np.asarray(vectors)[0] if np.asarray(vectors).ndim == 2 else vectors

    def embed_image(self, ref: str) -> np.ndarray:
        vectors = self._lookup("image", ref, lambda: np.atleast_2d(self.inner.embed_image(ref)))
        return np.asarray(vectors)[0] if np.asarray(vectors).ndim == 2 else vectors


@dataclass(frozen=True)
class BertScore:
    precision: float
    recall: float
    f1: float


def bertscore(
    cand_text: str,
    ref_text: str,
    provider: EmbeddingProvider,
    idf_weights: Mapping[str, float] | None = None,
) -> BertScore:
    """Greedy token-matching score from pairwise cosine similarities.

    Recall averages, over reference tokens, the best cosine against any
    candidate token; precision is the mirror image; F1 is their harmonic
    mean. Scores are scaled to 0-100 (they can dip below 0 only if the
    provider emits negatively correlated embeddings). Optional idf weights
    turn the plain means into weighted means; weights are looked up by
    token via the shared tokenizer, defaulting to 1.0.
    """
    cand_vecs = np.asarray(provider.embed_tokens(cand_text))
    ref_vecs = np.asarray(provider.embed_tokens(ref_text))
    if cand_vecs.shape[0] == 0 or ref_vecs.shape[0] == 0:
        raise ValueError("bertscore requires at least one token on each side")
    sim = cand_vecs @ ref_vecs.T
    best_for_cand = sim.max(axis=1)
    best_for_ref = sim.max(axis=0)
    if idf_weights is None:
        precision = float(best_for_cand.mean())
        recall = float(best_for_ref.mean())
    else:
        cand_w = _token_weights(cand_text, cand_vecs.shape[0], idf_weights)
        ref_w = _token_weights(ref_text, ref_vecs.shape[0], idf_weights)
        precision = float(np.average(best_for_cand, weights=cand_w))
        recall = float(np.average(best_for_ref, weights=ref_w))
    if precision + recall <= 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return BertScore(100.0 * precision, 100.0 * recall, 100.0 * f1)


def _token_weights(text: str, expected: int, idf_weights: Mapping[str, float]) -> np.ndarray:
    tokens = tokenize(text)
    if len(tokens) != expected:
        raise ValueError(
            "idf weighting requires the provider to tokenize like lexical.tokenize"
        )
    return np.asarray([idf_weights.get(t, 1.0) for t in tokens], dtype=float)


def clip_text_sim(text: str, frame_refs: list[str], provider: EmbeddingProvider) -> float:
    """Mean cosine between the text embedding and each frame embedding, x100."""
    if not frame_refs:
        raise ValueError("clip_text_sim requires at least one frame")
    text_vec = np.asarray(provider.embed_text(text))
    cosines = [float(text_vec @ np.asarray(provider.embed_image(ref))) for ref in frame_refs]
    return 100.0 * float(np.mean(cosines))


def identity_preservation(
    identity_refs: list[str], frame_refs: list[str], provider: EmbeddingProvider
) -> float:
    """Max-over-frames cosine per identity image, averaged over identities, x100.

    The provider choice (CLIP-style vs DINO-style embeddings) determines how
    the resulting number should be labelled.
    """
    if not identity_refs or not frame_refs:
        raise ValueError("identity_preservation requires non-empty identity and frame lists")
    frame_vecs = np.stack([np.asarray(provider.embed_image(ref)) for ref in frame_refs])
    scores = []
    for ref in identity_refs:
        ident = np.asarray(provider.embed_image(ref))
        scores.append(float(np.max(frame_vecs @ ident)))
    return 100.0 * float(np.mean(scores))
