"""Fused phrase/document embeddings: an LDA topic segment concatenated with a
contextual segment, each unit-normalized so both views weigh equally in the
cosine. Contextual vectors come from a pluggable backend (remote HTTP
service, static word vectors, or a deterministic hash backend for tests).
"""

from __future__ import annotations

import hashlib
import logging
import threading
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from . import lda
from .candidates import CandidatePhrase
from .corpus import Document

log = logging.getLogger(__name__)


class BackendError(Exception):
    pass


@dataclass
class FusedEmbedding:
    lda_segment: np.ndarray  # unit L2 norm, or exactly zero for all-OOV
    ctx_segment: np.ndarray  # unit L2 norm

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.lda_segment, self.ctx_segment])

    @property
    def dimension(self) -> int:
        return self.lda_segment.size + self.ctx_segment.size


@dataclass
class EmbeddingBackendConfig:
    kind: str  # remote_service | static_vectors | deterministic_test
    endpoint: str | None = None
    path: str | None = None
    dimension: int = 512


class _CachingBackend:
    """Request-level cache keyed by exact text; safe for concurrent use."""

    def __init__(self, dimension: int):
        self.dimension = dimension
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            raise ValueError("embed_texts requires a nonempty batch")
        if any(not t for t in texts):
            raise ValueError("embed_texts requires nonempty texts")
        with self._lock:
            missing = [t for t in texts if t not in self._cache]
        missing = list(dict.fromkeys(missing))
        if missing:
            vectors = self._compute(missing)
            with self._lock:
                for text, vec in zip(missing, vectors):
                    self._cache[text] = vec
        with self._lock:
            return [self._cache[t].copy() for t in texts]

    def _compute(self, texts: list[str]) -> list[np.ndarray]:
        raise NotImplementedError


class DeterministicTestBackend(_CachingBackend):
    """Hashes each token to a fixed pseudo-random unit vector and averages."""

    def _compute(self, texts):
        out = []
        for text in texts:
            words = text.casefold().split()
            acc = np.zeros(self.dimension)
            for w in words:
                acc += self._word_vector(w)
            out.append(acc / max(len(words), 1))
        return out

    def _word_vector(self, word: str) -> np.ndarray:
        digest = hashlib.sha256(word.encode("utf-8")).digest()
        seed = int.from_bytes(digest[:8], "little")
        rng = np.random.Generator(np.random.PCG64(seed))
        vec = rng.standard_normal(self.dimension)
        return vec / np.linalg.norm(vec)


class StaticVectorsBackend(_CachingBackend):
    """Averages per-word vectors from a word2vec-format text file."""

    def __init__(self, path: Path | str):
        path = Path(path)
        if not path.exists():
            raise BackendError(f"static vectors file not found: {path}")
        self.vectors: dict[str, np.ndarray] = {}
        with path.open(encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise BackendError(f"{path}: malformed word2vec header")
            _, dim = int(header[0]), int(header[1])
            for line in fh:
                parts = line.rstrip("\n").split(" ")
                if len(parts) != dim + 1:
                    raise BackendError(f"{path}: malformed vector line for "
                                       f"{parts[0]!r}")
                self.vectors[parts[0]] = np.array(parts[1:], dtype=float)
        super().__init__(dim)

    def _compute(self, texts):
        out = []
        for text in texts:
            found = [self.vectors[w] for w in text.casefold().split()
                     if w in self.vectors]
            if not found:
                warnings.warn(f"all words of {text!r} are out of vocabulary; "
                              "zero vector returned")
                out.append(np.zeros(self.dimension))
            else:
                out.append(np.mean(found, axis=0))
        return out


class RemoteBackend(_CachingBackend):
    """HTTP backend: POST /embed {"texts": [...]} -> {"vectors": [[...]]},
    GET /health -> {"dim": d}. Retries 3 times with exponential backoff."""

    BATCH_SIZE = 32
    RETRIES = 3
    BACKOFF = 0.5

    def __init__(self, endpoint: str, session=None, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.session = session or requests.Session()
        self.timeout = timeout
        try:
            resp = self.session.get(self.endpoint + "/health", timeout=timeout)
            resp.raise_for_status()
            dim = int(resp.json()["dim"])
        except Exception as exc:
            raise BackendError(
                f"embedding service health check failed at {self.endpoint}: {exc}"
            ) from exc
        super().__init__(dim)

    def _compute(self, texts):
        out: list[np.ndarray] = []
        for i in range(0, len(texts), self.BATCH_SIZE):
            batch = texts[i : i + self.BATCH_SIZE]
            payload = self._post_with_retry(batch)
            vectors = payload["vectors"]
            if len(vectors) != len(batch):
                raise BackendError(
                    f"embedding service returned {len(vectors)} vectors "
                    f"for {len(batch)} texts"
                )
            out.extend(np.array(v, dtype=float) for v in vectors)
        return out

    def _post_with_retry(self, batch: list[str]) -> dict:
        delay = self.BACKOFF
        last: Exception | None = None
        for attempt in range(self.RETRIES):
            try:
                resp = self.session.post(
                    self.endpoint + "/embed",
                    json={"texts": batch},
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return resp.json()
            except Exception as exc:
                last = exc
                log.warning("embed attempt %d/%d failed: %s",
                            attempt + 1, self.RETRIES, exc)
                if attempt + 1 < self.RETRIES:
                    time.sleep(delay)
                    delay *= 2
        raise BackendError(
            f"embedding service at {self.endpoint} failed after "
            f"{self.RETRIES} attempts: {last}"
        )


def make_backend(config: EmbeddingBackendConfig, session=None) -> _CachingBackend:
    if config.kind == "deterministic_test":
        return DeterministicTestBackend(config.dimension)
    if config.kind == "static_vectors":
        if not config.path:
            raise BackendError("static_vectors backend requires a path")
        return StaticVectorsBackend(config.path)
    if config.kind == "remote_service":
        if not config.endpoint:
            raise BackendError("remote_service backend requires an endpoint")
        return RemoteBackend(config.endpoint, session=session)
    raise BackendError(f"unknown backend kind: {config.kind!r}")


def embed_texts(texts: list[str], backend) -> list[np.ndarray]:
    """One contextual vector per text, order preserved."""
    if isinstance(backend, EmbeddingBackendConfig):
        backend = make_backend(backend)
    return backend.embed(texts)


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vec)
    if norm == 0:
        return np.zeros_like(vec)
    return vec / norm


def fuse(lda_vector: np.ndarray, ctx: np.ndarray) -> FusedEmbedding:
    ctx = np.asarray(ctx, dtype=float)
    if np.linalg.norm(ctx) == 0:
        raise ValueError("contextual vector is zero; backend returned no signal")
    return FusedEmbedding(lda_segment=_unit(np.asarray(lda_vector, dtype=float)),
                          ctx_segment=_unit(ctx))


def fuse_phrase(phrase: CandidatePhrase, model: lda.TopicModel,
                ctx: np.ndarray) -> FusedEmbedding:
    """Topic segment from the phrase's word-topic sums plus its contextual
    vector, segment-wise unit-normalized. All-OOV phrases keep a zero topic
    segment."""
    return fuse(lda.phrase_topic_vector(phrase.words, model), ctx)


def fuse_document(doc: Document, model: lda.TopicModel, ctx: np.ndarray,
                  doc_index: int | None = None) -> FusedEmbedding:
    """Document embedding; uses the fitted theta row when doc_index is given,
    otherwise folds the document in against frozen phi."""
    if doc_index is not None:
        topic_vec = lda.document_topic_vector(doc_index, model)
    else:
        topic_vec = lda.fold_in(doc, model)
    return fuse(topic_vec, ctx)


def cosine(a: FusedEmbedding, b: FusedEmbedding) -> float:
    """Cosine over the concatenated vectors. When both topic segments are
    nonzero this equals (cos_lda + cos_ctx) / 2 exactly, since all segments
    are unit vectors."""
    if a.lda_segment.size != b.lda_segment.size or \
            a.ctx_segment.size != b.ctx_segment.size:
        raise ValueError("segment dimensions differ")
    va, vb = a.vector, b.vector
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0 or nb == 0:
        raise ValueError("cannot take cosine of a zero embedding")
    return float(np.clip(va @ vb / (na * nb), -1.0, 1.0))
