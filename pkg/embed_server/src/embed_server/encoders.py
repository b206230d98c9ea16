"""Sentence encoders behind the /embed endpoint.

Two families: a hash-seeded deterministic encoder for offline and test use,
and a sentence-transformers wrapper for real semantic vectors. Both are
deterministic within a process and return unit-norm float vectors.
"""

from __future__ import annotations

import hashlib

import numpy as np


class EncoderError(Exception):
    pass


class HashEncoder:
    """Deterministic stand-in encoder: each word maps to a fixed unit vector
    seeded from its hash; a text embeds as the normalized mean. No semantics,
    but stable across processes and platforms."""

    def __init__(self, dim: int = 512):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self._word_cache: dict[str, np.ndarray] = {}

    def _word_vector(self, word: str) -> np.ndarray:
        vec = self._word_cache.get(word)
        if vec is None:
            seed = int.from_bytes(
                hashlib.sha256(word.encode("utf-8")).digest()[:8], "big")
            rng = np.random.Generator(np.random.PCG64(seed))
            vec = rng.standard_normal(self.dim)
            vec /= np.linalg.norm(vec)
            self._word_cache[word] = vec
        return vec

    def encode(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            words = text.casefold().split()
            vec = np.mean([self._word_vector(w) for w in words], axis=0)
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec = vec / norm
            out.append([float(x) for x in vec])
        return out


class SbertEncoder:
    """sentence-transformers wrapper; the model loads lazily on first use so
    importing this module never touches the network."""

    def __init__(self, model_id: str = "all-MiniLM-L6-v2"):
        self.model_id = model_id
        self._model = None

    def _load(self):
        if self._model is None:
            try:
                from sentence_transformers import SentenceTransformer
            except ImportError as exc:
                raise EncoderError(
                    "sentence-transformers is not installed; "
                    "install the [sbert] extra or use the hash encoder"
                ) from exc
            self._model = SentenceTransformer(self.model_id)
        return self._model

    @property
    def dim(self) -> int:
        return int(self._load().get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> list[list[float]]:
        vectors = self._load().encode(texts, convert_to_numpy=True,
                                      normalize_embeddings=True)
        return [[float(x) for x in v] for v in vectors]


def make_encoder(model_id: str, dim: int = 512):
    """"hash" (optionally "hash:<dim>") selects the deterministic encoder;
    anything else names a sentence-transformers checkpoint."""
    if model_id == "hash":
        return HashEncoder(dim)
    if model_id.startswith("hash:"):
        return HashEncoder(int(model_id.split(":", 1)[1]))
    return SbertEncoder(model_id)
