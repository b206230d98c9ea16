"""Latent Dirichlet Allocation via collapsed Gibbs sampling.

Fitted once per corpus; the topic-word rows (phi) feed phrase topic vectors
and the document-topic rows (theta) feed document topic vectors. Sampling is
single-threaded over the token stream so a fixed seed gives bit-identical
models. Unseen documents are folded in against frozen phi.
"""

from __future__ import annotations

import logging
import random
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, Document

log = logging.getLogger(__name__)

MAGIC = b"COTAGLDA1"


class TopicModelError(Exception):
    pass


@dataclass
class TopicModelConfig:
    num_topics: int = 500
    alpha: float | None = None  # None -> 50 / num_topics
    beta: float = 0.01
    gibbs_iterations: int = 1000
    seed: int = 42

    def __post_init__(self):
        if self.num_topics < 2:
            raise ValueError("num_topics must be >= 2")
        if self.alpha is None:
            self.alpha = 50.0 / self.num_topics
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")


@dataclass
class TopicModel:
    phi: np.ndarray          # (K, V), row t = p(w | t)
    theta: np.ndarray        # (D, K), row d = p(t | d)
    vocabulary: dict[str, int]
    seed: int = 0
    # document-topic prior used at fit time; fold_in reuses it. Not part of
    # the persisted format, so loads fall back to the 50/K default.
    alpha: float | None = None

    def doc_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 50.0 / self.num_topics

    @property
    def num_topics(self) -> int:
        return self.phi.shape[0]

    def save(self, path: Path | str) -> None:
        """Binary layout: magic, then K/V/D/seed as little-endian int64,
        then row-major phi and theta as little-endian float64, then the
        vocabulary as length-prefixed UTF-8 strings in id order."""
        K, V = self.phi.shape
        D = self.theta.shape[0]
        words = sorted(self.vocabulary, key=self.vocabulary.get)
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<qqqq", K, V, D, self.seed))
            fh.write(np.ascontiguousarray(self.phi, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(self.theta, dtype="<f8").tobytes())
            for word in words:
                data = word.encode("utf-8")
                fh.write(struct.pack("<i", len(data)))
                fh.write(data)

    @classmethod
    def load(cls, path: Path | str) -> "TopicModel":
        with open(path, "rb") as fh:
            if fh.read(len(MAGIC)) != MAGIC:
                raise TopicModelError(f"{path}: not a topic model file")
            K, V, D, seed = struct.unpack("<qqqq", fh.read(32))
            phi = np.frombuffer(fh.read(K * V * 8), dtype="<f8").reshape(K, V)
            theta = np.frombuffer(fh.read(D * K * 8), dtype="<f8").reshape(D, K)
            vocab = {}
            for i in range(V):
                (n,) = struct.unpack("<i", fh.read(4))
                vocab[fh.read(n).decode("utf-8")] = i
        return cls(phi=phi.copy(), theta=theta.copy(), vocabulary=vocab, seed=seed)


def _doc_word_ids(doc: Document, vocabulary: dict[str, int]) -> list[int]:
    return [vocabulary[t.lower] for t in doc.tokens if t.lower in vocabulary]


def fit_lda(corpus: Corpus, config: TopicModelConfig) -> TopicModel:
    """Collapsed Gibbs sampling over the corpus token stream."""
    if not corpus.documents:
        raise TopicModelError("cannot fit LDA on an empty corpus")
    vocab = corpus.vocabulary
    V = len(vocab)
    if V == 0:
        raise TopicModelError("cannot fit LDA with an empty vocabulary")
    K = config.num_topics
    if K > V:
        log.warning("num_topics (%d) exceeds vocabulary size (%d)", K, V)
    alpha, beta = config.alpha, config.beta

    docs = [_doc_word_ids(d, vocab) for d in corpus.documents]
    D = len(docs)

    n_dk = [[0] * K for _ in range(D)]
    n_kw = [[0] * K for _ in range(V)]  # word-major for cache locality
    n_k = [0] * K
    assignments: list[list[int]] = []

    rng = random.Random(config.seed)
    for d, words in enumerate(docs):
        zs = []
        row = n_dk[d]
        for w in words:
            z = rng.randrange(K)
            zs.append(z)
            row[z] += 1
            n_kw[w][z] += 1
            n_k[z] += 1
        assignments.append(zs)

    v_beta = V * beta
    probs = [0.0] * K
    for _ in range(config.gibbs_iterations):
        for d, words in enumerate(docs):
            row = n_dk[d]
            zs = assignments[d]
            for i, w in enumerate(words):
                z = zs[i]
                row[z] -= 1
                wt = n_kw[w]
                wt[z] -= 1
                n_k[z] -= 1
                total = 0.0
                for k in range(K):
                    total += (row[k] + alpha) * (wt[k] + beta) / (n_k[k] + v_beta)
                    probs[k] = total
                u = rng.random() * total
                z = 0
                while probs[z] < u:
                    z += 1
                zs[i] = z
                row[z] += 1
                wt[z] += 1
                n_k[z] += 1

    phi = (np.array(n_kw, dtype=float).T + beta)
    phi /= phi.sum(axis=1, keepdims=True)
    theta = np.array(n_dk, dtype=float) + alpha
    theta /= theta.sum(axis=1, keepdims=True)
    return TopicModel(phi=phi, theta=theta, vocabulary=vocab,
                      seed=config.seed, alpha=alpha)


def phrase_topic_vector(words, model: TopicModel) -> np.ndarray:
    """Sum of p(w | t) columns over the in-vocabulary words of the phrase;
    all-OOV phrases yield the zero vector."""
    vec = np.zeros(model.num_topics)
    for w in words:
        idx = model.vocabulary.get(w)
        if idx is not None:
            vec += model.phi[:, idx]
    return vec


def document_topic_vector(doc_id: int, model: TopicModel) -> np.ndarray:
    """theta row of a document that was in the fitted corpus."""
    if not 0 <= doc_id < model.theta.shape[0]:
        raise TopicModelError(
            f"document index {doc_id} not in fitted corpus "
            f"(D={model.theta.shape[0]}); fold in unseen documents instead"
        )
    return model.theta[doc_id].copy()


def fold_in(
    doc: Document,
    model: TopicModel,
    iterations: int = 100,
    seed: int = 0,
) -> np.ndarray:
    """Topic distribution for an unseen document: Gibbs sampling of its
    assignments with phi frozen."""
    K = model.num_topics
    words = _doc_word_ids(doc, model.vocabulary)
    if not words:
        warnings.warn(
            f"document {doc.id!r} has no in-vocabulary tokens; "
            "returning the uniform topic distribution"
        )
        return np.full(K, 1.0 / K)

    alpha = model.doc_alpha()
    rng = random.Random(seed)
    counts = [0] * K
    zs = []
    for _ in words:
        z = rng.randrange(K)
        zs.append(z)
        counts[z] += 1

    phi = model.phi
    probs = [0.0] * K
    for _ in range(iterations):
        for i, w in enumerate(words):
            z = zs[i]
            counts[z] -= 1
            col = phi[:, w]
            total = 0.0
            for k in range(K):
                total += (counts[k] + alpha) * col[k]
                probs[k] = total
            u = rng.random() * total
            z = 0
            while probs[z] < u:
                z += 1
            zs[i] = z
            counts[z] += 1

    out = np.array(counts, dtype=float) + alpha
    return out / out.sum()
