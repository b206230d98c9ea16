"""Keyphrase expansion: enrich extracted phrases with Wikipedia article
titles and re-rank the union with the same biased PageRank machinery.

Title fetches go through the MediaWiki search API and are cached on disk per
seed so expansion runs are reproducible offline.
"""

from __future__ import annotations

import hashlib
import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import requests

from . import embedding as emb
from . import lda, ranking
from .candidates import CandidatePhrase
from .corpus import Document
from .porter import stem

log = logging.getLogger(__name__)

DEFAULT_ENDPOINT = "https://en.wikipedia.org/w/api.php"
MAX_CONCURRENT_FETCHES = 4


@dataclass
class ExpansionConfig:
    seeds_k: int = 10
    titles_per_seed: int = 3
    api_endpoint: str = DEFAULT_ENDPOINT
    timeout: float = 10.0
    retries: int = 3
    cache_dir: str | None = None
    refresh: bool = False

    def __post_init__(self):
        if self.seeds_k < 1 or self.titles_per_seed < 1:
            raise ValueError("seeds_k and titles_per_seed must be >= 1")


@dataclass
class ExpandedPhrase:
    title: str
    source_seed: str
    score: float
    is_new: bool


def _cache_path(cache_dir: Path, seed: str) -> Path:
    digest = hashlib.sha1(seed.encode("utf-8")).hexdigest()
    return cache_dir / f"{digest}.json"


def fetch_titles(seed: str, config: ExpansionConfig, session=None) -> list[str]:
    """Up to titles_per_seed Wikipedia titles for a seed phrase, API order
    preserved. Failures degrade to an empty list with a warning; responses
    are cached on disk when a cache_dir is configured."""
    if not seed:
        raise ValueError("seed must be nonempty")
    cache_file = None
    if config.cache_dir:
        cache_dir = Path(config.cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        cache_file = _cache_path(cache_dir, seed)
        if cache_file.exists() and not config.refresh:
            cached = json.loads(cache_file.read_text(encoding="utf-8"))
            return cached["titles"][: config.titles_per_seed]

    session = session or requests
    titles: list[str] | None = None
    last_error = None
    for _ in range(config.retries):
        try:
            resp = session.get(
                config.api_endpoint,
                params={
                    "action": "query",
                    "list": "search",
                    "srsearch": seed,
                    "format": "json",
                    "srlimit": config.titles_per_seed,
                },
                timeout=config.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
            titles = [hit["title"] for hit in payload["query"]["search"]]
            break
        except Exception as exc:
            last_error = exc
    if titles is None:
        warnings.warn(f"title fetch failed for seed {seed!r}: {last_error}; "
                      "skipping")
        return []

    titles = titles[: config.titles_per_seed]
    if cache_file is not None:
        cache_file.write_text(
            json.dumps({"seed": seed, "titles": titles}, ensure_ascii=False),
            encoding="utf-8",
        )
    return titles


def _stemmed_words(words) -> tuple[str, ...]:
    return tuple(stem(w) for w in words)


def _contains_subsequence(haystack: list[str], needle: tuple[str, ...]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    return any(tuple(haystack[i : i + n]) == needle
               for i in range(len(haystack) - n + 1))


def _title_words(title: str) -> tuple[str, ...]:
    cleaned = "".join(c if c.isalnum() or c in "'- " else " " for c in title)
    return tuple(w for w in cleaned.casefold().split() if w)


def expand(doc: Document, model: lda.TopicModel, backend,
           rank_cfg: ranking.RankingConfig, exp_cfg: ExpansionConfig,
           session=None) -> list[ExpandedPhrase]:
    """Rank the deduplicated union of extracted seed phrases and fetched
    Wikipedia titles against the source document, descending by score."""
    if isinstance(backend, emb.EmbeddingBackendConfig):
        backend = emb.make_backend(backend)
    base = ranking.rank_document(doc, model, backend, rank_cfg)
    seeds = [phrase for phrase, _ in base.phrases[: exp_cfg.seeds_k]]
    if not seeds:
        warnings.warn(f"document {doc.id!r} yields no seed phrases; "
                      "nothing to expand")
        return []

    with ThreadPoolExecutor(max_workers=MAX_CONCURRENT_FETCHES) as pool:
        fetched = list(pool.map(
            lambda s: fetch_titles(s, exp_cfg, session=session), seeds))

    # union of seeds and titles, deduplicated on case-folded surface
    nodes: list[CandidatePhrase] = []
    sources: list[str] = []
    seen: set[str] = set()
    next_position = len(doc.tokens)
    for seed in seeds:
        words = tuple(seed.split())
        nodes.append(CandidatePhrase(seed, words, [(next_position, 0, 0)]))
        sources.append(seed)
        seen.add(seed)
        next_position += 1
    any_titles = False
    for seed, titles in zip(seeds, fetched):
        for title in titles:
            any_titles = True
            key = " ".join(_title_words(title))
            if not key or key in seen:
                continue
            seen.add(key)
            nodes.append(CandidatePhrase(key, _title_words(title),
                                         [(next_position, 0, 0)]))
            sources.append(seed)
            next_position += 1
    if not any_titles:
        warnings.warn("no titles fetched; re-ranking seed phrases only")

    texts = [n.surface for n in nodes] + [doc.raw_text]
    vectors = backend.embed(texts)
    phrase_embs = [emb.fuse_phrase(n, model, v)
                   for n, v in zip(nodes, vectors)]
    doc_emb = emb.fuse_document(doc, model, vectors[-1])

    F = ranking.informativeness(phrase_embs, doc_emb)
    complete_cfg = ranking.RankingConfig(
        damping=rank_cfg.damping,
        window=ranking.INFINITE,
        positional=False,
        pagerank_tol=rank_cfg.pagerank_tol,
        pagerank_max_iter=rank_cfg.pagerank_max_iter,
        epsilon_bias=rank_cfg.epsilon_bias,
    )
    graph = ranking.build_graph(nodes, phrase_embs, F, complete_cfg)
    result = ranking.rank(graph, complete_cfg)

    doc_stems = [stem(t.lower) for t in doc.tokens]
    out = []
    for idx in result.ranked:
        node = nodes[idx]
        out.append(ExpandedPhrase(
            title=node.surface,
            source_seed=sources[idx],
            score=float(result.scores[idx]),
            is_new=not _contains_subsequence(doc_stems,
                                             _stemmed_words(node.words)),
        ))
    return out
