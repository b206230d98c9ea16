"""Evaluation harness: stemmed gold matching, macro-averaged P/R/F1@k,
paired significance tests and hyperparameter sweeps.
"""

from __future__ import annotations

import csv
import itertools
import logging
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import stats

from . import embedding as emb
from . import lda, ranking
from .corpus import Corpus
from .porter import stem

log = logging.getLogger(__name__)


def _stem_key(phrase: str) -> tuple[str, ...]:
    cleaned = "".join(c if c.isalnum() or c in "'- " else " " for c in phrase)
    return tuple(stem(w) for w in cleaned.casefold().split())


def match_gold(predicted: list[str], gold: list[str]) -> list[bool]:
    """One flag per prediction: True when its stemmed lower-cased token
    sequence equals some gold key's, each gold key credited at most once."""
    remaining: dict[tuple[str, ...], int] = {}
    for g in gold:
        key = _stem_key(g)
        remaining[key] = remaining.get(key, 0) + 1
    matches = []
    for p in predicted:
        key = _stem_key(p)
        if remaining.get(key, 0) > 0:
            remaining[key] -= 1
            matches.append(True)
        else:
            matches.append(False)
    return matches


@dataclass
class MetricsAtK:
    k: int
    precision: float
    recall: float
    f1: float
    per_document: list[tuple[str, float, float, float]] = field(
        default_factory=list)


def _dedup_predictions(predictions: list[str]) -> list[str]:
    # dedup on stemmed form before truncating at k
    seen = set()
    out = []
    for p in predictions:
        key = _stem_key(p)
        if key in seen:
            continue
        seen.add(key)
        out.append(p)
    return out


def metrics_at_k(runs: dict[str, list[str]], corpus: Corpus,
                 k: int) -> MetricsAtK:
    """Macro-averaged precision and recall over documents with gold keys;
    F1 is the harmonic mean of the averages (trec-eval convention)."""
    per_doc = []
    precisions = []
    recalls = []
    for doc in corpus.documents:
        if doc.id not in runs:
            continue
        if not doc.gold_keys:
            warnings.warn(f"document {doc.id!r} has no gold keys; excluded")
            continue
        preds = _dedup_predictions(runs[doc.id])[:k]
        n_matched = sum(match_gold(preds, doc.gold_keys))
        p = n_matched / k
        r = n_matched / len(doc.gold_keys)
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        per_doc.append((doc.id, p, r, f))
        precisions.append(p)
        recalls.append(r)
    if not per_doc:
        raise ValueError("no documents with predictions and gold keys")
    P = float(np.mean(precisions))
    R = float(np.mean(recalls))
    F1 = 2 * P * R / (P + R) if P + R > 0 else 0.0
    return MetricsAtK(k=k, precision=P, recall=R, f1=F1, per_document=per_doc)


@dataclass
class SignificanceReport:
    p_value: float
    effect_size_d: float
    n: int
    degenerate: bool = False


def paired_ttest(a: list[float], b: list[float]) -> SignificanceReport:
    """Two-sided paired t-test on per-document score vectors, with Cohen's d
    of the differences. Zero-variance differences are degenerate."""
    if len(a) != len(b):
        raise ValueError("paired vectors must have equal length")
    if len(a) < 2:
        raise ValueError("paired t-test needs at least 2 pairs")
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    sd = diff.std(ddof=1)
    if sd < 1e-15:
        d = 0.0 if abs(diff.mean()) < 1e-15 else float("inf") * np.sign(diff.mean())
        return SignificanceReport(p_value=float("nan"), effect_size_d=float(d),
                                  n=len(a), degenerate=True)
    t = stats.ttest_rel(a, b)
    return SignificanceReport(p_value=float(t.pvalue),
                              effect_size_d=float(diff.mean() / sd),
                              n=len(a))


@dataclass
class SweepRow:
    params: dict
    metrics: MetricsAtK | None
    error: str | None = None


def run_extraction(corpus: Corpus, model: lda.TopicModel, backend,
                   config: ranking.RankingConfig) -> dict[str, list[str]]:
    """Ranked predictions for every corpus document, keyed by document id.
    Documents use their fitted theta rows when the model was trained on this
    corpus (matched by size), otherwise fold-in."""
    fitted = model.theta.shape[0] == len(corpus.documents)
    runs = {}
    for idx, doc in enumerate(corpus.documents):
        pairs = ranking.extract(doc, model, backend, config,
                                doc_index=idx if fitted else None)
        runs[doc.id] = [phrase for phrase, _ in pairs]
    return runs


def sweep(corpus: Corpus, grid: dict[str, list], model: lda.TopicModel,
          backend, base_config: ranking.RankingConfig, k: int = 10,
          lda_config: lda.TopicModelConfig | None = None) -> list[SweepRow]:
    """One evaluation per grid point over {window, damping, num_topics}.
    num_topics points refit the topic model; failures become failed rows and
    the sweep continues."""
    if isinstance(backend, emb.EmbeddingBackendConfig):
        backend = emb.make_backend(backend)
    names = sorted(grid)
    unknown = set(names) - {"window", "damping", "num_topics"}
    if unknown:
        raise ValueError(f"unknown sweep parameters: {sorted(unknown)}")

    rows = []
    models: dict[int, lda.TopicModel] = {model.num_topics: model}
    for values in itertools.product(*(grid[n] for n in names)):
        params = dict(zip(names, values))
        try:
            config = base_config
            if "window" in params:
                config = replace(config, window=params["window"])
            if "damping" in params:
                config = replace(config, damping=params["damping"])
            point_model = model
            if "num_topics" in params:
                kt = params["num_topics"]
                if kt not in models:
                    cfg = lda_config or lda.TopicModelConfig(num_topics=kt)
                    models[kt] = lda.fit_lda(
                        corpus, replace(cfg, num_topics=kt, alpha=None))
                point_model = models[kt]
            runs = run_extraction(corpus, point_model, backend, config)
            rows.append(SweepRow(params=params,
                                 metrics=metrics_at_k(runs, corpus, k)))
        except Exception as exc:
            log.warning("sweep point %s failed: %s", params, exc)
            rows.append(SweepRow(params=params, metrics=None, error=str(exc)))
    return rows


def write_sweep_csv(rows: list[SweepRow], path: Path | str) -> None:
    names = sorted({name for row in rows for name in row.params})
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + ["precision", "recall", "f1", "error"])
        for row in rows:
            cells = [row.params.get(n, "") for n in names]
            if row.metrics is not None:
                writer.writerow(cells + [f"{row.metrics.precision:.6f}",
                                         f"{row.metrics.recall:.6f}",
                                         f"{row.metrics.f1:.6f}", ""])
            else:
                writer.writerow(cells + ["", "", "", row.error or "failed"])


def write_metrics_csv(per_method: dict[str, MetricsAtK],
                      path: Path | str) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "k", "precision", "recall", "f1"])
        for method, m in per_method.items():
            writer.writerow([method, m.k, f"{m.precision:.6f}",
                             f"{m.recall:.6f}", f"{m.f1:.6f}"])
