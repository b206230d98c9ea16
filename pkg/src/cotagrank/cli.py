"""Command-line surface: train-lda, extract, expand, eval, sweep.

Flags override values from an optional TOML config file; every command that
writes an artifact drops a JSON manifest alongside it recording the settings
used. Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import hashlib
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:  # stdlib from 3.11; fall back on 3.10
    import tomli as tomllib
from dataclasses import asdict
from pathlib import Path

import click

from . import corpus as corpus_mod
from . import embedding as emb
from . import evaluation, expansion, lda, ranking

BACKEND_KINDS = {"remote": "remote_service", "static": "static_vectors",
                 "test": "deterministic_test"}


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _setting(flags: dict, config: dict, key: str, default):
    if flags.get(key) is not None:
        return flags[key]
    if key in config:
        return config[key]
    return default


def _corpus_hash(corpus: corpus_mod.Corpus) -> str:
    digest = hashlib.sha256()
    for doc in corpus.documents:
        digest.update(doc.id.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(doc.raw_text.encode("utf-8"))
        digest.update(b"\x00")
    return digest.hexdigest()


def _write_manifest(out: Path, settings: dict) -> None:
    manifest = Path(str(out) + ".manifest.json")
    manifest.write_text(json.dumps(settings, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")


def _make_backend(name: str, endpoint: str | None, vectors: str | None):
    kind = BACKEND_KINDS.get(name)
    if kind is None:
        raise click.BadParameter(f"unknown backend {name!r}", param_hint="--backend")
    cfg = emb.EmbeddingBackendConfig(kind=kind, endpoint=endpoint, path=vectors)
    try:
        return emb.make_backend(cfg)
    except emb.BackendError as exc:
        raise click.ClickException(str(exc)) from exc


def _ranking_config(cfg_file: dict, top_k, lambda_, window, positional):
    damping = _setting({"lambda": lambda_}, cfg_file, "lambda", 0.15)
    window = _setting({"window": window}, cfg_file, "window", None)
    return ranking.RankingConfig(
        damping=float(damping),
        window=ranking.INFINITE if window in (None, 0) else float(window),
        positional=bool(positional or cfg_file.get("positional", False)),
        top_k=int(_setting({"top_k": top_k}, cfg_file, "top_k", 10)),
    )


def _load_corpus(data: str, fmt: str) -> corpus_mod.Corpus:
    try:
        return corpus_mod.load_dataset(data, fmt)
    except corpus_mod.DatasetError as exc:
        raise click.ClickException(str(exc)) from exc


def _tag_corpus(corpus: corpus_mod.Corpus) -> None:
    for doc in corpus.documents:
        doc.tokens = corpus_mod.pos_tag(doc.tokens)


@click.group()
def main() -> None:
    """CoTagRank: topic-aware unsupervised keyphrase extraction."""


@main.command("train-lda")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="jsonl",
              type=click.Choice(["jsonl", "inspec_dir", "semeval_dir"]))
@click.option("--topics", type=int, default=None)
@click.option("--iterations", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
def cmd_train_lda(config_path, data, fmt, topics, iterations, seed, out):
    """Fit the topic model once on a corpus and persist it."""
    cfg_file = _load_config_file(config_path)
    corpus = _load_corpus(data, fmt)
    config = lda.TopicModelConfig(
        num_topics=int(_setting({"topics": topics}, cfg_file, "topics", 500)),
        gibbs_iterations=int(_setting({"iterations": iterations}, cfg_file,
                                      "iterations", 1000)),
        seed=int(_setting({"seed": seed}, cfg_file, "seed", 42)),
    )
    try:
        model = lda.fit_lda(corpus, config)
    except lda.TopicModelError as exc:
        raise click.ClickException(str(exc)) from exc
    out = Path(out)
    model.save(out)
    _write_manifest(out, {
        "command": "train-lda",
        "topics": config.num_topics,
        "iterations": config.gibbs_iterations,
        "seed": config.seed,
        "corpus_hash": _corpus_hash(corpus),
        "vocabulary_size": len(corpus.vocabulary),
        "documents": len(corpus.documents),
    })
    click.echo(f"wrote {out} (K={config.num_topics}, "
               f"V={len(corpus.vocabulary)}, D={len(corpus.documents)})")


def _common_extract_options(fn):
    for opt in reversed([
        click.option("--config", "config_path", type=click.Path(exists=True)),
        click.option("--model", "model_path", required=True,
                     type=click.Path(exists=True)),
        click.option("--backend", default="test",
                     type=click.Choice(sorted(BACKEND_KINDS))),
        click.option("--endpoint", default=None),
        click.option("--vectors", default=None, type=click.Path()),
        click.option("--top-k", "top_k", type=int, default=None),
        click.option("--lambda", "lambda_", type=float, default=None),
        click.option("--window", type=float, default=None),
        click.option("--positional", is_flag=True, default=False),
    ]):
        fn = opt(fn)
    return fn


@main.command("extract")
@_common_extract_options
@click.option("--doc", "doc_path", type=click.Path(exists=True),
              help="Plain-text file holding one document.")
@click.option("--data", type=click.Path(exists=True),
              help="JSONL corpus to extract from instead of --doc.")
@click.option("--out", type=click.Path(), default=None)
def cmd_extract(config_path, model_path, backend, endpoint, vectors, top_k,
                lambda_, window, positional, doc_path, data, out):
    """Extract ranked keyphrases; one JSONL record per document."""
    if (doc_path is None) == (data is None):
        raise click.UsageError("provide exactly one of --doc or --data")
    cfg_file = _load_config_file(config_path)
    model = _load_model(model_path)
    backend_obj = _make_backend(backend, endpoint, vectors)
    config = _ranking_config(cfg_file, top_k, lambda_, window, positional)

    if doc_path:
        text = Path(doc_path).read_text(encoding="utf-8")
        doc = corpus_mod.Document(id=Path(doc_path).stem,
                                  tokens=corpus_mod.tokenize(text),
                                  raw_text=text)
        docs = [doc]
    else:
        docs = _load_corpus(data, "jsonl").documents

    lines = []
    for doc in docs:
        doc.tokens = corpus_mod.pos_tag(doc.tokens)
        pairs = ranking.extract(doc, model, backend_obj, config)
        lines.append(json.dumps({
            "id": doc.id,
            "keyphrases": [{"text": t, "score": s} for t, s in pairs],
        }, ensure_ascii=False))
    _emit(lines, out)
    if out:
        _write_manifest(Path(out), _run_settings("extract", config, backend,
                                                 model_path))


def _load_model(path) -> lda.TopicModel:
    try:
        return lda.TopicModel.load(path)
    except (lda.TopicModelError, OSError) as exc:
        raise click.ClickException(f"cannot load topic model: {exc}") from exc


def _run_settings(command: str, config: ranking.RankingConfig, backend: str,
                  model_path: str, **extra) -> dict:
    settings = {
        "command": command,
        "backend": backend,
        "model": str(model_path),
        "model_sha256": hashlib.sha256(Path(model_path).read_bytes()).hexdigest(),
        "ranking": {**asdict(config),
                    "window": ("inf" if config.window == ranking.INFINITE
                               else config.window)},
    }
    settings.update(extra)
    return settings


def _emit(lines: list[str], out: str | None) -> None:
    if out:
        Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        for line in lines:
            click.echo(line)


@main.command("expand")
@_common_extract_options
@click.option("--doc", "doc_path", required=True, type=click.Path(exists=True))
@click.option("--seeds-k", type=int, default=10)
@click.option("--titles-per-seed", type=int, default=3)
@click.option("--wiki-endpoint", default=expansion.DEFAULT_ENDPOINT)
@click.option("--cache-dir", type=click.Path(), default=None)
@click.option("--refresh", is_flag=True, default=False)
@click.option("--out", type=click.Path(), default=None)
def cmd_expand(config_path, model_path, backend, endpoint, vectors, top_k,
               lambda_, window, positional, doc_path, seeds_k,
               titles_per_seed, wiki_endpoint, cache_dir, refresh, out):
    """Expand extracted keyphrases with Wikipedia titles and re-rank."""
    cfg_file = _load_config_file(config_path)
    model = _load_model(model_path)
    backend_obj = _make_backend(backend, endpoint, vectors)
    config = _ranking_config(cfg_file, top_k, lambda_, window, positional)
    exp_cfg = expansion.ExpansionConfig(
        seeds_k=seeds_k, titles_per_seed=titles_per_seed,
        api_endpoint=wiki_endpoint, cache_dir=cache_dir, refresh=refresh)

    text = Path(doc_path).read_text(encoding="utf-8")
    doc = corpus_mod.Document(id=Path(doc_path).stem,
                              tokens=corpus_mod.pos_tag(
                                  corpus_mod.tokenize(text)),
                              raw_text=text)
    results = expansion.expand(doc, model, backend_obj, config, exp_cfg)
    lines = [json.dumps({
        "title": r.title, "source_seed": r.source_seed,
        "score": r.score, "is_new": r.is_new,
    }, ensure_ascii=False) for r in results]
    _emit(lines, out)
    if out:
        _write_manifest(Path(out), _run_settings(
            "expand", config, backend, model_path,
            expansion={"seeds_k": seeds_k, "titles_per_seed": titles_per_seed,
                       "endpoint": wiki_endpoint}))


@main.command("eval")
@_common_extract_options
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="jsonl",
              type=click.Choice(["jsonl", "inspec_dir", "semeval_dir"]))
@click.option("--k", type=int, default=10)
@click.option("--compare-bias-only", is_flag=True, default=False,
              help="Also score the lambda=0 (bias-only) ranking and report "
                   "a paired t-test against it.")
@click.option("--out", required=True, type=click.Path())
def cmd_eval(config_path, model_path, backend, endpoint, vectors, top_k,
             lambda_, window, positional, data, fmt, k, compare_bias_only,
             out):
    """Score extraction against gold keys; one CSV row per method."""
    import dataclasses

    cfg_file = _load_config_file(config_path)
    model = _load_model(model_path)
    backend_obj = _make_backend(backend, endpoint, vectors)
    config = _ranking_config(cfg_file, top_k, lambda_, window, positional)
    corpus = _load_corpus(data, fmt)
    _tag_corpus(corpus)

    try:
        runs = evaluation.run_extraction(corpus, model, backend_obj, config)
        per_method = {"cotagrank": evaluation.metrics_at_k(runs, corpus, k)}
        if compare_bias_only:
            bias_cfg = dataclasses.replace(config, damping=0.0)
            bias_runs = evaluation.run_extraction(corpus, model, backend_obj,
                                                  bias_cfg)
            per_method["bias_only"] = evaluation.metrics_at_k(bias_runs,
                                                              corpus, k)
            a = [f for _, _, _, f in per_method["cotagrank"].per_document]
            b = [f for _, _, _, f in per_method["bias_only"].per_document]
            report = evaluation.paired_ttest(a, b)
            click.echo(f"paired t-test vs bias-only: p={report.p_value:.4g} "
                       f"d={report.effect_size_d:.3f} n={report.n}"
                       + (" (degenerate)" if report.degenerate else ""))
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc

    evaluation.write_metrics_csv(per_method, out)
    _write_manifest(Path(out), _run_settings("eval", config, backend,
                                             model_path, k=k))
    for method, m in per_method.items():
        click.echo(f"{method}: P@{k}={m.precision:.4f} R@{k}={m.recall:.4f} "
                   f"F1@{k}={m.f1:.4f}")


@main.command("sweep")
@_common_extract_options
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="jsonl",
              type=click.Choice(["jsonl", "inspec_dir", "semeval_dir"]))
@click.option("--k", type=int, default=10)
@click.option("--window-grid", default=None,
              help="Comma-separated window sizes; 0 means complete graph.")
@click.option("--lambda-grid", default=None,
              help="Comma-separated damping values.")
@click.option("--topics-grid", default=None,
              help="Comma-separated topic counts (refits LDA per point).")
@click.option("--out", required=True, type=click.Path())
def cmd_sweep(config_path, model_path, backend, endpoint, vectors, top_k,
              lambda_, window, positional, data, fmt, k, window_grid,
              lambda_grid, topics_grid, out):
    """Hyperparameter sweep; emits one CSV row per grid point."""
    cfg_file = _load_config_file(config_path)
    model = _load_model(model_path)
    backend_obj = _make_backend(backend, endpoint, vectors)
    config = _ranking_config(cfg_file, top_k, lambda_, window, positional)
    corpus = _load_corpus(data, fmt)
    _tag_corpus(corpus)

    grid: dict[str, list] = {}
    if window_grid:
        grid["window"] = [ranking.INFINITE if float(v) == 0 else float(v)
                          for v in window_grid.split(",")]
    if lambda_grid:
        grid["damping"] = [float(v) for v in lambda_grid.split(",")]
    if topics_grid:
        grid["num_topics"] = [int(v) for v in topics_grid.split(",")]
    if not grid:
        raise click.UsageError("provide at least one of --window-grid, "
                               "--lambda-grid, --topics-grid")

    rows = evaluation.sweep(corpus, grid, model, backend_obj, config, k=k)
    evaluation.write_sweep_csv(rows, out)
    _write_manifest(Path(out), _run_settings("sweep", config, backend,
                                             model_path, grid={
                                                 n: [str(v) for v in vals]
                                                 for n, vals in grid.items()},
                                             k=k))
    click.echo(f"wrote {out} ({len(rows)} rows)")


if __name__ == "__main__":
    sys.exit(main())
