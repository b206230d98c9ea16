"""Averaged perceptron POS tagger with a small shipped model.

The tagger is pluggable: anything with a ``tag(words) -> tags`` method works
wherever a tagger is accepted, and pre-tagged JSONL input bypasses tagging
entirely. The shipped model is trained by ``scripts/train_tagger.py`` from the
seed corpus in ``cotagrank/data/tagger_seed.txt`` and is versioned so results
stay reproducible.
"""

from __future__ import annotations

import gzip
import json
import random
from collections import defaultdict
from importlib import resources
from pathlib import Path

MODEL_VERSION = 1
DEFAULT_MODEL = "pos_model_v1.json.gz"

_START = ["-START-", "-START2-"]
_END = ["-END-", "-END2-"]


class TaggerModelError(Exception):
    """Raised when a model file is missing or has the wrong version."""


def _normalize(word: str) -> str:
    if word.isdigit():
        return "!DIGIT"
    if any(c.isdigit() for c in word) and "-" in word:
        return "!DIGIT-WORD"
    return word.lower()


def _features(i: int, word: str, context: list[str], prev: str, prev2: str):
    feats = {
        "bias": 1,
        "i word " + context[i]: 1,
        "i suffix " + context[i][-3:]: 1,
        "i pref1 " + context[i][:1]: 1,
        "i-1 tag " + prev: 1,
        "i-2 tag " + prev2: 1,
        "i tag+i-2 tag " + prev + " " + prev2: 1,
        "i-1 word " + context[i - 1]: 1,
        "i-1 suffix " + context[i - 1][-3:]: 1,
        "i-2 word " + context[i - 2]: 1,
        "i+1 word " + context[i + 1]: 1,
        "i+1 suffix " + context[i + 1][-3:]: 1,
        "i+2 word " + context[i + 2]: 1,
    }
    if word[:1].isupper() and i > 2:
        feats["i title"] = 1
    if "-" in word:
        feats["i hyphen"] = 1
    return feats


class AveragedPerceptronTagger:
    def __init__(self, weights: dict, tagdict: dict, classes: list[str]):
        self.weights = weights
        self.tagdict = tagdict
        self.classes = classes

    def tag(self, words: list[str]) -> list[str]:
        context = _START + [_normalize(w) for w in words] + _END
        tags: list[str] = []
        prev, prev2 = _START[0], _START[1]
        for i, word in enumerate(words):
            tag = self.tagdict.get(_normalize(word))
            if tag is None:
                feats = _features(i + 2, word, context, prev, prev2)
                tag = self._predict(feats)
            tags.append(tag)
            prev2, prev = prev, tag
        return tags

    def _predict(self, feats: dict) -> str:
        scores: dict[str, float] = defaultdict(float)
        for feat, value in feats.items():
            per_class = self.weights.get(feat)
            if per_class is None:
                continue
            for tag, weight in per_class.items():
                scores[tag] += weight * value
        # deterministic tie-break on the tag name
        return max(self.classes, key=lambda t: (scores[t], t))

    def save(self, path: Path | str) -> None:
        blob = {
            "version": MODEL_VERSION,
            "weights": self.weights,
            "tagdict": self.tagdict,
            "classes": self.classes,
        }
        with gzip.open(path, "wt", encoding="utf-8") as fh:
            json.dump(blob, fh)

    @classmethod
    def load(cls, path: Path | str) -> "AveragedPerceptronTagger":
        path = Path(path)
        if not path.exists():
            raise TaggerModelError(f"tagger model file not found: {path}")
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            blob = json.load(fh)
        if blob.get("version") != MODEL_VERSION:
            raise TaggerModelError(
                f"unsupported tagger model version {blob.get('version')!r} in {path}"
            )
        return cls(blob["weights"], blob["tagdict"], blob["classes"])


def train(
    sentences: list[list[tuple[str, str]]],
    iterations: int = 8,
    seed: int = 1,
    ambiguity_threshold: float = 0.97,
) -> AveragedPerceptronTagger:
    """Train an averaged perceptron on (word, tag) sentences."""
    classes = sorted({tag for sent in sentences for _, tag in sent})
    tagdict = _make_tagdict(sentences, ambiguity_threshold)

    weights: dict[str, dict[str, float]] = {}
    totals: dict[tuple[str, str], float] = defaultdict(float)
    tstamps: dict[tuple[str, str], int] = defaultdict(int)
    instances = 0
    rng = random.Random(seed)

    def update(truth: str, guess: str, feats: dict) -> None:
        nonlocal instances
        instances += 1
        if truth == guess:
            return
        for feat in feats:
            per_class = weights.setdefault(feat, {})
            for tag, delta in ((truth, 1.0), (guess, -1.0)):
                key = (feat, tag)
                totals[key] += (instances - tstamps[key]) * per_class.get(tag, 0.0)
                tstamps[key] = instances
                per_class[tag] = per_class.get(tag, 0.0) + delta

    def predict(feats: dict) -> str:
        scores: dict[str, float] = defaultdict(float)
        for feat, value in feats.items():
            per_class = weights.get(feat)
            if per_class is None:
                continue
            for tag, weight in per_class.items():
                scores[tag] += weight * value
        return max(classes, key=lambda t: (scores[t], t))

    data = list(sentences)
    for _ in range(iterations):
        rng.shuffle(data)
        for sent in data:
            words = [w for w, _ in sent]
            context = _START + [_normalize(w) for w in words] + _END
            prev, prev2 = _START[0], _START[1]
            for i, (word, truth) in enumerate(sent):
                guess = tagdict.get(_normalize(word))
                if guess is None:
                    feats = _features(i + 2, word, context, prev, prev2)
                    guess = predict(feats)
                    update(truth, guess, feats)
                prev2, prev = prev, guess

    # average the weights
    for feat, per_class in weights.items():
        for tag, weight in list(per_class.items()):
            key = (feat, tag)
            total = totals[key] + (instances - tstamps[key]) * weight
            averaged = round(total / instances, 6)
            if averaged:
                per_class[tag] = averaged
            else:
                del per_class[tag]
    return AveragedPerceptronTagger(weights, tagdict, classes)


def _make_tagdict(sentences, threshold: float) -> dict[str, str]:
    counts: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for sent in sentences:
        for word, tag in sent:
            counts[_normalize(word)][tag] += 1
    tagdict = {}
    for word, tag_counts in counts.items():
        tag, mode = max(tag_counts.items(), key=lambda kv: (kv[1], kv[0]))
        total = sum(tag_counts.values())
        if total >= 2 and mode / total >= threshold:
            tagdict[word] = tag
    return tagdict


def read_tagged_file(path: Path | str) -> list[list[tuple[str, str]]]:
    """Parse a seed corpus: one sentence per line, tokens as word_TAG."""
    sentences = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        sent = []
        for item in line.split():
            word, _, tag = item.rpartition("_")
            if not word or not tag:
                raise TaggerModelError(f"malformed seed token: {item!r}")
            sent.append((word, tag))
        sentences.append(sent)
    return sentences


_default: AveragedPerceptronTagger | None = None


def default_tagger() -> AveragedPerceptronTagger:
    """The shipped model, loaded once per process."""
    global _default
    if _default is None:
        with resources.as_file(
            resources.files("cotagrank.data").joinpath(DEFAULT_MODEL)
        ) as path:
            _default = AveragedPerceptronTagger.load(path)
    return _default
