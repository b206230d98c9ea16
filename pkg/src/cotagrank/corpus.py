"""Corpus loading and normalization: tokenization, sentence splitting, POS
tagging, stemming and the dataset adapters (JSONL, Inspec, SemEval).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable

from .porter import stem as porter_stem

__all__ = [
    "Token",
    "Document",
    "Corpus",
    "tokenize",
    "pos_tag",
    "stem",
    "load_dataset",
    "load_jsonl",
    "save_jsonl",
    "stopwords",
    "build_vocabulary",
    "DatasetError",
]


class DatasetError(Exception):
    """Raised for malformed dataset files or unknown formats."""


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    pos: str
    index: int
    sentence_id: int
    # char offset into raw_text, -1 when synthesized; excluded from equality
    # so tagged JSONL round-trips compare equal
    start: int = field(default=-1, compare=False)


@dataclass
class Document:
    id: str
    tokens: list[Token]
    raw_text: str
    gold_keys: list[str] | None = None

    def sentences(self) -> list[list[Token]]:
        out: list[list[Token]] = []
        for tok in self.tokens:
            while tok.sentence_id >= len(out):
                out.append([])
            out[tok.sentence_id].append(tok)
        return out


@dataclass
class Corpus:
    documents: list[Document]
    vocabulary: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.documents)


_WORD_RE = re.compile(r"[A-Za-z0-9]+(?:['’\-][A-Za-z0-9]+)*|\S")
_SENT_END = {".", "!", "?"}
_PUNCT_RE = re.compile(r"^\W+$", re.UNICODE)


def tokenize(raw: str) -> list[Token]:
    """Split text into tokens with sentence ids assigned by punctuation rules.

    Sentences break after [.?!] when the next word starts with an upper-case
    letter or a digit. Deterministic: same bytes in, same tokens out.
    """
    matches = list(_WORD_RE.finditer(raw))
    tokens: list[Token] = []
    sent_id = 0
    pending_break = False
    for i, m in enumerate(matches):
        surface = m.group()
        if pending_break:
            nxt = surface[0]
            if nxt.isupper() or nxt.isdigit():
                sent_id += 1
                pending_break = False
        tokens.append(
            Token(
                surface=surface,
                lower=surface.casefold(),
                pos="",
                index=i,
                sentence_id=sent_id,
                start=m.start(),
            )
        )
        if surface in _SENT_END:
            pending_break = True
    return tokens


_PUNCT_TAGS = {
    ".": ".", "!": ".", "?": ".", ",": ",", ":": ":", ";": ":",
    "(": "(", ")": ")", "``": "``", "''": "''", '"': "''", "'": "''",
    "#": "#", "$": "$",
}


def pos_tag(tokens: list[Token], tagger=None) -> list[Token]:
    """Return tokens with the ``pos`` field filled.

    Tokens already carrying a tag are passed through verbatim. Punctuation is
    tagged by table lookup; everything else goes through the perceptron
    tagger (the shipped model by default).
    """
    if not tokens:
        return []
    if all(t.pos for t in tokens):
        return list(tokens)
    if tagger is None:
        from .tagger import default_tagger

        tagger = default_tagger()
    out: list[Token] = []
    for sent in _group_sentences(tokens):
        words = [t.surface for t in sent]
        tags = tagger.tag(words)
        for tok, tag in zip(sent, tags):
            if tok.pos:
                out.append(tok)
            elif tok.surface in _PUNCT_TAGS:
                out.append(replace(tok, pos=_PUNCT_TAGS[tok.surface]))
            else:
                out.append(replace(tok, pos=tag))
    return out


def _group_sentences(tokens: Iterable[Token]) -> list[list[Token]]:
    sents: list[list[Token]] = []
    for tok in tokens:
        while tok.sentence_id >= len(sents):
            sents.append([])
        sents[tok.sentence_id].append(tok)
    return [s for s in sents if s]


def stem(word: str) -> str:
    """Porter stem of a lower-cased word."""
    return porter_stem(word)


_stopwords_cache: frozenset[str] | None = None


def stopwords() -> frozenset[str]:
    """The frozen English stopword list shipped with the package."""
    global _stopwords_cache
    if _stopwords_cache is None:
        text = resources.files("cotagrank.data").joinpath("stopwords.txt").read_text()
        _stopwords_cache = frozenset(w.strip() for w in text.split() if w.strip())
    return _stopwords_cache


def build_vocabulary(documents: Iterable[Document]) -> dict[str, int]:
    """Dense word -> id map over lower-cased tokens, stopwords and
    punctuation excluded."""
    stop = stopwords()
    words = set()
    for doc in documents:
        for tok in doc.tokens:
            w = tok.lower
            if w in stop or _PUNCT_RE.match(w):
                continue
            words.add(w)
    return {w: i for i, w in enumerate(sorted(words))}


def _document_from_record(rec: dict, source: str, line_no: int) -> Document:
    try:
        doc_id = rec["id"]
        text = rec["text"]
    except KeyError as exc:
        raise DatasetError(f"{source}:{line_no}: missing field {exc}") from None
    gold = rec.get("gold")
    if "tokens" in rec and rec["tokens"] is not None:
        tokens = []
        sent_id = 0
        pending = False
        for i, item in enumerate(rec["tokens"]):
            surface, tag = item["t"], item.get("pos", "")
            if pending and (surface[:1].isupper() or surface[:1].isdigit()):
                sent_id += 1
                pending = False
            tokens.append(
                Token(surface=surface, lower=surface.casefold(), pos=tag,
                      index=i, sentence_id=sent_id)
            )
            if surface in _SENT_END:
                pending = True
        doc = Document(id=doc_id, tokens=tokens, raw_text=text, gold_keys=gold)
    else:
        doc = Document(id=doc_id, tokens=tokenize(text), raw_text=text,
                       gold_keys=gold)
    return doc


def load_jsonl(path: Path | str) -> Corpus:
    path = Path(path)
    docs: list[Document] = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{line_no}: bad JSON ({exc})") from None
            docs.append(_document_from_record(rec, str(path), line_no))
    return Corpus(documents=docs, vocabulary=build_vocabulary(docs))


def save_jsonl(corpus: Corpus, path: Path | str) -> None:
    """Write the normalized JSONL form; load_jsonl inverts this exactly."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            rec: dict = {"id": doc.id, "text": doc.raw_text}
            if doc.gold_keys is not None:
                rec["gold"] = doc.gold_keys
            if any(t.pos for t in doc.tokens):
                rec["tokens"] = [{"t": t.surface, "pos": t.pos} for t in doc.tokens]
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def _load_inspec_dir(path: Path) -> list[Document]:
    docs = []
    for abstr in sorted(path.glob("*.abstr")):
        text = abstr.read_text(encoding="utf-8", errors="replace")
        text = re.sub(r"\s+", " ", text).strip()
        gold_file = abstr.with_suffix(".uncontr")
        gold = None
        if gold_file.exists():
            raw = gold_file.read_text(encoding="utf-8", errors="replace")
            gold = [re.sub(r"\s+", " ", g).strip() for g in raw.split(";")]
            gold = [g for g in gold if g]
        docs.append(Document(id=abstr.stem, tokens=tokenize(text),
                             raw_text=text, gold_keys=gold))
    return docs


def _load_semeval_dir(path: Path) -> list[Document]:
    docs = []
    for txt in sorted(path.glob("*.txt")):
        text = txt.read_text(encoding="utf-8", errors="replace").strip()
        gold: list[str] | None = None
        key_file = txt.with_suffix(".key")
        ann_file = txt.with_suffix(".ann")
        if key_file.exists():
            gold = [g.strip() for g in key_file.read_text(encoding="utf-8").splitlines()
                    if g.strip()]
        elif ann_file.exists():
            gold = []
            for line in ann_file.read_text(encoding="utf-8").splitlines():
                if line.startswith("T"):
                    parts = line.split("\t")
                    if len(parts) >= 3:
                        gold.append(parts[-1].strip())
            gold = sorted(set(gold))
        docs.append(Document(id=txt.stem, tokens=tokenize(text),
                             raw_text=text, gold_keys=gold))
    return docs


def load_dataset(path: Path | str, format: str) -> Corpus:
    """Load a corpus in one of the supported layouts.

    format: "jsonl" (normalized records), "inspec_dir" (.abstr/.uncontr
    pairs) or "semeval_dir" (.txt with .key or .ann gold files).
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset path does not exist: {path}")
    if format == "jsonl":
        return load_jsonl(path)
    if format == "inspec_dir":
        docs = _load_inspec_dir(path)
    elif format == "semeval_dir":
        docs = _load_semeval_dir(path)
    else:
        raise DatasetError(f"unknown dataset format: {format!r}")
    return Corpus(documents=docs, vocabulary=build_vocabulary(docs))
