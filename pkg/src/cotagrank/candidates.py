"""Candidate phrase extraction by the noun-phrase POS pattern.

A candidate is a maximal run of NN*/JJ tags ending in an NN* tag, chunked
greedily left to right within each sentence and capped at MAX_PHRASE_LEN
tokens. Case-folded duplicates are merged with pooled occurrences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import Document, Token

MAX_PHRASE_LEN = 5


class UntaggedDocumentError(Exception):
    """extract_candidates requires POS-tagged tokens."""


@dataclass
class CandidatePhrase:
    surface: str                       # canonical lower-cased form
    words: tuple[str, ...]             # lower-cased tokens
    # (start_token_index, end_token_index_exclusive, sentence_id), sorted
    occurrences: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def first_position(self) -> int:
        """1-based token index of the earliest occurrence."""
        return 1 + min(start for start, _, _ in self.occurrences)


def _is_pattern_tag(tag: str) -> bool:
    return tag.startswith("NN") or tag == "JJ"


def _is_noun_tag(tag: str) -> bool:
    return tag.startswith("NN")


def extract_candidates(doc: Document) -> list[CandidatePhrase]:
    """Extract deduplicated candidate phrases with all occurrence positions,
    sorted by first occurrence."""
    if doc.tokens and any(not t.pos for t in doc.tokens):
        raise UntaggedDocumentError(f"document {doc.id!r} has untagged tokens")

    by_surface: dict[str, CandidatePhrase] = {}
    for sentence in doc.sentences():
        for span in _match_spans(sentence):
            words = tuple(t.lower for t in span)
            surface = " ".join(words)
            occ = (span[0].index, span[-1].index + 1, span[0].sentence_id)
            cand = by_surface.get(surface)
            if cand is None:
                by_surface[surface] = CandidatePhrase(surface, words, [occ])
            else:
                cand.occurrences.append(occ)

    out = list(by_surface.values())
    for cand in out:
        cand.occurrences.sort()
    out.sort(key=lambda c: (c.first_position, c.surface))
    return out


def _match_spans(sentence: list[Token]) -> list[list[Token]]:
    """Greedy longest-match chunking of one sentence, never crossing it."""
    spans: list[list[Token]] = []
    i = 0
    n = len(sentence)
    while i < n:
        if not _is_pattern_tag(sentence[i].pos):
            i += 1
            continue
        # maximal run of pattern tags starting at i
        run_end = i
        while run_end < n and _is_pattern_tag(sentence[run_end].pos):
            run_end += 1
        pos = i
        while pos < run_end:
            limit = min(pos + MAX_PHRASE_LEN, run_end)
            last = limit - 1
            while last >= pos and not _is_noun_tag(sentence[last].pos):
                last -= 1
            if last < pos:
                pos += 1
                continue
            spans.append(sentence[pos : last + 1])
            pos = last + 1
        i = run_end
    return spans
