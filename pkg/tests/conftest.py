import random

import pytest

from cotagrank import corpus as corpus_mod
from cotagrank.corpus import Corpus, Document, Token, build_vocabulary
from cotagrank.embedding import EmbeddingBackendConfig, make_backend

TOPIC_A_WORDS = ["buoyancy", "fluid", "pressure", "density", "water",
                 "force", "volume", "weight", "liquid", "float"]
TOPIC_B_WORDS = ["matrix", "vector", "algebra", "determinant", "eigenvalue",
                 "basis", "subspace", "rank", "kernel", "transpose"]


def doc_from_tagged(pairs, doc_id="doc", gold=None):
    """Document from [(word, tag), ...]; sentence ids follow '.' tokens."""
    tokens = []
    sent_id = 0
    for i, (word, tag) in enumerate(pairs):
        tokens.append(Token(surface=word, lower=word.casefold(), pos=tag,
                            index=i, sentence_id=sent_id))
        if word == ".":
            sent_id += 1
    return Document(id=doc_id, tokens=tokens,
                    raw_text=" ".join(w for w, _ in pairs), gold_keys=gold)


def make_synthetic_corpus(n_docs=100, doc_len=20, seed=1234):
    """Two disjoint 10-word vocabularies; each document draws from one."""
    rng = random.Random(seed)
    docs = []
    for d in range(n_docs):
        words = TOPIC_A_WORDS if d % 2 == 0 else TOPIC_B_WORDS
        chosen = [rng.choice(words) for _ in range(doc_len)]
        tokens = [Token(surface=w, lower=w, pos="NN", index=i, sentence_id=0)
                  for i, w in enumerate(chosen)]
        docs.append(Document(id=f"doc{d}", tokens=tokens,
                             raw_text=" ".join(chosen)))
    return Corpus(documents=docs, vocabulary=build_vocabulary(docs))


@pytest.fixture(scope="session")
def synthetic_corpus():
    return make_synthetic_corpus()


@pytest.fixture(scope="session")
def test_backend():
    return make_backend(EmbeddingBackendConfig(kind="deterministic_test",
                                               dimension=32))


@pytest.fixture()
def tagged_text_doc():
    def build(text, doc_id="doc", gold=None):
        doc = Document(id=doc_id, tokens=corpus_mod.pos_tag(
            corpus_mod.tokenize(text)), raw_text=text, gold_keys=gold)
        return doc
    return build
