import numpy as np
import pytest

from cotagrank import lda
from cotagrank.corpus import Corpus, Document, Token, build_vocabulary

from .conftest import TOPIC_A_WORDS, make_synthetic_corpus


# alpha=0.5: the 50/K default is tuned for large K and over-smooths theta
# at K=2 on short documents
def small_config(**kw):
    defaults = dict(num_topics=2, alpha=0.5, gibbs_iterations=200, seed=7)
    defaults.update(kw)
    return lda.TopicModelConfig(**defaults)


def _word_doc(words, doc_id="d"):
    tokens = [Token(w, w, "NN", i, 0) for i, w in enumerate(words)]
    return Document(doc_id, tokens, " ".join(words))


@pytest.fixture(scope="module")
def fitted(synthetic_corpus):
    return lda.fit_lda(synthetic_corpus, small_config())


class TestConfig:
    def test_alpha_default(self):
        cfg = lda.TopicModelConfig(num_topics=500)
        assert cfg.alpha == pytest.approx(0.1)
        assert cfg.beta == 0.01

    def test_invalid(self):
        with pytest.raises(ValueError):
            lda.TopicModelConfig(num_topics=1)
        with pytest.raises(ValueError):
            lda.TopicModelConfig(num_topics=2, beta=0.0)


class TestFit:
    def test_row_stochastic(self, fitted):
        np.testing.assert_allclose(fitted.phi.sum(axis=1), 1.0, atol=1e-9)
        np.testing.assert_allclose(fitted.theta.sum(axis=1), 1.0, atol=1e-9)
        assert (fitted.phi >= 0).all() and (fitted.theta >= 0).all()

    def test_purity_on_disjoint_vocabularies(self, fitted):
        purity = fitted.theta.max(axis=1)
        assert (purity >= 0.9).all()

    def test_deterministic(self, synthetic_corpus):
        a = lda.fit_lda(synthetic_corpus, small_config())
        b = lda.fit_lda(synthetic_corpus, small_config())
        assert np.array_equal(a.phi, b.phi)
        assert np.array_equal(a.theta, b.theta)

    def test_single_word_corpus(self):
        doc = _word_doc(["word"])
        corpus = Corpus([doc], build_vocabulary([doc]))
        model = lda.fit_lda(corpus, small_config(gibbs_iterations=10))
        assert model.theta[0].sum() == pytest.approx(1.0, abs=1e-9)

    def test_empty_corpus(self):
        with pytest.raises(lda.TopicModelError):
            lda.fit_lda(Corpus([], {}), small_config())

    def test_empty_vocabulary(self):
        doc = _word_doc(["the"])  # stopword only
        corpus = Corpus([doc], build_vocabulary([doc]))
        with pytest.raises(lda.TopicModelError):
            lda.fit_lda(corpus, small_config())


class TestPhraseVector:
    def test_single_word_equals_phi_column(self, fitted):
        word = TOPIC_A_WORDS[0]
        idx = fitted.vocabulary[word]
        vec = lda.phrase_topic_vector([word], fitted)
        np.testing.assert_array_equal(vec, fitted.phi[:, idx])

    def test_oov_is_zero(self, fitted):
        vec = lda.phrase_topic_vector(["zzzunknown"], fitted)
        assert not vec.any()

    def test_additivity(self, fitted):
        a, b = TOPIC_A_WORDS[0], TOPIC_A_WORDS[1]
        both = lda.phrase_topic_vector([a, b], fitted)
        np.testing.assert_allclose(
            both,
            lda.phrase_topic_vector([a], fitted)
            + lda.phrase_topic_vector([b], fitted),
        )


class TestDocumentVector:
    def test_distribution(self, fitted):
        vec = lda.document_topic_vector(0, fitted)
        assert vec.sum() == pytest.approx(1.0, abs=1e-9)
        assert (vec >= 0).all()

    def test_pure_doc(self, fitted):
        assert lda.document_topic_vector(0, fitted).max() >= 0.9

    def test_unknown_doc(self, fitted):
        with pytest.raises(lda.TopicModelError):
            lda.document_topic_vector(10_000, fitted)


class TestFoldIn:
    def test_pure_new_doc(self, fitted):
        doc = _word_doc([TOPIC_A_WORDS[i % len(TOPIC_A_WORDS)]
                         for i in range(20)], "new")
        vec = lda.fold_in(doc, fitted)
        topic = int(np.argmax(fitted.phi[:, fitted.vocabulary[TOPIC_A_WORDS[0]]]))
        assert vec[topic] >= 0.9

    def test_empty_vocab_doc_uniform(self, fitted):
        doc = _word_doc(["the"], "empty")
        with pytest.warns(UserWarning):
            vec = lda.fold_in(doc, fitted)
        np.testing.assert_allclose(vec, 0.5)

    def test_matches_training_theta(self, synthetic_corpus, fitted):
        doc = synthetic_corpus.documents[0]
        folded = lda.fold_in(doc, fitted)
        tv = 0.5 * np.abs(folded - fitted.theta[0]).sum()
        assert tv <= 0.1


class TestPersistence:
    def test_roundtrip(self, fitted, tmp_path):
        path = tmp_path / "model.bin"
        fitted.save(path)
        loaded = lda.TopicModel.load(path)
        assert np.array_equal(loaded.phi, fitted.phi)
        assert np.array_equal(loaded.theta, fitted.theta)
        assert loaded.vocabulary == fitted.vocabulary
        assert loaded.seed == fitted.seed

    def test_magic_header(self, fitted, tmp_path):
        path = tmp_path / "model.bin"
        fitted.save(path)
        assert path.read_bytes()[:9] == b"COTAGLDA1"

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOTAMODEL" + b"\x00" * 64)
        with pytest.raises(lda.TopicModelError):
            lda.TopicModel.load(path)

    def test_save_is_deterministic(self, synthetic_corpus, tmp_path):
        a = lda.fit_lda(synthetic_corpus, small_config())
        b = lda.fit_lda(synthetic_corpus, small_config())
        pa, pb = tmp_path / "a.bin", tmp_path / "b.bin"
        a.save(pa)
        b.save(pb)
        assert pa.read_bytes() == pb.read_bytes()
