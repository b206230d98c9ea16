import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotagrank import embedding as E
from cotagrank import lda, ranking
from cotagrank.candidates import CandidatePhrase
from cotagrank.corpus import Corpus, build_vocabulary

from .conftest import doc_from_tagged


def _phrase(i, start):
    return CandidatePhrase(f"phrase {i}", (f"phrase", f"{i}"),
                           [(start, start + 2, 0)])


def random_graph(rng, n):
    """Random symmetric nonnegative weights + random bias distribution."""
    w = rng.random((n, n))
    w = np.triu(w, 1)
    w = w + w.T
    w[rng.random((n, n)) < 0.3] = 0.0          # some missing edges
    w = np.triu(w, 1) + np.triu(w, 1).T        # keep symmetric, zero diag
    bias = rng.random(n) + 1e-9
    bias /= bias.sum()
    nodes = [_phrase(i, i) for i in range(n)]
    return ranking.PhraseGraph(nodes=nodes, edge_weights=w, bias=bias)


def solve_oracle(graph, damping):
    """Dense linear-system solve of the stationary equation, dangling mass
    routed through the bias."""
    w = graph.edge_weights
    n = w.shape[0]
    out = w.sum(axis=0)
    dangling = out == 0
    w_norm = np.zeros_like(w, dtype=float)
    cols = ~dangling
    w_norm[:, cols] = w[:, cols] / out[cols]
    transition = w_norm + np.outer(graph.bias, dangling.astype(float))
    lhs = np.eye(n) - damping * transition
    return np.linalg.solve(lhs, (1 - damping) * graph.bias)


class TestInformativeness:
    def test_arithmetic_oracle(self):
        sims = np.array([0.2, 0.4, 0.8])
        # independent arithmetic: n = (s - min)/max, F = (n - mean)/popstd
        n = (sims - sims.min()) / sims.max()
        expected = (n - n.mean()) / n.std()
        got = ranking.standardize_similarities(sims)
        np.testing.assert_allclose(got, expected, atol=1e-12)
        np.testing.assert_allclose(
            got, [-1.06904497, -0.26726124, 1.33630621], atol=1e-6)

    def test_single_phrase_zero(self):
        np.testing.assert_array_equal(
            ranking.standardize_similarities(np.array([0.7])), [0.0])

    def test_all_equal_zero(self):
        np.testing.assert_array_equal(
            ranking.standardize_similarities(np.array([0.4, 0.4, 0.4])),
            [0.0, 0.0, 0.0])

    def test_zero_max_fallback(self):
        np.testing.assert_array_equal(
            ranking.standardize_similarities(np.array([-0.5, 0.0])),
            [0.0, 0.0])

    def test_empty_rejected(self):
        doc = E.fuse(np.array([1.0]), np.array([1.0]))
        with pytest.raises(ValueError):
            ranking.informativeness([], doc)

    def test_from_embeddings(self):
        doc = E.fuse(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
        phrases = [E.fuse(np.array([1.0, 0.0]), np.array([1.0, 0.0])),
                   E.fuse(np.array([0.0, 1.0]), np.array([1.0, 0.0])),
                   E.fuse(np.array([0.0, 1.0]), np.array([0.0, 1.0]))]
        F = ranking.informativeness(phrases, doc)
        assert F[0] > F[1] > F[2]


class TestBuildGraph:
    def _embs(self, n, rng):
        return [E.fuse(rng.standard_normal(3), rng.standard_normal(4))
                for _ in range(n)]

    def test_complete_graph(self):
        rng = np.random.Generator(np.random.PCG64(0))
        phrases = [_phrase(i, i * 10) for i in range(4)]
        graph = ranking.build_graph(phrases, self._embs(4, rng),
                                    np.zeros(4), ranking.RankingConfig())
        off_diag = ~np.eye(4, dtype=bool)
        # every pair connected unless the cosine clamped to zero
        assert (graph.edge_weights >= 0).all()
        assert np.array_equal(graph.edge_weights, graph.edge_weights.T)
        assert np.diag(graph.edge_weights).sum() == 0

    def test_uniform_bias_when_flat(self):
        rng = np.random.Generator(np.random.PCG64(1))
        phrases = [_phrase(i, i) for i in range(3)]
        graph = ranking.build_graph(phrases, self._embs(3, rng),
                                    np.zeros(3), ranking.RankingConfig())
        np.testing.assert_allclose(graph.bias, 1 / 3)

    def test_positional_bias(self):
        rng = np.random.Generator(np.random.PCG64(2))
        phrases = [_phrase(0, 0), _phrase(1, 1)]  # first positions 1 and 2
        cfg = ranking.RankingConfig(positional=True)
        graph = ranking.build_graph(phrases, self._embs(2, rng),
                                    np.zeros(2), cfg)
        np.testing.assert_allclose(graph.bias, [2 / 3, 1 / 3])

    def test_window_controls_edges(self):
        rng = np.random.Generator(np.random.PCG64(3))
        phrases = [_phrase(0, 0), _phrase(1, 50)]
        embs = self._embs(2, rng)
        near = ranking.build_graph(phrases, embs, np.zeros(2),
                                   ranking.RankingConfig(window=100))
        far = ranking.build_graph(phrases, embs, np.zeros(2),
                                  ranking.RankingConfig(window=10))
        assert far.edge_weights[0, 1] == 0.0
        assert near.edge_weights[0, 1] >= 0.0

    def test_window_monotonicity(self):
        rng = np.random.Generator(np.random.PCG64(4))
        phrases = [_phrase(i, i * 7) for i in range(6)]
        embs = self._embs(6, rng)
        edges = []
        for w in [5, 15, 40, ranking.INFINITE]:
            g = ranking.build_graph(phrases, embs, np.zeros(6),
                                    ranking.RankingConfig(window=w))
            edges.append({(i, j) for i in range(6) for j in range(6)
                          if g.edge_weights[i, j] > 0})
        for small, big in zip(edges, edges[1:]):
            assert small <= big

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ranking.build_graph([], [], np.zeros(0), ranking.RankingConfig())


class TestRank:
    def test_symmetric_uniform_fixed_point(self):
        n = 5
        w = np.ones((n, n)) - np.eye(n)
        bias = np.full(n, 1 / n)
        graph = ranking.PhraseGraph([_phrase(i, i) for i in range(n)], w, bias)
        result = ranking.rank(graph, ranking.RankingConfig(damping=0.85))
        np.testing.assert_allclose(result.scores, 1 / n, atol=1e-9)

    def test_lambda_zero_returns_bias(self):
        rng = np.random.Generator(np.random.PCG64(5))
        graph = random_graph(rng, 6)
        result = ranking.rank(graph, ranking.RankingConfig(damping=0.0))
        np.testing.assert_allclose(result.scores, graph.bias, atol=1e-12)
        assert result.ranked == sorted(
            range(6), key=lambda i: (-graph.bias[i],
                                     graph.nodes[i].first_position,
                                     graph.nodes[i].surface))

    def test_matches_linear_solve(self):
        rng = np.random.Generator(np.random.PCG64(6))
        for _ in range(20):
            n = int(rng.integers(2, 9))
            graph = random_graph(rng, n)
            lam = float(rng.uniform(0, 0.95))
            cfg = ranking.RankingConfig(damping=lam, pagerank_tol=1e-12,
                                        pagerank_max_iter=10_000)
            result = ranking.rank(graph, cfg)
            np.testing.assert_allclose(result.scores,
                                       solve_oracle(graph, lam), atol=1e-8)

    def test_stationarity_and_normalization(self):
        rng = np.random.Generator(np.random.PCG64(7))
        graph = random_graph(rng, 7)
        cfg = ranking.RankingConfig(damping=0.15)
        result = ranking.rank(graph, cfg)
        assert result.scores.sum() == pytest.approx(1.0, abs=1e-6)
        assert (result.scores >= 0).all()
        assert sorted(result.ranked) == list(range(7))
        # fixed point within tolerance
        out = graph.edge_weights.sum(axis=0)
        dangling = out == 0
        w_norm = np.zeros_like(graph.edge_weights)
        w_norm[:, ~dangling] = graph.edge_weights[:, ~dangling] / out[~dangling]
        walk = w_norm @ result.scores + result.scores[dangling].sum() * graph.bias
        residual = np.abs(cfg.damping * walk + (1 - cfg.damping) * graph.bias
                          - result.scores).sum()
        assert residual < cfg.pagerank_tol

    def test_scale_invariance(self):
        rng = np.random.Generator(np.random.PCG64(8))
        graph = random_graph(rng, 5)
        scaled = ranking.PhraseGraph(graph.nodes, graph.edge_weights * 37.5,
                                     graph.bias)
        cfg = ranking.RankingConfig(damping=0.45, pagerank_tol=1e-12)
        a = ranking.rank(graph, cfg)
        b = ranking.rank(scaled, cfg)
        np.testing.assert_allclose(a.scores, b.scores, atol=1e-10)

    def test_single_node(self):
        graph = ranking.PhraseGraph([_phrase(0, 0)], np.zeros((1, 1)),
                                    np.array([1.0]))
        result = ranking.rank(graph, ranking.RankingConfig())
        np.testing.assert_allclose(result.scores, [1.0])

    def test_nonconvergence_flagged(self):
        rng = np.random.Generator(np.random.PCG64(9))
        graph = random_graph(rng, 6)
        cfg = ranking.RankingConfig(damping=0.9, pagerank_tol=1e-15,
                                    pagerank_max_iter=2)
        result = ranking.rank(graph, cfg)
        assert not result.converged
        assert result.iterations_used == 2


class TestConfig:
    def test_bounds(self):
        with pytest.raises(ValueError):
            ranking.RankingConfig(damping=1.5)
        with pytest.raises(ValueError):
            ranking.RankingConfig(window=0.5)


@pytest.fixture(scope="module")
def model(synthetic_corpus):
    cfg = lda.TopicModelConfig(num_topics=2, alpha=0.5,
                               gibbs_iterations=100, seed=3)
    return lda.fit_lda(synthetic_corpus, cfg)


class TestExtract:
    def _doc(self):
        return doc_from_tagged([
            ("The", "DT"), ("buoyant", "JJ"), ("force", "NN"), ("on", "IN"),
            ("the", "DT"), ("fluid", "NN"), ("equals", "VBZ"), ("the", "DT"),
            ("water", "NN"), ("pressure", "NN"), (".", "."),
            ("The", "DT"), ("liquid", "NN"), ("density", "NN"),
            ("matters", "VBZ"), (".", "."),
        ], doc_id="buoyancy")

    def test_single_candidate_scores_one(self, model, test_backend):
        doc = doc_from_tagged([("Buoyancy", "NN")])
        pairs = ranking.extract(doc, model, test_backend,
                                ranking.RankingConfig())
        assert pairs == [("buoyancy", pytest.approx(1.0))]

    def test_no_candidates_warns_empty(self, model, test_backend):
        doc = doc_from_tagged([("runs", "VBZ"), ("quickly", "RB")])
        with pytest.warns(UserWarning):
            pairs = ranking.extract(doc, model, test_backend,
                                    ranking.RankingConfig())
        assert pairs == []

    def test_deterministic(self, model, test_backend):
        doc = self._doc()
        cfg = ranking.RankingConfig()
        a = ranking.extract(doc, model, test_backend, cfg)
        b = ranking.extract(doc, model, test_backend, cfg)
        assert a == b

    def test_top_k_truncation(self, model, test_backend):
        doc = self._doc()
        cfg = ranking.RankingConfig(top_k=2)
        assert len(ranking.extract(doc, model, test_backend, cfg)) == 2

    def test_scores_descend(self, model, test_backend):
        pairs = ranking.extract(self._doc(), model, test_backend,
                                ranking.RankingConfig())
        scores = [s for _, s in pairs]
        assert scores == sorted(scores, reverse=True)
