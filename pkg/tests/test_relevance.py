import numpy as np
import pytest

from dialseg import coherence_only_series, cosine, relevance_series
from dialseg.errors import InvalidArgumentError


def literal_interior_topic_sim(topic, i):
    """Eq-literal windows, valid only for 2 <= i <= n-2 (1-based)."""
    left = 0.5 * (topic[i - 2] + topic[i - 1])
    right = 0.5 * (topic[i] + topic[i + 1])
    return cosine(left, right)


class TestRelevanceSeries:
    def test_identical_vectors_constant_coherence(self):
        topic = np.tile(np.array([0.5, 0.2, -1.0]), (6, 1))
        coh = np.full(5, 0.3)
        series = relevance_series(topic, coh)
        assert np.allclose(series.scores, 1.3, atol=1e-12)

    def test_two_utterances_clamps_to_singletons(self):
        topic = np.array([[1.0, 0.0], [0.0, 1.0]])
        series = relevance_series(topic, np.array([0.25]))
        assert series.scores[0] == pytest.approx(cosine(topic[0], topic[1]) + 0.25, abs=1e-12)

    def test_hand_example_blocks(self):
        topic = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        series = relevance_series(topic, np.zeros(3))
        assert series.scores[1] == pytest.approx(0.0, abs=1e-12)
        assert series.scores[0] == pytest.approx(1 / np.sqrt(2), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            relevance_series(np.ones((4, 2)), np.zeros(2))

    def test_decomposition_exact(self):
        # the score is exactly the sum of its stored components, bit for bit
        rng = np.random.default_rng(0)
        topic = rng.normal(size=(7, 5))
        coh = rng.uniform(-0.9, 0.9, size=6)
        series = relevance_series(topic, coh)
        assert np.array_equal(series.scores, series.topic_sim + series.coherence)

    def test_positive_scale_invariance(self):
        rng = np.random.default_rng(1)
        topic = rng.normal(size=(6, 4))
        coh = rng.uniform(-0.5, 0.5, size=5)
        base = relevance_series(topic, coh)
        scaled = relevance_series(3.7 * topic, coh)
        assert np.allclose(base.topic_sim, scaled.topic_sim, atol=1e-12)

    def test_interior_matches_literal_windows(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            n = rng.integers(4, 10)
            topic = rng.normal(size=(n, 6))
            series = relevance_series(topic, np.zeros(n - 1))
            for i in range(2, n - 1):  # interior intervals
                assert series.topic_sim[i - 1] == pytest.approx(
                    literal_interior_topic_sim(topic, i), abs=1e-12
                )

    def test_single_utterance_gives_empty(self):
        series = relevance_series(np.ones((1, 3)), np.zeros(0))
        assert len(series) == 0


class TestCoherenceOnly:
    def test_scores_equal_coherence(self):
        coh = np.array([0.1, -0.2, 0.3])
        series = coherence_only_series(coh)
        assert np.array_equal(series.scores, coh)
        assert np.all(series.topic_sim == 0.0)
