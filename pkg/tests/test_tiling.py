import itertools
import math

import numpy as np
import pytest

from dialseg import Segmentation, TilingConfig, depth_scores, segment_series, smooth_series
from dialseg.errors import InvalidArgumentError


def reference_depths(values):
    """Independent reading of the depth rule, written as explicit scans."""
    out = []
    for i, v in enumerate(values):
        left = values[:i][::-1]
        lpeak = v
        for x in left:
            if x < lpeak:
                break
            lpeak = x
        rpeak = v
        for x in values[i + 1 :]:
            if x < rpeak:
                break
            rpeak = x
        out.append((lpeak - v) + (rpeak - v))
    return out


def reference_boundaries(values, alpha=0.5, stats_over="positive"):
    """Independent threshold rule: mean/std by explicit formulas."""
    depths = reference_depths(values)
    pool = [d for d in depths if d > 0] if stats_over == "positive" else list(depths)
    if not pool:
        return []
    mean = sum(pool) / len(pool)
    std = math.sqrt(sum((d - mean) ** 2 for d in pool) / len(pool))
    tau = mean + alpha * std
    return [i + 1 for i, d in enumerate(depths) if d > 0 and d >= tau]


class TestConfig:
    def test_rejects_even_smoothing(self):
        with pytest.raises(InvalidArgumentError):
            TilingConfig(smoothing_window=2)

    def test_rejects_bad_stats_over(self):
        with pytest.raises(InvalidArgumentError):
            TilingConfig(stats_over="median")


class TestSmoothing:
    def test_window_one_is_identity(self):
        r = np.array([0.1, 0.9, 0.2])
        assert np.array_equal(smooth_series(r, 1), r)

    def test_truncated_edges(self):
        r = np.array([0.0, 3.0, 6.0])
        smoothed = smooth_series(r, 3)
        assert smoothed[0] == pytest.approx(1.5)  # mean of first two
        assert smoothed[1] == pytest.approx(3.0)
        assert smoothed[2] == pytest.approx(4.5)


class TestDepthScores:
    def test_hand_walk(self):
        depths = depth_scores(np.array([0.9, 0.2, 0.8]))
        assert depths[0] == pytest.approx(0.0)
        assert depths[1] == pytest.approx((0.9 - 0.2) + (0.8 - 0.2), abs=1e-12)
        assert depths[2] == pytest.approx(0.0)

    def test_monotone_series_has_zero_depth_at_maxima(self):
        depths = depth_scores(np.array([0.1, 0.2, 0.3, 0.4]))
        assert depths[-1] == 0.0
        assert depths[0] == pytest.approx(0.3)  # valley at the start

    def test_constant_series_all_zero(self):
        assert np.all(depth_scores(np.full(6, 0.4)) == 0.0)

    def test_nonnegative(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            depths = depth_scores(rng.normal(size=rng.integers(1, 12)))
            assert np.all(depths >= 0.0)


class TestSegmentSeries:
    def test_constant_series_single_segment(self):
        seg = segment_series(np.full(7, 0.3))
        assert seg.boundaries == ()
        assert seg.n == 8

    def test_two_block_synthetic(self):
        # orthogonal topic blocks u1..u5 / u6..u10, zero coherence
        a = np.array([1.0, 0.0])
        b = np.array([0.0, 1.0])
        topic = np.stack([a] * 5 + [b] * 5)
        from dialseg import relevance_series

        series = relevance_series(topic, np.zeros(9))
        seg = segment_series(series.scores)
        assert seg.boundaries == (5,)

    def test_sharp_valley_among_noise(self):
        rng = np.random.default_rng(1)
        r = 1.0 + rng.normal(scale=1e-4, size=11)
        r[6] = 0.1
        seg = segment_series(r)
        assert seg.boundaries == (7,)

    def test_shift_invariance(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            r = rng.normal(size=rng.integers(2, 12))
            for cfg in (TilingConfig(), TilingConfig(stats_over="all")):
                assert (
                    segment_series(r, cfg).boundaries
                    == segment_series(r + 5.0, cfg).boundaries
                )
                assert np.allclose(
                    depth_scores(r, cfg), depth_scores(r + 5.0, cfg), atol=1e-9
                )

    def test_determinism(self):
        rng = np.random.default_rng(3)
        r = rng.normal(size=15)
        assert segment_series(r).boundaries == segment_series(r.copy()).boundaries

    def test_tie_at_threshold_is_boundary(self):
        # two equal positive depths: tau = mean + alpha * 0 = the depth itself
        r = np.array([1.0, 0.2, 1.0, 0.2, 1.0])
        depths = depth_scores(r)
        assert depths[1] == depths[3] > 0
        seg = segment_series(r)
        assert seg.boundaries == (2, 4)

    def test_output_always_valid(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            r = rng.normal(size=int(rng.integers(1, 15)))
            seg = segment_series(r)
            assert isinstance(seg, Segmentation)
            assert seg.n == len(r) + 1

    def test_oracle_equivalence_exhaustive_grid(self):
        # every series of length <= 6 over {0, 0.5, 1}
        grid = (0.0, 0.5, 1.0)
        for length in range(1, 7):
            for values in itertools.product(grid, repeat=length):
                r = np.array(values)
                got = segment_series(r)
                expected = reference_boundaries(list(values))
                assert list(got.boundaries) == expected, f"series {values}"

    def test_min_segment_drops_lower_depth(self):
        # boundaries 3 and 5 leave a 2-utterance middle segment; interval 5
        # is the shallower valley and goes first
        r = np.array([1.0, 1.0, 0.1, 0.5, 0.2, 1.0, 1.0])
        cfg = TilingConfig(threshold_alpha=-1.5, min_segment_utterances=3)
        depths = depth_scores(r)
        assert depths[2] > depths[4] > 0
        assert segment_series(r, TilingConfig(threshold_alpha=-1.5)).boundaries == (3, 5)
        assert segment_series(r, cfg).boundaries == (3,)

    def test_min_segment_tie_drops_later(self):
        r = np.array([1.0, 1.0, 0.1, 1.0, 0.1, 1.0, 1.0])
        depths = depth_scores(r)
        assert depths[2] == depths[4] > 0
        assert segment_series(r, TilingConfig(threshold_alpha=0.0)).boundaries == (3, 5)
        seg = segment_series(r, TilingConfig(threshold_alpha=0.0, min_segment_utterances=3))
        assert seg.boundaries == (3,)

    def test_min_segment_protects_edges(self):
        # boundary at interval 1 leaves a single-utterance first segment
        r = np.array([0.1, 1.0, 1.0, 1.0])
        assert segment_series(r).boundaries == (1,)
        seg = segment_series(r, TilingConfig(min_segment_utterances=2))
        assert seg.boundaries == ()
