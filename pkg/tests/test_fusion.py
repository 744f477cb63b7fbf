import numpy as np
import pytest

from blowauth import (
    DecisionConfig,
    KernelConfig,
    NormalizationBounds,
    authenticate,
    calibrate_threshold,
    fit_bounds,
    fuse,
    knn_score,
    min_max_normalize,
)

import oracles


class TestMinMaxNormalize:
    def test_basic(self):
        np.testing.assert_allclose(min_max_normalize([1.0, 2.0, 3.0]), [0.0, 0.5, 1.0])

    def test_constant_maps_to_zero(self):
        np.testing.assert_array_equal(min_max_normalize([7.0, 7.0, 7.0]), [0.0, 0.0, 0.0])

    def test_negative_values(self):
        np.testing.assert_allclose(min_max_normalize([-1.0, 1.0]), [0.0, 1.0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            min_max_normalize([])

    def test_range_and_order_preserved(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            s = rng.uniform(-100, 100, rng.integers(1, 50))
            out = min_max_normalize(s)
            assert out.min() >= 0.0 and out.max() <= 1.0
            assert np.argmin(out) == np.argmin(s)
            assert np.argmax(out) == np.argmax(s)
            order = np.argsort(s, kind="stable")
            assert (np.diff(out[order]) >= 0).all()


class TestBounds:
    def test_fit_and_clamp(self):
        b = fit_bounds([2.0, 4.0, 10.0])
        assert (b.lo, b.hi) == (2.0, 10.0)
        np.testing.assert_allclose(b.apply([2.0, 6.0, 10.0]), [0.0, 0.5, 1.0])
        # held-out values outside the fitted range are clamped
        np.testing.assert_allclose(b.apply([-5.0, 99.0]), [0.0, 1.0])

    def test_degenerate(self):
        b = fit_bounds([3.0, 3.0])
        np.testing.assert_array_equal(b.apply([3.0, 100.0]), [0.0, 0.0])

    def test_validation(self):
        with pytest.raises(ValueError, match="hi < lo"):
            NormalizationBounds(2.0, 1.0)
        with pytest.raises(ValueError, match="finite"):
            fit_bounds([1.0, np.inf])


class TestFuse:
    def test_equal_weights(self):
        assert fuse(0.2, 0.4) == pytest.approx(0.3)

    def test_zero(self):
        assert fuse(0.0, 0.0) == 0.0

    def test_projection(self):
        assert fuse(0.77, 0.1, weights=(1.0, 0.0)) == pytest.approx(0.77)

    def test_symmetry_with_equal_weights(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            a, b = rng.uniform(0, 1, 2)
            assert fuse(a, b) == fuse(b, a)

    def test_bad_weights(self):
        with pytest.raises(ValueError, match="weights"):
            fuse(0.5, 0.5, weights=(0.7, 0.6))
        with pytest.raises(ValueError, match="weights"):
            fuse(0.5, 0.5, weights=(-0.2, 1.2))

    def test_elementwise_arrays(self):
        out = fuse(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        np.testing.assert_allclose(out, [0.5, 0.5])


class TestKnnScore:
    def test_k1_is_minimum(self):
        assert knn_score([0.5, 0.2, 0.9], 1) == 0.2

    def test_full_mean(self):
        assert knn_score([0.5, 0.2, 0.9], 3) == pytest.approx(1.6 / 3)

    def test_mean_of_two_smallest(self):
        assert knn_score([4.0, 1.0, 3.0, 2.0], 2) == pytest.approx(1.5)

    def test_max_aggregate(self):
        assert knn_score([4.0, 1.0, 3.0, 2.0], 2, aggregate="max") == 2.0

    def test_k_too_large(self):
        with pytest.raises(ValueError, match="k"):
            knn_score([1.0, 2.0], 3)

    def test_monotone_in_distances(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            d = rng.uniform(0, 10, 8)
            k = int(rng.integers(1, 9))
            base = knn_score(d, k)
            bumped = d.copy()
            bumped[rng.integers(0, 8)] += rng.uniform(0, 5)
            assert knn_score(bumped, k) >= base - 1e-12

    def test_matches_sort_reference(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            d = rng.uniform(0, 10, rng.integers(1, 20))
            k = int(rng.integers(1, len(d) + 1))
            for agg in ("mean", "max"):
                assert knn_score(d, k, agg) == pytest.approx(
                    oracles.knn_brute(d, k, agg), abs=1e-12
                )


class TestCalibrateThreshold:
    def test_order_statistic(self):
        scores = [0.1 * i for i in range(1, 11)]
        th = calibrate_threshold(scores, 8)
        assert th.tau == pytest.approx(0.8)
        assert sum(s <= th.tau for s in scores) == 8

    def test_q_extremes(self):
        scores = [0.3, 0.1, 0.5]
        assert calibrate_threshold(scores, 3).tau == 0.5
        assert calibrate_threshold(scores, 1).tau == 0.1

    def test_unsorted_input(self):
        assert calibrate_threshold([5.0, 1.0, 3.0, 2.0], 2).tau == 2.0

    def test_q_out_of_range(self):
        with pytest.raises(ValueError, match="q"):
            calibrate_threshold([1.0, 2.0], 3)
        with pytest.raises(ValueError, match="q"):
            calibrate_threshold([1.0, 2.0], 0)

    def test_exact_recall_with_distinct_scores(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            scores = rng.permutation(rng.uniform(0, 10, 10))
            q = int(rng.integers(1, 11))
            th = calibrate_threshold(scores, q)
            assert sum(s <= th.tau for s in scores) == q


class TestAuthenticate:
    def test_below(self):
        th = calibrate_threshold([0.5, 0.2, 0.9], 2, user_id="u")
        assert authenticate(0.3, th)

    def test_boundary_accepts(self):
        th = calibrate_threshold([0.5, 0.2, 0.9], 2)
        assert th.tau == 0.5
        assert authenticate(0.5, th)

    def test_just_above_denies(self):
        th = calibrate_threshold([0.5, 0.2, 0.9], 2)
        assert not authenticate(0.50001, th)


class TestDecisionConfig:
    def test_defaults(self):
        cfg = DecisionConfig()
        assert cfg.kernel == KernelConfig("dtw")
        assert (cfg.k, cfg.q) == (1, 10)
        assert cfg.weights == (0.5, 0.5)

    def test_validation(self):
        with pytest.raises(ValueError, match="k"):
            DecisionConfig(k=0)
        with pytest.raises(ValueError, match="q"):
            DecisionConfig(q=0)
        with pytest.raises(ValueError, match="sum to 1"):
            DecisionConfig(weights=(0.5, 0.6))
        with pytest.raises(ValueError, match="aggregate"):
            DecisionConfig(aggregate="median")
