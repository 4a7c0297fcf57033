import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epicast.losses import (COUNT_FLOOR, DensityHistogram, adaptive_loss,
                            adaptive_loss_batch, build_density, density_weights,
                            standard_mse_loss)


def uniform_density(count: int, bins: int = 8, lo: float = 0.0, hi: float = 1.0):
    edges = np.linspace(lo, hi, bins + 1)
    return DensityHistogram(bin_edges=edges, counts=np.full(bins, count))


class TestBuildDensity:
    def test_degenerate_range_single_bin(self):
        density = build_density([3.0, 3.0, 3.0, 3.0], bins=5)
        assert density.counts.sum() == 4
        assert density.counts[0] == 4
        assert density.lookup(3.0) == 4.0

    def test_direct_binning(self):
        density = build_density([0.0, 0.0, 0.0, 1.0], bins=2)
        assert density.counts.tolist() == [3, 1]

    def test_top_edge_in_last_bin(self):
        density = build_density([0.0, 0.5, 1.0], bins=4)
        assert density.lookup(1.0) == density.counts[-1]

    def test_uniform_multinomial(self):
        # multinomial oracle: each of 10 bins holds 1000 +- 3 sigma
        rng = np.random.default_rng(17)
        density = build_density(rng.uniform(0, 1, 10_000), bins=10)
        sigma = math.sqrt(10_000 * 0.1 * 0.9)
        assert np.all(np.abs(density.counts - 1000) <= 3 * sigma)

    def test_counts_conserved(self):
        rng = np.random.default_rng(4)
        values = rng.normal(size=321)
        assert build_density(values, bins=7).counts.sum() == 321

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            build_density([])


class TestAdaptiveLoss:
    def test_floor_boundary_is_one_fortieth(self):
        # count below e^2 floors the denominator at 10 * ln^2(e^2) = 40
        density = uniform_density(count=1)
        y_true = np.zeros(10)
        y_true[0] = 1.0
        y_pred = np.zeros(10)
        y_pred[0] = 0.0
        y_true_rest_equal = y_true.copy()
        loss = adaptive_loss(y_true_rest_equal, y_pred, density, n=1)
        assert loss == 0.025

    def test_constant_density_scales_standard_mse(self):
        count = 1000
        density = uniform_density(count=count)
        rng = np.random.default_rng(0)
        y_true = rng.uniform(0, 1, 10)
        y_pred = rng.uniform(0, 1, 10)
        expected = float(np.sum((y_true - y_pred) ** 2)) / (10.0 * math.log(count) ** 2)
        assert adaptive_loss(y_true, y_pred, density, n=1) == pytest.approx(
            expected, abs=1e-12)
        # and relative to the plain loss: same up to the 1/ln^2(c) factor
        plain = standard_mse_loss(y_true, y_pred, n=1)
        assert adaptive_loss(y_true, y_pred, density, n=1) == pytest.approx(
            plain / math.log(count) ** 2, abs=1e-12)

    def test_rare_targets_weighted_up(self):
        # weight-ratio oracle: ln^2(1000) / ln^2(8)
        edges = np.array([0.0, 0.5, 1.0])
        density = DensityHistogram(bin_edges=edges, counts=np.array([1000, 8]))
        weights = density_weights(np.array([0.25, 0.75]), density)
        ratio = weights[1] / weights[0]
        expected = math.log(1000) ** 2 / math.log(8) ** 2
        assert ratio == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(11.0, abs=0.1)

    def test_batch_form_matches_single(self):
        density = uniform_density(count=50)
        rng = np.random.default_rng(1)
        y_true = rng.uniform(0, 1, (4, 10))
        y_pred = rng.uniform(0, 1, (4, 10))
        batch = adaptive_loss_batch(y_true, y_pred, density)
        singles = sum(adaptive_loss(t, p, density, n=4)
                      for t, p in zip(y_true, y_pred))
        assert batch == pytest.approx(singles, rel=1e-12)

    @settings(max_examples=100)
    @given(st.integers(0, 10**9))
    def test_weights_positive_and_bounded(self, count):
        edges = np.array([0.0, 1.0])
        density = DensityHistogram(bin_edges=edges, counts=np.array([count]))
        w = density_weights(np.array([0.5]), density)[0]
        assert 0.0 < w <= 1.0 / 40.0 + 1e-15

    def test_weight_monotone_in_count(self):
        edges = np.array([0.0, 0.5, 1.0])
        for low, high in [(8, 9), (10, 1000), (50, 51)]:
            density = DensityHistogram(bin_edges=edges, counts=np.array([low, high]))
            w = density_weights(np.array([0.25, 0.75]), density)
            assert w[0] > w[1]


class TestStandardLoss:
    def test_zero_error(self):
        y = np.arange(10.0)
        assert standard_mse_loss(y, y) == 0.0

    def test_horizon_scaling(self):
        y_true = np.zeros(10)
        y_pred = np.ones(10)
        assert standard_mse_loss(y_true, y_pred, n=1) == pytest.approx(1.0)
        assert standard_mse_loss(y_true, y_pred, n=2) == pytest.approx(0.5)


class TestHistogram:
    def test_edge_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            DensityHistogram(bin_edges=np.array([0.0, 1.0]), counts=np.array([1, 2]))

    def test_lookup_clips_out_of_range(self):
        density = build_density([0.0, 1.0], bins=2)
        assert density.lookup(-5.0) == density.counts[0]
        assert density.lookup(5.0) == density.counts[-1]

    def test_floor_constant(self):
        assert COUNT_FLOOR == pytest.approx(math.e**2)
