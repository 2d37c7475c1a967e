"""Random-filter convnet stages against direct-summation references."""

import numpy as np
import pytest

from livecheck.convnet import (
    ConvLayerConfig,
    ConvNetConfig,
    conv_forward,
    convnet_features,
    init_banks,
    init_filters,
    lcn,
    max_pool,
    relu,
)

from oracles import conv_valid_oracle, lcn_oracle, max_pool_oracle, pool_starts_oracle


class TestConvForward:
    def test_matches_oracle(self, rng):
        for _ in range(20):
            channels = int(rng.integers(1, 4))
            filters = int(rng.integers(1, 5))
            size = int(rng.choice([1, 3, 5]))
            height = int(rng.integers(size, 12))
            width = int(rng.integers(size, 12))
            x = rng.standard_normal((channels, height, width))
            bank = rng.standard_normal((filters, channels, size, size))
            np.testing.assert_allclose(
                conv_forward(x, bank), conv_valid_oracle(x, bank), atol=1e-10
            )

    def test_identity_filter(self, rng):
        """A single 1x1 weight of one returns the tensor unchanged."""
        x = rng.standard_normal((1, 6, 7))
        bank = np.ones((1, 1, 1, 1))
        np.testing.assert_array_equal(conv_forward(x, bank), x)

    def test_output_shape_valid_mode(self, rng):
        out = conv_forward(rng.standard_normal((2, 9, 11)), rng.standard_normal((4, 2, 3, 3)))
        assert out.shape == (4, 7, 9)

    def test_no_kernel_flip(self):
        """Correlation: the weight at (0,0) reads the input at (0,0)."""
        x = np.zeros((1, 3, 3))
        x[0, 0, 0] = 1.0
        bank = np.zeros((1, 1, 3, 3))
        bank[0, 0, 0, 0] = 1.0
        assert conv_forward(x, bank)[0, 0, 0] == 1.0

    def test_channel_mismatch_rejected(self, rng):
        with pytest.raises(ValueError):
            conv_forward(rng.standard_normal((2, 5, 5)), rng.standard_normal((1, 3, 3, 3)))

    def test_oversized_filter_rejected(self, rng):
        with pytest.raises(ValueError):
            conv_forward(rng.standard_normal((1, 4, 4)), rng.standard_normal((1, 1, 5, 5)))


class TestRelu:
    def test_elementwise_max(self, rng):
        x = rng.standard_normal((3, 4, 5))
        out = relu(x)
        assert out.min() >= 0.0
        np.testing.assert_array_equal(out[x > 0], x[x > 0])

    def test_idempotent(self, rng):
        x = rng.standard_normal((2, 3, 3))
        np.testing.assert_array_equal(relu(relu(x)), relu(x))


class TestLcn:
    def test_matches_oracle(self, rng):
        for _ in range(10):
            channels = int(rng.integers(1, 4))
            height = int(rng.integers(5, 10))
            width = int(rng.integers(5, 10))
            x = rng.standard_normal((channels, height, width)) * 3.0
            np.testing.assert_allclose(lcn(x, 3), lcn_oracle(x, 3), atol=1e-10)

    def test_window_five_matches_oracle(self, rng):
        x = rng.standard_normal((2, 8, 9))
        np.testing.assert_allclose(lcn(x, 5), lcn_oracle(x, 5), atol=1e-10)

    def test_constant_tensor_zeroed(self):
        """Constant input has zero local contrast."""
        out = lcn(np.full((3, 7, 7), 2.5), 3)
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_window_one_is_identity(self, rng):
        x = rng.standard_normal((2, 5, 5))
        np.testing.assert_array_equal(lcn(x, 1), x)

    def test_low_contrast_regions_not_amplified(self, rng):
        """Where sigma < 1 the divisor is one, not a tiny number."""
        x = 0.001 * rng.standard_normal((1, 9, 9))
        out = lcn(x, 3)
        mean_removed = np.abs(out).max()
        assert mean_removed <= 2.0 * np.abs(x).max()

    def test_even_window_rejected(self, rng):
        with pytest.raises(ValueError):
            lcn(rng.standard_normal((1, 5, 5)), 4)

    def test_oversized_window_rejected(self, rng):
        with pytest.raises(ValueError):
            lcn(rng.standard_normal((1, 4, 4)), 5)


class TestMaxPool:
    def test_matches_oracle(self, rng):
        for _ in range(30):
            channels = int(rng.integers(1, 4))
            height = int(rng.integers(2, 12))
            width = int(rng.integers(2, 12))
            pool = int(rng.integers(1, min(height, width) + 1))
            stride = int(rng.integers(1, pool + 2))
            x = rng.standard_normal((channels, height, width))
            np.testing.assert_array_equal(
                max_pool(x, pool, stride), max_pool_oracle(x, pool, stride)
            )

    def test_two_by_two_block(self):
        x = np.array([[[1.0, 2.0], [3.0, 4.0]]])
        np.testing.assert_array_equal(max_pool(x, 2, 2), [[[4.0]]])

    def test_partial_edge_windows_kept(self):
        """7 wide, pool 3, stride 3: windows at 0, 3, 6 (last is partial)."""
        x = np.broadcast_to(np.arange(7.0), (1, 7, 7)).copy()
        out = max_pool(x, 3, 3)
        assert out.shape == (1, 3, 3)
        np.testing.assert_array_equal(out[0, 0], [2.0, 5.0, 6.0])

    def test_pool_one_stride_one_identity(self, rng):
        x = rng.standard_normal((2, 4, 4))
        np.testing.assert_array_equal(max_pool(x, 1, 1), x)

    def test_overlapping_stride(self, rng):
        x = rng.standard_normal((1, 7, 7))
        out = max_pool(x, 3, 2)
        assert out.shape == (1, 3, 3)
        assert out[0, 0, 0] == x[0, :3, :3].max()

    def test_start_counts_match_oracle_formula(self):
        for extent in range(1, 20):
            for pool in range(1, extent + 1):
                for stride in range(1, pool + 3):
                    starts = pool_starts_oracle(extent, pool, stride)
                    x = np.zeros((1, extent, extent))
                    out = max_pool(x, pool, stride)
                    assert out.shape[1] == len(starts)

    def test_oversized_pool_rejected(self, rng):
        with pytest.raises(ValueError):
            max_pool(rng.standard_normal((1, 3, 3)), 4, 1)


class TestFilterInit:
    def test_shape_and_scale(self):
        layer = ConvLayerConfig(num_filters=8, filter_size=5, pool_size=2, seed=3)
        bank = init_filters(layer, in_channels=4)
        assert bank.shape == (8, 4, 5, 5)
        expected_std = 1.0 / np.sqrt(4 * 25)
        assert bank.std() == pytest.approx(expected_std, rel=0.1)

    def test_seed_reproducibility(self):
        layer = ConvLayerConfig(num_filters=4, filter_size=3, pool_size=2, seed=11)
        np.testing.assert_array_equal(init_filters(layer, 1), init_filters(layer, 1))
        other = ConvLayerConfig(num_filters=4, filter_size=3, pool_size=2, seed=12)
        assert not np.array_equal(init_filters(layer, 1), init_filters(other, 1))

    def test_banks_chain_channels(self):
        config = ConvNetConfig(
            layers=(
                ConvLayerConfig(num_filters=6, filter_size=3, pool_size=2, seed=1),
                ConvLayerConfig(num_filters=9, filter_size=3, pool_size=2, seed=2),
            )
        )
        banks = init_banks(config, in_channels=1)
        assert banks[0].shape == (6, 1, 3, 3)
        assert banks[1].shape == (9, 6, 3, 3)


class TestNetwork:
    def test_composition_equals_manual_stages(self, rng):
        """convnet_features is exactly conv, relu, lcn, pool per layer."""
        config = ConvNetConfig(
            layers=(
                ConvLayerConfig(num_filters=3, filter_size=3, pool_size=2, lcn_window=3, seed=5),
                ConvLayerConfig(num_filters=4, filter_size=3, pool_size=2, lcn_window=1, seed=6),
            )
        )
        img = rng.uniform(0.0, 1.0, size=(16, 16))
        banks = init_banks(config)
        x = img[None]
        for layer, bank in zip(config.layers, banks):
            x = relu(conv_forward(x, bank))
            if layer.lcn_window > 1:
                x = lcn(x, layer.lcn_window)
            x = max_pool(x, layer.pool_size, layer.stride)
        np.testing.assert_array_equal(convnet_features(img, config), x.reshape(-1))

    def test_degenerate_layer_is_flat_relu(self, rng):
        """1x1 filter of weight one, no lcn, pool 1: flattened relu."""
        config = ConvNetConfig(
            layers=(
                ConvLayerConfig(num_filters=1, filter_size=1, pool_size=1, lcn_window=1, seed=0),
            )
        )
        img = rng.standard_normal((5, 6))
        bank = [np.ones((1, 1, 1, 1))]
        out = convnet_features(img, config, banks=bank)
        np.testing.assert_array_equal(out, np.maximum(img, 0.0).reshape(-1))

    def test_feature_length_formula(self, rng):
        """64 -> conv5 60 -> pool3 20 -> conv5 16 -> pool3 6; 32*6*6."""
        config = ConvNetConfig(
            layers=(
                ConvLayerConfig(num_filters=16, filter_size=5, pool_size=3, seed=1),
                ConvLayerConfig(num_filters=32, filter_size=5, pool_size=3, seed=2),
            )
        )
        out = convnet_features(rng.uniform(size=(64, 64)), config)
        assert out.shape == (32 * 6 * 6,)

    def test_exhausted_extent_rejected(self, rng):
        config = ConvNetConfig(
            layers=(ConvLayerConfig(num_filters=2, filter_size=9, pool_size=2, seed=0),)
        )
        with pytest.raises(ValueError):
            convnet_features(rng.uniform(size=(8, 8)), config)

    def test_layer_count_bounds(self):
        layer = ConvLayerConfig(num_filters=1, filter_size=1, pool_size=1)
        with pytest.raises(ValueError):
            ConvNetConfig(layers=())
        with pytest.raises(ValueError):
            ConvNetConfig(layers=(layer,) * 6)

    def test_determinism(self, rng):
        config = ConvNetConfig(
            layers=(ConvLayerConfig(num_filters=4, filter_size=3, pool_size=2, seed=9),)
        )
        img = rng.uniform(size=(12, 12))
        np.testing.assert_array_equal(convnet_features(img, config), convnet_features(img, config))
