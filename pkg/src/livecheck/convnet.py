"""Convolutional feature extraction with fixed random filter banks.

Each layer applies valid cross-correlation with Gaussian random
filters, a ReLU, optional local contrast normalization, and overlapping
max pooling.  Filters are drawn once from a seeded generator and never
trained; the network is purely a random projection with a texture-
friendly topology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .imageproc import gaussian_kernel

__all__ = [
    "ConvLayerConfig",
    "ConvNetConfig",
    "init_filters",
    "init_banks",
    "conv_forward",
    "relu",
    "lcn",
    "max_pool",
    "convnet_features",
]

MAX_LAYERS = 5


@dataclass(frozen=True)
class ConvLayerConfig:
    """One layer: filter bank shape, LCN window, pooling geometry.

    ``lcn_window=1`` disables contrast normalization for the layer.
    ``pool_stride=0`` means non-overlapping pooling (stride equal to
    the pool size).
    """

    num_filters: int
    filter_size: int
    pool_size: int
    pool_stride: int = 0
    lcn_window: int = 9
    seed: int = 0

    def __post_init__(self):
        if self.num_filters < 1:
            raise ValueError(f"num_filters must be positive, got {self.num_filters}")
        if self.filter_size < 1 or self.filter_size % 2 == 0:
            raise ValueError(f"filter_size must be odd and positive, got {self.filter_size}")
        if self.pool_size < 1:
            raise ValueError(f"pool_size must be positive, got {self.pool_size}")
        if self.pool_stride < 0:
            raise ValueError(f"pool_stride must be non-negative, got {self.pool_stride}")
        if self.lcn_window < 1 or self.lcn_window % 2 == 0:
            raise ValueError(f"lcn_window must be odd and positive, got {self.lcn_window}")

    @property
    def stride(self) -> int:
        return self.pool_stride if self.pool_stride > 0 else self.pool_size


@dataclass(frozen=True)
class ConvNetConfig:
    layers: tuple[ConvLayerConfig, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not 1 <= len(layers) <= MAX_LAYERS:
            raise ValueError(f"network must have 1..{MAX_LAYERS} layers, got {len(layers)}")
        object.__setattr__(self, "layers", layers)


def init_filters(layer: ConvLayerConfig, in_channels: int) -> np.ndarray:
    """Draw a (filters, channels, size, size) Gaussian bank.

    Weights are i.i.d. normal with standard deviation
    ``1 / sqrt(in_channels * size**2)``, which keeps response variance
    roughly independent of the fan-in.
    """
    if in_channels < 1:
        raise ValueError(f"in_channels must be positive, got {in_channels}")
    fan_in = in_channels * layer.filter_size**2
    rng = np.random.default_rng(layer.seed)
    shape = (layer.num_filters, in_channels, layer.filter_size, layer.filter_size)
    return rng.normal(0.0, 1.0 / math.sqrt(fan_in), size=shape)


def init_banks(config: ConvNetConfig, in_channels: int = 1) -> list[np.ndarray]:
    """Materialize every layer's filter bank for a given input depth."""
    banks = []
    channels = in_channels
    for layer in config.layers:
        banks.append(init_filters(layer, channels))
        channels = layer.num_filters
    return banks


def conv_forward(x: np.ndarray, bank: np.ndarray) -> np.ndarray:
    """Valid cross-correlation of a (C, H, W) tensor with a (F, C, s, s) bank.

    No kernel flip and no padding: output is (F, H-s+1, W-s+1).
    """
    x = np.asarray(x, dtype=np.float64)
    bank = np.asarray(bank, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"conv_forward expects a (C, H, W) tensor, got shape {x.shape}")
    if bank.ndim != 4 or bank.shape[2] != bank.shape[3]:
        raise ValueError(f"bank must be (F, C, s, s), got shape {bank.shape}")
    if bank.shape[1] != x.shape[0]:
        raise ValueError(f"bank expects {bank.shape[1]} channels, input has {x.shape[0]}")
    size = bank.shape[2]
    if size > x.shape[1] or size > x.shape[2]:
        raise ValueError(f"filter {size}x{size} larger than input {x.shape[1]}x{x.shape[2]}")
    windows = sliding_window_view(x, (size, size), axis=(1, 2))
    return np.einsum("chwij,fcij->fhw", windows, bank)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def lcn(x: np.ndarray, window: int = 9) -> np.ndarray:
    """Local contrast normalization over space and channels.

    A Gaussian window (sigma = window / 6) normalized to unit mass over
    all channels subtracts the local weighted mean, then divides by the
    local weighted standard deviation wherever it exceeds one.  Borders
    are mirror-extended.  ``window=1`` is a no-op.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"lcn expects a (C, H, W) tensor, got shape {x.shape}")
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and positive, got {window}")
    if window == 1:
        return x.copy()
    if window > min(x.shape[1], x.shape[2]):
        raise ValueError(f"window {window} larger than feature maps {x.shape[1]}x{x.shape[2]}")
    channels = x.shape[0]
    # Unit total mass across channels: each per-channel 2-D window sums
    # to 1/C, so means and variances average over the channel axis too.
    kernel = gaussian_kernel(window, window / 6.0) / channels
    mean = _conv_same_sum(x, kernel)
    centered = x - mean[None]
    variance = _conv_same_sum(centered**2, kernel)
    sigma = np.sqrt(np.maximum(variance, 0.0))
    return centered / np.maximum(1.0, sigma)[None]


def _conv_same_sum(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Sum over channels of same-size convolution with mirrored borders."""
    radius = kernel.shape[0] // 2
    padded = np.pad(x, ((0, 0), (radius, radius), (radius, radius)), mode="symmetric")
    windows = sliding_window_view(padded, kernel.shape, axis=(1, 2))
    return np.einsum("chwij,ij->hw", windows, kernel)


def _pool_count(extent: int, pool: int, stride: int) -> int:
    if pool > extent:
        raise ValueError(f"pool {pool} larger than extent {extent}")
    count = 1 if extent <= pool else math.ceil((extent - pool) / stride) + 1
    while (count - 1) * stride >= extent:  # last window must start inside
        count -= 1
    return count


def max_pool(x: np.ndarray, pool: int, stride: int | None = None) -> np.ndarray:
    """Per-channel max over pool x pool windows at the given stride.

    Windows that run past the bottom or right edge are kept and reduced
    over their valid part, so every input pixel belongs to at least one
    window.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"max_pool expects a (C, H, W) tensor, got shape {x.shape}")
    if stride is None:
        stride = pool
    if pool < 1 or stride < 1:
        raise ValueError(f"pool and stride must be positive, got {pool}, {stride}")
    _, height, width = x.shape
    out_h = _pool_count(height, pool, stride)
    out_w = _pool_count(width, pool, stride)
    pad_h = max(0, (out_h - 1) * stride + pool - height)
    pad_w = max(0, (out_w - 1) * stride + pool - width)
    padded = np.pad(x, ((0, 0), (0, pad_h), (0, pad_w)), constant_values=-np.inf)
    windows = sliding_window_view(padded, (pool, pool), axis=(1, 2))
    return windows[:, ::stride, ::stride].max(axis=(-2, -1))


def convnet_features(img: np.ndarray, config: ConvNetConfig, banks: list[np.ndarray] | None = None) -> np.ndarray:
    """Run a 2-D image through every layer and flatten the final maps.

    ``banks`` may carry previously materialized filters (for example,
    ones loaded from a stored model); otherwise they are drawn from the
    per-layer seeds.  Configurations that exhaust the spatial extent at
    any layer raise ``ValueError``.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"convnet_features expects a 2-D image, got shape {img.shape}")
    if banks is None:
        banks = init_banks(config, in_channels=1)
    if len(banks) != len(config.layers):
        raise ValueError(f"expected {len(config.layers)} filter banks, got {len(banks)}")
    x = img[None]
    for layer, bank in zip(config.layers, banks):
        x = relu(conv_forward(x, bank))
        if layer.lcn_window > 1:
            x = lcn(x, layer.lcn_window)
        x = max_pool(x, layer.pool_size, layer.stride)
    return x.reshape(-1).copy()
