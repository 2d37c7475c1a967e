#!/usr/bin/env python3
# Feature extraction with a convnet whose filters are random draws,
# never trained.  Stage by stage: convolution, ReLU, local contrast
# normalization, ceil-mode max pooling.

import numpy as np

from livecheck.convnet import (
    ConvLayerConfig,
    ConvNetConfig,
    conv_forward,
    convnet_features,
    init_banks,
    lcn,
    max_pool,
    relu,
)
from livecheck.synthdata import ridge_image

config = ConvNetConfig(
    layers=(
        ConvLayerConfig(num_filters=16, filter_size=5, pool_size=3, lcn_window=9, seed=1),
        ConvLayerConfig(num_filters=32, filter_size=5, pool_size=3, lcn_window=9, seed=2),
    )
)
banks = init_banks(config)
for i, bank in enumerate(banks):
    print(f"layer {i} bank: {bank.shape}  std {bank.std():.4f} (~ 1/sqrt(fan_in))")

img = ridge_image(np.random.default_rng(3), size=64)
x = img[np.newaxis]
for layer, bank in zip(config.layers, banks):
    x = conv_forward(x, bank)
    print("after conv:", x.shape)
    x = relu(x)
    x = lcn(x, layer.lcn_window)
    x = max_pool(x, layer.pool_size, layer.stride)
    print("after pool:", x.shape)

features = convnet_features(img, config, banks)
print("feature vector:", features.shape, "== stage chain:", np.array_equal(features, x.ravel()))

# Same seeds, same filters, same features. Different seeds, different
# random projection of the texture.
again = convnet_features(img, config, init_banks(config))
print("rerun identical:", np.array_equal(features, again))

other = ConvNetConfig(
    layers=tuple(
        ConvLayerConfig(l.num_filters, l.filter_size, l.pool_size, l.pool_stride, l.lcn_window, seed=l.seed + 100)
        for l in config.layers
    )
)
print("different seeds differ:", not np.allclose(features, convnet_features(img, other)))
