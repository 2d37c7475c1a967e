"""End-to-end liveness pipeline: preprocess, extract, transform, classify.

Labels are +1 for a live finger and -1 for a spoof throughout the
package.  A trained pipeline carries everything needed to score a raw
image: the preprocessing recipe, the feature extractor (with realized
filter banks for the convnet), the fitted standardizer and PCA, and the
SVM expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import augment as aug
from .convnet import ConvNetConfig, convnet_features, init_banks
from .imageproc import clahe, crop, extract_roi, highpass, lowpass, resize_bilinear
from .lbp import LbpConfig, lbp_features
from .seeds import derive_seed
from .svm import SvmModel, SvmParams, decision_score, train_smo
from .transform import PcaModel, Standardizer, fit_pca_randomized, project

__all__ = [
    "LIVE_LABEL",
    "FAKE_LABEL",
    "PreprocessConfig",
    "TransformConfig",
    "PipelineConfig",
    "preprocess_image",
    "extract_features",
    "resolve_components",
    "TrainedPipeline",
    "fit_pipeline",
]

LIVE_LABEL = 1.0
FAKE_LABEL = -1.0

FILTER_MODES = ("none", "lowpass", "highpass")


@dataclass(frozen=True)
class PreprocessConfig:
    """Geometry and photometry fixes applied before feature extraction.

    Order of application: downscale, crop to the fingerprint region,
    contrast equalization, frequency filtering.  The signed highpass
    residual, when selected, is the last step so every earlier stage
    sees intensities in [0, 1].
    """

    scale: float = 1.0
    filter: str = "none"
    roi: bool = False
    equalize: bool = False
    clahe_tiles: tuple[int, int] = (8, 8)
    clahe_clip: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.scale <= 1.0:
            raise ValueError(f"scale must lie in (0, 1], got {self.scale}")
        if self.filter not in FILTER_MODES:
            raise ValueError(f"filter must be one of {FILTER_MODES}, got {self.filter!r}")
        tiles = (int(self.clahe_tiles[0]), int(self.clahe_tiles[1]))
        if tiles[0] < 1 or tiles[1] < 1:
            raise ValueError(f"clahe tile grid must be positive, got {self.clahe_tiles}")
        object.__setattr__(self, "clahe_tiles", tiles)
        if not self.clahe_clip > 0.0:
            raise ValueError(f"clahe clip must be positive, got {self.clahe_clip}")


@dataclass(frozen=True)
class TransformConfig:
    """PCA sizing: components as a fraction of the feature dimension."""

    pca_fraction: float = 0.2
    whiten: bool = True

    def __post_init__(self):
        if not 0.0 < self.pca_fraction <= 1.0:
            raise ValueError(f"pca_fraction must lie in (0, 1], got {self.pca_fraction}")


@dataclass(frozen=True)
class PipelineConfig:
    preprocess: PreprocessConfig
    extractor: LbpConfig | ConvNetConfig
    transform: TransformConfig
    classifier: SvmParams
    augmented: bool = False
    seed: int = 0


def preprocess_image(img: np.ndarray, config: PreprocessConfig) -> np.ndarray:
    out = np.asarray(img, dtype=np.float64)
    if config.scale < 1.0:
        out = resize_bilinear(out, config.scale)
    if config.roi:
        out = crop(out, extract_roi(out))
    if config.equalize:
        out = clahe(out, config.clahe_tiles, config.clahe_clip)
    if config.filter == "lowpass":
        out = lowpass(out)
    elif config.filter == "highpass":
        out = highpass(out)
    return out


def extract_features(
    img: np.ndarray,
    extractor: LbpConfig | ConvNetConfig,
    banks: list[np.ndarray] | None = None,
) -> np.ndarray:
    if isinstance(extractor, LbpConfig):
        return lbp_features(img, extractor)
    if isinstance(extractor, ConvNetConfig):
        return convnet_features(img, extractor, banks=banks)
    raise TypeError(f"unknown extractor config: {type(extractor).__name__}")


def resolve_components(fraction: float, feature_dim: int, n_samples: int) -> int:
    """Number of PCA components: fraction of the feature dimension,
    clamped to what the sample count can support."""
    k = int(round(fraction * feature_dim))
    return max(1, min(k, n_samples - 1, feature_dim))


def seeded_extractor(extractor, root_seed: int):
    """Fill in derived per-layer filter seeds for a convnet extractor."""
    if not isinstance(extractor, ConvNetConfig):
        return extractor
    layers = tuple(
        replace(layer, seed=derive_seed(root_seed, "filters", index))
        for index, layer in enumerate(extractor.layers)
    )
    return ConvNetConfig(layers=layers)


class TrainedPipeline:
    """A fully fitted pipeline ready to score raw [0, 1] images."""

    def __init__(
        self,
        config: PipelineConfig,
        banks: list[np.ndarray] | None,
        standardizer: Standardizer,
        pca: PcaModel,
        classifier: SvmModel,
    ):
        self.config = config
        self.banks = banks
        self.standardizer = standardizer
        self.pca = pca
        self.classifier = classifier

    def score_image(self, img: np.ndarray) -> float:
        """Margin of one already-preprocessed image (or patch)."""
        features = extract_features(img, self.config.extractor, self.banks)
        z = project(self.pca, self.standardizer.apply(features))
        return decision_score(self.classifier, z)

    def decision_score(self, img: np.ndarray) -> float:
        """Margin of a raw image; averages the ten patches when the
        pipeline was trained with augmentation."""
        pre = preprocess_image(img, self.config.preprocess)
        if self.config.augmented:
            return aug.averaged_score(self, pre)
        return self.score_image(pre)

    def predict(self, img: np.ndarray) -> float:
        """Hard label: +1 live, -1 fake; a zero margin counts as live."""
        return LIVE_LABEL if self.decision_score(img) >= 0.0 else FAKE_LABEL


def fit_pipeline(images: list[np.ndarray], labels: np.ndarray, config: PipelineConfig) -> TrainedPipeline:
    """Train the full pipeline on raw labeled images.

    All randomness (filter banks, PCA sketch, SMO probing) derives from
    ``config.seed``.  Feature vectors must come out the same length for
    every image, which for the convnet extractor means equally sized
    inputs.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if len(images) != len(labels):
        raise ValueError(f"got {len(images)} images but {len(labels)} labels")
    if not np.all(np.isin(labels, (LIVE_LABEL, FAKE_LABEL))):
        raise ValueError("labels must be +1 (live) or -1 (fake)")

    extractor = seeded_extractor(config.extractor, config.seed)
    config = replace(config, extractor=extractor)
    banks = init_banks(extractor) if isinstance(extractor, ConvNetConfig) else None

    pre = [preprocess_image(img, config.preprocess) for img in images]
    if config.augmented:
        pre, labels = aug.augment_training(pre, labels)

    rows = [extract_features(img, extractor, banks) for img in pre]
    lengths = {len(r) for r in rows}
    if len(lengths) > 1:
        raise ValueError(f"feature lengths differ across images: {sorted(lengths)}")
    X = np.vstack(rows)

    standardizer = Standardizer.fit(X)
    Xs = standardizer.apply(X)
    k = resolve_components(config.transform.pca_fraction, X.shape[1], X.shape[0])
    pca = fit_pca_randomized(Xs, k, seed=derive_seed(config.seed, "pca"), whiten=config.transform.whiten)
    Z = project(pca, Xs)
    classifier, _ = train_smo(Z, labels, config.classifier, seed=derive_seed(config.seed, "smo"))
    return TrainedPipeline(config, banks, standardizer, pca, classifier)
