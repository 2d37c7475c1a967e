"""Crop/flip augmentation and patch-averaged scoring.

Each image expands into ten patches: crops of 80% of each dimension
anchored at the four corners and the center, each followed by its
horizontal mirror.  Patch 2i is always the unflipped crop and patch
2i+1 its mirror, in corner order top-left, top-right, bottom-left,
bottom-right, then center.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "PATCH_FRACTION",
    "PATCHES_PER_IMAGE",
    "hflip",
    "make_patches",
    "augment_training",
    "averaged_score",
]

PATCH_FRACTION = 0.8
PATCHES_PER_IMAGE = 10


def hflip(img: np.ndarray) -> np.ndarray:
    """Mirror the columns; applying it twice restores the input."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"hflip expects a 2-D image, got shape {img.shape}")
    return img[:, ::-1].copy()


def make_patches(img: np.ndarray) -> list[np.ndarray]:
    """Return the ten crop/flip patches of an image.

    Patch height and width are ``floor(0.8 * dim)``; the center crop
    origin is the floor of half the leftover margin.  Images too small
    to yield a non-empty crop are rejected.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"make_patches expects a 2-D image, got shape {img.shape}")
    height, width = img.shape
    # floor(0.8 * dim) in exact integer arithmetic
    ph = 4 * height // 5
    pw = 4 * width // 5
    if ph < 1 or pw < 1:
        raise ValueError(f"image {height}x{width} too small to crop at {PATCH_FRACTION}")
    origins = [
        (0, 0),
        (0, width - pw),
        (height - ph, 0),
        (height - ph, width - pw),
        ((height - ph) // 2, (width - pw) // 2),
    ]
    patches = []
    for oy, ox in origins:
        patch = img[oy : oy + ph, ox : ox + pw].copy()
        patches.append(patch)
        patches.append(hflip(patch))
    return patches


def augment_training(images: list[np.ndarray], labels: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Expand a labeled set tenfold; patches inherit the source label.

    Output order is the patch order within each image, images in their
    original order, so sample i maps to outputs 10i .. 10i+9.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if len(images) != len(labels):
        raise ValueError(f"got {len(images)} images but {len(labels)} labels")
    out_images: list[np.ndarray] = []
    for img in images:
        out_images.extend(make_patches(img))
    out_labels = np.repeat(labels, PATCHES_PER_IMAGE)
    return out_images, out_labels


def averaged_score(scorer, img: np.ndarray) -> float:
    """Mean of ``scorer.score_image`` over the ten patches of ``img``."""
    scores = [scorer.score_image(patch) for patch in make_patches(img)]
    return float(np.mean(scores))
