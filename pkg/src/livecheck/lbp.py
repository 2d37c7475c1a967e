"""Local binary patterns over the 8-neighborhood, with blocked histograms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LbpConfig",
    "lbp_code",
    "uniform_label",
    "lbp_map",
    "lbp_features",
    "UNIFORM_LABELS",
    "N_ORIGINAL_BINS",
    "N_UNIFORM_BINS",
]

# Clockwise ring starting at the top-left neighbor; the first offset
# contributes the most significant bit of the code.
_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))

N_ORIGINAL_BINS = 256
N_UNIFORM_BINS = 10


def _uniform_table() -> np.ndarray:
    # A code is uniform when its circular bit string has at most two
    # 0/1 transitions; uniform codes are labeled by their popcount
    # (0..8) and everything else shares label 9.
    table = np.empty(256, dtype=np.intp)
    for code in range(256):
        bits = [(code >> (7 - k)) & 1 for k in range(8)]
        transitions = sum(bits[k] != bits[(k + 1) % 8] for k in range(8))
        table[code] = sum(bits) if transitions <= 2 else 9
    return table


UNIFORM_LABELS = _uniform_table()


def lbp_code(patch: np.ndarray) -> int:
    """Code of a single 3x3 patch: neighbors >= center, clockwise from top-left."""
    patch = np.asarray(patch, dtype=np.float64)
    if patch.shape != (3, 3):
        raise ValueError(f"lbp_code expects a 3x3 patch, got {patch.shape}")
    center = patch[1, 1]
    code = 0
    for k, (dy, dx) in enumerate(_OFFSETS):
        if patch[1 + dy, 1 + dx] >= center:
            code |= 1 << (7 - k)
    return code


def uniform_label(code: int) -> int:
    """Map a code to its uniform-pattern label in 0..9."""
    if not 0 <= code <= 255:
        raise ValueError(f"code must lie in 0..255, got {code}")
    return int(UNIFORM_LABELS[code])


def lbp_map(img: np.ndarray) -> np.ndarray:
    """Codes for every interior pixel; output is (H-2, W-2) uint8."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError(f"lbp_map needs at least a 3x3 image, got {img.shape}")
    height, width = img.shape
    center = img[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.uint8)
    for k, (dy, dx) in enumerate(_OFFSETS):
        neighbor = img[1 + dy : height - 1 + dy, 1 + dx : width - 1 + dx]
        codes |= (neighbor >= center).astype(np.uint8) << (7 - k)
    return codes


@dataclass(frozen=True)
class LbpConfig:
    """Histogram layout: code variant and spatial block grid."""

    variant: str = "uniform"
    blocks: tuple[int, int] = (1, 1)

    def __post_init__(self):
        if self.variant not in ("original", "uniform"):
            raise ValueError(f"variant must be 'original' or 'uniform', got {self.variant!r}")
        rows, cols = self.blocks
        if rows < 1 or cols < 1:
            raise ValueError(f"block grid must be positive, got {self.blocks}")
        object.__setattr__(self, "blocks", (int(rows), int(cols)))

    @property
    def bins(self) -> int:
        return N_UNIFORM_BINS if self.variant == "uniform" else N_ORIGINAL_BINS

    @property
    def feature_length(self) -> int:
        return self.bins * self.blocks[0] * self.blocks[1]


def _block_bounds(extent: int, blocks: int) -> list[tuple[int, int]]:
    base = extent // blocks
    if base < 1:
        raise ValueError(f"block grid of {blocks} is too fine for extent {extent}")
    bounds = [(i * base, (i + 1) * base) for i in range(blocks - 1)]
    bounds.append(((blocks - 1) * base, extent))  # last block absorbs the remainder
    return bounds


def lbp_features(img: np.ndarray, config: LbpConfig) -> np.ndarray:
    """Concatenated per-block histograms of LBP codes, each L1-normalized.

    Blocks tile the code map in row-major order; every block histogram
    sums to one, so the full vector sums to the number of blocks.
    """
    codes = lbp_map(img)
    values = codes if config.variant == "original" else UNIFORM_LABELS[codes]
    bins = config.bins
    rows, cols = config.blocks
    row_bounds = _block_bounds(codes.shape[0], rows)
    col_bounds = _block_bounds(codes.shape[1], cols)
    parts = []
    for r0, r1 in row_bounds:
        for c0, c1 in col_bounds:
            block = values[r0:r1, c0:c1]
            hist = np.bincount(block.ravel(), minlength=bins).astype(np.float64)
            parts.append(hist / block.size)
    return np.concatenate(parts)
