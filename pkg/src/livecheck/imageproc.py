"""Grayscale image ingestion and preprocessing primitives.

Images are 2-D float64 arrays.  Ingestion maps 8-bit pixels into
``[0, 1]``; most operations preserve that range, except ``highpass``
whose output is a signed residual and is consumed as-is downstream.
Border-sensitive operations (convolution, morphology) extend the image
by mirroring edge pixels, so constant images pass through unchanged.

All functions are pure: no global state, no hidden RNG, identical
inputs give bit-identical outputs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "RoiRect",
    "as_image",
    "ingest",
    "write_pgm",
    "resize_bilinear",
    "gaussian_kernel",
    "convolve2d",
    "lowpass",
    "highpass",
    "morph_close",
    "extract_roi",
    "crop",
    "clahe",
]

_WHITESPACE = b" \t\r\n\x0b\x0c"

GAUSS_SIZE = 13
GAUSS_SIGMA = 3.0

ROI_CLOSE_BOX = 21
ROI_SIGMA_FACTOR = 3.0


def as_image(data) -> np.ndarray:
    """Validate ``data`` as a 2-D float64 intensity image in [0, 1]."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image intensities must lie in [0, 1]")
    return img


# ---------------------------------------------------------------------------
# PGM ingestion


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Return the next header token, skipping whitespace and # comments."""
    n = len(data)
    while pos < n:
        c = data[pos]
        if c == 0x23:  # '#'
            while pos < n and data[pos] not in (0x0A, 0x0D):
                pos += 1
        elif c in _WHITESPACE:
            pos += 1
        else:
            break
    if pos >= n:
        raise ValueError("unsupported format: truncated header")
    start = pos
    while pos < n and data[pos] not in _WHITESPACE and data[pos] != 0x23:
        pos += 1
    return data[start:pos], pos


def _header_int(data: bytes, pos: int, what: str) -> tuple[int, int]:
    token, pos = _read_token(data, pos)
    if not re.fullmatch(rb"\d+", token):
        raise ValueError(f"unsupported format: bad {what} field {token!r}")
    return int(token), pos


def ingest(data: bytes) -> np.ndarray:
    """Decode an 8-bit grayscale PGM byte stream into a [0, 1] image.

    Binary ``P5`` is the primary format; plain-text ``P2`` is accepted
    as well.  Header comments and arbitrary whitespace are handled.
    Anything else (wrong magic, maxval above 255, zero dimensions,
    truncated pixel data) raises ``ValueError`` naming the problem.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("ingest expects a byte stream")
    data = bytes(data)
    magic, pos = _read_token(data, 0)
    if magic not in (b"P5", b"P2"):
        raise ValueError(f"unsupported format: not a PGM stream (magic {magic!r})")
    width, pos = _header_int(data, pos, "width")
    height, pos = _header_int(data, pos, "height")
    maxval, pos = _header_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise ValueError("unsupported format: zero image dimension")
    if not 1 <= maxval <= 255:
        raise ValueError(f"unsupported format: maxval {maxval} is not 8-bit")

    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte separates maxval from the raster
        if len(data) - pos < count:
            raise ValueError("unsupported format: truncated pixel data")
        pixels = np.frombuffer(data, dtype=np.uint8, count=count, offset=pos)
    else:
        values = []
        for _ in range(count):
            try:
                value, pos = _header_int(data, pos, "pixel")
            except ValueError:
                raise ValueError("unsupported format: truncated pixel data") from None
            values.append(value)
        pixels = np.asarray(values, dtype=np.int64)
    if pixels.max(initial=0) > maxval:
        raise ValueError("unsupported format: pixel value exceeds maxval")
    img = pixels.astype(np.float64).reshape(height, width) / 255.0
    return img


def write_pgm(img: np.ndarray) -> bytes:
    """Encode a [0, 1] image as a binary (P5) 8-bit PGM byte stream."""
    img = as_image(img)
    height, width = img.shape
    raster = np.rint(img * 255.0).astype(np.uint8)
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + raster.tobytes()


# ---------------------------------------------------------------------------
# Resampling and filtering


def _axis_coords(n_in: int, n_out: int):
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1.0)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, src - lo


def resize_bilinear(img: np.ndarray, scale: float) -> np.ndarray:
    """Downscale ``img`` by ``scale`` in (0, 1] with bilinear sampling.

    Output dimensions are ``floor(scale * input)``.  Sample positions
    use pixel-center alignment and are clamped to the source grid, so
    ``scale=1.0`` returns the input unchanged.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("resize_bilinear expects a 2-D image")
    if not 0.0 < scale <= 1.0:
        raise ValueError(f"scale must lie in (0, 1], got {scale}")
    height, width = img.shape
    out_h = math.floor(scale * height)
    out_w = math.floor(scale * width)
    if out_h < 1 or out_w < 1:
        raise ValueError(f"scale {scale} collapses a {height}x{width} image")
    if (out_h, out_w) == (height, width):
        return img.copy()
    y0, y1, fy = _axis_coords(height, out_h)
    x0, x1, fx = _axis_coords(width, out_w)
    top = img[np.ix_(y0, x0)] * (1.0 - fx) + img[np.ix_(y0, x1)] * fx
    bottom = img[np.ix_(y1, x0)] * (1.0 - fx) + img[np.ix_(y1, x1)] * fx
    return top * (1.0 - fy)[:, None] + bottom * fy[:, None]


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """Return a ``size x size`` Gaussian kernel normalized to unit sum."""
    if size < 1 or size % 2 == 0:
        raise ValueError(f"kernel size must be odd and positive, got {size}")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    offsets = np.arange(size, dtype=np.float64) - size // 2
    profile = np.exp(-(offsets**2) / (2.0 * sigma**2))
    kernel = np.outer(profile, profile)
    return kernel / kernel.sum()


def convolve2d(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """True 2-D convolution (kernel flipped) with mirrored borders.

    The output has the same shape as the input.  The kernel must be
    square with odd side length and no larger than the image.
    """
    img = np.asarray(img, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("convolve2d expects a 2-D image")
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1] or kernel.shape[0] % 2 == 0:
        raise ValueError(f"kernel must be square with odd side, got shape {kernel.shape}")
    size = kernel.shape[0]
    if size > min(img.shape):
        raise ValueError(f"kernel {size}x{size} larger than image {img.shape}")
    radius = size // 2
    padded = img if radius == 0 else np.pad(img, radius, mode="symmetric")
    windows = sliding_window_view(padded, kernel.shape)
    return np.einsum("hwij,ij->hw", windows, kernel[::-1, ::-1])


_LOWPASS_KERNEL = gaussian_kernel(GAUSS_SIZE, GAUSS_SIGMA)


def lowpass(img: np.ndarray) -> np.ndarray:
    """Smooth with the fixed 13x13, sigma 3 Gaussian."""
    return convolve2d(img, _LOWPASS_KERNEL)


def highpass(img: np.ndarray) -> np.ndarray:
    """Residual detail: the image minus its lowpass component."""
    img = np.asarray(img, dtype=np.float64)
    return img - lowpass(img)


# ---------------------------------------------------------------------------
# Morphology and region of interest


def _window_reduce(img: np.ndarray, box: int, reducer) -> np.ndarray:
    radius = box // 2
    padded = img if radius == 0 else np.pad(img, radius, mode="symmetric")
    windows = sliding_window_view(padded, (box, box))
    return reducer(windows, axis=(-2, -1))


def morph_close(img: np.ndarray, box: int) -> np.ndarray:
    """Grayscale closing (dilation then erosion) with a square box.

    Borders are mirror-extended.  Closing never decreases any pixel and
    leaves constant images untouched.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("morph_close expects a 2-D image")
    if box < 1 or box % 2 == 0:
        raise ValueError(f"box side must be odd and positive, got {box}")
    if box > min(img.shape):
        raise ValueError(f"box {box} larger than image {img.shape}")
    dilated = _window_reduce(img, box, np.max)
    return _window_reduce(dilated, box, np.min)


@dataclass(frozen=True)
class RoiRect:
    """Axis-aligned crop rectangle; ``x`` is the column axis."""

    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("RoiRect must have positive extent")
        if self.x0 < 0 or self.y0 < 0:
            raise ValueError("RoiRect origin must be non-negative")


def extract_roi(img: np.ndarray) -> RoiRect:
    """Locate the foreground region of a fingerprint image.

    The image is closed with a box element (21 pixels, shrunk to the
    largest odd size that fits small inputs), then the intensity mass
    of the closed image gives a center and per-axis spread.  The
    rectangle spans three standard deviations to each side of the
    center, clipped to the image.  A zero-mass image yields the full
    frame.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("extract_roi expects a 2-D image")
    height, width = img.shape
    box = min(ROI_CLOSE_BOX, height, width)
    if box % 2 == 0:
        box -= 1
    closed = morph_close(img, box)
    total = closed.sum()
    if total <= 0.0:
        return RoiRect(0, 0, width, height)
    xs = np.arange(width, dtype=np.float64)
    ys = np.arange(height, dtype=np.float64)
    col_mass = closed.sum(axis=0)
    row_mass = closed.sum(axis=1)
    cx = float(col_mass @ xs) / total
    cy = float(row_mass @ ys) / total
    sx = math.sqrt(float(col_mass @ (xs - cx) ** 2) / total)
    sy = math.sqrt(float(row_mass @ (ys - cy) ** 2) / total)
    x0 = max(0, math.floor(cx - ROI_SIGMA_FACTOR * sx))
    x1 = min(width - 1, math.ceil(cx + ROI_SIGMA_FACTOR * sx))
    y0 = max(0, math.floor(cy - ROI_SIGMA_FACTOR * sy))
    y1 = min(height - 1, math.ceil(cy + ROI_SIGMA_FACTOR * sy))
    return RoiRect(x0, y0, x1 - x0 + 1, y1 - y0 + 1)


def crop(img: np.ndarray, rect: RoiRect) -> np.ndarray:
    """Cut ``rect`` out of ``img``; the rectangle must lie inside it."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("crop expects a 2-D image")
    height, width = img.shape
    if rect.x0 + rect.width > width or rect.y0 + rect.height > height:
        raise ValueError(f"rectangle {rect} exceeds image {height}x{width}")
    return img[rect.y0 : rect.y0 + rect.height, rect.x0 : rect.x0 + rect.width].copy()


# ---------------------------------------------------------------------------
# Contrast-limited adaptive histogram equalization


def _tile_edges(extent: int, tiles: int) -> np.ndarray:
    return (np.arange(tiles + 1) * extent) // tiles


def _blend_weights(coords: np.ndarray, centers: np.ndarray):
    """Indices of the two bracketing tile centers and the blend factor."""
    if len(centers) == 1:
        zeros = np.zeros(len(coords), dtype=np.intp)
        return zeros, zeros, np.zeros(len(coords))
    idx = np.searchsorted(centers, coords, side="right") - 1
    idx = np.clip(idx, 0, len(centers) - 2)
    span = centers[idx + 1] - centers[idx]
    weight = np.clip((coords - centers[idx]) / span, 0.0, 1.0)
    return idx, idx + 1, weight


def clahe(img: np.ndarray, tiles: tuple[int, int] = (8, 8), clip: float = 2.0) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization.

    The image is divided into a ``tiles`` grid.  Each tile gets a
    256-bin histogram; counts above ``clip`` times the uniform level
    are trimmed and the excess is spread evenly over all bins.  Every
    pixel is remapped through the clipped CDFs of the (up to four)
    nearest tiles, blended bilinearly by distance to their centers.
    ``clip=inf`` disables the limit and gives plain adaptive
    equalization.

    Input must lie in [0, 1]; so does the output.
    """
    img = as_image(img)
    rows, cols = int(tiles[0]), int(tiles[1])
    if rows < 1 or cols < 1:
        raise ValueError(f"tile grid must be positive, got {tiles}")
    height, width = img.shape
    if rows > height or cols > width:
        raise ValueError(f"tile grid {tiles} too fine for image {height}x{width}")
    if not clip > 0.0:
        raise ValueError(f"clip limit must be positive, got {clip}")

    bins = 256
    binned = np.minimum((img * bins).astype(np.intp), bins - 1)
    row_edges = _tile_edges(height, rows)
    col_edges = _tile_edges(width, cols)

    cdfs = np.empty((rows, cols, bins))
    for ti in range(rows):
        for tj in range(cols):
            tile = binned[row_edges[ti] : row_edges[ti + 1], col_edges[tj] : col_edges[tj + 1]]
            hist = np.bincount(tile.ravel(), minlength=bins).astype(np.float64)
            if math.isfinite(clip):
                limit = clip * tile.size / bins
                excess = np.maximum(hist - limit, 0.0).sum()
                hist = np.minimum(hist, limit) + excess / bins
            cdfs[ti, tj] = np.cumsum(hist) / tile.size

    center_y = (row_edges[:-1] + row_edges[1:] - 1) / 2.0
    center_x = (col_edges[:-1] + col_edges[1:] - 1) / 2.0
    top, bot, wy = _blend_weights(np.arange(height, dtype=np.float64), center_y)
    left, right, wx = _blend_weights(np.arange(width, dtype=np.float64), center_x)

    wy = wy[:, None]
    wx = wx[None, :]
    out = (1.0 - wy) * (1.0 - wx) * cdfs[top[:, None], left[None, :], binned]
    out += (1.0 - wy) * wx * cdfs[top[:, None], right[None, :], binned]
    out += wy * (1.0 - wx) * cdfs[bot[:, None], left[None, :], binned]
    out += wy * wx * cdfs[bot[:, None], right[None, :], binned]
    return out
