"""Deterministic derivation of child seeds from a single root seed.

Every random stage of the pipeline (filter banks, PCA sketching, SMO
tie-breaking, cross-validation shuffles) receives its own seed derived
from the run's root seed and a short namespace path.  Derivation is
pure arithmetic, so the same root always expands to the same family of
streams regardless of the order stages are executed in.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["derive_seed"]

_MASK32 = 0xFFFFFFFF


def _token(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8")) & _MASK32
    return int(part) & _MASK32


def derive_seed(root: int, *path: int | str) -> int:
    """Return a 32-bit seed for the stream named by ``path`` under ``root``.

    Distinct paths give statistically independent streams; the same
    (root, path) pair always returns the same value.
    """
    if int(root) < 0:
        raise ValueError("root seed must be non-negative")
    entropy = [_token(root)] + [_token(p) for p in path]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])
