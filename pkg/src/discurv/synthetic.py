"""Deterministic test images on the 0-255 scale."""

from __future__ import annotations

import numpy as np

__all__ = ["shapes", "piecewise_constant", "cameraman", "random_mask", "BUILTIN"]


def _grid(height, width):
    i, j = np.meshgrid(np.arange(height, dtype=np.float64), np.arange(width, dtype=np.float64), indexing="ij")
    return i / max(height - 1, 1), j / max(width - 1, 1)


def shapes(n: int = 128, width: int = None) -> np.ndarray:
    """Smooth background with a soft disk, a ramped square and a triangle."""
    height, width = n, width or n
    y, x = _grid(height, width)
    img = 60.0 + 50.0 * x + 30.0 * np.sin(np.pi * y)
    r = np.hypot(y - 0.32, x - 0.3)
    img = np.where(r < 0.18, 200.0 - 120.0 * r, img)
    sq = (np.abs(y - 0.7) < 0.14) & (np.abs(x - 0.3) < 0.14)
    img = np.where(sq, 30.0 + 60.0 * (y - 0.56), img)
    tri = (y > 0.45) & (y < 0.9) & (x > 0.55) & (x - 0.55 < (y - 0.45) * 0.8)
    img = np.where(tri, 170.0, img)
    return img


def piecewise_constant(n: int = 256, width: int = None) -> np.ndarray:
    """Flat regions separated by straight and curved edges."""
    height, width = n, width or n
    y, x = _grid(height, width)
    img = np.full((height, width), 50.0)
    img[(x > 0.1) & (x < 0.45) & (y > 0.1) & (y < 0.45)] = 180.0
    img[np.hypot(y - 0.7, x - 0.3) < 0.2] = 120.0
    img[(y > 0.55) & (x > 0.55) & (y - 0.55 > 0.9 - x)] = 220.0
    img[(y > 0.15) & (y < 0.4) & (x > 0.6) & (x < 0.9)] = 90.0
    return img


def cameraman(n: int = 256) -> np.ndarray:
    """The classic cameraman photograph, block-averaged to ``n x n``.

    Needs scikit-image, which ships the 512x512 version.
    """
    from skimage import data

    img = data.camera().astype(np.float64)
    f = img.shape[0] // n
    if f < 1 or img.shape[0] % n:
        raise ValueError(f"cannot block-average {img.shape} to {n}x{n}")
    return img.reshape(n, f, n, f).mean(axis=(1, 3))


def random_mask(shape, missing_fraction: float, seed: int) -> np.ndarray:
    """Boolean mask (True = known) with exactly ``floor(fraction * N)`` missing pixels."""
    rng = np.random.default_rng(seed)
    n = int(np.prod(shape))
    known = np.ones(n, dtype=bool)
    known[rng.choice(n, size=int(np.floor(missing_fraction * n)), replace=False)] = False
    return known.reshape(shape)


BUILTIN = {
    "shapes": shapes,
    "piecewise": piecewise_constant,
    "cameraman": cameraman,
}
