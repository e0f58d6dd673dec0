"""Grid operators and noise generators shared by the solver and curvature code.

Images are plain ``float64`` arrays of shape ``(H, W)`` (one channel) or
``(H, W, 3)``.  Vector fields are arrays of shape ``(2, H, W)`` where
component 0 differentiates along rows (axis 0, index ``i``) and component 1
along columns (axis 1, index ``j``).  Intensities stay on the native 0-255
scale.

All difference operators use periodic wrap-around, so ``divergence`` is the
exact negative adjoint of ``gradient_forward`` and the Laplacian
``divergence(gradient_forward(u))`` is diagonalised by the 2-D DFT.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

__all__ = [
    "as_image",
    "as_mask",
    "gradient_forward",
    "divergence",
    "laplacian",
    "laplacian_symbol",
    "add_noise",
]


def as_image(u, *, allow_color: bool = True) -> np.ndarray:
    """Validate and promote ``u`` to a finite float64 image array."""
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim == 2:
        pass
    elif arr.ndim == 3 and arr.shape[2] == 3 and allow_color:
        pass
    elif arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    else:
        kind = "(H, W) or (H, W, 3)" if allow_color else "(H, W)"
        raise ValueError(f"expected image of shape {kind}, got {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image dimensions must be positive")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return arr


def as_mask(known, shape: Optional[tuple] = None) -> np.ndarray:
    """Validate an inpainting mask (True = observed pixel)."""
    mask = np.asarray(known, dtype=bool)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    if shape is not None and mask.shape != tuple(shape[:2]):
        raise ValueError(f"mask shape {mask.shape} does not match image {shape[:2]}")
    if not mask.any():
        raise ValueError("mask has no known pixels")
    return mask


def gradient_forward(u) -> np.ndarray:
    """Forward differences with periodic wrap.

    ``p[0, i, j] = u[i+1, j] - u[i, j]`` and ``p[1, i, j] = u[i, j+1] - u[i, j]``
    with indices taken modulo the image size.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError(f"gradient_forward expects a single-channel image, got shape {u.shape}")
    p = np.empty((2,) + u.shape)
    p[0] = np.roll(u, -1, axis=0) - u
    p[1] = np.roll(u, -1, axis=1) - u
    return p


def divergence(p) -> np.ndarray:
    """Backward-difference divergence, the negative adjoint of :func:`gradient_forward`."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 3 or p.shape[0] != 2:
        raise ValueError(f"vector field must have shape (2, H, W), got {p.shape}")
    px, py = p[0], p[1]
    return (px - np.roll(px, 1, axis=0)) + (py - np.roll(py, 1, axis=1))


def laplacian(u) -> np.ndarray:
    """Periodic 5-point Laplacian, equal to ``divergence(gradient_forward(u))``."""
    u = np.asarray(u, dtype=np.float64)
    return (
        np.roll(u, 1, axis=0) + np.roll(u, -1, axis=0)
        + np.roll(u, 1, axis=1) + np.roll(u, -1, axis=1)
        - 4.0 * u
    )


def laplacian_symbol(width: int, height: int) -> np.ndarray:
    """Fourier multiplier of :func:`laplacian` on a ``height x width`` grid.

    Entry ``(p, q)`` is ``2cos(2*pi*p/height) + 2cos(2*pi*q/width) - 4``; the
    result has shape ``(height, width)`` and matches ``numpy.fft.fft2`` layout.
    """
    width, height = int(width), int(height)
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be positive")
    cp = 2.0 * np.cos(2.0 * np.pi * np.arange(height) / height)
    cq = 2.0 * np.cos(2.0 * np.pi * np.arange(width) / width)
    return cp[:, None] + cq[None, :] - 4.0


def add_noise(
    u,
    model: str,
    *,
    seed: int,
    sigma: float = 0.0,
    fraction: float = 0.0,
    low: float = 0.0,
    high: float = 255.0,
    clip: bool = False,
) -> np.ndarray:
    """Corrupt ``u`` with one of the supported noise models.

    Args:
        u: clean image, gray or color.
        model: ``"gaussian"``, ``"salt_pepper"`` or ``"poisson"``.
        seed: seed for :func:`numpy.random.default_rng`; equal seeds give
            bit-identical output.
        sigma: standard deviation of the additive Gaussian noise.
        fraction: share of array entries replaced by impulses.  Exactly
            ``floor(fraction * u.size)`` distinct entries are hit, the first
            half (rounded down) set to ``low`` and the rest to ``high``.
        low, high: intensity range used for pepper and salt.
        clip: clamp a Gaussian-noisy result to ``[low, high]``, as happens
            when the noisy image is stored as 8-bit data.

    Returns:
        A new float64 array of the same shape.
    """
    u = as_image(u)
    rng = np.random.default_rng(seed)
    if model == "gaussian":
        if not sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {sigma}")
        if sigma == 0:
            return u.copy()
        noisy = u + rng.normal(0.0, sigma, size=u.shape)
        return np.clip(noisy, low, high) if clip else noisy
    if model == "salt_pepper":
        if not 0.0 <= fraction <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
        out = u.copy()
        n_hit = int(np.floor(fraction * u.size))
        idx = rng.choice(u.size, size=n_hit, replace=False)
        flat = out.reshape(-1)
        n_pepper = n_hit // 2
        flat[idx[:n_pepper]] = low
        flat[idx[n_pepper:]] = high
        return out
    if model == "poisson":
        if np.any(u < 0):
            raise ValueError("poisson noise requires nonnegative intensities")
        return rng.poisson(u).astype(np.float64)
    raise ValueError(f"unknown noise model {model!r}")
