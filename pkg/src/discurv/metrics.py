"""Image quality and convergence metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

__all__ = ["MetricReport", "psnr", "ssim", "mse", "rel_err_l1", "report"]

PEAK = 255.0

# Gaussian-window SSIM with the usual reference constants.
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    psnr: float
    ssim: float
    mse: float


def _pair(ref, test):
    a = np.asarray(ref, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(ref, test) -> float:
    a, b = _pair(ref, test)
    return float(np.mean((a - b) ** 2))


def psnr(ref, test, peak: float = PEAK) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    err = mse(ref, test)
    if err == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / err))


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    w = np.exp(-0.5 * (x / sigma) ** 2)
    return w / w.sum()


def _filter_valid(img, w):
    r = len(w) // 2
    out = correlate1d(img, w, axis=0, mode="constant")
    out = correlate1d(out, w, axis=1, mode="constant")
    return out[r:img.shape[0] - r, r:img.shape[1] - r]


def _ssim_gray(a, b, data_range):
    w = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu_a = _filter_valid(a, w)
    mu_b = _filter_valid(b, w)
    saa = _filter_valid(a * a, w) - mu_a * mu_a
    sbb = _filter_valid(b * b, w) - mu_b * mu_b
    sab = _filter_valid(a * b, w) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * sab + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (saa + sbb + c2)
    # rounding can push a near-perfect score a few ulps past 1
    return float(np.clip(np.mean(num / den), -1.0, 1.0))


def ssim(ref, test, data_range: float = PEAK) -> float:
    """Mean structural similarity over all full 11x11 Gaussian windows.

    Color images are scored per channel and averaged.
    """
    a, b = _pair(ref, test)
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ValueError(f"images smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")
    if np.array_equal(a, b):
        return 1.0
    if a.ndim == 3:
        return float(np.mean([_ssim_gray(a[..., c], b[..., c], data_range) for c in range(a.shape[2])]))
    return _ssim_gray(a, b, data_range)


def rel_err_l1(a, b) -> float:
    """``||a - b||_1 / ||b||_1``, or ``inf`` when ``b`` is zero."""
    x, y = _pair(a, b)
    den = np.abs(y).sum()
    if den == 0.0:
        return float("inf")
    return float(np.abs(x - y).sum() / den)


def report(ref, test) -> MetricReport:
    return MetricReport(psnr=psnr(ref, test), ssim=ssim(ref, test), mse=mse(ref, test))
