"""Report figures written next to the delimited outputs."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_trace", "plot_curvature", "plot_bench"]

_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _finite_positive(values):
    arr = np.asarray(values, dtype=np.float64)
    return np.where(np.isfinite(arr) & (arr > 0), arr, np.nan)


def plot_trace(traces, path, labels=None):
    """Four log-scale panels: rel. error in u, residual, rel. error in the multiplier, energy."""
    if not isinstance(traces, (list, tuple)):
        traces = [traces]
    labels = labels or [None] * len(traces)
    panels = [
        ("rel_err_u", "relative error in $u^k$"),
        ("residual", "residual $\\|v^k-\\nabla u^k\\|_1$"),
        ("rel_err_lambda", "relative error in $\\Lambda^k$"),
        ("energy", "energy $E(u^k)$"),
    ]
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, 4, figsize=(12, 2.8))
        for ax, (attr, title) in zip(axes, panels):
            for tr, lab in zip(traces, labels):
                y = _finite_positive(getattr(tr, attr))
                ax.semilogy(np.arange(1, len(y) + 1), y, lw=1.2, label=lab)
            ax.set_title(title)
            ax.set_xlabel("iteration")
        if any(labels):
            axes[0].legend(frameon=False)
        fig.savefig(path)
        plt.close(fig)


def plot_curvature(kmap, path, title=None):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4, 4))
        lim = float(np.percentile(np.abs(kmap), 99)) or 1.0
        im = ax.imshow(kmap, cmap="RdBu_r", vmin=-lim, vmax=lim)
        ax.set_axis_off()
        if title:
            ax.set_title(title)
        fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
        fig.savefig(path)
        plt.close(fig)


def plot_bench(rows, path):
    """Grouped bars of PSNR per (image, noise level), one bar per method."""
    cases = sorted({(r["image"], r["noise"]) for r in rows})
    methods = sorted({r["method"] for r in rows})
    width = 0.8 / max(len(methods), 1)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(cases) * max(1, len(methods)) / 3), 3))
        for m_idx, method in enumerate(methods):
            ys = []
            for case in cases:
                match = [r["psnr"] for r in rows if (r["image"], r["noise"]) == case and r["method"] == method]
                ys.append(match[0] if match and math.isfinite(match[0]) else np.nan)
            ax.bar(np.arange(len(cases)) + m_idx * width, ys, width, label=method)
        ax.set_xticks(np.arange(len(cases)) + 0.4 - width / 2)
        ax.set_xticklabels([f"{img}\n{noise}" for img, noise in cases])
        ax.set_ylabel("PSNR (dB)")
        lo = np.nanmin([r["psnr"] for r in rows if math.isfinite(r["psnr"])] or [0])
        ax.set_ylim(max(0, lo - 3), None)
        ax.legend(frameon=False, ncol=min(4, len(methods)))
        fig.savefig(path)
        plt.close(fig)
