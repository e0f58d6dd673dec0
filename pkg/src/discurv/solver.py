"""Proximal ADMM for curvature-weighted total variation.

The model is

    min_u  sum_ij g(kappa_ij(u)) |grad u|_ij  +  fidelity(u, f)

with ``g`` one of the weight functions in :mod:`discurv.curvature`.  The
gradient is split off as ``v = grad u`` (penalty ``mu``, multiplier
``Lambda``); each iteration solves a screened Poisson problem for ``u`` by
FFT, re-estimates the curvature from the new ``u``, shrinks ``v`` with the
resulting per-pixel weights and takes an ascent step on ``Lambda``.

Non-quadratic fidelities add a second split ``w`` with penalty ``mu2`` and a
scaled multiplier ``b2``:

* ``l1``      w = u - f,   penalty (mu2/2)|w - (u - f) - b2|^2
* ``kl``      w = u,       penalty (mu2/2)|w - u + b2|^2
* ``inpaint`` w = u,       penalty (mu2/2)|w - u - b2|^2

so the ``u`` step stays a constant-coefficient spectral solve in all cases.
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .curvature import CurvatureSpec, curvature_map, weight_map
from .imagecore import as_image, as_mask, divergence, gradient_forward, laplacian_symbol
from .metrics import rel_err_l1

__all__ = [
    "FIDELITIES",
    "SolverConfig",
    "IterationTrace",
    "SolveResult",
    "ColorSolveResult",
    "SolverDivergedError",
    "spectral_solve",
    "shrink",
    "shrink_scalar",
    "update_u_l2",
    "update_u_split",
    "update_v",
    "update_multiplier",
    "update_w_l1",
    "update_w_kl",
    "update_w_inpaint",
    "energy",
    "delta_k_diagnostic",
    "admm_solve",
    "solve_color",
    "TRACE_COLUMNS",
]

logger = logging.getLogger(__name__)

FIDELITIES = ("l2", "l1", "kl", "inpaint")
TRACE_COLUMNS = ("iter", "energy", "residual_l1", "rel_err_u", "rel_err_lambda", "delta_k", "time_ms")
_LOG_FLOOR = 1e-12


class SolverDivergedError(FloatingPointError):
    """Raised when an iterate stops being finite."""


@dataclass(frozen=True)
class SolverConfig:
    """Tunables of the ADMM loop.

    ``lam`` is the fidelity weight (``lambda`` is a keyword), ``mu`` the
    penalty on ``v = grad u`` and ``mu2`` the penalty on the fidelity split
    (required for ``l1``, ``kl`` and ``inpaint``).  ``tau`` and ``sigma`` are
    the proximal weights on ``u`` and ``v``; both default to 0.

    ``data_scale`` multiplies the data before the loop and divides the result
    afterwards, so penalties and fidelity weights can be stated for another
    intensity unit (``1/255`` for unit-range data).  Curvature always sees
    the caller's units through ``curvature.intensity_scale``.
    """

    lam: float = 0.07
    mu: float = 2.0
    mu2: Optional[float] = None
    tau: float = 0.0
    sigma: float = 0.0
    max_iter: int = 300
    tol: float = 3e-5
    curvature: CurvatureSpec = field(default_factory=CurvatureSpec)
    fidelity: str = "l2"
    mask: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    track_delta_k: bool = False
    data_scale: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not (self.tau >= 0 and self.sigma >= 0):
            raise ValueError("tau and sigma must be nonnegative")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.fidelity not in FIDELITIES:
            raise ValueError(f"fidelity must be one of {FIDELITIES}, got {self.fidelity!r}")
        if self.fidelity != "l2" and not (self.mu2 is not None and self.mu2 > 0):
            raise ValueError(f"fidelity {self.fidelity!r} needs a positive mu2")
        if self.fidelity == "inpaint" and self.mask is None:
            raise ValueError("inpaint fidelity needs a mask")
        if not self.data_scale > 0:
            raise ValueError(f"data_scale must be positive, got {self.data_scale}")


@dataclass
class IterationTrace:
    """Per-iteration diagnostics; ``delta_k`` is ``None`` unless tracked."""

    energy: List[float] = field(default_factory=list)
    residual: List[float] = field(default_factory=list)
    rel_err_u: List[float] = field(default_factory=list)
    rel_err_lambda: List[float] = field(default_factory=list)
    time_ms: List[float] = field(default_factory=list)
    delta_k: Optional[List[float]] = None

    def __len__(self):
        return len(self.energy)

    def append(self, energy, residual, rel_u, rel_lam, ms):
        self.energy.append(float(energy))
        self.residual.append(float(residual))
        self.rel_err_u.append(float(rel_u))
        self.rel_err_lambda.append(float(rel_lam))
        self.time_ms.append(float(ms))

    def rows(self):
        for k in range(len(self)):
            dk = "" if self.delta_k is None else repr(self.delta_k[k])
            yield (
                k + 1, repr(self.energy[k]), repr(self.residual[k]), repr(self.rel_err_u[k]),
                repr(self.rel_err_lambda[k]), dk, f"{self.time_ms[k]:.3f}",
            )

    def write_csv(self, path, delimiter: str = ","):
        """Write the trace as delimited text with a single header row."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, delimiter=delimiter)
            writer.writerow(TRACE_COLUMNS)
            writer.writerows(self.rows())

    @classmethod
    def read_csv(cls, path, delimiter: str = ","):
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            header = tuple(next(reader))
            if header != TRACE_COLUMNS:
                raise ValueError(f"unexpected trace header {header}")
            trace = cls()
            deltas = []
            for row in reader:
                trace.append(*(float(x) for x in (row[1], row[2], row[3], row[4], row[6])))
                deltas.append(None if row[5] == "" else float(row[5]))
        if deltas and all(d is not None for d in deltas):
            trace.delta_k = deltas
        return trace


@dataclass
class SolveResult:
    restored: np.ndarray
    trace: IterationTrace
    iterations_used: int
    converged: bool
    v: Optional[np.ndarray] = field(default=None, repr=False)
    multiplier: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class ColorSolveResult:
    restored: np.ndarray
    channels: List[SolveResult]

    @property
    def iterations_used(self) -> int:
        return max(r.iterations_used for r in self.channels)

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.channels)

    @property
    def traces(self) -> List[IterationTrace]:
        return [r.trace for r in self.channels]


# -- building blocks ---------------------------------------------------------


def spectral_solve(a: float, b: float, rhs) -> np.ndarray:
    """Solve ``(a I - b Laplacian) u = rhs`` with periodic boundaries."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    if not b >= 0:
        raise ValueError(f"b must be nonnegative, got {b}")
    rhs = np.asarray(rhs, dtype=np.float64)
    H, W = rhs.shape
    if b == 0:
        return rhs / a
    symbol = laplacian_symbol(W, H)[:, : W // 2 + 1]
    return np.fft.irfft2(np.fft.rfft2(rhs) / (a - b * symbol), s=(H, W))


def shrink(vec, threshold) -> np.ndarray:
    """Isotropic soft thresholding of a ``(2, H, W)`` field; zero maps to zero."""
    vec = np.asarray(vec, dtype=np.float64)
    threshold = np.asarray(threshold, dtype=np.float64)
    if np.any(threshold < 0):
        raise ValueError("shrinkage threshold must be nonnegative")
    norm = np.sqrt(vec[0] ** 2 + vec[1] ** 2)
    scale = np.maximum(norm - threshold, 0.0)
    safe = np.where(norm > 0, norm, 1.0)
    return vec * (scale / safe)


def shrink_scalar(x, threshold) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def update_u_l2(f, v, multiplier, u_prev, cfg: SolverConfig) -> np.ndarray:
    """Exact u-step for the quadratic fidelity."""
    rhs = cfg.lam * np.asarray(f) + cfg.tau * np.asarray(u_prev) - divergence(cfg.mu * np.asarray(v) + multiplier)
    return spectral_solve(cfg.lam + cfg.tau, cfg.mu, rhs)


def update_u_split(target, v, multiplier, u_prev, cfg: SolverConfig) -> np.ndarray:
    """u-step when the fidelity is split off: pulls u towards ``target`` with weight ``mu2``."""
    rhs = cfg.mu2 * np.asarray(target) + cfg.tau * np.asarray(u_prev) - divergence(cfg.mu * np.asarray(v) + multiplier)
    return spectral_solve(cfg.mu2 + cfg.tau, cfg.mu, rhs)


def update_v(u_new, v_prev, multiplier, weights, cfg: SolverConfig, grad_u=None) -> np.ndarray:
    """Weighted shrinkage step for the gradient split variable."""
    if grad_u is None:
        grad_u = gradient_forward(u_new)
    if np.shape(weights) != grad_u.shape[1:] or np.shape(multiplier) != grad_u.shape:
        raise ValueError("dimension mismatch in v-update")
    denom = cfg.mu + cfg.sigma
    a = cfg.mu * grad_u - multiplier
    if cfg.sigma:
        a = a + cfg.sigma * np.asarray(v_prev)
    return shrink(a / denom, np.asarray(weights) / denom)


def update_multiplier(multiplier, v_new, u_new, mu: float, grad_u=None) -> np.ndarray:
    if grad_u is None:
        grad_u = gradient_forward(u_new)
    return multiplier + mu * (v_new - grad_u)


def update_w_l1(f, u, b2, cfg: SolverConfig) -> np.ndarray:
    return shrink_scalar(np.asarray(u) - f + b2, cfg.lam / cfg.mu2)


def update_w_kl(f, u, b2, cfg: SolverConfig) -> np.ndarray:
    """Closed-form minimiser of ``lam (w - f log w) + (mu2/2)(w - u + b2)^2``."""
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("KL fidelity needs nonnegative data")
    lam, mu2 = cfg.lam, cfg.mu2
    t = mu2 * (np.asarray(u) - b2) - lam
    disc = np.sqrt(t * t + 4.0 * mu2 * lam * f)
    # Avoid cancellation when t > 0: w = 2 lam f / (disc - t) = (t + disc) / (2 mu2).
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(t > 0, (t + disc) / (2.0 * mu2), 2.0 * lam * f / (disc - t))
    w = np.where((f == 0) & (t <= 0), 0.0, w)
    return np.maximum(w, 0.0)


def update_w_inpaint(f, u, b2, mask, cfg: SolverConfig) -> np.ndarray:
    chi = as_mask(mask, np.shape(u)).astype(np.float64)
    lam, mu2 = cfg.lam, cfg.mu2
    return (lam * chi * f + mu2 * (np.asarray(u) + b2)) / (lam * chi + mu2)


def _grad_norm(u=None, grad_u=None):
    g = gradient_forward(u) if grad_u is None else grad_u
    return np.sqrt(g[0] ** 2 + g[1] ** 2)


def _fidelity_energy(u, f, cfg: SolverConfig, w=None) -> float:
    if cfg.fidelity == "l2":
        return 0.5 * cfg.lam * float(np.sum((u - f) ** 2))
    if cfg.fidelity == "l1":
        return cfg.lam * float(np.sum(np.abs(u - f)))
    if cfg.fidelity == "kl":
        x = u if w is None else w
        return cfg.lam * float(np.sum(x - f * np.log(np.maximum(x, _LOG_FLOOR))))
    chi = np.asarray(cfg.mask, dtype=bool)
    return 0.5 * cfg.lam * float(np.sum(((u - f) * chi) ** 2))


def energy(u, u_weight_source, f, cfg: SolverConfig, *, weights=None, w=None) -> float:
    """Weighted TV of ``u`` plus fidelity, with weights from ``u_weight_source``.

    Pass precomputed ``weights`` to skip the curvature evaluation.
    """
    u = np.asarray(u, dtype=np.float64)
    if weights is None:
        weights = weight_map(curvature_map(u_weight_source, cfg.curvature), cfg.curvature)
    return float(np.sum(weights * _grad_norm(u))) + _fidelity_energy(u, np.asarray(f), cfg, w)


def delta_k_diagnostic(v_history: Sequence, kappa_history: Sequence, v_ref, kappa_ref, spec: CurvatureSpec) -> np.ndarray:
    """``<(g(kappa_k) - g(kappa_ref)) s_k, v_k - v_ref>`` for every stored iterate.

    ``s_k`` is the minimum-norm subgradient of ``|v_k|``: ``v_k / |v_k|`` where
    ``v_k != 0`` and 0 elsewhere.
    """
    if len(v_history) == 0 or len(v_history) != len(kappa_history):
        raise ValueError("v and curvature histories must be non-empty and of equal length")
    g_ref = weight_map(kappa_ref, spec)
    v_ref = np.asarray(v_ref)
    out = np.empty(len(v_history))
    for k, (vk, kk) in enumerate(zip(v_history, kappa_history)):
        vk = np.asarray(vk)
        norm = np.sqrt(vk[0] ** 2 + vk[1] ** 2)
        s = vk / np.where(norm > 0, norm, 1.0)
        dg = weight_map(kk, spec) - g_ref
        out[k] = float(np.sum(dg * np.sum(s * (vk - v_ref), axis=0)))
    return out


# -- main loop ---------------------------------------------------------------


def _check_finite(k, **arrays):
    for name, arr in arrays.items():
        if arr is not None and not np.all(np.isfinite(arr)):
            raise SolverDivergedError(f"non-finite values in {name} at iteration {k}")


def admm_solve(f, cfg: SolverConfig) -> SolveResult:
    """Run the proximal ADMM loop on a single-channel image.

    Starts from ``u = f``, ``v = 0``, ``Lambda = 0`` and stops once
    ``||u_new - u||_1 / ||u||_1 <= cfg.tol`` or after ``cfg.max_iter`` steps.
    Trace values, ``v`` and the multiplier are in the working units set by
    ``cfg.data_scale``; ``restored`` is in the caller's units.
    """
    f = as_image(f, allow_color=False)
    scale = cfg.data_scale
    if scale != 1.0:
        f = f * scale
    fid = cfg.fidelity
    spec = cfg.curvature
    use_curv = spec.weight_kind != "tv"
    mask = as_mask(cfg.mask, f.shape) if fid == "inpaint" else None
    if fid == "kl" and np.any(f < 0):
        raise ValueError("KL fidelity needs nonnegative data")

    u = f.copy()
    v = np.zeros((2,) + f.shape)
    lam_mult = np.zeros_like(v)
    w = None
    b2 = None
    if fid == "l1":
        w = np.zeros_like(f)
        b2 = np.zeros_like(f)
    elif fid in ("kl", "inpaint"):
        w = f.copy()
        b2 = np.zeros_like(f)

    def weights_of(img):
        if not use_curv:
            return np.ones_like(img), None
        kmap = curvature_map(img if scale == 1.0 else img / scale, spec)
        return weight_map(kmap, spec), kmap

    weights_prev, _ = weights_of(u)
    trace = IterationTrace()
    v_hist, k_hist = [], []
    converged = False
    k = 0
    for k in range(1, int(cfg.max_iter) + 1):
        t0 = time.perf_counter()
        if fid == "l2":
            u_new = update_u_l2(f, v, lam_mult, u, cfg)
        elif fid == "l1":
            u_new = update_u_split(f + w - b2, v, lam_mult, u, cfg)
        elif fid == "kl":
            u_new = update_u_split(w + b2, v, lam_mult, u, cfg)
        else:
            u_new = update_u_split(w - b2, v, lam_mult, u, cfg)
        _check_finite(k, u=u_new)

        weights, kmap = weights_of(u_new)
        grad_u = gradient_forward(u_new)
        v_new = update_v(u_new, v, lam_mult, weights, cfg, grad_u=grad_u)

        if fid == "l1":
            w = update_w_l1(f, u_new, b2, cfg)
            b2 = b2 + (u_new - f - w)
        elif fid == "kl":
            w = update_w_kl(f, u_new, b2, cfg)
            b2 = b2 + (w - u_new)
        elif fid == "inpaint":
            w = update_w_inpaint(f, u_new, b2, mask, cfg)
            b2 = b2 + (u_new - w)

        lam_new = update_multiplier(lam_mult, v_new, u_new, cfg.mu, grad_u=grad_u)
        _check_finite(k, v=v_new, multiplier=lam_new, w=w, b2=b2)

        e = float(np.sum(weights_prev * _grad_norm(grad_u=grad_u))) + _fidelity_energy(u_new, f, cfg, w)
        residual = float(np.abs(v_new - grad_u).sum())
        rel_u = rel_err_l1(u_new, u)
        rel_lam = rel_err_l1(lam_new, lam_mult)
        trace.append(e, residual, rel_u, rel_lam, 1e3 * (time.perf_counter() - t0))
        if cfg.track_delta_k:
            v_hist.append(v_new)
            k_hist.append(kmap if kmap is not None else np.zeros_like(f))

        weights_prev = weights
        u, v, lam_mult = u_new, v_new, lam_new
        converged = rel_u <= cfg.tol
        if converged:
            break

    if cfg.track_delta_k:
        trace.delta_k = delta_k_diagnostic(v_hist, k_hist, v_hist[-1], k_hist[-1], spec).tolist()
    logger.debug("admm_solve: %d iterations, converged=%s", k, converged)
    if scale != 1.0:
        u = u / scale
    return SolveResult(restored=u, trace=trace, iterations_used=k, converged=converged, v=v, multiplier=lam_mult)


def solve_color(f, cfg: SolverConfig, *, workers: int = 1) -> ColorSolveResult:
    """Restore each RGB channel independently with the same configuration."""
    f = as_image(f)
    if f.ndim != 3:
        raise ValueError(f"solve_color expects an (H, W, 3) image, got shape {f.shape}")
    channels = [np.ascontiguousarray(f[..., c]) for c in range(3)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda ch: admm_solve(ch, cfg), channels))
    else:
        results = [admm_solve(ch, cfg) for ch in channels]
    restored = np.stack([r.restored for r in results], axis=-1)
    return ColorSolveResult(restored=restored, channels=results)


def solve(f, cfg: SolverConfig, *, workers: int = 1):
    """Dispatch to :func:`admm_solve` or :func:`solve_color` by channel count."""
    f = as_image(f)
    if f.ndim == 3:
        return solve_color(f, cfg, workers=workers)
    return admm_solve(f, cfg)
