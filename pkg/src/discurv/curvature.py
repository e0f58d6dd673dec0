"""Discrete normal, mean and Gaussian curvature of the image surface z = u(i, j).

Each pixel is compared with eight triangular tangent planes spanned by its
3x3 neighbourhood.  The signed distance of the centre to plane ``l`` gives a
normal curvature ``kappa_l = 2 d_l / arclength**2``; the largest and smallest
of the eight are taken as principal curvatures.

Neighbour naming used throughout (``i`` = row, ``j`` = column)::

    mm = u[i-1, j-1]   um = u[i-1, j]   mp = u[i-1, j+1]
    jm = u[i,   j-1]   c  = u[i,   j]   jp = u[i,   j+1]
    pm = u[i+1, j-1]   up = u[i+1, j]   pp = u[i+1, j+1]

The neighbour defining the arc of plane ``l`` is, for l = 1..8:
``um, up, jm, jp, mm, pp, mp, pm``.  Planes 1-4 are axial (arc step ``h``),
planes 5-8 diagonal (arc step ``sqrt(2) h``).

The stencil is not scale invariant (the "+4" under each root fixes an
absolute intensity unit), so :func:`curvature_map` first multiplies the image
by ``CurvatureSpec.intensity_scale`` (folded into the
formulas after differencing).  The default ``1/255`` measures the
surface of the unit-range image, which is the scale the usual alpha values
(0.1-0.5 for mean, 5-20 for Gaussian curvature) are meant for.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagecore import as_image

__all__ = [
    "CurvatureSpec",
    "CURVATURE_KINDS",
    "WEIGHT_KINDS",
    "tangent_plane_distances",
    "normal_curvatures",
    "principal_and_hk",
    "curvature_map",
    "weight_map",
    "weights_for",
]

CURVATURE_KINDS = ("mean", "gaussian")
WEIGHT_KINDS = ("tac", "tsc", "trv", "tv")

_ALIASES = {"mc": "mean", "gc": "gaussian", "h": "mean", "k": "gaussian"}


@dataclass(frozen=True)
class CurvatureSpec:
    """Which curvature to estimate and how to turn it into TV weights.

    ``weight_kind`` is one of ``tac`` (1 + alpha|k|), ``tsc`` (1 + alpha k^2),
    ``trv`` (sqrt(1 + alpha k^2)) or ``tv`` (constant 1, alpha ignored).
    ``intensity_scale`` converts image intensities to the units the stencil
    sees; use 1.0 to measure the raw 0-255 surface.
    """

    curvature_kind: str = "gaussian"
    weight_kind: str = "tac"
    alpha: float = 5.0
    h: float = 1.0
    intensity_scale: float = 1.0 / 255.0

    def __post_init__(self):
        kind = _ALIASES.get(self.curvature_kind.lower(), self.curvature_kind.lower())
        object.__setattr__(self, "curvature_kind", kind)
        object.__setattr__(self, "weight_kind", self.weight_kind.lower())
        if kind not in CURVATURE_KINDS:
            raise ValueError(f"curvature_kind must be one of {CURVATURE_KINDS}, got {self.curvature_kind!r}")
        if self.weight_kind not in WEIGHT_KINDS:
            raise ValueError(f"weight_kind must be one of {WEIGHT_KINDS}, got {self.weight_kind!r}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not self.h > 0:
            raise ValueError(f"step h must be positive, got {self.h}")
        if not self.intensity_scale > 0:
            raise ValueError(f"intensity_scale must be positive, got {self.intensity_scale}")

    @property
    def effective_alpha(self) -> float:
        return 0.0 if self.weight_kind == "tv" else float(self.alpha)


# -- vectorised kernels on the nine neighbour arrays ------------------------


def _distances(c, um, up, jm, jp, mm, pp, mp, pm, s=1.0):
    """Eight signed tangent-plane distances, stacked on a new leading axis.

    ``s`` rescales intensities.  It is applied after the differences are
    taken, so second differences of integer images cancel exactly.
    """
    s2 = s * s
    out = np.empty((8,) + np.shape(c))
    out[0] = s * (2 * c - jm - jp) / np.sqrt(s2 * ((2 * um - jm - jp) ** 2 + (jm - jp) ** 2) + 4)
    out[1] = s * (jm + jp - 2 * c) / np.sqrt(s2 * ((2 * up - jm - jp) ** 2 + (jp - jm) ** 2) + 4)
    out[2] = s * (um + up - 2 * c) / np.sqrt(s2 * ((up - um) ** 2 + (um + up - 2 * jm) ** 2) + 4)
    out[3] = s * (2 * c - um - up) / np.sqrt(s2 * ((um - up) ** 2 + (um + up - 2 * jp) ** 2) + 4)
    out[4] = s * (mp + pm - 2 * c) / np.sqrt(s2 * ((pm - mm) ** 2 + (mp - mm) ** 2) + 4)
    out[5] = s * (2 * c - mp - pm) / np.sqrt(s2 * ((mp - pp) ** 2 + (pm - pp) ** 2) + 4)
    out[6] = s * (2 * c - mm - pp) / np.sqrt(s2 * ((mp - pp) ** 2 + (mm - mp) ** 2) + 4)
    out[7] = s * (mm + pp - 2 * c) / np.sqrt(s2 * ((pm - mm) ** 2 + (pp - pm) ** 2) + 4)
    return out


def _curvatures(d, c, arc_neighbours, h, s=1.0):
    h2 = h * h
    kappa = np.empty_like(d)
    for l, ul in enumerate(arc_neighbours):
        step = h2 if l < 4 else 2.0 * h2
        kappa[l] = 2.0 * d[l] / (s * s * (ul - c) ** 2 + step)
    return kappa


def _split_patch(patch):
    p = np.asarray(patch, dtype=np.float64)
    if p.shape[-2:] != (3, 3):
        raise ValueError(f"patch must be 3x3, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("patch contains non-finite values")
    return dict(
        c=p[..., 1, 1], um=p[..., 0, 1], up=p[..., 2, 1], jm=p[..., 1, 0], jp=p[..., 1, 2],
        mm=p[..., 0, 0], pp=p[..., 2, 2], mp=p[..., 0, 2], pm=p[..., 2, 0],
    )


def _arc(n):
    return (n["um"], n["up"], n["jm"], n["jp"], n["mm"], n["pp"], n["mp"], n["pm"])


def tangent_plane_distances(patch) -> np.ndarray:
    """Distances ``(d_1, ..., d_8)`` of the patch centre to its tangent planes.

    ``patch`` is a 3x3 array (or a stack ``(..., 3, 3)``); the result has the
    plane index on the last axis.
    """
    n = _split_patch(patch)
    return np.moveaxis(_distances(**n), 0, -1)


def normal_curvatures(patch, h: float = 1.0) -> np.ndarray:
    """Eight normal curvatures of the patch centre, plane index on the last axis."""
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    n = _split_patch(patch)
    d = _distances(**n)
    return np.moveaxis(_curvatures(d, n["c"], _arc(n), h), 0, -1)


def principal_and_hk(kappas):
    """Return ``(k_max, k_min, H, K)`` from the eight normal curvatures.

    Works on a single length-8 vector or any stack with the plane index last.
    """
    k = np.asarray(kappas, dtype=np.float64)
    if k.shape[-1] != 8:
        raise ValueError(f"expected 8 normal curvatures on the last axis, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise ValueError("normal curvatures contain non-finite values")
    k1 = k.max(axis=-1)
    k2 = k.min(axis=-1)
    H = 0.5 * (k1 + k2)
    K = k1 * k2
    if k.ndim == 1:
        return float(k1), float(k2), float(H), float(K)
    return k1, k2, H, K


def curvature_map(u, spec: CurvatureSpec = CurvatureSpec()) -> np.ndarray:
    """Per-pixel mean or Gaussian curvature of a single-channel image.

    Borders use replicate padding, so constant images are flat everywhere.
    """
    u = as_image(u, allow_color=False)
    sc = float(spec.intensity_scale)
    padded = np.pad(u, 1, mode="edge")
    H, W = u.shape

    def at(di, dj):
        return padded[1 + di:1 + di + H, 1 + dj:1 + dj + W]

    c = at(0, 0)
    nb = dict(
        c=c, um=at(-1, 0), up=at(1, 0), jm=at(0, -1), jp=at(0, 1),
        mm=at(-1, -1), pp=at(1, 1), mp=at(-1, 1), pm=at(1, -1),
    )
    d = _distances(**nb, s=sc)
    kappa = _curvatures(d, c, _arc(nb), spec.h, sc)
    k1 = kappa.max(axis=0)
    k2 = kappa.min(axis=0)
    if spec.curvature_kind == "mean":
        return 0.5 * (k1 + k2)
    return k1 * k2


def weight_map(kmap, spec: CurvatureSpec = CurvatureSpec()) -> np.ndarray:
    """Turn a curvature map into TV weights; every weight is >= 1."""
    k = np.asarray(kmap, dtype=np.float64)
    if not np.all(np.isfinite(k)):
        raise ValueError("curvature map contains non-finite values")
    a = spec.effective_alpha
    kind = spec.weight_kind
    if kind == "tv" or a == 0.0:
        return np.ones_like(k)
    if kind == "tac":
        return 1.0 + a * np.abs(k)
    if kind == "tsc":
        return 1.0 + a * k * k
    return np.sqrt(1.0 + a * k * k)


def weights_for(u, spec: CurvatureSpec) -> np.ndarray:
    """Shortcut for ``weight_map(curvature_map(u, spec), spec)``; skips the stencil for plain TV."""
    if spec.weight_kind == "tv":
        return np.ones(np.shape(u))
    return weight_map(curvature_map(u, spec), spec)
