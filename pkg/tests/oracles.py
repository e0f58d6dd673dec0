"""Independent reference implementations used only by the tests.

These are written from the formulas, pixel by pixel with plain floats, and do
not share code with the package.
"""

import math

import numpy as np


def distances_direct(patch):
    (mm, um, mp), (jm, c, jp), (pm, up, pp) = [[float(x) for x in row] for row in patch]
    s = math.sqrt
    return [
        (2 * c - jm - jp) / s((2 * um - jm - jp) ** 2 + (jm - jp) ** 2 + 4),
        (jm + jp - 2 * c) / s((2 * up - jm - jp) ** 2 + (jp - jm) ** 2 + 4),
        (um + up - 2 * c) / s((up - um) ** 2 + (um + up - 2 * jm) ** 2 + 4),
        (2 * c - um - up) / s((um - up) ** 2 + (um + up - 2 * jp) ** 2 + 4),
        (mp + pm - 2 * c) / s((pm - mm) ** 2 + (mp - mm) ** 2 + 4),
        (2 * c - mp - pm) / s((mp - pp) ** 2 + (pm - pp) ** 2 + 4),
        (2 * c - mm - pp) / s((mp - pp) ** 2 + (mm - mp) ** 2 + 4),
        (mm + pp - 2 * c) / s((pm - mm) ** 2 + (pp - pm) ** 2 + 4),
    ]


def curvatures_direct(patch, h=1.0):
    (mm, um, mp), (jm, c, jp), (pm, up, pp) = [[float(x) for x in row] for row in patch]
    d = distances_direct(patch)
    arc = [um, up, jm, jp, mm, pp, mp, pm]
    out = []
    for l in range(8):
        step = h * h if l < 4 else 2 * h * h
        out.append(2 * d[l] / ((arc[l] - c) ** 2 + step))
    return out


def hk_direct(kappas):
    k1, k2 = max(kappas), min(kappas)
    return k1, k2, (k1 + k2) / 2, k1 * k2


def curvature_map_loop(u, kind="gaussian", scale=1.0 / 255.0):
    u = np.asarray(u, dtype=float) * scale
    H, W = u.shape
    out = np.empty((H, W))
    for i in range(H):
        for j in range(W):
            patch = [[u[min(max(i + di, 0), H - 1), min(max(j + dj, 0), W - 1)] for dj in (-1, 0, 1)] for di in (-1, 0, 1)]
            _, _, Hc, Kc = hk_direct(curvatures_direct(patch))
            out[i, j] = Hc if kind == "mean" else Kc
    return out


def tv_admm_dense(f, lam, mu, iters):
    """Plain isotropic TV-ADMM with explicit sparse difference matrices.

    min_u sum |Du| + lam/2 |u - f|^2, split v = Du, multiplier L.  The u-step
    is a direct sparse linear solve instead of an FFT.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    H, W = f.shape
    n = H * W

    def fwd(m):
        # periodic forward difference: row k holds -1 at k and +1 at k+1 mod m
        rows = np.repeat(np.arange(m), 2)
        cols = np.stack([np.arange(m), (np.arange(m) + 1) % m], axis=1).ravel()
        vals = np.tile([-1.0, 1.0], m)
        return sp.coo_matrix((vals, (rows, cols)), shape=(m, m)).tocsr()

    Dx = sp.kron(fwd(H), sp.eye(W))  # differences along rows
    Dy = sp.kron(sp.eye(H), fwd(W))  # differences along columns
    D = sp.vstack([Dx, Dy]).tocsc()
    A = (lam * sp.eye(n) + mu * (D.T @ D)).tocsc()
    solve = spla.factorized(A)
    fv = f.reshape(-1).astype(float)
    u = fv.copy()
    v = np.zeros(2 * n)
    L = np.zeros(2 * n)
    for _ in range(iters):
        u = solve(lam * fv + D.T @ (mu * v + L))
        du = D @ u
        a = du - L / mu
        ax, ay = a[:n], a[n:]
        nrm = np.sqrt(ax ** 2 + ay ** 2)
        fac = np.where(nrm > 0, np.maximum(nrm - 1.0 / mu, 0) / np.where(nrm > 0, nrm, 1), 0.0)
        v = np.concatenate([ax * fac, ay * fac])
        L = L + mu * (v - du)
    return u.reshape(H, W)
