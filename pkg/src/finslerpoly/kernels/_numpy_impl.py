"""Pure-numpy kernel fallback, vectorized across the batch axis.

Same algorithms as the numba backend: cyclic Jacobi sweeps for extreme
eigenvalues, LDL^T with symmetric diagonal pivoting for definiteness.
"""

import numpy as np


_MAX_SWEEPS = 40
_REL_OFF = 1e-13


def _offdiag_norm(A):
    n = A.shape[1]
    total = np.zeros(A.shape[0])
    for i in range(n):
        for j in range(i + 1, n):
            total += A[:, i, j] ** 2
    return np.sqrt(2.0 * total)


def batch_eigen_extremes(mats):
    A = np.array(mats, dtype=np.float64)
    if np.isnan(A).any():
        raise ValueError("NaN entries in eigenvalue input")
    B, n, _ = A.shape
    if n == 1:
        d = A[:, 0, 0]
        return np.stack([d, d], axis=1)
    norms = np.sqrt((A ** 2).sum(axis=(1, 2)))
    thresh = np.where(norms > 0, _REL_OFF * norms, _REL_OFF)
    converged = False
    for _ in range(_MAX_SWEEPS):
        if (_offdiag_norm(A) <= thresh).all():
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[:, p, q]
                act = apq != 0.0
                if not act.any():
                    continue
                theta = np.zeros(B)
                theta[act] = (A[act, q, q] - A[act, p, p]) / (2.0 * apq[act])
                t = np.zeros(B)
                pos = act & (theta >= 0.0)
                neg = act & (theta < 0.0)
                t[pos] = 1.0 / (theta[pos] + np.sqrt(1.0 + theta[pos] ** 2))
                t[neg] = -1.0 / (-theta[neg] + np.sqrt(1.0 + theta[neg] ** 2))
                c = 1.0 / np.sqrt(1.0 + t ** 2)
                s = t * c
                rp = A[:, p, :].copy()
                rq = A[:, q, :].copy()
                A[:, p, :] = c[:, None] * rp - s[:, None] * rq
                A[:, q, :] = s[:, None] * rp + c[:, None] * rq
                cp = A[:, :, p].copy()
                cq = A[:, :, q].copy()
                A[:, :, p] = c[:, None] * cp - s[:, None] * cq
                A[:, :, q] = s[:, None] * cp + c[:, None] * cq
    if not converged and not (_offdiag_norm(A) <= thresh).all():
        from ..errors import JacobiNonConvergence
        raise JacobiNonConvergence("jacobi sweep cap hit")
    diag = A[:, np.arange(n), np.arange(n)]
    return np.stack([diag.min(axis=1), diag.max(axis=1)], axis=1)


def batch_is_pd(mats, tol):
    M = np.array(mats, dtype=np.float64)
    if np.isnan(M).any():
        raise ValueError("NaN entries in definiteness input")
    B, n, _ = M.shape
    thresh = float(tol) * np.maximum(1.0, np.abs(M).reshape(B, -1).max(axis=1))
    ok = np.ones(B, dtype=bool)
    rows = np.arange(B)
    for k in range(n):
        diag = M[:, np.arange(k, n), np.arange(k, n)]
        p = k + np.argmax(diag, axis=1)
        swap = p != k
        if swap.any():
            bi = rows[swap]
            pk = p[swap]
            tmp = M[bi, k, :].copy()
            M[bi, k, :] = M[bi, pk, :]
            M[bi, pk, :] = tmp
            tmp = M[bi, :, k].copy()
            M[bi, :, k] = M[bi, :, pk]
            M[bi, :, pk] = tmp
        piv = M[:, k, k]
        ok &= piv > thresh
        if k + 1 < n:
            safe = np.where(np.abs(piv) > 0, piv, 1.0)
            f = M[:, k + 1:, k] / safe[:, None]
            M[:, k + 1:, k + 1:] -= f[:, :, None] * M[:, k, k + 1:][:, None, :]
    return ok


def pencil_pd_mask(F, G, rs, tol=1e-9, chunk=65536):
    F = np.asarray(F, dtype=np.float64)
    G = np.asarray(G, dtype=np.float64)
    rs = np.asarray(rs, dtype=np.float64)
    out = np.empty(rs.shape[0], dtype=bool)
    for start in range(0, rs.shape[0], chunk):
        sl = slice(start, min(start + chunk, rs.shape[0]))
        batch = F[None, :, :] - rs[sl, None, None] * G[None, :, :]
        out[sl] = batch_is_pd(batch, tol)
    return out
