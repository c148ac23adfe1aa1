"""numba jit kernels; see _numpy_impl for the algorithm-equivalent fallback."""

import numpy as np
from numba import njit

_MAX_SWEEPS = 40
_REL_OFF = 1e-13


@njit(cache=True)
def _jacobi_one(A, out):
    """Cyclic Jacobi on a copy of A; writes (lmin, lmax) into out.

    Returns False when the off-diagonal mass fails to shrink below
    tolerance within the sweep cap.
    """
    n = A.shape[0]
    M = A.copy()
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += M[i, j] * M[i, j]
    norm = np.sqrt(norm)
    thresh = _REL_OFF * norm if norm > 0.0 else _REL_OFF
    converged = False
    for _ in range(_MAX_SWEEPS):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * M[i, j] * M[i, j]
        if np.sqrt(off) <= thresh:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = M[p, q]
                if apq == 0.0:
                    continue
                theta = (M[q, q] - M[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    mp = M[p, k]
                    mq = M[q, k]
                    M[p, k] = c * mp - s * mq
                    M[q, k] = s * mp + c * mq
                for k in range(n):
                    mp = M[k, p]
                    mq = M[k, q]
                    M[k, p] = c * mp - s * mq
                    M[k, q] = s * mp + c * mq
    if not converged:
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * M[i, j] * M[i, j]
        if np.sqrt(off) > thresh:
            return False
    lo = M[0, 0]
    hi = M[0, 0]
    for i in range(1, n):
        if M[i, i] < lo:
            lo = M[i, i]
        if M[i, i] > hi:
            hi = M[i, i]
    out[0] = lo
    out[1] = hi
    return True


@njit(cache=True)
def _batch_eigen_extremes(mats):
    B = mats.shape[0]
    out = np.empty((B, 2))
    ok = True
    for b in range(B):
        if not _jacobi_one(mats[b], out[b]):
            ok = False
    return out, ok


def batch_eigen_extremes(mats):
    mats = np.ascontiguousarray(mats, dtype=np.float64)
    if np.isnan(mats).any():
        raise ValueError("NaN entries in eigenvalue input")
    out, ok = _batch_eigen_extremes(mats)
    if not ok:
        from ..errors import JacobiNonConvergence
        raise JacobiNonConvergence("jacobi sweep cap hit")
    return out


@njit(cache=True)
def _is_pd_one(A, tol):
    """LDL^T with symmetric diagonal pivoting; PD iff every pivot clears tol."""
    n = A.shape[0]
    M = A.copy()
    scale = 1.0
    for i in range(n):
        for j in range(n):
            a = abs(M[i, j])
            if a > scale:
                scale = a
    thresh = tol * scale
    for k in range(n):
        p = k
        best = M[k, k]
        for i in range(k + 1, n):
            if M[i, i] > best:
                best = M[i, i]
                p = i
        if p != k:
            for j in range(n):
                tmp = M[k, j]
                M[k, j] = M[p, j]
                M[p, j] = tmp
            for i in range(n):
                tmp = M[i, k]
                M[i, k] = M[i, p]
                M[i, p] = tmp
        piv = M[k, k]
        if not piv > thresh:
            return False
        for i in range(k + 1, n):
            f = M[i, k] / piv
            for j in range(k + 1, n):
                M[i, j] -= f * M[k, j]
    return True


@njit(cache=True)
def _batch_is_pd(mats, tol):
    B = mats.shape[0]
    out = np.empty(B, dtype=np.bool_)
    for b in range(B):
        out[b] = _is_pd_one(mats[b], tol)
    return out


def batch_is_pd(mats, tol):
    mats = np.ascontiguousarray(mats, dtype=np.float64)
    if np.isnan(mats).any():
        raise ValueError("NaN entries in definiteness input")
    return _batch_is_pd(mats, float(tol))


@njit(cache=True)
def _pencil_pd_mask(F, G, rs, tol):
    R = rs.shape[0]
    n = F.shape[0]
    out = np.empty(R, dtype=np.bool_)
    M = np.empty((n, n))
    for idx in range(R):
        r = rs[idx]
        for i in range(n):
            for j in range(n):
                M[i, j] = F[i, j] - r * G[i, j]
        out[idx] = _is_pd_one(M, tol)
    return out


def pencil_pd_mask(F, G, rs, tol=1e-9):
    F = np.ascontiguousarray(F, dtype=np.float64)
    G = np.ascontiguousarray(G, dtype=np.float64)
    rs = np.ascontiguousarray(rs, dtype=np.float64)
    return _pencil_pd_mask(F, G, rs, float(tol))
