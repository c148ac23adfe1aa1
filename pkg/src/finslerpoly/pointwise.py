"""Constant-matrix linear algebra for section analysis.

Definiteness tests, extreme eigenvalues, the section interval
M_a = {r : F(a) - r G(a) is positive definite} at a single point, the
pointwise section hypothesis in both its zero-set and nonnegative-set
forms, and the several-constraint trace condition with its cone /
separating-matrix witnesses.

Intervals over the extended reals are plain floats with +-inf; an
open interval (lo, hi) is empty exactly when the ``empty`` flag says
so.  Exact rational inputs (nested Fraction lists) route the pencil
determinant through exact cofactor expansion so the root count in r is
never a rounding artifact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch

DEFAULT_TOL = 1e-9

INF = math.inf


# -- basic definiteness -----------------------------------------------------


def is_positive_definite(A, tol: float = DEFAULT_TOL) -> bool:
    """Pivot test: LDL^T with symmetric diagonal pivoting.

    True iff every pivot exceeds tol * max(1, max|A_ij|), which agrees
    with an eigenvalue threshold of the same scale for symmetric input.
    """
    M = np.asarray(A, dtype=np.float64)
    if np.isnan(M).any():
        raise ValueError("NaN entries")
    return bool(kernels.batch_is_pd(M[None, :, :], tol)[0])


def is_positive_definite_exact(rows: Sequence[Sequence[Fraction]]) -> bool:
    """Exact rational LDL^T pivot test, no tolerance."""
    M = [[Fraction(v) for v in r] for r in rows]
    n = len(M)
    for k in range(n):
        p = max(range(k, n), key=lambda i: M[i][i])
        if p != k:
            M[k], M[p] = M[p], M[k]
            for row in M:
                row[k], row[p] = row[p], row[k]
        piv = M[k][k]
        if piv <= 0:
            return False
        for i in range(k + 1, n):
            f = M[i][k] / piv
            for j in range(k + 1, n):
                M[i][j] -= f * M[k][j]
    return True


def eigen_range(A) -> tuple:
    """(lambda_min, lambda_max) via cyclic Jacobi iteration."""
    M = np.asarray(A, dtype=np.float64)
    res = kernels.batch_eigen_extremes(M[None, :, :])[0]
    return float(res[0]), float(res[1])


def eigen_range_batch(mats: np.ndarray) -> np.ndarray:
    """(B, n, n) -> (B, 2) extreme eigenvalues."""
    return kernels.batch_eigen_extremes(np.asarray(mats, dtype=np.float64))


# -- the section interval ---------------------------------------------------


@dataclass(frozen=True)
class SectionInterval:
    """Open interval of r with F - r G positive definite."""

    empty: bool
    lo: float = INF
    hi: float = -INF
    low_confidence: bool = False

    def contains(self, r: float) -> bool:
        return (not self.empty) and self.lo < r < self.hi

    def intersect_positive(self) -> "SectionInterval":
        """Intersection with (0, +inf), for the nonnegative-set form."""
        if self.empty or self.hi <= 0:
            return SectionInterval(True, low_confidence=self.low_confidence)
        return SectionInterval(False, max(self.lo, 0.0), self.hi,
                               self.low_confidence)

    def midpoint_sample(self) -> float:
        """A representative interior point (finite)."""
        if self.empty:
            raise ValueError("empty interval has no sample")
        lo, hi = self.lo, self.hi
        if lo == -INF and hi == INF:
            return 0.0
        if lo == -INF:
            return hi - 1.0
        if hi == INF:
            return lo + 1.0
        return 0.5 * (lo + hi)


def _det_coeffs_in_r_exact(F_rows, G_rows) -> list:
    """Ascending Fraction coefficients of det(F - r G) via cofactor expansion.

    Entries are univariate linear polynomials in r represented as
    coefficient lists; exactness keeps the degree (root count) honest.
    """
    n = len(F_rows)

    def umul(a, b):
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    if cb:
                        out[i + j] += ca * cb
        return out

    def uadd(a, b):
        m = max(len(a), len(b))
        return [ (a[i] if i < len(a) else Fraction(0))
                 + (b[i] if i < len(b) else Fraction(0)) for i in range(m) ]

    def det(rows):
        m = len(rows)
        if m == 1:
            return rows[0][0]
        total = [Fraction(0)]
        for j in range(m):
            piv = rows[0][j]
            if all(c == 0 for c in piv):
                continue
            minor = [[rows[i][k] for k in range(m) if k != j]
                     for i in range(1, m)]
            term = umul(piv, det(minor))
            if j % 2:
                term = [-c for c in term]
            total = uadd(total, term)
        return total

    entries = [[[Fraction(F_rows[i][j]), -Fraction(G_rows[i][j])]
                for j in range(n)] for i in range(n)]
    coeffs = det(entries)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _det_coeffs_in_r_float(Fa: np.ndarray, Ga: np.ndarray) -> np.ndarray:
    """Ascending float coefficients via determinant interpolation at n+1 nodes."""
    n = Fa.shape[0]
    nodes = np.arange(n + 1, dtype=np.float64) - n / 2.0
    dets = np.linalg.det(Fa[None, :, :] - nodes[:, None, None] * Ga[None, :, :])
    V = np.vander(nodes, n + 1, increasing=True)
    coeffs = np.linalg.solve(V, dets)
    return _clean_coeff_noise(coeffs, dets)


def _clean_coeff_noise(coeffs, dets):
    """Zero coefficients below the interpolation noise floor.

    Determinant values carry relative rounding of order eps; after the
    small Vandermonde solve a coefficient smaller than ~64 eps times the
    determinant scale is indistinguishable from zero, and treating it as
    such keeps multiple roots exactly multiple.
    """
    floor = 64.0 * np.finfo(np.float64).eps * max(
        1e-300, float(np.abs(dets).max()))
    return np.where(np.abs(coeffs) <= floor, 0.0, coeffs)


def _real_roots(asc_coeffs: np.ndarray, tol: float):
    """Sorted real roots of an ascending-coefficient polynomial.

    Returns (roots, degenerate) where degenerate means the polynomial is
    numerically identically zero.
    """
    c = np.asarray(asc_coeffs, dtype=np.float64)
    top = np.max(np.abs(c)) if c.size else 0.0
    if top == 0.0:
        return np.empty(0), True
    keep = c / top
    deg = len(keep) - 1
    while deg > 0 and abs(keep[deg]) <= 1e-13:
        deg -= 1
    if deg == 0:
        return np.empty(0), False
    roots = np.roots(keep[deg::-1])
    # multiple real roots split into conjugate pairs with imaginary parts
    # of order sqrt(eps); keep both twins, the midpoint tests absorb them
    real = roots[np.abs(roots.imag) <= 1e-6 * (1.0 + np.abs(roots.real))].real
    real = _newton_polish(keep[:deg + 1], real)
    return np.sort(real), False


def _newton_polish(asc_coeffs, roots, steps: int = 16):
    """A few Newton steps per root; doubles converge linearly but far
    enough to recover companion-matrix accuracy losses."""
    if roots.size == 0:
        return roots
    c = np.asarray(asc_coeffs, dtype=np.float64)
    dc = c[1:] * np.arange(1, len(c))
    out = roots.copy()
    for i, r in enumerate(out):
        best = r
        pv_best = abs(np.polyval(c[::-1], r))
        cur = r
        for _ in range(steps):
            pv = np.polyval(c[::-1], cur)
            dv = np.polyval(dc[::-1], cur)
            if dv == 0.0:
                break
            step = pv / dv
            cur = cur - step
            apv = abs(np.polyval(c[::-1], cur))
            if apv < pv_best:
                pv_best, best = apv, cur
            if abs(step) <= 1e-15 * (1.0 + abs(cur)):
                break
        out[i] = best
    return out


def finsler_interval(Fa, Ga, tol: float = DEFAULT_TOL) -> SectionInterval:
    """Section M_a as an open (possibly empty / unbounded) interval.

    Method: expand det(Fa - r Ga) in r (exact cofactor expansion for
    rational input, determinant interpolation for floats), take the
    companion-matrix real roots, test definiteness at midpoints between
    consecutive roots and beyond the extreme roots, and assemble the
    single open run of positive-definite test points.  Root clusters
    tighter than tol are flagged low-confidence, as is an identically
    vanishing determinant (an everywhere-singular pencil is never
    positive definite, so the section is empty).
    """
    exact = (not isinstance(Fa, np.ndarray)) and _looks_exact(Fa)
    if exact and _looks_exact(Ga):
        coeffs = [float(c) for c in _det_coeffs_in_r_exact(Fa, Ga)]
        Fm = np.array([[float(v) for v in r] for r in Fa])
        Gm = np.array([[float(v) for v in r] for r in Ga])
    else:
        Fm = np.asarray(Fa, dtype=np.float64)
        Gm = np.asarray(Ga, dtype=np.float64)
        if Fm.shape != Gm.shape or Fm.ndim != 2 or Fm.shape[0] != Fm.shape[1]:
            raise DimensionMismatch("matrices must be square and same shape")
        coeffs = _det_coeffs_in_r_float(Fm, Gm)
    roots, degenerate = _real_roots(np.asarray(coeffs), tol)
    if degenerate:
        return SectionInterval(True, low_confidence=True)

    low_conf = False
    if roots.size >= 2:
        gaps = np.diff(roots)
        if (gaps < tol * np.maximum(1.0, np.abs(roots[1:]))).any():
            low_conf = True

    if roots.size == 0:
        pd = is_positive_definite(Fm, tol)
        if pd:
            return SectionInterval(False, -INF, INF, low_conf)
        return SectionInterval(True, low_confidence=low_conf)

    span = 1.0 + (roots[-1] - roots[0])
    cands = np.empty(roots.size + 1)
    cands[0] = roots[0] - span
    cands[-1] = roots[-1] + span
    if roots.size > 1:
        cands[1:-1] = 0.5 * (roots[:-1] + roots[1:])
    mask = kernels.batch_is_pd(
        Fm[None, :, :] - cands[:, None, None] * Gm[None, :, :], tol)

    if not mask.any():
        return SectionInterval(True, low_confidence=low_conf)

    runs = _contiguous_runs(mask)
    if len(runs) > 1:
        low_conf = True
        runs.sort(key=lambda se: se[1] - se[0])
    start, end = runs[-1]
    lo = -INF if start == 0 else float(roots[start - 1])
    hi = INF if end == len(cands) else float(roots[end - 1])
    return SectionInterval(False, lo, hi, low_conf)


def _looks_exact(rows) -> bool:
    try:
        return all(isinstance(v, (int, Fraction)) for r in rows for v in r)
    except TypeError:
        return False


def _contiguous_runs(mask) -> list:
    runs = []
    start = None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(mask)))
    return runs


def finsler_interval_batch(Fs: np.ndarray, Gs: np.ndarray,
                           tol: float = DEFAULT_TOL):
    """Vectorized sections for (P, n, n) pencil pairs.

    Returns (empty, lo, hi, low_conf) arrays.  Determinant coefficients
    come from one batched interpolation; the per-point root isolation
    and midpoint testing loop is python but cheap at desk scale.
    """
    Fs = np.asarray(Fs, dtype=np.float64)
    Gs = np.asarray(Gs, dtype=np.float64)
    P, n, _ = Fs.shape
    nodes = np.arange(n + 1, dtype=np.float64) - n / 2.0
    dets = np.linalg.det(
        Fs[:, None, :, :] - nodes[None, :, None, None] * Gs[:, None, :, :])
    V = np.vander(nodes, n + 1, increasing=True)
    coeffs = np.linalg.solve(V, dets.T).T  # (P, n+1) ascending
    floor = 64.0 * np.finfo(np.float64).eps * np.maximum(
        np.abs(dets).max(axis=1), 1e-300)
    coeffs = np.where(np.abs(coeffs) <= floor[:, None], 0.0, coeffs)

    empty = np.zeros(P, dtype=bool)
    lo = np.full(P, -INF)
    hi = np.full(P, INF)
    lowc = np.zeros(P, dtype=bool)
    for p in range(P):
        iv = _assemble_from_coeffs(Fs[p], Gs[p], coeffs[p], tol)
        empty[p] = iv.empty
        lo[p] = iv.lo if not iv.empty else math.nan
        hi[p] = iv.hi if not iv.empty else math.nan
        lowc[p] = iv.low_confidence
    return empty, lo, hi, lowc


def _assemble_from_coeffs(Fm, Gm, coeffs, tol) -> SectionInterval:
    roots, degenerate = _real_roots(coeffs, tol)
    if degenerate:
        return SectionInterval(True, low_confidence=True)
    low_conf = False
    if roots.size >= 2:
        gaps = np.diff(roots)
        if (gaps < tol * np.maximum(1.0, np.abs(roots[1:]))).any():
            low_conf = True
    if roots.size == 0:
        if is_positive_definite(Fm, tol):
            return SectionInterval(False, -INF, INF, low_conf)
        return SectionInterval(True, low_confidence=low_conf)
    span = 1.0 + (roots[-1] - roots[0])
    cands = np.empty(roots.size + 1)
    cands[0] = roots[0] - span
    cands[-1] = roots[-1] + span
    if roots.size > 1:
        cands[1:-1] = 0.5 * (roots[:-1] + roots[1:])
    mask = kernels.batch_is_pd(
        Fm[None, :, :] - cands[:, None, None] * Gm[None, :, :], tol)
    if not mask.any():
        return SectionInterval(True, low_confidence=low_conf)
    runs = _contiguous_runs(mask)
    if len(runs) > 1:
        low_conf = True
        runs.sort(key=lambda se: se[1] - se[0])
    start, end = runs[-1]
    return SectionInterval(
        False,
        -INF if start == 0 else float(roots[start - 1]),
        INF if end == len(cands) else float(roots[end - 1]),
        low_conf,
    )


# -- pointwise hypothesis checks ---------------------------------------------


def sphere_samples(n: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic unit vectors: uniform angles for n=2, seeded gaussians above."""
    if n == 2:
        theta = np.linspace(0.0, math.pi, count, endpoint=False)
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((count, n))
    norms = np.linalg.norm(V, axis=1)
    norms[norms == 0] = 1.0
    return V / norms[:, None]


def check_finsler_hypothesis(Fa, Ga, mode: str = "zero_set",
                             sphere_samples_count: int = 0,
                             tol: float = DEFAULT_TOL,
                             seed: int = 0) -> bool:
    """Pointwise section hypothesis at one point.

    mode 'zero_set': v^T G v = 0 (v != 0) forces v^T F v > 0, decided
    exactly as "section interval nonempty".  mode 'nonneg_set':
    v^T G v >= 0 forces v^T F v > 0, decided as "interval meets (0, inf)".
    When sphere_samples_count > 0 a rejection-sampling sweep
    cross-validates; sampling can only confirm a violation, never decide
    the positive answer, and a strong sampled contradiction raises.
    """
    iv = finsler_interval(Fa, Ga, tol)
    if mode == "zero_set":
        decision = not iv.empty
    elif mode == "nonneg_set":
        decision = not iv.intersect_positive().empty
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if sphere_samples_count > 0:
        violated = sphere_violation(Fa, Ga, mode, sphere_samples_count,
                                    tol=tol, seed=seed)
        if violated and decision:
            raise ArithmeticError(
                "sampled violation contradicts interval decision")
    return decision


def sphere_violation(Fa, Ga, mode: str, count: int,
                     tol: float = DEFAULT_TOL, seed: int = 0) -> bool:
    """True when sampling finds v clearly violating the hypothesis."""
    Fm = np.asarray(Fa, dtype=np.float64)
    Gm = np.asarray(Ga, dtype=np.float64)
    V = sphere_samples(Fm.shape[0], count, seed)
    gq = np.einsum("si,ij,sj->s", V, Gm, V)
    fq = np.einsum("si,ij,sj->s", V, Fm, V)
    margin = 10.0 * tol * max(1.0, float(np.abs(Fm).max()))
    if mode == "zero_set":
        band = 10.0 * tol * max(1.0, float(np.abs(Gm).max()))
        near = np.abs(gq) <= band
        return bool((fq[near] < -margin).any())
    feas = gq >= 0.0
    return bool((fq[feas] < -margin).any())


# -- several constraints: trace condition ------------------------------------


@dataclass
class SearchBudget:
    sphere_count: int = 200_000
    b_starts: int = 40
    nm_maxiter: int = 400
    r_grid: tuple = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
    tol: float = DEFAULT_TOL
    seed: int = 0


@dataclass
class TraceCheckResult:
    """Outcome of the several-constraint check at one point.

    ``hypothesis_holds`` is the vector condition (each feasible
    direction sees a positive form value); ``strong_hypothesis_holds``
    is the trace condition over nonzero PSD matrices, equivalent to the
    existence of nonnegative cone coefficients.  ``None`` means the
    bounded search was inconclusive.
    """

    hypothesis_holds: bool
    strong_hypothesis_holds: Optional[bool]
    cone_coeffs: Optional[list] = None
    separating_B: Optional[np.ndarray] = None
    status: str = "decided"
    min_feasible_form: float = math.nan


def multi_constraint_trace_check(Fa, Gas: Sequence, budget: SearchBudget | None = None
                                 ) -> TraceCheckResult:
    """Check conditions (vector and trace form) for several constraints.

    The vector hypothesis is decided by a fine deterministic sphere
    sweep.  The trace hypothesis is decided by searching both sides:
    nonnegative cone coefficients r with F - sum r_i G_i positive
    definite (grid plus local descent), or a separating nonzero PSD B
    with tr(G_i B) >= 0 for all i and tr(F B) <= 0 (low-rank seeded
    starts, local descent, then an exact rational snap).  When neither
    witness is found within budget the strong flag is None with status
    'inconclusive'.
    """
    from scipy.optimize import minimize

    budget = budget or SearchBudget()
    tol = budget.tol
    F = np.asarray(Fa, dtype=np.float64)
    Gs = [np.asarray(G, dtype=np.float64) for G in Gas]
    n = F.shape[0]
    m = len(Gs)

    # vector hypothesis by sphere sweep
    V = sphere_samples(n, budget.sphere_count, budget.seed)
    fq = np.einsum("si,ij,sj->s", V, F, V)
    feas = np.ones(len(V), dtype=bool)
    for G in Gs:
        feas &= np.einsum("si,ij,sj->s", V, G, V) >= 0.0
    if feas.any():
        min_form = float(fq[feas].min())
        hypothesis = min_form > tol * max(1.0, float(np.abs(F).max()))
    else:
        min_form = math.nan
        hypothesis = True

    # cone side: maximize lambda_min(F - sum r_i G_i) over r >= 0
    def neg_lmin(y):
        r = y * y
        M = F.copy()
        for ri, G in zip(r, Gs):
            M = M - ri * G
        return -float(np.linalg.eigvalsh(M)[0])

    best_r, best_val = None, -INF
    import itertools
    grid_axes = [budget.r_grid] * m
    for combo in itertools.product(*grid_axes):
        val = -neg_lmin(np.sqrt(np.asarray(combo)))
        if val > best_val:
            best_val, best_r = val, np.asarray(combo, dtype=float)
    res = minimize(neg_lmin, np.sqrt(best_r), method="Nelder-Mead",
                   options={"maxiter": budget.nm_maxiter, "xatol": 1e-10,
                            "fatol": 1e-12})
    if -res.fun > best_val:
        best_val, best_r = -res.fun, res.x * res.x
    cone = None
    if best_val > tol * max(1.0, float(np.abs(F).max())):
        cone = [float(max(ri, 0.0)) for ri in best_r]

    # separation side: find nonzero PSD B with tr(G_i B) >= 0, tr(F B) <= 0
    sep = None
    if cone is None:
        sep = _search_separating_B(F, Gs, budget)

    if cone is not None:
        strong: Optional[bool] = True
        status = "decided"
    elif sep is not None:
        strong = False
        status = "decided"
    else:
        strong = None
        status = "inconclusive"
    return TraceCheckResult(hypothesis, strong, cone, sep, status, min_form)


def _search_separating_B(F, Gs, budget: SearchBudget):
    """Numeric search then exact rational snap for a separating PSD matrix."""
    from scipy.optimize import minimize

    n = F.shape[0]
    rng = np.random.default_rng(budget.seed)
    tol = budget.tol

    def unpack(params, rank):
        L = params.reshape(rank, n)
        B = L.T @ L
        nrm = np.linalg.norm(B)
        return B / nrm if nrm > 0 else B

    def objective(params, rank):
        B = unpack(params, rank)
        bad = max(float(np.tensordot(F, B)), 0.0)
        for G in Gs:
            bad += max(-float(np.tensordot(G, B)), 0.0)
        return bad

    best = None
    best_val = INF
    for start in range(budget.b_starts):
        rank = 1 + start % n
        x0 = rng.standard_normal(rank * n)
        res = minimize(objective, x0, args=(rank,), method="Nelder-Mead",
                       options={"maxiter": budget.nm_maxiter, "xatol": 1e-12,
                                "fatol": 1e-14})
        if res.fun < best_val:
            best_val = res.fun
            best = unpack(res.x, rank)
        if best_val <= 1e-13:
            break
    if best is None or best_val > 1e-8:
        return None

    snapped = _snap_separating_B(best, F, Gs)
    if snapped is not None:
        return snapped
    # fall back to the float witness if it satisfies the tolerance form
    B = best
    if (all(float(np.tensordot(G, B)) >= -tol for G in Gs)
            and float(np.tensordot(F, B)) <= tol
            and float(np.linalg.eigvalsh(B)[0]) >= -tol):
        return B / np.linalg.norm(B)
    return None


def _snap_separating_B(B, F, Gs):
    """Round B to nearby rationals and verify every constraint exactly."""
    n = B.shape[0]
    Fq = _rationalize_matrix(F)
    Gq = [_rationalize_matrix(G) for G in Gs]
    if Fq is None or any(g is None for g in Gq):
        return None
    for den in (2, 4, 8, 16, 64, 256, 10_000, 10 ** 6):
        scale = max(abs(B).max(), 1e-300)
        rows = [[Fraction(float(B[i, j] / scale)).limit_denominator(den)
                 for j in range(n)] for i in range(n)]
        rows = [[rows[min(i, j)][max(i, j)] for j in range(n)] for i in range(n)]
        if all(v == 0 for r in rows for v in r):
            continue
        trF = sum(Fq[i][j] * rows[j][i] for i in range(n) for j in range(n))
        if trF > 0:
            continue
        if any(sum(g[i][j] * rows[j][i] for i in range(n) for j in range(n)) < 0
               for g in Gq):
            continue
        if not _is_psd_exact(rows):
            continue
        Bf = np.array([[float(v) for v in r] for r in rows])
        return Bf / np.linalg.norm(Bf)
    return None


def _rationalize_matrix(M, max_den: int = 10 ** 9):
    n = M.shape[0]
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            f = Fraction(float(M[i, j])).limit_denominator(max_den)
            if abs(float(f) - float(M[i, j])) > 1e-12 * max(1.0, abs(float(M[i, j]))):
                return None
            row.append(f)
        rows.append(row)
    return rows


def _is_psd_exact(rows) -> bool:
    """All principal minors nonnegative (exact, n <= 4 scale)."""
    import itertools
    n = len(rows)
    for size in range(1, n + 1):
        for idx in itertools.combinations(range(n), size):
            sub = [[rows[i][j] for j in idx] for i in idx]
            if _det_exact(sub) < 0:
                return False
    return True


def _det_exact(rows) -> Fraction:
    n = len(rows)
    if n == 1:
        return Fraction(rows[0][0])
    total = Fraction(0)
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = Fraction(rows[0][j]) * _det_exact(minor)
        total += -term if j % 2 else term
    return total
