"""Field-level section structure over grids.

Membership in the closed sets K_G (some direction sees a nonnegative
form value) and L_G (some direction sees an exact zero), mu/nu endpoint
profiles, detection of the negative-semidefinite-outside-a-ball
precondition, and the d=1 asymptotic obstruction that rules out a
global rational witness.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, HypothesisFails
from .matpoly import MatPoly, matpoly_eval
from .pointwise import DEFAULT_TOL, SectionInterval, finsler_interval_batch

INF = math.inf


# -- pointwise membership ------------------------------------------------------


def in_K_G(G: MatPoly, a, tol: float = DEFAULT_TOL) -> bool:
    """a is in K_G iff G(a) is not negative definite (lambda_max >= -tol)."""
    lo, hi = _eig_extremes_at(G, a)
    return hi >= -tol


def in_L_G(G: MatPoly, a, tol: float = DEFAULT_TOL) -> bool:
    """a is in L_G iff some nonzero v has v^T G(a) v = 0.

    Equivalent to K_G intersect K_{-G}: the form takes both signs (or
    zero), i.e. lambda_max >= -tol and lambda_min <= tol.
    """
    lo, hi = _eig_extremes_at(G, a)
    return hi >= -tol and lo <= tol


def _eig_extremes_at(G: MatPoly, a):
    M = matpoly_eval(G, a)
    res = kernels.batch_eigen_extremes(M[None, :, :])[0]
    return float(res[0]), float(res[1])


# -- profiles --------------------------------------------------------------------


@dataclass
class SectionProfile:
    grid: np.ndarray          # (P, d)
    mu: np.ndarray            # (P,), -inf allowed, nan when empty
    nu: np.ndarray            # (P,), +inf allowed, nan when empty
    empty: np.ndarray         # (P,) bool
    in_KG: np.ndarray         # (P,) bool
    in_LG: np.ndarray         # (P,) bool
    low_confidence: np.ndarray  # (P,) bool

    def interval(self, i: int) -> SectionInterval:
        if self.empty[i]:
            return SectionInterval(True, low_confidence=bool(self.low_confidence[i]))
        return SectionInterval(False, float(self.mu[i]), float(self.nu[i]),
                               bool(self.low_confidence[i]))


def mu_nu_profile(F: MatPoly, G: MatPoly, grid, tol: float = DEFAULT_TOL
                  ) -> SectionProfile:
    """Per-point section endpoints plus K_G / L_G membership flags."""
    if F.n != G.n or F.d != G.d:
        raise DimensionMismatch("F and G shapes disagree")
    pts = np.asarray(grid, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != F.d:
        raise DimensionMismatch(f"grid is d={pts.shape[1]}, expected {F.d}")
    Fv = F.eval_grid(pts)
    Gv = G.eval_grid(pts)
    empty, lo, hi, lowc = finsler_interval_batch(Fv, Gv, tol)
    ex = kernels.batch_eigen_extremes(Gv)
    kg = ex[:, 1] >= -tol
    lg = kg & (ex[:, 0] <= tol)
    return SectionProfile(pts, lo, hi, empty, kg, lg, lowc)


def profile_to_csv(profile: SectionProfile, fileobj) -> None:
    """CSV rows x1..xd, mu, nu, in_KG, in_LG with -inf/+inf literals."""
    d = profile.grid.shape[1]
    writer = csv.writer(fileobj)
    writer.writerow([f"x{i+1}" for i in range(d)] + ["mu", "nu", "in_KG", "in_LG"])
    for i in range(profile.grid.shape[0]):
        row = [repr(float(v)) for v in profile.grid[i]]
        row.append(_fmt_extended(profile.mu[i]))
        row.append(_fmt_extended(profile.nu[i]))
        row.append("1" if profile.in_KG[i] else "0")
        row.append("1" if profile.in_LG[i] else "0")
        writer.writerow(row)


def profile_to_csv_string(profile: SectionProfile) -> str:
    buf = io.StringIO()
    profile_to_csv(profile, buf)
    return buf.getvalue()


def _fmt_extended(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if v == INF:
        return "+inf"
    if v == -INF:
        return "-inf"
    return repr(float(v))


# -- NSD-outside-a-ball detection ---------------------------------------------


def detect_ball_nsd(G: MatPoly, R_max: float = 16.0, grid_density: int = 64,
                    tol: float = DEFAULT_TOL) -> Optional[float]:
    """Smallest tested radius beyond which G looks negative semidefinite.

    Grid mode samples shells out to R_max (d <= 2).  For d = 1 the tail
    beyond R_max is additionally confirmed analytically: every principal
    minor of -G, as a univariate polynomial, must be eventually
    nonnegative on both tails, and the returned radius clears all real
    roots of those minors (Cauchy bound), so the sampled verdict extends
    to infinity.  Returns None when G is not NSD outside any tested ball.
    """
    if G.d > 2:
        raise DimensionMismatch("grid detection supports d <= 2")
    radii = np.linspace(0.0, float(R_max), int(grid_density) + 1)
    if G.d == 1:
        pts = np.concatenate([-radii[::-1], radii])[:, None]
        norms = np.abs(pts[:, 0])
    else:
        angles = np.linspace(0.0, 2.0 * math.pi, 4 * int(grid_density),
                             endpoint=False)
        ring = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        pts = (radii[:, None, None] * ring[None, :, :]).reshape(-1, 2)
        norms = np.linalg.norm(pts, axis=1)
    lmax = kernels.batch_eigen_extremes(G.eval_grid(pts))[:, 1]
    ok = lmax <= tol
    if not ok.all():
        worst = float(norms[~ok].max())
        if worst >= float(R_max) - 1e-12:
            return None
        candidates = radii[radii > worst + 1e-12]
        if candidates.size == 0:
            return None
        R = float(candidates[0])
    else:
        R = 0.0
    if G.d == 1:
        # the sampled verdict only extends past R_max when every minor of -G
        # keeps its eventual sign there, i.e. its root bound is inside R_max
        bound = _univariate_tail_nsd_bound(G)
        if bound is None or bound > R_max:
            return None
    return R


def _univariate_tail_nsd_bound(G: MatPoly) -> Optional[float]:
    """Radius beyond which -G is PSD on both tails, or None.

    Checks eventual signs of all principal minors of -G through leading
    terms and returns the largest Cauchy root bound among them.
    """
    import itertools

    n = G.n
    negG = -G
    bound = 0.0
    for size in range(1, n + 1):
        for idx in itertools.combinations(range(n), size):
            sub = [[negG.entries[i][j] for j in idx] for i in idx]
            minor = _poly_det(sub, G.d)
            if minor.is_zero():
                continue
            lc = minor.leading_coefficient()
            deg = int(minor.degree())
            if lc < 0:
                return None  # negative on the +inf tail
            if deg % 2 == 1:
                return None  # sign flips at -inf
            bound = max(bound, float(_cauchy_bound(minor)))
    return bound


def _poly_det(rows, d):
    from .poly import Poly

    m = len(rows)
    if m == 1:
        return rows[0][0]
    total = Poly.zero(d)
    for j in range(m):
        piv = rows[0][j]
        if piv.is_zero():
            continue
        minor = [[rows[i][k] for k in range(m) if k != j] for i in range(1, m)]
        term = piv * _poly_det(minor, d)
        total = total + (-term if j % 2 else term)
    return total


def _cauchy_bound(p) -> Fraction:
    """1 + max |a_i / a_n|, every real root lies strictly inside."""
    coeffs = p.univariate_coeffs()
    lead = coeffs[-1]
    if lead == 0:
        raise ValueError("zero leading coefficient")
    return 1 + max((abs(c / lead) for c in coeffs[:-1]), default=Fraction(0))


# -- asymptotic obstruction (d = 1) ---------------------------------------------


@dataclass
class ObstructionReport:
    limit_pos: tuple      # closed tail interval of M_x as x -> +inf
    limit_neg: tuple      # same for x -> -inf
    verdict: str          # "NoObstruction" | "RationalWitnessImpossible"
    reason: str = ""

    @property
    def impossible(self) -> bool:
        return self.verdict == "RationalWitnessImpossible"


def asymptotic_obstruction(F: MatPoly, G: MatPoly, X_far: float = 8.0,
                           tol: float = DEFAULT_TOL) -> ObstructionReport:
    """Compare required tail behaviors of the section against what a
    rational function can do (d = 1).

    Sections are computed at +-X_far * 2^j for j = 0..5 and both
    endpoint trends are extrapolated geometrically.  A rational function
    has equal finite limits at both infinities, or diverges at both.
    The verdict is conservative: impossibility is reported only when the
    closed tail intervals are separated by more than 10 * tol and at
    least one of them is bounded.
    """
    if F.d != 1 or G.d != 1:
        raise DimensionMismatch("obstruction detection is univariate-only")
    xs = np.array([X_far * 2.0 ** j for j in range(6)])
    tails = {}
    for sign in (+1.0, -1.0):
        pts = sign * xs
        Fv = F.eval_grid(pts[:, None])
        Gv = G.eval_grid(pts[:, None])
        empty, lo, hi, _ = finsler_interval_batch(Fv, Gv, tol)
        if empty.any():
            raise HypothesisFails(
                float(pts[int(np.argmax(empty))]),
                "empty section at a far-field point; no witness can exist "
                "and no tail comparison is meaningful")
        tails[sign] = (_extrapolate_tail(lo), _extrapolate_tail(hi))
    limit_pos = tails[1.0]
    limit_neg = tails[-1.0]
    margin = 10.0 * tol

    shared_lo = max(limit_pos[0], limit_neg[0])
    shared_hi = min(limit_pos[1], limit_neg[1])
    shares_finite = (shared_lo <= shared_hi + margin
                     and shared_lo < INF and shared_hi > -INF
                     and not (shared_lo == -INF and shared_hi == -INF)
                     and not (shared_lo == INF and shared_hi == INF))
    both_unbounded = ((limit_pos[0] == -INF or limit_pos[1] == INF)
                      and (limit_neg[0] == -INF or limit_neg[1] == INF))
    separated = (shared_lo > shared_hi + margin) or (
        shared_lo > shared_hi and (shared_lo == INF or shared_hi == -INF))
    if not shares_finite and not both_unbounded and separated:
        verdict = "RationalWitnessImpossible"
        reason = (f"tail requirement {limit_neg} at -inf is disjoint from "
                  f"{limit_pos} at +inf; a rational function has matching "
                  f"finite limits or diverges on both tails")
    else:
        verdict = "NoObstruction"
        reason = "tail requirements are compatible"
    return ObstructionReport(limit_pos, limit_neg, verdict, reason)


def _extrapolate_tail(values: np.ndarray) -> float:
    """Limit estimate from geometrically spaced samples.

    Exact for sequences converging like L + c * rho^j (Aitken step) and
    for eventually monotone divergence.
    """
    v = np.asarray(values, dtype=np.float64)
    if np.isinf(v).any():
        # endpoint is infinite at some far sample; trust the outermost
        return float(v[-1]) if math.isinf(v[-1]) else float(v[np.isinf(v)][-1])
    d1 = v[-2] - v[-3]
    d2 = v[-1] - v[-2]
    if abs(d2) <= 1e-12 * max(1.0, abs(v[-1])):
        return float(v[-1])
    if abs(d1) > 0:
        rho = d2 / d1
        if abs(rho) < 0.9:
            return float(v[-1] + d2 * rho / (1.0 - rho))
    # not settling: diverging in the direction of the last difference
    return INF if d2 > 0 else -INF
