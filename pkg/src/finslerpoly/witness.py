"""Constructive witness builders.

Four constructions, each mirroring a constructive proof:

* a compact-region polynomial witness fitted through the clipped
  midpoint of the section tube,
* a global polynomial witness p + eps * ((1+|x|^2)/(1+R^2))^k for
  constraints that are negative semidefinite outside a ball,
* a univariate 2x2 rational tail witness built from the pencil
  discriminant (diagonalizing transforms, root formulas, truncated
  expansion of the tracking function),
* the d=1 far-field merge that upgrades a tail witness to all of K_G
  with a correction from the algebra {h(x) / (1+x^2)^l : deg h < 2l}.

Every builder validates densely before returning; validation failures
raise rather than degrade.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import (CapExceeded, DegreeInsufficient, DimensionMismatch,
                     FitFails, HypothesisFails, ValidationFails)
from .matpoly import MatPoly
from .poly import Poly, eval_grid, norm_sq_poly, poly_eval
from .pointwise import DEFAULT_TOL, finsler_interval_batch
from .ratutil import cauchy_root_bound, frac_of_float, frac_sqrt, \
    limit_denominator_float, ps_inv_one_plus, ps_mul, ps_sqrt_one_plus
from .sections import detect_ball_nsd

INF = math.inf


# -- witness data model --------------------------------------------------------


@dataclass(frozen=True)
class RegionDescriptor:
    tag: str                 # AllSpace | Ball | OutsideBall | KGWhole | KGOutside
    R: float = 0.0

    _TAGS = ("AllSpace", "Ball", "OutsideBall", "KGWhole", "KGOutside")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise ValueError(f"unknown region tag {self.tag!r}")
        if self.R < 0:
            raise ValueError("region radius must be >= 0")

    def to_json(self):
        return {"tag": self.tag, "R": self.R}

    @classmethod
    def from_json(cls, data):
        return cls(tag=data["tag"], R=float(data.get("R", 0.0)))


@dataclass
class WitnessRational:
    """r = p / q with a validity region and an optional positivity demand."""

    p: Poly
    q: Poly
    region: RegionDescriptor
    positivity_required: bool = False

    def __call__(self, x):
        num = poly_eval(self.p, x)
        den = poly_eval(self.q, x)
        return num / den

    def eval_stable(self, xs: np.ndarray) -> np.ndarray:
        return eval_ratio_stable(self.p, self.q, xs)

    def to_json(self):
        return {
            "p": self.p.to_json(),
            "q": self.q.to_json(),
            "region": self.region.to_json(),
            "positive": self.positivity_required,
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            p=Poly.from_json(data["p"]),
            q=Poly.from_json(data["q"]),
            region=RegionDescriptor.from_json(data["region"]),
            positivity_required=bool(data.get("positive", False)),
        )


@dataclass(frozen=True)
class BoundFit:
    """Envelope value <= C * (1 + |x|^2)^t over the fitted samples."""

    C: float
    t: int


def eval_ratio_stable(p: Poly, q: Poly, xs: np.ndarray) -> np.ndarray:
    """p(x)/q(x) on univariate samples without overflow at large |x|.

    For |x| > 1 both polynomials are evaluated in 1/x against their top
    coefficient, so only the modest degree difference is exponentiated.
    """
    if p.d != 1 or q.d != 1:
        raise DimensionMismatch("stable ratio evaluation is univariate-only")
    xs = np.asarray(xs, dtype=np.float64).ravel()
    pc = np.array([float(c) for c in p.univariate_coeffs()])
    qc = np.array([float(c) for c in q.univariate_coeffs()])
    dp, dq = len(pc) - 1, len(qc) - 1
    out = np.empty_like(xs)
    small = np.abs(xs) <= 1.0
    if small.any():
        x = xs[small]
        num = np.polyval(pc[::-1], x)
        den = np.polyval(qc[::-1], x)
        out[small] = num / den
    if (~small).any():
        x = xs[~small]
        y = 1.0 / x
        num = np.polyval(pc, y)      # sum p_i y^(dp - i)
        den = np.polyval(qc, y)
        out[~small] = (num / den) * x ** (dp - dq)
    return out


# -- envelope fitting -----------------------------------------------------------


def bound_semialgebraic(samples: Sequence, t_cap: int = 12,
                        headroom: float = 1.1) -> BoundFit:
    """Fit value <= C (1+|x|^2)^t over (point, value) samples.

    t is the smallest exponent for which the ratio max is not attained
    in the outer shell of samples (the growth is genuinely captured);
    C rounds headroom * max-ratio up to two significant digits.
    """
    pts, vals = [], []
    for point, value in samples:
        v = float(value)
        if not math.isfinite(v):
            raise ValueError("samples must be finite")
        arr = np.atleast_1d(np.asarray(point, dtype=np.float64))
        pts.append(arr)
        vals.append(v)
    if not pts:
        raise ValueError("need at least one sample")
    vals = np.asarray(vals)
    norms2 = 1.0 + np.array([float(np.dot(a, a)) for a in pts])
    order = np.argsort(norms2)
    split = max(1, int(0.75 * len(order)))
    inner, outer = order[:split], order[split:]
    for t in range(t_cap + 1):
        ratio = vals / norms2 ** t
        rmax = float(ratio.max())
        if rmax <= 0:
            return BoundFit(_round_up_2sig(1e-9), t)
        if outer.size == 0 or float(ratio[outer].max()) <= float(
                ratio[inner].max()) * (1.0 + 1e-9):
            return BoundFit(_round_up_2sig(headroom * rmax), t)
    raise CapExceeded(f"no envelope exponent up to t_cap={t_cap}")


def _round_up_2sig(x: float) -> float:
    if x <= 0:
        return 1e-9
    exp = math.floor(math.log10(x))
    mant = x / 10 ** exp
    return math.ceil(mant * 10) / 10 * 10 ** exp


# -- grids ----------------------------------------------------------------------


def ball_grid(d: int, radius: float, density: int) -> np.ndarray:
    axes = [np.linspace(-radius, radius, density) for _ in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    keep = np.linalg.norm(pts, axis=1) <= radius + 1e-12
    return pts[keep]


def _monomial_basis(d: int, deg: int):
    out = []
    for total in range(deg + 1):
        for combo in itertools.product(range(total + 1), repeat=d):
            if sum(combo) == total:
                out.append(combo)
    return out


def _fit_poly(points: np.ndarray, targets: np.ndarray, deg: int, d: int) -> Poly:
    basis = _monomial_basis(d, deg)
    V = np.empty((points.shape[0], len(basis)))
    for j, mono in enumerate(basis):
        col = np.ones(points.shape[0])
        for i, e in enumerate(mono):
            if e:
                col *= points[:, i] ** e
        V[:, j] = col
    coeffs, *_ = np.linalg.lstsq(V, targets, rcond=None)
    terms = {mono: limit_denominator_float(c)
             for mono, c in zip(basis, coeffs)
             if abs(c) > 1e-14 * max(1.0, float(np.abs(coeffs).max()))}
    return Poly(d, terms)


# -- compact-region polynomial witness -----------------------------------------


def fit_compact_witness(F: MatPoly, G: MatPoly, R: float, max_deg: int = 8,
                        grid_density: int = 15, tol: float = DEFAULT_TOL,
                        margin: float = 0.0) -> Poly:
    """Polynomial p with F - p G positive definite on the sampled ball.

    Targets are the clipped tube midpoints (max(mu, c) + min(nu, dd))/2
    with c, dd taken from the empirical range of per-point interior
    representatives; fits of increasing degree are verified on a 4x
    finer grid before acceptance.
    """
    if F.n != G.n or F.d != G.d:
        raise DimensionMismatch("F and G shapes disagree")
    radius = float(R) + float(margin)
    pts = ball_grid(F.d, radius, grid_density)
    mu, nu = _sections_or_raise(F, G, pts, tol)

    reps = np.empty(len(pts))
    for i in range(len(pts)):
        lo, hi = mu[i], nu[i]
        if lo == -INF and hi == INF:
            reps[i] = 0.0
        elif lo == -INF:
            reps[i] = hi - 1.0
        elif hi == INF:
            reps[i] = lo + 1.0
        else:
            reps[i] = 0.5 * (lo + hi)
    c = float(reps.min()) - 1.0
    dd = float(reps.max()) + 1.0
    target = 0.5 * (np.maximum(mu, c) + np.minimum(nu, dd))

    fine = ball_grid(F.d, radius, 4 * grid_density)
    Ff = F.eval_grid(fine)
    Gf = G.eval_grid(fine)
    last_fail = None
    for deg in range(max_deg + 1):
        p = _fit_poly(pts, target, deg, F.d)
        pv = eval_grid(p, fine)
        ok = kernels.batch_is_pd(Ff - pv[:, None, None] * Gf, tol)
        if ok.all():
            return p
        last_fail = fine[int(np.argmin(ok))]
    raise DegreeInsufficient(
        f"no witness of degree <= {max_deg}; first failure near {last_fail}")


def _sections_or_raise(F, G, pts, tol):
    Fv = F.eval_grid(pts)
    Gv = G.eval_grid(pts)
    empty, lo, hi, _ = finsler_interval_batch(Fv, Gv, tol)
    if empty.any():
        idx = int(np.argmax(empty))
        raise HypothesisFails(tuple(float(v) for v in pts[idx]))
    return lo, hi


# -- global witness under the NSD-outside-a-ball precondition --------------------


@dataclass
class NSDWitnessCaps:
    R_max: float = 16.0
    ball_density: int = 64
    fit_max_deg: int = 8
    fit_density: int = 15
    eps_min: float = 1e-6
    k_cap: int = 64
    far_radii: int = 12
    val_points: int = 10_000
    val_span: float = 8.0          # validation half-width, times (R+1)
    envelope_t_cap: int = 12
    tol: float = DEFAULT_TOL


@dataclass
class GlobalWitness:
    p_k: Poly
    p: Poly
    eps: Fraction
    k: int
    R: Fraction
    bound: BoundFit

    def ball_factor(self) -> Poly:
        """eps * ((1 + |x|^2) / (1 + R^2))^k as an exact polynomial."""
        d = self.p.d
        base = Poly.one(d) + norm_sq_poly(d)
        return base ** self.k * (self.eps / (1 + self.R ** 2) ** self.k)


def construct_global_witness_nsd(F: MatPoly, G: MatPoly,
                                 caps: NSDWitnessCaps | None = None
                                 ) -> GlobalWitness:
    """Global polynomial witness when G is NSD outside a detected ball.

    p is the compact fit over the ball plus one, eps the largest
    halving-sweep slack keeping F - (p+eps) G definite on the inner
    ball, the envelope C (1+|x|^2)^t dominates max(mu, p) on a wide
    sample, and k is the smallest exponent pushing p_k above the
    envelope at the far test radii.  The result is validated on a
    global grid plus far-field points.
    """
    caps = caps or NSDWitnessCaps()
    tol = caps.tol
    R = detect_ball_nsd(G, caps.R_max, caps.ball_density, tol)
    if R is None:
        raise HypothesisFails(
            None, "constraint is not negative semidefinite outside any "
                  f"tested ball up to R_max={caps.R_max}")
    Rq = limit_denominator_float(R, 10 ** 6)

    p = fit_compact_witness(F, G, R + 1.0, caps.fit_max_deg,
                            caps.fit_density, tol)

    inner = ball_grid(F.d, max(R, 1e-9), caps.fit_density)
    Fi = F.eval_grid(inner)
    Gi = G.eval_grid(inner)
    pi = eval_grid(p, inner)
    eps = None
    cand = Fraction(1)
    while float(cand) >= caps.eps_min:
        vals = Fi - (pi + float(cand))[:, None, None] * Gi
        if kernels.batch_is_pd(vals, tol).all():
            eps = cand
            break
        cand = cand / 2
    if eps is None:
        raise CapExceeded("no compactness slack above eps_min")

    span = caps.val_span * (R + 1.0)
    wide = _global_grid(F.d, span, caps.val_points)
    mu, _ = _sections_or_raise(F, G, wide, tol)
    pw = eval_grid(p, wide)
    needed = np.maximum(mu, pw)
    bound = bound_semialgebraic(
        [(wide[i], needed[i]) for i in range(len(wide))],
        t_cap=caps.envelope_t_cap)

    far = _far_points(F.d, R + 2.0, caps.far_radii)
    outside = wide[np.linalg.norm(wide, axis=1) > R + 1.0]
    check_pts = np.concatenate([outside, far], axis=0)
    env = float(bound.C) * (1.0 + (check_pts ** 2).sum(axis=1)) ** bound.t

    norm2 = norm_sq_poly(F.d)
    one = Poly.one(F.d)
    for k in range(caps.k_cap + 1):
        bump = ((one + norm2) * Fraction(1, 1)) ** k * (
            eps / (1 + Rq ** 2) ** k)
        p_k = p + bump
        pkv = eval_grid(p_k, check_pts)
        if not (pkv > env).all():
            continue
        val_pts = np.concatenate([wide, far], axis=0)
        Fv = F.eval_grid(val_pts)
        Gv = G.eval_grid(val_pts)
        pv = eval_grid(p_k, val_pts)
        if kernels.batch_is_pd(Fv - pv[:, None, None] * Gv, tol).all():
            return GlobalWitness(p_k, p, eps, k, Rq, bound)
    raise CapExceeded(f"no exponent k <= {caps.k_cap} clears the envelope")


def _global_grid(d: int, span: float, budget: int) -> np.ndarray:
    if d == 1:
        return np.linspace(-span, span, budget)[:, None]
    per_axis = max(8, int(budget ** (1.0 / d)))
    axes = [np.linspace(-span, span, per_axis) for _ in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _far_points(d: int, base: float, count: int) -> np.ndarray:
    radii = base * 2.0 ** (0.5 * np.arange(1, count + 1))
    if d == 1:
        pts = np.concatenate([radii, -radii])[:, None]
        return pts
    angles = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
    out = []
    for i, r in enumerate(radii):
        a = angles[i % len(angles)]
        out.append([r * math.cos(a), r * math.sin(a)])
    return np.asarray(out)


# -- univariate 2x2 witness ------------------------------------------------------


@dataclass
class Witness2x2Caps:
    trunc_orders: tuple = (4, 8, 16, 32)
    envelope_t_cap: int = 12
    val_count: int = 1200
    val_span_factor: float = 64.0
    precheck_span: float = 24.0
    precheck_count: int = 241
    sqrt_bits: int = 256
    tol: float = DEFAULT_TOL


@dataclass
class Diagonalized2x2:
    """Congruence-reduced pair: A G A^T diagonal, valid where det A != 0."""

    F: MatPoly
    G: MatPoly
    A: MatPoly
    kind: str                     # "identity" | "hyperbolic" | "column"
    guard_roots: Poly             # reduction is a congruence where this is nonzero


def reduce_to_diagonal_2x2(F: MatPoly, G: MatPoly) -> Diagonalized2x2:
    """Congruence taking G to diagonal form.

    Zero diagonal goes through the integer hyperbolic transform
    [[1, 1], [1, -1]] (an unnormalized rotation: exactness beats the
    paper-style 1/sqrt(2) scaling and positivity is congruence
    invariant), otherwise the column transform B = [[g11, 0], [-g12,
    g11]] with B G B^T = diag(g11^3, g11 det G), valid where g11 != 0.
    """
    if F.n != 2 or G.n != 2 or F.d != 1:
        raise DimensionMismatch("reduction expects 2x2 univariate input")
    one = Poly.one(1)
    zero = Poly.zero(1)
    g11 = G.entries[0][0]
    g12 = G.entries[0][1]
    g22 = G.entries[1][1]
    if g12.is_zero():
        return Diagonalized2x2(F, G, MatPoly.identity(2, 1), "identity", one)
    if g11.is_zero() and g22.is_zero():
        A = MatPoly([[one, one], [one, -one]], d=1)
        return Diagonalized2x2(A * F * A.transpose(), A * G * A.transpose(),
                               A, "hyperbolic", one)
    if g11.is_zero():
        P = MatPoly([[zero, one], [one, zero]], d=1)
        Gs = P * G * P.transpose()
        g11s, g12s = Gs.entries[0][0], Gs.entries[0][1]
        A = MatPoly([[g11s, zero], [-g12s, g11s]], d=1) * P
        guard = g11s
    else:
        A = MatPoly([[g11, zero], [-g12, g11]], d=1)
        guard = g11
    return Diagonalized2x2(A * F * A.transpose(), A * G * A.transpose(),
                           A, "column", guard)


def pencil_discriminant_2x2(F: MatPoly, G: MatPoly):
    """(N, D, detF) for diagonal G: det(F - rG) = detF - N r + g11 g22 r^2."""
    f11 = F.entries[0][0]
    f22 = F.entries[1][1]
    f12 = F.entries[0][1]
    g1 = G.entries[0][0]
    g2 = G.entries[1][1]
    detF = f11 * f22 - f12 * f12
    N = f11 * g2 + f22 * g1
    D = N * N - 4 * (g1 * g2 * detF)
    return N, D, detF


class _RatFunc:
    """Internal exact rational function p/q for candidate assembly."""

    __slots__ = ("p", "q")

    def __init__(self, p: Poly, q: Poly):
        self.p, self.q = p, q

    @classmethod
    def from_poly(cls, p: Poly):
        return cls(p, Poly.one(p.d))

    def __add__(self, other):
        return _RatFunc(self.p * other.q + other.p * self.q, self.q * other.q)

    def __sub__(self, other):
        return _RatFunc(self.p * other.q - other.p * self.q, self.q * other.q)

    def __neg__(self):
        return _RatFunc(-self.p, self.q)

    def scaled(self, c):
        return _RatFunc(self.p * c, self.q)


def construct_2x2_univariate_witness(F: MatPoly, G: MatPoly,
                                     caps: Witness2x2Caps | None = None
                                     ) -> WitnessRational:
    """Rational tail witness for a 2x2 univariate pair.

    Follows the constructive case split: diagonalize G by a congruence,
    dispatch on which diagonal entries vanish identically, and in the
    generic case classify each tail through the root formulas
    r+- = (N +- sqrt(D)) / (2 g11 g22); mixed tails track the upper root
    minus a shrinking damper via a truncated expansion in 1/x.  The
    returned witness is nonnegative with F - r G positive definite on
    dense samples of K_G beyond the computed radius.
    """
    caps = caps or Witness2x2Caps()
    tol = caps.tol
    if F.n != 2 or G.n != 2 or F.d != 1 or G.d != 1:
        raise DimensionMismatch("constructor expects 2x2, d=1 input")

    _precheck_positive_sections(F, G, caps)

    red = reduce_to_diagonal_2x2(F, G)
    Fd, Gd = red.F, red.G
    g1 = Gd.entries[0][0]
    g2 = Gd.entries[1][1]

    sign_polys = [g1, g2, red.guard_roots]
    candidates: list[_RatFunc] = []
    zero = _RatFunc.from_poly(Poly.zero(1))

    if g1.is_zero() and g2.is_zero():
        candidates = [zero]
    elif g1.is_zero() or g2.is_zero():
        if g1.is_zero():
            P = MatPoly([[Poly.zero(1), Poly.one(1)],
                         [Poly.one(1), Poly.zero(1)]], d=1)
            Fd, Gd = P * Fd * P.transpose(), P * Gd * P.transpose()
            g1, g2 = Gd.entries[0][0], Gd.entries[1][1]
        cands, extra_signs = _scalar_constraint_candidates(Fd, Gd, caps)
        candidates = cands
        sign_polys += extra_signs
    else:
        cands, extra_signs = _generic_candidates(Fd, Gd, caps)
        candidates = cands
        sign_polys += extra_signs

    R = _sign_constancy_radius(sign_polys)
    xs, keep = _tail_samples(G, R, caps, tol)
    if xs.size == 0:
        # K_G misses both tails entirely; any nonnegative r works there
        cand = candidates[0] if candidates else zero
        return WitnessRational(cand.p, cand.q,
                               RegionDescriptor("KGOutside", R), True)
    Fv = F.eval_grid(xs[:, None])
    Gv = G.eval_grid(xs[:, None])
    worst = None
    for cand in candidates:
        rv = eval_ratio_stable(cand.p, cand.q, xs)
        if not np.isfinite(rv).all():
            continue
        if (rv < 0.0).any():
            worst = xs[int(np.argmax(rv < 0.0))]
            continue
        ok = kernels.batch_is_pd(Fv - rv[:, None, None] * Gv, tol)
        if ok.all():
            return WitnessRational(cand.p, cand.q,
                                   RegionDescriptor("KGOutside", R), True)
        worst = xs[int(np.argmin(ok))]
    raise ValidationFails(worst, "no candidate stays inside the section tube; "
                                 "truncation caps exhausted")


def _precheck_positive_sections(F, G, caps):
    xs = np.linspace(-caps.precheck_span, caps.precheck_span,
                     caps.precheck_count)[:, None]
    Fv = F.eval_grid(xs)
    Gv = G.eval_grid(xs)
    empty, lo, hi, _ = finsler_interval_batch(Fv, Gv, caps.tol)
    bad = empty | ~(hi > 0)
    if bad.any():
        raise HypothesisFails(float(xs[int(np.argmax(bad)), 0]),
                              "no positive r keeps the pencil definite here")


def _sign_constancy_radius(polys) -> float:
    """2x the largest real-root magnitude among the sign polynomials.

    Signs are constant beyond the last real root; the doubling absorbs
    numeric root error (the exact Cauchy bound caps the result).
    """
    bound = 1.0
    cap = Fraction(1)
    for p in polys:
        if p is None or p.is_zero():
            continue
        coeffs = np.array([float(c) for c in p.univariate_coeffs()])
        if len(coeffs) > 1:
            roots = np.roots(coeffs[::-1])
            real = roots[np.abs(roots.imag) <= 1e-7 * (1 + np.abs(roots))].real
            if real.size:
                bound = max(bound, float(np.abs(real).max()))
        cap = max(cap, cauchy_root_bound(p.univariate_coeffs()))
    return float(min(2.0 * bound, float(2 * cap)))


def _tail_samples(G, R, caps, tol):
    half = caps.val_count // 2
    lin = np.linspace(R * 1.0001, 4.0 * R, half)
    geo = np.geomspace(4.0 * R, R * caps.val_span_factor, caps.val_count - half)
    right = np.concatenate([lin, geo])
    xs = np.concatenate([-right[::-1], right])
    lmax = kernels.batch_eigen_extremes(G.eval_grid(xs[:, None]))[:, 1]
    keep = lmax >= -tol
    return xs[keep], keep


def _scalar_constraint_candidates(Fd, Gd, caps):
    """Case g22 == 0, g11 != 0: everything reads off phi = detF/(g11 f22)."""
    f22 = Fd.entries[1][1]
    g1 = Gd.entries[0][0]
    _, _, detF = pencil_discriminant_2x2(Fd, Gd)
    u = detF
    w = g1 * f22
    signs = [detF, f22, w]
    R = _sign_constancy_radius([g1, detF, f22, w])
    zero = _RatFunc.from_poly(Poly.zero(1))
    phi = _RatFunc(u, w)
    one_plus_phi2 = _RatFunc(w * w + u * u, w * w)

    s_pos = _poly_tail_sign(g1, +1)
    s_neg = _poly_tail_sign(g1, -1)
    cands = []
    if s_pos > 0 and s_neg > 0:
        cands = [zero]
    elif s_pos < 0 and s_neg < 0:
        cands = [one_plus_phi2]
    else:
        # one constraint sign per tail; phi side condition picks the branch
        pos_side = +1 if s_pos > 0 else -1   # tail where g11 > 0
        phi_on_neg_constraint_tail = _rat_tail_sign(u, w, -pos_side)
        if phi_on_neg_constraint_tail < 0:
            cands = [zero]
        else:
            xs = pos_side * np.geomspace(R, R * 64.0, 48)
            vals = eval_ratio_stable(u, w, xs)
            fit = bound_semialgebraic(
                [([x], 1.0 / v) for x, v in zip(xs, vals) if v > 0],
                t_cap=caps.envelope_t_cap)
            k = fit.t + 1
            eps = Fraction(1) / frac_of_float(fit.C)
            x = Poly.variable(0, 1)
            onepx2 = Poly.one(1) + x * x
            # subtract the odd damper on the g11 > 0 tail, add it on the other
            damper = _RatFunc(x * (eps if pos_side > 0 else -eps), onepx2 ** k)
            cands = [phi - damper, zero, one_plus_phi2]
    return cands, signs


def _poly_tail_sign(p: Poly, side: int) -> int:
    if p.is_zero():
        return 0
    lc = p.leading_coefficient()
    deg = int(p.degree())
    s = 1 if lc > 0 else -1
    if side < 0 and deg % 2 == 1:
        s = -s
    return s


def _rat_tail_sign(num: Poly, den: Poly, side: int) -> int:
    sn = _poly_tail_sign(num, side)
    sd = _poly_tail_sign(den, side)
    return sn * sd


def _generic_candidates(Fd, Gd, caps):
    """Case g11 g22 != 0: classify tails by (detF sign, K_G presence)."""
    g1 = Gd.entries[0][0]
    g2 = Gd.entries[1][1]
    N, D, detF = pencil_discriminant_2x2(Fd, Gd)
    W2 = 2 * (g1 * g2)
    signs = [N, D, detF, W2]
    if D.is_zero():
        deg_even, lead_pos = True, True
    else:
        deg_even = int(D.degree()) % 2 == 0
        lead_pos = D.leading_coefficient() > 0
    if not deg_even or not lead_pos:
        raise HypothesisFails(None, "discriminant is eventually negative; "
                                    "real roots vanish on a tail")

    R = _sign_constancy_radius([g1, g2, N, D, detF, W2])
    mid = _RatFunc(N, W2)
    zero = _RatFunc.from_poly(Poly.zero(1))

    tails = []
    for side in (+1, -1):
        in_kg = _poly_tail_sign(g1, side) > 0 or _poly_tail_sign(g2, side) > 0
        if not in_kg:
            continue
        detf_sign = _poly_tail_sign(detF, side)
        tails.append("5a" if detf_sign <= 0 else "5b")
    if not tails:
        return [zero], signs
    if all(t == "5a" for t in tails):
        primary = [mid]
    elif all(t == "5b" for t in tails):
        primary = [zero]
    else:
        primary = []

    series = _series_candidates(Fd, Gd, N, D, W2, R, caps)
    return primary + series + [zero, mid], signs


def _series_candidates(Fd, Gd, N, D, W2, R, caps):
    """Truncations of the tracking function r_- minus a shrinking damper.

    Both damper parities and both branch signs of the expansion are
    offered; validation picks the combination matching the actual tail
    orientation (the expansion of sqrt(D) flips sign across tails when
    its half-degree is odd).
    """
    tol = caps.tol
    xs_both = np.concatenate([-np.geomspace(R, 64 * R, 48)[::-1],
                              np.geomspace(R, 64 * R, 48)])
    lmax = kernels.batch_eigen_extremes(Gd.eval_grid(xs_both[:, None]))[:, 1]
    xs = xs_both[lmax >= -tol]
    if xs.size == 0:
        return []
    g1v = eval_grid(Gd.entries[0][0], xs[:, None])
    g2v = eval_grid(Gd.entries[1][1], xs[:, None])
    Nv = eval_grid(N, xs[:, None])
    Dv = np.maximum(eval_grid(D, xs[:, None]), 0.0)
    detFv = eval_grid(_det2(Fd), xs[:, None])
    denom = 2.0 * g1v * g2v
    r_minus = (Nv - np.sqrt(Dv)) / denom
    r_plus = (Nv + np.sqrt(Dv)) / denom
    samples = []
    for i, x in enumerate(xs):
        if detFv[i] <= 0:
            gap = r_minus[i] - r_plus[i]
        else:
            gap = r_minus[i]
        if gap > 0:
            samples.append(([x], 1.0 / gap))
    if not samples:
        return []
    fit = bound_semialgebraic(samples, t_cap=caps.envelope_t_cap)
    k = fit.t
    Cq = frac_of_float(fit.C)

    x = Poly.variable(0, 1)
    onepx2 = Poly.one(1) + x * x
    damp_even = _RatFunc(Poly.constant(1, 1 / Cq), onepx2 ** max(k, 0))
    damp_odd = _RatFunc(x * Fraction(2, 1) * (1 / Cq), onepx2 ** (k + 1))

    mid = _RatFunc(N, W2)
    out = []
    for J in caps.trunc_orders:
        trunc = _sqrt_ratio_truncation(D, W2, J, caps.sqrt_bits)
        if trunc is None:
            continue
        for damper in (damp_even, damp_odd):
            for sgn in (1, -1):
                cand = mid - damper - (trunc if sgn > 0 else -trunc)
                out.append(cand)
    return out


def _det2(M: MatPoly) -> Poly:
    return (M.entries[0][0] * M.entries[1][1]
            - M.entries[0][1] * M.entries[1][0])


def _sqrt_ratio_truncation(D: Poly, W2: Poly, J: int,
                           sqrt_bits: int) -> Optional[_RatFunc]:
    """Truncated expansion of sqrt(D)/W2 at x -> +inf as a rational function.

    sqrt(D) = sqrt(lead) x^m sqrt(1 + u(1/x)) with all series
    coefficients rational once sqrt(lead) is replaced by a high
    precision rational approximation; the approximation error is far
    below any tube width at sampled scales.
    """
    if D.is_zero():
        return _RatFunc.from_poly(Poly.zero(1))
    dc = D.univariate_coeffs()
    wc = W2.univariate_coeffs()
    two_m = len(dc) - 1
    if two_m % 2 != 0 or dc[-1] <= 0:
        return None
    m = two_m // 2
    L = len(wc) - 1
    delta = dc[-1]
    cL = wc[-1]
    u = [Fraction(0)] * J
    for i in range(1, J):
        idx = two_m - i
        if 0 <= idx < len(dc):
            u[i] = dc[idx] / delta
    sq = ps_sqrt_one_plus(u, J)
    w = [Fraction(0)] * J
    for i in range(1, J):
        idx = L - i
        if 0 <= idx < len(wc):
            w[i] = wc[idx] / cL
    inv = ps_inv_one_plus(w, J)
    series = ps_mul(sq, inv, J)
    s = frac_sqrt(delta, sqrt_bits) / cL

    # exponents m - L - j for j = 0..J-1; shift x^shift into the denominator
    min_exp = m - L - (J - 1)
    shift = max(0, -min_exp)
    terms = {}
    for j, coef in enumerate(series):
        if coef:
            e = m - L - j + shift
            terms[(e,)] = terms.get((e,), Fraction(0)) + s * coef
    num = Poly(1, terms)
    den = Poly(1, {(shift,): 1})
    return _RatFunc(num, den)


# -- far-field merge (d = 1) -----------------------------------------------------


@dataclass
class MergeCaps:
    l_cap: int = 8
    envelope_t_cap: int = 12
    val_count: int = 4001
    val_span: float = 50.0
    tol: float = DEFAULT_TOL


def merge_far_field(F: MatPoly, G: MatPoly, r0: WitnessRational,
                    caps: MergeCaps | None = None) -> WitnessRational:
    """Upgrade a tail witness to a single rational witness on all of K_G.

    The correction lives in {h(x)/(1+x^2)^l : deg h < 2l} and is fitted
    so that r1 = r0 + g/(1+x^2)^(k+1) stays inside the shrinking tube
    (phi - eps sigma, phi + eps sigma) built from the section endpoints;
    the exponent k and the tube constants come from envelope fits of
    1/(nu1 - r0) and 1/(r0 - mu1) on the far region.
    """
    caps = caps or MergeCaps()
    tol = caps.tol
    if F.d != 1 or G.d != 1:
        raise DimensionMismatch("merge is univariate-only")
    if r0.region.tag not in ("KGOutside", "OutsideBall"):
        raise ValueError("r0 must come with a tail region")
    R = float(r0.region.R)

    span = max(caps.val_span, 4.0 * R + 4.0)
    xs_all = np.linspace(-span, span, caps.val_count)
    lmax = kernels.batch_eigen_extremes(G.eval_grid(xs_all[:, None]))[:, 1]
    kg = xs_all[lmax >= -tol]
    if kg.size == 0:
        return WitnessRational(r0.p, r0.q, RegionDescriptor("KGWhole"),
                               r0.positivity_required)
    Fv = F.eval_grid(kg[:, None])
    Gv = G.eval_grid(kg[:, None])
    empty, mu, nu, _ = finsler_interval_batch(Fv, Gv, tol)
    if empty.any():
        raise HypothesisFails(float(kg[int(np.argmax(empty))]))

    r0v = eval_ratio_stable(r0.p, r0.q, kg)
    far = np.abs(kg) > R
    if not _pd_along(Fv[far], Gv[far], r0v[far], tol,
                     r0.positivity_required):
        bad = kg[far][_first_bad(Fv[far], Gv[far], r0v[far], tol,
                                 r0.positivity_required)]
        raise ValidationFails(float(bad), "r0 is not valid on its far region")

    # fast path: r0 may already work everywhere
    if _pd_along(Fv, Gv, r0v, tol, r0.positivity_required):
        return WitnessRational(r0.p, r0.q, RegionDescriptor("KGWhole"),
                               r0.positivity_required)

    inner = ~far
    c = 1.0
    if inner.any():
        gap_hi = np.where(np.isfinite(mu[inner]), mu[inner] - r0v[inner], -INF)
        gap_lo = np.where(np.isfinite(nu[inner]), r0v[inner] - nu[inner], -INF)
        c = float(max(np.max(gap_hi), np.max(gap_lo), 0.0)) + 1.0
    mu1 = np.maximum(mu, r0v - c)
    nu1 = np.minimum(nu, r0v + c)

    far_samples = []
    for i in np.nonzero(far)[0]:
        for val in (nu1[i] - r0v[i], r0v[i] - mu1[i]):
            if val > 0:
                far_samples.append(([kg[i]], 1.0 / val))
    if not far_samples:
        raise FitFails("no tube room on the far region")
    fit = bound_semialgebraic(far_samples, t_cap=caps.envelope_t_cap)
    k, dconst = fit.t, fit.C

    sigma = c * ((1.0 + R * R) / (1.0 + kg ** 2)) ** (k + 1)
    mu2 = np.maximum(mu1, r0v - sigma)
    nu2 = np.minimum(nu1, r0v + sigma)
    phi = 0.5 * (mu2 + nu2)

    width = nu2 - mu2
    if not (width > 0).all():
        raise FitFails("tube collapses inside the merge radius")

    # in g-space the tube around the target f has half-width
    # (width/2) * (1+x^2)^(k+1); weighting by it makes the least-squares
    # error uniform relative to the room available
    f_target = (1.0 + kg ** 2) ** (k + 1) * (phi - r0v)
    tol_g = 0.5 * width * (1.0 + kg ** 2) ** (k + 1)
    x = Poly.variable(0, 1)
    onepx2 = Poly.one(1) + x * x
    for l in range(1, caps.l_cap + 1):
        h = _fit_weighted_poly(kg, f_target / tol_g,
                               (1.0 + kg ** 2) ** l * tol_g, 2 * l - 1)
        gv = eval_grid(h, kg[:, None]) / (1.0 + kg ** 2) ** l
        if not (np.abs(gv - f_target) < 0.95 * tol_g).all():
            continue
        # r1 = r0 + g/(1+x^2)^(k+1) = r0 + h/(1+x^2)^(l+k+1)
        qm = onepx2 ** (l + k + 1)
        p1 = r0.p * qm + r0.q * h
        q1 = r0.q * qm
        r1v = eval_ratio_stable(p1, q1, kg)
        if _pd_along(Fv, Gv, r1v, tol, r0.positivity_required):
            return WitnessRational(p1, q1, RegionDescriptor("KGWhole"),
                                   r0.positivity_required)
    raise FitFails(f"no correction up to l_cap={caps.l_cap} stays in the tube")


def _fit_weighted_poly(xs, target, weight, deg) -> Poly:
    V = np.vander(xs, deg + 1, increasing=True) / weight[:, None]
    coeffs, *_ = np.linalg.lstsq(V, target, rcond=None)
    return Poly(1, {(i,): limit_denominator_float(c)
                    for i, c in enumerate(coeffs) if abs(c) > 1e-14})


def _pd_along(Fv, Gv, rv, tol, positive) -> bool:
    if not np.isfinite(rv).all():
        return False
    if positive and (rv < 0).any():
        return False
    return bool(kernels.batch_is_pd(
        Fv - rv[:, None, None] * Gv, tol).all())


def _first_bad(Fv, Gv, rv, tol, positive) -> int:
    ok = kernels.batch_is_pd(Fv - rv[:, None, None] * Gv, tol)
    ok &= np.isfinite(rv)
    if positive:
        ok &= rv >= 0
    return int(np.argmin(ok))
