"""Exact certificate data model, verification and combinators.

Certificates witness membership of (1+s) F in translates of the weak
quadratic modules generated by constraint matrices:

* WQM form:   (1+s) F = I_n + sum H^T H + sum sigma_j G_j   (sigma_j SOS)
* signed form: (1+s) F = I_n + sum H^T H + t G              (t any poly)
* ideal form: (1+s) F = I_n + sum H^T H + sum (A_i G_i + (A_i G_i)^T)

Everything is checked term by term over the rationals; no epsilon
appears in any identity.  Combinators assemble new certificates from
verified inputs following explicit rewriting steps and re-verify their
own output.  The bounded ledger enumerates certified scalar members of
the smallest weak preordering containing G, each element carrying a
provenance tree that reproduces it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DecompositionError, ShapeMismatch
from .matpoly import MatPoly, herm_square_sum_shaped
from .poly import Poly, as_fraction
from .ratutil import rational_as_square_list


# -- certificate data -------------------------------------------------------------


@dataclass
class SOSCert:
    """s = sum q_i^2; the empty list is zero."""

    squares: list

    def expand(self, d: int | None = None) -> Poly:
        if not self.squares:
            if d is None:
                raise ShapeMismatch("empty SOS list needs an ambient d")
            return Poly.zero(d)
        total = Poly.zero(self.squares[0].d)
        for q in self.squares:
            total = total + q * q
        return total

    def to_json(self):
        return [q.to_json() for q in self.squares]

    @classmethod
    def from_json(cls, data):
        return cls([Poly.from_json(q) for q in data])


@dataclass
class HermSOSCert:
    """S = sum H_i^T H_i over matrix polynomial factors."""

    factors: list

    def expand(self, n: int, d: int) -> MatPoly:
        return herm_square_sum_shaped(self.factors, n, d)

    def to_json(self):
        return [H.to_json() for H in self.factors]

    @classmethod
    def from_json(cls, data):
        return cls([MatPoly.from_json(H) for H in data])


@dataclass
class WQMCert:
    s: SOSCert
    herm: HermSOSCert
    g_multipliers: list          # one SOSCert per constraint

    def to_json(self):
        return {"kind": "wqm", "s": self.s.to_json(),
                "herm": self.herm.to_json(),
                "multipliers": [m.to_json() for m in self.g_multipliers]}

    @classmethod
    def from_json(cls, data):
        return cls(SOSCert.from_json(data["s"]),
                   HermSOSCert.from_json(data["herm"]),
                   [SOSCert.from_json(m) for m in data["multipliers"]])


@dataclass
class OGCert:
    s: SOSCert
    herm: HermSOSCert
    g_multiplier: Poly           # arbitrary sign

    def to_json(self):
        return {"kind": "og", "s": self.s.to_json(),
                "herm": self.herm.to_json(),
                "multipliers": self.g_multiplier.to_json()}

    @classmethod
    def from_json(cls, data):
        return cls(SOSCert.from_json(data["s"]),
                   HermSOSCert.from_json(data["herm"]),
                   Poly.from_json(data["multipliers"]))


@dataclass
class IdealCert:
    s: SOSCert
    herm: HermSOSCert
    left_factors: list           # A_i, contributing A_i G_i + (A_i G_i)^T

    def to_json(self):
        return {"kind": "ideal", "s": self.s.to_json(),
                "herm": self.herm.to_json(),
                "multipliers": [A.to_json() for A in self.left_factors]}

    @classmethod
    def from_json(cls, data):
        return cls(SOSCert.from_json(data["s"]),
                   HermSOSCert.from_json(data["herm"]),
                   [MatPoly.from_json(A) for A in data["multipliers"]])


@dataclass
class Mismatch:
    entry: tuple
    monomial: tuple
    got: Fraction
    want: Fraction

    def __str__(self):
        return (f"entry {self.entry}, monomial {self.monomial}: "
                f"lhs {self.got} != rhs {self.want}")


@dataclass
class VerifyResult:
    ok: bool
    mismatch: Optional[Mismatch] = None

    def __bool__(self):
        return self.ok

    def to_json(self):
        if self.ok:
            return {"verified": True}
        return {"verified": False,
                "entry": list(self.mismatch.entry),
                "monomial": list(self.mismatch.monomial),
                "lhs": str(self.mismatch.got),
                "rhs": str(self.mismatch.want)}


def _first_mismatch(L: MatPoly, Rm: MatPoly) -> Optional[Mismatch]:
    for i in range(L.n):
        for j in range(L.n):
            a, b = L.entries[i][j], Rm.entries[i][j]
            if a == b:
                continue
            monos = sorted(set(a.terms) | set(b.terms),
                           key=lambda m: (sum(m), m))
            for m in monos:
                ca, cb = a.coefficient(m), b.coefficient(m)
                if ca != cb:
                    return Mismatch((i, j), m, ca, cb)
    return None


def _verify_identity(lhs: MatPoly, rhs: MatPoly) -> VerifyResult:
    mism = _first_mismatch(lhs, rhs)
    return VerifyResult(mism is None, mism)


def _shapes_agree(F: MatPoly, Gs, cert_factors) -> None:
    for G in Gs:
        if G.n != F.n or G.d != F.d:
            raise ShapeMismatch("constraint shape disagrees with target")
    for H in cert_factors:
        if H.n != F.n or H.d != F.d:
            raise ShapeMismatch("hermitian factor shape disagrees with target")


# -- verifiers ----------------------------------------------------------------------


def verify_wqm(F: MatPoly, Gs: Sequence[MatPoly], cert: WQMCert,
               lhs_multiplier: Poly | None = None) -> VerifyResult:
    """Exact check of (1+s) F = I_n + sum H^T H + sum sigma_j G_j.

    ``lhs_multiplier`` replaces (1+s) for certificates whose left side
    carries an arbitrary preordering element.
    """
    Gs = list(Gs)
    if len(cert.g_multipliers) != len(Gs):
        raise ShapeMismatch("one SOS multiplier required per constraint")
    _shapes_agree(F, Gs, cert.herm.factors)
    mult = lhs_multiplier if lhs_multiplier is not None \
        else Poly.one(F.d) + cert.s.expand(F.d)
    lhs = F * mult
    rhs = MatPoly.identity(F.n, F.d) + cert.herm.expand(F.n, F.d)
    for sigma, G in zip(cert.g_multipliers, Gs):
        rhs = rhs + G * sigma.expand(F.d)
    return _verify_identity(lhs, rhs)


def verify_og(F: MatPoly, G: MatPoly, cert: OGCert,
              lhs_multiplier: Poly | None = None) -> VerifyResult:
    """Exact check of (1+s) F = I_n + sum H^T H + t G with signed t."""
    _shapes_agree(F, [G], cert.herm.factors)
    mult = lhs_multiplier if lhs_multiplier is not None \
        else Poly.one(F.d) + cert.s.expand(F.d)
    lhs = F * mult
    rhs = (MatPoly.identity(F.n, F.d) + cert.herm.expand(F.n, F.d)
           + G * cert.g_multiplier)
    return _verify_identity(lhs, rhs)


def verify_ideal(F: MatPoly, Gs: Sequence[MatPoly], cert: IdealCert
                 ) -> VerifyResult:
    """Exact check of (1+s) F = I_n + sum H^T H + sum A_i G_i + (A_i G_i)^T."""
    Gs = list(Gs)
    if len(cert.left_factors) != len(Gs):
        raise ShapeMismatch("one left factor required per generator")
    for A in cert.left_factors:
        if A.n != F.n or A.d != F.d:
            raise ShapeMismatch("left factor shape disagrees with target")
    _shapes_agree(F, Gs, cert.herm.factors)
    lhs = F * (Poly.one(F.d) + cert.s.expand(F.d))
    rhs = MatPoly.identity(F.n, F.d) + cert.herm.expand(F.n, F.d)
    for A, G in zip(cert.left_factors, Gs):
        AG = A * G
        rhs = rhs + AG + AG.transpose()
    return _verify_identity(lhs, rhs)


# -- SOS algebra helpers --------------------------------------------------------------


def sos_mul(a: list, b: list) -> list:
    """Square list of the product (sum a_i^2)(sum b_j^2) = sum (a_i b_j)^2."""
    return [ai * bj for ai in a for bj in b]


def sos_one_plus(a: list, d: int) -> list:
    """Square list of 1 + sum a_i^2."""
    return [Poly.one(d)] + list(a)


def sos_as_herm(a: list, n: int, d: int) -> list:
    """(sum a_i^2) I_n as hermitian squares a_i I_n."""
    return [MatPoly.identity(n, d) * ai for ai in a]


def sos_times_herm(a: list, Hs: list) -> list:
    """(sum a_i^2)(sum H^T H) as hermitian squares (a_i H)."""
    return [H * ai for ai in a for H in Hs]


# -- combinators -----------------------------------------------------------------------


def htrick_combine(F: MatPoly, Gs: Sequence[MatPoly], t_cert: SOSCert,
                   cert_for_tF: WQMCert, h_cert) -> WQMCert:
    """Turn a certificate for t F (t SOS) into one for (1+s) F.

    ``h_cert`` is a pair (h: SOSCert, K: HermSOSCert) with
    h I_n + F = sum K^T K.  Writing u = 1 + (1+h) t and s = (1+h) u^2,
    three rewriting steps (multiply by 1+h and add F, multiply by u,
    multiply by 1+h and add F again) give the output identity; each
    input and the output are verified exactly.
    """
    Gs = list(Gs)
    d, n = F.d, F.n
    h_sos, K_herm = h_cert
    t = t_cert.expand(d)
    h = h_sos.expand(d)

    if not verify_wqm(F, Gs, cert_for_tF, lhs_multiplier=t):
        raise DecompositionError("input certificate for t F fails")
    hIF = MatPoly.identity(n, d) * h + F
    if hIF != K_herm.expand(n, d):
        raise DecompositionError("input certificate for h I + F fails")

    one = Poly.one(d)
    u = one + (one + h) * t
    u_list = [one] + list(t_cert.squares) \
        + sos_mul(h_sos.squares, t_cert.squares)      # u = 1 + t + h t
    s_list = [u] + [q * u for q in h_sos.squares]     # s = (1+h) u^2
    one_plus_h = sos_one_plus(h_sos.squares, d)
    # (1+h)(u-1) = (1+h)^2 t
    hu1_list = sos_mul(sos_mul(one_plus_h, one_plus_h), t_cert.squares)
    # (1+h) u and u (1+h)^2
    hu_list = sos_mul(one_plus_h, u_list)
    uh2_list = sos_mul(sos_mul(one_plus_h, one_plus_h), u_list)

    herm = (list(K_herm.factors)
            + sos_as_herm(hu1_list, n, d)
            + sos_times_herm(hu_list, K_herm.factors)
            + sos_times_herm(uh2_list, cert_for_tF.herm.factors))
    sigmas = [SOSCert(sos_mul(uh2_list, sig.squares))
              for sig in cert_for_tF.g_multipliers]
    out = WQMCert(SOSCert(s_list), HermSOSCert(herm), sigmas)
    res = verify_wqm(F, Gs, out)
    if not res:
        raise DecompositionError(f"combined certificate fails: {res.mismatch}")
    return out


@dataclass
class PencilCert:
    """(1+s') F - (1+t') G = I_n + sum H^T H, all data explicit."""

    s_prime: SOSCert
    t_prime: SOSCert
    herm: HermSOSCert

    def verify(self, F: MatPoly, G: MatPoly) -> VerifyResult:
        d = F.d
        one = Poly.one(d)
        lhs = F * (one + self.s_prime.expand(d)) \
            - G * (one + self.t_prime.expand(d))
        rhs = MatPoly.identity(F.n, d) + self.herm.expand(F.n, d)
        return _verify_identity(lhs, rhs)


def btoa_transform(F: MatPoly, G: MatPoly, cert3: PencilCert) -> OGCert:
    """Lift a pencil certificate to the augmented pair.

    From (1+s') F - (1+t') G = I_n + W the lifted identity
    (1+s') (F + 0) = I_{n+1} + (W + z) + p (G + -1) holds with
    p = 1 + z and z = t'; block-embedding the factors keeps everything
    a hermitian square.  Verified against F+0, G+(-1).
    """
    res = cert3.verify(F, G)
    if not res:
        raise DecompositionError(f"pencil certificate fails: {res.mismatch}")
    n, d = F.n, F.d
    from .matpoly import direct_sum

    zero = Poly.zero(d)
    herm = [direct_sum(H, zero) for H in cert3.herm.factors]
    for b in cert3.t_prime.squares:
        herm.append(direct_sum(MatPoly.zero(n, d), b))
    p = Poly.one(d) + cert3.t_prime.expand(d)
    out = OGCert(cert3.s_prime, HermSOSCert(herm), p)
    Ft = direct_sum(F, zero)
    Gt = direct_sum(G, Poly.constant(d, -1))
    chk = verify_og(Ft, Gt, out)
    if not chk:
        raise DecompositionError(f"lifted certificate fails: {chk.mismatch}")
    return out


def btoa_invert(F: MatPoly, G: MatPoly, lifted: OGCert) -> PencilCert:
    """Split a lifted certificate back into pencil form.

    Requires the hermitian part to be block diagonal in total (top-left
    n x n plus a scalar) and the bottom-right identity p = 1 + z to hold
    exactly.
    """
    from .matpoly import direct_sum

    n, d = F.n, F.d
    zero = Poly.zero(d)
    Ft = direct_sum(F, zero)
    Gt = direct_sum(G, Poly.constant(d, -1))
    res = verify_og(Ft, Gt, lifted)
    if not res:
        raise DecompositionError(f"lifted certificate fails: {res.mismatch}")
    total = lifted.herm.expand(n + 1, d)
    for i in range(n):
        if not total.entries[i][n].is_zero():
            raise ShapeMismatch("lifted certificate lacks block structure")
    z = total.entries[n][n]
    if lifted.g_multiplier != Poly.one(d) + z:
        raise ShapeMismatch("bottom-right multiplier is not 1 + z")

    w_factors = []
    z_squares: list = []
    for H in lifted.herm.factors:
        # split columns: first n give W contributions, last gives z
        rows = H.entries
        for r in range(n + 1):
            row_main = list(rows[r][:n])
            if any(not e.is_zero() for e in row_main):
                emb = [[Poly.zero(d)] * n for _ in range(n)]
                emb[0] = row_main
                w_factors.append(MatPoly(emb, d=d))
            if not rows[r][n].is_zero():
                z_squares.append(rows[r][n])
    cert = PencilCert(lifted.s, SOSCert(z_squares), HermSOSCert(w_factors))
    chk = cert.verify(F, G)
    if not chk:
        raise DecompositionError(f"split certificate fails: {chk.mismatch}")
    return cert


@dataclass
class DenominatorCert:
    """(1+s1) q^2 = 1 + t with s1, t SOS."""

    s1: SOSCert
    t: SOSCert

    def verify(self, q: Poly) -> bool:
        one = Poly.one(q.d)
        return (one + self.s1.expand(q.d)) * (q * q) == one + self.t.expand(q.d)


@dataclass
class NumeratorCert:
    """(1+s2)(q^2 F - p q G) = I_n + sum V^T V."""

    s2: SOSCert
    herm: HermSOSCert

    def verify(self, F: MatPoly, G: MatPoly, p: Poly, q: Poly) -> VerifyResult:
        d = F.d
        one = Poly.one(d)
        H = F * (q * q) - G * (p * q)
        lhs = H * (one + self.s2.expand(d))
        rhs = MatPoly.identity(F.n, d) + self.herm.expand(F.n, d)
        return _verify_identity(lhs, rhs)


def rational_to_certificate(F: MatPoly, G: MatPoly, p: Poly, q: Poly,
                            cert_q: DenominatorCert,
                            cert_H: NumeratorCert) -> OGCert:
    """Certificate for (1+t)(1+s2) F in I_n + signed module from r = p/q.

    Expanding (1+s1) q^2 (1+s2) F through the numerator identity gives
    (1+t)(1+s2) F = I_n + [s1 I + (1+s1) sum V^T V]
                        + (1+s1)(1+s2) p q G,
    which is already of (1+s) F shape since (1+t)(1+s2) = 1 + SOS.
    """
    if not cert_q.verify(q):
        raise DecompositionError("denominator certificate fails")
    res = cert_H.verify(F, G, p, q)
    if not res:
        raise DecompositionError(f"numerator certificate fails: {res.mismatch}")
    d, n = F.d, F.n
    one = Poly.one(d)
    t_list = cert_q.t.squares
    s2_list = cert_H.s2.squares
    s_list = list(t_list) + list(s2_list) + sos_mul(t_list, s2_list)
    one_plus_s1 = sos_one_plus(cert_q.s1.squares, d)
    herm = (sos_as_herm(cert_q.s1.squares, n, d)
            + sos_times_herm(one_plus_s1, cert_H.herm.factors))
    s1 = cert_q.s1.expand(d)
    s2 = cert_H.s2.expand(d)
    mult = (one + s1) * (one + s2) * p * q
    out = OGCert(SOSCert(s_list), HermSOSCert(herm), mult)
    chk = verify_og(F, G, out)
    if not chk:
        raise DecompositionError(f"combined certificate fails: {chk.mismatch}")
    return out


# -- archimedean chain ------------------------------------------------------------------


@dataclass
class NGMembership:
    """target = sum H^T H + sigma G, an exact membership in the module."""

    target: MatPoly
    herm: HermSOSCert
    sigma: SOSCert

    def verify(self, G: MatPoly) -> VerifyResult:
        rhs = self.herm.expand(G.n, G.d) + G * self.sigma.expand(G.d)
        return _verify_identity(self.target, rhs)


@dataclass
class BallCert:
    """f (I_n + Q) = I_n + sum H^T H + sigma G with Q = sum Q_l^T Q_l."""

    Q_factors: HermSOSCert
    herm: HermSOSCert
    sigma: SOSCert

    def Q(self, n: int, d: int) -> MatPoly:
        if not self.Q_factors.factors:
            return MatPoly.zero(n, d)
        return self.Q_factors.expand(n, d)

    def verify(self, G: MatPoly, f: Poly) -> VerifyResult:
        n, d = G.n, G.d
        lhs = (MatPoly.identity(n, d) + self.Q(n, d)) * f
        rhs = (MatPoly.identity(n, d) + self.herm.expand(n, d)
               + G * self.sigma.expand(d))
        return _verify_identity(lhs, rhs)


@dataclass
class QBoundCert:
    """q I_n - Q = sum K^T K with q SOS."""

    q: SOSCert
    herm: HermSOSCert


@dataclass
class ArchData:
    """m - 1 - q = s0 + s1 f over the ball preordering."""

    m: int
    s0: SOSCert
    s1: SOSCert


@dataclass
class ProductCert:
    """(1+s)((1+q) I_n - Q)(I_n + Q) = I_n + sum M^T M."""

    s: SOSCert
    herm: HermSOSCert


@dataclass
class ChainCert:
    """Composed archimedean certificate with every intermediate retained."""

    R: Fraction
    m: int
    steps: dict                  # label -> NGMembership
    final: NGMembership

    def to_json(self):
        return {"kind": "chain", "R": str(self.R), "m": self.m,
                "final_target": self.final.target.to_json(),
                "herm": self.final.herm.to_json(),
                "multipliers": self.final.sigma.to_json(),
                "provenance": {k: v.target.to_json()
                               for k, v in self.steps.items()}}


def wormann_chain(G: MatPoly, R, ball_cert: BallCert, qbound: QBoundCert,
                  arch: ArchData, prod_cert: ProductCert) -> ChainCert:
    """Compose the archimedean chain from ball data, exactly.

    Inputs certify, for f = R^2 - |x|^2:
      step 1:  f (I_n + Q) = I_n + sum H^T H + sigma G
      q-bound: q I_n - Q = sum K^T K, q SOS
      arch:    m - 1 - q = s0 + s1 f
      step 3:  (1+s)((1+q) I_n - Q)(I_n + Q) = I_n + sum M^T M
    and the composer derives memberships for the remaining steps through
    step 7, (1+s)(R^2 (m/2+1)^2 - |x|^2) I_n in the module, re-verifying
    each one and reporting the first step that breaks.
    """
    from .poly import norm_sq_poly

    n, d = G.n, G.d
    one = Poly.one(d)
    Rq = as_fraction(R)
    f = Poly.constant(d, Rq * Rq) - norm_sq_poly(d)
    Q = ball_cert.Q(n, d)
    q = qbound.q.expand(d)
    I = MatPoly.identity(n, d)

    chk = ball_cert.verify(G, f)
    if not chk:
        raise DecompositionError(f"eq1 fails: {chk.mismatch}")
    if I * q - Q != qbound.herm.expand(n, d):
        raise DecompositionError("q-bound certificate fails")
    if Poly.constant(d, arch.m) - one - q != \
            arch.s0.expand(d) + arch.s1.expand(d) * f:
        raise DecompositionError("archimedean split m - 1 - q fails")
    prod_lhs = ((I * (one + q) - Q) * (I + Q)) * (one + prod_cert.s.expand(d))
    if prod_lhs != I + prod_cert.herm.expand(n, d):
        raise DecompositionError("eq3 fails")

    steps: dict = {}
    s0_list, s1_list = arch.s0.squares, arch.s1.squares
    s_list = prod_cert.s.squares
    one_plus_s = sos_one_plus(s_list, d)
    IQ_factors = [I] + list(ball_cert.Q_factors.factors)   # I_n + Q

    # step 2: (m - 1 - q)(I_n + Q) = s0 (I+Q) + s1 [I + sum H^T H + sigma G]
    herm2 = (sos_times_herm(s0_list, IQ_factors)
             + sos_as_herm(s1_list, n, d)
             + sos_times_herm(s1_list, ball_cert.herm.factors))
    sigma2 = SOSCert(sos_mul(s1_list, ball_cert.sigma.squares))
    eq2 = NGMembership((I + Q) * (Poly.constant(d, arch.m) - one - q),
                       HermSOSCert(herm2), sigma2)
    _require(eq2, G, "eq2")
    steps["eq2"] = eq2

    # step 4: (1+s)(m I_n - Q)(I_n + Q) = I + sum M^T M + (1+s) * eq2 data
    herm4 = ([I] + list(prod_cert.herm.factors)
             + sos_times_herm(one_plus_s, herm2))
    sigma4 = SOSCert(sos_mul(one_plus_s, sigma2.squares))
    eq4 = NGMembership(((I * arch.m - Q) * (I + Q)) * (one + prod_cert.s.expand(d)),
                       HermSOSCert(herm4), sigma4)
    _require(eq4, G, "eq4")
    steps["eq4"] = eq4

    # step 5: add (1+s)(m/2 I_n - Q)^2
    half_m = I * Fraction(arch.m, 2) - Q
    herm5 = herm4 + sos_times_herm(one_plus_s, [half_m])
    mm = Fraction(arch.m * arch.m, 4) + arch.m
    eq5 = NGMembership((I * mm - Q) * (one + prod_cert.s.expand(d)),
                       HermSOSCert(herm5), sigma4)
    _require(eq5, G, "eq5")
    steps["eq5"] = eq5

    # steps 6 and 7: R^2 eq5 + (1+s) f (I+Q) + (1+s)|x|^2 Q collapses to
    # (1+s)(R^2 (m/2+1)^2 - |x|^2) I_n
    xs = [Poly.variable(i, d) for i in range(d)]
    herm7 = ([H * Rq for H in herm5]
             + sos_as_herm(one_plus_s, n, d)
             + sos_times_herm(one_plus_s, ball_cert.herm.factors)
             + sos_times_herm(sos_mul(one_plus_s, xs),
                              ball_cert.Q_factors.factors))
    sigma7 = SOSCert(sos_mul([Poly.constant(d, Rq)], sigma4.squares)
                     + sos_mul(one_plus_s, ball_cert.sigma.squares))
    target7 = I * ((Poly.constant(d, Rq * Rq * (Fraction(arch.m, 2) + 1) ** 2)
                    - norm_sq_poly(d)) * (one + prod_cert.s.expand(d)))
    eq7 = NGMembership(target7, HermSOSCert(herm7), sigma7)
    _require(eq7, G, "eq7")
    steps["eq7"] = eq7
    return ChainCert(Rq, arch.m, steps, eq7)


def _require(step: NGMembership, G: MatPoly, label: str) -> None:
    res = step.verify(G)
    if not res:
        raise DecompositionError(f"{label} fails: {res.mismatch}")


# -- bounded preordering ledger ------------------------------------------------------


@dataclass
class LedgerEntry:
    poly: Poly
    provenance: dict

    def to_json(self):
        return {"poly": self.poly.to_json(), "provenance": _prov_json(self.provenance)}


def _prov_json(node):
    out = {"op": node["op"]}
    if "base" in node:
        out["base"] = node["base"].to_json()
    if "parts" in node:
        out["parts"] = [_prov_json(p) for p in node["parts"]]
    if "s" in node:
        out["s"] = _prov_json(node["s"])
    if "t_refs" in node:
        out["t_refs"] = [_prov_json(p) for p in node["t_refs"]]
    if "sos_lists" in node:
        out["sos_lists"] = [[q.to_json() for q in lst] for lst in node["sos_lists"]]
    return out


@dataclass
class TGLedger:
    levels: list                 # list of list[LedgerEntry]
    complete: bool
    G: MatPoly

    def all_entries(self):
        return [e for lvl in self.levels for e in lvl]


def verify_ledger_entry(entry: LedgerEntry, G: MatPoly) -> bool:
    """Re-derive the entry polynomial from its provenance tree."""
    try:
        return _prov_value(entry.provenance, G) == entry.poly
    except DecompositionError:
        return False


def _prov_value(node: dict, G: MatPoly) -> Poly:
    op = node["op"]
    if op == "seed_square":
        b = node["base"]
        return b * b
    if op == "sum":
        total = Poly.zero(G.d)
        for part in node["parts"]:
            total = total + _prov_value(part, G)
        return total
    if op == "product":
        total = Poly.one(G.d)
        for part in node["parts"]:
            total = total * _prov_value(part, G)
        return total
    if op == "module_combo":
        # z I_n = sum over diag entries: t_i + s g_i with per-entry SOS t_i
        s = _prov_value(node["s"], G)
        t_lists = node["sos_lists"]
        if len(t_lists) != G.n:
            raise DecompositionError("one t list per diagonal entry required")
        z = None
        for i, lst in enumerate(t_lists):
            gi = G.entries[i][i]
            ti = Poly.zero(G.d)
            for qpoly in lst:
                ti = ti + qpoly * qpoly
            zi = ti + s * gi
            if z is None:
                z = zi
            elif z != zi:
                raise DecompositionError("entries disagree: not a scalar matrix")
        for i in range(G.n):
            for j in range(G.n):
                if i != j and not G.entries[i][j].is_zero():
                    raise DecompositionError("module combo needs diagonal G")
        return z
    raise DecompositionError(f"unknown provenance op {op!r}")


def _sos_quadratic_split(p: Poly):
    """Exact square list for a univariate quadratic (or constant) >= 0.

    a x^2 + b x + c with a > 0 and b^2 <= 4 a c splits as
    a (x + b/2a)^2 + (c - b^2/4a), constants via four squares.
    Returns None when p is not a nonnegative quadratic.
    """
    if p.is_zero():
        return []
    if p.d != 1 or p.degree() > 2:
        return None
    c = p.coefficient((0,))
    b = p.coefficient((1,))
    a = p.coefficient((2,)) if p.degree() == 2 else Fraction(0)
    if a == 0:
        if b != 0 or c < 0:
            return None
        try:
            return [Poly.constant(1, r) for r in rational_as_square_list(c)]
        except ValueError:
            return None
    if a < 0 or b * b > 4 * a * c:
        return None
    x = Poly.variable(0, 1)
    lead = x + Poly.constant(1, b / (2 * a))
    try:
        scale = rational_as_square_list(a)
        rest = rational_as_square_list(c - b * b / (4 * a))
    except ValueError:
        return None
    return [lead * r for r in scale] + [Poly.constant(1, r) for r in rest]


def tg_ledger_build(G: MatPoly, deg_cap: int = 8, iter_cap: int = 3,
                    width_cap: int = 2, level_cap: int = 64) -> TGLedger:
    """Bounded enumeration of certified scalars of the weak preordering.

    Level 0 seeds squares of the monomial basis up to deg_cap/2.  Each
    later level searches a diagonal ansatz: scalars z with
    z = t_i + s g_i for every diagonal entry g_i, with one SOS s drawn
    from the previous level and per-entry SOS t_i built by exact
    quadratic completion; the level then closes under products of width
    up to width_cap within the degree cap.  Non-diagonal or multivariate
    constraints keep the seed level only and mark the ledger incomplete.
    """
    if deg_cap < 0 or iter_cap < 0 or width_cap < 0:
        raise ValueError("caps must be nonnegative")
    d = G.d
    seed = []
    for e in range(deg_cap // 2 + 1):
        if d == 1:
            base = Poly(1, {(e,): 1})
        else:
            base = Poly(d, {tuple(e if i == 0 else 0 for i in range(d)): 1})
        seed.append(LedgerEntry(base * base, {"op": "seed_square", "base": base}))
    levels = [seed]
    complete = True

    diagonal = all(G.entries[i][j].is_zero()
                   for i in range(G.n) for j in range(G.n) if i != j)
    if not diagonal or d != 1 or width_cap == 0 or iter_cap == 0:
        if iter_cap > 0 and width_cap > 0:
            complete = False
        return TGLedger(levels, complete, G)

    gs = [G.entries[i][i] for i in range(G.n)]
    shifts = _combo_shifts()
    for _ in range(iter_cap):
        prev = levels[-1]
        found: list[LedgerEntry] = []
        seen = {e.poly for lvl in levels for e in lvl}
        for base_entry in prev:
            for shift in shifts:
                combo = _try_module_combo(gs, base_entry, shift, deg_cap)
                if combo is None:
                    continue
                z, prov = combo
                if z in seen:
                    continue
                seen.add(z)
                found.append(LedgerEntry(z, prov))
                if len(found) >= level_cap:
                    complete = False
                    break
            if len(found) >= level_cap:
                break
        # close under bounded products
        prods: list[LedgerEntry] = []
        pool = found + prev
        if width_cap >= 2:
            for i, e1 in enumerate(found):
                for e2 in pool[: level_cap]:
                    z = e1.poly * e2.poly
                    if z.degree() > deg_cap or z in seen:
                        continue
                    seen.add(z)
                    prods.append(LedgerEntry(
                        z, {"op": "product",
                            "parts": [e1.provenance, e2.provenance]}))
        new_level = found + prods
        if not new_level:
            break
        levels.append(new_level)
    return TGLedger(levels, complete, G)


def _combo_shifts():
    """Small (u, v, w) with u v >= w^2 / 4: the quadratic completions exist."""
    out = []
    for u in (Fraction(1), Fraction(2)):
        for v in (Fraction(1), Fraction(2), Fraction(1, 2)):
            for w in (Fraction(1), Fraction(2), Fraction(0)):
                if w * w <= 4 * u * v:
                    out.append((u, v, w))
    return out


def _try_module_combo(gs, base_entry: LedgerEntry, shift, deg_cap: int):
    """Attempt z = ((u + v x)^2 + w^2 g_ref) * base with every entry certified.

    With s = w^2 base, the per-entry remainders are
    t_i = (lead^2 + w^2 (g_ref - g_i)) * base; each parenthesis must
    split exactly as a nonnegative quadratic, and base must expose a
    polynomial square root so the lists stay genuine square lists.
    """
    u, v, w = shift
    root = _square_root_of_entry(base_entry)
    if root is None:
        return None
    base = base_entry.poly
    x = Poly.variable(0, 1)
    lead = Poly.constant(1, u) + x * v
    g_ref = gs[-1]
    z = (lead * lead + g_ref * (w * w)) * base
    if z.degree() > deg_cap:
        return None
    t_lists = []
    for gi in gs:
        quad = lead * lead + (g_ref - gi) * (w * w)
        split = _sos_quadratic_split(quad)
        if split is None:
            return None
        t_lists.append([qq * root for qq in split])
    w_poly = Poly.constant(1, w)
    s_prov = {"op": "product",
              "parts": [{"op": "seed_square", "base": w_poly},
                        base_entry.provenance]}
    prov = {"op": "module_combo", "s": s_prov, "sos_lists": t_lists}
    return z, prov


def _square_root_of_entry(entry: LedgerEntry):
    prov = entry.provenance
    if prov["op"] == "seed_square":
        return prov["base"]
    if prov["op"] == "product":
        roots = [_square_root_of_entry(LedgerEntry(None, p))
                 for p in prov["parts"]]
        if any(r is None for r in roots):
            return None
        total = roots[0]
        for r in roots[1:]:
            total = total * r
        return total
    return None


def parity_invariant_check(z: Poly, t1: LedgerEntry, t2: LedgerEntry,
                           s: LedgerEntry, G: MatPoly) -> bool:
    """Check the induction invariant for the scaled-pair constraint.

    The decomposition z = t1 + 2x s = t2 + x s (with certified t1, t2,
    s) must reproduce z exactly; the invariant itself is that z has even
    degree and positive leading coefficient.  A failed exact check
    raises; an odd degree or nonpositive leading coefficient returns
    False.
    """
    x = Poly.variable(0, 1)
    for entry in (t1, t2, s):
        if not verify_ledger_entry(entry, G):
            raise DecompositionError("ledger element fails its provenance")
    if z != t1.poly + 2 * x * s.poly:
        raise DecompositionError("z != t1 + 2 x s")
    if z != t2.poly + x * s.poly:
        raise DecompositionError("z != t2 + x s")
    if z.is_zero():
        return True
    deg = int(z.degree())
    return deg % 2 == 0 and z.leading_coefficient() > 0
