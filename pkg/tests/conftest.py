"""Shared generators: random polynomials, planted certificates, and the
fixture families used by the combinator and acceptance tests."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from finslerpoly import MatPoly, Poly
from finslerpoly.certs import (ArchData, BallCert, DenominatorCert,
                               HermSOSCert, IdealCert, NumeratorCert, OGCert,
                               PencilCert, ProductCert, QBoundCert, SOSCert,
                               WQMCert, sos_as_herm, sos_mul, sos_times_herm)


def rand_poly(rng, d=1, deg=2, lo=-3, hi=3) -> Poly:
    terms = {}
    if d == 1:
        for k in range(deg + 1):
            c = int(rng.integers(lo, hi + 1))
            if c:
                terms[(k,)] = c
    else:
        for _ in range(deg + 2):
            mono = tuple(int(rng.integers(0, deg + 1)) for _ in range(d))
            if sum(mono) <= deg:
                c = int(rng.integers(lo, hi + 1))
                if c:
                    terms[mono] = terms.get(mono, 0) + c
    return Poly(d, terms)


def rand_sym_matpoly(rng, n=2, d=1, deg=2) -> MatPoly:
    ent = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            p = rand_poly(rng, d, deg)
            ent[i][j] = p
            ent[j][i] = p
    return MatPoly(ent, d=d)


def rand_sos(rng, d=1, deg=1, count=2) -> SOSCert:
    return SOSCert([rand_poly(rng, d, deg) for _ in range(count)])


def rand_matpoly(rng, n=2, d=1, deg=1) -> MatPoly:
    return MatPoly([[rand_poly(rng, d, deg) for _ in range(n)]
                    for _ in range(n)], d=d)


# -- planted direct certificates ------------------------------------------------


def planted_wqm(rng, n=2, d=1, n_constraints=1):
    """(F, Gs, cert) with (1+s) F = I + [s I + (1+s) W0] + (1+s) sigma G."""
    Gs = [rand_sym_matpoly(rng, n, d) for _ in range(n_constraints)]
    A = [rand_matpoly(rng, n, d) for _ in range(2)]
    sigmas0 = [rand_sos(rng, d, 1, 1) for _ in range(n_constraints)]
    F = MatPoly.identity(n, d) + HermSOSCert(A).expand(n, d)
    for G, sig in zip(Gs, sigmas0):
        F = F + G * sig.expand(d)
    s = rand_sos(rng, d, 1, 1)
    one_plus_s = [Poly.one(d)] + s.squares
    herm = sos_as_herm(s.squares, n, d) + sos_times_herm(one_plus_s, A)
    sigmas = [SOSCert(sos_mul(one_plus_s, sig.squares)) for sig in sigmas0]
    return F, Gs, WQMCert(s, HermSOSCert(herm), sigmas)


def planted_og(rng, n=2, d=1):
    """(F, G, cert) for the signed-multiplier form."""
    G = rand_sym_matpoly(rng, n, d)
    A = [rand_matpoly(rng, n, d) for _ in range(2)]
    t0 = rand_poly(rng, d, 2)          # arbitrary sign
    F = MatPoly.identity(n, d) + HermSOSCert(A).expand(n, d) + G * t0
    s = rand_sos(rng, d, 1, 1)
    one_plus_s = [Poly.one(d)] + s.squares
    herm = sos_as_herm(s.squares, n, d) + sos_times_herm(one_plus_s, A)
    mult = (Poly.one(d) + s.expand(d)) * t0
    return F, G, OGCert(s, HermSOSCert(herm), mult)


def planted_ideal(rng, n=2, d=1, n_gens=2):
    """(F, Gs, cert) for the left-ideal form."""
    Gs = [rand_matpoly(rng, n, d) for _ in range(n_gens)]
    A0 = [rand_matpoly(rng, n, d, deg=1) for _ in range(n_gens)]
    H0 = [rand_matpoly(rng, n, d) for _ in range(2)]
    base = MatPoly.identity(n, d) + HermSOSCert(H0).expand(n, d)
    for A, G in zip(A0, Gs):
        AG = A * G
        base = base + AG + AG.transpose()
    F = base
    s = rand_sos(rng, d, 1, 1)
    one_plus_s = [Poly.one(d)] + s.squares
    herm = sos_as_herm(s.squares, n, d) + sos_times_herm(one_plus_s, H0)
    one_plus_s_poly = Poly.one(d) + s.expand(d)
    lefts = [A * one_plus_s_poly for A in A0]
    return F, Gs, IdealCert(s, HermSOSCert(herm), lefts)


# -- combinator input fixtures ----------------------------------------------------


def htrick_fixture(rng, n=2, d=1):
    """Inputs (F, Gs, t_cert, cert_tF, h_cert) that verify exactly.

    Built around F = I + W0 with W0 = sum A^T A + sigma G and t = 1 + s_t,
    so t F = I + [s_t I + t W0-data]; the bound h = sigma (g1^2 + g2^2 + 1/4)
    makes h I + F a sum of diagonal squares plus the A factors.
    """
    x0 = Poly.variable(0, d)
    g1 = rand_poly(rng, d, 1)
    g2 = rand_poly(rng, d, 1)
    G = MatPoly.diag([g1, g2])
    sigma = SOSCert([rand_poly(rng, d, 1)])
    A = [rand_matpoly(rng, n, d, deg=1)]
    F = MatPoly.identity(n, d) + HermSOSCert(A).expand(n, d) + G * sigma.expand(d)
    s_t = SOSCert([rand_poly(rng, d, 1)])
    t_cert = SOSCert([Poly.one(d)] + s_t.squares)
    one_plus_st = [Poly.one(d)] + s_t.squares
    herm_tF = HermSOSCert(sos_as_herm(s_t.squares, n, d)
                          + sos_times_herm(one_plus_st, A))
    sig_tF = SOSCert(sos_mul(one_plus_st, sigma.squares))
    cert_tF = WQMCert(SOSCert([]), herm_tF, [sig_tF])

    half = Poly.constant(d, Fraction(1, 2))
    h_sos = SOSCert(sos_mul(sigma.squares, [g1, g2, half]))
    K = []
    for i, (gi, go) in enumerate(((g1, g2), (g2, g1))):
        for c in sigma.squares:
            K.append(MatPoly.elementary(i, i, n, d) * (c * (gi + half)))
            K.append(MatPoly.elementary(i, i, n, d) * (c * go))
        K.append(MatPoly.elementary(i, i, n, d))
    K += A
    return F, [G], t_cert, cert_tF, (h_sos, HermSOSCert(K))


def btoa_fixture(rng, n=2, d=1):
    """(F, G, cert3) with (1+s') F - (1+t') G = I + sum H^T H exact."""
    s_prime = SOSCert([rand_poly(rng, d, 1)])
    t0 = SOSCert([rand_poly(rng, d, 1)])
    B = [rand_matpoly(rng, n, d, deg=1)]
    G = rand_sym_matpoly(rng, n, d, deg=1)
    one = Poly.one(d)
    # F = I + sum B^T B + (1 + t0) G  =>  (1+s')F - (1+s')(1+t0)G = (1+s')(I + W)
    F = MatPoly.identity(n, d) + HermSOSCert(B).expand(n, d) \
        + G * (one + t0.expand(d))
    sp = s_prime.squares
    t_prime = SOSCert(sp + t0.squares + sos_mul(sp, t0.squares))
    herm = HermSOSCert(list(B) + sos_times_herm(sp, B)
                       + sos_as_herm(sp, n, d))
    return F, G, PencilCert(s_prime, t_prime, herm)


def rational_cert_fixture(rng, n=2, d=1):
    """(F, G, p, q, cert_q, cert_H) for the rational-witness combinator.

    Divisibility plant: q = 1 + g^2 and p = q p0 keep
    q^2 F - p q G = q^2 (I + sum U^T U) polynomial with
    F = I + sum U^T U + p0 G; the q^2 I block splits through
    q^2 - 1 = g^2 (g^2 + 2) = (g^2)^2 + g^2 + g^2.
    """
    one = Poly.one(d)
    G = rand_sym_matpoly(rng, n, d, deg=1)
    U = [rand_matpoly(rng, n, d, deg=1)]
    s2 = SOSCert([rand_poly(rng, d, 1)])
    one_plus_s2 = [one] + s2.squares
    g = rand_poly(rng, d, 1)
    q = one + g * g
    p0 = rand_poly(rng, d, 1)
    p = q * p0
    F = MatPoly.identity(n, d) + HermSOSCert(U).expand(n, d) + G * p0
    q2m1 = [g * g, g, g]
    herm = (sos_as_herm(sos_mul(one_plus_s2, q2m1), n, d)
            + sos_as_herm(s2.squares, n, d)
            + sos_times_herm(sos_mul(one_plus_s2, [q]), U))
    cert_H = NumeratorCert(s2, HermSOSCert(herm))
    s1 = SOSCert([rand_poly(rng, d, 1)])
    t = SOSCert(q2m1 + [a * q for a in s1.squares])
    cert_q = DenominatorCert(s1, t)
    return F, G, p, q, cert_q, cert_H


def wormann_fixture(rng, n=2, d=1, R=2):
    """(G, R, ball, qbound, arch, prod) with diagonal SOS Q."""
    one = Poly.one(d)
    x0 = Poly.variable(0, d)
    a = [int(rng.integers(0, 3)) for _ in range(n)]
    b = [int(rng.integers(0, 2)) for _ in range(n)]
    q_entries = [Poly.constant(d, a[i] * a[i]) + (x0 * b[i]) * (x0 * b[i])
                 for i in range(n)]
    Q_factors = []
    for i in range(n):
        if a[i]:
            Q_factors.append(MatPoly.elementary(i, i, n, d) * a[i])
        if b[i]:
            Q_factors.append(MatPoly.elementary(i, i, n, d) * (x0 * b[i]))
    Q = HermSOSCert(Q_factors)
    H = [rand_matpoly(rng, n, d, deg=1)]
    from finslerpoly.poly import norm_sq_poly
    f = Poly.constant(d, R * R) - norm_sq_poly(d)
    QQ = Q.expand(n, d) if Q_factors else MatPoly.zero(n, d)
    G = (MatPoly.identity(n, d) + QQ) * f \
        - MatPoly.identity(n, d) - HermSOSCert(H).expand(n, d)
    ball = BallCert(Q, HermSOSCert(H), SOSCert([one]))
    # q = q1 + ... + qn, q I - Q = diag(q - q_i) with q - q_i the other SOS
    qsq = []
    for i in range(n):
        if a[i]:
            qsq.append(Poly.constant(d, a[i]))
        if b[i]:
            qsq.append(x0 * b[i])
    qb_herm = []
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            if a[j]:
                qb_herm.append(MatPoly.elementary(i, i, n, d) * a[j])
            if b[j]:
                qb_herm.append(MatPoly.elementary(i, i, n, d) * (x0 * b[j]))
    qbound = QBoundCert(SOSCert(qsq), HermSOSCert(qb_herm))
    # m - 1 - q = s0 + s1 f with q = alpha + beta |x|^2 (beta from b only
    # when d == 1); s1 = beta, s0 = m - 1 - alpha - beta R^2
    alpha = sum(ai * ai for ai in a)
    beta = sum(bi * bi for bi in b)
    m = alpha + beta * R * R + 2
    s0_val = Fraction(m - 1 - alpha - beta * R * R)
    from finslerpoly.ratutil import rational_as_square_list
    s0 = SOSCert([Poly.constant(d, r) for r in rational_as_square_list(s0_val)])
    s1 = SOSCert([Poly.constant(d, 1)] * beta if beta <= 1 else
                 [Poly.constant(d, r) for r in rational_as_square_list(Fraction(beta))])
    arch = ArchData(m, s0, s1)
    # eq3: ((1+q) I - Q)(I + Q) is diagonal with entries
    # (1 + q - q_i)(1 + q_i) = 1 + [q - q_i + q_i + q q_i ... ] ; build the
    # SOS split of entry - 1 exactly, entrywise
    prod_herm = []
    for i in range(n):
        entry = (one + qbound.q.expand(d) - q_entries[i]) * (one + q_entries[i])
        rem = entry - one
        split = _diag_entry_sos(rem, rng, d)
        for s in split:
            prod_herm.append(MatPoly.elementary(i, i, n, d) * s)
    prod = ProductCert(SOSCert([]), HermSOSCert(prod_herm))
    return G, R, ball, qbound, arch, prod


def _diag_entry_sos(rem: Poly, rng, d):
    """Exact square list for the planted product entries.

    Entries have the form sum of products of the planted squares, all
    nonnegative combinations of squares of monomials; expand greedily.
    """
    from finslerpoly.ratutil import rational_as_square_list

    out = []
    left = rem
    # greedy peel: largest even-degree terms c * x^(2k) with c > 0
    while not left.is_zero():
        monos = sorted(left.terms, key=lambda m: -sum(m))
        mono = monos[0]
        c = left.terms[mono]
        if any(e % 2 for e in mono) or c < 0:
            raise AssertionError(f"fixture entry not a monomial square sum: {rem}")
        half = tuple(e // 2 for e in mono)
        for r in rational_as_square_list(c):
            out.append(Poly(d, {half: r}))
        left = left - Poly(d, {mono: c})
    return out


# -- planted 2x2 tail-witness instances -------------------------------------------


def planted_2x2_instance(seed: int):
    """Pair satisfying the positive pointwise hypothesis everywhere.

    F = (1+x^2) H + u G with H = c I + L^T L positive definite globally
    and u >= 0, so r* = u / (1+x^2) is a planted positive witness.
    """
    rng = np.random.default_rng(seed)
    x = Poly.variable(0, 1)
    one = Poly.one(1)
    L = MatPoly([[Poly(1, {(0,): int(rng.integers(-2, 3)),
                           (1,): int(rng.integers(-2, 3))})
                  for _ in range(2)] for _ in range(2)], d=1)
    H = MatPoly.identity(2, 1) * int(rng.integers(1, 4)) + L.transpose() * L
    def rp():
        return Poly(1, {(k,): int(rng.integers(-2, 3)) for k in range(3)})
    a, b, c = rp(), rp(), rp()
    G = MatPoly([[a, b], [b, c]], d=1)
    u = Poly(1, {(0,): 1, (2,): int(rng.integers(0, 3))})
    F = (one + x * x) * H + u * G
    return F, G
