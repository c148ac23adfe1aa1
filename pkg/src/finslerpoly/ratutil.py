"""Exact rational helpers: integer square roots, four-square splits,
truncated power series over the rationals, and root bounds."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List


def frac_sqrt(q: Fraction, bits: int = 256) -> Fraction:
    """Rational approximation of sqrt(q) with relative error about 2^-bits."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative radicand")
    if q == 0:
        return Fraction(0)
    num, den = q.numerator, q.denominator
    scale = 1 << bits
    val = math.isqrt(num * den * scale * scale)
    return Fraction(val, den * scale)


def rational_as_square_list(q: Fraction, cap: int = 10 ** 7) -> List[Fraction]:
    """Rationals r_i with sum r_i^2 == q exactly (Lagrange four squares).

    Uses q = (num * den) / den^2 and splits the integer num*den.  Raises
    when the integer exceeds the brute-force cap.
    """
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative value has no square decomposition")
    if q == 0:
        return []
    N = q.numerator * q.denominator
    if N > cap:
        raise ValueError(f"four-square split over cap: {N}")
    a, b, c, d = _four_squares(N)
    return [Fraction(v, q.denominator) for v in (a, b, c, d) if v]


def _four_squares(N: int):
    top = math.isqrt(N)
    for a in range(top, -1, -1):
        r1 = N - a * a
        b_top = math.isqrt(r1)
        for b in range(min(a, b_top), -1, -1):
            r2 = r1 - b * b
            c_top = math.isqrt(r2)
            for c in range(min(b, c_top), -1, -1):
                r3 = r2 - c * c
                d = math.isqrt(r3)
                if d * d == r3 and d <= c:
                    return a, b, c, d
    raise ArithmeticError("four squares must exist")  # pragma: no cover


# -- truncated power series over Q (ascending lists, fixed length) -----------


def ps_trim(a: List[Fraction], J: int) -> List[Fraction]:
    out = list(a[:J])
    out.extend([Fraction(0)] * (J - len(out)))
    return out


def ps_mul(a: List[Fraction], b: List[Fraction], J: int) -> List[Fraction]:
    out = [Fraction(0)] * J
    for i, ai in enumerate(a[:J]):
        if not ai:
            continue
        for j, bj in enumerate(b[: J - i]):
            if bj:
                out[i + j] += ai * bj
    return out


def ps_inv_one_plus(w: List[Fraction], J: int) -> List[Fraction]:
    """1 / (1 + w) with w[0] == 0, to J terms."""
    w = ps_trim(w, J)
    if w and w[0] != 0:
        raise ValueError("series must have zero constant term")
    out = [Fraction(0)] * J
    out[0] = Fraction(1)
    for k in range(1, J):
        acc = Fraction(0)
        for i in range(1, k + 1):
            if w[i]:
                acc += w[i] * out[k - i]
        out[k] = -acc
    return out


def ps_sqrt_one_plus(u: List[Fraction], J: int) -> List[Fraction]:
    """sqrt(1 + u) with u[0] == 0, to J terms; all coefficients rational."""
    u = ps_trim(u, J)
    if u and u[0] != 0:
        raise ValueError("series must have zero constant term")
    t = [Fraction(0)] * J
    t[0] = Fraction(1)
    for k in range(1, J):
        acc = Fraction(0)
        for i in range(1, k):
            acc += t[i] * t[k - i]
        t[k] = (u[k] - acc) / 2
    return t


def cauchy_root_bound(coeffs: List[Fraction]) -> Fraction:
    """1 + max |a_i / a_n| for ascending coefficients; roots lie inside."""
    cs = list(coeffs)
    while cs and cs[-1] == 0:
        cs.pop()
    if not cs:
        raise ValueError("zero polynomial has no root bound")
    lead = cs[-1]
    return 1 + max((abs(c / lead) for c in cs[:-1]), default=Fraction(0))


def limit_denominator_float(x: float, max_den: int = 1 << 40) -> Fraction:
    return Fraction(float(x)).limit_denominator(max_den)


def frac_of_float(x: float) -> Fraction:
    """Exact binary expansion of a float; never collapses small values to 0."""
    return Fraction(float(x))
