"""Exact sparse multivariate polynomials with rational coefficients.

A polynomial in ``d`` variables is a finite map from exponent tuples
(length ``d``, non-negative ints) to nonzero ``fractions.Fraction``
coefficients.  All arithmetic is exact; floating point enters only
through evaluation at float points.  Instances are treated as
immutable: no method mutates ``terms`` after construction.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionMismatch, ParseError

Monomial = tuple  # tuple[int, ...] of length d

NEG_INF = -math.inf


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and 'num/den' strings to Fraction.

    Floats are rejected on purpose: exactness is a package invariant and
    callers that really mean a float must rationalize explicitly.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad rational literal {value!r}") from exc
    raise TypeError(f"expected exact rational, got {type(value).__name__}")


class Poly:
    """Sparse polynomial over the rationals in ``d`` variables."""

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms: Mapping[Monomial, object] | None = None):
        if d < 0:
            raise ValueError("variable count must be >= 0")
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for mono, coef in terms.items():
                mono = tuple(int(e) for e in mono)
                if len(mono) != d:
                    raise DimensionMismatch(
                        f"monomial {mono} has length {len(mono)}, expected {d}")
                if any(e < 0 for e in mono):
                    raise ValueError(f"negative exponent in {mono}")
                c = as_fraction(coef)
                if c != 0:
                    clean[mono] = clean.get(mono, Fraction(0)) + c
            clean = {m: c for m, c in clean.items() if c != 0}
        self.d = d
        self.terms = clean

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, d: int) -> "Poly":
        return cls(d)

    @classmethod
    def constant(cls, d: int, value) -> "Poly":
        return cls(d, {(0,) * d: as_fraction(value)})

    @classmethod
    def one(cls, d: int) -> "Poly":
        return cls.constant(d, 1)

    @classmethod
    def variable(cls, i: int, d: int) -> "Poly":
        if not 0 <= i < d:
            raise DimensionMismatch(f"variable index {i} out of range for d={d}")
        mono = tuple(1 if j == i else 0 for j in range(d))
        return cls(d, {mono: 1})

    @classmethod
    def univariate(cls, coeffs: Iterable) -> "Poly":
        """Univariate polynomial from ascending coefficients."""
        return cls(1, {(k,): c for k, c in enumerate(coeffs)})

    # -- predicates / views ----------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self):
        """Total degree; the zero polynomial reports -inf."""
        if not self.terms:
            return NEG_INF
        return max(sum(m) for m in self.terms)

    def coefficient(self, mono) -> Fraction:
        return self.terms.get(tuple(mono), Fraction(0))

    def leading_coefficient(self) -> Fraction:
        """Coefficient of the highest power; univariate only."""
        if self.d != 1:
            raise DimensionMismatch("leading_coefficient is univariate-only")
        if not self.terms:
            return Fraction(0)
        top = max(m[0] for m in self.terms)
        return self.terms[(top,)]

    def univariate_coeffs(self) -> list:
        """Ascending Fraction coefficient list; univariate only."""
        if self.d != 1:
            raise DimensionMismatch("univariate_coeffs needs d == 1")
        n = 0 if not self.terms else max(m[0] for m in self.terms)
        out = [Fraction(0)] * (n + 1)
        for (k,), c in self.terms.items():
            out[k] = c
        return out

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Poly"):
        if self.d != other.d:
            raise DimensionMismatch(f"d mismatch: {self.d} vs {other.d}")

    def __add__(self, other):
        if not isinstance(other, Poly):
            if not isinstance(other, (int, Fraction, str)):
                return NotImplemented
            other = Poly.constant(self.d, other)
        self._check(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            s = terms.get(m, Fraction(0)) + c
            if s:
                terms[m] = s
            else:
                terms.pop(m, None)
        out = Poly.__new__(Poly)
        out.d, out.terms = self.d, terms
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Poly.__new__(Poly)
        out.d = self.d
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if not isinstance(other, Poly):
            if not isinstance(other, (int, Fraction, str)):
                return NotImplemented
            other = Poly.constant(self.d, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            if not isinstance(other, (int, Fraction, str)):
                return NotImplemented
            c = as_fraction(other)
            if c == 0:
                return Poly.zero(self.d)
            out = Poly.__new__(Poly)
            out.d = self.d
            out.terms = {m: v * c for m, v in self.terms.items()}
            return out
        self._check(other)
        prod: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                s = prod.get(m, Fraction(0)) + c1 * c2
                if s:
                    prod[m] = s
                else:
                    prod.pop(m, None)
        out = Poly.__new__(Poly)
        out.d, out.terms = self.d, prod
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative int")
        result = Poly.one(self.d)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.d == other.d and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.constant(self.d, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.d, frozenset(self.terms.items())))

    # -- evaluation --------------------------------------------------------

    def __call__(self, point):
        return poly_eval(self, point)

    # -- printing / serialization -----------------------------------------

    def __repr__(self):
        if not self.terms:
            return "0"
        names = ["x"] if self.d == 1 else [f"x{i+1}" for i in range(self.d)]
        bits = []
        for mono in sorted(self.terms, key=lambda m: (sum(m), m)):
            c = self.terms[mono]
            factors = [str(c)] if c != 1 or not any(mono) else []
            if c == 1 and not factors and not any(mono):
                factors = ["1"]
            for i, e in enumerate(mono):
                if e == 1:
                    factors.append(names[i])
                elif e > 1:
                    factors.append(f"{names[i]}^{e}")
            bits.append("*".join(factors) if factors else str(c))
        return " + ".join(bits)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "terms": [
                {"exp": list(m), "coef": str(c)}
                for m, c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Poly":
        try:
            d = int(data["d"])
            terms = {tuple(t["exp"]): as_fraction(t["coef"]) for t in data["terms"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad polynomial JSON: {exc}") from exc
        return cls(d, terms)


# -- module-level operations (the public arithmetic surface) ---------------


def poly_eval(p: Poly, point):
    """Evaluate ``p`` at a point.

    Exact (Fraction) when every coordinate is an int/Fraction, float
    otherwise.  Raises DimensionMismatch when the point length differs
    from ``p.d``.
    """
    coords = list(point)
    if len(coords) != p.d:
        raise DimensionMismatch(f"point has {len(coords)} coords, expected {p.d}")
    exact = all(isinstance(c, (int, Fraction)) for c in coords)
    if exact:
        total = Fraction(0)
        for mono, coef in p.terms.items():
            v = coef
            for c, e in zip(coords, mono):
                if e:
                    v *= Fraction(c) ** e
            total += v
        return total
    total_f = 0.0
    xs = [float(c) for c in coords]
    for mono, coef in p.terms.items():
        v = float(coef)
        for c, e in zip(xs, mono):
            if e:
                v *= c ** e
        total_f += v
    return total_f


def poly_add(p: Poly, q) -> Poly:
    return p + q


def poly_sub(p: Poly, q) -> Poly:
    return p - q


def poly_mul(p: Poly, q) -> Poly:
    return p * q


def poly_scale(p: Poly, c) -> Poly:
    return p * as_fraction(c)


def norm_sq_poly(d: int) -> Poly:
    """The squared euclidean norm as a polynomial, sum of x_i^2."""
    if d < 1:
        raise ValueError("d must be >= 1")
    p = Poly.zero(d)
    for i in range(d):
        xi = Poly.variable(i, d)
        p = p + xi * xi
    return p


def eval_grid(p: Poly, points: np.ndarray) -> np.ndarray:
    """Float evaluation on a batch of points, shape (P, d) -> (P,)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != p.d:
        raise DimensionMismatch(f"grid has d={pts.shape[1]}, expected {p.d}")
    out = np.zeros(pts.shape[0])
    for mono, coef in p.terms.items():
        term = np.full(pts.shape[0], float(coef))
        for i, e in enumerate(mono):
            if e:
                term *= pts[:, i] ** e
        out += term
    return out
