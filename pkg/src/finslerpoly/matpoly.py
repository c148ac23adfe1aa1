"""Square matrices of exact polynomials and their constant evaluations.

``MatPoly`` is an n x n array of :class:`~finslerpoly.poly.Poly` sharing
one variable count.  The ``symmetric`` flag is validated exactly at
construction.  Constant evaluations are plain float ``numpy`` arrays;
an exact variant returns nested Fraction lists for certificate spot
checks.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, ParseError
from .poly import Poly, as_fraction, eval_grid, poly_eval


class MatPoly:
    __slots__ = ("n", "d", "entries", "symmetric")

    def __init__(self, entries: Sequence[Sequence], d: int | None = None,
                 symmetric: bool | None = None):
        rows = [list(r) for r in entries]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionMismatch("entries must form a nonempty square array")
        if d is None:
            d = next((e.d for r in rows for e in r if isinstance(e, Poly)), None)
            if d is None:
                raise DimensionMismatch("cannot infer d from scalar entries")
        norm: list[list[Poly]] = []
        for r in rows:
            row = []
            for e in r:
                if isinstance(e, Poly):
                    if e.d != d:
                        raise DimensionMismatch("entry variable counts disagree")
                    row.append(e)
                else:
                    row.append(Poly.constant(d, e))
            norm.append(row)
        is_sym = all(norm[i][j] == norm[j][i] for i in range(n) for j in range(i))
        if symmetric is None:
            symmetric = is_sym
        elif symmetric and not is_sym:
            raise DimensionMismatch("symmetric flag set but entries are not symmetric")
        self.n = n
        self.d = d
        self.entries = tuple(tuple(r) for r in norm)
        self.symmetric = bool(symmetric)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, n: int, d: int) -> "MatPoly":
        z = Poly.zero(d)
        return cls([[z] * n for _ in range(n)], d=d, symmetric=True)

    @classmethod
    def identity(cls, n: int, d: int) -> "MatPoly":
        z, one = Poly.zero(d), Poly.one(d)
        return cls([[one if i == j else z for j in range(n)] for i in range(n)],
                   d=d, symmetric=True)

    @classmethod
    def diag(cls, polys: Sequence) -> "MatPoly":
        polys = list(polys)
        d = next((p.d for p in polys if isinstance(p, Poly)), None)
        if d is None:
            raise DimensionMismatch("diag needs at least one Poly entry")
        n = len(polys)
        z = Poly.zero(d)
        ent = [[polys[i] if i == j else z for j in range(n)] for i in range(n)]
        return cls(ent, d=d, symmetric=True)

    @classmethod
    def elementary(cls, i: int, j: int, n: int, d: int) -> "MatPoly":
        """E_ij, a single unit entry."""
        z, one = Poly.zero(d), Poly.one(d)
        ent = [[one if (a, b) == (i, j) else z for b in range(n)] for a in range(n)]
        return cls(ent, d=d)

    @classmethod
    def from_scalar(cls, rows: Sequence[Sequence], d: int) -> "MatPoly":
        """Constant matrix with exact rational entries."""
        return cls([[Poly.constant(d, as_fraction(v)) for v in r] for r in rows], d=d)

    # -- arithmetic -----------------------------------------------------------

    def _check(self, other: "MatPoly"):
        if self.n != other.n or self.d != other.d:
            raise DimensionMismatch(
                f"shape mismatch: ({self.n},{self.d}) vs ({other.n},{other.d})")

    def __add__(self, other: "MatPoly") -> "MatPoly":
        self._check(other)
        ent = [[self.entries[i][j] + other.entries[i][j] for j in range(self.n)]
               for i in range(self.n)]
        return MatPoly(ent, d=self.d)

    def __sub__(self, other: "MatPoly") -> "MatPoly":
        self._check(other)
        ent = [[self.entries[i][j] - other.entries[i][j] for j in range(self.n)]
               for i in range(self.n)]
        return MatPoly(ent, d=self.d)

    def __neg__(self) -> "MatPoly":
        ent = [[-e for e in r] for r in self.entries]
        return MatPoly(ent, d=self.d)

    def __mul__(self, other):
        if isinstance(other, MatPoly):
            self._check(other)
            n = self.n
            ent = [[Poly.zero(self.d) for _ in range(n)] for _ in range(n)]
            for i in range(n):
                for k in range(n):
                    a = self.entries[i][k]
                    if a.is_zero():
                        continue
                    for j in range(n):
                        b = other.entries[k][j]
                        if not b.is_zero():
                            ent[i][j] = ent[i][j] + a * b
            return MatPoly(ent, d=self.d)
        # scalar Poly / rational
        ent = [[e * other for e in r] for r in self.entries]
        return MatPoly(ent, d=self.d)

    def __rmul__(self, other):
        # scalar * matrix commutes (scalars live in the center)
        return self * other

    def transpose(self) -> "MatPoly":
        ent = [[self.entries[j][i] for j in range(self.n)] for i in range(self.n)]
        return MatPoly(ent, d=self.d)

    def __eq__(self, other):
        if not isinstance(other, MatPoly):
            return NotImplemented
        return (self.n == other.n and self.d == other.d
                and self.entries == other.entries)

    def __hash__(self):
        return hash((self.n, self.d, self.entries))

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.entries for e in r)

    def max_degree(self):
        return max(e.degree() for r in self.entries for e in r)

    def __repr__(self):
        rows = ["[" + ", ".join(repr(e) for e in r) + "]" for r in self.entries]
        return "MatPoly[" + "; ".join(rows) + "]"

    # -- evaluation -------------------------------------------------------------

    def __call__(self, point):
        return matpoly_eval(self, point)

    def eval_exact(self, point) -> list:
        """Entrywise exact evaluation at a rational point."""
        return [[poly_eval(e, point) for e in r] for r in self.entries]

    def eval_grid(self, points: np.ndarray) -> np.ndarray:
        """Batched float evaluation, (P, d) -> (P, n, n)."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        out = np.empty((pts.shape[0], self.n, self.n))
        for i in range(self.n):
            for j in range(self.n):
                if self.symmetric and j < i:
                    out[:, i, j] = out[:, j, i]
                else:
                    out[:, i, j] = eval_grid(self.entries[i][j], pts)
        return out

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "symmetric": self.symmetric,
            "entries": [[e.to_json() for e in r] for r in self.entries],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MatPoly":
        try:
            n = int(data["n"])
            d = int(data["d"])
            sym = bool(data.get("symmetric", False))
            ent = [[Poly.from_json(e) for e in r] for r in data["entries"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad matrix polynomial JSON: {exc}") from exc
        if len(ent) != n or any(len(r) != n for r in ent):
            raise ParseError("entries shape disagrees with declared n")
        return cls(ent, d=d, symmetric=sym if sym else None)


# -- module-level operations ---------------------------------------------------


def matpoly_eval(M: MatPoly, point) -> np.ndarray:
    """Float evaluation at a single point, returns an (n, n) array."""
    coords = list(point)
    if len(coords) != M.d:
        raise DimensionMismatch(f"point has {len(coords)} coords, expected {M.d}")
    xs = np.asarray([float(c) for c in coords])[None, :]
    return M.eval_grid(xs)[0]


def direct_sum(M: MatPoly, c) -> MatPoly:
    """Append ``c`` (a Poly / scalar or another MatPoly) as a diagonal block."""
    if isinstance(c, MatPoly):
        if c.d != M.d:
            raise DimensionMismatch("direct_sum variable counts disagree")
        blocks = [r for r in c.entries]
        m = c.n
    else:
        if not isinstance(c, Poly):
            c = Poly.constant(M.d, c)
        blocks = [[c]]
        m = 1
    n = M.n
    z = Poly.zero(M.d)
    ent = [list(r) + [z] * m for r in M.entries]
    for i in range(m):
        ent.append([z] * n + list(blocks[i]))
    return MatPoly(ent, d=M.d)


def herm_square_sum(factors: Iterable[MatPoly]) -> MatPoly:
    """Sum of H^T H over the given factors; empty input yields zero.

    The result is symmetric by construction.  All factors must share
    (n, d); with no factors the shape cannot be inferred, so the zero
    matrix convention requires at least an explicit use of
    ``MatPoly.zero`` by the caller when the list may be empty.
    """
    factors = list(factors)
    if not factors:
        raise DimensionMismatch("empty factor list: use herm_square_sum_shaped")
    first = factors[0]
    return herm_square_sum_shaped(factors, first.n, first.d)


def herm_square_sum_shaped(factors: Iterable[MatPoly], n: int, d: int) -> MatPoly:
    total = MatPoly.zero(n, d)
    for H in factors:
        if H.n != n or H.d != d:
            raise DimensionMismatch("hermitian square factors disagree in shape")
        total = total + H.transpose() * H
    return MatPoly(total.entries, d=d, symmetric=True)


def frobenius_norm_exact(rows: list) -> Fraction:
    """Sum of squared entries of a nested Fraction list (norm squared)."""
    return sum((Fraction(v) ** 2 for r in rows for v in r), Fraction(0))
