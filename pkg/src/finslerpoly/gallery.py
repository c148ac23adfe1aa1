"""Canned matrix-polynomial pairs used by the reproduce command.

Scenario ids are part of the CLI surface: exmain (the scaled-identity
pair whose lifted sections lose their rational witness), exa (the
scaled pair driving the parity invariant), exb (the three-branch 3x3
pair), sec6 (the two-constraint constant counterexample).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .matpoly import MatPoly, direct_sum
from .poly import Poly


def _x():
    return Poly.variable(0, 1)


def exmain_pair():
    """G = x I_2, F = diag(1+x, 1); sections close-form in 1/x."""
    x = _x()
    one = Poly.one(1)
    F = MatPoly.diag([one + x, one])
    G = MatPoly.diag([x, x])
    return F, G


def exmain_lifted():
    F, G = exmain_pair()
    return direct_sum(F, Poly.zero(1)), direct_sum(G, Poly.constant(1, -1))


def exa_pair():
    """G = x diag(2, 1), F = (1+x) I_2; the parity-invariant pair."""
    x = _x()
    F = MatPoly.identity(2, 1) * (Poly.one(1) + x)
    G = MatPoly.diag([2 * x, x])
    return F, G


def exb_pair():
    """3x3 diagonal pair with the three-branch positive section table."""
    x = _x()
    one = Poly.one(1)
    F = MatPoly.diag([one + x, one + x, one])
    G = MatPoly.diag([2 * x, x, one])
    return F, G


def sec6_triple():
    """Constant (G1, G2, F) where the vector condition holds but the
    trace condition fails."""
    G1 = np.array([[1.0, 0.0], [0.0, -1.0]])
    G2 = np.array([[0.0, -1.0], [-1.0, 1.0]])
    F = np.array([[1.0, -1.0], [-1.0, 0.0]])
    return G1, G2, F


def exmain_closed_mu(x: float) -> float:
    return 1.0 + 1.0 / x if x < 0 else -np.inf


def exmain_closed_nu(x: float) -> float:
    return 1.0 / x if x > 0 else np.inf


def exmain_lifted_closed_mu(x: float) -> float:
    if x < -1:
        return 1.0 + 1.0 / x
    return 0.0


def exmain_lifted_closed_nu(x: float) -> float:
    return 1.0 / x if x > 0 else np.inf


def exb_closed_positive(x: float):
    """Endpoints of M_x intersected with (0, inf) for the exb pair."""
    if x < -1:
        return ((1.0 + x) / x, 1.0)
    if x <= 1:
        return (0.0, 1.0)
    return (0.0, (1.0 + x) / (2.0 * x))


GALLERY = {
    "exmain": exmain_pair,
    "exmain_lifted": exmain_lifted,
    "exa": exa_pair,
    "exb": exb_pair,
}


def gallery_matrix(ref: str):
    """Resolve 'example:<name>:<F|G>' references used by CLI flags."""
    parts = ref.split(":")
    if len(parts) != 3 or parts[0] != "example":
        raise KeyError(ref)
    name, which = parts[1], parts[2]
    if name not in GALLERY:
        raise KeyError(f"unknown example {name!r}")
    F, G = GALLERY[name]()
    if which == "F":
        return F
    if which == "G":
        return G
    raise KeyError(f"unknown matrix {which!r} (use F or G)")
