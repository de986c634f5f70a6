"""Root-based closed forms for the Lisbon integrals (simple roots only)."""

from __future__ import annotations

import numpy as np

from .contour import EntireFunction, LisbonVector
from .errors import NearDiscriminantError
from .poly_core import SymPoint, eval_dpoly, roots

DEFAULT_DELTA_FLOOR = 1e-6


def _simple_roots(pt: SymPoint, delta_floor: float) -> np.ndarray:
    rs = roots(pt)
    zs = rs.values
    disc = 1.0 + 0j
    for i in range(pt.k):
        for j in range(i + 1, pt.k):
            disc *= (zs[i] - zs[j]) ** 2
    if abs(disc) < delta_floor:
        raise NearDiscriminantError(
            f"|discriminant| = {abs(disc):.3e} below floor {delta_floor:g}"
        )
    return zs


def phi_residue(
    pt: SymPoint, f: EntireFunction, delta_floor: float = DEFAULT_DELTA_FLOOR
) -> LisbonVector:
    """``phi_h = sum_j z_j^h f(z_j) / P'(z_j)`` over the roots of ``P_s``."""
    zs = _simple_roots(pt, delta_floor)
    w = f(zs) / eval_dpoly(pt, zs)
    vals = np.array([np.sum(zs**h * w) for h in range(pt.k)])
    return LisbonVector(vals, "phi", 0.0)


def psi_residue(
    pt: SymPoint, f: EntireFunction, delta_floor: float = DEFAULT_DELTA_FLOOR
) -> LisbonVector:
    """``psi_h = sum_j z_j^h f(z_j)``: the trace of ``z^h f``."""
    zs = _simple_roots(pt, delta_floor)
    w = f(zs)
    vals = np.array([np.sum(zs**h * w) for h in range(pt.k)])
    return LisbonVector(vals, "psi", 0.0)
