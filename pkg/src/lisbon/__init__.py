"""Lisbon integrals over the space of monic polynomials, computed two ways,
together with numeric and exact checks of the differential systems they satisfy."""

from .contour import EntireFunction, LisbonVector, QuadratureConfig, phi, psi, scalar_phi
from .errors import BudgetError, DomainError, LisbonError, NearDiscriminantError, NonConvergenceError
from .poly_core import RootSet, SymPoint, companion, discriminant, nabla, roots
from .residue import phi_residue, psi_residue

__all__ = [
    "BudgetError",
    "DomainError",
    "EntireFunction",
    "LisbonError",
    "LisbonVector",
    "NearDiscriminantError",
    "NonConvergenceError",
    "QuadratureConfig",
    "RootSet",
    "SymPoint",
    "companion",
    "discriminant",
    "nabla",
    "phi",
    "phi_residue",
    "psi",
    "psi_residue",
    "roots",
    "scalar_phi",
]
