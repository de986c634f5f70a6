"""
Lisbon integrals by trapezoidal quadrature on the circle ``|zeta| = R``.

Every quantity computed here is a contour integral of the form

    (1/2 pi i) \\oint f(zeta) N(zeta) / P_s(zeta)^m  d zeta

for a small set of numerator monomials ``N``. With nodes
``zeta_j = R exp(2 pi i j / n)`` the rule collapses to the plain average of
``f N zeta / P^m`` over the nodes, which converges geometrically because the
integrand is analytic on an annulus around the circle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import BudgetError, DomainError, NonConvergenceError
from .poly_core import SymPoint, eval_dpoly, eval_poly, roots

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# integrands
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EntireFunction:
    """An entire integrand ``f`` with an optional derivative evaluator.

    ``kind`` is one of ``one``, ``monomial``, ``poly``, ``exp`` or
    ``closure``; ``params`` holds what is needed to rebuild it from a
    descriptor (see :meth:`descriptor`).
    """

    kind: str
    params: tuple
    func: Callable = field(repr=False)
    deriv: Optional[Callable] = field(default=None, repr=False)
    label: str = ""

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=complex))

    def fprime(self, z):
        if self.deriv is None:
            raise ValueError(f"no derivative available for {self.descriptor()}")
        return self.deriv(np.asarray(z, dtype=complex))

    @property
    def has_derivative(self) -> bool:
        return self.deriv is not None

    # constructors -------------------------------------------------------

    @classmethod
    def one(cls) -> "EntireFunction":
        return cls("one", (), lambda z: np.ones_like(z), lambda z: np.zeros_like(z))

    @classmethod
    def monomial(cls, p: int) -> "EntireFunction":
        if p < 0:
            raise ValueError("monomial degree must be >= 0")
        if p == 0:
            return cls.one()
        return cls(
            "monomial", (p,), lambda z: z**p, lambda z: p * z ** (p - 1)
        )

    @classmethod
    def poly(cls, coeffs: Sequence[complex]) -> "EntireFunction":
        """Polynomial with ascending coefficients ``c_0 + c_1 z + ...``."""
        c = np.array(coeffs, dtype=complex) if len(coeffs) else np.zeros(1, complex)
        dc = npoly.polyder(c) if len(c) > 1 else np.zeros(1, complex)
        return cls(
            "poly",
            tuple(complex(v) for v in c),
            lambda z: npoly.polyval(z, c) + 0 * z,
            lambda z: npoly.polyval(z, dc) + 0 * z,
        )

    @classmethod
    def exp(cls, t: complex = 1.0, scale: complex = 1.0) -> "EntireFunction":
        """``scale * exp(t z)``; its derivative is ``t`` times itself."""
        t = complex(t)
        scale = complex(scale)
        return cls(
            "exp",
            (t, scale),
            lambda z: scale * np.exp(t * z),
            lambda z: scale * t * np.exp(t * z),
        )

    @classmethod
    def closure(cls, func, deriv=None, label: str = "closure") -> "EntireFunction":
        return cls("closure", (), func, deriv, label)

    # algebra ------------------------------------------------------------

    def derivative(self) -> "EntireFunction":
        """``f'`` as a new integrand (derivative of that one unknown unless
        ``f`` is polynomial or exponential)."""
        if self.kind == "one":
            return EntireFunction.poly([0])
        if self.kind == "monomial":
            (p,) = self.params
            return EntireFunction.poly([0] * (p - 1) + [p])
        if self.kind == "poly":
            c = np.array(self.params)
            return EntireFunction.poly(npoly.polyder(c) if len(c) > 1 else [0])
        if self.kind == "exp":
            t, scale = self.params
            return EntireFunction.exp(t, scale * t)
        if self.deriv is None:
            raise ValueError("closure has no derivative")
        return EntireFunction.closure(self.deriv, None, f"d({self.label})")

    def times_z(self) -> "EntireFunction":
        """``z f``, keeping a derivative ``f + z f'`` when ``f'`` is known."""
        if self.kind in ("one", "monomial", "poly"):
            c = self.poly_coeffs()
            return EntireFunction.poly([0] + list(c))
        f, d = self.func, self.deriv
        deriv = None if d is None else (lambda z: f(z) + z * d(z))
        return EntireFunction.closure(lambda z: z * f(z), deriv, f"z*{self.descriptor()}")

    def poly_coeffs(self) -> tuple:
        if self.kind == "one":
            return (1 + 0j,)
        if self.kind == "monomial":
            (p,) = self.params
            return tuple([0j] * p + [1 + 0j])
        if self.kind == "poly":
            return self.params
        raise ValueError("not a polynomial integrand")

    def __add__(self, other: "EntireFunction") -> "EntireFunction":
        f, g = self.func, other.func
        d = None
        if self.deriv is not None and other.deriv is not None:
            df, dg = self.deriv, other.deriv
            d = lambda z: df(z) + dg(z)  # noqa: E731
        return EntireFunction.closure(lambda z: f(z) + g(z), d, "sum")

    def __rmul__(self, c) -> "EntireFunction":
        c = complex(c)
        f, df = self.func, self.deriv
        d = None if df is None else (lambda z: c * df(z))
        return EntireFunction.closure(lambda z: c * f(z), d, "scaled")

    def descriptor(self) -> str:
        if self.kind == "one":
            return "one"
        if self.kind == "monomial":
            return f"monomial:{self.params[0]}"
        if self.kind == "poly":
            return "poly:" + ",".join(format_complex(c) for c in self.params)
        if self.kind == "exp":
            t, scale = self.params
            if scale == 1:
                return f"exp:{format_complex(t)}"
            return f"exp:{format_complex(t)}:{format_complex(scale)}"
        return self.label or "closure"


def format_complex(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return f"{c.real:.17g}"
    return f"{c.real:.17g}{c.imag:+.17g}i"


# ---------------------------------------------------------------------------
# configuration and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureConfig:
    """Adaptive trapezoid settings. ``radius=None`` selects
    :func:`auto_radius`.

    The node count doubles from ``min_nodes`` until two successive estimates
    differ by less than ``tol * max(1, |estimate|)`` or by less than the
    rounding floor of the sum, whichever is larger.
    """

    radius: Optional[float] = None
    tol: float = 1e-10
    min_nodes: int = 64
    max_nodes: int = 2**16

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.min_nodes < 16:
            raise ValueError("min_nodes must be >= 16")
        if self.max_nodes < 2 * self.min_nodes:
            raise ValueError("max_nodes must be >= 2 * min_nodes")
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class LisbonVector:
    """Components ``h = 0..k-1`` of a Lisbon integral (or one of its
    s-derivatives), together with the last successive-refinement gap."""

    values: np.ndarray
    kind: str
    accuracy: float
    radius: float = float("nan")
    nodes: int = 0

    def __len__(self):
        return len(self.values)

    def __getitem__(self, h):
        return self.values[h]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class ContourRule:
    """A fixed trapezoid rule (radius and node count)."""

    radius: float
    nodes: int


# ---------------------------------------------------------------------------
# core integrator
# ---------------------------------------------------------------------------


def radius_bound(pt: SymPoint) -> float:
    """``2 (1 + max_h |s_h|^(1/h))``: every root of ``P_s`` lies strictly inside."""
    m = max(abs(pt.s[h - 1]) ** (1.0 / h) for h in range(1, pt.k + 1))
    return 2.0 * (1.0 + m)


@lru_cache(maxsize=4096)
def auto_radius(pt: SymPoint) -> float:
    """Radius used by ``QuadratureConfig(radius=None)``.

    ``1.25 max|z_j| + 0.5`` from the computed roots, capped by
    :func:`radius_bound` (which is also the fallback if root finding fails).
    Staying close to the roots keeps ``|f|`` on the circle small, which is
    what limits rounding error for fast-growing integrands such as
    ``exp(t z)``.
    """
    bound = radius_bound(pt)
    try:
        zs = roots(pt).values
    except NonConvergenceError:
        return bound
    return min(bound, 1.25 * float(np.max(np.abs(zs))) + 0.5)


def _resolve_radius(pt: SymPoint, cfg: QuadratureConfig) -> float:
    if cfg.radius is None:
        return auto_radius(pt)
    R = float(cfg.radius)
    try:
        zs = roots(pt).values
    except NonConvergenceError:
        return R
    rmax = float(np.max(np.abs(zs)))
    if R <= rmax:
        raise DomainError(f"radius {R} does not enclose roots (max modulus {rmax:.6g})")
    return R


def _integrand(pt, f, powers, order, zeta, extra):
    """Rows: ``f(zeta) zeta^(p+1) extra(zeta) / P(zeta)^order`` per power p."""
    base = f(zeta) * zeta / eval_poly(pt, zeta) ** order
    if extra is not None:
        base = base * extra(zeta)
    return base[None, :] * zeta[None, :] ** np.asarray(powers)[:, None]


def _nodes(R, n, start, step):
    j = np.arange(start, n, step)
    return R * np.exp(2j * np.pi * j / n)


def integrate(
    pt: SymPoint,
    f: EntireFunction,
    powers: Sequence[int],
    order: int = 1,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    extra: Optional[Callable] = None,
    rule: Optional[ContourRule] = None,
    kind: str = "kernel",
) -> LisbonVector:
    """``(1/2 pi i) \\oint f zeta^p extra / P^order`` for each ``p`` in ``powers``.

    With ``rule`` given the node set is fixed (no adaptivity); otherwise the
    node count doubles, reusing previous nodes, until converged.
    """
    powers = list(powers)
    if rule is not None:
        zeta = _nodes(rule.radius, rule.nodes, 0, 1)
        vals = _integrand(pt, f, powers, order, zeta, extra).mean(axis=1)
        return LisbonVector(vals, kind, 0.0, rule.radius, rule.nodes)

    R = _resolve_radius(pt, cfg)
    n = cfg.min_nodes
    terms = _integrand(pt, f, powers, order, _nodes(R, n, 0, 1), extra)
    total = terms.sum(axis=1)
    peak = float(np.max(np.abs(terms)))
    est = total / n
    while True:
        if 2 * n > cfg.max_nodes:
            raise BudgetError(
                f"quadrature did not converge within {cfg.max_nodes} nodes (R={R:.6g})"
            )
        odd = _integrand(pt, f, powers, order, _nodes(R, 2 * n, 1, 2), extra)
        total = total + odd.sum(axis=1)
        peak = max(peak, float(np.max(np.abs(odd))))
        n *= 2
        new = total / n
        gap = float(np.max(np.abs(new - est)))
        scale = max(1.0, float(np.max(np.abs(new))))
        floor = 64 * _EPS * peak
        est = new
        if not np.all(np.isfinite(est)):
            raise BudgetError("non-finite quadrature estimate")
        if gap < cfg.tol * scale or gap <= floor:
            return LisbonVector(est, kind, gap, R, n)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def phi(pt: SymPoint, f: EntireFunction, cfg: QuadratureConfig = DEFAULT_CONFIG, rule=None) -> LisbonVector:
    """The Lisbon integral ``Phi_f(s)``."""
    return integrate(pt, f, range(pt.k), 1, cfg, rule=rule, kind="phi")


def psi(pt: SymPoint, f: EntireFunction, cfg: QuadratureConfig = DEFAULT_CONFIG, rule=None) -> LisbonVector:
    """The trace-type integral ``Psi_f(s)`` (integrand multiplied by ``P'_s``)."""
    return integrate(
        pt, f, range(pt.k), 1, cfg, extra=lambda z: eval_dpoly(pt, z), rule=rule, kind="psi"
    )


def scalar_phi(pt: SymPoint, f: EntireFunction, h: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """Scalar integral ``phi_h`` for any ``h >= 0`` (including ``h >= k``)."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    return complex(integrate(pt, f, [h], 1, cfg).values[0])


def _check_index(pt, h):
    if not 1 <= h <= pt.k:
        raise ValueError(f"derivative index {h} outside [1, {pt.k}]")


def dphi_ds(pt: SymPoint, f: EntireFunction, h: int, cfg: QuadratureConfig = DEFAULT_CONFIG, rule=None) -> LisbonVector:
    """Analytic ``dPhi/ds_h``: kernel ``(-1)^(h+1) zeta^(k-h) E / P^2``."""
    _check_index(pt, h)
    k = pt.k
    out = integrate(pt, f, [k - h + j for j in range(k)], 2, cfg, rule=rule, kind="dphi")
    return _scaled(out, (-1) ** (h + 1))


def d2phi_ds2_kernels(
    pt: SymPoint, f: EntireFunction, hj: tuple, cfg: QuadratureConfig = DEFAULT_CONFIG, rule=None
) -> LisbonVector:
    """Analytic ``d^2 Phi / ds_h ds_j``: kernel ``2 (-1)^(h+j) zeta^(2k-h-j) E / P^3``."""
    h, j = hj
    _check_index(pt, h)
    _check_index(pt, j)
    k = pt.k
    w = 2 * k - h - j
    out = integrate(pt, f, [w + m for m in range(k)], 3, cfg, rule=rule, kind="d2phi")
    return _scaled(out, 2 * (-1) ** (h + j))


def dpsi_ds(pt: SymPoint, f: EntireFunction, h: int, cfg: QuadratureConfig = DEFAULT_CONFIG, rule=None) -> LisbonVector:
    """Analytic ``dPsi/ds_h``.

    Differentiating ``P'/P`` in ``s_h`` gives
    ``(-1)^h ((k-h) zeta^(k-h-1) P - zeta^(k-h) P') / P^2``; the first term
    is absent for ``h = k``.
    """
    _check_index(pt, h)
    k = pt.k

    def extra(z):
        num = -(z ** (k - h)) * eval_dpoly(pt, z)
        if h < k:
            num = num + (k - h) * z ** (k - h - 1) * eval_poly(pt, z)
        return (-1) ** h * num

    return integrate(pt, f, range(k), 2, cfg, extra=extra, rule=rule, kind="dpsi")


def _scaled(v: LisbonVector, c) -> LisbonVector:
    return LisbonVector(v.values * c, v.kind, v.accuracy * abs(c), v.radius, v.nodes)


def rule_of(v: LisbonVector) -> ContourRule:
    """The fixed rule an adaptive evaluation settled on."""
    return ContourRule(v.radius, v.nodes)


__all__ = [
    "ContourRule",
    "DEFAULT_CONFIG",
    "EntireFunction",
    "LisbonVector",
    "QuadratureConfig",
    "d2phi_ds2_kernels",
    "dphi_ds",
    "dpsi_ds",
    "format_complex",
    "integrate",
    "phi",
    "psi",
    "auto_radius",
    "radius_bound",
    "rule_of",
    "scalar_phi",
]
