"""
Residuals of the differential identities satisfied by Lisbon integrals.

All s-derivatives of matrix expressions (``A^p``, ``P'_s(A)``) come from
exact symbolic differentiation in :mod:`lisbon.exact`, evaluated at the
point afterwards, so quadrature is the only numeric error source. Residuals
are max-norms divided by ``1 + |field|_max``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import exact
from .contour import (
    DEFAULT_CONFIG,
    ContourRule,
    EntireFunction,
    QuadratureConfig,
    d2phi_ds2_kernels,
    dphi_ds,
    dpsi_ds,
    integrate,
    phi,
    psi,
)
from .errors import NearDiscriminantError
from .poly_core import SymPoint, discriminant, nabla

DEFAULT_DELTA_FLOOR = 1e-3
FD_STEPS = (1e-3, 1e-4)


@dataclass
class ResidualReport:
    identity: str
    s: tuple
    params: dict = field(default_factory=dict)
    residual: float = 0.0
    method: str = "Analytic"
    seed: Optional[int] = None

    @property
    def k(self) -> int:
        return len(self.s)

    def to_json(self) -> dict:
        return {
            "identity": self.identity,
            "k": self.k,
            "s": [{"re": complex(v).real, "im": complex(v).imag} for v in self.s],
            "params": dict(self.params),
            "residual": float(self.residual),
            "method": self.method,
            "seed": self.seed,
        }


def _norm(v) -> float:
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


def _rel(diff, ref) -> float:
    return _norm(diff) / (1.0 + _norm(ref))


# ---------------------------------------------------------------------------
# exact matrices evaluated at a point
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _dpower(k: int, p: int, h: int) -> exact.PolyMatrix:
    return exact.symbolic_power(k, p).partial(h)


@lru_cache(maxsize=None)
def _dpprime(k: int, h: int) -> exact.PolyMatrix:
    return exact.symbolic_pprime_of_A(k).partial(h)


def power_at(pt: SymPoint, p: int) -> np.ndarray:
    return exact.symbolic_power(pt.k, p).evaluate(pt.s)


def dpower_at(pt: SymPoint, p: int, h: int) -> np.ndarray:
    """``d(A^p)/ds_h`` at ``pt``."""
    return _dpower(pt.k, p, h).evaluate(pt.s)


def pprime_at(pt: SymPoint) -> np.ndarray:
    return exact.symbolic_pprime_of_A(pt.k).evaluate(pt.s)


def dpprime_at(pt: SymPoint, h: int) -> np.ndarray:
    return _dpprime(pt.k, h).evaluate(pt.s)


# ---------------------------------------------------------------------------
# vector fields with their s-derivatives
# ---------------------------------------------------------------------------

# A provider maps a point to (value, {h: d value / d s_h for h in 1..k}).
Provider = Callable[[SymPoint], tuple]


def phi_field(f: EntireFunction, cfg: QuadratureConfig = DEFAULT_CONFIG) -> Provider:
    def provider(pt):
        return phi(pt, f, cfg).values, {
            h: dphi_ds(pt, f, h, cfg).values for h in range(1, pt.k + 1)
        }

    return provider


def psi_field(f: EntireFunction, cfg: QuadratureConfig = DEFAULT_CONFIG) -> Provider:
    def provider(pt):
        return psi(pt, f, cfg).values, {
            h: dpsi_ds(pt, f, h, cfg).values for h in range(1, pt.k + 1)
        }

    return provider


def a_times(inner: Provider) -> Provider:
    """``s -> A(s) v(s)`` by the product rule."""

    def provider(pt):
        v, dv = inner(pt)
        a = power_at(pt, 1)
        return a @ v, {h: dpower_at(pt, 1, h) @ v + a @ dv[h] for h in dv}

    return provider


def pprime_times(inner: Provider) -> Provider:
    """``s -> P'_s(A) v(s)``."""

    def provider(pt):
        v, dv = inner(pt)
        m = pprime_at(pt)
        return m @ v, {h: dpprime_at(pt, h) @ v + m @ dv[h] for h in dv}

    return provider


def pprime_inverse_times(inner: Provider) -> Provider:
    """``s -> P'_s(A)^(-1) v(s)``, defined off the discriminant."""

    def provider(pt):
        v, dv = inner(pt)
        m = pprime_at(pt)
        w = np.linalg.solve(m, v)
        return w, {h: np.linalg.solve(m, dv[h] - dpprime_at(pt, h) @ w) for h in dv}

    return provider


def constant_field(c) -> Provider:
    c = np.asarray(c, dtype=complex)

    def provider(pt):
        return c.copy(), {h: np.zeros_like(c) for h in range(1, pt.k + 1)}

    return provider


def perturbed(inner: Provider, eps: float, c) -> Provider:
    """``v + eps * c`` for a constant vector ``c`` (a deliberately wrong field)."""
    c = np.asarray(c, dtype=complex)

    def provider(pt):
        v, dv = inner(pt)
        return v + eps * c, dv

    return provider


# ---------------------------------------------------------------------------
# first-order systems
# ---------------------------------------------------------------------------


def _check_h(pt, h):
    if not 1 <= h <= pt.k - 1:
        raise ValueError(f"h={h} outside [1, k-1] for k={pt.k}")


def _system_defect(pt, v, dv, h):
    """``(-1)^(k+h) dv/ds_h - d(A^(k-h) v)/ds_k``."""
    k = pt.k
    rhs = dpower_at(pt, k - h, k) @ v + power_at(pt, k - h) @ dv[k]
    return (-1) ** (k + h) * dv[h] - rhs


def residual_at_for(provider: Provider, pt: SymPoint, h: int, name: str = "system") -> ResidualReport:
    """Residual of ``(-1)^(k+h) dv/ds_h = d(A^(k-h) v)/ds_k`` for any field."""
    _check_h(pt, h)
    v, dv = provider(pt)
    return ResidualReport(name, pt.s, {"h": h}, _rel(_system_defect(pt, v, dv, h), v))


def residual_at(pt: SymPoint, f: EntireFunction, h: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ResidualReport:
    """Residual of the first-order system for ``Phi_f``."""
    return residual_at_for(phi_field(f, cfg), pt, h)


def system_residuals(provider: Provider, pt: SymPoint, name: str = "system") -> list:
    """All ``h in [1, k-1]`` from one evaluation of the field."""
    v, dv = provider(pt)
    return [
        ResidualReport(name, pt.s, {"h": h}, _rel(_system_defect(pt, v, dv, h), v))
        for h in range(1, pt.k)
    ]


def _require_off_discriminant(pt, delta_floor):
    d = abs(discriminant(pt))
    if d < delta_floor:
        raise NearDiscriminantError(f"|Delta(s)| = {d:.3e} below floor {delta_floor:g}")


def _atat_defect(pt, v, dv, h):
    k = pt.k
    singular = np.linalg.solve(pprime_at(pt), v)
    extra = (-1) ** k * (k - h) * power_at(pt, k - h - 1) @ singular
    return _system_defect(pt, v, dv, h) - extra


def atat_residuals(provider: Provider, pt: SymPoint, name: str = "atat", delta_floor: float = DEFAULT_DELTA_FLOOR) -> list:
    """Residuals of the singular system for ``Psi``-type fields, all ``h``."""
    _require_off_discriminant(pt, delta_floor)
    v, dv = provider(pt)
    return [
        ResidualReport(name, pt.s, {"h": h}, _rel(_atat_defect(pt, v, dv, h), v))
        for h in range(1, pt.k)
    ]


def residual_atat(
    pt: SymPoint,
    f: EntireFunction,
    h: int,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    delta_floor: float = DEFAULT_DELTA_FLOOR,
) -> ResidualReport:
    """Residual of

        (-1)^(k+h) dPsi/ds_h - d(A^(k-h) Psi)/ds_k
            - (-1)^k (k-h) A^(k-h-1) P'(A)^(-1) Psi

    with ``Psi`` and its derivatives taken directly from contour integrals.
    """
    _check_h(pt, h)
    _require_off_discriminant(pt, delta_floor)
    v, dv = psi_field(f, cfg)(pt)
    return ResidualReport("atat", pt.s, {"h": h}, _rel(_atat_defect(pt, v, dv, h), v))


def correspondence(pt: SymPoint, f: EntireFunction, cfg: QuadratureConfig = DEFAULT_CONFIG,
                   delta_floor: float = DEFAULT_DELTA_FLOOR) -> ResidualReport:
    """Round trip ``Phi -> Psi = P'(A) Phi -> P'(A)^(-1) Psi``, against contour ``Psi``."""
    _require_off_discriminant(pt, delta_floor)
    ph = phi(pt, f, cfg).values
    ps = psi(pt, f, cfg).values
    m = pprime_at(pt)
    bridge = _rel(m @ ph - ps, ps)
    back = _rel(np.linalg.solve(m, ps) - ph, ph)
    return ResidualReport(
        "correspondence", pt.s, {"f": f.descriptor(), "bridge": bridge, "roundtrip": back},
        max(bridge, back),
    )


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def richardson_derivative(fn: Callable, pt: SymPoint, h: int, steps=FD_STEPS) -> np.ndarray:
    """Central differences along the real ``s_h`` direction at two steps,
    combined to cancel the second-order error term."""
    d1, d2 = steps

    def central(d):
        plus = pt.replace(h, pt.coord(h) + d)
        minus = pt.replace(h, pt.coord(h) - d)
        return (np.asarray(fn(plus)) - np.asarray(fn(minus))) / (2 * d)

    c1, c2 = central(d1), central(d2)
    return (d1**2 * c2 - d2**2 * c1) / (d1**2 - d2**2)


def _fixed_rule(pt, f, cfg) -> ContourRule:
    base = phi(pt, f, cfg)
    return ContourRule(base.radius, max(2 * base.nodes, 256))


def fd_cross_check(pt: SymPoint, f: EntireFunction, h: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ResidualReport:
    """Analytic ``dPhi/ds_h`` against Richardson-extrapolated differences of ``Phi``.

    The differenced evaluations share one fixed contour rule so that their
    rounding pattern does not vary with the step.
    """
    if not 1 <= h <= pt.k:
        raise ValueError("h outside [1, k]")
    rule = _fixed_rule(pt, f, cfg)
    analytic = dphi_ds(pt, f, h, cfg).values
    numeric = richardson_derivative(lambda q: phi(q, f, rule=rule).values, pt, h)
    ref = phi(pt, f, cfg).values
    return ResidualReport(
        "fd_cross_check", pt.s, {"h": h, "f": f.descriptor()}, _rel(analytic - numeric, ref),
        method="FiniteDifference",
    )


def mixed_partial_check(pt: SymPoint, f: EntireFunction, pq: tuple, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ResidualReport:
    """Integrability: ``d^2 Phi/ds_p ds_(q+1) = d^2 Phi/ds_(p+1) ds_q``.

    Besides the kernel values, every pair ``(a, b)`` with
    ``a + b = p + q + 1`` is recomputed by differencing the analytic first
    derivative ``dPhi/ds_a`` along ``s_b``; the residual is the largest
    deviation of any of these from the common kernel value.
    """
    p, q = pq
    k = pt.k
    if not 1 <= p < q <= k - 1:
        raise ValueError("need 1 <= p < q <= k-1")
    total = p + q + 1
    kernel = d2phi_ds2_kernels(pt, f, (p, q + 1), cfg).values
    other = d2phi_ds2_kernels(pt, f, (p + 1, q), cfg).values
    ref = phi(pt, f, cfg).values
    rule = _fixed_rule(pt, f, cfg)
    worst = _rel(kernel - other, ref)
    for a in range(1, k + 1):
        b = total - a
        if not 1 <= b <= k:
            continue
        fd = richardson_derivative(lambda s: dphi_ds(s, f, a, rule=rule).values, pt, b)
        worst = max(worst, _rel(fd - kernel, ref))
    return ResidualReport(
        "mixed_partial", pt.s, {"p": p, "q": q, "f": f.descriptor()}, worst, method="FiniteDifference"
    )


# ---------------------------------------------------------------------------
# the z-derivative action
# ---------------------------------------------------------------------------


def _dz_rhs_lemma(pt, f, cfg):
    k = pt.k
    ph = phi(pt, f, cfg).values
    out = -nabla(k) @ ph
    for h in range(k):
        out = out + (k - h) * pt.coord(h) * dphi_ds(pt, f, h + 1, cfg).values
    return out, ph


def _dz_rhs_star2(pt, f, cfg):
    k = pt.k
    ph = phi(pt, f, cfg).values
    dk = dphi_ds(pt, f, k, cfg).values
    deriv = dpprime_at(pt, k) @ ph + pprime_at(pt) @ dk
    return -nabla(k) @ ph + exact.sign_k(k) * deriv, ph


def residual_dz_action(pt: SymPoint, f: EntireFunction, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ResidualReport:
    """``Phi_(f') = -nabla Phi_f + sum_h (k-h) s_h dPhi_f/ds_(h+1)``."""
    lhs = phi(pt, f.derivative(), cfg).values
    rhs, ph = _dz_rhs_lemma(pt, f, cfg)
    return ResidualReport("dz_action", pt.s, {"f": f.descriptor()}, _rel(lhs - rhs, ph))


def residual_dz_action_star2(pt: SymPoint, f: EntireFunction, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ResidualReport:
    """``Phi_(f') = -nabla Phi_f + (-1)^(k-1) d(P'(A) Phi_f)/ds_k``; also
    records how far this right-hand side is from the lemma's."""
    lhs = phi(pt, f.derivative(), cfg).values
    rhs, ph = _dz_rhs_star2(pt, f, cfg)
    other, _ = _dz_rhs_lemma(pt, f, cfg)
    agree = _rel(rhs - other, ph)
    res = _rel(lhs - rhs, ph)
    return ResidualReport(
        "dz_action_star2", pt.s, {"f": f.descriptor(), "forms_agree": agree}, max(res, agree)
    )


def leibniz_check(pt: SymPoint, f: EntireFunction, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ResidualReport:
    """``Phi_((z f)') = Phi_f + Phi_(z f')``, with the left side computed
    through the P'(A) form of the z-action applied to ``z f``."""
    zf = f.times_z()
    via_action, _ = _dz_rhs_star2(pt, zf, cfg)
    direct = phi(pt, zf.derivative(), cfg).values
    split = phi(pt, f, cfg).values + phi(pt, f.derivative().times_z(), cfg).values
    res = max(_rel(via_action - split, split), _rel(direct - split, split))
    return ResidualReport("leibniz", pt.s, {"f": f.descriptor()}, res)


def exp_eigen_check(pt: SymPoint, t: complex, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ResidualReport:
    """For ``f_t = exp(t z)``: ``Phi_(f_t') = t Phi_(f_t)``."""
    f = EntireFunction.exp(t)
    ph = phi(pt, f, cfg).values
    res = _rel(phi(pt, f.derivative(), cfg).values - t * ph, ph)
    return ResidualReport("exp_eigen", pt.s, {"t": _cjson(t)}, res)


def residual_exp_connection(
    pt: SymPoint,
    t: complex,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    delta_floor: float = DEFAULT_DELTA_FLOOR,
) -> ResidualReport:
    """``(t + nabla) Phi = (-1)^(k-1) d(P'(A) Phi)/ds_k`` for ``f = exp(t z)``;
    off the discriminant also ``(t + nabla) P'(A)^(-1) Psi = (-1)^(k-1) dPsi/ds_k``."""
    k = pt.k
    f = EntireFunction.exp(t)
    ph = phi(pt, f, cfg).values
    dk = dphi_ds(pt, f, k, cfg).values
    op = t * np.eye(k) + nabla(k)
    rhs = exact.sign_k(k) * (dpprime_at(pt, k) @ ph + pprime_at(pt) @ dk)
    r_phi = _rel(op @ ph - rhs, ph)
    r_psi = None
    if abs(discriminant(pt)) >= delta_floor:
        ps = psi(pt, f, cfg).values
        dps = dpsi_ds(pt, f, k, cfg).values
        lhs_psi = op @ np.linalg.solve(pprime_at(pt), ps)
        r_psi = _rel(lhs_psi - exact.sign_k(k) * dps, ps)
    res = r_phi if r_psi is None else max(r_phi, r_psi)
    return ResidualReport("exp_connection", pt.s, {"t": _cjson(t), "phi_form": r_phi, "psi_form": r_psi}, res)


# ---------------------------------------------------------------------------
# k = 2 second-order operator
# ---------------------------------------------------------------------------


def theta_kernels(s1: complex, s2: complex, f: EntireFunction, m: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> dict:
    """Contour kernels (a)..(f) for ``phi_m`` when k = 2."""
    pt = SymPoint([s1, s2])
    a = integrate(pt, f, [m], 1, cfg).values[0]
    two = integrate(pt, f, [m + 1, m], 2, cfg).values
    three = integrate(pt, f, [m + 2, m + 1, m], 3, cfg).values
    return {
        "a": a,
        "b": two[0],
        "c": -two[1],
        "d": 2 * three[0],
        "e": -2 * three[1],
        "f": 2 * three[2],
    }


def residual_theta_k2(s1: complex, s2: complex, f: EntireFunction, m: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> ResidualReport:
    """``Theta phi_m = phi_ss + s phi_sp + p phi_pp + 2 phi_p``."""
    ker = theta_kernels(s1, s2, f, m, cfg)
    theta = ker["d"] + s1 * ker["e"] + s2 * ker["f"] + 2 * ker["c"]
    return ResidualReport(
        "theta", (complex(s1), complex(s2)), {"m": m, "f": f.descriptor()},
        abs(theta) / (1.0 + abs(ker["a"])),
    )


def _cjson(c) -> dict:
    c = complex(c)
    return {"re": c.real, "im": c.imag}
