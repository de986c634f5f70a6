"""
Floating-point shadows of the exact certificates in :mod:`lisbon.exact`.

Each shadow recomputes both sides of an identity with plain numpy at random
complex points, using only :mod:`lisbon.poly_core`, and compares them with
(a) each other and (b) the exact polynomial matrices evaluated at the same
point. A systematically wrong exact kernel shows up in (b) even if it
happens to certify a wrong identity as zero.
"""

from __future__ import annotations

import numpy as np

from . import exact
from .poly_core import (
    SymPoint,
    companion,
    eval_dpoly,
    eval_poly,
    monomial_vector,
    nabla,
    pprime_of_companion,
    roots,
)


def _rel(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.max(np.abs(a - b)) / (1.0 + max(np.max(np.abs(a)), np.max(np.abs(b)))))


def _dA(pt: SymPoint, h: int) -> np.ndarray:
    """``dA/ds_h``; A is affine in s so a unit difference is exact."""
    return companion(pt.replace(h, pt.coord(h) + 1)) - companion(pt)


def _dpow(pt: SymPoint, p: int, h: int) -> np.ndarray:
    """``d(A^p)/ds_h = sum_i A^i dA A^(p-1-i)``."""
    a = companion(pt)
    d = _dA(pt, h)
    out = np.zeros_like(a)
    for i in range(p):
        out += np.linalg.matrix_power(a, i) @ d @ np.linalg.matrix_power(a, p - 1 - i)
    return out


def _dpprime(pt: SymPoint, h: int) -> np.ndarray:
    k = pt.k
    out = np.zeros((k, k), dtype=complex)
    for j in range(k):
        out += (-1) ** j * (k - j) * pt.coord(j) * _dpow(pt, k - j - 1, h)
    # the s_h coefficient itself also depends on s_h (h < k)
    if h < k:
        out += (-1) ** h * (k - h) * np.linalg.matrix_power(companion(pt), k - h - 1)
    return out


def _random_point(rng, k, radius=1.5):
    s = (rng.normal(size=k) + 1j * rng.normal(size=k)) * radius / np.sqrt(2 * k)
    z = complex(rng.normal() + 1j * rng.normal())
    return SymPoint(s), z


def shadow_block_power(k: int, p: int, rng, n: int = 20) -> float:
    worst = 0.0
    sign = exact.sign_k(k)
    for _ in range(n):
        pt, _ = _random_point(rng, k)
        a = companion(pt)
        m = np.block([[a, sign * _dA(pt, k)], [np.zeros_like(a), a]])
        mp = np.linalg.matrix_power(m, p)
        ap = np.linalg.matrix_power(a, p)
        expect = np.block([[ap, sign * _dpow(pt, p, k)], [np.zeros_like(a), ap]])
        worst = max(worst, _rel(mp, expect), _rel(exact.block_power(k, p).evaluate(pt.s), mp))
    return worst


def _e7_defect(pt, z, p):
    """Numeric ``z^p E - A^p E - (-1)^(k-1) P d(A^p)/ds_k E`` and its z-derivative."""
    k = pt.k
    e = monomial_vector(k, z)
    de = nabla(k) @ e
    ap = np.linalg.matrix_power(companion(pt), p)
    dap = _dpow(pt, p, k)
    sign = exact.sign_k(k)
    P, dP = eval_poly(pt, z), eval_dpoly(pt, z)
    val = z**p * e - ap @ e - sign * P * (dap @ e)
    dz_lead = p * z ** (p - 1) * e if p else 0 * e
    der = dz_lead + z**p * de - ap @ de - sign * (dP * (dap @ e) + P * (dap @ de))
    return val, der


def _e7bis_defect(pt, z):
    k = pt.k
    e = monomial_vector(k, z)
    de = nabla(k) @ e
    pa = pprime_of_companion(pt)
    dpa = _dpprime(pt, k)
    sign = exact.sign_k(k)
    P, dP = eval_poly(pt, z), eval_dpoly(pt, z)
    # d/dz P'(z) = P''(z)
    ddP = np.polyval(np.polyder(pt.coefficients(), 2), z) if k >= 2 else 0.0
    val = dP * e - pa @ e - sign * P * (dpa @ e)
    der = ddP * e + dP * de - pa @ de - sign * (dP * (dpa @ e) + P * (dpa @ de))
    return val, der


def _mod_p2_shadow(exact_diff_fn, defect_fn, k, rng, n):
    worst = 0.0
    for _ in range(n):
        pt, z = _random_point(rng, k)
        val, _ = defect_fn(pt, z)
        # unreduced exact difference agrees with numpy at a generic (s, z)
        worst = max(worst, _rel(exact_diff_fn().evaluate(pt.s, z)[:, 0], val))
        # P^2 divides the difference: it and its z-derivative vanish at roots
        for zr in roots(pt).values:
            v0, v1 = defect_fn(pt, zr)
            scale = 1.0 + np.max(np.abs(monomial_vector(k, zr))) ** 2
            worst = max(worst, float(np.max(np.abs(v0)) / scale), float(np.max(np.abs(v1)) / scale))
    return worst


def shadow_E7(k: int, p: int, rng, n: int = 20) -> float:
    def diff():
        e = exact.monomial_column(k)
        z = exact.MPoly.var(k, exact.Z)
        ap = exact.symbolic_power(k, p)
        rhs = ap @ e + (ap.partial(k) @ e).scale(exact.poly_P(k) * exact.sign_k(k))
        return e.scale(z**p) - rhs

    return _mod_p2_shadow(diff, lambda pt, z: _e7_defect(pt, z, p), k, rng, n)


def shadow_E7bis(k: int, rng, n: int = 20) -> float:
    def diff():
        e = exact.monomial_column(k)
        pa = exact.symbolic_pprime_of_A(k)
        rhs = pa @ e + (pa.partial(k) @ e).scale(exact.poly_P(k) * exact.sign_k(k))
        return e.scale(exact.poly_P(k).partial(exact.Z)) - rhs

    return _mod_p2_shadow(diff, _e7bis_defect, k, rng, n)


def shadow_simple2(k: int, p: int, h: int, rng, n: int = 20) -> float:
    worst = 0.0
    for _ in range(n):
        pt, _ = _random_point(rng, k)
        lhs = (-1) ** (k - h) * _dpow(pt, p, h)
        rhs = _dpow(pt, p, k) @ np.linalg.matrix_power(companion(pt), k - h)
        ex = exact.symbolic_power(k, p).partial(h).evaluate(pt.s) * (-1) ** (k - h)
        worst = max(worst, _rel(lhs, rhs), _rel(ex, lhs))
    return worst


def shadow_nabla(k: int, p: int, rng, n: int = 20) -> float:
    worst = 0.0
    nab = nabla(k)
    for _ in range(n):
        pt, _ = _random_point(rng, k)
        a = companion(pt)
        ap = np.linalg.matrix_power(a, p)
        lhs = nab @ ap - ap @ nab
        if p >= 1:
            lhs = lhs + p * np.linalg.matrix_power(a, p - 1)
        rhs = exact.sign_k(k) * _dpow(pt, p, k) @ pprime_of_companion(pt)
        ex = exact.symbolic_pprime_of_A(k).evaluate(pt.s)
        worst = max(worst, _rel(lhs, rhs), _rel(ex, pprime_of_companion(pt)))
    return worst


def shadow_sweep(k_values, rng, n: int = 20) -> dict:
    """Worst shadow error per identity over the same sweep as
    :func:`lisbon.exact.identity_sweep`."""
    worst = {"block_power": 0.0, "E7": 0.0, "E7bis": 0.0, "simple2": 0.0, "nabla_identity": 0.0}
    for k in k_values:
        worst["E7bis"] = max(worst["E7bis"], shadow_E7bis(k, rng, n))
        for p in range(2 * k + 1):
            worst["block_power"] = max(worst["block_power"], shadow_block_power(k, p, rng, n))
            worst["E7"] = max(worst["E7"], shadow_E7(k, p, rng, n))
            worst["nabla_identity"] = max(worst["nabla_identity"], shadow_nabla(k, p, rng, n))
            for h in range(1, k + 1):
                worst["simple2"] = max(worst["simple2"], shadow_simple2(k, p, h, rng, n))
    return worst
