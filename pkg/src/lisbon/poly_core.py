"""
Numeric algebra attached to a point ``s`` of the space of monic polynomials.

A point ``s = (s_1, ..., s_k)`` stands for the polynomial

    P_s(z) = sum_{h=0}^{k} (-1)^h s_h z^(k-h),    s_0 = 1,

so that ``s_h`` is the h-th elementary symmetric function of its roots.
Everything here is a pure function of ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonConvergenceError

ROOT_MAX_ITER = 200
RELAXED_VIETA_GATE = 1e-5
START_OFFSETS = (0.4, 1.9, 3.3)


@dataclass(frozen=True)
class SymPoint:
    """Coordinates ``(s_1, ..., s_k)`` of a monic polynomial of degree ``k``."""

    s: tuple

    def __init__(self, s: Sequence[complex]):
        values = tuple(complex(v) for v in s)
        if len(values) < 1:
            raise ValueError("a SymPoint needs k >= 1 coordinates")
        object.__setattr__(self, "s", values)

    @property
    def k(self) -> int:
        return len(self.s)

    def coord(self, h: int) -> complex:
        """``s_h`` with the convention ``s_0 = 1``."""
        if h == 0:
            return 1.0 + 0j
        return self.s[h - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.s, dtype=complex)

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def coefficients(self) -> np.ndarray:
        """Coefficients of ``P_s`` in descending powers of z (numpy.polyval order)."""
        c = np.empty(self.k + 1, dtype=complex)
        for h in range(self.k + 1):
            c[h] = (-1) ** h * self.coord(h)
        return c

    def replace(self, h: int, value: complex) -> "SymPoint":
        s = list(self.s)
        s[h - 1] = value
        return SymPoint(s)


@dataclass(frozen=True)
class RootSet:
    """Roots of ``P_s`` (order unspecified) and the attained Vieta error."""

    values: np.ndarray
    accuracy: float

    def __len__(self):
        return len(self.values)


def eval_poly(pt: SymPoint, z):
    """Evaluate ``P_s(z)`` by Horner's rule; ``z`` may be an array."""
    z = np.asarray(z, dtype=complex)
    acc = np.ones_like(z)
    for h in range(1, pt.k + 1):
        acc = acc * z + (-1) ** h * pt.s[h - 1]
    return acc[()] if acc.ndim == 0 else acc


def eval_dpoly(pt: SymPoint, z):
    """Evaluate ``P'_s(z)``; the result never depends on ``s_k``."""
    z = np.asarray(z, dtype=complex)
    k = pt.k
    acc = np.full_like(z, complex(k))
    for h in range(1, k):
        acc = acc * z + (-1) ** h * (k - h) * pt.s[h - 1]
    return acc[()] if acc.ndim == 0 else acc


def companion(pt: SymPoint) -> np.ndarray:
    """Companion matrix ``A(s)``: ones on the superdiagonal, last row
    ``((-1)^(k-1) s_k, ..., (-1)^(h-1) s_h, ..., s_1)``."""
    k = pt.k
    a = np.zeros((k, k), dtype=complex)
    for i in range(k - 1):
        a[i, i + 1] = 1.0
    for col in range(k):
        h = k - col
        a[k - 1, col] = (-1) ** (h - 1) * pt.coord(h)
    return a


def nabla(k: int) -> np.ndarray:
    """Constant matrix with subdiagonal ``1, ..., k-1``, so that d/dz E(z) = nabla E(z)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = np.zeros((k, k), dtype=complex)
    for i in range(1, k):
        n[i, i - 1] = i
    return n


def monomial_vector(k: int, z: complex) -> np.ndarray:
    """``E(z) = (1, z, ..., z^(k-1))``."""
    return np.power(complex(z), np.arange(k))


def pprime_of_companion(pt: SymPoint) -> np.ndarray:
    """``P'_s(A(s)) = sum_{h<k} (-1)^h (k-h) s_h A^(k-h-1)``, via Horner in A."""
    k = pt.k
    a = companion(pt)
    out = k * np.eye(k, dtype=complex)
    for h in range(1, k):
        out = out @ a + (-1) ** h * (k - h) * pt.coord(h) * np.eye(k)
    return out


def elementary_from_roots(zs) -> np.ndarray:
    """Recover ``(s_1, ..., s_k)`` from a root multiset."""
    c = np.poly(np.asarray(zs, dtype=complex))
    k = len(c) - 1
    return np.array([(-1) ** h * c[h] for h in range(1, k + 1)], dtype=complex)


def _root_radius(pt: SymPoint) -> float:
    return 1.0 + max(abs(pt.s[h - 1]) ** (1.0 / h) for h in range(1, pt.k + 1))


def _vieta_error(z, s) -> float:
    return float(np.max(np.abs(elementary_from_roots(z) - s)))


def _merge_clusters(z: np.ndarray, radius: float) -> np.ndarray:
    """Replace each single-linkage cluster (links shorter than ``radius``)
    by copies of its mean."""
    n = len(z)
    label = list(range(n))

    def find(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) < radius:
                label[find(i)] = find(j)
    roots_of = np.array([find(i) for i in range(n)])
    out = z.copy()
    for r in set(roots_of.tolist()):
        members = roots_of == r
        out[members] = z[members].mean()
    return out


def _aberth(coeffs, s, z, scale):
    """Aberth-Ehrlich iteration from ``z``; returns the iterate with the
    smallest Vieta error seen and that error."""
    dcoeffs = np.polyder(coeffs)
    eps = np.finfo(float).eps
    best, best_err = z.copy(), np.inf
    for _ in range(ROOT_MAX_ITER):
        p = np.polyval(coeffs, z)
        dp = np.polyval(dcoeffs, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        denom = dp - p * inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(p == 0, 0.0, p / denom)
        if not np.all(np.isfinite(w)):
            # a node hit a critical point or a neighbour; nudge it
            bad = ~np.isfinite(w)
            z[bad] += 1e-8 * scale
            continue
        z = z - w
        err = _vieta_error(z, s)
        if err < best_err:
            best, best_err = z.copy(), err
        if np.all(np.abs(w) <= 4 * eps * (1.0 + np.abs(z))):
            break
    return best, best_err


def _polish_clusters(z, err, s, tol_abs):
    """Multiple roots: iterates wander inside a noise ball around each
    cluster, while the cluster mean is well conditioned. Merge at growing
    radii as long as the Vieta error stays comparable to the unmerged one."""
    size = 1.0 + float(np.max(np.abs(z)))
    budget = max(err, tol_abs) * (1.0 if err <= tol_abs else 10.0)
    for rel in (1e-6, 1e-4, 1e-2):
        merged = _merge_clusters(z, rel * size)
        if np.array_equal(merged, z):
            continue
        merr = _vieta_error(merged, s)
        if merr <= budget:
            z, err = merged, merr
    return z, err


def roots(pt: SymPoint, tol: float = 1e-10) -> RootSet:
    """Roots of ``P_s`` by Aberth-Ehrlich simultaneous iteration.

    Starting values sit on a circle of radius ``1 + max |s_h|^(1/h)`` at a
    generic angular offset (symmetric starts can trap iterates of symmetric
    polynomials); other offsets are tried if the first run fails. The result
    is accepted when the Vieta round-trip error is at most
    ``tol * (1 + |s|)``; clustered (multiple) roots are still returned when
    that error passes the relaxed ``1e-5`` gate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    k = pt.k
    s = pt.as_array()
    scale = 1.0 + float(np.linalg.norm(s))
    if k == 1:
        return RootSet(np.array([s[0]]), 0.0)

    coeffs = pt.coefficients()
    radius = _root_radius(pt)
    fallback, fallback_err = None, np.inf
    for offset in START_OFFSETS:
        angles = 2.0 * np.pi * np.arange(k) / k + offset
        z, err = _aberth(coeffs, s, radius * np.exp(1j * angles), scale)
        z, err = _polish_clusters(z, err, s, tol * scale)
        if err <= tol * scale:
            return RootSet(z, err)
        if err < fallback_err:
            fallback, fallback_err = z, err
    if fallback_err <= RELAXED_VIETA_GATE * scale:
        return RootSet(fallback, fallback_err)
    raise NonConvergenceError(
        f"Aberth iteration stalled: Vieta error {fallback_err:.3e} for s={pt.s}"
    )


def discriminant(pt: SymPoint) -> complex:
    """``prod_{i<j} (z_i - z_j)^2`` from the numeric roots; 1 when k = 1."""
    if pt.k == 1:
        return 1.0 + 0j
    zs = roots(pt).values
    out = 1.0 + 0j
    for i in range(pt.k):
        for j in range(i + 1, pt.k):
            out *= (zs[i] - zs[j]) ** 2
    return complex(out)


def newton_power_sum(pt: SymPoint, h: int) -> complex:
    """Power sum ``sum_j z_j^h`` from Newton's identities (no root extraction)."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    k = pt.k
    p = [complex(k)]
    for m in range(1, h + 1):
        acc = 0j
        for i in range(1, min(m - 1, k) + 1):
            acc += (-1) ** (i - 1) * pt.coord(i) * p[m - i]
        if m <= k:
            acc += (-1) ** (m - 1) * m * pt.coord(m)
        p.append(acc)
    return p[h]
