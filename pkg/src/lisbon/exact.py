"""
Exact polynomial matrices over Z[s_1, ..., s_k, z].

Monomials are packed into a single Python int, ``FIELD_BITS`` bits per
variable, with ``z`` in the most significant field followed by
``s_1, ..., s_k``. Multiplying monomials is then integer addition of keys,
and sorting keys gives lexicographic order on ``(e_z, e_1, ..., e_k)``.
Coefficients are Python ints, so every identity checked here is checked
exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

FIELD_BITS = 16
_MASK = (1 << FIELD_BITS) - 1

Z = "z"


def _shift(k: int, var) -> int:
    """Bit offset of ``var`` (an int ``h`` in 1..k for ``s_h``, or ``"z"``)."""
    if var == Z:
        return FIELD_BITS * k
    if not 1 <= var <= k:
        raise ValueError(f"variable s_{var} outside 1..{k}")
    return FIELD_BITS * (k - var)


class MPoly:
    """Sparse polynomial in ``s_1..s_k, z`` with integer coefficients."""

    __slots__ = ("k", "terms", "_compiled")

    def __init__(self, k: int, terms: Optional[dict] = None):
        self.k = k
        self.terms = {m: c for m, c in (terms or {}).items() if c}
        self._compiled = None

    # construction -------------------------------------------------------

    @classmethod
    def const(cls, k: int, c: int) -> "MPoly":
        return cls(k, {0: int(c)})

    @classmethod
    def var(cls, k: int, v) -> "MPoly":
        return cls(k, {1 << _shift(k, v): 1})

    @classmethod
    def from_exponents(cls, k: int, data: dict) -> "MPoly":
        """Build from ``{(e_1, ..., e_k, e_z): coeff}``."""
        terms = {}
        for exps, c in data.items():
            key = _pack(k, exps)
            terms[key] = terms.get(key, 0) + int(c)
        return cls(k, terms)

    def _lift(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            if other.k != self.k:
                raise ValueError("mixing polynomial rings with different k")
            return other
        return MPoly.const(self.k, int(other))

    # ring operations ----------------------------------------------------

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return MPoly(self.k, out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.k, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, MPoly):
            c = int(other)
            return MPoly(self.k, {m: c * v for m, v in self.terms.items()})
        other = self._lift(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        get = out.get
        for mb, cb in b.items():
            for ma, ca in a.items():
                key = ma + mb
                out[key] = get(key, 0) + ca * cb
        return MPoly(self.k, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = MPoly.const(self.k, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = MPoly.const(self.k, int(other))
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.k == other.k and self.terms == other.terms

    def __hash__(self):
        return hash((self.k, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def partial(self, v) -> "MPoly":
        """Exact partial derivative in ``s_v`` (``v`` in 1..k) or ``"z"``."""
        sh = _shift(self.k, v)
        one = 1 << sh
        out = {}
        for m, c in self.terms.items():
            e = (m >> sh) & _MASK
            if e:
                out[m - one] = c * e
        return MPoly(self.k, out)

    # structure ----------------------------------------------------------

    def exponents(self, key: int) -> tuple:
        """``(e_1, ..., e_k, e_z)`` of a packed key."""
        k = self.k
        return tuple((key >> _shift(k, h)) & _MASK for h in range(1, k + 1)) + (
            (key >> _shift(k, Z)) & _MASK,
        )

    def items(self):
        """Terms in canonical (descending lex on ``(e_z, e_1..e_k)``) order."""
        for m in sorted(self.terms, reverse=True):
            yield self.exponents(m), self.terms[m]

    def z_degree(self) -> int:
        if not self.terms:
            return -1
        return max(self.terms) >> _shift(self.k, Z)

    def z_coefficients(self) -> list:
        """Coefficients in ``z`` (each free of ``z``), lowest degree first."""
        sh = _shift(self.k, Z)
        low = (1 << sh) - 1
        out = [dict() for _ in range(self.z_degree() + 1)]
        for m, c in self.terms.items():
            out[m >> sh][m & low] = c
        return [MPoly(self.k, d) for d in out]

    @classmethod
    def from_z_coefficients(cls, k: int, coeffs: list) -> "MPoly":
        sh = _shift(k, Z)
        terms = {}
        for d, cpoly in enumerate(coeffs):
            base = d << sh
            for m, c in cpoly.terms.items():
                terms[base + m] = c
        return cls(k, terms)

    # numerics -----------------------------------------------------------

    def _compile(self):
        if self._compiled is None:
            keys = list(self.terms)
            exps = np.array([self.exponents(m) for m in keys], dtype=float).reshape(
                len(keys), self.k + 1
            )
            coeffs = np.array([float(self.terms[m]) for m in keys], dtype=float)
            self._compiled = (exps, coeffs)
        return self._compiled

    def evaluate(self, s, z: complex = 0.0) -> complex:
        """Numeric value at ``(s_1..s_k, z)``."""
        exps, coeffs = self._compile()
        if len(coeffs) == 0:
            return 0j
        point = np.append(np.asarray(s, dtype=complex), complex(z))
        return complex(np.prod(point[None, :] ** exps, axis=1) @ coeffs)

    def __repr__(self):
        return f"MPoly(k={self.k}, {self})"

    def __str__(self):
        if not self.terms:
            return "0"
        names = [f"s{h}" for h in range(1, self.k + 1)] + ["z"]
        parts = []
        for exps, c in self.items():
            mono = "*".join(
                n if e == 1 else f"{n}^{e}" for n, e in zip(names, exps) if e
            )
            if not mono:
                parts.append(f"{c:+d}")
            elif c == 1:
                parts.append(f"+{mono}")
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c:+d}*{mono}")
        text = " ".join(parts)
        return text[1:] if text.startswith("+") else text


def _pack(k: int, exps) -> int:
    exps = tuple(exps)
    if len(exps) != k + 1:
        raise ValueError("exponent vector must have length k + 1")
    key = 0
    for h in range(1, k + 1):
        key |= int(exps[h - 1]) << _shift(k, h)
    return key | (int(exps[k]) << _shift(k, Z))


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


class PolyMatrix:
    """Rectangular matrix of :class:`MPoly` entries."""

    __slots__ = ("k", "rows", "_compiled")

    def __init__(self, k: int, rows: list):
        self.k = k
        self.rows = [list(r) for r in rows]
        width = {len(r) for r in self.rows}
        if len(width) > 1:
            raise ValueError("ragged matrix")
        self._compiled = None

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    @classmethod
    def zeros(cls, k: int, r: int, c: int) -> "PolyMatrix":
        return cls(k, [[MPoly(k) for _ in range(c)] for _ in range(r)])

    @classmethod
    def identity(cls, k: int, n: int, scale: int = 1) -> "PolyMatrix":
        m = cls.zeros(k, n, n)
        for i in range(n):
            m.rows[i][i] = MPoly.const(k, scale)
        return m

    @classmethod
    def from_ints(cls, k: int, data) -> "PolyMatrix":
        return cls(k, [[MPoly.const(k, int(v)) for v in row] for row in data])

    @classmethod
    def block(cls, blocks: list) -> "PolyMatrix":
        k = blocks[0][0].k
        rows = []
        for brow in blocks:
            for i in range(brow[0].shape[0]):
                rows.append([e for b in brow for e in b.rows[i]])
        return cls(k, rows)

    def sub(self, r0: int, r1: int, c0: int, c1: int) -> "PolyMatrix":
        return PolyMatrix(self.k, [row[c0:c1] for row in self.rows[r0:r1]])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def _check(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check(other)
        return PolyMatrix(
            self.k, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)]
        )

    def __sub__(self, other):
        self._check(other)
        return PolyMatrix(
            self.k, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)]
        )

    def __neg__(self):
        return PolyMatrix(self.k, [[-a for a in r] for r in self.rows])

    def scale(self, c) -> "PolyMatrix":
        """Multiply every entry by an int or an :class:`MPoly`."""
        return PolyMatrix(self.k, [[a * c for a in r] for r in self.rows])

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        n, m = self.shape
        m2, p = other.shape
        if m != m2:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(n):
            row = []
            for j in range(p):
                acc = {}
                for t in range(m):
                    a = self.rows[i][t]
                    b = other.rows[t][j]
                    if a.terms and b.terms:
                        for mk, c in (a * b).terms.items():
                            acc[mk] = acc.get(mk, 0) + c
                row.append(MPoly(self.k, acc))
            out.append(row)
        return PolyMatrix(self.k, out)

    def partial(self, v) -> "PolyMatrix":
        return PolyMatrix(self.k, [[a.partial(v) for a in r] for r in self.rows])

    def map(self, fn) -> "PolyMatrix":
        return PolyMatrix(self.k, [[fn(a) for a in r] for r in self.rows])

    def is_zero(self) -> bool:
        return all(a.is_zero() for r in self.rows for a in r)

    def first_nonzero(self):
        for i, r in enumerate(self.rows):
            for j, a in enumerate(r):
                if not a.is_zero():
                    return (i, j), a
        return None

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for r, s in zip(self.rows, other.rows) for a, b in zip(r, s)
        )

    def evaluate(self, s, z: complex = 0.0) -> np.ndarray:
        """Numeric complex matrix at ``(s, z)``."""
        if self._compiled is None:
            exps, coeffs, idx = [], [], []
            n, m = self.shape
            for i in range(n):
                for j in range(m):
                    e, c = self.rows[i][j]._compile()
                    exps.append(e)
                    coeffs.append(c)
                    idx.append(np.full(len(c), i * m + j))
            self._compiled = (
                np.concatenate(exps) if exps else np.zeros((0, self.k + 1)),
                np.concatenate(coeffs) if coeffs else np.zeros(0),
                np.concatenate(idx).astype(int) if idx else np.zeros(0, int),
            )
        exps, coeffs, idx = self._compiled
        n, m = self.shape
        point = np.append(np.asarray(s, dtype=complex), complex(z))
        vals = coeffs * np.prod(point[None, :] ** exps, axis=1)
        out = np.zeros(n * m, dtype=complex)
        np.add.at(out, idx, vals)
        return out.reshape(n, m)


# ---------------------------------------------------------------------------
# the distinguished objects
# ---------------------------------------------------------------------------


def s_var(k: int, h: int) -> MPoly:
    """``s_h`` with ``s_0 = 1``."""
    return MPoly.const(k, 1) if h == 0 else MPoly.var(k, h)


@lru_cache(maxsize=None)
def poly_P(k: int) -> MPoly:
    z = MPoly.var(k, Z)
    return sum(((-1) ** h * s_var(k, h) * z ** (k - h) for h in range(k + 1)), MPoly(k))


@lru_cache(maxsize=None)
def poly_P2(k: int) -> MPoly:
    return poly_P(k) * poly_P(k)


@lru_cache(maxsize=None)
def symbolic_companion(k: int) -> PolyMatrix:
    a = PolyMatrix.zeros(k, k, k)
    for i in range(k - 1):
        a.rows[i][i + 1] = MPoly.const(k, 1)
    for col in range(k):
        h = k - col
        a.rows[k - 1][col] = s_var(k, h) * (-1) ** (h - 1)
    return a


@lru_cache(maxsize=None)
def symbolic_power(k: int, p: int) -> PolyMatrix:
    """``A^p`` built incrementally and cached per ``(k, p)``."""
    if p == 0:
        return PolyMatrix.identity(k, k)
    return symbolic_power(k, p - 1) @ symbolic_companion(k)


@lru_cache(maxsize=None)
def symbolic_nabla(k: int) -> PolyMatrix:
    return PolyMatrix.from_ints(
        k, [[i if j == i - 1 else 0 for j in range(k)] for i in range(k)]
    )


@lru_cache(maxsize=None)
def symbolic_pprime_of_A(k: int) -> PolyMatrix:
    """``P'_s(A) = sum_{h<k} (-1)^h (k-h) s_h A^(k-h-1)``."""
    out = PolyMatrix.zeros(k, k, k)
    for h in range(k):
        out = out + symbolic_power(k, k - h - 1).scale(s_var(k, h) * ((-1) ** h * (k - h)))
    return out


def monomial_column(k: int) -> PolyMatrix:
    """``E(z)`` as a k x 1 matrix."""
    z = MPoly.var(k, Z)
    return PolyMatrix(k, [[z**j] for j in range(k)])


def reduce_mod_P2(v: MPoly) -> MPoly:
    """Remainder of ``v`` on division by ``P^2`` (monic of z-degree 2k)."""
    k = v.k
    d2 = 2 * k
    if v.z_degree() < d2:
        return v
    coeffs = v.z_coefficients()
    div = poly_P2(k).z_coefficients()
    for d in range(len(coeffs) - 1, d2 - 1, -1):
        c = coeffs[d]
        if c.is_zero():
            continue
        off = d - d2
        for i in range(d2):
            if not div[i].is_zero():
                coeffs[off + i] = coeffs[off + i] - c * div[i]
        coeffs[d] = MPoly(k)
    return MPoly.from_z_coefficients(k, coeffs[:d2])


# ---------------------------------------------------------------------------
# identity certificates
# ---------------------------------------------------------------------------


@dataclass
class IdentityReport:
    """Verdict of one exact identity check; ``witness`` locates a nonzero entry."""

    name: str
    params: dict
    verdict: str
    witness: Optional[dict] = field(default=None)

    @property
    def ok(self) -> bool:
        return self.verdict == "ExactZero"

    def to_json(self) -> dict:
        out = {"name": self.name, "params": dict(self.params), "verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = self.witness
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def certify(name: str, params: dict, diff: PolyMatrix) -> IdentityReport:
    """ExactZero if ``diff`` is the zero matrix, else Failed with its first nonzero entry."""
    hit = diff.first_nonzero()
    if hit is None:
        return IdentityReport(name, params, "ExactZero")
    (i, j), poly = hit
    return IdentityReport(
        name, params, "Failed", {"entry": [i, j], "polynomial": str(poly)}
    )


def sign_k(k: int) -> int:
    """``(-1)^(k-1)``, the scalar attached to the ``s_k`` direction."""
    return (-1) ** (k - 1)


@lru_cache(maxsize=None)
def block_matrix(k: int) -> PolyMatrix:
    """``M = [[A, B], [0, A]]`` with ``B = (-1)^(k-1) dA/ds_k``."""
    a = symbolic_companion(k)
    b = a.partial(k).scale(sign_k(k))
    return PolyMatrix.block([[a, b], [PolyMatrix.zeros(k, k, k), a]])


@lru_cache(maxsize=None)
def block_power(k: int, p: int) -> PolyMatrix:
    if p == 0:
        return PolyMatrix.identity(k, 2 * k)
    return block_power(k, p - 1) @ block_matrix(k)


def verify_block_power(k: int, p: int) -> IdentityReport:
    """``M^p`` has diagonal blocks ``A^p`` and corner ``(-1)^(k-1) d(A^p)/ds_k``."""
    if p < 0:
        raise ValueError("p must be >= 0")
    mp = block_power(k, p)
    ap = symbolic_power(k, p)
    bp = ap.partial(k).scale(sign_k(k))
    expected = PolyMatrix.block([[ap, bp], [PolyMatrix.zeros(k, k, k), ap]])
    return certify("block_power", {"k": k, "p": p}, mp - expected)


def _mod_p2_column(diff: PolyMatrix) -> PolyMatrix:
    return diff.map(reduce_mod_P2)


def verify_E7(k: int, p: int) -> IdentityReport:
    """``z^p E = A^p E + (-1)^(k-1) P d(A^p)/ds_k E`` modulo ``P^2``."""
    if p < 0:
        raise ValueError("p must be >= 0")
    e = monomial_column(k)
    z = MPoly.var(k, Z)
    lhs = e.scale(z**p)
    ap = symbolic_power(k, p)
    rhs = ap @ e + (ap.partial(k) @ e).scale(poly_P(k) * sign_k(k))
    return certify("E7", {"k": k, "p": p}, _mod_p2_column(lhs - rhs))


def verify_E7bis(k: int) -> IdentityReport:
    """``P' E = P'(A) E + (-1)^(k-1) P dP'(A)/ds_k E`` modulo ``P^2``."""
    e = monomial_column(k)
    lhs = e.scale(poly_P(k).partial(Z))
    pa = symbolic_pprime_of_A(k)
    rhs = pa @ e + (pa.partial(k) @ e).scale(poly_P(k) * sign_k(k))
    return certify("E7bis", {"k": k}, _mod_p2_column(lhs - rhs))


def verify_simple2(k: int, p: int, h: int) -> IdentityReport:
    """``(-1)^(k-h) dA^p/ds_h = dA^p/ds_k A^(k-h)``."""
    if not 1 <= h <= k:
        raise ValueError("h must lie in [1, k]")
    if p < 0:
        raise ValueError("p must be >= 0")
    ap = symbolic_power(k, p)
    lhs = ap.partial(h).scale((-1) ** (k - h))
    rhs = ap.partial(k) @ symbolic_power(k, k - h)
    return certify("simple2", {"k": k, "p": p, "h": h}, lhs - rhs)


def verify_nabla_identity(k: int, p: int) -> IdentityReport:
    """``nabla A^p - A^p nabla + p A^(p-1) = (-1)^(k-1) d(A^p)/ds_k P'(A)``.

    For ``p = 0`` the term ``p A^(p-1)`` is read as zero.
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    nab = symbolic_nabla(k)
    ap = symbolic_power(k, p)
    lhs = nab @ ap - ap @ nab
    if p >= 1:
        lhs = lhs + symbolic_power(k, p - 1).scale(p)
    rhs = (ap.partial(k) @ symbolic_pprime_of_A(k)).scale(sign_k(k))
    return certify("nabla_identity", {"k": k, "p": p}, lhs - rhs)


# ---------------------------------------------------------------------------
# discriminant
# ---------------------------------------------------------------------------


def _determinant(mat: list, k: int) -> MPoly:
    """Laplace expansion along rows, memoised on the set of used columns."""
    n = len(mat)
    memo = {}

    def det(row: int, cols: tuple) -> MPoly:
        if row == n:
            return MPoly.const(k, 1)
        key = (row, cols)
        if key in memo:
            return memo[key]
        acc = MPoly(k)
        for pos, c in enumerate(cols):
            entry = mat[row][c]
            if entry.is_zero():
                continue
            minor = det(row + 1, cols[:pos] + cols[pos + 1:])
            term = entry * minor
            acc = acc - term if pos % 2 else acc + term
        memo[key] = acc
        return acc

    return det(0, tuple(range(n)))


@lru_cache(maxsize=None)
def sylvester_discriminant(k: int) -> MPoly:
    """Exact discriminant ``Delta(s)`` as a polynomial in ``s`` (no ``z``).

    ``Res_z(P, P') = (-1)^(k(k-1)/2) Delta`` for monic ``P``, so the Sylvester
    determinant is multiplied by that sign (k = 2 gives ``s_1^2 - 4 s_2``).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    p = poly_P(k).z_coefficients()[::-1]  # descending, length k+1
    dp = poly_P(k).partial(Z).z_coefficients()[::-1]  # length k
    n = 2 * k - 1
    zero = MPoly(k)
    mat = []
    for i in range(k - 1):
        mat.append([zero] * i + p + [zero] * (n - i - len(p)))
    for i in range(k):
        mat.append([zero] * i + dp + [zero] * (n - i - len(dp)))
    return _determinant(mat, k) * ((-1) ** (k * (k - 1) // 2))


def identity_sweep(k_values: Iterable[int]) -> list:
    """Every certificate over ``p in [0, 2k]`` and ``h in [1, k]``."""
    out = []
    for k in k_values:
        out.append(verify_E7bis(k))
        for p in range(2 * k + 1):
            out.append(verify_block_power(k, p))
            out.append(verify_E7(k, p))
            out.append(verify_nabla_identity(k, p))
            for h in range(1, k + 1):
                out.append(verify_simple2(k, p, h))
    return out


