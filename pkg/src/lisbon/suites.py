"""
Seeded verification sweeps.

Every suite draws its points from ``default_rng([seed, suite_index, k])``,
so results do not depend on which thread ran which task. Reports come back
in a canonical order (identity, then parameters).
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import exact, shadow, verifier
from .contour import DEFAULT_CONFIG, EntireFunction, QuadratureConfig
from .poly_core import SymPoint, discriminant

THRESHOLDS = {
    "system": 1e-7,
    "closure": 1e-7,
    "atat": 1e-6,
    "atat_closure": 1e-6,
    "atat_from_phi": 1e-6,
    "correspondence": 1e-6,
    "correspondence_system": 1e-6,
    "theta": 1e-7,
    "dz_action": 1e-6,
    "dz_action_star2": 1e-6,
    "leibniz": 1e-7,
    "exp_eigen": 1e-7,
    "exp_connection": 1e-6,
    "mixed_partial": 1e-7,
    "fd_cross_check": 1e-6,
    "shadow": 1e-9,
}

SUITES = (
    "system",
    "atat",
    "correspondence",
    "theta",
    "dz",
    "exp",
    "mixed",
    "fd",
    "identities",
)

ATAT_DELTA = 0.5


def sweep_functions() -> list:
    """``1, z, z^2, exp(z), exp(2z)``."""
    return [
        EntireFunction.one(),
        EntireFunction.monomial(1),
        EntireFunction.monomial(2),
        EntireFunction.exp(1),
        EntireFunction.exp(2),
    ]


def random_point(rng, k: int, radius: float) -> SymPoint:
    """Uniform draw from the ball ``|s| <= radius`` in C^k (Euclidean norm)."""
    v = rng.normal(size=k) + 1j * rng.normal(size=k)
    v /= np.linalg.norm(v)
    return SymPoint(v * radius * rng.uniform() ** (1.0 / (2 * k)))


@dataclass
class SweepConfig:
    seed: int = 0
    ks: Optional[Sequence[int]] = None
    k_max: int = 5
    points: int = 25
    radius: float = 3.0
    perturb: float = 0.0
    cfg: QuadratureConfig = field(default_factory=lambda: DEFAULT_CONFIG)

    def ks_for(self, default: Sequence[int]) -> list:
        if self.ks is None:
            return list(default)
        return [k for k in self.ks]


# ---------------------------------------------------------------------------
# suites; each returns (residual reports, identity reports)
# ---------------------------------------------------------------------------


def _system(sc: SweepConfig, rng, k):
    out = []
    c = np.exp(2j * np.pi * rng.uniform(size=k))
    for _ in range(sc.points):
        pt = random_point(rng, k, sc.radius)
        for f in sweep_functions():
            field_ = verifier.phi_field(f, sc.cfg)
            if sc.perturb:
                field_ = verifier.perturbed(field_, sc.perturb, c)
            out += _tag(verifier.system_residuals(field_, pt), f)
            out += _tag(verifier.system_residuals(verifier.a_times(field_), pt, "closure"), f)
    return out


def _off_discriminant_points(sc, rng, k):
    pts = []
    for _ in range(sc.points):
        pt = random_point(rng, k, sc.radius)
        if abs(discriminant(pt)) > ATAT_DELTA:
            pts.append(pt)
    return pts


def _atat(sc: SweepConfig, rng, k):
    out = []
    for pt in _off_discriminant_points(sc, rng, k):
        for f in sweep_functions():
            ps = verifier.psi_field(f, sc.cfg)
            ph = verifier.phi_field(f, sc.cfg)
            out += _tag(verifier.atat_residuals(ps, pt, "atat", ATAT_DELTA), f)
            out += _tag(verifier.atat_residuals(verifier.a_times(ps), pt, "atat_closure", ATAT_DELTA), f)
            out += _tag(verifier.atat_residuals(verifier.pprime_times(ph), pt, "atat_from_phi", ATAT_DELTA), f)
    return out


def _correspondence(sc: SweepConfig, rng, k):
    out = []
    for pt in _off_discriminant_points(sc, rng, k):
        for f in sweep_functions():
            out.append(verifier.correspondence(pt, f, sc.cfg, ATAT_DELTA))
            inv = verifier.pprime_inverse_times(verifier.psi_field(f, sc.cfg))
            out += _tag(verifier.system_residuals(inv, pt, "correspondence_system"), f)
    return out


def _theta(sc: SweepConfig, rng, k):
    if k != 2:
        return []
    out = []
    fs = [EntireFunction.one(), EntireFunction.monomial(1), EntireFunction.exp(1)]
    for _ in range(sc.points):
        pt = random_point(rng, 2, sc.radius)
        for f in fs:
            for m in range(6):
                out.append(verifier.residual_theta_k2(pt.s[0], pt.s[1], f, m, sc.cfg))
    return out


def _dz(sc: SweepConfig, rng, k):
    out = []
    for _ in range(max(1, sc.points // 2)):
        pt = random_point(rng, k, sc.radius)
        for f in sweep_functions():
            out.append(verifier.residual_dz_action(pt, f, sc.cfg))
            out.append(verifier.residual_dz_action_star2(pt, f, sc.cfg))
            out.append(verifier.leibniz_check(pt, f, sc.cfg))
        for t in (1, 2, 1 + 1j):
            out.append(verifier.exp_eigen_check(pt, t, sc.cfg))
    return out


def _exp(sc: SweepConfig, rng, k):
    out = []
    for _ in range(10):
        pt = random_point(rng, k, sc.radius)
        for t in (1, 2, 1 + 1j):
            out.append(verifier.residual_exp_connection(pt, t, sc.cfg, ATAT_DELTA))
    return out


def _mixed(sc: SweepConfig, rng, k):
    out = []
    if k < 3:
        return out
    fs = [EntireFunction.exp(1), EntireFunction.exp(2), EntireFunction.monomial(5)]
    for _ in range(10):
        pt = random_point(rng, k, sc.radius)
        for f in fs:
            for p in range(1, k - 1):
                for q in range(p + 1, k):
                    out.append(verifier.mixed_partial_check(pt, f, (p, q), sc.cfg))
    return out


def _fd(sc: SweepConfig, rng, k):
    out = []
    fs = [EntireFunction.exp(1), EntireFunction.monomial(3), EntireFunction.one()]
    for _ in range(10):
        pt = random_point(rng, k, sc.radius)
        for f in fs:
            for h in range(1, k + 1):
                out.append(verifier.fd_cross_check(pt, f, h, sc.cfg))
    return out


def _identities(sc: SweepConfig, rng, k):
    ids = exact.identity_sweep([k])
    worst = shadow.shadow_sweep([k], rng)
    shadows = [
        verifier.ResidualReport("shadow", (), {"k": k, "identity": name}, err)
        for name, err in sorted(worst.items())
    ]
    return shadows, ids


_RUNNERS: dict = {
    "system": (_system, (2, 3, 4)),
    "atat": (_atat, (2, 3, 4)),
    "correspondence": (_correspondence, (2, 3, 4)),
    "theta": (_theta, (2,)),
    "dz": (_dz, (2, 3, 4)),
    "exp": (_exp, (2, 3)),
    "mixed": (_mixed, (3, 4)),
    "fd": (_fd, (2, 3, 4)),
    "identities": (_identities, None),
}


def _tag(reports, f):
    for r in reports:
        r.params["f"] = f.descriptor()
    return reports


@dataclass
class SweepResult:
    seed: int
    suites: list
    records: list
    identities: list

    def failures(self) -> list:
        return [r for r in self.records if r.residual >= THRESHOLDS[r.identity]]

    def failed_identities(self) -> list:
        return [r for r in self.identities if not r.ok]

    @property
    def passed(self) -> bool:
        return not self.failures() and not self.failed_identities()

    def summary(self) -> dict:
        out = {}
        for r in self.records:
            entry = out.setdefault(
                r.identity, {"count": 0, "max": 0.0, "threshold": THRESHOLDS[r.identity]}
            )
            entry["count"] += 1
            entry["max"] = max(entry["max"], float(r.residual))
        for entry in out.values():
            entry["passed"] = entry["max"] < entry["threshold"]
        return dict(sorted(out.items()))

    def to_json(self) -> dict:
        return {
            "command": "verify",
            "seed": self.seed,
            "suites": list(self.suites),
            "passed": self.passed,
            "summary": self.summary(),
            "records": [r.to_json() for r in self.records],
            "identities": [r.to_json() for r in self.identities],
        }


def _record_key(r):
    return (
        r.identity,
        r.k,
        json.dumps(r.params, sort_keys=True, default=str),
        [(complex(v).real, complex(v).imag) for v in r.s],
    )


def _identity_key(r):
    return (r.name, json.dumps(r.params, sort_keys=True))


def thread_count() -> int:
    cap = os.environ.get("LISBON_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = max(1, min(n, int(cap)))
        except ValueError:
            pass
    return n


def run(suites: Sequence[str], sc: SweepConfig, progress: Optional[Callable] = None) -> SweepResult:
    """Run the named suites and merge their reports canonically."""
    tasks = []
    for name in suites:
        if name not in _RUNNERS:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
        fn, default_ks = _RUNNERS[name]
        if default_ks is None:
            default_ks = range(2, sc.k_max + 1)
        for k in sc.ks_for(default_ks):
            tasks.append((SUITES.index(name), name, fn, k))

    def work(task):
        idx, name, fn, k = task
        rng = np.random.default_rng([sc.seed, idx, k])
        result = fn(sc, rng, k)
        if progress:
            progress(name, k)
        return result

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(work, tasks))

    records, ids = [], []
    for res in results:
        if isinstance(res, tuple):
            records += res[0]
            ids += res[1]
        else:
            records += res
    for r in records:
        r.seed = sc.seed
    records.sort(key=_record_key)
    ids.sort(key=_identity_key)
    return SweepResult(sc.seed, list(suites), records, ids)


__all__ = [
    "SUITES",
    "SweepConfig",
    "SweepResult",
    "THRESHOLDS",
    "random_point",
    "run",
    "sweep_functions",
]
