"""
Command-line front end.

    lisbon eval --k 2 --s 1,0 --f exp:1 --kind phi
    lisbon verify --seed 0 --out report.json
    lisbon grid --k 2 --f one --grid 1:-2:2:21,2:-2:2:21 --out grid.csv
    lisbon identities --k-max 4

Exit codes: 0 success, 1 verification failure, 2 bad input,
3 numerical failure (quadrature budget, root iteration, contour domain).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import exact, suites
from .contour import EntireFunction, QuadratureConfig, phi, psi
from .errors import BudgetError, DomainError, NonConvergenceError
from .poly_core import SymPoint
from .verifier import DEFAULT_DELTA_FLOOR, atat_residuals, pprime_at, psi_field, phi_field, system_residuals

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3


class SpecError(ValueError):
    """Malformed command-line input."""


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(
    rf"^\s*(?:(?P<re>{_NUM})(?P<im>[+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)i"
    rf"|(?P<only_re>{_NUM})|(?P<only_im>[+-]?(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)i)\s*$"
)


def parse_complex(text: str) -> complex:
    """``re`` or ``re+imi`` (also ``imi``, ``i``, ``-i``)."""
    m = _COMPLEX.match(text)
    if not m:
        raise SpecError(f"not a complex number: {text!r}")
    if m.group("only_re") is not None:
        return complex(float(m.group("only_re")), 0.0)
    if m.group("only_im") is not None:
        return complex(0.0, _imag_part(m.group("only_im")))
    return complex(float(m.group("re")), _imag_part(m.group("im")))


def _imag_part(text: str) -> float:
    if text in ("", "+"):
        return 1.0
    if text == "-":
        return -1.0
    return float(text)


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def parse_complex_list(text: str) -> list:
    return [parse_complex(t) for t in text.split(",") if t.strip()]


def parse_function(text: str) -> EntireFunction:
    """``one`` | ``monomial:p`` | ``poly:c0,c1,...`` | ``exp:t``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "one":
            return EntireFunction.one()
        if kind == "monomial":
            return EntireFunction.monomial(int(rest))
        if kind == "poly":
            return EntireFunction.poly(parse_complex_list(rest))
        if kind == "exp":
            parts = rest.split(":") if rest else ["1"]
            t = parse_complex(parts[0])
            scale = parse_complex(parts[1]) if len(parts) > 1 else 1.0
            return EntireFunction.exp(t, scale)
    except ValueError as exc:
        raise SpecError(f"bad function descriptor {text!r}: {exc}") from exc
    raise SpecError(f"unknown function kind {kind!r}")


def parse_grid(text: Optional[str]) -> list:
    """``h:lo:hi:n[,h:lo:hi:n]`` -> list of (h, lo, hi, n)."""
    if not text:
        return []
    axes = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 4:
            raise SpecError(f"grid axis must be h:lo:hi:n, got {part!r}")
        try:
            h, lo, hi, n = int(bits[0]), float(bits[1]), float(bits[2]), int(bits[3])
        except ValueError as exc:
            raise SpecError(f"bad grid axis {part!r}") from exc
        if n < 0:
            raise SpecError("grid size must be >= 0")
        axes.append((h, lo, hi, n))
    if len(axes) > 2:
        raise SpecError("at most two grid axes")
    return axes


# ---------------------------------------------------------------------------
# job description
# ---------------------------------------------------------------------------


@dataclass
class JobSpec:
    command: str
    k: Optional[int] = None
    s: Optional[list] = None
    grid: list = field(default_factory=list)
    f: str = "one"
    kind: str = "phi"
    tol: Optional[float] = None
    radius: Optional[float] = None
    seed: int = 0
    suite: Optional[list] = None
    perturb: float = 0.0
    k_max: int = 5
    out: Optional[str] = None
    format: str = "json"
    dump_witness: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.s is not None:
            d["s"] = [{"re": complex(v).real, "im": complex(v).imag} for v in self.s]
        d["grid"] = [list(a) for a in self.grid]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "JobSpec":
        d = dict(d)
        if d.get("s") is not None:
            d["s"] = [complex(v["re"], v["im"]) for v in d["s"]]
        d["grid"] = [tuple(a) for a in d.get("grid", [])]
        return cls(**d)

    def config(self) -> QuadratureConfig:
        kw = {}
        if self.tol is not None:
            kw["tol"] = self.tol
        if self.radius is not None:
            kw["radius"] = self.radius
        return QuadratureConfig(**kw)

    def point(self) -> SymPoint:
        if self.s is None:
            if self.k is None:
                raise SpecError("need --k or --s")
            return SymPoint([0] * self.k)
        if self.k is not None and len(self.s) != self.k:
            raise SpecError(f"--s has {len(self.s)} entries but --k is {self.k}")
        return SymPoint(self.s)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lisbon", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--k", type=int, help="degree k")
        p.add_argument("--tol", type=float, help="quadrature tolerance")
        p.add_argument("--radius", type=float, help="fixed contour radius (default: automatic)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default=None)

    p = sub.add_parser("eval", help="evaluate Phi_f or Psi_f at one point")
    common(p)
    p.add_argument("--s", required=True, help="comma separated s_1..s_k, e.g. 1,0 or 1.5-2i,0")
    p.add_argument("--f", default="one", help="one | monomial:p | poly:c0,c1,.. | exp:t")
    p.add_argument("--kind", choices=("phi", "psi"), default="phi")

    p = sub.add_parser("verify", help="run the seeded verification sweeps")
    common(p)
    p.add_argument("--suite", action="append", choices=suites.SUITES,
                   help="restrict to a suite (repeatable)")
    p.add_argument("--perturb", type=float, default=0.0,
                   help="add eps * (constant vector) to Phi in the system suite")
    p.add_argument("--k-max", type=int, default=5, help="largest k for exact identities")

    p = sub.add_parser("grid", help="tabulate norms and residuals over a 2-D grid")
    common(p)
    p.add_argument("--s", help="base point (default: zeros)")
    p.add_argument("--f", default="one")
    p.add_argument("--grid", default="1:-2:2:21,2:-2:2:21",
                   help="axes h:lo:hi:n, comma separated; n=0 gives an empty grid")

    p = sub.add_parser("identities", help="run the exact identity certificates")
    common(p)
    p.add_argument("--k-max", type=int, default=5)
    p.add_argument("--dump-witness", action="store_true")
    return parser


def spec_from_args(ns: argparse.Namespace) -> JobSpec:
    spec = JobSpec(command=ns.command, k=ns.k, tol=ns.tol, radius=ns.radius, seed=ns.seed, out=ns.out)
    if getattr(ns, "s", None):
        spec.s = parse_complex_list(ns.s)
    if hasattr(ns, "f"):
        spec.f = ns.f
        parse_function(ns.f)
    if hasattr(ns, "kind"):
        spec.kind = ns.kind
    if hasattr(ns, "suite"):
        spec.suite = ns.suite
        spec.perturb = ns.perturb
    if hasattr(ns, "k_max"):
        spec.k_max = ns.k_max
    if hasattr(ns, "grid"):
        spec.grid = parse_grid(ns.grid)
    spec.dump_witness = getattr(ns, "dump_witness", False)
    default_format = "csv" if ns.command == "grid" else "json"
    spec.format = ns.format or default_format
    return spec


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def dumps(obj, indent: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return format_float(x)
        return json.dumps(format_float(x))
    if isinstance(obj, complex):
        return dumps({"re": obj.real, "im": obj.imag}, indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(spec: JobSpec, text: str):
    if spec.out:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_eval(spec: JobSpec) -> int:
    pt = spec.point()
    f = parse_function(spec.f)
    cfg = spec.config()
    vec = (phi if spec.kind == "phi" else psi)(pt, f, cfg)
    if spec.format == "csv":
        rows = [(h, float(v.real), float(v.imag), float(vec.accuracy)) for h, v in enumerate(vec.values)]
        _emit(spec, _csv_text(["h", "re", "im", "accuracy"], rows))
    else:
        _emit(spec, dumps({
            "command": "eval",
            "k": pt.k,
            "s": [complex(v) for v in pt.s],
            "f": f.descriptor(),
            "kind": spec.kind,
            "values": [complex(v) for v in vec.values],
            "accuracy": float(vec.accuracy),
            "radius": float(vec.radius),
            "nodes": int(vec.nodes),
        }) + "\n")
    return EXIT_OK


def cmd_verify(spec: JobSpec) -> int:
    names = spec.suite or list(suites.SUITES)
    sc = suites.SweepConfig(
        seed=spec.seed,
        ks=[spec.k] if spec.k is not None else None,
        k_max=spec.k_max,
        perturb=spec.perturb,
        cfg=spec.config(),
    )
    result = suites.run(names, sc)
    report = result.to_json()
    if spec.format == "csv":
        rows = [
            (r.identity, r.k, ";".join(_cstr(v) for v in r.s),
             json.dumps(r.params, sort_keys=True, default=str), float(r.residual), r.method, r.seed)
            for r in result.records
        ]
        _emit(spec, _csv_text(["identity", "k", "s", "params", "residual", "method", "seed"], rows))
    else:
        _emit(spec, dumps(report) + "\n")
    if result.passed:
        return EXIT_OK
    worst = sorted(result.failures(), key=lambda r: -r.residual)[:10]
    print("verification FAILED; worst offenders:", file=sys.stderr)
    for r in worst:
        print(
            f"  {r.identity:<22} k={r.k} params={json.dumps(r.params, sort_keys=True, default=str)} "
            f"residual={r.residual:.3e} (threshold {suites.THRESHOLDS[r.identity]:g})",
            file=sys.stderr,
        )
    for r in result.failed_identities():
        print(f"  {r.name} {r.params}: {r.witness}", file=sys.stderr)
    return EXIT_FAIL


def _cstr(v) -> str:
    v = complex(v)
    return f"{format_float(v.real)}{'+' if v.imag >= 0 else '-'}{format_float(abs(v.imag))}i"


GRID_HEADER = [
    "s",
    "abs_delta",
    "phi_norm",
    "psi_norm",
    "pprime_inv_norm",
    "residual_system",
    "residual_atat",
]


def grid_rows(spec: JobSpec):
    """One row per grid point (see :data:`GRID_HEADER`)."""
    base = spec.point()
    k = base.k
    f = parse_function(spec.f)
    cfg = spec.config()
    axes = spec.grid
    for h, *_ in axes:
        if not 1 <= h <= k:
            raise SpecError(f"grid axis s_{h} outside 1..{k}")
    values = [np.linspace(lo, hi, n) if n > 1 else np.array([lo] * n) for _, lo, hi, n in axes]
    if not axes or any(len(v) == 0 for v in values):
        return
    disc = exact.sylvester_discriminant(k) if k >= 2 else None
    mesh = np.meshgrid(*values, indexing="ij")
    for idx in np.ndindex(mesh[0].shape):
        pt = base
        for (h, *_), grid_vals in zip(axes, mesh):
            pt = pt.replace(h, complex(grid_vals[idx]))
        delta = abs(disc.evaluate(pt.s)) if disc is not None else 1.0
        ph = phi(pt, f, cfg).values
        ps = psi(pt, f, cfg).values
        m = pprime_at(pt)
        scale = 1.0 + float(np.max(np.abs(m)))
        if delta <= 1e-12 * scale**k or np.linalg.cond(m) > 1e15:
            inv_norm: object = "inf"
        else:
            inv_norm = float(np.linalg.norm(np.linalg.inv(m), 2))
        res_sys = max((r.residual for r in system_residuals(phi_field(f, cfg), pt)), default=0.0)
        res_atat: object = ""
        if delta >= DEFAULT_DELTA_FLOOR and k >= 2:
            res_atat = max(r.residual for r in atat_residuals(psi_field(f, cfg), pt))
        yield [
            ";".join(_cstr(v) for v in pt.s),
            float(delta),
            float(np.max(np.abs(ph))),
            float(np.max(np.abs(ps))),
            inv_norm,
            float(res_sys),
            res_atat,
        ]


def cmd_grid(spec: JobSpec) -> int:
    rows = list(grid_rows(spec))
    if spec.format == "json":
        _emit(spec, dumps([dict(zip(GRID_HEADER, r)) for r in rows]) + "\n")
    else:
        _emit(spec, _csv_text(GRID_HEADER, rows))
    return EXIT_OK


def cmd_identities(spec: JobSpec) -> int:
    ks = [spec.k] if spec.k is not None else list(range(2, spec.k_max + 1))
    reports = exact.identity_sweep(ks)
    failed = [r for r in reports if not r.ok]
    doc = {
        "command": "identities",
        "k": ks,
        "passed": not failed,
        "count": len(reports),
        "identities": [r.to_json() for r in reports],
    }
    if spec.format == "csv":
        rows = [(r.name, json.dumps(r.params, sort_keys=True), r.verdict) for r in reports]
        _emit(spec, _csv_text(["name", "params", "verdict"], rows))
    else:
        _emit(spec, dumps(doc) + "\n")
    if spec.dump_witness:
        for r in failed:
            print(dumps(r.to_json()), file=sys.stderr)
    return EXIT_OK if not failed else EXIT_FAIL


COMMANDS = {
    "eval": cmd_eval,
    "verify": cmd_verify,
    "grid": cmd_grid,
    "identities": cmd_identities,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        spec = spec_from_args(ns)
        return COMMANDS[spec.command](spec)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (BudgetError, NonConvergenceError, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
