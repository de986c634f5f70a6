"""Acceptance criteria 1-12, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict (printed in the pytest
terminal summary and to stdout) before asserting.
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from lisbon import cli, exact, suites, verifier
from lisbon.contour import EntireFunction, integrate, phi, psi
from lisbon.poly_core import discriminant, eval_dpoly, newton_power_sum
from lisbon.residue import phi_residue, psi_residue
from lisbon.shadow import shadow_sweep

SEED = 20240611


def record(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


def ball(rng, k, radius):
    return suites.random_point(rng, k, radius)


@pytest.fixture(scope="module")
def default_sweep():
    t0 = time.perf_counter()
    res = suites.run(
        ["system", "atat", "correspondence", "theta", "dz", "exp", "mixed"],
        suites.SweepConfig(seed=SEED),
    )
    return res, time.perf_counter() - t0


def worst(result, *names):
    vals = [r.residual for r in result.records if r.identity in names]
    return max(vals), len(vals)


def test_criterion_01_f_one_closed_form():
    rng = np.random.default_rng([SEED, 1])
    t0 = time.perf_counter()
    low = top = 0.0
    for k in (2, 3, 4, 5):
        for _ in range(50):
            v = phi(ball(rng, k, 5.0), EntireFunction.one()).values
            low = max(low, float(np.max(np.abs(v[:-1]))))
            top = max(top, abs(v[-1] - 1))
    dt = time.perf_counter() - t0
    ok = low < 1e-9 and top < 1e-9 and dt < 5
    record(1, ok, f"max|phi_h<k-1|={low:.2e} max|phi_k-1 - 1|={top:.2e} (<1e-9), {dt:.2f}s (<5s)")


def test_criterion_02_contour_vs_residue():
    rng = np.random.default_rng([SEED, 2])
    t0 = time.perf_counter()
    err, n = 0.0, 0
    for k in range(1, 6):
        seen = 0
        while seen < 20:
            pt = ball(rng, k, 5.0)
            if abs(discriminant(pt)) < 0.1:
                continue
            seen += 1
            for f in suites.sweep_functions():
                for a, b in ((phi(pt, f), phi_residue(pt, f)), (psi(pt, f), psi_residue(pt, f))):
                    e = np.max(np.abs(a.values - b.values)) / (1 + np.max(np.abs(a.values)))
                    err = max(err, float(e))
                    n += 1
    dt = time.perf_counter() - t0
    record(2, err < 1e-8 and dt < 10, f"max normalized diff={err:.2e} over {n} pairs (<1e-8), {dt:.2f}s (<10s)")


def test_criterion_03_newton_power_sums():
    rng = np.random.default_rng([SEED, 3])
    err = 0.0
    for k in range(1, 6):
        for _ in range(10):
            pt = ball(rng, k, 3.0)
            for h in range(2 * k + 1):
                got = integrate(pt, EntireFunction.one(), [h], 1, extra=lambda z: eval_dpoly(pt, z)).values[0]
                if h < k:
                    assert got == pytest.approx(psi(pt, EntireFunction.one()).values[h], abs=1e-12)
                ref = newton_power_sum(pt, h)
                err = max(err, abs(got - ref) / (1 + abs(ref)))
    record(3, err < 1e-9, f"max rel diff psi_h vs Newton, h<=2k, k<=5: {err:.2e} (<1e-9)")


def test_criterion_04_system_and_negative_control():
    t0 = time.perf_counter()
    res = suites.run(["system"], suites.SweepConfig(seed=SEED))
    good, n = worst(res, "system")
    bad = suites.run(["system"], suites.SweepConfig(seed=SEED, perturb=1e-2))
    control, _ = worst(bad, "system")
    dt = time.perf_counter() - t0
    ok = good < 1e-7 and control > 1e-4 and dt < 30
    record(4, ok, f"max residual={good:.2e} over {n} (<1e-7); perturbed max={control:.2e} (>1e-4); {dt:.2f}s (<30s)")


def test_criterion_05_closure(default_sweep):
    res, _ = default_sweep
    val, n = worst(res, "closure")
    record(5, val < 1e-7, f"A*Phi max residual={val:.2e} over {n} (<1e-7)")


def test_criterion_06_singular_system_and_correspondence(default_sweep):
    res, _ = default_sweep
    val, n = worst(res, "atat", "atat_closure", "atat_from_phi", "correspondence_system")
    trips = [r.params["roundtrip"] for r in res.records if r.identity == "correspondence"]
    trip = max(trips)
    ok = val < 1e-6 and trip < 1e-6
    record(6, ok, f"singular system max residual={val:.2e} over {n}; Phi->Psi->Phi max={trip:.2e} over {len(trips)} (<1e-6)")


def test_criterion_07_exact_identities():
    t0 = time.perf_counter()
    reports = exact.identity_sweep(range(2, 6))
    failed = [r for r in reports if not r.ok]
    shadow = shadow_sweep(range(2, 6), np.random.default_rng([SEED, 7]), n=20)
    sh = max(shadow.values())
    dt = time.perf_counter() - t0
    ok = not failed and sh < 1e-9 and dt < 60
    record(7, ok, f"{len(reports) - len(failed)}/{len(reports)} ExactZero; shadow max={sh:.2e} (<1e-9); {dt:.2f}s (<60s)")


def test_criterion_08_theta(default_sweep):
    res, _ = default_sweep
    recs = [r for r in res.records if r.identity == "theta"]
    val = max(r.residual for r in recs)
    ms = {r.params["m"] for r in recs}
    fs = {r.params["f"] for r in recs}
    pts = {r.s for r in recs}
    ok = val < 1e-7 and ms == set(range(6)) and len(fs) == 3 and len(pts) >= 25
    record(8, ok, f"Theta max residual={val:.2e} over m=0..5, f in {sorted(fs)}, {len(pts)} points (<1e-7)")


def test_criterion_09_dz_action(default_sweep):
    res, _ = default_sweep
    act, n = worst(res, "dz_action", "dz_action_star2", "leibniz")
    eig, m = worst(res, "exp_eigen")
    ok = act < 1e-6 and eig < 1e-7
    record(9, ok, f"dz forms max={act:.2e} over {n} (<1e-6); exp eigen max={eig:.2e} over {m} (<1e-7)")


def test_criterion_10_exp_connection(default_sweep):
    res, _ = default_sweep
    recs = [r for r in res.records if r.identity == "exp_connection"]
    val = max(r.residual for r in recs)
    with_psi = sum(r.params["psi_form"] is not None for r in recs)
    ts = {(r.params["t"]["re"], r.params["t"]["im"]) for r in recs}
    ks = {r.k for r in recs}
    ok = val < 1e-6 and ks == {2, 3} and len(ts) == 3
    record(10, ok, f"exp connection max residual={val:.2e} over {len(recs)} ({with_psi} with Psi form) (<1e-6)")


def test_criterion_11_mixed_partials(default_sweep):
    res, _ = default_sweep
    val, n = worst(res, "mixed_partial")
    ks = {r.k for r in res.records if r.identity == "mixed_partial"}
    f_one = max(
        verifier.mixed_partial_check(ball(np.random.default_rng([SEED, 11]), 4, 3.0),
                                            EntireFunction.one(), pq).residual
        for pq in ((1, 2), (1, 3), (2, 3))
    )
    ok = val < 1e-7 and ks == {3, 4} and f_one < 1e-12
    record(11, ok, f"mixed partial max={val:.2e} over {n}, k in {sorted(ks)} (<1e-7); f=1 max={f_one:.1e}")


def test_criterion_12_determinism(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        spec = cli.JobSpec(command="verify", seed=SEED, out=str(path))
        assert cli.cmd_verify(spec) == 0
        outs.append(path.read_bytes())
    same = outs[0] == outs[1]
    n = outs[0].count(b'"identity":')
    record(12, same and n >= 200, f"two default verify runs byte-identical={same}, {len(outs[0])} bytes, {n} records")
