import numpy as np
import pytest

from lisbon import suites


def test_random_point_in_ball():
    rng = np.random.default_rng(0)
    for k in (1, 3, 5):
        norms = [suites.random_point(rng, k, 3.0).norm() for _ in range(200)]
        assert max(norms) <= 3.0 + 1e-12
        assert max(norms) > 2.5


def test_thread_count(monkeypatch):
    monkeypatch.setenv("LISBON_THREADS", "1")
    assert suites.thread_count() == 1
    monkeypatch.setenv("LISBON_THREADS", "junk")
    assert suites.thread_count() >= 1


def test_unknown_suite():
    with pytest.raises(ValueError):
        suites.run(["nope"], suites.SweepConfig())


def test_thresholds_cover_every_record():
    res = suites.run(["dz", "fd"], suites.SweepConfig(seed=1, ks=[2], points=2))
    assert res.records and all(r.identity in suites.THRESHOLDS for r in res.records)
    assert res.passed
    assert all(r.seed == 1 for r in res.records)
    summary = res.summary()
    assert set(summary) == {r.identity for r in res.records}
    assert all(v["passed"] for v in summary.values())


def test_order_independent_of_threads(monkeypatch):
    sc = suites.SweepConfig(seed=4, ks=[2, 3], points=3)
    monkeypatch.setenv("LISBON_THREADS", "1")
    a = suites.run(["system", "exp"], sc).to_json()
    monkeypatch.setenv("LISBON_THREADS", "8")
    b = suites.run(["system", "exp"], sc).to_json()
    assert a["records"] == b["records"]


def test_negative_control_detected():
    res = suites.run(["system"], suites.SweepConfig(seed=2, ks=[2], points=5, perturb=1e-2))
    assert not res.passed
    assert max(r.residual for r in res.failures()) > 1e-4
