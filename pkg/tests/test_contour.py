import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lisbon.contour import (
    ContourRule,
    EntireFunction,
    QuadratureConfig,
    auto_radius,
    d2phi_ds2_kernels,
    dphi_ds,
    dpsi_ds,
    phi,
    psi,
    radius_bound,
    scalar_phi,
)
from lisbon.errors import BudgetError, DomainError
from lisbon.poly_core import SymPoint, companion, discriminant, pprime_of_companion, roots

E = math.e


def random_s(rng, k, radius=3.0):
    v = rng.normal(size=k) + 1j * rng.normal(size=k)
    return SymPoint(v / np.linalg.norm(v) * radius * rng.uniform())


class TestEntireFunction:
    def test_exp_derivative(self):
        f = EntireFunction.exp(2 - 1j)
        z = np.array([0.3, -1 + 2j])
        assert np.allclose(f.fprime(z), (2 - 1j) * f(z))

    def test_poly_and_monomial(self):
        f = EntireFunction.poly([1, 0, 3])
        assert f(2) == 13
        assert f.derivative()(2) == 12
        assert EntireFunction.monomial(3)(2) == 8
        assert EntireFunction.monomial(0).derivative()(5) == 0

    def test_times_z(self):
        f = EntireFunction.exp(1)
        assert f.times_z()(2.0) == pytest.approx(2 * E**2)

    def test_deterministic(self):
        f = EntireFunction.exp(1 + 1j)
        z = np.linspace(-2, 2, 17) * (1 + 0.5j)
        assert np.array_equal(f(z), f(z))

    def test_descriptor(self):
        assert EntireFunction.one().descriptor() == "one"
        assert EntireFunction.monomial(2).descriptor() == "monomial:2"
        assert EntireFunction.exp(1).descriptor() == "exp:1"


class TestConfig:
    @pytest.mark.parametrize(
        "kw", [{"tol": 0}, {"min_nodes": 8}, {"min_nodes": 64, "max_nodes": 100}, {"radius": -1}]
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            QuadratureConfig(**kw)

    def test_radius_bound(self):
        assert radius_bound(SymPoint([0, 0, 0])) == 2
        assert radius_bound(SymPoint([1, 0])) == 4
        assert radius_bound(SymPoint([0, 0, 8])) == pytest.approx(6)

    def test_radius_bound_encloses_roots(self):
        rng = np.random.default_rng(0)
        for k in range(1, 7):
            for _ in range(20):
                pt = random_s(rng, k, 10)
                rmax = np.max(np.abs(roots(pt).values))
                assert rmax < auto_radius(pt) <= radius_bound(pt)


class TestPhi:
    def test_f_one_closed_form(self):
        rng = np.random.default_rng(1)
        for k in range(2, 6):
            pt = random_s(rng, k)
            v = phi(pt, EntireFunction.one()).values
            assert np.max(np.abs(v[:-1])) < 1e-10
            assert abs(v[-1] - 1) < 1e-10

    def test_cauchy_at_origin(self):
        v = phi(SymPoint([0, 0]), EntireFunction.exp(1)).values
        assert np.allclose(v, [1, 1], atol=1e-12)

    def test_two_roots(self):
        v = phi(SymPoint([1, 0]), EntireFunction.exp(1)).values
        assert np.allclose(v, [E - 1, E], atol=1e-12)
        v = phi(SymPoint([1, 0]), EntireFunction.one()).values
        assert np.allclose(v, [0, 1], atol=1e-12)

    def test_reports_accuracy(self):
        v = phi(SymPoint([1, 2, 3]), EntireFunction.exp(1))
        assert len(v) == 3 and v.kind == "phi"
        assert 0 <= v.accuracy < 1e-9
        assert v.nodes >= 64

    def test_defined_on_discriminant(self):
        # double root at 1: phi_h = d/dz (z^h e^z) at z = 1
        v = phi(SymPoint([2, 1]), EntireFunction.exp(1)).values
        assert np.allclose(v, [E, 2 * E], atol=1e-10)

    def test_radius_stability(self):
        rng = np.random.default_rng(2)
        tol = QuadratureConfig().tol
        for k in range(2, 6):
            pt = random_s(rng, k)
            for f in (EntireFunction.one(), EntireFunction.monomial(2), EntireFunction.exp(1)):
                a = phi(pt, f).values
                b = phi(pt, f, QuadratureConfig(radius=1.5 * auto_radius(pt))).values
                assert np.max(np.abs(a - b)) <= 10 * tol * (1 + np.max(np.abs(a)))

    def test_linearity(self):
        rng = np.random.default_rng(3)
        pt = random_s(rng, 3)
        f, g = EntireFunction.exp(1), EntireFunction.monomial(4)
        alpha, beta = 2 - 1j, 0.5
        combo = EntireFunction.closure(lambda z: alpha * f(z) + beta * g(z))
        lhs = phi(pt, combo).values
        rhs = alpha * phi(pt, f).values + beta * phi(pt, g).values
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * (1 + np.max(np.abs(rhs)))

    def test_multiplication_law(self):
        rng = np.random.default_rng(4)
        for k in range(2, 6):
            pt = random_s(rng, k)
            f = EntireFunction.exp(1)
            lhs = phi(pt, f.times_z()).values
            rhs = companion(pt) @ phi(pt, f).values
            assert np.max(np.abs(lhs - rhs)) < 1e-9 * (1 + np.max(np.abs(rhs)))

    def test_polynomial_action(self):
        rng = np.random.default_rng(5)
        for k in (2, 3, 4):
            pt = random_s(rng, k, 2)
            g = rng.normal(size=2 * k + 1) + 1j * rng.normal(size=2 * k + 1)
            f = EntireFunction.exp(1)
            gf = EntireFunction.closure(lambda z: np.polyval(g[::-1], z) * f(z))
            a = companion(pt)
            ga = sum(c * np.linalg.matrix_power(a, i) for i, c in enumerate(g))
            lhs = phi(pt, gf).values
            rhs = ga @ phi(pt, f).values
            assert np.max(np.abs(lhs - rhs)) < 1e-8 * (1 + np.max(np.abs(rhs)))

    def test_nonvanishing_for_exp(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            pt = random_s(rng, int(rng.integers(1, 6)))
            assert np.max(np.abs(phi(pt, EntireFunction.exp(1)).values)) > 1e-6

    def test_domain_error(self):
        with pytest.raises(DomainError):
            phi(SymPoint([1, 0]), EntireFunction.one(), QuadratureConfig(radius=0.9))

    def test_budget_error(self):
        # exp(40 z) on a large circle cannot reach 1e-15 with 128 nodes
        cfg = QuadratureConfig(radius=3.0, tol=1e-15, min_nodes=64, max_nodes=128)
        with pytest.raises(BudgetError):
            phi(SymPoint([1, 0]), EntireFunction.exp(40), cfg)

    def test_fixed_rule_is_reproducible(self):
        pt, f = SymPoint([1 + 1j, 2]), EntireFunction.exp(1)
        rule = ContourRule(4.0, 256)
        assert np.array_equal(phi(pt, f, rule=rule).values, phi(pt, f, rule=rule).values)


class TestPsi:
    def test_newton_k2(self):
        s1, s2 = 1.2 - 0.3j, 2.5
        v = psi(SymPoint([s1, s2]), EntireFunction.one()).values
        assert np.allclose(v, [2, s1], atol=1e-10)

    def test_all_roots_at_origin(self):
        v = psi(SymPoint([0, 0, 0]), EntireFunction.exp(1)).values
        assert np.allclose(v, [3, 0, 0], atol=1e-12)

    def test_two_roots(self):
        v = psi(SymPoint([1, 0]), EntireFunction.exp(1)).values
        assert np.allclose(v, [1 + E, E], atol=1e-12)

    def test_bridge_including_discriminant(self):
        rng = np.random.default_rng(7)
        pts = [random_s(rng, k) for k in (2, 3, 4) for _ in range(3)]
        pts += [SymPoint([2, 1]), SymPoint([0, 0, 0]), SymPoint([3, 3, 1])]
        for pt in pts:
            for f in (EntireFunction.one(), EntireFunction.exp(1), EntireFunction.monomial(3)):
                ps = psi(pt, f).values
                bridge = pprime_of_companion(pt) @ phi(pt, f).values
                assert np.max(np.abs(ps - bridge)) < 1e-9 * (1 + np.max(np.abs(ps)))


class TestScalarAndDerivatives:
    def test_scalar_phi(self):
        pt = SymPoint([1.5 + 0.5j, -2])
        assert abs(scalar_phi(pt, EntireFunction.one(), 0)) < 1e-12
        assert scalar_phi(pt, EntireFunction.one(), 2) == pytest.approx(1.5 + 0.5j)
        assert scalar_phi(SymPoint([0, 0, 0]), EntireFunction.exp(3), 2) == pytest.approx(1)

    def test_scalar_matches_vector(self):
        pt, f = SymPoint([1, 2, -1j]), EntireFunction.exp(1)
        v = phi(pt, f).values
        for h in range(3):
            assert scalar_phi(pt, f, h) == pytest.approx(v[h], abs=1e-12)

    def test_dphi_f_one(self):
        rng = np.random.default_rng(8)
        pt = random_s(rng, 4)
        for h in range(1, 5):
            assert abs(dphi_ds(pt, EntireFunction.one(), h).values[-1]) < 1e-10

    def test_dphi_cauchy(self):
        v = dphi_ds(SymPoint([0, 0]), EntireFunction.exp(1), 2).values
        assert np.allclose(v, [-1 / 6, -1 / 2], atol=1e-12)

    def test_dphi_against_differences(self):
        rng = np.random.default_rng(9)
        for k in (2, 3, 4):
            pt = random_s(rng, k, 2)
            f = EntireFunction.exp(1)
            rule = ContourRule(auto_radius(pt) + 0.5, 512)
            for h in range(1, k + 1):
                d = 1e-5
                fd = (
                    phi(pt.replace(h, pt.coord(h) + d), f, rule=rule).values
                    - phi(pt.replace(h, pt.coord(h) - d), f, rule=rule).values
                ) / (2 * d)
                an = dphi_ds(pt, f, h).values
                assert np.max(np.abs(fd - an)) < 1e-6 * (1 + np.max(np.abs(an)))

    def test_dpsi_against_differences(self):
        pt, f = SymPoint([0.5 + 1j, -1, 0.3]), EntireFunction.exp(1)
        rule = ContourRule(auto_radius(pt) + 0.5, 512)
        for h in (1, 2, 3):
            d = 1e-5
            fd = (
                psi(pt.replace(h, pt.coord(h) + d), f, rule=rule).values
                - psi(pt.replace(h, pt.coord(h) - d), f, rule=rule).values
            ) / (2 * d)
            an = dpsi_ds(pt, f, h).values
            assert np.max(np.abs(fd - an)) < 1e-6 * (1 + np.max(np.abs(an)))

    def test_second_kernels_depend_on_sum(self):
        rng = np.random.default_rng(10)
        pt, f = random_s(rng, 4), EntireFunction.exp(1)
        a = d2phi_ds2_kernels(pt, f, (1, 3)).values
        b = d2phi_ds2_kernels(pt, f, (2, 2)).values
        c = d2phi_ds2_kernels(pt, f, (3, 1)).values
        assert np.array_equal(a, c)
        assert np.max(np.abs(a - b)) < 1e-9 * (1 + np.max(np.abs(a)))

    def test_k2_kernel_relation(self):
        # d + s e + p f + 2 c = 0 for the k=2 kernels
        from lisbon.verifier import theta_kernels

        ker = theta_kernels(0.7 + 0.2j, -1.1, EntireFunction.exp(1), 1)
        val = ker["d"] + (0.7 + 0.2j) * ker["e"] + (-1.1) * ker["f"] + 2 * ker["c"]
        assert abs(val) < 1e-10


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.complex_numbers(max_magnitude=2.5, allow_nan=False, allow_infinity=False),
        min_size=2,
        max_size=4,
    )
)
def test_psi_f_one_is_power_sums(s):
    from lisbon.poly_core import newton_power_sum

    pt = SymPoint(s)
    v = psi(pt, EntireFunction.one()).values
    ref = np.array([newton_power_sum(pt, h) for h in range(pt.k)])
    assert np.max(np.abs(v - ref)) < 1e-9 * (1 + np.max(np.abs(ref)))


def test_contour_does_not_care_about_discriminant():
    pt = SymPoint([0, 0, 0])
    assert abs(discriminant(pt)) < 1e-12
    assert np.allclose(phi(pt, EntireFunction.exp(1)).values, [0.5, 1, 1], atol=1e-12)
