"""Tests for the torus kernel functions."""
import numpy as np
import pytest

from src.kernel import (
    frac,
    phi,
    phi_prime,
    phi_prime_left,
    phi_prime_right,
    g,
    g_prime,
    g_second,
    g_third_left,
    g_third_right,
    hermite_basis,
    kernel_sum,
)
from src.utils.quadrature import composite_integral


def _edges_with(*breaks, panels: int = 64) -> np.ndarray:
    """Uniform panels on [0, 1] refined at the given breakpoints."""
    return np.unique(np.concatenate([np.linspace(0.0, 1.0, panels + 1), frac(np.array(breaks, dtype=float))]))


class TestFrac:
    """Tests for the canonical representative."""

    def test_range_and_periodicity(self):
        x = np.linspace(-3.7, 4.2, 101)
        y = frac(x)
        assert np.all((y >= 0.0) & (y < 1.0))
        assert np.allclose(frac(x + 5.0), y, atol=1e-12)

    def test_near_integer_snaps_to_zero(self):
        assert frac(2.0 - 1e-16) == 0.0
        assert frac(-1e-15) == 0.0
        assert frac(1.3) == pytest.approx(0.3)


class TestPhi:
    """Tests for phi and its one-sided derivatives."""

    def test_values(self):
        assert phi(0.0) == pytest.approx(1.0 / 12.0)
        assert phi(0.5) == pytest.approx(-1.0 / 24.0)
        assert phi(1.5) == pytest.approx(-1.0 / 24.0)

    def test_zero_mean(self):
        assert abs(composite_integral(phi, np.linspace(0.0, 1.0, 17), order=4)) <= 1e-12

    def test_parity(self):
        x = np.linspace(0.01, 0.99, 57)
        assert np.allclose(phi(x), phi(-x), atol=1e-15)
        assert np.allclose(g(x), g(-x), atol=1e-15)

    def test_phi_prime_interior(self):
        assert phi_prime(0.25) == pytest.approx(-0.25)
        assert phi_prime(0.5) == pytest.approx(0.0)

    def test_phi_prime_one_sided(self):
        assert phi_prime_right(0.0) == pytest.approx(-0.5)
        assert phi_prime_left(0.0) == pytest.approx(0.5)
        assert phi_prime_right(3.0) - phi_prime_left(3.0) == pytest.approx(-1.0)

    def test_phi_prime_rejects_integer(self):
        with pytest.raises(ValueError, match="side"):
            phi_prime(np.array([0.3, 1.0]))

    def test_reproducing_property(self):
        """int d/dy phi(x - y) h'(y) dy recovers h(x) for a zero-mean h."""
        h = lambda y: np.sin(2 * np.pi * y)
        h_prime = lambda y: 2 * np.pi * np.cos(2 * np.pi * y)
        for x in np.linspace(0.013, 0.97, 20):
            integrand = lambda y, x=x: -phi_prime_right(x - y) * h_prime(y)
            value = composite_integral(integrand, _edges_with(x), order=8)
            assert value == pytest.approx(h(x), abs=1e-8)


class TestAutocorrelation:
    """Tests for g and its derivatives."""

    def test_values(self):
        assert g(0.0) == pytest.approx(1.0 / 720.0)
        assert g(0.5) == pytest.approx(-1.0 / 384.0 + 1.0 / 720.0, abs=1e-15)

    def test_matches_quadrature(self):
        for x in np.linspace(0.0, 1.0, 100, endpoint=False):
            integrand = lambda y, x=x: phi(x + y) * phi(y)
            value = composite_integral(integrand, _edges_with(-x, panels=4), order=8)
            assert value == pytest.approx(g(x), abs=1e-10)

    def test_integrates_to_zero(self):
        assert abs(composite_integral(g, np.linspace(0.0, 1.0, 9), order=4)) <= 1e-12

    def test_derivatives_consistent(self):
        x = np.linspace(0.05, 0.95, 19)
        h = 1e-6
        assert np.allclose((g(x + h) - g(x - h)) / (2 * h), g_prime(x), atol=1e-9)
        assert np.allclose((g_prime(x + h) - g_prime(x - h)) / (2 * h), g_second(x), atol=1e-9)
        assert g_second(0.0) == pytest.approx(-1.0 / 12.0)

    def test_third_derivative_jump(self):
        assert g_third_right(0.0) - g_third_left(0.0) == pytest.approx(1.0)
        assert g_third_right(0.3) == pytest.approx(g_third_left(0.3))


class TestHermiteBasis:
    """Tests for the cubic Hermite basis."""

    def test_endpoints(self):
        assert hermite_basis(0.0) == pytest.approx((1.0, 0.0, 0.0, 0.0))
        assert hermite_basis(1.0) == pytest.approx((0.0, 0.0, 1.0, 0.0))

    def test_midpoint(self):
        assert hermite_basis(0.5) == pytest.approx((0.5, 0.125, 0.5, -0.125))

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            hermite_basis(1.5)


def test_kernel_sum_matches_loop():
    """Vectorised kernel sum agrees with an explicit loop."""
    rng = np.random.default_rng(3)
    positions = np.sort(rng.random(5))
    amplitudes = rng.normal(size=(5, 2))
    x = rng.random(7)
    expected = np.zeros((7, 2))
    for xj, aj in zip(positions, amplitudes):
        expected += phi(x - xj)[:, None] * aj[None, :]
    assert np.allclose(kernel_sum(x, positions, amplitudes), expected)
