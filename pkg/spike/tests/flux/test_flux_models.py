"""Tests for the flux models and the model factory."""
import numpy as np
import pytest

from src.errors import InadmissibleStateError
from src.flux import (
    BaseFlux,
    BuckleyLeverettFlux,
    BurgersFlux,
    EulerFlux,
    EulerParams,
    buckley_leverett_flux,
    burgers_flux,
    create_flux,
    euler_conserved,
    euler_flux,
)


@pytest.fixture
def euler_states():
    """Random admissible Euler states."""
    rng = np.random.default_rng(11)
    rho = 0.5 + rng.random(6)
    v = rng.normal(size=6)
    p = 0.5 + rng.random(6)
    return euler_conserved(rho, v, p)


class TestScalarFluxes:
    """Burgers and Buckley-Leverett values."""

    @pytest.mark.parametrize("u, expected", [(2.0, 2.0), (0.0, 0.0), (-3.0, 4.5)])
    def test_burgers(self, u, expected):
        assert burgers_flux(u) == pytest.approx(expected)

    @pytest.mark.parametrize("u, expected", [(0.0, 0.0), (1.0, 1.0), (0.5, 0.5)])
    def test_buckley_leverett(self, u, expected):
        assert buckley_leverett_flux(u) == pytest.approx(expected)

    def test_burgers_jacobian(self):
        q = np.array([[1.5], [-2.0]])
        assert BurgersFlux().jacobian(q)[:, 0, 0] == pytest.approx([1.5, -2.0])

    def test_wave_speeds(self):
        q = np.array([[-2.0], [0.5]])
        assert BurgersFlux().wave_speed(q) == pytest.approx([2.0, 0.5])
        assert BuckleyLeverettFlux().wave_speed(np.array([[0.5]])) == pytest.approx([2.0])


class TestEulerFlux:
    """Euler flux, primitive recovery and admissibility."""

    def test_pressure_wave_background_state(self):
        q = np.array([1.0, 1.0, 2.0 / 0.4 + 0.5])
        assert euler_flux(q, EulerParams(1.4)) == pytest.approx([1.0, 3.0, 7.5])

    def test_at_rest(self):
        q = euler_conserved(1.0, 0.0, 1.0)
        assert euler_flux(q) == pytest.approx([0.0, 1.0, 0.0])

    def test_non_positive_density(self):
        with pytest.raises(InadmissibleStateError, match="density"):
            euler_flux(np.array([0.0, 1.0, 3.0]))

    def test_non_positive_pressure(self):
        with pytest.raises(InadmissibleStateError, match="pressure"):
            euler_flux(np.array([1.0, 3.0, 1.0]))

    def test_gamma_validation(self):
        with pytest.raises(ValueError):
            EulerParams(gamma=1.0)

    def test_wave_speed(self):
        q = euler_conserved(1.0, 1.0, 1.4)
        assert EulerFlux().wave_speed(q) == pytest.approx(1.0 + np.sqrt(1.4 * 1.4))


class TestJacobians:
    """Analytic Jacobians agree with finite differences."""

    @pytest.mark.parametrize("model", [BurgersFlux(), BuckleyLeverettFlux()])
    def test_scalar_models(self, model):
        q = np.linspace(-0.8, 1.7, 9)[:, None]
        analytic = model.jacobian(q)
        numeric = BaseFlux.jacobian(model, q)
        assert np.allclose(analytic, numeric, rtol=1e-5, atol=1e-8)

    def test_euler(self, euler_states):
        model = EulerFlux()
        analytic = model.jacobian(euler_states)
        numeric = BaseFlux.jacobian(model, euler_states)
        assert np.allclose(analytic, numeric, rtol=1e-5, atol=1e-6)

    def test_euler_eigenvalues(self, euler_states):
        """Default eigenvalue speed reproduces |v| + c."""
        model = EulerFlux()
        assert np.allclose(BaseFlux.wave_speed(model, euler_states), model.wave_speed(euler_states))


class TestSegmentIntegral:
    """Gauss-Legendre segment averages."""

    def test_burgers_closed_forms(self):
        model = BurgersFlux()
        assert model.segment_integral(np.array([0.0]), np.array([2.0])) == pytest.approx([2.0 / 3.0], abs=1e-13)
        assert model.segment_integral(np.array([-1.0]), np.array([1.0])) == pytest.approx([1.0 / 6.0], abs=1e-13)

    def test_constant_segment(self, euler_states):
        model = EulerFlux()
        assert np.allclose(model.segment_integral(euler_states, euler_states), model.flux(euler_states))

    def test_symmetry(self, euler_states):
        model = EulerFlux()
        forward = model.segment_integral(euler_states, euler_states[::-1])
        backward = model.segment_integral(euler_states[::-1], euler_states)
        assert np.allclose(forward, backward, atol=1e-13)

    def test_vectorised_shapes(self):
        q_left = np.zeros((5, 1))
        q_right = np.ones((5, 1))
        assert BurgersFlux().segment_integral(q_left, q_right).shape == (5, 1)

    def test_inadmissible_quadrature_node(self):
        q_left = np.array([1.0, 0.0, 2.5])
        q_right = np.array([1.0, 0.0, -2.5])
        with pytest.raises(InadmissibleStateError):
            EulerFlux().segment_integral(q_left, q_right)


class TestFactory:
    """Model selection by name."""

    def test_known_models(self):
        assert isinstance(create_flux({"model": {"name": "burgers"}}), BurgersFlux)
        assert isinstance(create_flux({"model": {"name": "Buckley_Leverett"}}), BuckleyLeverettFlux)
        euler = create_flux({"model": {"name": "euler", "gamma": 1.67}})
        assert isinstance(euler, EulerFlux)
        assert euler.gamma == pytest.approx(1.67)

    def test_unknown_model(self):
        with pytest.raises(ValueError, match="Supported models"):
            create_flux({"model": {"name": "shallow_water"}})
