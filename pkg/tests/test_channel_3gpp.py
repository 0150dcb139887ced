"""
Test Suite for the 3GPP Line-of-Sight Channel

Channel coefficients, analytic sensitivities and the finite-difference check.
"""

import cmath
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.errors import InvalidSpecError
from src.core.seeding import spawn_generator
from src.sensing.channel_3gpp import (
    RadioConfig,
    UserState,
    build_channel,
    build_jacobian,
    default_user_states,
    finite_difference_jacobian,
    sensitivity_factors,
)

STEPS = (1e-6, 1e-6, 1e-6)


@pytest.fixture
def radio():
    """Default evaluation radio: 28 GHz, Ts = 4 μs, n = 1000, m = 10."""
    return RadioConfig()


def _random_states(count, seed):
    rng = spawn_generator(seed)
    return [
        UserState(
            theta=float(rng.uniform(-1.2, 1.2)),
            r=float(rng.uniform(20.0, 200.0)),
            v=float(rng.uniform(-30.0, 30.0)),
        )
        for _ in range(count)
    ]


class TestRadioConfig:

    def test_defaults(self, radio):
        assert radio.fc == 28e9 and radio.c == 3e8 and radio.Ts == 4e-6
        assert (radio.n, radio.m) == (1000, 10)
        assert radio.wavelength == pytest.approx(0.0107143, rel=1e-5)
        assert radio.element_spacing == pytest.approx(radio.wavelength / 2)
        assert radio.t_obs == pytest.approx(4e-3)

    def test_spacing_follows_carrier(self):
        assert RadioConfig(fc=3e9).element_spacing == pytest.approx(0.05)
        assert RadioConfig(fc=3e9, d_a=0.01).element_spacing == 0.01

    def test_invalid_values(self):
        with pytest.raises(ValidationError):
            RadioConfig(fc=0.0)
        with pytest.raises(ValidationError):
            RadioConfig(d_a=-1.0)


class TestUserState:

    def test_angle_range(self):
        with pytest.raises(ValidationError):
            UserState(theta=math.pi / 2, r=10.0)

    def test_range_positive(self):
        with pytest.raises(ValidationError):
            UserState(theta=0.0, r=0.0)

    def test_default_amplitude(self):
        assert UserState(theta=0.0, r=1.0).beta == 1 + 0j

    def test_default_placement(self):
        states = default_user_states(3)
        assert [round(math.degrees(s.theta)) for s in states] == [-30, 0, 30]
        assert [s.r for s in states] == [20.0, 110.0, 200.0]
        assert [s.v for s in states] == [-30.0, 0.0, 30.0]
        for state in default_user_states(16):
            assert abs(state.theta) < math.pi / 3


class TestBuildChannel:

    def test_broadside_has_no_spatial_progression(self, radio):
        H = build_channel([UserState(theta=0.0, r=37.0, v=3.0)], radio)
        np.testing.assert_allclose(H[:, 0], H[0, 0], atol=1e-12)

    def test_unit_modulus_scaled_by_beta(self, radio):
        beta = 0.5 + 0.5j
        H = build_channel([UserState(theta=0.4, r=80.0, v=-12.0, beta=beta)], radio)
        np.testing.assert_allclose(np.abs(H), abs(beta), rtol=1e-12)

    def test_range_phase(self, radio):
        """fc=28 GHz, r=10 m: phase −(4π fc / c)·10 ≈ −11728.6 rad."""
        H = build_channel([UserState(theta=0.0, r=10.0, v=0.0)], radio)
        phase = -(4 * math.pi * 28e9 / 3e8) * 10.0
        assert phase == pytest.approx(-11728.6, abs=0.1)
        assert abs(H[0, 0] - cmath.exp(1j * phase)) < 1e-9

    def test_shape(self, radio):
        assert build_channel(default_user_states(4), radio).shape == (10, 4)

    def test_empty_states(self, radio):
        with pytest.raises(InvalidSpecError):
            build_channel([], radio)


class TestBuildJacobian:

    def test_aoa_factor(self, radio):
        """Element j=3, theta=30°: −jπ·2·cos 30° ≈ −5.441j."""
        factors = sensitivity_factors(UserState(theta=math.radians(30), r=50.0), radio)
        assert factors[2, 0] == pytest.approx(-5.441j, abs=1e-3)

    def test_range_and_velocity_factor_magnitudes(self, radio):
        factors = sensitivity_factors(UserState(theta=0.1, r=50.0), radio)
        assert np.abs(factors[:, 1]) == pytest.approx(1172.86, abs=0.01)
        assert np.abs(factors[:, 2]) == pytest.approx(4.691, abs=1e-3)

    def test_entries_are_phase_rotations_of_h(self, radio):
        states = _random_states(5, seed=1)
        H = build_channel(states, radio)
        J = build_jacobian(states, radio)
        for i, block in enumerate(J.blocks):
            ratio = block / H[:, [i]]
            assert np.max(np.abs(ratio.real)) < 1e-12 * max(1.0, np.max(np.abs(ratio)))

    def test_reference_element_has_no_angle_sensitivity(self, radio):
        J = build_jacobian([UserState(theta=0.0, r=40.0)], radio)
        assert J.blocks[0][0, 0] == 0
        fd = finite_difference_jacobian([UserState(theta=0.0, r=40.0)], radio, STEPS)
        assert abs(fd.blocks[0][0, 0]) < 1e-10

    def test_aperture_growth(self):
        state = UserState(theta=0.3, r=60.0, v=4.0)

        def column_norms(m):
            block = build_jacobian([state], RadioConfig(m=m)).blocks[0]
            return np.linalg.norm(block, axis=0)

        small, large = column_norms(8), column_norms(64)
        assert large[0] / small[0] > math.sqrt(8)
        assert large[1] / small[1] == pytest.approx(math.sqrt(8), rel=1e-12)

    def test_velocity_sensitivity_proportional_to_blocklength(self):
        state = UserState(theta=-0.2, r=120.0, v=15.0)
        norms = [
            np.linalg.norm(build_jacobian([state], RadioConfig(n=n)).blocks[0][:, 2])
            for n in (200, 800, 3200)
        ]
        assert norms[1] / norms[0] == pytest.approx(4.0, abs=1e-9)
        assert norms[2] / norms[1] == pytest.approx(4.0, abs=1e-9)

    def test_parameter_names(self, radio):
        J = build_jacobian(default_user_states(2), radio)
        assert J.names == [("aoa", "range", "velocity")] * 2
        assert J.q == 6


class TestFiniteDifferenceJacobian:

    def test_agrees_with_analytic(self, radio):
        """50 random states: relative error < 1e-6 (absolute 1e-9 near zero)."""
        states = _random_states(50, seed=7)
        analytic = build_jacobian(states, radio)
        numeric = finite_difference_jacobian(states, radio, STEPS)
        for exact, approx in zip(analytic.blocks, numeric.blocks):
            magnitude = np.abs(exact)
            error = np.abs(approx - exact)
            nonzero = magnitude > 1e-9
            assert np.all(error[nonzero] / magnitude[nonzero] < 1e-6)
            assert np.all(error[~nonzero] < 1e-9)

    def test_second_order_convergence(self, radio):
        """Halving h cuts the AoA error about fourfold."""
        state = [UserState(theta=0.4, r=75.0, v=8.0)]
        exact = build_jacobian(state, radio).blocks[0][:, 0]
        errors = []
        for h in (4e-3, 2e-3, 1e-3):
            approx = finite_difference_jacobian(state, radio, (h, 1e-6, 1e-6)).blocks[0][:, 0]
            errors.append(np.max(np.abs(approx - exact)))
        for coarse, fine in zip(errors, errors[1:]):
            assert 3.6 < coarse / fine < 4.4

    def test_scalar_step(self, radio):
        J = finite_difference_jacobian(default_user_states(2), radio, 1e-6)
        assert J.q == 6

    def test_invalid_step(self, radio):
        with pytest.raises(InvalidSpecError, match="step"):
            finite_difference_jacobian(default_user_states(1), radio, 0.0)
        with pytest.raises(InvalidSpecError, match="step"):
            finite_difference_jacobian(default_user_states(1), radio, (1e-6, 1e-6))

    def test_step_leaving_valid_range(self, radio):
        edge = [UserState(theta=math.pi / 2 - 1e-7, r=10.0)]
        with pytest.raises(InvalidSpecError, match="out of its valid range"):
            finite_difference_jacobian(edge, radio, (1e-6, 1e-6, 1e-6))
