"""Tests for the analytic light-shift models."""

import doctest

import numpy as np
import pytest

import workbench.lightshift
from workbench.constants import BOLTZMANN, RB87_MASS
from workbench.lightshift import (
    OscillatingAtom,
    ThreeLevelModel,
    TwoLevelModel,
    noise_broadened_shift,
    optimal_delta_prime,
    oscillation_averaged_shift,
    oscillation_averaged_shift_numeric,
    rho_ee_steady,
    scattering_rate,
    shift_exact,
    shift_linear,
    three_level_shift,
)
from workbench.physics import LatticeParams, TrapOscillator

GAMMA = 2 * np.pi * 2.873e6


@pytest.fixture(scope="module")
def lattice():
    return LatticeParams(period_a=434e-9, depth_U0=BOLTZMANN * 0.5e-3, chi=-0.59)


@pytest.fixture(scope="module")
def trap(lattice):
    return TrapOscillator.from_lattice(lattice, RB87_MASS)


def test_doctests():
    results = doctest.testmod(workbench.lightshift)
    assert results.failed == 0


@pytest.mark.parametrize("s", [0.057, 0.36, 0.5])
def test_linear_shift_extrema(s):
    model = TwoLevelModel(GAMMA, s)
    for sign in (-1, 1):
        result = shift_linear(model, sign * GAMMA)
        expected = sign * s * GAMMA / 4
        assert result == pytest.approx(expected, rel=1e-12), f"Expected {expected}, but got {result}"
        # neighbours of an extremum are closer to zero
        for step in (0.99, 1.01):
            assert abs(shift_linear(model, sign * GAMMA * step)) < abs(result)


@pytest.mark.parametrize("s", [0.01, 0.057, 0.1])
def test_exact_shift_close_to_linear_at_low_power(s):
    model = TwoLevelModel(GAMMA, s)
    deltas = np.linspace(-10 * GAMMA, 10 * GAMMA, 2001)
    difference = np.max(np.abs(shift_exact(model, deltas) - shift_linear(model, deltas)))
    assert difference <= 2 * s**2 * GAMMA


def test_zero_saturation_has_no_shift(lattice, trap):
    model = TwoLevelModel(GAMMA, 0.0)
    deltas = np.linspace(-3 * GAMMA, 3 * GAMMA, 61)
    atom = OscillatingAtom(BOLTZMANN * 50e-6, trap, lattice)
    np.testing.assert_allclose(shift_linear(model, deltas), 0.0)
    np.testing.assert_allclose(shift_exact(model, deltas), 0.0, atol=1e-6 * GAMMA)
    np.testing.assert_allclose(oscillation_averaged_shift(model, deltas, atom), 0.0)
    np.testing.assert_allclose(scattering_rate(model, deltas), 0.0)


def test_exact_shift_is_odd_in_detuning():
    model = TwoLevelModel(GAMMA, 0.36)
    deltas = np.linspace(0.1 * GAMMA, 5 * GAMMA, 50)
    np.testing.assert_allclose(shift_exact(model, -deltas), -np.asarray(shift_exact(model, deltas)))
    assert shift_exact(model, 0.0) == 0.0


def test_invalid_two_level_model():
    with pytest.raises(ValueError):
        TwoLevelModel(0.0, 0.1)
    with pytest.raises(ValueError):
        TwoLevelModel(1.0, -0.1)


def test_scattering_rate_on_resonance():
    model = TwoLevelModel(GAMMA, 1.0)
    assert scattering_rate(model, 0.0) == pytest.approx(GAMMA / 2)


def test_optimal_delta_prime_matches_brute_force():
    rng = np.random.default_rng(3)
    big_gamma = 1.0
    grid = np.linspace(-4.0, 4.0, 100_001)
    spacing = grid[1] - grid[0]
    for _ in range(100):
        omega = rng.uniform(0.01, 0.49)
        delta = rng.uniform(-3.0, 3.0)
        model = ThreeLevelModel(omega, 0.1 * omega, big_gamma)
        result = optimal_delta_prime(model, delta)
        populations = np.asarray(rho_ee_steady(model, delta, grid))
        expected = grid[np.argmax(populations)]
        assert abs(result - expected) <= spacing or rho_ee_steady(model, delta, result) >= populations.max(), (
            f"Expected {expected}, but got {result} for Ω={omega}, Δ={delta}"
        )


def test_three_level_shift_agrees_with_two_level_at_low_power():
    model = TwoLevelModel(GAMMA, 1e-3)
    three_level = ThreeLevelModel.from_two_level(model, raman_rabi=1e-3 * GAMMA)
    deltas = np.linspace(-5 * GAMMA, 5 * GAMMA, 101)
    linear = np.asarray(shift_linear(model, deltas))
    np.testing.assert_allclose(three_level_shift(three_level, deltas), linear, atol=1e-2 * np.abs(linear).max())


def test_three_level_model_warns_outside_its_hierarchy():
    with pytest.warns(UserWarning, match="outside"):
        ThreeLevelModel(0.8, 0.01, 1.0)


def test_oscillation_average_matches_quadrature(lattice, trap):
    model = TwoLevelModel(GAMMA, 0.1)
    deltas = np.linspace(-5 * GAMMA, 5 * GAMMA, 50)
    for energy_uk in np.linspace(0.0, 200.0, 20):
        atom = OscillatingAtom(BOLTZMANN * energy_uk * 1e-6, trap, lattice)
        closed = np.asarray(oscillation_averaged_shift(model, deltas, atom))
        numeric = np.asarray(oscillation_averaged_shift_numeric(model, deltas, atom))
        np.testing.assert_allclose(closed, numeric, atol=1e-4 * np.abs(numeric).max())


def test_oscillation_average_at_rest_is_linear_shift(lattice, trap):
    model = TwoLevelModel(GAMMA, 0.057)
    deltas = np.linspace(-5 * GAMMA, 5 * GAMMA, 101)
    atom = OscillatingAtom(0.0, trap, lattice)
    np.testing.assert_allclose(
        oscillation_averaged_shift(model, deltas, atom), shift_linear(model, deltas), rtol=1e-9, atol=1e-9
    )


def test_oscillation_average_trends(lattice, trap):
    model = TwoLevelModel(GAMMA, 0.1)
    deltas = np.linspace(-8 * GAMMA, 4 * GAMMA, 6001)
    crossings, amplitudes, separations = [], [], []
    for energy_uk in (0.0, 25.0, 50.0, 100.0):
        atom = OscillatingAtom(BOLTZMANN * energy_uk * 1e-6, trap, lattice)
        curve = np.asarray(oscillation_averaged_shift(model, deltas, atom))
        low, high = int(np.argmin(curve)), int(np.argmax(curve))
        rising = np.nonzero((curve[low:high][:-1] < 0) & (curve[low:high][1:] >= 0))[0]
        crossings.append(deltas[low + rising[0]])
        amplitudes.append(curve[high] - curve[low])
        separations.append(deltas[high] - deltas[low])
    assert np.all(np.diff(crossings) < 0), f"zero crossings {crossings} are not red-shifting"
    assert np.all(np.diff(amplitudes) < 0), f"amplitudes {amplitudes} are not decreasing"
    assert np.all(np.diff(separations) > 0), f"extrema separations {separations} are not increasing"


def test_noise_broadening_flattens_the_curve():
    model = TwoLevelModel(GAMMA, 0.1)
    deltas = np.linspace(-5 * GAMMA, 5 * GAMMA, 201)
    sharp = np.asarray(shift_exact(model, deltas))
    broadened = np.asarray(noise_broadened_shift(model, deltas, 0.5 * GAMMA))
    assert np.abs(broadened).max() < np.abs(sharp).max()
    np.testing.assert_allclose(broadened, -broadened[::-1], atol=1e-9 * GAMMA)
    np.testing.assert_allclose(noise_broadened_shift(model, deltas, 0.0), sharp)


if __name__ == "__main__":
    pytest.main([__file__])
