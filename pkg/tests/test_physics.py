"""Tests for the parameter types and derived quantities."""

import doctest

import numpy as np
import pytest

import workbench.physics
from workbench.constants import BOLTZMANN, HBAR, RB87_MASS
from workbench.physics import (
    AtomSpecies,
    LatticeParams,
    RepumperField,
    TrapOscillator,
    detuning_at_bottom,
    lattice_from_wavelength,
    rabi_from_saturation,
    rb87,
    saturation_from_rabi,
    trap_frequency_from_depth,
    trap_shift_of,
)


@pytest.fixture(scope="module")
def lattice():
    return LatticeParams(period_a=434e-9, depth_U0=BOLTZMANN * 0.5e-3, chi=-0.59)


def test_doctests():
    results = doctest.testmod(workbench.physics)
    assert results.failed == 0


def test_trap_frequency_of_half_millikelvin_lattice(lattice):
    result = trap_frequency_from_depth(lattice, RB87_MASS) / (2 * np.pi)
    expected = 350e3
    assert abs(result - expected) < 0.05 * expected, f"Expected {expected}, but got {result}"


def test_saturation_rabi_round_trip():
    gamma = 2 * np.pi * 2.873e6
    s = np.array([0.0, 0.057, 0.36, 0.5, 3.0])
    result = saturation_from_rabi(rabi_from_saturation(s, gamma), gamma)
    np.testing.assert_allclose(result, s, rtol=1e-12, atol=1e-15)


def test_rabi_equals_gamma_at_half_saturation():
    gamma = 2 * np.pi * 2.873e6
    assert rabi_from_saturation(0.5, gamma) == pytest.approx(gamma, rel=1e-12)


def test_negative_saturation_is_rejected():
    with pytest.raises(ValueError, match="Saturation"):
        rabi_from_saturation(-0.1, 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"period_a": 0.0, "depth_U0": 1.0, "chi": 0.0},
        {"period_a": 1.0, "depth_U0": -1.0, "chi": 0.0},
        {"period_a": 1.0, "depth_U0": 1.0, "chi": np.nan},
    ],
)
def test_invalid_lattice_is_rejected(kwargs):
    with pytest.raises(ValueError):
        LatticeParams(**kwargs)


def test_lattice_potentials(lattice):
    assert lattice.ground_potential(0.0) == pytest.approx(-lattice.depth_U0)
    assert lattice.ground_potential(lattice.period_a / 2) == pytest.approx(0.0, abs=1e-40)
    assert lattice.excited_potential(0.0) == pytest.approx(-lattice.chi * lattice.depth_U0)


def test_lattice_from_wavelength_halves_the_period():
    result = lattice_from_wavelength(868e-9, 1e-27, 0.0).period_a
    expected = 434e-9
    assert result == pytest.approx(expected), f"Expected {expected}, but got {result}"


def test_repumper_needs_exactly_one_drive_parameter(lattice):
    species = rb87()
    with pytest.raises(ValueError, match="Exactly one"):
        RepumperField.create(species, lattice, 0.0)
    with pytest.raises(ValueError, match="Exactly one"):
        RepumperField.create(species, lattice, 0.0, saturation_s=0.1, rabi_omega=1e6)


def test_repumper_rejects_inconsistent_drive_pair():
    gamma = rb87().gamma
    RepumperField(0.5, gamma, 0.0, 0.0, gamma=gamma)
    with pytest.raises(ValueError, match="does not match"):
        RepumperField(0.5, 2 * gamma, 0.0, 0.0, gamma=gamma)
    with pytest.raises(ValueError, match="vanish together"):
        RepumperField(0.0, gamma, 0.0, 0.0)
    with pytest.raises(ValueError, match="vanish together"):
        RepumperField(0.1, 0.0, 0.0, 0.0)


def test_created_repumper_carries_its_linewidth(lattice):
    species = rb87()
    field = RepumperField.create(species, lattice, 0.0, saturation_s=0.057)
    assert field.gamma == species.gamma
    expected = rabi_from_saturation(0.057, species.gamma)
    assert field.rabi_omega == pytest.approx(expected, rel=1e-12), f"Expected {expected}, but got {field.rabi_omega}"


def test_detuning_at_bottom_subtracts_trap_shift(lattice):
    species = rb87()
    detuning = 2 * np.pi * 35e6
    field = RepumperField.create(species, lattice, detuning, saturation_s=0.057)
    expected = detuning - lattice.depth_U0 * (1 - lattice.chi) / HBAR
    assert field.detuning_at_bottom == pytest.approx(expected)
    assert detuning_at_bottom(field, lattice) == pytest.approx(expected)
    assert trap_shift_of(lattice) / (2 * np.pi) == pytest.approx(16.56e6, rel=1e-2)


def test_calibrated_trap_shift_replaces_model(lattice):
    field = RepumperField.create(
        rb87(), lattice, 2 * np.pi * 35e6, saturation_s=0.1, trap_shift=2 * np.pi * 32e6
    )
    assert field.detuning_at_bottom == pytest.approx(2 * np.pi * 3e6)


def test_species_and_oscillator_validation(lattice):
    with pytest.raises(ValueError):
        AtomSpecies(mass=0.0, gamma=1.0, repump_wavelength=1.0)
    trap = TrapOscillator.from_lattice(lattice, RB87_MASS)
    assert trap.period == pytest.approx(2 * np.pi / trap.nu)
    assert rb87().linewidth == pytest.approx(2 * rb87().gamma)


if __name__ == "__main__":
    pytest.main([__file__])
