"""Tests for the dressed-state potentials, rates and per-atom Monte Carlo steps."""

import doctest
import math
from dataclasses import replace

import numpy as np
import pytest

import workbench.dressed
from workbench import kernels
from workbench.constants import BOLTZMANN, HBAR
from workbench.dressed import (
    AtomTrajectoryState,
    Branch,
    Channel,
    DressedField,
    MCConfig,
    ScatterCandidate,
    acceptance_probability,
    apply_scatter,
    assign_branch,
    draw_initial_energy,
    dressed_force,
    dressed_potentials,
    init_atom,
    mixing_angle,
    sample_event,
    step_motion,
    transition_rates,
)
from workbench.physics import RepumperField, lattice_from_wavelength, rb87


@pytest.fixture(scope="module")
def field():
    species = rb87()
    lattice = lattice_from_wavelength(868e-9, BOLTZMANN * 500e-6, -0.59)
    repumper = RepumperField.create(species, lattice, 2 * np.pi * 35e6, saturation_s=0.057)
    return DressedField(lattice, repumper, species)


@pytest.fixture(scope="module")
def dark_field(field):
    repumper = RepumperField.create(field.atom, field.lattice, 2 * np.pi * 35e6, saturation_s=0.0)
    return replace(field, repumper=repumper)


@pytest.fixture(scope="module")
def positions(field):
    return np.linspace(-0.45, 0.45, 37) * field.lattice.period_a


def test_doctests():
    results = doctest.testmod(workbench.dressed)
    assert results.failed == 0


def test_dressed_splitting(field, positions):
    u_minus, u_plus = dressed_potentials(field, positions)
    delta = np.asarray(field.detuning(positions))
    np.testing.assert_allclose(u_plus - u_minus, HBAR * np.sqrt(delta**2 + field.rabi**2), rtol=1e-12)
    assert np.all(u_minus < u_plus)


def test_detuning_at_well_bottom(field):
    assert field.detuning(0.0) == pytest.approx(field.repumper.detuning_at_bottom)


@pytest.mark.parametrize("branch", [Branch.MINUS, Branch.PLUS])
def test_force_is_minus_potential_gradient(field, positions, branch):
    h = 1e-13
    index = 0 if branch == Branch.MINUS else 1
    gradient = (
        np.asarray(dressed_potentials(field, positions + h)[index])
        - np.asarray(dressed_potentials(field, positions - h)[index])
    ) / (2 * h)
    scale = field.lattice.depth_U0 * field.lattice.wavenumber
    np.testing.assert_allclose(dressed_force(field, positions, branch), -gradient, atol=1e-5 * scale)
    kernel = [kernels.force(x, int(branch), field.params) for x in positions]
    np.testing.assert_allclose(kernel, dressed_force(field, positions, branch), rtol=1e-12, atol=1e-30)


def test_mixing_angle_range(field, positions):
    theta = np.asarray(mixing_angle(field, positions))
    assert np.all((theta >= 0) & (theta <= np.pi / 2))


def test_mixing_angle_without_drive(dark_field):
    assert mixing_angle(dark_field, 0.0) == pytest.approx(np.pi / 2)


def test_rate_identities(field):
    half = 0.5 * field.lattice.period_a
    x = np.random.default_rng(3).uniform(-half, half, 10_000)
    stay_minus, change_minus, stay_plus, change_plus = map(np.asarray, transition_rates(field, x))
    theta = np.asarray(mixing_angle(field, x))
    full = field.linewidth
    np.testing.assert_allclose(stay_minus + change_minus + stay_plus + change_plus, full, rtol=1e-12)
    np.testing.assert_allclose(stay_minus + change_minus, full * np.sin(theta) ** 2, rtol=1e-12)
    np.testing.assert_allclose(stay_plus + change_plus, full * np.cos(theta) ** 2, rtol=1e-12)
    np.testing.assert_allclose(stay_minus, stay_plus, rtol=1e-12)


def test_kernel_rates_match_vectorized(field, positions):
    stay_minus, change_minus, _, change_plus = map(np.asarray, transition_rates(field, positions))
    for x, minus, plus, stay in zip(positions, change_minus, change_plus, stay_minus):
        assert kernels.channel_rates(x, -1, field.params) == pytest.approx((stay, minus), rel=1e-9)
        assert kernels.channel_rates(x, 1, field.params) == pytest.approx((stay, plus), rel=1e-9)


def test_no_drive_means_no_scattering(dark_field, positions):
    for rates in transition_rates(dark_field, positions):
        np.testing.assert_array_equal(rates, 0.0)
    state = AtomTrajectoryState(x=0.0, p=0.0, branch=Branch.MINUS)
    candidate = sample_event(state, dark_field, np.random.default_rng(0))
    assert math.isinf(candidate.tau)
    assert acceptance_probability(candidate, state, dark_field) == 0.0


def test_rate_bounds_cover_the_trajectory(field):
    rng = np.random.default_rng(1)
    dt = 1.0 / (50 * field.trap.nu)
    for _ in range(20):
        energy = draw_initial_energy(200e-6, field.lattice.depth_U0, rng)
        state = AtomTrajectoryState(
            x=0.0, p=math.sqrt(2 * field.atom.mass * energy), branch=Branch(rng.choice([-1, 1]))
        )
        stay_max, change_max = kernels.rate_bounds(state.x, state.p, int(state.branch), field.params)
        for _ in range(200):
            state = step_motion(state, field, dt)
            if abs(state.x) > field.lattice.period_a / 2:
                break
            stay, change = kernels.channel_rates(state.x, int(state.branch), field.params)
            assert stay <= stay_max
            assert change <= change_max


def test_step_motion_conserves_energy(field):
    index = {Branch.MINUS: 0, Branch.PLUS: 1}
    for branch in Branch:
        state = AtomTrajectoryState(x=20e-9, p=0.0, branch=branch)
        start = dressed_potentials(field, state.x)[index[branch]]
        dt = 1.0 / (50 * field.trap.nu)
        for _ in range(1000):
            state = step_motion(state, field, dt)
        energy = state.p**2 / (2 * field.atom.mass) + dressed_potentials(field, state.x)[index[branch]]
        assert energy == pytest.approx(start, rel=1e-3)
        assert state.t == pytest.approx(1000 * dt)


def test_small_oscillation_follows_trap_frequency(field):
    species = field.atom
    lattice = lattice_from_wavelength(868e-9, BOLTZMANN * 500e-6, 1.0)
    repumper = RepumperField.create(species, lattice, 0.0, saturation_s=0.0)
    harmonic = DressedField(lattice, repumper, species)
    nu = harmonic.trap.nu
    dt = 1.0 / (50 * nu)
    state = AtomTrajectoryState(x=0.005 * lattice.period_a, p=0.0, branch=Branch.MINUS)
    t, x = [0.0], [state.x]
    for _ in range(int(math.ceil(10.5 * harmonic.trap.period / dt))):
        state = step_motion(state, harmonic, dt)
        t.append(state.t)
        x.append(state.x)
    t, x = np.array(t), np.array(x)
    crossing = np.flatnonzero(np.sign(x[:-1]) != np.sign(x[1:]))
    zeros = t[crossing] - x[crossing] * (t[crossing + 1] - t[crossing]) / (x[crossing + 1] - x[crossing])
    assert zeros.size >= 20
    result = np.pi * (zeros.size - 1) / (zeros[-1] - zeros[0])
    assert result == pytest.approx(nu, rel=1e-3), f"Expected {nu}, but got {result}"


def test_assign_branch_statistics(field):
    rng = np.random.default_rng(2)
    x = 0.2 * field.lattice.period_a
    expected = math.cos(mixing_angle(field, x)) ** 2
    draws = [assign_branch(field, x, rng) for _ in range(20_000)]
    result = np.mean([branch == Branch.MINUS for branch in draws])
    assert abs(result - expected) < 0.02, f"Expected {expected}, but got {result}"


def test_initial_energy_is_capped():
    rng = np.random.default_rng(4)
    depth = BOLTZMANN * 100e-6
    energies = [draw_initial_energy(200e-6, depth, rng) for _ in range(2000)]
    assert max(energies) <= 0.95 * depth
    assert draw_initial_energy(0.0, depth, rng) == 0.0


def test_cold_atom_starts_at_rest(field):
    cfg = MCConfig(init_temperature=0.0, ensemble_n=1)
    state = init_atom(cfg, field, np.random.default_rng(5))
    assert state.x == 0.0
    assert state.p == 0.0
    assert state.alive


def test_apply_scatter_counts_flips_and_kicks(field):
    state = AtomTrajectoryState(x=0.0, p=0.0, branch=Branch.MINUS)
    rng = np.random.default_rng(6)
    change = ScatterCandidate(1e-6, Channel.CHANGE, 1.0)
    stay = ScatterCandidate(1e-6, Channel.STAY, 1.0)
    recoil = field.atom.recoil_momentum
    after = apply_scatter(state, field, rng, change)
    assert after.branch == Branch.PLUS
    assert after.photons == 1
    assert abs(after.p) == pytest.approx(recoil)
    after = apply_scatter(after, field, rng, stay, double_kick=True)
    assert after.branch == Branch.PLUS
    assert after.photons == 2
    assert after.p / recoil == pytest.approx(round(after.p / recoil))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"t_max": 0.0},
        {"ensemble_n": 0},
        {"seed": -1},
        {"n_samples": 1},
        {"recoil_mode": "triple"},
    ],
)
def test_invalid_mc_config(kwargs):
    with pytest.raises(ValueError):
        MCConfig(**kwargs)


def test_time_step_and_boundary_limits(field):
    limit = 1.0 / (50 * field.trap.nu)
    assert MCConfig().time_step(field) == pytest.approx(limit)
    with pytest.raises(ValueError, match="dt_max"):
        MCConfig(dt_max=2 * limit).time_step(field)
    assert MCConfig().boundary(field) == pytest.approx(field.lattice.period_a / 2)
    with pytest.raises(ValueError, match="boundary_x"):
        MCConfig(boundary_x=field.lattice.period_a).boundary(field)


if __name__ == "__main__":
    pytest.main([__file__])
