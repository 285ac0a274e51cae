"""Tests for the delayed self-heterodyne simulation and linewidth fit."""

import doctest
import math

import numpy as np
import pytest
from scipy import signal

import workbench.dsh
from workbench.dsh import (
    COMPONENTS,
    DshConfig,
    NoiseAmplitudes,
    PsdSpectrum,
    component_lineshapes,
    dsh_beat_signal,
    fit_lorentzian_line,
    fit_noise_amplitudes,
    lineshape_fwhm,
    psd_welch,
    ripple_spacing,
    simulate_dsh,
    unit_frequency_noise,
)
from workbench.fitting import linear_fit


@pytest.fixture(scope="module")
def coherent_config():
    return DshConfig(
        aom_offset=2e6,
        fiber_delay=24e-6,
        sample_rate=10e6,
        duration=2**18 / 10e6,
        n_averages=15,
        analytic=True,
        span=2e6,
    )


@pytest.fixture(scope="module")
def incoherent_config():
    return DshConfig(
        aom_offset=500e3,
        fiber_delay=1e-3,
        sample_rate=2e6,
        duration=2**20 / 2e6,
        n_averages=63,
        analytic=True,
        span=400e3,
    )


def test_doctests():
    results = doctest.testmod(workbench.dsh)
    assert results.failed == 0


def test_white_unit_noise_has_unit_psd():
    rng = np.random.default_rng(0)
    units = unit_frequency_noise(2**18, 1e6, rng)
    freq, power = signal.welch(units[0], fs=1e6, nperseg=4096)
    result = power[1:-1].mean()
    assert result == pytest.approx(1.0, rel=0.05), f"Expected 1.0, but got {result}"


def test_flicker_unit_noise_falls_as_one_over_f():
    rng = np.random.default_rng(1)
    units = unit_frequency_noise(2**18, 1e6, rng)
    freq, power = signal.welch(units[1], fs=1e6, nperseg=4096)
    band = (freq > 1e3) & (freq < 1e5)
    slope = linear_fit(np.log10(freq[band]), np.log10(power[band])).slope
    assert slope == pytest.approx(-1.0, abs=0.1)


def test_noise_length_must_be_power_of_two():
    with pytest.raises(ValueError, match="power of two"):
        unit_frequency_noise(1000, 1e6, np.random.default_rng(0))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"duration": 1000 / 10e6},
        {"span": 4e6},
        {"fiber_delay": 1e-2},
        {"analytic": False, "sample_rate": 6e6, "duration": 2**18 / 6e6},
        {"n_averages": 2**17},
    ],
)
def test_invalid_dsh_config(kwargs):
    settings = {
        "aom_offset": 2e6,
        "fiber_delay": 24e-6,
        "sample_rate": 10e6,
        "duration": 2**18 / 10e6,
        "n_averages": 15,
        "analytic": True,
        "span": 2e6,
    }
    with pytest.raises(ValueError):
        DshConfig(**{**settings, **kwargs})


def test_segment_length(coherent_config):
    assert coherent_config.n_samples == 2**18
    assert coherent_config.segment_length == 2**15
    assert coherent_config.delay_samples()[0] == 240


def test_delay_rounding_warns(coherent_config):
    cfg = DshConfig(**{**coherent_config.__dict__, "fiber_delay": 24.03e-6})
    with pytest.warns(UserWarning, match="rounded"):
        dsh_beat_signal(np.zeros(cfg.n_samples), cfg)


def test_complex_psd_is_centred():
    t = np.arange(2**14) / 1e6
    psd = psd_welch(np.exp(2j * np.pi * 1e5 * t), 1e6, 1024)
    assert psd.freq[0] < 0 < psd.freq[-1]
    assert psd.freq[np.argmax(psd.power)] == pytest.approx(1e5, abs=1e3)


def test_incoherent_beat_is_twice_the_laser_linewidth(incoherent_config):
    linewidth = 10e3
    psd = simulate_dsh(NoiseAmplitudes.from_lorentzian(linewidth), incoherent_config, seed=2)
    line = fit_lorentzian_line(psd, incoherent_config.aom_offset, 200e3)
    assert line.fwhm == pytest.approx(2 * linewidth, rel=0.1), f"Expected {2 * linewidth}, but got {line.fwhm}"
    assert line.center == pytest.approx(incoherent_config.aom_offset, abs=2e3)
    width = lineshape_fwhm(psd, incoherent_config.aom_offset, 200e3)
    assert width == pytest.approx(2 * linewidth, rel=0.2)


def test_coherent_ripple_spacing(coherent_config):
    psd = simulate_dsh(NoiseAmplitudes.from_lorentzian(500.0), coherent_config, seed=3)
    result = ripple_spacing(psd, coherent_config.aom_offset, coherent_config.fiber_delay)
    expected = 1 / coherent_config.fiber_delay
    assert result == pytest.approx(expected, rel=0.05), f"Expected {expected}, but got {result}"


def test_component_lineshapes(coherent_config):
    amps = NoiseAmplitudes(10.0, 5.0, 2.0)
    shapes = component_lineshapes(amps, coherent_config, seed=4)
    assert tuple(shapes) == COMPONENTS
    for shape in shapes.values():
        assert isinstance(shape, PsdSpectrum)
        assert shape.freq.size == coherent_config.segment_length


def test_lorentzian_amplitude_relation():
    amps = NoiseAmplitudes.from_lorentzian(500.0)
    assert amps.lorentzian_linewidth == pytest.approx(500.0)
    with pytest.raises(ValueError):
        NoiseAmplitudes(-1.0)


@pytest.mark.parametrize("linewidth", [500.0, 10e3])
def test_fit_recovers_lorentzian_linewidth(coherent_config, linewidth):
    target = simulate_dsh(NoiseAmplitudes.from_lorentzian(linewidth), coherent_config, seed=100).to_db()
    estimate = fit_noise_amplitudes(
        target, coherent_config, NoiseAmplitudes.from_lorentzian(1.5 * linewidth)
    )
    assert estimate.lorentzian_hz == pytest.approx(linewidth, rel=0.2), (
        f"Expected {linewidth}, but got {estimate.lorentzian_hz}"
    )
    assert estimate.amplitudes.lorentzian_linewidth == pytest.approx(linewidth, rel=0.2)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(200, 208))
@pytest.mark.parametrize("linewidth", [500.0, 10e3])
def test_linewidth_fit_holds_across_seeds(coherent_config, linewidth, seed):
    target = simulate_dsh(NoiseAmplitudes.from_lorentzian(linewidth), coherent_config, seed=seed).to_db()
    estimate = fit_noise_amplitudes(
        target, coherent_config, NoiseAmplitudes.from_lorentzian(1.5 * linewidth)
    )
    assert estimate.lorentzian_hz == pytest.approx(linewidth, rel=0.2), (
        f"Expected {linewidth}, but got {estimate.lorentzian_hz}"
    )


def test_fit_of_a_noiseless_laser_goes_to_zero(coherent_config):
    target = simulate_dsh(NoiseAmplitudes(), coherent_config, seed=5).to_db()
    estimate = fit_noise_amplitudes(target, coherent_config, NoiseAmplitudes.from_lorentzian(10e3))
    assert estimate.amplitudes.lorentzian_linewidth < 10.0
    assert estimate.lorentzian_hz < 10.0


def test_fits_of_two_realizations_agree(coherent_config):
    results = []
    for seed in (200, 201):
        target = simulate_dsh(NoiseAmplitudes.from_lorentzian(10e3), coherent_config, seed=seed).to_db()
        results.append(
            fit_noise_amplitudes(
                target, coherent_config, NoiseAmplitudes.from_lorentzian(10e3), n_refits=3
            )
        )
    first, second = results
    combined = math.hypot(first.lorentzian_spread_hz, second.lorentzian_spread_hz)
    difference = abs(first.lorentzian_hz - second.lorentzian_hz)
    assert difference <= max(3 * combined, 0.1 * first.lorentzian_hz)
    assert len(first.refit_lorentzian_hz) == 3


def test_target_must_cover_the_span(coherent_config):
    target = PsdSpectrum(np.linspace(0, 1e6, 100), np.zeros(100), resolution_bw=1e4)
    with pytest.raises(ValueError, match="covers"):
        fit_noise_amplitudes(target, coherent_config, NoiseAmplitudes.from_lorentzian(1e3))


if __name__ == "__main__":
    pytest.main([__file__])
