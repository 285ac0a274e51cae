"""Synthetic measurements for the 'sample' data source."""

import numpy as np

from workbench.dataset import create_run_config
from workbench.dsh import PsdSpectrum, simulate_dsh
from workbench.spectra import RamanSpectrum, synthesize_spectrum, thermal_sideband_fit

NBAR = 0.17
SPECTRUM_SEED = 17
PSD_SEED = 7


def spectrum() -> RamanSpectrum:
    """Thermal spectrum with n̄ = 0.17 on every axis and binomial noise."""
    fit = thermal_sideband_fit([NBAR, NBAR, NBAR])
    detuning = np.linspace(-600e3, 600e3, 601)
    return synthesize_spectrum(fit, detuning, rng=np.random.default_rng(SPECTRUM_SEED))


def psd() -> PsdSpectrum:
    """Beat PSD of a laser with the configured noise amplitudes, in dB."""
    run_config = create_run_config("dsh-fit", data_source="sample")
    return simulate_dsh(run_config.noise_amplitudes, run_config.dsh, PSD_SEED).to_db()
