"""Reading functions."""

import importlib
import types
from pathlib import Path

import numpy as np
import pandas as pd

from workbench.dsh import PsdSpectrum
from workbench.spectra import RamanSpectrum

SPECTRUM_COLUMNS = ("detuning_hz", "transfer_probability", "trials")
PSD_COLUMNS = ("freq_hz", "power_db")


def _read_source(directory: str) -> types.ModuleType:
    """Import read module from the directory."""
    return importlib.import_module(f".input.{directory}.read", package="data")


def _numeric_frame(path: Path, columns: tuple[str, ...]) -> pd.DataFrame:
    """Read a CSV and check required numeric columns; data rows are numbered from 1."""
    df = pd.read_csv(path)
    missing = [column for column in columns if column not in df.columns]
    if missing:
        msg = f"{path}: missing column(s) {', '.join(missing)}; found {list(df.columns)}"
        raise ValueError(msg)
    for column in columns:
        values = pd.to_numeric(df[column], errors="coerce")
        bad = np.flatnonzero(values.isna().to_numpy() | ~np.isfinite(values.to_numpy(dtype=float)))
        if bad.size:
            msg = f"{path}: data row {bad[0] + 1}, column {column}: not a finite number ({df[column].iloc[bad[0]]!r})"
            raise ValueError(msg)
        df[column] = values.astype(float)
    return df


def read_spectrum_csv(path: str | Path) -> RamanSpectrum:
    """Return a Raman spectrum from a CSV file.

    Required columns:
    =================
    detuning_hz: (float)
        two-photon detuning from the carrier, strictly increasing
    transfer_probability: (float)
        fraction of atoms transferred, in [0, 1]
    trials: (int)
        repetitions per point, the same for every row
    """
    path = Path(path)
    df = _numeric_frame(path, SPECTRUM_COLUMNS)
    probability = df["transfer_probability"].to_numpy()
    outside = np.flatnonzero((probability < 0) | (probability > 1))
    if outside.size:
        msg = f"{path}: data row {outside[0] + 1}: transfer_probability {probability[outside[0]]} outside [0, 1]"
        raise ValueError(msg)
    not_increasing = np.flatnonzero(np.diff(df["detuning_hz"].to_numpy()) <= 0)
    if not_increasing.size:
        msg = f"{path}: data row {not_increasing[0] + 2}: detuning_hz is not strictly increasing"
        raise ValueError(msg)
    trials = df["trials"].to_numpy()
    if np.any(trials != trials[0]) or trials[0] < 1 or trials[0] != int(trials[0]):
        msg = f"{path}: trials must be one positive integer for all rows, got {sorted(set(trials.tolist()))}"
        raise ValueError(msg)
    return RamanSpectrum(df["detuning_hz"].to_numpy(), probability, int(trials[0]))


def read_psd_csv(path: str | Path) -> PsdSpectrum:
    """Return a measured beat-note PSD from a CSV file.

    Required columns:
    =================
    freq_hz: (float)
        frequency, strictly increasing and uniformly spaced
    power_db: (float)
        power spectral density in dB, any reference level
    """
    path = Path(path)
    df = _numeric_frame(path, PSD_COLUMNS)
    freq = df["freq_hz"].to_numpy()
    not_increasing = np.flatnonzero(np.diff(freq) <= 0)
    if not_increasing.size:
        msg = f"{path}: data row {not_increasing[0] + 2}: freq_hz is not strictly increasing"
        raise ValueError(msg)
    resolution_bw = float(freq[1] - freq[0]) if freq.size > 1 else 0.0
    return PsdSpectrum(freq, df["power_db"].to_numpy(), resolution_bw=resolution_bw, in_db=True)


def spectrum(directory: str = "sample") -> RamanSpectrum:
    """Return the Raman spectrum shipped with a data source."""
    read_source = _read_source(directory)
    return read_source.spectrum()


def psd(directory: str = "sample") -> PsdSpectrum:
    """Return the beat-note PSD shipped with a data source."""
    read_source = _read_source(directory)
    return read_source.psd()
