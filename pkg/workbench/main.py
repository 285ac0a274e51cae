"""Commands of the repumper lattice workbench.

Every command takes a `RunConfig`, writes its files into `run_config.out_dir`
and returns the written paths together with a convergence flag. `main`
wraps a command with the manifest and maps unconverged fits to exit code 2.

Commands:
    - lightshift-scan: two-level, three-level and oscillation-averaged shifts
    - mc-single: one dressed-state Monte Carlo ensemble at the operating point
    - mc-map: loss and scatter rates over a (s, Δ̃) grid, resumable
    - spectrum-fit: seven-Lorentzian sideband fit and thermometry
    - dsh-simulate / dsh-fit: delayed self-heterodyne PSDs and linewidth fits
"""

import importlib
import warnings
from collections.abc import Callable
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pandas as pd

import data.read
from workbench.constants import BOLTZMANN
from workbench.dataset import RunConfig, create_run_config
from workbench.dsh import component_lineshapes, fit_noise_amplitudes, simulate_dsh
from workbench.lightshift import (
    OscillatingAtom,
    ThreeLevelModel,
    TwoLevelModel,
    noise_broadened_shift,
    oscillation_averaged_shift,
    scattering_rate,
    shift_exact,
    shift_linear,
    three_level_shift,
)
from workbench.montecarlo import CellSummary, run_ensemble, sweep_map
from workbench.output import RunManifest, utc_now, write_csv, write_json, write_manifest
from workbench.physics import TrapOscillator
from workbench.spectra import RamanSpectrum, binomial_ci, fit_sidebands, initial_guess, thermometry

TWO_PI = 2.0 * np.pi
EXIT_OK = 0
EXIT_UNCONVERGED = 2

CommandResult = tuple[list[Path], bool]


def _hz(values: float | np.ndarray) -> float | np.ndarray:
    return np.asarray(values) / TWO_PI


def _grid_uk(energies: np.ndarray) -> np.ndarray:
    return np.round(np.asarray(energies) / BOLTZMANN * 1e6, 9)


def cmd_lightshift_scan(run_config: RunConfig) -> CommandResult:
    """shifts.csv: one row per (s, Δ), all frequencies in Hz."""
    settings = run_config.settings
    gamma = run_config.species.gamma
    deltas = run_config.scan_detunings
    trap = TrapOscillator.from_lattice(run_config.lattice, run_config.species.mass)
    jitter = TWO_PI * settings["REPUMP_JITTER_HZ"]
    frames = []
    for s in run_config.scan_saturations:
        model = TwoLevelModel(gamma=gamma, saturation_s=float(s))
        with warnings.catch_warnings():
            # the three-level column is reported outside its validity range too
            warnings.simplefilter("ignore", UserWarning)
            three_level = ThreeLevelModel.from_two_level(
                model, TWO_PI * settings["RAMAN_RABI_HZ"], settings["REPUMP_EFFICIENCY"]
            )
        exact = np.asarray(shift_exact(model, deltas))
        frame = pd.DataFrame(
            {
                "detuning_hz": _hz(deltas),
                "s": float(s),
                "shift_linear_hz": _hz(shift_linear(model, deltas)),
                "shift_exact_hz": _hz(exact),
                "shift_three_level_hz": _hz(three_level_shift(three_level, deltas)),
            }
        )
        for energy, energy_uk in zip(
            run_config.scan_kinetic_energies, _grid_uk(run_config.scan_kinetic_energies)
        ):
            atom = OscillatingAtom(float(energy), trap, run_config.lattice)
            frame[f"shift_osc_avg_hz_{energy_uk:g}uK"] = _hz(
                oscillation_averaged_shift(model, deltas, atom)
            )
        frame["scattering_rate_per_s"] = scattering_rate(model, deltas)
        frame["sideband_position_hz"] = _hz(exact + trap.nu)
        if jitter > 0:
            frame["shift_noise_broadened_hz"] = _hz(noise_broadened_shift(model, deltas, jitter))
        frames.append(frame)
    df = pd.concat(frames, ignore_index=True)
    if run_config.verbose:
        print(f"Light-shift scan: {len(frames)} saturations x {deltas.size} detunings")
    return [write_csv(df, run_config.out_dir / "shifts.csv")], True


def cmd_mc_single(run_config: RunConfig) -> CommandResult:
    """Ensemble curves, photon events and the rate summary at the operating point."""
    result = run_ensemble(
        run_config.mc, run_config.field, n_workers=run_config.threads, progress=run_config.progress
    )
    out_dir = run_config.out_dir
    curves = pd.DataFrame(
        {
            "time_s": result.times,
            "survival": result.survival,
            "kinetic_energy_uk": result.kinetic_energy / BOLTZMANN * 1e6,
            "photons_per_atom": result.photons_per_atom,
        }
    )
    events = pd.DataFrame({"atom": result.event_atoms, "time_s": result.event_times})
    summary = CellSummary.from_ensemble(
        run_config.repumper.saturation_s, _hz(run_config.repumper.detuning_free_space), result
    )
    if run_config.verbose:
        print(
            f"Loss rate {result.loss_rate:.4g} ± {result.loss_rate_err:.3g} /s "
            f"({result.n_lost}/{result.n_atoms} lost), scatter rate "
            f"{result.scatter_rate:.4g} ± {result.scatter_rate_err:.3g} /s"
        )
    outputs = [
        write_csv(curves, out_dir / "ensemble.csv"),
        write_csv(events, out_dir / "events.csv"),
        write_json({**asdict(summary), "diagnostics": result.diagnostics}, out_dir / "summary.json"),
    ]
    return outputs, True


def cmd_mc_map(run_config: RunConfig) -> CommandResult:
    """rate_map.csv and its diagnostics; finished cells are checkpointed under cells/."""
    out_dir = run_config.out_dir

    def report(i: int, j: int, cell: CellSummary) -> None:
        if run_config.verbose and not run_config.progress:
            print(
                f"cell ({i}, {j}) s={cell.s:g} Δ̃/2π={cell.detuning_hz / 1e6:.3f} MHz: "
                f"loss {cell.loss_rate_per_s:.4g} /s"
            )

    rate_map = sweep_map(
        run_config.mc,
        run_config.field,
        run_config.map_saturations,
        run_config.map_detunings,
        n_workers=run_config.threads,
        checkpoint_dir=out_dir / "cells",
        resume=run_config.resume,
        progress=run_config.progress,
        on_cell=report,
    )
    metadata = {**rate_map.metadata, "config_hash": run_config.config_hash()}
    outputs = [
        write_csv(rate_map.to_frame(), out_dir / "rate_map.csv"),
        write_csv(rate_map.diagnostics_frame(), out_dir / "rate_map_diagnostics.csv"),
        write_json(metadata, out_dir / "rate_map.json"),
    ]
    return outputs, True


def _source_reader(run_config: RunConfig, name: str) -> Callable:
    try:
        importlib.import_module(f".input.{run_config.data_source}.read", package="data")
    except ModuleNotFoundError as error:
        msg = f"Data source {run_config.data_source!r} ships no {name}; pass --input PATH"
        raise ValueError(msg) from error
    return getattr(data.read, name)


def load_spectrum(run_config: RunConfig) -> RamanSpectrum:
    if run_config.input_path is not None:
        return data.read.read_spectrum_csv(run_config.input_path)
    return _source_reader(run_config, "spectrum")(run_config.data_source)


def cmd_spectrum_fit(run_config: RunConfig) -> CommandResult:
    """sideband_fit.json with fit and thermometry, spectrum.csv echoing the data with the model."""
    settings = run_config.settings
    spectrum = load_spectrum(run_config)
    init = initial_guess(
        spectrum,
        settings["SIDEBAND_FREQUENCIES_HZ"],
        settings["SIDEBAND_FWHM_HZ"],
        settings["CARRIER_FWHM_HZ"],
    )
    fit = fit_sidebands(
        spectrum,
        init,
        n_starts=settings["FIT_STARTS"],
        tol=settings["FIT_TOLERANCE"],
        max_eval=settings["FIT_MAX_EVALUATIONS"],
        seed=run_config.seed,
    )
    nu_per_axis = [TWO_PI * nu for nu in settings["SIDEBAND_FREQUENCIES_HZ"]]
    result = thermometry(fit, nu_per_axis, settings["SIDEBAND_PAIR_TOLERANCE"])
    successes = np.round(spectrum.transfer_probability * spectrum.trials_per_point)
    low, high = binomial_ci(successes, spectrum.trials_per_point, settings["CONFIDENCE_LEVEL"])
    echo = pd.DataFrame(
        {
            "detuning_hz": spectrum.detuning,
            "transfer_probability": spectrum.transfer_probability,
            "trials": spectrum.trials_per_point,
            "ci_low": low,
            "ci_high": high,
            "model": fit.evaluate(spectrum.detuning),
        }
    )
    if run_config.verbose:
        fractions = ", ".join(f"{p:.3f}" for p in result.ground_fraction_per_axis)
        print(f"Sideband fit residual {fit.residual:.4g}, ground-state fractions {fractions}")
    outputs = [
        write_json(
            {"fit": fit.to_dict(), "thermometry": result.to_dict()},
            run_config.out_dir / "sideband_fit.json",
        ),
        write_csv(echo, run_config.out_dir / "spectrum.csv"),
    ]
    return outputs, fit.converged


def cmd_dsh_simulate(run_config: RunConfig) -> CommandResult:
    """psd.csv of the synthetic beat and lineshapes.csv of each noise component alone."""
    amps = run_config.noise_amplitudes
    psd = simulate_dsh(amps, run_config.dsh, run_config.seed).to_db()
    shapes = component_lineshapes(amps, run_config.dsh, run_config.seed)
    lineshapes = pd.DataFrame({"freq_hz": psd.freq})
    for name, shape in shapes.items():
        lineshapes[f"{name}_db"] = shape.to_db().power
    outputs = [
        write_csv(pd.DataFrame({"freq_hz": psd.freq, "power_db": psd.power}), run_config.out_dir / "psd.csv"),
        write_csv(lineshapes, run_config.out_dir / "lineshapes.csv"),
    ]
    return outputs, True


def cmd_dsh_fit(run_config: RunConfig) -> CommandResult:
    """linewidth.json with the fitted amplitudes and the linewidths they imply."""
    settings = run_config.settings
    if run_config.input_path is not None:
        target = data.read.read_psd_csv(run_config.input_path)
    else:
        target = _source_reader(run_config, "psd")(run_config.data_source)
    estimate = fit_noise_amplitudes(
        target,
        run_config.dsh,
        run_config.noise_amplitudes,
        seed=settings["DSH_INNER_SEED"],
        n_refits=settings["DSH_UNCERTAINTY_SEEDS"],
        max_eval=settings["DSH_MAX_EVALUATIONS"],
        progress=run_config.progress,
    )
    if run_config.verbose:
        print(
            f"Lorentzian linewidth {estimate.lorentzian_hz:.4g} Hz "
            f"(spread {estimate.lorentzian_spread_hz:.3g} Hz)"
        )
    return [write_json(estimate.to_dict(), run_config.out_dir / "linewidth.json")], estimate.fit.converged


COMMAND_FUNCTIONS: dict[str, Callable[[RunConfig], CommandResult]] = {
    "lightshift-scan": cmd_lightshift_scan,
    "mc-single": cmd_mc_single,
    "mc-map": cmd_mc_map,
    "spectrum-fit": cmd_spectrum_fit,
    "dsh-simulate": cmd_dsh_simulate,
    "dsh-fit": cmd_dsh_fit,
}


def main(
    command: str,
    data_source: str = "sample",
    overrides: list[str] | None = None,
    seed: int | None = None,
    threads: int | None = None,
    out_dir: str | Path | None = None,
    resume: bool = False,
    input_path: str | Path | None = None,
) -> int:
    """Run one command and write its manifest.

    Parameters
    ----------
    command: str
        one of workbench.dataset.COMMANDS

    data_source: str
        name of a subfolder in data/input with config and reading modules

    overrides: list[str]
        NAME=VALUE settings applied after the data-source config

    Returns the exit code: 0, or 2 when a fit did not converge.
    """
    run_config = create_run_config(
        command,
        data_source=data_source,
        overrides=overrides,
        seed=seed,
        threads=threads,
        out_dir=out_dir,
        resume=resume,
        input_path=input_path,
    )
    manifest = RunManifest(
        command=command,
        data_source=data_source,
        config_hash=run_config.config_hash(),
        seed=run_config.seed,
        started_at=utc_now(),
    )
    outputs, converged = COMMAND_FUNCTIONS[command](run_config)
    manifest.finished_at = utc_now()
    manifest.converged = converged
    manifest.outputs = [str(path.relative_to(run_config.out_dir)) for path in outputs]
    write_manifest(manifest, run_config.out_dir)
    if not converged:
        print(f"{command}: fit did not converge, outputs written to {run_config.out_dir}")
    return EXIT_OK if converged else EXIT_UNCONVERGED
