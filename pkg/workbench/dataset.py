"""Functions assembling the run configuration of the workbench.

Settings start from `workbench.config`, are updated by the UPPER_CASE names
of `data/input/<data_source>/config.py` and finally by `--set NAME=VALUE`
overrides. File units are converted to SI and rad/s here, once.
"""

import ast
import importlib
import os
import types
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from workbench import config
from workbench.constants import BOLTZMANN
from workbench.dressed import DressedField, MCConfig
from workbench.dsh import DshConfig, NoiseAmplitudes, delay_from_fiber
from workbench.physics import (
    AtomSpecies,
    LatticeParams,
    RepumperField,
    lattice_from_wavelength,
    rb87,
)
from workbench.utils import config_hash

COMMANDS = (
    "lightshift-scan",
    "mc-single",
    "mc-map",
    "spectrum-fit",
    "dsh-simulate",
    "dsh-fit",
)
GRIDS = {
    "lightshift-scan": ("scan_detunings", "scan_saturations", "scan_kinetic_energies"),
    "mc-map": ("map_saturations", "map_detunings"),
}
_path = os.path.dirname(__file__)
OUTPUT_DIR = Path(_path, "..", "data", "output")

# ANSI escape codes for yellow
YELLOW = "\033[33m"
RESET = "\033[0m"


def _settings_of(module: types.ModuleType) -> dict:
    return {key: value for key, value in vars(module).items() if key.isupper()}


def load_settings(data_source: str = "sample") -> dict:
    """Defaults updated with the config module of a data source, if it has one."""
    settings = _settings_of(config)
    try:
        module = importlib.import_module(f".input.{data_source}.config", package="data")
        settings.update(_settings_of(module))
    except ModuleNotFoundError:
        print(
            f"{YELLOW}data.input.{data_source}.config module does not exist. Using workbench.config.py without setting changes specific to {data_source}{RESET}"
        )
    return settings


def parse_overrides(pairs: list[str] | None) -> dict:
    """Parse NAME=VALUE strings, values as Python literals.

    Examples:
    ========
        >>> parse_overrides(["SATURATION=0.2", "MAP_SATURATIONS=[0.1, 0.4]"])
        {'SATURATION': 0.2, 'MAP_SATURATIONS': [0.1, 0.4]}

    """
    overrides = {}
    for pair in pairs or []:
        name, separator, text = pair.partition("=")
        name = name.strip()
        if not separator or not name:
            msg = f"Override {pair!r} is not of the form NAME=VALUE"
            raise ValueError(msg)
        try:
            overrides[name] = ast.literal_eval(text.strip())
        except (ValueError, SyntaxError) as error:
            msg = f"Override {name}: cannot parse value {text!r} ({error})"
            raise ValueError(msg) from error
    return overrides


def apply_overrides(settings: dict, overrides: dict) -> dict:
    """Copy of settings with overrides applied; unknown names are rejected."""
    unknown = sorted(set(overrides) - set(settings))
    if unknown:
        msg = f"Unknown setting(s) {', '.join(unknown)}; known names are those of workbench/config.py"
        raise ValueError(msg)
    return {**settings, **overrides}


def _grid(spec: tuple | list, name: str) -> np.ndarray:
    """(start, stop, points) tuples become linspaces, lists are taken as they are."""
    if isinstance(spec, tuple):
        if len(spec) != 3:
            msg = f"{name}: a range is (start, stop, points), got {spec}"
            raise ValueError(msg)
        grid = np.linspace(float(spec[0]), float(spec[1]), int(spec[2]))
    else:
        grid = np.asarray(spec, dtype=float).ravel()
    if grid.size == 0:
        msg = f"{name}: grid must not be empty"
        raise ValueError(msg)
    return grid


@dataclass(frozen=True)
class RunConfig:
    command: str
    data_source: str
    settings: dict
    species: AtomSpecies
    lattice: LatticeParams
    repumper: RepumperField
    mc: MCConfig
    dsh: DshConfig
    seed: int
    threads: int
    out_dir: Path
    resume: bool = False
    input_path: Path | None = None

    @property
    def field(self) -> DressedField:
        return DressedField(self.lattice, self.repumper, self.species)

    @property
    def scan_detunings(self) -> np.ndarray:
        """Δ grid relative to the trap-shifted resonance, rad/s."""
        return 2.0 * np.pi * _grid(self.settings["SCAN_DETUNING_HZ"], "SCAN_DETUNING_HZ")

    @property
    def scan_saturations(self) -> np.ndarray:
        return _grid(self.settings["SCAN_SATURATIONS"], "SCAN_SATURATIONS")

    @property
    def scan_kinetic_energies(self) -> np.ndarray:
        """J."""
        uk = _grid(self.settings["SCAN_KINETIC_ENERGIES_UK"], "SCAN_KINETIC_ENERGIES_UK")
        return BOLTZMANN * uk * 1e-6

    @property
    def map_saturations(self) -> np.ndarray:
        return _grid(self.settings["MAP_SATURATIONS"], "MAP_SATURATIONS")

    @property
    def map_detunings(self) -> np.ndarray:
        """Free-space Δ̃ grid, rad/s."""
        return 2.0 * np.pi * _grid(self.settings["MAP_DETUNINGS_HZ"], "MAP_DETUNINGS_HZ")

    @property
    def noise_amplitudes(self) -> NoiseAmplitudes:
        return NoiseAmplitudes.from_lorentzian(
            self.settings["DSH_LINEWIDTH_HZ"],
            a_flicker=self.settings["DSH_FLICKER"],
            a_randomwalk=self.settings["DSH_RANDOMWALK"],
        )

    @property
    def verbose(self) -> bool:
        return bool(self.settings["VERBOSE"])

    @property
    def progress(self) -> bool:
        return bool(self.settings["PROGRESS"])

    def config_hash(self) -> str:
        return config_hash({"command": self.command, "seed": self.seed, **self.settings})


def create_run_config(
    command: str,
    data_source: str = "sample",
    overrides: list[str] | None = None,
    seed: int | None = None,
    threads: int | None = None,
    out_dir: str | Path | None = None,
    resume: bool = False,
    input_path: str | Path | None = None,
) -> RunConfig:
    """Merge defaults, data-source config and overrides into an immutable RunConfig."""
    if command not in COMMANDS:
        msg = f"Unknown command {command!r}, expected one of {COMMANDS}"
        raise ValueError(msg)
    settings = apply_overrides(load_settings(data_source), parse_overrides(overrides))
    seed = settings["SEED"] if seed is None else seed
    if not isinstance(seed, int) or seed < 0:
        msg = f"Seed must be a non-negative integer, got {seed!r}"
        raise ValueError(msg)
    settings["SEED"] = seed
    threads = threads or settings["THREADS"] or os.cpu_count() or 1

    species = rb87(
        gamma=2.0 * np.pi * settings["GAMMA_HALF_HZ"],
        repump_wavelength=settings["REPUMP_WAVELENGTH_NM"] * 1e-9,
    )
    lattice = lattice_from_wavelength(
        settings["LATTICE_WAVELENGTH_NM"] * 1e-9,
        BOLTZMANN * settings["TRAP_DEPTH_UK"] * 1e-6,
        settings["POLARIZABILITY_RATIO"],
    )
    trap_shift = settings["TRAP_SHIFT_HZ"]
    repumper = RepumperField.create(
        species,
        lattice,
        detuning_free_space=2.0 * np.pi * settings["DETUNING_FREE_SPACE_HZ"],
        saturation_s=settings["SATURATION"],
        trap_shift=None if trap_shift is None else 2.0 * np.pi * trap_shift,
    )
    boundary_nm = settings["MC_BOUNDARY_NM"]
    mc = MCConfig(
        t_max=settings["MC_TIME_LIMIT_S"],
        dt_max=settings["MC_TIME_STEP_S"],
        boundary_x=None if boundary_nm is None else boundary_nm * 1e-9,
        ensemble_n=settings["MC_ENSEMBLE_SIZE"],
        seed=seed,
        init_temperature=settings["MC_TEMPERATURE_UK"] * 1e-6,
        n_samples=settings["MC_SAMPLES"],
        recoil_mode=settings["MC_RECOIL_MODE"],
    )
    dsh = DshConfig(
        aom_offset=settings["DSH_AOM_OFFSET_HZ"],
        fiber_delay=delay_from_fiber(settings["DSH_FIBER_LENGTH_M"], settings["DSH_GROUP_INDEX"]),
        sample_rate=settings["DSH_SAMPLE_RATE_HZ"],
        duration=settings["DSH_DURATION_S"],
        n_averages=settings["DSH_AVERAGES"],
        analytic=settings["DSH_ANALYTIC"],
        span=settings["DSH_SPAN_HZ"],
    )
    run_config = RunConfig(
        command=command,
        data_source=data_source,
        settings=settings,
        species=species,
        lattice=lattice,
        repumper=repumper,
        mc=mc,
        dsh=dsh,
        seed=seed,
        threads=int(threads),
        out_dir=Path(out_dir) if out_dir is not None else OUTPUT_DIR / command,
        resume=resume,
        input_path=None if input_path is None else Path(input_path),
    )
    if run_config.input_path is not None and not run_config.input_path.exists():
        msg = f"Input file {run_config.input_path} does not exist"
        raise ValueError(msg)
    # bounds that depend on the trap frequency and period
    mc.time_step(run_config.field)
    mc.boundary(run_config.field)
    for name in GRIDS.get(command, ()):
        getattr(run_config, name)
    return run_config
