"""Ensemble Monte Carlo of repumper scattering in dressed-state potentials.

Each atom runs on its own random stream spawned from the master seed and the
per-atom loop is compiled (`workbench.kernels.run_atom`), so ensembles and map
cells can fan out over threads without changing a single number.
"""

import dataclasses
import json
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd
from tqdm import tqdm

from workbench import kernels
from workbench.dressed import DressedField, MCConfig, init_atom
from workbench.fitting import exponential_fit, linear_fit
from workbench.physics import RepumperField
from workbench.utils import cell_seed, kernel_seed

RATE_MAP_COLUMNS = [
    "s",
    "detuning_hz",
    "loss_rate_per_s",
    "loss_rate_err",
    "scatter_rate_per_s",
    "scatter_rate_err",
    "n_atoms",
    "n_lost",
]
DIAGNOSTIC_COLUMNS = [
    "s",
    "detuning_hz",
    "kinetic_energy_rate_per_s",
    "survival_at_t_max",
    "loss_rate_lower_bound",
    "bound_violations",
]


@dataclass(frozen=True)
class AtomRun:
    event_times: np.ndarray
    escape_time: float | None  # None when censored at t_max
    kinetic_energy: np.ndarray  # J at the sample times, NaN after escape
    photons: np.ndarray  # cumulative count at the sample times
    n_changes: int
    n_bound_violations: int

    @property
    def lost(self) -> bool:
        return self.escape_time is not None


@dataclass(frozen=True)
class EnsembleResult:
    event_atoms: np.ndarray
    event_times: np.ndarray
    times: np.ndarray
    survival: np.ndarray
    kinetic_energy: np.ndarray  # mean over survivors, NaN once all are gone
    photons_per_atom: np.ndarray  # mean cumulative photons per surviving atom
    loss_rate: float
    loss_rate_err: float
    scatter_rate: float
    scatter_rate_err: float
    n_atoms: int
    n_lost: int
    loss_rate_lower_bound: bool
    diagnostics: dict = dataclasses.field(default_factory=dict)

    @property
    def photon_events(self) -> list[tuple[int, float]]:
        return list(zip(self.event_atoms.tolist(), self.event_times.tolist()))

    @property
    def survival_curve(self) -> tuple[np.ndarray, np.ndarray]:
        return self.times, self.survival

    @property
    def kinetic_energy_curve(self) -> tuple[np.ndarray, np.ndarray]:
        return self.times, self.kinetic_energy


def sample_times(cfg: MCConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.t_max, cfg.n_samples)


def run_atom(
    cfg: MCConfig,
    field: DressedField,
    rng: np.random.Generator,
    times: np.ndarray | None = None,
) -> AtomRun:
    """Initialize one atom and run the compiled scatter-and-move loop to escape or t_max."""
    times = sample_times(cfg) if times is None else np.asarray(times, dtype=float)
    state = init_atom(cfg, field, rng)
    events, escape_time, kinetic, photons, n_changes, n_violations = kernels.run_atom(
        state.x,
        state.p,
        int(state.branch),
        field.kernel_params(cfg.boundary(field)),
        cfg.t_max,
        cfg.time_step(field),
        times,
        kernel_seed(rng),
        cfg.double_kick,
    )
    return AtomRun(
        event_times=events,
        escape_time=None if escape_time < 0 else float(escape_time),
        kinetic_energy=kinetic,
        photons=photons,
        n_changes=int(n_changes),
        n_bound_violations=int(n_violations),
    )


def _loss_rate(times: np.ndarray, survival: np.ndarray, n_atoms: int, n_lost: int):
    if n_lost == 0:
        return 0.0, 0.0, False
    if survival[1] == 0:
        # everything gone by the first sample: only a lower bound is measurable
        rate = math.log(max(n_atoms, 2)) / times[1]
        return rate, rate / math.sqrt(n_lost), True
    mask = survival > 0
    if mask.sum() < 3:
        rate = -math.log(survival[mask][-1]) / times[mask][-1]
    else:
        rate = -exponential_fit(times[mask], survival[mask]).rate
    rate = max(rate, 0.0)
    return rate, rate / math.sqrt(n_lost), False


def summarize_ensemble(runs: Sequence[AtomRun], times: np.ndarray) -> EnsembleResult:
    """Survival, photon and energy curves plus the fitted loss and scatter rates."""
    n_atoms = len(runs)
    t_max = float(times[-1])
    escape = np.array([run.escape_time if run.lost else math.inf for run in runs])
    alive = escape[None, :] > times[:, None]
    survival = alive.mean(axis=1)
    n_lost = int(np.isfinite(escape).sum())

    event_atoms = np.concatenate(
        [np.full(run.event_times.size, i, dtype=np.int64) for i, run in enumerate(runs)]
    )
    event_times = np.concatenate([run.event_times for run in runs])

    # photons per surviving atom, accumulated bin by bin
    counts, _ = np.histogram(event_times, bins=times)
    alive_at_start = alive[:-1].sum(axis=1)
    per_atom = np.divide(
        counts, alive_at_start, out=np.zeros(counts.size), where=alive_at_start > 0
    )
    photons_per_atom = np.concatenate([[0.0], np.cumsum(per_atom)])
    n_valid = int(np.argmin(alive_at_start > 0)) if np.any(alive_at_start == 0) else counts.size
    if n_valid >= 1 and event_times.size:
        line = linear_fit(times[: n_valid + 1], photons_per_atom[: n_valid + 1])
        scatter_rate, slope_stderr = max(line.slope, 0.0), line.stderr_slope
    else:
        scatter_rate, slope_stderr = 0.0, 0.0
    exposure = np.minimum(escape, t_max)
    atom_rates = np.array([run.event_times.size for run in runs]) / exposure
    scatter_rate_err = float(atom_rates.std(ddof=1) / math.sqrt(n_atoms)) if n_atoms > 1 else 0.0

    kinetic = np.array([run.kinetic_energy for run in runs]).T
    with np.errstate(invalid="ignore"):
        kinetic_sum = np.where(alive, kinetic, 0.0).sum(axis=1)
        n_alive = alive.sum(axis=1)
        kinetic_mean = np.where(n_alive > 0, kinetic_sum / np.maximum(n_alive, 1), np.nan)
    usable = np.isfinite(kinetic_mean) & (kinetic_mean > 0)
    kinetic_rate = (
        exponential_fit(times[usable], kinetic_mean[usable]).rate if usable.sum() >= 3 else math.nan
    )

    loss_rate, loss_rate_err, lower_bound = _loss_rate(times, survival, n_atoms, n_lost)
    diagnostics = {
        "kinetic_energy_rate_per_s": float(kinetic_rate),
        "scatter_slope_stderr": float(slope_stderr),
        "survival_at_t_max": float(survival[-1]),
        "bound_violations": int(sum(run.n_bound_violations for run in runs)),
        "branch_changes": int(sum(run.n_changes for run in runs)),
    }
    return EnsembleResult(
        event_atoms=event_atoms,
        event_times=event_times,
        times=times,
        survival=survival,
        kinetic_energy=kinetic_mean,
        photons_per_atom=photons_per_atom,
        loss_rate=float(loss_rate),
        loss_rate_err=float(loss_rate_err),
        scatter_rate=float(scatter_rate),
        scatter_rate_err=scatter_rate_err,
        n_atoms=n_atoms,
        n_lost=n_lost,
        loss_rate_lower_bound=lower_bound,
        diagnostics=diagnostics,
    )


def run_ensemble(
    cfg: MCConfig, field: DressedField, n_workers: int = 1, progress: bool = False
) -> EnsembleResult:
    """Run cfg.ensemble_n independent atoms; per-atom streams are spawned from cfg.seed."""
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.ensemble_n)
    times = sample_times(cfg)

    def work(i: int) -> AtomRun:
        return run_atom(cfg, field, np.random.default_rng(streams[i]), times)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as executor:
            runs = list(
                tqdm(
                    executor.map(work, range(cfg.ensemble_n)),
                    total=cfg.ensemble_n,
                    desc="atoms",
                    disable=not progress,
                )
            )
    else:
        runs = [work(i) for i in tqdm(range(cfg.ensemble_n), desc="atoms", disable=not progress)]
    return summarize_ensemble(runs, times)


@dataclass(frozen=True)
class CellSummary:
    s: float
    detuning_hz: float
    loss_rate_per_s: float
    loss_rate_err: float
    scatter_rate_per_s: float
    scatter_rate_err: float
    n_atoms: int
    n_lost: int
    kinetic_energy_rate_per_s: float
    survival_at_t_max: float
    loss_rate_lower_bound: bool
    bound_violations: int

    @classmethod
    def from_ensemble(cls, s: float, detuning_hz: float, result: EnsembleResult) -> "CellSummary":
        return cls(
            s=float(s),
            detuning_hz=float(detuning_hz),
            loss_rate_per_s=result.loss_rate,
            loss_rate_err=result.loss_rate_err,
            scatter_rate_per_s=result.scatter_rate,
            scatter_rate_err=result.scatter_rate_err,
            n_atoms=result.n_atoms,
            n_lost=result.n_lost,
            kinetic_energy_rate_per_s=result.diagnostics["kinetic_energy_rate_per_s"],
            survival_at_t_max=result.diagnostics["survival_at_t_max"],
            loss_rate_lower_bound=result.loss_rate_lower_bound,
            bound_violations=result.diagnostics["bound_violations"],
        )


@dataclass(frozen=True)
class RateMap:
    """Cells on the sorted (s, Δ̃) grid, s-major; detuning_grid in rad/s."""

    s_grid: np.ndarray
    detuning_grid: np.ndarray
    cells: tuple[CellSummary, ...]
    metadata: dict = dataclasses.field(default_factory=dict)

    def _grid(self, name: str) -> np.ndarray:
        values = np.array([getattr(cell, name) for cell in self.cells], dtype=float)
        return values.reshape(self.s_grid.size, self.detuning_grid.size)

    @property
    def loss_rate(self) -> np.ndarray:
        return self._grid("loss_rate_per_s")

    @property
    def scatter_rate(self) -> np.ndarray:
        return self._grid("scatter_rate_per_s")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(cell) for cell in self.cells], columns=RATE_MAP_COLUMNS)

    def diagnostics_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(cell) for cell in self.cells], columns=DIAGNOSTIC_COLUMNS)


def canonical_grid(values: Sequence[float], name: str) -> np.ndarray:
    grid = np.sort(np.asarray(values, dtype=float).ravel())
    if grid.size == 0:
        msg = f"{name} grid must not be empty"
        raise ValueError(msg)
    return grid


def cell_field(template: DressedField, saturation_s: float, detuning_free_space: float) -> DressedField:
    """Template field re-driven at (s, Δ̃) with the template's trap shift kept."""
    trap_shift = template.repumper.detuning_free_space - template.repumper.detuning_at_bottom
    repumper = RepumperField.create(
        template.atom,
        template.lattice,
        detuning_free_space=detuning_free_space,
        saturation_s=saturation_s,
        trap_shift=trap_shift,
    )
    return replace(template, repumper=repumper)


def _checkpoint_path(directory: Path, i: int, j: int) -> Path:
    return directory / f"cell_{i}_{j}.json"


def sweep_map(
    cfg: MCConfig,
    field: DressedField,
    s_grid: Sequence[float],
    detuning_grid: Sequence[float],
    n_workers: int = 1,
    checkpoint_dir: Path | None = None,
    resume: bool = False,
    progress: bool = False,
    on_cell: Callable[[int, int, CellSummary], None] | None = None,
) -> RateMap:
    """One independent ensemble per cell of the sorted (s, Δ̃) grid.

    The seed of cell (i, j) depends only on cfg.seed and its indices in the
    sorted grids. With a checkpoint directory every finished cell is written
    as JSON; with resume, cells already on disk are loaded instead of rerun.
    """
    s_values = canonical_grid(s_grid, "saturation")
    d_values = canonical_grid(detuning_grid, "detuning")
    results: dict[tuple[int, int], CellSummary] = {}
    pending = []
    for i, s in enumerate(s_values):
        for j, d in enumerate(d_values):
            path = None if checkpoint_dir is None else _checkpoint_path(checkpoint_dir, i, j)
            if resume and path is not None and path.exists():
                results[i, j] = CellSummary(**json.loads(path.read_text()))
            else:
                pending.append((i, j, float(s), float(d)))
    if checkpoint_dir is not None:
        checkpoint_dir.mkdir(parents=True, exist_ok=True)

    def work(i: int, j: int, s: float, d: float) -> CellSummary:
        cell_cfg = replace(cfg, seed=cell_seed(cfg.seed, i, j))
        ensemble = run_ensemble(cell_cfg, cell_field(field, s, d))
        return CellSummary.from_ensemble(s, d / (2.0 * np.pi), ensemble)

    with ThreadPoolExecutor(max_workers=max(1, n_workers)) as executor:
        futures = {executor.submit(work, *cell): cell[:2] for cell in pending}
        for future in tqdm(as_completed(futures), total=len(futures), desc="cells", disable=not progress):
            i, j = futures[future]
            summary = future.result()
            results[i, j] = summary
            if checkpoint_dir is not None:
                _checkpoint_path(checkpoint_dir, i, j).write_text(json.dumps(asdict(summary)))
            if on_cell is not None:
                on_cell(i, j, summary)

    cells = tuple(results[i, j] for i in range(s_values.size) for j in range(d_values.size))
    metadata = {
        "seed": cfg.seed,
        "s_grid": s_values.tolist(),
        "detuning_grid_hz": (d_values / (2.0 * np.pi)).tolist(),
        "ensemble_n": cfg.ensemble_n,
        "t_max_s": cfg.t_max,
        "recoil_mode": cfg.recoil_mode,
    }
    return RateMap(s_grid=s_values, detuning_grid=d_values, cells=cells, metadata=metadata)
