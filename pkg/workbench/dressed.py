"""Dressed-state potentials, rates and the per-atom Monte Carlo steps.

The vectorized functions here mirror the compiled scalars of
`workbench.kernels`; the per-atom steps call into them so that a loop built
from `init_atom`, `sample_event`, `step_motion` and `apply_scatter` follows
the same physics as the compiled `run_atom`.
"""

import math
from dataclasses import dataclass, replace
from enum import IntEnum
from functools import cached_property

import numpy as np

from workbench import config, kernels
from workbench.constants import BOLTZMANN, HBAR
from workbench.physics import (
    AtomSpecies,
    LatticeParams,
    RepumperField,
    TrapOscillator,
    _as_output,
)

BIRTH_ENERGY_CAP = 0.95  # initial energies above this fraction of U0 are redrawn
RECOIL_MODES = ("single", "double")


class Branch(IntEnum):
    MINUS = -1
    PLUS = 1


class Channel(IntEnum):
    STAY = kernels.STAY
    CHANGE = kernels.CHANGE


@dataclass(frozen=True)
class DressedField:
    lattice: LatticeParams
    repumper: RepumperField
    atom: AtomSpecies

    @property
    def rabi(self) -> float:
        return self.repumper.rabi_omega

    @property
    def linewidth(self) -> float:
        """Full atomic linewidth Γ."""
        return self.atom.linewidth

    @cached_property
    def trap(self) -> TrapOscillator:
        return TrapOscillator.from_lattice(self.lattice, self.atom.mass)

    @cached_property
    def params(self) -> np.ndarray:
        """Parameter vector of the compiled kernels, escape bound at a/2."""
        prm = np.empty(kernels.N_PARAMS)
        prm[kernels.DEPTH] = self.lattice.depth_U0
        prm[kernels.WAVENUMBER] = self.lattice.wavenumber
        prm[kernels.CHI] = self.lattice.chi
        prm[kernels.DETUNING_BOTTOM] = self.repumper.detuning_at_bottom
        prm[kernels.RABI] = self.repumper.rabi_omega
        prm[kernels.LINEWIDTH] = self.linewidth
        prm[kernels.HBAR] = HBAR
        prm[kernels.MASS] = self.atom.mass
        prm[kernels.RECOIL] = self.atom.recoil_momentum
        prm[kernels.BOUNDARY] = 0.5 * self.lattice.period_a
        return prm

    def kernel_params(self, boundary_x: float | None = None) -> np.ndarray:
        if boundary_x is None:
            return self.params
        prm = self.params.copy()
        prm[kernels.BOUNDARY] = boundary_x
        return prm

    def detuning(self, x: float | np.ndarray) -> float | np.ndarray:
        """Local detuning Δ(x) = Δ + (1 - χ)(U_g(x) + U0)/ħ."""
        ug = np.asarray(self.lattice.ground_potential(x))
        return _as_output(
            self.repumper.detuning_at_bottom
            + (1.0 - self.lattice.chi) * (ug + self.lattice.depth_U0) / HBAR
        )


@dataclass(frozen=True)
class MCConfig:
    t_max: float = config.MC_TIME_LIMIT_S
    dt_max: float | None = None  # None uses 1/(50 ν)
    boundary_x: float | None = None  # None uses a/2
    ensemble_n: int = config.MC_ENSEMBLE_SIZE
    seed: int = config.SEED
    init_temperature: float = config.MC_TEMPERATURE_UK * 1e-6
    n_samples: int = config.MC_SAMPLES
    recoil_mode: str = config.MC_RECOIL_MODE

    def __post_init__(self) -> None:
        if self.t_max <= 0:
            msg = f"Simulation horizon must be > 0, got {self.t_max}"
            raise ValueError(msg)
        if self.ensemble_n < 1:
            msg = f"Ensemble size must be >= 1, got {self.ensemble_n}"
            raise ValueError(msg)
        if self.seed < 0:
            msg = f"Seed must be a non-negative integer, got {self.seed}"
            raise ValueError(msg)
        if self.init_temperature < 0:
            msg = f"Initial temperature must be >= 0, got {self.init_temperature}"
            raise ValueError(msg)
        if self.n_samples < 2:
            msg = f"Need at least 2 sample times, got {self.n_samples}"
            raise ValueError(msg)
        if self.recoil_mode not in RECOIL_MODES:
            msg = f"Recoil mode must be one of {RECOIL_MODES}, got {self.recoil_mode!r}"
            raise ValueError(msg)

    def time_step(self, field: DressedField) -> float:
        """Integrator cap, at most 1/(50 ν)."""
        limit = 1.0 / (50.0 * field.trap.nu)
        if self.dt_max is None:
            return limit
        if not 0 < self.dt_max <= limit * (1.0 + 1e-12):
            msg = f"dt_max must lie in (0, 1/(50 ν)] = (0, {limit:.4g}] s, got {self.dt_max}"
            raise ValueError(msg)
        return self.dt_max

    def boundary(self, field: DressedField) -> float:
        """Escape bound, at most half a lattice period."""
        half = 0.5 * field.lattice.period_a
        if self.boundary_x is None:
            return half
        if not 0 < self.boundary_x <= half * (1.0 + 1e-12):
            msg = f"boundary_x must lie in (0, a/2] = (0, {half:.4g}] m, got {self.boundary_x}"
            raise ValueError(msg)
        return self.boundary_x

    @property
    def double_kick(self) -> bool:
        return self.recoil_mode == "double"


@dataclass(frozen=True)
class AtomTrajectoryState:
    x: float
    p: float
    branch: Branch
    t: float = 0.0
    photons: int = 0
    alive: bool = True


@dataclass(frozen=True)
class ScatterCandidate:
    tau: float  # s until the candidate event, inf if no channel can fire
    channel: Channel
    rate_max: float


def dressed_potentials(
    field: DressedField, x: float | np.ndarray
) -> tuple[float | np.ndarray, float | np.ndarray]:
    """(U_minus, U_plus) = U_g + (ħ/2)(-Δ(x) ∓ sqrt(Δ(x)² + Ω²))."""
    ug = np.asarray(field.lattice.ground_potential(x))
    delta = np.asarray(field.detuning(x))
    root = np.sqrt(delta**2 + field.rabi**2)
    u_minus = ug + 0.5 * HBAR * (-delta - root)
    u_plus = ug + 0.5 * HBAR * (-delta + root)
    return _as_output(u_minus), _as_output(u_plus)


def mixing_angle(field: DressedField, x: float | np.ndarray) -> float | np.ndarray:
    """θ(x) in [0, π/2], π/4 on resonance, π/2 for Δ > 0 as Ω -> 0.

    Examples:
    ========
        >>> from workbench.physics import rb87, lattice_from_wavelength
        >>> lattice = lattice_from_wavelength(868e-9, 1e-29, 0.0)
        >>> repumper = RepumperField(0.1, 1e6, 0.0, 0.0)
        >>> round(mixing_angle(DressedField(lattice, repumper, rb87()), 0.0), 12)
        0.785398163397

    """
    delta = np.asarray(field.detuning(x))
    return _as_output(0.5 * np.arctan2(field.rabi, -delta))


def transition_rates(
    field: DressedField, x: float | np.ndarray
) -> tuple[float | np.ndarray, ...]:
    """(Γ--, Γ-+, Γ++, Γ+-): stay and change rates from |-> then from |+>.

    With no drive all four rates vanish.
    """
    theta = np.asarray(mixing_angle(field, x))
    full = field.linewidth if field.rabi > 0 else 0.0
    sin2 = np.sin(theta) ** 2
    cos2 = np.cos(theta) ** 2
    stay = full * sin2 * cos2
    return (
        _as_output(stay),
        _as_output(full * sin2**2),
        _as_output(stay.copy()),
        _as_output(full * cos2**2),
    )


def dressed_force(field: DressedField, x: float | np.ndarray, branch: Branch) -> float | np.ndarray:
    """-dU_branch/dx."""
    k = field.lattice.wavenumber
    xs = np.asarray(x, dtype=float)
    slope = field.lattice.depth_U0 * k * np.sin(2.0 * k * xs)
    delta = np.asarray(field.detuning(xs))
    root = np.sqrt(delta**2 + field.rabi**2)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(root > 0, delta / root, 0.0)
    chi = field.lattice.chi
    return _as_output(-slope * (1.0 + 0.5 * (1.0 - chi) * (-1.0 + int(branch) * ratio)))


def assign_branch(field: DressedField, x: float, rng: np.random.Generator) -> Branch:
    """Coin flip with P(minus) = cos²θ(x)."""
    p_minus = math.cos(mixing_angle(field, x)) ** 2
    return Branch.MINUS if rng.random() < p_minus else Branch.PLUS


def draw_initial_energy(temperature: float, depth: float, rng: np.random.Generator) -> float:
    """1D Boltzmann energy with mean kB·T, redrawn above 0.95·U0."""
    mean = BOLTZMANN * temperature
    if mean == 0:
        return 0.0
    while True:
        energy = float(rng.exponential(mean))
        if energy <= BIRTH_ENERGY_CAP * depth:
            return energy


def init_atom(cfg: MCConfig, field: DressedField, rng: np.random.Generator) -> AtomTrajectoryState:
    """Thermal start: launch from x = 0, evolve in U_g for a random fraction of a period."""
    energy = draw_initial_energy(cfg.init_temperature, field.lattice.depth_U0, rng)
    p0 = math.sqrt(2.0 * field.atom.mass * energy)
    duration = float(rng.random()) * field.trap.period
    x, p = kernels.evolve(0.0, p0, kernels.BARE, field.params, duration, cfg.time_step(field))
    return AtomTrajectoryState(x=float(x), p=float(p), branch=assign_branch(field, x, rng))


def step_motion(state: AtomTrajectoryState, field: DressedField, dt: float) -> AtomTrajectoryState:
    """One velocity-Verlet step in the potential of the occupied branch."""
    if not state.alive:
        return state
    x, p = kernels.verlet_step(state.x, state.p, int(state.branch), field.params, dt)
    return replace(state, x=float(x), p=float(p), t=state.t + dt)


def sample_event(
    state: AtomTrajectoryState,
    field: DressedField,
    rng: np.random.Generator,
    boundary_x: float | None = None,
) -> ScatterCandidate:
    """Earliest of two exponential draws at the channel rate bounds."""
    stay_max, change_max = kernels.rate_bounds(
        state.x, state.p, int(state.branch), field.kernel_params(boundary_x)
    )
    tau_stay = rng.exponential(1.0 / stay_max) if stay_max > 0 else math.inf
    tau_change = rng.exponential(1.0 / change_max) if change_max > 0 else math.inf
    if tau_change < tau_stay:
        return ScatterCandidate(float(tau_change), Channel.CHANGE, change_max)
    return ScatterCandidate(float(tau_stay), Channel.STAY, stay_max)


def acceptance_probability(
    candidate: ScatterCandidate, state: AtomTrajectoryState, field: DressedField
) -> float:
    """R(x)/R_max of the candidate's channel at the current position."""
    if not math.isfinite(candidate.tau) or candidate.rate_max <= 0:
        return 0.0
    stay, change = kernels.channel_rates(state.x, int(state.branch), field.params)
    rate = stay if candidate.channel == Channel.STAY else change
    return min(1.0, rate / candidate.rate_max)


def apply_scatter(
    state: AtomTrajectoryState,
    field: DressedField,
    rng: np.random.Generator,
    event: ScatterCandidate,
    double_kick: bool = False,
) -> AtomTrajectoryState:
    """Count the photon, flip the branch on a change event and add the recoil."""
    if not state.alive:
        return state
    recoil = field.atom.recoil_momentum
    kick = recoil if rng.random() < 0.5 else -recoil
    if double_kick:
        kick += recoil
    branch = Branch(-state.branch) if event.channel == Channel.CHANGE else state.branch
    return replace(state, p=state.p + kick, branch=branch, photons=state.photons + 1)
