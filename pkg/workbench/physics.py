"""Parameter types and the derived quantities every model consumes.

All angular frequencies are in rad/s and energies in J. Conversion from the
file units of `workbench.config` happens in `workbench.dataset`.
"""

from dataclasses import dataclass

import numpy as np

from workbench.constants import (
    HBAR,
    PLANCK,
    RB87_D1_LINEWIDTH,
    RB87_D1_WAVELENGTH,
    RB87_MASS,
)


def _as_output(value: np.ndarray) -> float | np.ndarray:
    """Return python floats for 0-d results, arrays otherwise."""
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class AtomSpecies:
    """Atom driven by the repumper. `gamma` is the half-linewidth γ."""

    mass: float
    gamma: float
    repump_wavelength: float

    def __post_init__(self) -> None:
        if self.mass <= 0 or self.gamma <= 0 or self.repump_wavelength <= 0:
            msg = f"AtomSpecies needs positive mass, gamma and wavelength, got {self}"
            raise ValueError(msg)

    @property
    def recoil_momentum(self) -> float:
        """Photon momentum h/λ of the repumper."""
        return PLANCK / self.repump_wavelength

    @property
    def linewidth(self) -> float:
        """Full atomic linewidth Γ = 2γ."""
        return 2.0 * self.gamma


@dataclass(frozen=True)
class LatticeParams:
    """Standing-wave lattice U_g(x) = -U0 cos²(πx/a), U_e = χ U_g."""

    period_a: float
    depth_U0: float
    chi: float

    def __post_init__(self) -> None:
        if self.period_a <= 0 or self.depth_U0 <= 0:
            msg = f"LatticeParams needs positive period and depth, got {self}"
            raise ValueError(msg)
        if not np.isfinite(self.chi):
            msg = f"Polarizability ratio must be finite, got {self.chi}"
            raise ValueError(msg)

    @property
    def wavenumber(self) -> float:
        """π/a, the spatial frequency of cos(πx/a)."""
        return np.pi / self.period_a

    def ground_potential(self, x: float | np.ndarray) -> float | np.ndarray:
        """U_g(x)."""
        return _as_output(-self.depth_U0 * np.cos(self.wavenumber * np.asarray(x)) ** 2)

    def excited_potential(self, x: float | np.ndarray) -> float | np.ndarray:
        """U_e(x) = χ U_g(x)."""
        return _as_output(self.chi * np.asarray(self.ground_potential(x)))


@dataclass(frozen=True)
class RepumperField:
    """Repumper drive. Build it with `RepumperField.create` so s and Ω agree."""

    saturation_s: float
    rabi_omega: float
    detuning_free_space: float
    detuning_at_bottom: float
    gamma: float | None = None  # half linewidth s and Ω were converted with

    def __post_init__(self) -> None:
        if self.saturation_s < 0 or self.rabi_omega < 0:
            msg = f"Saturation and Rabi frequency must be >= 0, got {self}"
            raise ValueError(msg)
        if (self.saturation_s == 0) != (self.rabi_omega == 0):
            msg = f"Saturation and Rabi frequency must vanish together, got {self}"
            raise ValueError(msg)
        if self.gamma is not None and not np.isclose(
            self.rabi_omega, rabi_from_saturation(self.saturation_s, self.gamma), rtol=1e-9, atol=0.0
        ):
            msg = f"Rabi frequency {self.rabi_omega} does not match s = {self.saturation_s} at gamma = {self.gamma}"
            raise ValueError(msg)

    @classmethod
    def create(
        cls,
        species: AtomSpecies,
        lattice: LatticeParams,
        detuning_free_space: float,
        saturation_s: float | None = None,
        rabi_omega: float | None = None,
        trap_shift: float | None = None,
    ) -> "RepumperField":
        """Create a field from exactly one of (saturation_s, rabi_omega).

        trap_shift replaces the single-beam offset U0(1-χ)/ħ by a calibrated
        value when given.

        Examples:
        ========
            >>> species = AtomSpecies(mass=1.0, gamma=1.0, repump_wavelength=1.0)
            >>> lattice = LatticeParams(period_a=1.0, depth_U0=1.0, chi=1.0)
            >>> field = RepumperField.create(species, lattice, 0.0, saturation_s=0.5)
            >>> field.rabi_omega
            1.0
            >>> RepumperField.create(species, lattice, 0.0, rabi_omega=1.0).saturation_s
            0.5

        """
        if (saturation_s is None) == (rabi_omega is None):
            msg = "Exactly one of saturation_s and rabi_omega must be given"
            raise ValueError(msg)
        if saturation_s is not None:
            rabi_omega = rabi_from_saturation(saturation_s, species.gamma)
        else:
            saturation_s = saturation_from_rabi(rabi_omega, species.gamma)
        shift = trap_shift_of(lattice) if trap_shift is None else trap_shift
        return cls(
            saturation_s=float(saturation_s),
            rabi_omega=float(rabi_omega),
            detuning_free_space=float(detuning_free_space),
            detuning_at_bottom=float(detuning_free_space - shift),
            gamma=float(species.gamma),
        )


@dataclass(frozen=True)
class TrapOscillator:
    """Harmonic approximation of one lattice well."""

    nu: float
    mass: float

    def __post_init__(self) -> None:
        if self.nu <= 0 or self.mass <= 0:
            msg = f"TrapOscillator needs positive frequency and mass, got {self}"
            raise ValueError(msg)

    @classmethod
    def from_lattice(cls, lattice: LatticeParams, mass: float) -> "TrapOscillator":
        return cls(nu=trap_frequency_from_depth(lattice, mass), mass=mass)

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.nu


def rabi_from_saturation(saturation_s: float | np.ndarray, gamma: float) -> float | np.ndarray:
    """Rabi frequency Ω = 2γ sqrt(s/2) from s = 2(Ω/2γ)².

    Examples:
    ========
        >>> rabi_from_saturation(0.5, 1.0)
        1.0
        >>> rabi_from_saturation(0.0, 2.0)
        0.0

    """
    s = np.asarray(saturation_s, dtype=float)
    if np.any(s < 0):
        msg = f"Saturation parameter must be >= 0, got {saturation_s}"
        raise ValueError(msg)
    if gamma <= 0:
        msg = f"gamma must be > 0, got {gamma}"
        raise ValueError(msg)
    return _as_output(2.0 * gamma * np.sqrt(s / 2.0))


def saturation_from_rabi(rabi_omega: float | np.ndarray, gamma: float) -> float | np.ndarray:
    """Saturation parameter s = 2(Ω/2γ)²."""
    omega = np.asarray(rabi_omega, dtype=float)
    if np.any(omega < 0):
        msg = f"Rabi frequency must be >= 0, got {rabi_omega}"
        raise ValueError(msg)
    if gamma <= 0:
        msg = f"gamma must be > 0, got {gamma}"
        raise ValueError(msg)
    return _as_output(2.0 * (omega / (2.0 * gamma)) ** 2)


def trap_frequency_from_depth(lattice: LatticeParams, mass: float) -> float:
    """Curvature frequency ν = (π/a) sqrt(2 U0/m) of the well bottom."""
    return float(lattice.wavenumber * np.sqrt(2.0 * lattice.depth_U0 / mass))


def trap_shift_of(lattice: LatticeParams) -> float:
    """Single-beam shift U0(1-χ)/ħ of the resonance at the well bottom."""
    return lattice.depth_U0 * (1.0 - lattice.chi) / HBAR


def detuning_at_bottom(repumper: RepumperField, lattice: LatticeParams) -> float:
    """Detuning Δ = Δ̃ - U0(1-χ)/ħ from the trap-shifted resonance at x = 0."""
    return repumper.detuning_free_space - trap_shift_of(lattice)


def lattice_from_wavelength(wavelength: float, depth_U0: float, chi: float) -> LatticeParams:
    """Retro-reflected lattice: period is half the lattice wavelength."""
    return LatticeParams(period_a=wavelength / 2.0, depth_U0=depth_U0, chi=chi)


def rb87(
    gamma: float = RB87_D1_LINEWIDTH / 2.0,
    repump_wavelength: float = RB87_D1_WAVELENGTH,
) -> AtomSpecies:
    """⁸⁷Rb on the D1 repumper line."""
    return AtomSpecies(mass=RB87_MASS, gamma=gamma, repump_wavelength=repump_wavelength)
