"""Analytic differential light-shift models of the repumper.

Two-level: first order and exact (eigenvalue of the damped two-level
Hamiltonian). Three-level: steady-state excited population and the Raman
detuning that maximizes it. Moving atoms: the shift averaged over one
harmonic oscillation.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from workbench.constants import HBAR
from workbench.physics import LatticeParams, TrapOscillator, _as_output, rabi_from_saturation


@dataclass(frozen=True)
class TwoLevelModel:
    gamma: float  # rad/s, half-linewidth
    saturation_s: float

    def __post_init__(self) -> None:
        if self.gamma <= 0 or self.saturation_s < 0:
            msg = f"TwoLevelModel needs gamma > 0 and s >= 0, got {self}"
            raise ValueError(msg)


@dataclass(frozen=True)
class ThreeLevelModel:
    repump_rabi_omega: float  # Ω
    raman_rabi: float  # Ω̃
    atomic_linewidth_Gamma: float  # Γ = 2(γ1 + γ2)
    repump_efficiency_alpha: float = 0.5  # α = γ2/(γ1 + γ2)

    def __post_init__(self) -> None:
        if self.atomic_linewidth_Gamma <= 0:
            msg = f"Atomic linewidth must be > 0, got {self.atomic_linewidth_Gamma}"
            raise ValueError(msg)
        if not 0 < self.repump_efficiency_alpha <= 1:
            msg = f"Repump efficiency must lie in (0, 1], got {self.repump_efficiency_alpha}"
            raise ValueError(msg)
        if (
            self.repump_rabi_omega >= 0.5 * self.atomic_linewidth_Gamma
            or self.raman_rabi >= 0.5 * self.repump_rabi_omega
        ):
            warnings.warn(
                f"Three-level model outside Γ >> Ω >> Ω̃: Γ={self.atomic_linewidth_Gamma:.4g}, "
                f"Ω={self.repump_rabi_omega:.4g}, Ω̃={self.raman_rabi:.4g} rad/s",
                UserWarning,
                stacklevel=2,
            )

    @classmethod
    def from_two_level(
        cls, model: TwoLevelModel, raman_rabi: float, repump_efficiency_alpha: float = 0.5
    ) -> "ThreeLevelModel":
        """Three-level model sharing Ω and Γ = 2γ with a two-level model."""
        return cls(
            repump_rabi_omega=rabi_from_saturation(model.saturation_s, model.gamma),
            raman_rabi=raman_rabi,
            atomic_linewidth_Gamma=2.0 * model.gamma,
            repump_efficiency_alpha=repump_efficiency_alpha,
        )


@dataclass(frozen=True)
class OscillatingAtom:
    kinetic_energy: float  # J, energy of the harmonic oscillation
    trap: TrapOscillator
    lattice: LatticeParams

    def __post_init__(self) -> None:
        if self.kinetic_energy < 0:
            msg = f"Kinetic energy must be >= 0, got {self.kinetic_energy}"
            raise ValueError(msg)

    @property
    def amplitude(self) -> float:
        """Turning point sqrt(2 E_k / (m ν²))."""
        return float(np.sqrt(2.0 * self.kinetic_energy / (self.trap.mass * self.trap.nu**2)))

    def position(self, t: float | np.ndarray) -> float | np.ndarray:
        """x(t) = amplitude·sin(νt)."""
        return _as_output(self.amplitude * np.sin(self.trap.nu * np.asarray(t)))


def shift_linear(model: TwoLevelModel, delta: float | np.ndarray) -> float | np.ndarray:
    """First-order shift (Δ/2)·γ²/(Δ² + γ²)·s.

    Examples:
    ========
        >>> shift_linear(TwoLevelModel(gamma=1.0, saturation_s=0.4), 1.0)
        0.1

    """
    delta = np.asarray(delta, dtype=float)
    gamma = model.gamma
    return _as_output(0.5 * delta * gamma**2 / (delta**2 + gamma**2) * model.saturation_s)


def shift_exact(model: TwoLevelModel, delta: float | np.ndarray) -> float | np.ndarray:
    """Real part of the ground-state eigenvalue of the damped two-level system.

    The square root is taken on the branch with positive imaginary part,
    which is the one continuous with the uncoupled limit s -> 0. At Δ = 0 and
    s > 1/2 the two branches meet; the midpoint 0 is returned there.
    """
    delta = np.asarray(delta, dtype=float)
    gamma = model.gamma
    radicand = (2.0 * model.saturation_s - 1.0) * gamma**2 + delta**2 + 2j * gamma * delta
    root = np.sqrt(radicand.astype(complex))
    root = np.where(root.imag < 0, -root, root)
    shift = 0.5 * np.real(-delta - 1j * gamma + root)
    return _as_output(np.where(delta == 0, 0.0, shift))


def scattering_rate(model: TwoLevelModel, delta: float | np.ndarray) -> float | np.ndarray:
    """Steady-state photon scattering rate γ·s / (1 + s + (Δ/γ)²)."""
    delta = np.asarray(delta, dtype=float)
    s = model.saturation_s
    return _as_output(model.gamma * s / (1.0 + s + (delta / model.gamma) ** 2))


def noise_broadened_shift(
    model: TwoLevelModel, delta: float | np.ndarray, sigma: float, n_nodes: int = 64
) -> float | np.ndarray:
    """Exact shift averaged over Gaussian repumper frequency jitter of rms sigma."""
    if sigma < 0:
        msg = f"Frequency jitter must be >= 0, got {sigma}"
        raise ValueError(msg)
    if sigma == 0:
        return shift_exact(model, delta)
    nodes, weights = np.polynomial.hermite_e.hermegauss(n_nodes)
    delta = np.asarray(delta, dtype=float)
    shifted = np.asarray(shift_exact(model, np.add.outer(delta, sigma * nodes)))
    return _as_output(shifted @ weights / np.sqrt(2.0 * np.pi))


def rho_ee_steady(
    model: ThreeLevelModel, delta_big: float | np.ndarray, delta_prime: float | np.ndarray
) -> float | np.ndarray:
    """Steady-state excited population of the Raman + repumper three-level system.

    Examples:
    ========
        >>> model = ThreeLevelModel(0.2, 0.0, 1.0, 1.0)
        >>> rho_ee_steady(model, 0.3, 0.1)
        0.0

    """
    delta_big = np.asarray(delta_big, dtype=float)
    delta_prime = np.asarray(delta_prime, dtype=float)
    omega = model.repump_rabi_omega
    raman = model.raman_rabi
    big_gamma = model.atomic_linewidth_Gamma
    alpha = model.repump_efficiency_alpha
    delta_tilde = delta_big - delta_prime
    numerator = omega**2 * raman**2
    denominator = (
        2.0 * raman**2 * (big_gamma**2 + 4.0 * delta_big**2)
        + 4.0 * alpha * delta_prime**2 * big_gamma**2
        + alpha * (omega**2 + 4.0 * delta_prime * delta_tilde) ** 2
    )
    return _as_output(numerator / denominator)


def _optimal_delta_prime(model: ThreeLevelModel, delta_big: float) -> float:
    big_gamma = model.atomic_linewidth_Gamma
    d = delta_big / big_gamma
    w = model.repump_rabi_omega / big_gamma
    # cubic in u = δ'/Γ
    cubic = np.array([1.0, -1.5 * d, d**2 / 2.0 - w**2 / 4.0 + 0.125, d * w**2 / 8.0])
    slope = np.polyder(cubic)
    roots = np.roots(cubic)
    size = max(1.0, float(np.abs(roots).max()))
    candidates = roots.real[np.abs(roots.imag) <= 1e-6 * size]
    if candidates.size == 0:
        candidates = roots.real[[np.argmin(np.abs(roots.imag))]]
    polished = []
    for u in candidates:
        for _ in range(3):
            derivative = np.polyval(slope, u)
            if derivative == 0:
                break
            u = u - np.polyval(cubic, u) / derivative
        polished.append(u)
    delta_prime = np.array(polished) * big_gamma
    # argmax of ρ_ee is the argmin of its δ'-dependent denominator part
    alpha = model.repump_efficiency_alpha
    omega = model.repump_rabi_omega
    penalty = 4.0 * alpha * delta_prime**2 * big_gamma**2 + alpha * (
        omega**2 + 4.0 * delta_prime * (delta_big - delta_prime)
    ) ** 2
    return float(delta_prime[np.argmin(penalty)])


def optimal_delta_prime(
    model: ThreeLevelModel, delta_big: float | np.ndarray
) -> float | np.ndarray:
    """Raman detuning δ'm maximizing the excited population at repumper detuning Δ.

    Real roots of the stationarity cubic are found as companion-matrix
    eigenvalues, polished by Newton steps, and the one with the largest ρ_ee
    is returned.

    Examples:
    ========
        >>> optimal_delta_prime(ThreeLevelModel(0.2, 0.01, 1.0), 0.0)
        0.0

    """
    deltas = np.asarray(delta_big, dtype=float)
    values = np.array([_optimal_delta_prime(model, d) for d in deltas.ravel()])
    return _as_output(values.reshape(deltas.shape))


def three_level_shift(
    model: ThreeLevelModel, delta_big: float | np.ndarray
) -> float | np.ndarray:
    """Light shift read off the three-level resonance, -δ'm(Δ).

    The population maximum sits at minus the ground-state shift, so the sign
    is flipped to compare with the two-level curves.
    """
    return _as_output(-np.asarray(optimal_delta_prime(model, delta_big)))


def position_detuning(
    atom_x: float | np.ndarray,
    delta: float | np.ndarray,
    trap: TrapOscillator,
    lattice: LatticeParams,
) -> float | np.ndarray:
    """Harmonic position-dependent detuning Δ + m ν² x² (1 - χ) / (2ħ)."""
    x = np.asarray(atom_x, dtype=float)
    return _as_output(
        np.asarray(delta, dtype=float)
        + trap.mass * trap.nu**2 * x**2 * (1.0 - lattice.chi) / (2.0 * HBAR)
    )


def oscillation_averaged_shift(
    model: TwoLevelModel, delta: float | np.ndarray, atom: OscillatingAtom
) -> float | np.ndarray:
    """First-order shift averaged over one oscillation period, closed form.

    δ̄ = -(γ²s/2)·Re[w^(-1/2)], w = (Δ² - γ² - Δξ) + iγ(2Δ - ξ), with
    ξ = -(1 - χ)E_k/ħ the detuning excursion at the turning point. The root
    is the one continuous with E_k = 0, where δ̄ reduces to shift_linear.
    """
    delta = np.asarray(delta, dtype=float)
    gamma = model.gamma
    xi = -(1.0 - atom.lattice.chi) * atom.kinetic_energy / HBAR
    w = (delta**2 - gamma**2 - delta * xi) + 1j * gamma * (2.0 * delta - xi)
    root = np.sqrt(w)
    root = np.where(root.imag > 0, -root, root)
    return _as_output(-0.5 * gamma**2 * np.real(1.0 / root) * model.saturation_s)


def oscillation_averaged_shift_numeric(
    model: TwoLevelModel,
    delta: float | np.ndarray,
    atom: OscillatingAtom,
    n_steps: int = 10_000,
) -> float | np.ndarray:
    """Midpoint time average of shift_linear(Δ(x(t))) over one period."""
    phase = 2.0 * np.pi * (np.arange(n_steps) + 0.5) / n_steps
    x = atom.amplitude * np.sin(phase)
    excursion = np.asarray(position_detuning(x, 0.0, atom.trap, atom.lattice))
    detunings = np.add.outer(np.asarray(delta, dtype=float), excursion)
    return _as_output(np.asarray(shift_linear(model, detunings)).mean(axis=-1))
