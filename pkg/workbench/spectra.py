"""Raman sideband spectra: seven-Lorentzian fit and sideband-ratio thermometry.

Detunings and peak parameters are in Hz (two-photon detuning δ/2π). The
cooling sideband sits at δ = +ν, the heating sideband at δ = -ν.
"""

import math
import warnings
from collections.abc import Sequence
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, stats

from workbench import config
from workbench.constants import BOLTZMANN, HBAR
from workbench.fitting import LorentzianPeak, lorentzian_profile, multi_lorentzian_eval, nelder_mead

N_PEAKS = 7
MIN_POINTS = 15
MAX_RESTARTS = 20


@dataclass(frozen=True)
class RamanSpectrum:
    detuning: np.ndarray  # Hz
    transfer_probability: np.ndarray
    trials_per_point: int

    def __post_init__(self) -> None:
        detuning = np.asarray(self.detuning, dtype=float)
        probability = np.asarray(self.transfer_probability, dtype=float)
        if detuning.shape != probability.shape or detuning.ndim != 1:
            msg = f"Detuning and probability must be 1D of equal length, got {detuning.shape} and {probability.shape}"
            raise ValueError(msg)
        if np.any(np.diff(detuning) <= 0):
            msg = "Detuning must be strictly increasing"
            raise ValueError(msg)
        if np.any((probability < 0) | (probability > 1)):
            msg = "Transfer probabilities must lie in [0, 1]"
            raise ValueError(msg)
        if self.trials_per_point < 1:
            msg = f"trials_per_point must be >= 1, got {self.trials_per_point}"
            raise ValueError(msg)
        object.__setattr__(self, "detuning", detuning)
        object.__setattr__(self, "transfer_probability", probability)


@dataclass(frozen=True)
class SidebandFit:
    peaks: tuple[LorentzianPeak, ...]
    baseline: float
    residual: float = math.nan  # sum of squared residuals
    converged: bool = True
    n_evaluations: int = 0

    def __post_init__(self) -> None:
        if len(self.peaks) != N_PEAKS:
            msg = f"A sideband fit has {N_PEAKS} peaks, got {len(self.peaks)}"
            raise ValueError(msg)

    def evaluate(self, detuning: float | np.ndarray) -> float | np.ndarray:
        return multi_lorentzian_eval(self.peaks, self.baseline, detuning)

    def to_dict(self) -> dict:
        return {
            "peaks": [asdict(peak) for peak in self.peaks],
            "baseline": self.baseline,
            "residual": self.residual,
            "converged": self.converged,
            "n_evaluations": self.n_evaluations,
        }


@dataclass(frozen=True)
class SidebandPair:
    cooling: LorentzianPeak
    heating: LorentzianPeak

    @property
    def mismatch(self) -> float:
        """Relative difference of the two |center| values."""
        low, high = sorted((abs(self.cooling.center), abs(self.heating.center)))
        return (high - low) / high if high > 0 else 0.0


@dataclass(frozen=True)
class ThermometryResult:
    ratio_per_axis: tuple[float, ...]
    nbar_per_axis: tuple[float, ...]
    ground_fraction_per_axis: tuple[float, ...]
    temperature_per_axis: tuple[float, ...]  # K
    infinite_temperature: tuple[bool, ...]

    def to_dict(self) -> dict:
        return asdict(self)


def thermal_sideband_fit(
    nbar_per_axis: Sequence[float],
    nu_per_axis: Sequence[float] = config.SIDEBAND_FREQUENCIES_HZ,
    fwhm_per_axis: Sequence[float] = config.SIDEBAND_FWHM_HZ,
    heating_amplitude: float = 0.8,
    carrier_amplitude: float = 0.1,
    baseline: float = 0.05,
    carrier_fwhm: float = config.CARRIER_FWHM_HZ,
) -> SidebandFit:
    """Seven peaks whose cooling/heating ratios are n̄/(1+n̄) per axis.

    Examples:
    ========
        >>> fit = thermal_sideband_fit([0.25, 0.25, 0.25], heating_amplitude=1.0)
        >>> [round(peak.amplitude, 6) for peak in fit.peaks[1:3]]
        [0.2, 1.0]

    """
    if not len(nbar_per_axis) == len(nu_per_axis) == len(fwhm_per_axis) == 3:
        msg = "Need n̄, ν and FWHM for exactly three axes"
        raise ValueError(msg)
    if any(nbar < 0 for nbar in nbar_per_axis):
        msg = f"n̄ must be >= 0, got {list(nbar_per_axis)}"
        raise ValueError(msg)
    peaks = [LorentzianPeak(0.0, carrier_fwhm, carrier_amplitude)]
    for nbar, nu, fwhm in zip(nbar_per_axis, nu_per_axis, fwhm_per_axis):
        peaks.append(LorentzianPeak(float(nu), float(fwhm), heating_amplitude * nbar / (1.0 + nbar)))
        peaks.append(LorentzianPeak(-float(nu), float(fwhm), heating_amplitude))
    return SidebandFit(peaks=tuple(peaks), baseline=baseline, residual=0.0)


def synthesize_spectrum(
    fit: SidebandFit,
    detuning: np.ndarray,
    trials_per_point: int = config.SPECTRUM_TRIALS,
    rng: np.random.Generator | None = None,
) -> RamanSpectrum:
    """Transfer probabilities of a fit model, with binomial noise when rng is given."""
    probability = np.clip(np.asarray(fit.evaluate(detuning), dtype=float), 0.0, 1.0)
    if rng is not None:
        probability = rng.binomial(trials_per_point, probability) / trials_per_point
    return RamanSpectrum(np.asarray(detuning, dtype=float), probability, trials_per_point)


def initial_guess(
    spectrum: RamanSpectrum,
    sideband_frequencies: Sequence[float] = config.SIDEBAND_FREQUENCIES_HZ,
    sideband_fwhm: Sequence[float] = config.SIDEBAND_FWHM_HZ,
    carrier_fwhm: float = config.CARRIER_FWHM_HZ,
) -> SidebandFit:
    """Peaks at the expected positions, amplitudes read off the data above its median."""
    baseline = float(np.clip(np.median(spectrum.transfer_probability), 0.0, 1.0))

    def height(center: float) -> float:
        value = np.interp(center, spectrum.detuning, spectrum.transfer_probability)
        return max(float(value) - baseline, 0.0)

    peaks = [LorentzianPeak(0.0, carrier_fwhm, height(0.0))]
    for nu, fwhm in zip(sideband_frequencies, sideband_fwhm):
        peaks.append(LorentzianPeak(float(nu), float(fwhm), height(nu)))
        peaks.append(LorentzianPeak(-float(nu), float(fwhm), height(-nu)))
    return SidebandFit(peaks=tuple(peaks), baseline=baseline)


class _Projection:
    """Variable projection: amplitudes and baseline by NNLS for given centers and widths.

    Nonlinear parameters per peak are (u, log fwhm) with
    center = anchor + fwhm·tanh(u), so every center stays within one linewidth
    of its anchor: 0 for the carrier, the initial center for the sidebands.
    """

    def __init__(self, spectrum: RamanSpectrum, init: SidebandFit, carrier_index: int) -> None:
        self.x = spectrum.detuning
        self.y = spectrum.transfer_probability
        self.anchors = np.array([peak.center for peak in init.peaks])
        self.anchors[carrier_index] = 0.0
        self.design = np.ones((self.x.size, N_PEAKS + 1))

    def unpack(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u, log_fwhm = params[:N_PEAKS], params[N_PEAKS:]
        fwhm = np.exp(log_fwhm)
        return self.anchors + fwhm * np.tanh(u), fwhm

    def pack(self, centers: np.ndarray, fwhm: np.ndarray) -> np.ndarray:
        offset = (centers - self.anchors) / fwhm
        if np.any(np.abs(offset) >= 1):
            msg = "Initial peak centers must lie within one linewidth of their anchors"
            raise ValueError(msg)
        return np.concatenate([np.arctanh(offset), np.log(fwhm)])

    def solve(self, params: np.ndarray) -> tuple[np.ndarray, float]:
        centers, fwhm = self.unpack(params)
        for k in range(N_PEAKS):
            self.design[:, k] = lorentzian_profile(self.x, centers[k], fwhm[k])
        coefficients, norm = optimize.nnls(self.design, self.y)
        return coefficients, float(norm**2)

    def objective(self, params: np.ndarray) -> float:
        if not np.all(np.isfinite(params)):
            return np.inf
        return self.solve(params)[1]


def _carrier_index(peaks: Sequence[LorentzianPeak]) -> int:
    return int(np.argmin([abs(peak.center) for peak in peaks]))


def fit_sidebands(
    spectrum: RamanSpectrum,
    init: SidebandFit,
    n_starts: int = 1,
    tol: float = config.FIT_TOLERANCE,
    max_eval: int = config.FIT_MAX_EVALUATIONS,
    seed: int = 0,
) -> SidebandFit:
    """Least-squares fit of seven Lorentzians plus a baseline.

    Centers and widths are searched with Nelder-Mead; for each trial the
    seven amplitudes and the baseline follow from non-negative least squares.
    The simplex is restarted from its best vertex until it stops improving.
    Extra starts jitter the nonlinear parameters of the initial guess.
    The returned residual is never above the one of `init`.
    """
    if spectrum.detuning.size < MIN_POINTS:
        msg = f"Need at least {MIN_POINTS} spectrum points, got {spectrum.detuning.size}"
        raise ValueError(msg)
    if n_starts < 1:
        msg = f"n_starts must be >= 1, got {n_starts}"
        raise ValueError(msg)
    carrier = _carrier_index(init.peaks)
    problem = _Projection(spectrum, init, carrier)
    x0 = problem.pack(
        np.array([peak.center for peak in init.peaks]),
        np.array([peak.fwhm for peak in init.peaks]),
    )
    scale = np.full(x0.size, 0.2)
    rng = np.random.default_rng(seed)

    best_x, best_value = x0, problem.objective(x0)
    evaluations, converged = 0, False
    for start in range(n_starts):
        x = x0 if start == 0 else x0 + rng.normal(0.0, 0.3, x0.size)
        value = problem.objective(x)
        run_converged = False
        for _ in range(MAX_RESTARTS):
            result = nelder_mead(problem.objective, x, scale, tol=tol, max_eval=max_eval)
            evaluations += result.n_evaluations
            run_converged = result.converged
            gain = value - result.objective_value
            if gain > 0:
                x, value = result.params, result.objective_value
            if gain <= tol * max(1.0, value):
                break
        if value <= best_value:
            best_x, best_value, converged = x, value, run_converged
    coefficients, residual = problem.solve(best_x)
    centers, fwhm = problem.unpack(best_x)
    peaks = tuple(
        LorentzianPeak(float(c), float(w), float(a))
        for c, w, a in zip(centers, fwhm, coefficients[:N_PEAKS])
    )
    return SidebandFit(
        peaks=peaks,
        baseline=float(coefficients[N_PEAKS]),
        residual=residual,
        converged=bool(converged),
        n_evaluations=evaluations,
    )


def pair_sidebands(
    fit: SidebandFit, tolerance: float = config.SIDEBAND_PAIR_TOLERANCE
) -> list[SidebandPair]:
    """Cooling/heating pairs matched by |center|, sorted by sideband frequency.

    The carrier is the peak closest to δ = 0. A pair whose |center| values
    differ by more than `tolerance` is kept but reported with a warning.
    """
    carrier = _carrier_index(fit.peaks)
    others = [peak for k, peak in enumerate(fit.peaks) if k != carrier]
    cooling = [peak for peak in others if peak.center > 0]
    heating = sorted((peak for peak in others if peak.center < 0), key=lambda peak: -peak.center)
    if len(cooling) != len(heating):
        msg = f"Cannot pair {len(cooling)} cooling with {len(heating)} heating sidebands"
        raise ValueError(msg)
    pairs = []
    for peak in heating:
        match = min(cooling, key=lambda candidate: abs(candidate.center + peak.center))
        cooling.remove(match)
        pair = SidebandPair(cooling=match, heating=peak)
        if pair.mismatch > tolerance:
            warnings.warn(
                f"Sideband pair at {peak.center:.4g}/{match.center:.4g} Hz differs by "
                f"{100 * pair.mismatch:.1f} % in |center|",
                UserWarning,
                stacklevel=2,
            )
        pairs.append(pair)
    return pairs


def thermometry(
    fit: SidebandFit,
    nu_per_axis: Sequence[float],
    tolerance: float = config.SIDEBAND_PAIR_TOLERANCE,
) -> ThermometryResult:
    """Thermal-state n̄, ground-state fraction and temperature from sideband ratios.

    r = A_cooling/A_heating, n̄ = r/(1 - r), P0 = 1/(1 + n̄) and
    T = ħν/(kB ln(1 + 1/n̄)). Axes with r >= 1 or no heating sideband are
    flagged as infinite temperature.

    Examples:
    ========
        >>> fit = thermal_sideband_fit([0.0, 0.17, 0.5])
        >>> result = thermometry(fit, [2e6, 2e6, 2e6])
        >>> [round(p, 4) for p in result.ground_fraction_per_axis]
        [1.0, 0.8547, 0.6667]

    """
    pairs = pair_sidebands(fit, tolerance)
    if len(pairs) != len(nu_per_axis):
        msg = f"Got {len(nu_per_axis)} trap frequencies for {len(pairs)} sideband pairs"
        raise ValueError(msg)
    ratios, nbars, fractions, temperatures, infinite = [], [], [], [], []
    for pair, nu in zip(pairs, nu_per_axis):
        heating = pair.heating.amplitude
        ratio = pair.cooling.amplitude / heating if heating > 0 else math.inf
        if ratio >= 1:
            ratios.append(ratio)
            nbars.append(math.inf)
            fractions.append(0.0)
            temperatures.append(math.inf)
            infinite.append(True)
            continue
        nbar = ratio / (1.0 - ratio)
        temperature = 0.0 if nbar == 0 else HBAR * nu / (BOLTZMANN * math.log1p(1.0 / nbar))
        ratios.append(ratio)
        nbars.append(nbar)
        fractions.append(1.0 / (1.0 + nbar))
        temperatures.append(temperature)
        infinite.append(False)
    return ThermometryResult(
        ratio_per_axis=tuple(ratios),
        nbar_per_axis=tuple(nbars),
        ground_fraction_per_axis=tuple(fractions),
        temperature_per_axis=tuple(temperatures),
        infinite_temperature=tuple(infinite),
    )


def binomial_ci(
    successes: int | np.ndarray,
    trials: int | np.ndarray,
    level: float = config.CONFIDENCE_LEVEL,
) -> tuple[float | np.ndarray, float | np.ndarray]:
    """Wilson score interval.

    Examples:
    ========
        >>> low, high = binomial_ci(50, 100)
        >>> round(low, 3), round(high, 3)
        (0.451, 0.549)
        >>> binomial_ci(0, 10)[0], binomial_ci(10, 10)[1]
        (0.0, 1.0)

    """
    k = np.asarray(successes, dtype=float)
    n = np.asarray(trials, dtype=float)
    if np.any(n <= 0) or np.any(k < 0) or np.any(k > n):
        msg = f"Need 0 <= successes <= trials and trials > 0, got {successes} of {trials}"
        raise ValueError(msg)
    if not 0 < level < 1:
        msg = f"Confidence level must lie in (0, 1), got {level}"
        raise ValueError(msg)
    z = stats.norm.ppf(0.5 + level / 2.0)
    p_hat = k / n
    denominator = 1.0 + z**2 / n
    center = (p_hat + z**2 / (2.0 * n)) / denominator
    half = z * np.sqrt(p_hat * (1.0 - p_hat) / n + z**2 / (4.0 * n**2)) / denominator
    low = np.where(k == 0, 0.0, np.clip(center - half, 0.0, 1.0))
    high = np.where(k == n, 1.0, np.clip(center + half, 0.0, 1.0))
    if low.ndim == 0:
        return float(low), float(high)
    return low, high
