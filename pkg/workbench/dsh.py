"""Delayed self-heterodyne (DSH) linewidth analysis.

Laser phase noise is built from three frequency-noise components with
one-sided PSDs A_w², A_f²/f and A_r²/f² (Hz²/Hz, f in Hz), so the white
component alone gives a Lorentzian laser line of FWHM π·A_w². The beat of the
laser with a delayed, frequency-shifted copy is analysed with Welch PSDs and
the amplitudes are fitted in log-PSD space with Nelder-Mead.
"""

import math
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import fft, signal
from tqdm import tqdm

from workbench import config
from workbench.constants import SPEED_OF_LIGHT
from workbench.fitting import FitResult, LorentzianPeak, linear_fit, lorentzian_profile, nelder_mead

COMPONENTS = ("white", "flicker", "randomwalk")
LOG_AMPLITUDE_FLOOR = -8.0  # log10 amplitude treated as zero
DELAY_RESIDUAL_WARNING = 1e-3  # relative delay rounding error
DSH_TOLERANCE = 1e-4  # dB² objective spread / log10-amplitude simplex size
PHASE_FIT_BAND = (10.0, 0.05)  # white phase PSD fit from 10 bins up to 5 % of fs


@dataclass(frozen=True)
class NoiseAmplitudes:
    a_white: float = 0.0
    a_flicker: float = 0.0
    a_randomwalk: float = 0.0

    def __post_init__(self) -> None:
        if min(self.a_white, self.a_flicker, self.a_randomwalk) < 0:
            msg = f"Noise amplitudes must be >= 0, got {self}"
            raise ValueError(msg)

    @classmethod
    def from_lorentzian(cls, linewidth: float, a_flicker: float = 0.0, a_randomwalk: float = 0.0):
        """White amplitude giving a Lorentzian laser line of FWHM `linewidth` (Hz)."""
        return cls(math.sqrt(linewidth / math.pi), a_flicker, a_randomwalk)

    def as_array(self) -> np.ndarray:
        return np.array([self.a_white, self.a_flicker, self.a_randomwalk])

    @property
    def lorentzian_linewidth(self) -> float:
        """δν = π·A_w²."""
        return math.pi * self.a_white**2


@dataclass(frozen=True)
class DshConfig:
    aom_offset: float = config.DSH_AOM_OFFSET_HZ
    fiber_delay: float = config.DSH_FIBER_LENGTH_M * config.DSH_GROUP_INDEX / SPEED_OF_LIGHT
    sample_rate: float = config.DSH_SAMPLE_RATE_HZ
    duration: float = config.DSH_DURATION_S
    n_averages: int = config.DSH_AVERAGES
    analytic: bool = config.DSH_ANALYTIC
    span: float = config.DSH_SPAN_HZ

    def __post_init__(self) -> None:
        if min(self.aom_offset, self.sample_rate, self.duration, self.span) <= 0:
            msg = f"DSH offset, sample rate, duration and span must be > 0, got {self}"
            raise ValueError(msg)
        if self.fiber_delay < 0 or self.fiber_delay >= self.duration / 10:
            msg = f"Fiber delay must lie in [0, duration/10), got {self.fiber_delay} s for {self.duration} s"
            raise ValueError(msg)
        if not self.analytic and self.sample_rate <= 4 * self.aom_offset:
            msg = f"A real beat needs sample_rate > 4·aom_offset, got {self.sample_rate} and {self.aom_offset}"
            raise ValueError(msg)
        if self.aom_offset + self.span > self.sample_rate / 2:
            msg = f"Analysis span {self.span} Hz around {self.aom_offset} Hz exceeds Nyquist {self.sample_rate / 2} Hz"
            raise ValueError(msg)
        if not self.analytic and self.aom_offset - self.span < 0:
            msg = f"Analysis span {self.span} Hz reaches below 0 Hz for a real beat at {self.aom_offset} Hz"
            raise ValueError(msg)
        n = self.n_samples
        if n & (n - 1):
            msg = f"duration·sample_rate must be a power of two, got {self.duration * self.sample_rate:.6g}"
            raise ValueError(msg)
        if self.n_averages < 1 or self.segment_length < 16:
            msg = f"{self.n_averages} averages leave segments of {self.segment_length} samples"
            raise ValueError(msg)

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    @property
    def segment_length(self) -> int:
        """Largest power of two giving at least n_averages half-overlapping segments."""
        target = 2 * self.n_samples / (self.n_averages + 1)
        return 2 ** int(math.floor(math.log2(target))) if target >= 1 else 0

    def delay_samples(self) -> tuple[int, float]:
        """(integer delay in samples, rounding residual in s)."""
        d = int(round(self.fiber_delay * self.sample_rate))
        return d, self.fiber_delay - d / self.sample_rate


@dataclass(frozen=True)
class PsdSpectrum:
    freq: np.ndarray  # Hz
    power: np.ndarray
    resolution_bw: float  # Hz
    in_db: bool = False

    def __post_init__(self) -> None:
        freq = np.asarray(self.freq, dtype=float)
        power = np.asarray(self.power, dtype=float)
        if freq.shape != power.shape or freq.ndim != 1:
            msg = f"PSD frequency and power must be 1D of equal length, got {freq.shape} and {power.shape}"
            raise ValueError(msg)
        if np.any(np.diff(freq) <= 0):
            msg = "PSD frequencies must be strictly increasing"
            raise ValueError(msg)
        if not np.all(np.isfinite(power)):
            msg = "PSD power must be finite"
            raise ValueError(msg)
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "power", power)

    def linear(self) -> np.ndarray:
        return 10.0 ** (self.power / 10.0) if self.in_db else self.power

    def to_db(self, floor: float = 1e-300) -> "PsdSpectrum":
        if self.in_db:
            return self
        return replace(self, power=10.0 * np.log10(np.maximum(self.power, floor)), in_db=True)


@dataclass(frozen=True)
class LinewidthEstimate:
    lorentzian_hz: float  # from the white phase PSD, S_w(f) = δν/(πf²)
    gaussian_flicker_hz: float  # FWHM/2 of the flicker-only beat
    randomwalk_hz: float  # FWHM/2 of the random-walk-only beat
    fit: FitResult
    amplitudes: NoiseAmplitudes
    lorentzian_spread_hz: float = math.nan  # std over refits with other inner seeds
    refit_lorentzian_hz: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "amplitudes": asdict(self.amplitudes),
            "lorentzian_hz": self.lorentzian_hz,
            "lorentzian_from_amplitude_hz": self.amplitudes.lorentzian_linewidth,
            "gaussian_flicker_hz": self.gaussian_flicker_hz,
            "randomwalk_hz": self.randomwalk_hz,
            "lorentzian_spread_hz": self.lorentzian_spread_hz,
            "refit_lorentzian_hz": list(self.refit_lorentzian_hz),
            "fit": {
                "params_log10": self.fit.params.tolist(),
                "objective_value": self.fit.objective_value,
                "n_evaluations": self.fit.n_evaluations,
                "converged": self.fit.converged,
            },
        }


def delay_from_fiber(
    length: float = config.DSH_FIBER_LENGTH_M, group_index: float = config.DSH_GROUP_INDEX
) -> float:
    """Group delay L·n_g/c of a fiber.

    Examples:
    ========
        >>> round(delay_from_fiber(4900.0, 1.468) * 1e6, 2)
        23.99

    """
    return length * group_index / SPEED_OF_LIGHT


def unit_frequency_noise(n_samples: int, sample_rate: float, rng: np.random.Generator) -> np.ndarray:
    """Rows: white, flicker and random-walk frequency noise at unit amplitude.

    White Gaussian noise of variance fs/2 has a one-sided PSD of 1 Hz²/Hz; the
    other rows are shaped in the FFT domain by f^(-1/2) and f^(-1) with the DC
    bin zeroed.
    """
    if n_samples < 2 or n_samples & (n_samples - 1):
        msg = f"Number of samples must be a power of two, got {n_samples}"
        raise ValueError(msg)
    white = rng.standard_normal((3, n_samples)) * math.sqrt(sample_rate / 2.0)
    f = fft.rfftfreq(n_samples, d=1.0 / sample_rate)
    shape = np.zeros((2, f.size))
    shape[0, 1:] = f[1:] ** -0.5
    shape[1, 1:] = 1.0 / f[1:]
    shaped = fft.irfft(fft.rfft(white[1:], axis=1) * shape, n=n_samples, axis=1)
    return np.vstack([white[0], shaped])


def gen_phase_noise(
    amps: NoiseAmplitudes, n_samples: int, sample_rate: float, rng: np.random.Generator
) -> np.ndarray:
    """Phase φ(t) = 2π ∫ ν(t) dt in radians."""
    frequency = amps.as_array() @ unit_frequency_noise(n_samples, sample_rate, rng)
    return 2.0 * np.pi * np.cumsum(frequency) / sample_rate


def _beat(carrier_phase: np.ndarray, phase_difference: np.ndarray, analytic: bool) -> np.ndarray:
    total = carrier_phase + phase_difference
    return np.exp(1j * total) if analytic else np.cos(total)


def dsh_beat_signal(phase: np.ndarray, cfg: DshConfig, analytic: bool | None = None) -> np.ndarray:
    """cos(2π δ_f t + φ(t) - φ(t - τ_d)), t starting one delay into the record.

    The analytic variant returns the complex exponential instead.
    """
    analytic = cfg.analytic if analytic is None else analytic
    d, residual = cfg.delay_samples()
    if cfg.fiber_delay > 0 and abs(residual) > DELAY_RESIDUAL_WARNING * cfg.fiber_delay:
        warnings.warn(
            f"Fiber delay {cfg.fiber_delay:.6g} s rounded to {d} samples, residual {residual:.3g} s",
            UserWarning,
            stacklevel=2,
        )
    phase = np.asarray(phase, dtype=float)
    if d >= phase.size:
        msg = f"Delay of {d} samples exceeds the {phase.size}-sample phase record"
        raise ValueError(msg)
    difference = phase[d:] - phase[: phase.size - d]
    t = (d + np.arange(difference.size)) / cfg.sample_rate
    return _beat(2.0 * np.pi * cfg.aom_offset * t, difference, analytic)


def psd_welch(
    series: np.ndarray,
    sample_rate: float,
    segment_length: int,
    n_overlap: int | None = None,
) -> PsdSpectrum:
    """Hann-windowed Welch PSD; two-sided and centred for complex input."""
    series = np.asarray(series)
    if segment_length > series.size:
        msg = f"Segment length {segment_length} exceeds signal length {series.size}"
        raise ValueError(msg)
    is_complex = np.iscomplexobj(series)
    freq, power = signal.welch(
        series,
        fs=sample_rate,
        window="hann",
        nperseg=segment_length,
        noverlap=n_overlap,
        return_onesided=not is_complex,
        scaling="density",
    )
    if is_complex:
        freq, power = fft.fftshift(freq), fft.fftshift(power)
    window = signal.get_window("hann", segment_length)
    resolution_bw = sample_rate * float(np.sum(window**2)) / float(np.sum(window)) ** 2
    return PsdSpectrum(freq=freq, power=power, resolution_bw=resolution_bw)


class BeatSimulator:
    """Beat PSDs for any amplitudes on one frozen noise realization.

    The delayed phase differences of the three unit components are computed
    once; a PSD for new amplitudes only needs their linear combination.
    """

    def __init__(self, cfg: DshConfig, seed: int) -> None:
        self.cfg = cfg
        rng = np.random.default_rng(seed)
        units = unit_frequency_noise(cfg.n_samples, cfg.sample_rate, rng)
        phase = 2.0 * np.pi * np.cumsum(units, axis=1) / cfg.sample_rate
        d, _ = cfg.delay_samples()
        self.differences = phase[:, d:] - phase[:, : cfg.n_samples - d]
        self.phase = phase
        t = (d + np.arange(self.differences.shape[1])) / cfg.sample_rate
        self.carrier_phase = 2.0 * np.pi * cfg.aom_offset * t

    def signal(self, amps: NoiseAmplitudes | np.ndarray) -> np.ndarray:
        vector = amps.as_array() if isinstance(amps, NoiseAmplitudes) else np.asarray(amps)
        return _beat(self.carrier_phase, vector @ self.differences, self.cfg.analytic)

    def psd(self, amps: NoiseAmplitudes | np.ndarray) -> PsdSpectrum:
        return psd_welch(self.signal(amps), self.cfg.sample_rate, self.cfg.segment_length)

    def white_phase_psd(self, a_white: float) -> PsdSpectrum:
        return psd_welch(a_white * self.phase[0], self.cfg.sample_rate, self.cfg.segment_length)


def simulate_dsh(amps: NoiseAmplitudes, cfg: DshConfig, seed: int) -> PsdSpectrum:
    """Beat PSD of a synthetic laser."""
    return BeatSimulator(cfg, seed).psd(amps)


def _span_mask(freq: np.ndarray, center: float, span: float, exclude: float = 0.0) -> np.ndarray:
    offset = np.abs(freq - center)
    return (offset <= span) & (offset > exclude)


def white_linewidth_from_phase_psd(psd: PsdSpectrum) -> float:
    """δν from a white-FM phase PSD: mean of π·S_φ(f)·f² over the low-frequency band."""
    df = psd.freq[1] - psd.freq[0]
    low = PHASE_FIT_BAND[0] * df
    high = PHASE_FIT_BAND[1] * psd.freq[-1] * 2.0
    band = (psd.freq >= low) & (psd.freq <= high)
    return float(np.pi * np.mean(psd.linear()[band] * psd.freq[band] ** 2))


def lineshape_fwhm(psd: PsdSpectrum, center: float, span: float) -> float:
    """Full width at half maximum of the line nearest `center`, by linear interpolation."""
    mask = _span_mask(psd.freq, center, span)
    freq, power = psd.freq[mask], psd.linear()[mask]
    peak = int(np.argmax(power))
    half = power[peak] / 2.0
    left = np.nonzero(power[:peak] < half)[0]
    right = np.nonzero(power[peak:] < half)[0]
    if left.size == 0 or right.size == 0:
        return math.inf
    i, j = left[-1], peak + right[0]
    f_left = np.interp(half, [power[i], power[i + 1]], [freq[i], freq[i + 1]])
    f_right = np.interp(half, [power[j], power[j - 1]], [freq[j], freq[j - 1]])
    return float(f_right - f_left)


def fit_lorentzian_line(psd: PsdSpectrum, center: float, span: float) -> LorentzianPeak:
    """Least-squares Lorentzian (no baseline) to the linear PSD within center ± span."""
    mask = _span_mask(psd.freq, center, span)
    freq, power = psd.freq[mask], psd.linear()[mask]
    scale = float(power.max())
    y = power / scale
    width0 = lineshape_fwhm(psd, center, span)
    width0 = width0 if math.isfinite(width0) else span / 10.0

    def amplitude(params: np.ndarray) -> tuple[np.ndarray, float]:
        profile = lorentzian_profile(freq, center + params[0] * width0, width0 * math.exp(params[1]))
        return profile, max(float(profile @ y) / float(profile @ profile), 0.0)

    def squared_residuals(params: np.ndarray) -> float:
        profile, a = amplitude(params)
        return float(np.sum((a * profile - y) ** 2))

    result = nelder_mead(squared_residuals, [0.0, 0.0], [0.1, 0.1])
    _, a = amplitude(result.params)
    return LorentzianPeak(
        center=center + float(result.params[0]) * width0,
        fwhm=width0 * math.exp(float(result.params[1])),
        amplitude=a * scale,
    )


def ripple_spacing(psd: PsdSpectrum, center: float, tau_d: float, span: float | None = None) -> float:
    """Spacing of the coherent-regime ripple minima on the upper wing.

    Minima are located with find_peaks on -log PSD, numbered by the expected
    spacing 1/τ_d so that a missed minimum does not bias the slope, and the
    spacing is the OLS slope of position against number.
    """
    span = 10.0 / tau_d if span is None else span
    mask = (psd.freq > center + 0.5 / tau_d) & (psd.freq <= center + span)
    freq = psd.freq[mask]
    level = 10.0 * np.log10(np.maximum(psd.linear()[mask], 1e-300))
    df = freq[1] - freq[0]
    minima, _ = signal.find_peaks(-level, distance=max(1, int(0.6 / (tau_d * df))), prominence=1.0)
    if minima.size < 3:
        msg = f"Found {minima.size} ripple minima, need at least 3"
        raise ValueError(msg)
    positions = freq[minima]
    numbers = np.round((positions - positions[0]) * tau_d)
    return linear_fit(numbers, positions).slope


def component_lineshapes(amps: NoiseAmplitudes, cfg: DshConfig, seed: int) -> dict[str, PsdSpectrum]:
    """Beat PSD of each noise component on its own."""
    simulator = BeatSimulator(cfg, seed)
    vector = amps.as_array()
    shapes = {}
    for k, name in enumerate(COMPONENTS):
        alone = np.zeros(3)
        alone[k] = vector[k]
        shapes[name] = simulator.psd(alone)
    return shapes


def _normalized_db(power: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """10·log10 of power divided by its sum over the span."""
    total = float(power.sum())
    floor = 1e-20 * total if total > 0 else 1e-300
    return 10.0 * np.log10(np.maximum(power[keep], floor) / max(total, 1e-300))


def _fit_once(
    target: PsdSpectrum,
    cfg: DshConfig,
    init: NoiseAmplitudes,
    seed: int,
    max_eval: int,
) -> tuple[FitResult, BeatSimulator]:
    simulator = BeatSimulator(cfg, seed)
    grid = simulator.psd(init)
    span = _span_mask(grid.freq, cfg.aom_offset, cfg.span)
    keep = _span_mask(grid.freq[span], cfg.aom_offset, cfg.span, exclude=grid.resolution_bw)
    target_power = np.interp(grid.freq[span], target.freq, target.linear())
    target_db = _normalized_db(target_power, keep)

    def objective(log_amps: np.ndarray) -> float:
        amps = 10.0 ** np.maximum(log_amps, LOG_AMPLITUDE_FLOOR)
        simulated = simulator.psd(amps).power[span]
        return float(np.mean((_normalized_db(simulated, keep) - target_db) ** 2))

    x0 = np.log10(np.maximum(init.as_array(), 10.0**LOG_AMPLITUDE_FLOOR))
    result = nelder_mead(objective, x0, 0.5, tol=DSH_TOLERANCE, max_eval=max_eval)
    clipped = np.maximum(result.params, LOG_AMPLITUDE_FLOOR)
    return replace(result, params=clipped), simulator


def _amplitudes(params: np.ndarray) -> NoiseAmplitudes:
    values = np.where(params <= LOG_AMPLITUDE_FLOOR, 0.0, 10.0**params)
    return NoiseAmplitudes(*values.tolist())


def fit_noise_amplitudes(
    target: PsdSpectrum,
    cfg: DshConfig,
    init: NoiseAmplitudes,
    seed: int = config.DSH_INNER_SEED,
    n_refits: int = 0,
    max_eval: int = config.DSH_MAX_EVALUATIONS,
    progress: bool = False,
) -> LinewidthEstimate:
    """Fit (A_w, A_f, A_r) so the simulated beat PSD matches the target.

    The objective is the mean squared difference of the span-normalized
    log-PSDs within aom_offset ± span, the central resolution bin excluded.
    The simulation uses a fixed inner seed; `n_refits` further inner seeds
    re-fit from the result and give the spread of the Lorentzian linewidth.
    """
    if target.freq[0] > cfg.aom_offset - cfg.span or target.freq[-1] < cfg.aom_offset + cfg.span:
        msg = (
            f"Target PSD covers {target.freq[0]:.4g}..{target.freq[-1]:.4g} Hz, "
            f"need {cfg.aom_offset - cfg.span:.4g}..{cfg.aom_offset + cfg.span:.4g} Hz"
        )
        raise ValueError(msg)
    fit, simulator = _fit_once(target, cfg, init, seed, max_eval)
    amps = _amplitudes(fit.params)
    lorentzian = white_linewidth_from_phase_psd(simulator.white_phase_psd(amps.a_white))

    refits = []
    for k in tqdm(range(1, n_refits + 1), desc="refits", disable=not progress):
        refit, refit_simulator = _fit_once(target, cfg, amps, seed + k, max_eval)
        refit_amps = _amplitudes(refit.params)
        refits.append(
            white_linewidth_from_phase_psd(refit_simulator.white_phase_psd(refit_amps.a_white))
        )
    spread = float(np.std(refits, ddof=1)) if len(refits) > 1 else math.nan

    widths = {}
    for k, name in enumerate(COMPONENTS[1:], start=1):
        if amps.as_array()[k] == 0:
            widths[name] = 0.0
            continue
        alone = np.zeros(3)
        alone[k] = amps.as_array()[k]
        widths[name] = lineshape_fwhm(simulator.psd(alone), cfg.aom_offset, cfg.span) / 2.0
    return LinewidthEstimate(
        lorentzian_hz=lorentzian,
        gaussian_flicker_hz=widths["flicker"],
        randomwalk_hz=widths["randomwalk"],
        fit=fit,
        amplitudes=amps,
        lorentzian_spread_hz=spread,
        refit_lorentzian_hz=tuple(refits),
    )
