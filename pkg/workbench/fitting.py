"""Optimization and fitting primitives shared by the spectrum, Monte Carlo and DSH code."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize, stats

from workbench import config


@dataclass(frozen=True)
class FitResult:
    params: np.ndarray
    objective_value: float
    n_evaluations: int
    converged: bool


@dataclass(frozen=True)
class LorentzianPeak:
    center: float  # Hz
    fwhm: float  # Hz
    amplitude: float

    def __post_init__(self) -> None:
        if self.fwhm <= 0 or self.amplitude < 0:
            msg = f"Lorentzian needs fwhm > 0 and amplitude >= 0, got {self}"
            raise ValueError(msg)


class LinearFit(NamedTuple):
    slope: float
    intercept: float
    stderr_slope: float


class ExponentialFit(NamedTuple):
    rate: float
    amplitude: float
    fit: FitResult


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    scale: Sequence[float] | float,
    tol: float = config.FIT_TOLERANCE,
    max_eval: int = config.FIT_MAX_EVALUATIONS,
) -> FitResult:
    """Minimize objective with the Nelder-Mead simplex.

    The initial simplex is x0 plus one vertex per axis displaced by scale.
    Converged when the simplex diameter or the objective spread drops below
    tol. Running out of evaluations returns the best vertex, unconverged.
    Vertices with equal objective values keep scipy's ordering, including
    on shrink steps.

    Examples:
    ========
        >>> result = nelder_mead(lambda x: float(((x - 3.0) ** 2).sum()), [0.0], [1.0])
        >>> round(float(result.params[0]), 6), result.converged
        (3.0, True)

    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    scale = np.broadcast_to(np.asarray(scale, dtype=float), x0.shape)
    if np.any(scale <= 0):
        msg = f"Simplex scale must be strictly positive, got {scale}"
        raise ValueError(msg)
    if tol <= 0:
        msg = f"Tolerance must be positive, got {tol}"
        raise ValueError(msg)

    def finite_objective(x: np.ndarray) -> float:
        value = float(objective(x))
        return value if np.isfinite(value) else np.inf

    simplex = np.vstack([x0, x0 + np.diag(scale)])
    result = optimize.minimize(
        finite_objective,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": tol,
            "fatol": tol,
            "maxfev": max_eval,
            "maxiter": max_eval,
            "adaptive": x0.size > 4,
        },
    )
    vertices, values = result.final_simplex
    spread = float(np.ptp(values))
    diameter = float(np.max(np.abs(vertices[1:] - vertices[0])))
    converged = bool(np.isfinite(result.fun)) and (
        bool(result.success) or spread < tol or diameter < tol
    )
    return FitResult(
        params=np.asarray(result.x, dtype=float),
        objective_value=float(result.fun),
        n_evaluations=int(result.nfev),
        converged=converged,
    )


def linear_fit(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    """Ordinary least squares line y = slope·x + intercept.

    Examples:
    ========
        >>> fit = linear_fit([0.0, 1.0, 2.0], [1.0, 4.0, 7.0])
        >>> round(fit.slope, 12), round(fit.intercept, 12)
        (3.0, 1.0)

    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0:
        msg = f"Singular design: need at least 2 distinct x values, got {np.unique(x).size}"
        raise ValueError(msg)
    result = stats.linregress(x, y)
    return LinearFit(float(result.slope), float(result.intercept), float(result.stderr))


def exponential_fit(
    t: Sequence[float],
    y: Sequence[float],
    tol: float = config.FIT_TOLERANCE,
    max_eval: int = config.FIT_MAX_EVALUATIONS,
) -> ExponentialFit:
    """Fit y = amplitude·exp(rate·t).

    Log-linear OLS gives the start when all y > 0; otherwise the simplex
    starts flat at the largest sample. Either way the result is refined by
    Nelder-Mead on squared residuals in linear space, with the amplitude kept
    positive through its logarithm.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 3 or t.size != y.size:
        msg = f"Exponential fit needs >= 3 paired points, got {t.size} and {y.size}"
        raise ValueError(msg)

    if np.all(y > 0):
        line = linear_fit(t, np.log(y))
        x0 = np.array([line.slope, line.intercept])
    else:
        x0 = np.array([0.0, np.log(max(float(y.max()), np.finfo(float).tiny))])

    def squared_residuals(params: np.ndarray) -> float:
        rate, log_amplitude = params
        with np.errstate(over="ignore", invalid="ignore"):
            model = np.exp(log_amplitude + rate * t)
        return float(np.sum((model - y) ** 2))

    span = float(np.ptp(t)) or 1.0
    scale = [max(abs(x0[0]) * 0.1, 0.1 / span), 0.1]
    fit = nelder_mead(squared_residuals, x0, scale, tol=tol, max_eval=max_eval)
    return ExponentialFit(
        rate=float(fit.params[0]), amplitude=float(np.exp(fit.params[1])), fit=fit
    )


def lorentzian_profile(x: np.ndarray, center: float, fwhm: float) -> np.ndarray:
    """Unit-height Lorentzian (fwhm/2)² / ((x - center)² + (fwhm/2)²)."""
    half = fwhm / 2.0
    return half**2 / ((np.asarray(x, dtype=float) - center) ** 2 + half**2)


def multi_lorentzian_eval(
    peaks: Sequence[LorentzianPeak], baseline: float, x: float | np.ndarray
) -> float | np.ndarray:
    """Baseline plus a sum of Lorentzian peaks.

    Examples:
    ========
        >>> multi_lorentzian_eval([LorentzianPeak(0.0, 2.0, 1.0)], 0.5, 0.0)
        1.5
        >>> multi_lorentzian_eval([], 0.25, 10.0)
        0.25

    """
    x = np.asarray(x, dtype=float)
    total = np.full(x.shape, float(baseline))
    for peak in peaks:
        total = total + peak.amplitude * lorentzian_profile(x, peak.center, peak.fwhm)
    return float(total) if total.ndim == 0 else total
