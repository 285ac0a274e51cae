"""Tests for the optimization and fitting primitives."""

import doctest

import numpy as np
import pytest

import workbench.fitting
from workbench.fitting import (
    LorentzianPeak,
    exponential_fit,
    linear_fit,
    lorentzian_profile,
    multi_lorentzian_eval,
    nelder_mead,
)


def test_doctests():
    results = doctest.testmod(workbench.fitting)
    assert results.failed == 0


def test_nelder_mead_rosenbrock():
    def rosenbrock(x):
        return float((1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2)

    result = nelder_mead(rosenbrock, [-1.2, 1.0], [0.1, 0.1], tol=1e-10, max_eval=10_000)
    assert result.converged
    np.testing.assert_allclose(result.params, [1.0, 1.0], atol=1e-4)


def test_nelder_mead_budget_exhausted_is_unconverged():
    result = nelder_mead(lambda x: float(np.sum(x**2)), [5.0, 5.0, 5.0], 1.0, tol=1e-14, max_eval=10)
    assert not result.converged
    assert result.n_evaluations <= 20


def test_nelder_mead_ties_are_deterministic():
    def plateau(x):
        return float(max(np.abs(x).max(), 1.0))

    first = nelder_mead(plateau, [0.2, -0.3], [1.0, 1.0], tol=1e-6, max_eval=2000)
    second = nelder_mead(plateau, [0.2, -0.3], [1.0, 1.0], tol=1e-6, max_eval=2000)
    np.testing.assert_array_equal(first.params, second.params)
    assert first.n_evaluations == second.n_evaluations
    assert first.converged
    assert first.objective_value == 1.0


def test_nelder_mead_rejects_zero_scale():
    with pytest.raises(ValueError, match="scale"):
        nelder_mead(lambda x: 0.0, [0.0], [0.0])


def test_linear_fit_singular_design():
    with pytest.raises(ValueError, match="Singular"):
        linear_fit([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])


def test_exponential_fit_decay():
    t = np.linspace(0, 5e-3, 40)
    y = 0.9 * np.exp(-400.0 * t)
    result = exponential_fit(t, y)
    assert result.rate == pytest.approx(-400.0, rel=1e-4)
    assert result.amplitude == pytest.approx(0.9, rel=1e-4)


def test_exponential_fit_with_zeros():
    t = np.linspace(0, 1, 20)
    y = np.exp(-3.0 * t)
    y[-3:] = 0.0
    result = exponential_fit(t, y)
    assert result.rate == pytest.approx(-3.0, rel=0.05)


def test_lorentzian_half_maximum():
    x = np.array([-1.0, 0.0, 1.0])
    np.testing.assert_allclose(lorentzian_profile(x, 0.0, 2.0), [0.5, 1.0, 0.5])


def test_multi_lorentzian_is_baseline_plus_sum():
    peaks = [LorentzianPeak(-1.0, 0.5, 0.3), LorentzianPeak(2.0, 1.0, 0.7)]
    x = np.linspace(-3, 3, 7)
    expected = 0.1 + 0.3 * lorentzian_profile(x, -1.0, 0.5) + 0.7 * lorentzian_profile(x, 2.0, 1.0)
    np.testing.assert_allclose(multi_lorentzian_eval(peaks, 0.1, x), expected)


def test_negative_amplitude_is_rejected():
    with pytest.raises(ValueError):
        LorentzianPeak(0.0, 1.0, -0.1)


if __name__ == "__main__":
    pytest.main([__file__])
