import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abusetrends import rolling_mean, spline_smooth
from tests.test_splines import naive_bspline


def brute_force_rolling(x, window):
    half = window // 2
    out = np.empty(len(x))
    for i in range(len(x)):
        lo = max(0, i - half)
        hi = min(len(x), i + half + 1)
        out[i] = np.mean(x[lo:hi])
    return out


def oracle_spline_fit(y, knots, degree, penalty):
    """Dense normal-equations solve on an independently evaluated basis."""
    n = len(y)
    n_basis = len(knots) - degree - 1
    u = np.arange(n) / (n - 1)
    design = np.array(
        [[naive_bspline(knots, degree, j, ui, 1.0) for j in range(n_basis)] for ui in u]
    )
    diff = np.zeros((n_basis - 2, n_basis))
    for r in range(n_basis - 2):
        diff[r, r : r + 3] = (1.0, -2.0, 1.0)
    lhs = design.T @ design + penalty * diff.T @ diff
    coef = np.linalg.solve(lhs, design.T @ y)
    return design @ coef


class TestRollingMean:
    def test_week_center_value(self):
        out = rolling_mean(np.arange(1.0, 8.0), window=7)
        assert out.values[3] == pytest.approx(4.0)

    def test_constant_series_unchanged(self):
        out = rolling_mean(np.full(20, 3.25), window=7)
        np.testing.assert_allclose(out.values, 3.25)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=30)
        out = rolling_mean(x, window=7)
        np.testing.assert_allclose(out.values, brute_force_rolling(x, 7), atol=1e-12)

    def test_window_validation(self):
        with pytest.raises(ValueError):
            rolling_mean(np.ones(10), window=4)  # even
        with pytest.raises(ValueError):
            rolling_mean(np.ones(3), window=7)  # longer than series
        with pytest.raises(ValueError):
            rolling_mean(np.ones(3), window=-1)

    @given(
        x=st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=7, max_size=40),
        shift=st.floats(-1e6, 1e6, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_shift_invariance(self, x, shift):
        x = np.asarray(x)
        base = rolling_mean(x, window=7).values
        moved = rolling_mean(x + shift, window=7).values
        np.testing.assert_allclose(moved, base + shift, atol=1e-6 * (1 + abs(shift)))


class TestSplineSmooth:
    def test_line_is_reproduced_for_any_penalty(self):
        y = 2.0 + 3.0 * np.arange(50)
        for penalty in (0.0, 1.0, 1e4, 1e8):
            out = spline_smooth(y, penalty=penalty)
            np.testing.assert_allclose(out.values, y, atol=1e-8 * np.abs(y).max())

    def test_constant_series(self):
        y = np.full(30, 5.5)
        out = spline_smooth(y, penalty=None)
        np.testing.assert_allclose(out.values, y, atol=1e-8)

    def test_noisy_sine_matches_oracle_and_reduces_variance(self):
        rng = np.random.default_rng(3)
        u = np.linspace(0, 1, 120)
        y = np.sin(2 * np.pi * u) + rng.normal(scale=0.3, size=len(u))
        penalty = 5.0
        out = spline_smooth(y, penalty=penalty)
        oracle = oracle_spline_fit(
            y, np.asarray(out.metadata["knots"]), out.metadata["degree"], penalty
        )
        np.testing.assert_allclose(out.values, oracle, atol=1e-8)
        assert np.var(y - out.values) < np.var(y)

    def test_gcv_default_smooths(self):
        rng = np.random.default_rng(9)
        u = np.linspace(0, 1, 200)
        y = np.sin(2 * np.pi * u) + rng.normal(scale=0.4, size=len(u))
        out = spline_smooth(y)
        assert out.metadata["penalty_source"] == "gcv"
        # the smoother must track the signal better than the raw data do
        signal = np.sin(2 * np.pi * u)
        assert np.mean((out.values - signal) ** 2) < np.mean((y - signal) ** 2)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            spline_smooth(np.array([1.0, 2.0, 3.0]))  # too short
        with pytest.raises(ValueError):
            spline_smooth(np.array([1.0, np.nan, 3.0, 4.0]))
        with pytest.raises(ValueError):
            spline_smooth(np.ones(10), penalty=-1.0)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_linearity_in_input(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=40)
        b = rng.normal(size=40)
        penalty = 2.0
        fit_sum = spline_smooth(a + b, penalty=penalty).values
        sum_fits = spline_smooth(a, penalty=penalty).values + spline_smooth(
            b, penalty=penalty
        ).values
        np.testing.assert_allclose(fit_sum, sum_fits, atol=1e-8)
