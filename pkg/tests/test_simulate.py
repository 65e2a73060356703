import numpy as np
import pytest
from scipy import stats

from abusetrends import ParamCurves, constant, piecewise_linear, simulate
from abusetrends.simulate import parse_curve_spec


class TestCurves:
    def test_constant(self):
        fn = constant(3.5)
        np.testing.assert_allclose(fn(np.array([0.0, 0.5, 1.0])), 3.5)

    def test_piecewise_linear(self):
        fn = piecewise_linear([(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)])
        np.testing.assert_allclose(fn(np.array([0.25, 0.5, 0.75])), [0.5, 1.0, 0.5])

    def test_piecewise_requires_full_domain(self):
        with pytest.raises(ValueError):
            piecewise_linear([(0.1, 0.0), (1.0, 1.0)])

    def test_parse_specs(self):
        assert parse_curve_spec("20")(np.array([0.3]))[0] == 20.0
        assert parse_curve_spec("const:0.4")(np.array([0.9]))[0] == 0.4
        pwl = parse_curve_spec("pwl:0:0,0.5:2,1:0")
        assert pwl(np.array([0.25]))[0] == pytest.approx(1.0)
        with pytest.raises(ValueError):
            parse_curve_spec("nope:1")
        with pytest.raises(ValueError):
            parse_curve_spec("pwl:0:1:2")

    def test_stability_validation(self):
        curves = ParamCurves(constant(5.0), (constant(0.6), constant(0.4)))
        with pytest.raises(ValueError, match="stability"):
            curves.validate()

    def test_negative_mu_rejected(self):
        curves = ParamCurves(constant(-1.0), (constant(0.1),))
        with pytest.raises(ValueError):
            curves.validate()


class TestSimulate:
    def test_zero_curves_give_zero_series(self):
        curves = ParamCurves(constant(0.0), (constant(0.0),))
        series = simulate(curves, 50, seed=3)
        assert not series.values.any()

    def test_deterministic_per_seed(self):
        curves = ParamCurves(constant(8.0), (constant(0.3),))
        a = simulate(curves, 500, seed=11)
        b = simulate(curves, 500, seed=11)
        other = simulate(curves, 500, seed=12)
        assert a == b
        assert a != other

    def test_outputs_are_nonnegative_integers(self):
        curves = ParamCurves(
            piecewise_linear([(0.0, 2.0), (1.0, 20.0)]),
            (constant(0.25), constant(0.2)),
        )
        series = simulate(curves, 300, seed=5)
        assert series.values.dtype == np.int64
        assert np.all(series.values >= 0)

    def test_length_must_exceed_lag_order(self):
        curves = ParamCurves(constant(1.0), (constant(0.1),) * 5)
        with pytest.raises(ValueError):
            simulate(curves, 5, seed=0)

    def test_trend_only_marginals_are_poisson(self):
        # with no lag terms every day is an independent Poisson draw, so a
        # long constant-trend run is a large sample from one marginal
        lam = 7.3
        n = 100_000
        series = simulate(ParamCurves(constant(lam), ()), n, seed=99)
        values = series.values
        kmax = int(values.max())
        observed = np.bincount(values, minlength=kmax + 1).astype(float)
        expected = stats.poisson.pmf(np.arange(kmax + 1), lam) * n
        # merge the tail so expected cell counts stay reasonable
        cut = np.searchsorted(np.cumsum(expected[::-1]), 5.0)
        k_hi = kmax + 1 - cut
        obs = np.append(observed[:k_hi], observed[k_hi:].sum())
        exp = np.append(expected[:k_hi], expected[k_hi:].sum())
        exp *= obs.sum() / exp.sum()
        result = stats.chisquare(obs, exp)
        assert result.pvalue > 0.001
