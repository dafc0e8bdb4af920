import math
import unittest
from pathlib import Path

import numpy as np
from scipy.stats import chi2

from core import (
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
    FitError,
    OrderingError,
    PriceSeries,
    RandomSource,
    SampleSizeError,
    SegmentSizeError,
    StationarityError,
    pareto_samples,
)
from estimate import (
    GarchFit,
    GarchPath,
    GarchSpec,
    JlsParams,
    JlsSearch,
    garch_conditional_variance,
    garch_fit,
    garch_simulate,
    hill_tail_exponent,
    interpolate_variance,
    jls_evaluate,
    jls_fit,
    kinematic_crossover,
    least_action_garch_spec,
    least_action_path,
    least_action_predict,
    least_action_predict_corrected,
    realized_variance,
    regime_slopes,
)
from records import read_series_csv


FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def rng(name, seed=0):
    return RandomSource.for_operation(seed, name)


def fit_or_best(returns, **kwargs):
    try:
        return garch_fit(returns, **kwargs)
    except ConvergenceError as error:
        return error.best


class HillTailTests(unittest.TestCase):
    def test_tail_at_e_times_threshold_gives_unit_exponent(self):
        samples = [1.0] * 80 + [math.e] * 20

        estimate = hill_tail_exponent(samples, tail_fraction=0.2)

        self.assertEqual(estimate.k, 20)
        self.assertEqual(estimate.threshold, 1.0)
        self.assertAlmostEqual(estimate.exponent, 1.0, places=12)
        self.assertAlmostEqual(estimate.std_error, 1.0 / math.sqrt(20), places=12)

    def test_pareto_quantile_fixture(self):
        table = read_series_csv(FIXTURES / "pareto_quantiles.csv")

        estimate = hill_tail_exponent(table.values)

        self.assertEqual(estimate.k, 250)
        self.assertAlmostEqual(estimate.exponent, 1.5, delta=0.05)

    def test_pareto_draws(self):
        samples = pareto_samples(3.0, 100_000, rng("hill"))

        estimate = hill_tail_exponent(samples, tail_fraction=0.05)

        self.assertAlmostEqual(estimate.exponent, 3.0, delta=0.15)

    def test_rescaling_keeps_exponent(self):
        samples = pareto_samples(2.0, 5000, rng("hill"))

        base = hill_tail_exponent(samples)
        scaled = hill_tail_exponent(7.5 * samples)

        self.assertAlmostEqual(scaled.exponent, base.exponent, places=10)
        self.assertAlmostEqual(scaled.threshold, 7.5 * base.threshold, places=9)

    def test_rejects_bad_input(self):
        cases = (
            (DomainError, [1.0] * 1000, 0.0),
            (DomainError, [1.0] * 1000, 0.6),
            (DomainError, [1.0, -2.0] * 500, 0.05),
            (SampleSizeError, list(range(1, 101)), 0.05),
            (DegenerateSampleError, [2.0] * 1000, 0.05),
        )
        for error, samples, fraction in cases:
            with self.subTest(error=error.__name__, fraction=fraction):
                with self.assertRaises(error):
                    hill_tail_exponent(samples, tail_fraction=fraction)


class GarchSpecTests(unittest.TestCase):
    def test_unconditional_variance(self):
        spec = GarchSpec(omega=0.1, alpha=(0.1,), beta=(0.8,))

        self.assertAlmostEqual(spec.persistence, 0.9, places=15)
        self.assertAlmostEqual(spec.unconditional_variance, 1.0, places=12)

    def test_integrated_spec_has_no_unconditional_variance(self):
        spec = least_action_garch_spec(0.01)

        self.assertFalse(spec.is_stationary)
        with self.assertRaises(StationarityError):
            spec.unconditional_variance

    def test_negative_coefficients_are_rejected(self):
        with self.assertRaises(DomainError):
            GarchSpec(omega=0.1, alpha=(-0.1,), beta=(0.8,))

    def test_conditional_variance_matches_recursion(self):
        spec = GarchSpec(omega=0.05, alpha=(0.1,), beta=(0.85,), mu=0.01)
        returns = rng("garch").standard_normal(200)

        variance = garch_conditional_variance(spec, returns, presample=0.7)

        expected = []
        squared, h = 0.7, 0.7
        for value in returns:
            h = spec.omega + 0.1 * squared + 0.85 * h
            expected.append(h)
            squared = (value - spec.mu) ** 2
        np.testing.assert_allclose(variance, expected, rtol=1e-12)

    def test_higher_order_recursion(self):
        spec = GarchSpec(omega=0.02, alpha=(0.05, 0.05), beta=(0.5, 0.3))
        returns = rng("garch").standard_normal(50)

        variance = garch_conditional_variance(spec, returns)

        start = spec.unconditional_variance
        squared = [start, start] + list(returns**2)
        h = [start, start]
        for t in range(50):
            h.append(0.02 + 0.05 * squared[t + 1] + 0.05 * squared[t] + 0.5 * h[-1] + 0.3 * h[-2])
        np.testing.assert_allclose(variance, h[2:], rtol=1e-12)


class GarchSimulationTests(unittest.TestCase):
    def test_sample_variance_matches_unconditional(self):
        spec = GarchSpec(omega=0.1, alpha=(0.1,), beta=(0.8,))

        returns = garch_simulate(spec, 100_000, rng("garch_simulate"))

        self.assertEqual(len(returns), 100_000)
        self.assertEqual(returns.times[0], 1.0)
        self.assertAlmostEqual(float(np.var(returns.returns)), 1.0, delta=0.05)

    def test_zero_coefficients_give_iid_variance_omega(self):
        spec = GarchSpec(omega=0.3, alpha=(0.0,), beta=(0.0,))

        returns = garch_simulate(spec, 100_000, rng("garch_simulate"))

        np.testing.assert_array_equal(returns.variances, 0.3)
        self.assertAlmostEqual(float(np.var(returns.returns)) / 0.3, 1.0, delta=0.02)

    def test_zero_innovations_relax_geometrically(self):
        spec = GarchSpec(omega=0.1, alpha=(0.1,), beta=(0.8,), mu=0.3)

        path = garch_simulate(spec, 200, rng("garch_simulate"), zero_innovations=True)

        self.assertIsInstance(path, GarchPath)
        np.testing.assert_array_equal(path.returns, 0.3)
        gaps = path.variances - 0.1 / (1 - 0.8)
        np.testing.assert_allclose(gaps[1:40] / gaps[:39], 0.8, rtol=1e-9)
        self.assertAlmostEqual(path.variances[-1], 0.5, places=12)
        np.testing.assert_allclose(path.variances, garch_conditional_variance(spec, path.returns), rtol=1e-12)

    def test_nonstationary_spec_cannot_be_simulated(self):
        with self.assertRaises(StationarityError):
            garch_simulate(GarchSpec(omega=0.1, alpha=(0.3,), beta=(0.8,)), 10, rng("garch_simulate"))


class GarchFitTests(unittest.TestCase):
    def test_round_trip_recovers_coefficients(self):
        truth = GarchSpec(omega=0.05, alpha=(0.1,), beta=(0.85,))
        returns = garch_simulate(truth, 5000, rng("garch_fit"))

        fit = fit_or_best(returns)

        self.assertAlmostEqual(fit.spec.alpha[0], 0.1, delta=0.05)
        self.assertAlmostEqual(fit.spec.beta[0], 0.85, delta=0.08)
        self.assertTrue(fit.stationary)
        self.assertEqual(len(fit.std_errors), 4)

    def test_starting_points_never_beat_optimum(self):
        truth = GarchSpec(omega=0.05, alpha=(0.1,), beta=(0.85,))
        returns = garch_simulate(truth, 2000, rng("garch_fit"))

        fit = fit_or_best(returns)

        self.assertEqual(len(fit.start_log_likelihoods), 5)
        for value in fit.start_log_likelihoods:
            self.assertLessEqual(value, fit.log_likelihood + 1e-9)

    def test_independent_returns_fit_no_better_than_constant_variance(self):
        returns = rng("garch_null").standard_normal(3000)
        n = returns.size
        constant = -0.5 * n * (math.log(2 * math.pi * float(np.var(returns))) + 1)

        fit = fit_or_best(returns)

        ratio = 2 * (fit.log_likelihood - constant)
        self.assertLess(ratio, chi2.ppf(0.95, df=2))
        self.assertLess(fit.spec.alpha[0], 0.05)

    def test_least_action_data_sit_on_stationarity_boundary(self):
        z = rng("least_action").standard_normal(1500)
        h, returns = 1.0, []
        for value in z:
            r = math.sqrt(h) * value
            returns.append(r)
            h += 0.005 * r * r

        fit = fit_or_best(np.array(returns))

        self.assertFalse(fit.stationary)
        self.assertGreater(fit.persistence, 0.99)

    def test_iteration_cap_raises_with_best_iterate(self):
        returns = garch_simulate(GarchSpec(omega=0.05, alpha=(0.1,), beta=(0.85,)), 1000, rng("garch_fit"))

        with self.assertRaises(ConvergenceError) as raised:
            garch_fit(returns, max_iterations=1)

        self.assertIsInstance(raised.exception.best, GarchFit)
        self.assertFalse(raised.exception.best.converged)

    def test_degenerate_input(self):
        with self.assertRaises(DegenerateSampleError):
            garch_fit(np.full(600, 0.25))
        with self.assertRaises(SampleSizeError):
            garch_fit([0.1])


class LeastActionTests(unittest.TestCase):
    def test_single_step(self):
        self.assertAlmostEqual(least_action_predict(1.0, 0.3, 0.1, 0.5), 1.02, places=14)

    def test_zero_innovation_keeps_variance(self):
        self.assertEqual(least_action_predict(0.4, 0.2, 0.2, 0.5), 0.4)

    def test_path_matches_integrated_garch_recursion(self):
        c, mu, h0 = 0.03, 0.01, 0.5
        rates = rng("least_action").standard_normal(100)

        path = least_action_path(h0, rates, mu, c)
        variance = garch_conditional_variance(least_action_garch_spec(c, mu), rates, presample=h0 / (1 + c))

        self.assertEqual(path.size, 101)
        np.testing.assert_allclose(variance, path[:-1], rtol=1e-12)

    def test_corrected_predictor_reduces_without_correction(self):
        self.assertEqual(
            least_action_predict_corrected(1.0, 0.3, 0.1, 0.5, 0.0),
            least_action_predict(1.0, 0.3, 0.1, 0.5),
        )
        self.assertGreater(least_action_predict_corrected(1.0, 0.3, 0.1, 0.5, 1e-4), 1.02)

    def test_rejects_bad_input(self):
        for args in ((1.0, 0.3, 0.1, 0.0), (-1.0, 0.3, 0.1, 0.5), (1.0, math.nan, 0.1, 0.5)):
            with self.subTest(args=args):
                with self.assertRaises(DomainError):
                    least_action_predict(*args)


class VarianceInterpolationTests(unittest.TestCase):
    def test_linear_knots_are_reproduced(self):
        times = np.arange(11.0)

        triple = interpolate_variance(times, 1 + 2 * times)

        np.testing.assert_allclose(triple.h2([2.5, 7.25]), [6.0, 15.5], rtol=1e-12)
        self.assertFalse(triple.clamped)

    def test_knot_values_are_exact(self):
        times = np.linspace(0.0, 3.0, 7)
        values = np.array([0.3, 0.1, 0.7, 0.2, 0.9, 0.4, 0.5])

        triple = interpolate_variance(times, values)

        np.testing.assert_array_equal(triple.h2(times), values)

    def test_smooth_variance_is_tracked_between_knots(self):
        times = np.linspace(0.0, 2.0, 41)
        triple = interpolate_variance(times, np.cosh(times), boundary="not-a-knot", h0=np.cosh)
        midpoints = 0.5 * (times[1:] + times[:-1])

        np.testing.assert_allclose(triple.h2(midpoints), triple.h0(midpoints), atol=1e-5)

    def test_negative_dip_is_clamped(self):
        triple = interpolate_variance([0.0, 1.0, 2.0, 3.0], [1.0, 0.0, 0.0, 1.0])

        self.assertTrue(triple.clamped)
        self.assertEqual(triple.h2([1.5])[0], 0.0)

    def test_outside_span_is_rejected(self):
        triple = interpolate_variance([0.0, 1.0, 2.0], [1.0, 2.0, 1.0])

        with self.assertRaises(DomainError):
            triple.h2([2.5])

    def test_rejects_bad_knots(self):
        cases = (
            (SampleSizeError, [0.0, 1.0], [1.0, 1.0]),
            (OrderingError, [0.0, 2.0, 1.0], [1.0, 1.0, 1.0]),
            (DomainError, [0.0, 1.0, 2.0], [1.0, -1.0, 1.0]),
        )
        for error, times, values in cases:
            with self.subTest(error=error.__name__):
                with self.assertRaises(error):
                    interpolate_variance(times, values)

    def test_realized_variance(self):
        flat = PriceSeries(times=[0.0, 1.0, 2.0], prices=[3.0, 3.0, 3.0])
        doubling = PriceSeries(times=[0.0, 1.0, 2.0], prices=[1.0, 2.0, 4.0])

        np.testing.assert_array_equal(realized_variance(flat, 0.0)[1], [0.0, 0.0])
        times, values = realized_variance(doubling, 0.0)
        np.testing.assert_array_equal(times, [0.0, 1.0])
        np.testing.assert_allclose(values, [1.0, 1.0], rtol=1e-15)


class JlsTests(unittest.TestCase):
    def test_evaluate_without_oscillation(self):
        params = JlsParams(A=1.0, B=-1.0, C=0.0, t_c=10.0, m=0.5, omega=8.0, phi=0.0)

        self.assertAlmostEqual(jls_evaluate(params, 6.0), -1.0, places=14)

    def test_evaluate_one_unit_before_critical_time(self):
        params = JlsParams(A=5.0, B=-1.0, C=0.2, t_c=100.0, m=0.5, omega=8.0, phi=0.0)

        self.assertAlmostEqual(jls_evaluate(params, 99.0), 4.2, places=14)

    def test_evaluate_at_critical_time_is_rejected(self):
        params = JlsParams(A=5.0, B=-1.0, C=0.2, t_c=100.0, m=0.5, omega=8.0, phi=0.0)

        with self.assertRaises(DomainError):
            jls_evaluate(params, [99.0, 100.0])

    def test_oscillation_dominance_flag(self):
        self.assertTrue(JlsParams(A=0.0, B=-0.1, C=0.2, t_c=1.0, m=0.5, omega=8.0, phi=0.0).oscillation_dominates)
        self.assertFalse(JlsParams(A=0.0, B=-1.0, C=0.2, t_c=1.0, m=0.5, omega=8.0, phi=0.0).oscillation_dominates)

    def test_noiseless_fixture_is_recovered(self):
        table = read_series_csv(FIXTURES / "jls_noiseless.csv")
        series = PriceSeries(times=table.times, prices=table.values)
        search = JlsSearch(t_c=(96.0, 105.0, 10), m=(0.1, 0.9, 9), omega=(2.0, 20.0, 19))

        fit = jls_fit(series, search)

        self.assertLess(fit.rmse, 1e-8)
        self.assertEqual(fit.search_grid_size, (10, 9, 19))
        expected = {"A": 5.0, "B": -1.0, "C": 0.2, "t_c": 100.0, "m": 0.5, "omega": 8.0, "phi": 1.0}
        for name, value in expected.items():
            with self.subTest(name=name):
                self.assertAlmostEqual(getattr(fit.params, name), value, delta=1e-5)

    def test_threads_do_not_change_the_fit(self):
        table = read_series_csv(FIXTURES / "jls_noiseless.csv")
        series = PriceSeries(times=table.times, prices=table.values)
        search = JlsSearch(t_c=(96.0, 104.0, 5), m=(0.3, 0.7, 5), omega=(6.0, 10.0, 5))

        self.assertEqual(jls_fit(series, search, threads=1), jls_fit(series, search, threads=3))

    def test_search_range_must_start_after_data(self):
        series = PriceSeries(times=np.arange(40.0), prices=np.ones(40))

        with self.assertRaises(DomainError):
            jls_fit(series, JlsSearch(t_c=(39.0, 45.0, 5)))

    def test_short_series_is_rejected(self):
        series = PriceSeries(times=np.arange(10.0), prices=np.ones(10))

        with self.assertRaises(SampleSizeError):
            jls_fit(series)

    def test_default_search_window(self):
        series = PriceSeries(times=np.arange(101.0), prices=np.ones(101))

        search = JlsSearch.around(series)

        self.assertEqual(search.t_c, (102.0, 150.0, 50))

    def test_search_grid_validation(self):
        for kwargs in ({"m": (0.0, 0.9, 5)}, {"m": (0.1, 1.0, 5)}, {"omega": (0.0, 5.0, 5)}, {"omega": (5.0, 2.0, 5)}):
            with self.subTest(kwargs=kwargs):
                with self.assertRaises(DomainError):
                    JlsSearch(t_c=(10.0, 20.0, 5), **kwargs)


class RegimeSlopeTests(unittest.TestCase):
    def test_uniform_density_is_flat(self):
        samples = 1 + 9 * rng("regimes").uniform(20_000)

        slopes = regime_slopes(samples)

        self.assertAlmostEqual(slopes.slopes[0], 0.0, delta=0.05)
        self.assertEqual(slopes.counts, (20_000,))

    def test_squared_uniform_has_half_slope(self):
        samples = rng("regimes").uniform(100_000) ** 2

        slopes = regime_slopes(samples[samples > 0])

        self.assertAlmostEqual(slopes.slopes[0], -0.5, delta=0.05)

    def test_pareto_segments_share_one_exponent(self):
        samples = pareto_samples(1.5, 100_000, rng("regimes"))

        slopes = regime_slopes(samples, breakpoints=[10.0])

        self.assertEqual(len(slopes.slopes), 2)
        self.assertAlmostEqual(slopes.exponents[0], 2.5, delta=0.1)
        self.assertAlmostEqual(slopes.exponents[1], 2.5, delta=0.15)
        self.assertEqual(sum(slopes.counts), 100_000)

    def test_rejects_bad_breakpoints(self):
        samples = 1 + 9 * rng("regimes").uniform(1000)
        cases = (
            (OrderingError, [5.0, 3.0]),
            (DomainError, [0.5]),
            (SegmentSizeError, [float(samples.min()) + 1e-9]),
        )
        for error, breakpoints in cases:
            with self.subTest(error=error.__name__):
                with self.assertRaises(error):
                    regime_slopes(samples, breakpoints)


class KinematicCrossoverTests(unittest.TestCase):
    def test_crossover_of_drift_plus_acceleration(self):
        intervals = np.geomspace(0.01, 100.0, 2000)
        displacements = intervals + 2.0 * intervals**2

        self.assertAlmostEqual(kinematic_crossover(intervals, displacements), 0.5, delta=0.05)

    def test_pure_drift_never_crosses(self):
        intervals = np.geomspace(0.01, 100.0, 500)

        with self.assertRaises(FitError):
            kinematic_crossover(intervals, 3.0 * intervals)

    def test_samples_must_pair_up(self):
        with self.assertRaises(DomainError):
            kinematic_crossover([1.0, 2.0, 3.0], [1.0, 2.0])


if __name__ == "__main__":
    unittest.main()
