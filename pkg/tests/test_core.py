import math
import unittest

import numpy as np

from core import (
    STYLIZED_TARGETS,
    DomainError,
    OrderingError,
    PriceSeries,
    RandomSource,
    ReturnSeries,
    SampleSizeError,
    SpacingError,
    ccdf_slope,
    empirical_ccdf,
    log_returns,
    pareto_samples,
    prices_from_returns,
    stream_id_for,
)


def series(prices, dt=1.0):
    prices = np.asarray(prices, dtype=float)
    return PriceSeries(times=dt * np.arange(prices.size), prices=prices)


class PriceSeriesTests(unittest.TestCase):
    def test_rejects_nonpositive_prices(self):
        for prices in ([1.0, 0.0, 2.0], [1.0, -1.0], [1.0, math.nan]):
            with self.subTest(prices=prices):
                with self.assertRaises(DomainError):
                    series(prices)

    def test_rejects_unordered_times(self):
        with self.assertRaises(OrderingError):
            PriceSeries(times=[0.0, 2.0, 1.0], prices=[1.0, 1.0, 1.0])

    def test_arrays_are_read_only(self):
        path = series([1.0, 2.0])

        with self.assertRaises(ValueError):
            path.prices[0] = 3.0


class LogReturnTests(unittest.TestCase):
    def test_constant_series_has_zero_returns(self):
        returns = log_returns(series([5.0] * 4), 1.0)

        self.assertEqual(returns.returns.tolist(), [0.0, 0.0, 0.0])

    def test_exponential_series_has_constant_returns(self):
        path = series(np.exp(0.1 * np.arange(11)))

        returns = log_returns(path, 1.0)

        np.testing.assert_allclose(returns.returns, 0.1, atol=1e-12)

    def test_doubling_then_halving(self):
        returns = log_returns(series([1.0, 2.0, 1.0]), 1.0)

        np.testing.assert_allclose(returns.returns, [math.log(2), -math.log(2)], rtol=1e-15)

    def test_multiple_of_spacing_strides(self):
        path = series(np.exp(0.1 * np.arange(11)), dt=0.5)

        returns = log_returns(path, 1.5)

        self.assertEqual(len(returns), 8)
        np.testing.assert_allclose(returns.returns, 0.3, atol=1e-12)
        self.assertEqual(returns.times[0], 1.5)

    def test_incompatible_interval_is_rejected(self):
        for dt in (0.7, 0.0, -1.0):
            with self.subTest(dt=dt):
                with self.assertRaises(SpacingError):
                    log_returns(series([1.0, 2.0, 3.0]), dt)

    def test_nonuniform_series_is_rejected(self):
        path = PriceSeries(times=[0.0, 1.0, 3.0], prices=[1.0, 2.0, 3.0])

        with self.assertRaises(SpacingError):
            log_returns(path, 1.0)

    def test_single_price_is_too_short(self):
        with self.assertRaises(SampleSizeError):
            log_returns(series([1.0]), 1.0)

    def test_prices_from_returns_inverts_unit_stride(self):
        path = series([2.0, 3.0, 1.5, 4.0])

        rebuilt = prices_from_returns(log_returns(path, 1.0), 2.0)

        np.testing.assert_allclose(rebuilt.prices, path.prices, rtol=1e-14)
        np.testing.assert_array_equal(rebuilt.times, path.times)

    def test_return_series_validates_interval(self):
        with self.assertRaises(DomainError):
            ReturnSeries(times=[1.0], returns=[0.0], dt=0.0)


class EmpiricalCcdfTests(unittest.TestCase):
    def test_matches_rank_definition(self):
        pairs = empirical_ccdf([3.0, 1.0, 2.0, 4.0])

        self.assertEqual(pairs, [(1.0, 0.75), (2.0, 0.5), (3.0, 0.25), (4.0, 0.0)])

    def test_ties_keep_sorted_order(self):
        pairs = empirical_ccdf([2.0, 1.0, 2.0])

        self.assertEqual(pairs, [(1.0, 2 / 3), (2.0, 1 / 3), (2.0, 0.0)])

    def test_accepts_iterators(self):
        pairs = empirical_ccdf(value for value in (1.0, 2.0))

        self.assertEqual(pairs, [(1.0, 0.5), (2.0, 0.0)])

    def test_rejects_small_or_nonpositive_samples(self):
        with self.assertRaises(SampleSizeError):
            empirical_ccdf([1.0])
        with self.assertRaises(DomainError):
            empirical_ccdf([1.0, 0.0])

    def test_slope_of_exact_power_law(self):
        quantiles = (np.arange(1, 2001) / 2000) ** (-1 / 3.0)

        slope, error = ccdf_slope(empirical_ccdf(quantiles), 1.5, 3.0)

        self.assertAlmostEqual(slope, -3.0, delta=0.05)
        self.assertGreaterEqual(error, 0.0)


class RandomSourceTests(unittest.TestCase):
    def test_same_seed_and_stream_repeat(self):
        first = RandomSource(seed=42, stream_id=7).standard_normal(5)
        second = RandomSource(seed=42, stream_id=7).standard_normal(5)

        np.testing.assert_array_equal(first, second)

    def test_streams_and_seeds_differ(self):
        base = RandomSource(seed=42, stream_id=7).uniform(5)

        self.assertFalse(np.array_equal(base, RandomSource(seed=42, stream_id=8).uniform(5)))
        self.assertFalse(np.array_equal(base, RandomSource(seed=43, stream_id=7).uniform(5)))

    def test_spawn_keeps_seed_and_switches_stream(self):
        child = RandomSource(seed=42, stream_id=7).spawn(9)

        self.assertEqual((child.seed, child.stream_id), (42, 9))
        np.testing.assert_array_equal(child.uniform(5), RandomSource(seed=42, stream_id=9).uniform(5))

    def test_stream_id_is_stable_per_name(self):
        self.assertEqual(stream_id_for("wiener_path"), stream_id_for("wiener_path"))
        self.assertNotEqual(stream_id_for("wiener_path"), stream_id_for("jls_path"))
        self.assertLess(stream_id_for("wiener_path"), 2**64)

    def test_seed_must_fit_in_64_bits(self):
        for seed in (-1, 2**64):
            with self.subTest(seed=seed):
                with self.assertRaises(DomainError):
                    RandomSource(seed=seed)

    def test_uniform_draws_stay_in_unit_interval(self):
        draws = RandomSource.for_operation(0, "uniform").uniform(10_000)

        self.assertGreaterEqual(draws.min(), 0.0)
        self.assertLess(draws.max(), 1.0)

    def test_pareto_samples_respect_minimum(self):
        draws = pareto_samples(3.0, 1000, RandomSource(seed=1), x_min=2.0)

        self.assertGreaterEqual(draws.min(), 2.0)


class StylizedTargetTests(unittest.TestCase):
    def test_reference_exponents(self):
        self.assertEqual(
            (STYLIZED_TARGETS.xi_r, STYLIZED_TARGETS.xi_v, STYLIZED_TARGETS.xi_n, STYLIZED_TARGETS.xi_s),
            (3.0, 1.5, 3.4, 1.05),
        )


if __name__ == "__main__":
    unittest.main()
