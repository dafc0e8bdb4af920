import json
import math
import unittest
from unittest.mock import patch

import numpy as np

import verify
from core import DomainError
from verify import CHECKS, CheckRecord, VerifyReport, below, format_records, jls_series, run_checks, within


class CheckHelperTests(unittest.TestCase):
    def test_within_and_below(self):
        self.assertTrue(within("x", 1.0, 1.05, 0.1).passed)
        self.assertFalse(within("x", 1.0, 1.2, 0.1).passed)
        self.assertFalse(within("x", 1.0, math.nan, 0.1).passed)
        self.assertTrue(below("y", 1e-9, 1e-8).passed)
        self.assertFalse(below("y", math.inf, 1e-8).passed)

    def test_format_records(self):
        text = format_records([CheckRecord("slope", 0.5, 0.5, 1e-9, True)])

        self.assertEqual(text, "slope: pass measured=0.5 target=0.5 tol=1e-09")

    def test_check_names_are_unique(self):
        names = [name for name, _ in CHECKS]

        self.assertEqual(len(names), 11)
        self.assertEqual(len(set(names)), 11)

    def test_reference_series_spans_the_fixture_grid(self):
        series = jls_series()

        self.assertEqual(len(series), 191)
        self.assertEqual(series.times[-1], 95.0)


class RunChecksTests(unittest.TestCase):
    def test_deterministic_subset_passes(self):
        only = ("square_root_impact", "least_action_garch", "conservation", "log_periodicity")

        report = run_checks(0, only=only)

        self.assertTrue(report.passed, format_records(report.records))
        self.assertIn("reported=(0.0082, 0.9505)", report.records[2].detail)
        self.assertEqual(
            [record.name for record in report.records],
            [
                "impact_volume_slope",
                "impact_numeric_agreement",
                "least_action_garch_identity",
                "conservation_drift",
                "conservation_analytic",
                "log_periodic_ratio",
            ],
        )

    def test_same_seed_repeats_measurements(self):
        first = run_checks(5, only=("least_action_garch", "tail_calibration"))
        second = run_checks(5, only=("least_action_garch", "tail_calibration"))

        self.assertEqual(
            [record.measured for record in first.records],
            [record.measured for record in second.records],
        )

    def test_crash_rate_check(self):
        report = run_checks(0, only=("crash_rate",))

        self.assertAlmostEqual(report.records[0].target, 1 - math.exp(-1), places=15)
        self.assertAlmostEqual(report.records[0].measured, 1 - 0.99**100, delta=0.02)

    def test_raising_check_is_recorded_as_failure(self):
        def broken(seed, threads):
            raise DomainError("out of range")

        with patch.object(verify, "CHECKS", (("broken", broken),)):
            report = run_checks(0)

        self.assertFalse(report.passed)
        self.assertEqual(report.records[0].name, "broken")
        self.assertEqual(report.records[0].detail, "out of range")

    def test_report_serializes_to_json(self):
        report = VerifyReport(seed=2, records=(CheckRecord("x", 1.0, math.nan, 0.1, False),))

        payload = json.loads(json.dumps(report.to_dict()))

        self.assertFalse(payload["passed"])
        self.assertIsNone(payload["records"][0]["measured"])
        self.assertEqual(payload["seed"], 2)

    def test_unknown_names_select_nothing(self):
        self.assertEqual(run_checks(0, only=("nope",)).records, ())


class ReferenceSeriesTests(unittest.TestCase):
    def test_noisy_series_differs_from_clean(self):
        clean = jls_series()
        noisy = jls_series(0.01, verify.stream(0, "jls.0"))

        residual = np.log(noisy.prices) - np.log(clean.prices)
        self.assertAlmostEqual(float(np.std(residual)), 0.01, delta=0.002)


if __name__ == "__main__":
    unittest.main()
