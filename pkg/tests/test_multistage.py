import os
import unittest

import numpy as np
import scipy.optimize

from tktp.config import RunConfig
from tktp.errors import ArgumentError, SizeError
from tktp.multistage import (THETA_MAX, MamleCurve, RejectBoundary,
                             discordance_increments, exceedances,
                             generate_reject_boundary, select, stopping_point,
                             stopping_stage, taupath_mamle, tktp,
                             truncated_geom_log_likelihood,
                             truncated_geom_mle)
from tktp.rank import Sample
from tktp.taupath import fastbcs2
from tktp.utils import stream

SLOW = os.environ.get("TKTP_SLOW") == "1"
WORKED_TAU = [1, 1, 1.0 / 3, -1.0 / 3, -0.4]
GRID = np.arange(1, 10000) * 1e-4


def grid_log_likelihood(v, m):
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    r = GRID[:, None]
    return np.sum(np.log1p(-r) - np.log1p(-r ** m) + v * np.log(r), axis=1)


def grid_best(v, m):
    return float(grid_log_likelihood(v, m).max())


def mle_log_likelihood(theta, v, m):
    r = 1 - 1e-6 if theta == 0 else np.exp(-theta)
    return truncated_geom_log_likelihood(r, v, m)


class DiscordanceTest(unittest.TestCase):
    def test_worked_example(self):
        penalties = discordance_increments(WORKED_TAU)
        self.assertEqual(penalties.raw.tolist(), [0, 1, 3, 3])
        self.assertEqual(penalties.m.tolist(), [4, 3, 2, 1])
        self.assertEqual(penalties.v.tolist(), [0, 1, 1, 0])
        self.assertEqual(penalties.clamped.tolist(),
                         [False, False, True, True])
        self.assertEqual(penalties.total, 7)
        self.assertEqual(penalties.stages.tolist(), [2, 3, 4, 5])

    def test_totals_reconstruct_discordance(self):
        for seed in range(20):
            rng = stream(seed)
            r = fastbcs2(Sample(rng.permutation(30), rng.permutation(30)))
            total = (1 - r.tau[-1]) / 2 * 30 * 29 / 2
            self.assertAlmostEqual(discordance_increments(r).total, total)

    def test_concordant_path(self):
        penalties = discordance_increments(np.ones(8))
        self.assertTrue(np.all(penalties.v == 0))

    def test_full_discordance_at_stage_three(self):
        self.assertEqual(discordance_increments([1, -1, -1]).raw.tolist(),
                         [1, 2])

    def test_increasing_tau(self):
        with self.assertRaises(ArgumentError):
            discordance_increments([1, 0.2, 0.5])

    def test_out_of_range(self):
        with self.assertRaises(ArgumentError):
            discordance_increments([1, 1.5, 1])

    def test_window(self):
        penalties = discordance_increments(WORKED_TAU)
        v, m = penalties.window(5, 3)
        self.assertEqual(v.tolist(), [1, 1, 0])
        self.assertEqual(m.tolist(), [3, 2, 1])
        with self.assertRaises(ArgumentError):
            penalties.window(3, 3)


class MleTest(unittest.TestCase):
    def test_zero_penalties(self):
        self.assertEqual(truncated_geom_mle([0, 0, 0], [5, 4, 3]), THETA_MAX)

    def test_increasing_likelihood(self):
        self.assertEqual(truncated_geom_mle([1], [2]), 0.0)

    def test_grid_oracle(self):
        theta = truncated_geom_mle([1, 1, 1], [5, 5, 5])
        best = GRID[np.argmax(grid_log_likelihood([1, 1, 1], [5, 5, 5]))]
        self.assertAlmostEqual(theta, -np.log(best), delta=1e-3)

    def test_random_windows(self):
        count = 1000 if SLOW else 100
        rng = stream(17)
        for _ in range(count):
            w = int(rng.integers(1, 6))
            m = rng.integers(2, 21, w)
            v = rng.integers(0, m)
            theta = truncated_geom_mle(v, m)
            self.assertTrue(0 <= theta <= THETA_MAX)
            self.assertGreaterEqual(mle_log_likelihood(theta, v, m),
                                    grid_best(v, m) - 1e-6)

    def test_score_root(self):
        rng = stream(23)
        for _ in range(50):
            w = int(rng.integers(1, 6))
            m = rng.integers(5, 50, w)
            v = rng.integers(1, (m - 1) // 2)

            def score(r):
                expected = r / (1 - r) - m * r ** m / (1 - r ** m)
                return float(np.sum(expected - v))

            r = scipy.optimize.brentq(score, 1e-6, 1 - 1e-6, xtol=1e-14)
            self.assertAlmostEqual(truncated_geom_mle(v, m), -np.log(r),
                                   places=6)

    def test_outside_support(self):
        with self.assertRaises(ArgumentError):
            truncated_geom_mle([3], [3])
        with self.assertRaises(ArgumentError):
            truncated_geom_mle([-1], [3])

    def test_empty(self):
        with self.assertRaises(SizeError):
            truncated_geom_mle([], [])


class MamleTest(unittest.TestCase):
    def test_concordant_path(self):
        curve = taupath_mamle(np.ones(12), 3)
        self.assertEqual(curve.stages.tolist(), list(range(4, 13)))
        self.assertTrue(np.all(curve.theta == THETA_MAX))

    def test_worked_example(self):
        curve = taupath_mamle(WORKED_TAU, 3)
        self.assertEqual(curve.stages.tolist(), [4, 5])
        self.assertAlmostEqual(curve.at(5),
                               truncated_geom_mle([1, 1, 0], [3, 2, 1]))
        self.assertAlmostEqual(curve.at(4),
                               truncated_geom_mle([0, 1, 1], [4, 3, 2]))
        with self.assertRaises(ArgumentError):
            curve.at(3)

    def test_window_too_wide(self):
        with self.assertRaises(ArgumentError):
            taupath_mamle(WORKED_TAU, 5)

    def test_null_curves_decrease(self):
        n, window = (500, 5) if SLOW else (60, 5)
        count = 1000 if SLOW else 100
        curves = []
        for seed in range(count):
            rng = stream(seed, 7)
            r = fastbcs2(Sample(rng.permutation(n), rng.permutation(n)))
            curves.append(taupath_mamle(r, window).theta)
        mean = np.mean(curves, axis=0)
        self.assertGreater(mean[:5].mean(), mean[-5:].mean())

    def test_shifted(self):
        curve = MamleCurve([1.0, 9.5, 4.0], 2, 5)
        self.assertEqual(curve.shifted(1).theta.tolist(), [2.0, 10.0, 5.0])


class BoundaryTest(unittest.TestCase):
    def test_single_replicate(self):
        boundary = generate_reject_boundary(12, 3, 1, 0.05, 4)
        rng = stream(4, 0)
        x = rng.permutation(12) + 1
        y = rng.permutation(12) + 1
        expected = taupath_mamle(fastbcs2(Sample(x, y)), 3).theta
        self.assertTrue(np.array_equal(boundary.q, expected))
        self.assertEqual(boundary.stages.tolist(), list(range(4, 13)))

    def test_seeded(self):
        left = generate_reject_boundary(15, 3, 20, 0.1, 9)
        right = generate_reject_boundary(15, 3, 20, 0.1, 9)
        self.assertEqual(left, right)

    def test_independent_of_workers(self):
        left = generate_reject_boundary(15, 3, 24, 0.1, 2)
        right = generate_reject_boundary(15, 3, 24, 0.1, 2, workers=2)
        self.assertTrue(np.array_equal(left.q, right.q))

    def test_arguments(self):
        with self.assertRaises(SizeError):
            generate_reject_boundary(5, 4, 10, 0.05, 0)
        with self.assertRaises(ArgumentError):
            generate_reject_boundary(10, 3, 0, 0.05, 0)
        with self.assertRaises(ArgumentError):
            generate_reject_boundary(10, 3, 10, 1.0, 0)

    def test_quantile_length(self):
        with self.assertRaises(ArgumentError):
            RejectBoundary(10, 3, 0.05, 10, [1, 2], 0)


class StoppingTest(unittest.TestCase):
    def test_trailing_exceedances(self):
        self.assertEqual(stopping_stage(range(1, 11), 100, 0.05), 6)

    def test_last_exceedance(self):
        self.assertEqual(stopping_stage([1, 2, 3], 20, 0.05), 3)

    def test_empty(self):
        self.assertEqual(stopping_stage([], 50, 0.05), 0)

    def test_member_of_exceedances(self):
        rng = stream(5)
        for _ in range(50):
            exceed = np.flatnonzero(rng.random(40) < 0.3) + 1
            stage = stopping_stage(exceed, 40, 0.05)
            self.assertTrue(stage == 0 and len(exceed) == 0 or
                            stage in exceed)

    def test_shift_keeps_exceedances(self):
        rng = stream(6)
        boundary = RejectBoundary(30, 3, 0.05, 10, rng.random(27) * 10, 0)
        curve = MamleCurve(rng.random(27) * 10, 3, 30)
        before = set(exceedances(curve, boundary).tolist())
        after = set(exceedances(curve.shifted(0.5), boundary).tolist())
        self.assertTrue(before <= after)

    def test_domain_mismatch(self):
        boundary = RejectBoundary(10, 3, 0.05, 10, np.zeros(7), 0)
        with self.assertRaises(ArgumentError):
            exceedances(MamleCurve(np.zeros(6), 4, 10), boundary)

    def test_stopping_point(self):
        boundary = RejectBoundary(10, 3, 0.05, 10, np.full(7, 5.0), 0)
        curve = MamleCurve([9, 9, 9, 1, 1, 1, 1], 3, 10)
        self.assertEqual(exceedances(curve, boundary).tolist(), [4, 5, 6])
        self.assertEqual(stopping_point(curve, boundary), 6)


class SelectionTest(unittest.TestCase):
    def setUp(self):
        x = np.arange(1, 11)
        self.r = fastbcs2(Sample(x, x))
        self.boundary = RejectBoundary(10, 3, 0.05, 10, np.full(7, 5.0), 0)
        self.curve = MamleCurve([9, 1, 9, 9, 1, 1, 1], 3, 10)

    def test_prefix(self):
        self.assertEqual(select(self.r, 6).tolist(), [1, 2, 3, 4, 5, 6])

    def test_exceedances(self):
        chosen = select(self.r, 6, self.curve, self.boundary, "exceedances")
        self.assertEqual(chosen.tolist(), [6, 7])

    def test_nothing_selected(self):
        self.assertEqual(len(select(self.r, 0)), 0)

    def test_unknown(self):
        with self.assertRaises(ArgumentError):
            select(self.r, 3, selection="suffix")


class TktpTest(unittest.TestCase):
    def test_concordant_sample(self):
        x = np.arange(100)
        config = RunConfig(window=3, nsim=40)
        result = tktp(Sample(x, x), config)
        self.assertGreater(result.k_hat, 90)
        self.assertEqual(len(result.selected), result.k_hat)
        self.assertEqual(result.selected.tolist(),
                         list(range(1, result.k_hat + 1)))

    def test_given_boundary(self):
        x = np.arange(30)
        boundary = RejectBoundary(30, 3, 0.05, 10, np.full(27, 11.0), 0)
        result = tktp(Sample(x, x), RunConfig(window=3), boundary=boundary)
        self.assertEqual(result.k_hat, 0)
        self.assertEqual(result.fraction, 0)
        self.assertEqual(result.as_dict()["selected"], [])

    def test_cache_is_asked(self):
        calls = []

        class Cache(object):
            def fetch_or_generate(self, n, config, policy=None):
                calls.append(n)
                return RejectBoundary(n, config.window, config.alpha,
                                      config.nsim, np.zeros(n - config.window),
                                      config.seed)

        s = Sample(np.arange(20), np.arange(20))
        result = tktp(s, RunConfig(window=3), cache=Cache())
        self.assertEqual(calls, [20])
        self.assertEqual(result.k_hat, 20)

    def test_small_sample(self):
        with self.assertRaises(SizeError):
            tktp(Sample([1, 2, 3], [1, 2, 3]), RunConfig(window=3))

    def test_independent_samples_mostly_select_nothing(self):
        config = RunConfig(window=5, nsim=1000)
        boundary = generate_reject_boundary(100, 5, 1000, 0.05, 0)
        k_hats = []
        for replicate in range(100):
            rng = stream(7, replicate)
            s = Sample(rng.permutation(100), rng.permutation(100))
            result = tktp(s, config, boundary=boundary)
            self.assertEqual(len(result.selected), result.k_hat)
            k_hats.append(result.k_hat)
        self.assertEqual(np.median(k_hats), 0)
        self.assertGreater(k_hats.count(0), 60)
