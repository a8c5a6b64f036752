import os
import unittest
from unittest import mock
import numpy as np
from numpy.testing import assert_allclose

from splinebayes.eigen import build_eigensystem, free_beam_eigensystem
from splinebayes.family import get_family
from splinebayes.simulation import SimConfig, generate_dataset, true_function_beta_mix
from splinebayes.spline import Dataset
from splinebayes.tuning import (WEIGHT_FLOOR, default_lambda_grid, gcv_curve, gcv_score, prior_h_from_gcv,
                                select_h, tune_lambda, working_response)
from splinebayes.utils.errors import DegenerateScoreError, DomainError, SelectionError

SLOW = os.environ.get('SPLINEBAYES_SLOW_TESTS')


def gaussian_data(n, seed, truth=true_function_beta_mix):
    rng = np.random.default_rng(seed)
    x = rng.uniform(size=n)
    return Dataset(x, truth(x) + rng.standard_normal(n))


class TestGCVScore(unittest.TestCase):

    def setUp(self):
        self.model = get_family('gaussian')

    def test_default_grid(self):
        grid = default_lambda_grid()
        self.assertEqual(grid.size, 40)
        assert_allclose([grid[0], grid[-1]], [1e-8, 10.0])

    def test_brute_force(self):
        es = free_beam_eigensystem(10)
        data = gaussian_data(15, 1)
        n = data.n
        phi = es.design(data.x)
        for lam in (1e-6, 1e-4, 1e-2):
            smoother = phi @ np.linalg.solve(phi.T @ phi / n + lam * np.diag(es.gamma), phi.T / n)
            residual = data.y - smoother @ data.y
            expected = np.mean(residual ** 2) / (np.trace(np.eye(n) - smoother) / n) ** 2
            self.assertAlmostEqual(gcv_score(self.model, es, data, lam) / expected, 1.0, places=8)

    def test_large_lambda_limit(self):
        es = free_beam_eigensystem(20)
        data = gaussian_data(100, 2)
        score = gcv_score(self.model, es, data, 1e12)
        assert_allclose(score, np.mean(data.y ** 2), rtol=1e-6)

    def test_continuity(self):
        es = free_beam_eigensystem(30)
        data = gaussian_data(200, 3)
        grid = 1e-6 * 1.1 ** np.arange(0, 97)
        scores = np.array([s for _, s in gcv_curve(self.model, es, data, grid)])
        self.assertTrue(np.all(np.isfinite(scores)))
        self.assertTrue(np.all(np.abs(np.diff(scores)) / scores[:-1] < 0.2))

    def test_degenerate(self):
        es = free_beam_eigensystem(4)
        data = Dataset([0.1, 0.4, 0.6, 0.9], [1.0, -1.0, 0.5, 2.0])
        with self.assertRaises(DegenerateScoreError):
            gcv_score(self.model, es, data, 1e-18)
        curve = gcv_curve(self.model, es, data, [1e-18, 1e-2])
        self.assertTrue(np.isnan(curve[0][1]))
        self.assertEqual(select_h(curve, 2)[0], 1e-2)

    def test_irls_surrogate(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(size=300)
        model = get_family('poisson')
        data = Dataset(x, model.sample_response(np.sin(2 * np.pi * x), rng))
        es = free_beam_eigensystem(20)
        curve = gcv_curve(model, es, data, np.logspace(-7, -1, 7))
        scores = np.array([s for _, s in curve])
        self.assertTrue(np.all(np.isfinite(scores)) and np.all(scores > 0))

    def test_working_response_near_separation(self):
        model = get_family('binary')
        eta = np.array([-60.0, -40.0, 0.0, 40.0, 60.0])
        y = np.array([1.0, 0.0, 1.0, 1.0, 0.0])
        working, weights = working_response(model, eta, y)
        self.assertTrue(np.all(weights >= WEIGHT_FLOOR))
        self.assertEqual(weights[2], 0.25)
        self.assertEqual(working[2], 2.0)
        with np.errstate(over='raise'):
            rss = np.sum(weights * np.square(working - eta))
        self.assertTrue(np.isfinite(rss))

    def test_non_finite_score(self):
        es = free_beam_eigensystem(10)
        data = gaussian_data(50, 6)
        scores = iter([float('inf'), 2.0, 1.0])
        with mock.patch('splinebayes.tuning.gcv_score', side_effect=lambda *a, **k: next(scores)):
            curve = gcv_curve(self.model, es, data, [1e-4, 1e-3, 1e-2])
        self.assertTrue(np.isnan(curve[0][1]))
        self.assertEqual(select_h(curve, 2)[0], 1e-2)


class TestSelection(unittest.TestCase):

    def test_single_point(self):
        lam, h = select_h([(0.0625, 3.0)], 2)
        self.assertEqual(lam, 0.0625)
        self.assertAlmostEqual(h, 0.5)

    def test_unimodal(self):
        grid = np.logspace(-6, 0, 13)
        curve = [(lam, (np.log10(lam) + 3) ** 2 + 1) for lam in grid]
        self.assertAlmostEqual(select_h(curve, 2)[0], 1e-3)

    def test_ties_prefer_larger_lambda(self):
        curve = [(1e-4, 1.0), (1e-3, 0.5), (1e-2, 0.5), (1e-1, 2.0)]
        self.assertEqual(select_h(curve, 2)[0], 1e-2)

    def test_all_degenerate(self):
        with self.assertRaises(SelectionError):
            select_h([(1e-3, float('nan')), (1e-2, float('nan'))], 2)


class TestPriorMapping(unittest.TestCase):

    def test_example(self):
        h, lam = prior_h_from_gcv(0.1, 2, 2.0)
        self.assertAlmostEqual(h, 0.146780, places=6)
        self.assertAlmostEqual(lam ** 0.25, h, places=14)

    def test_identity_exponent(self):
        self.assertAlmostEqual(prior_h_from_gcv(0.3, 2, 1.0)[0], 0.3, places=14)

    def test_monotone(self):
        hs = [prior_h_from_gcv(g, 2, 2.0)[0] for g in (0.05, 0.1, 0.3, 0.9)]
        self.assertTrue(np.all(np.diff(hs) > 0))

    def test_domain(self):
        for bad in (0.0, 1.0, 1.5):
            with self.assertRaises(DomainError):
                prior_h_from_gcv(bad, 2, 2.0)

    def test_tune_lambda(self):
        es = free_beam_eigensystem(30)
        data = gaussian_data(256, 5)
        lam_gcv, h_gcv, h, lam = tune_lambda(get_family('gaussian'), es, data, 2, 2.0)
        self.assertAlmostEqual(h_gcv, lam_gcv ** 0.25)
        self.assertAlmostEqual(h, h_gcv ** (5.0 / 6.0))
        self.assertAlmostEqual(lam, h ** 4)
        self.assertGreater(h, h_gcv)
        scaled = tune_lambda(get_family('gaussian'), es, data, 2, 2.0, h_scale=0.5)
        self.assertEqual(scaled[:2], (lam_gcv, h_gcv))
        self.assertAlmostEqual(scaled[2], 0.5 * h)
        self.assertAlmostEqual(scaled[3], lam / 16.0)

    def test_scale(self):
        h, lam = prior_h_from_gcv(0.1, 2, 2.0, scale=0.4)
        self.assertAlmostEqual(h, 0.4 * 0.1 ** (5.0 / 6.0), places=14)
        self.assertAlmostEqual(lam, h ** 4, places=14)
        for bad in (0.0, -1.0):
            with self.assertRaises(DomainError):
                prior_h_from_gcv(0.1, 2, 2.0, scale=bad)

    def test_top_of_default_grid(self):
        # lam = 10 gives h_gcv = 10^(1/4) > 1, outside the domain of the prior map
        es = free_beam_eigensystem(10)
        data = gaussian_data(40, 7, truth=np.zeros_like)
        with self.assertRaises(DomainError):
            tune_lambda(get_family('gaussian'), es, data, 2, 2.0, lam_grid=[10.0])


@unittest.skipUnless(SLOW, "set SPLINEBAYES_SLOW_TESTS=1 to run Monte Carlo acceptance tests")
class TestGCVAcceptance(unittest.TestCase):

    def test_pure_noise_shrinks(self):
        es = free_beam_eigensystem(50)
        model = get_family('gaussian')
        grid = default_lambda_grid()
        largest = 0
        for seed in range(200):
            data = gaussian_data(128, 1000 + seed, truth=np.zeros_like)
            largest += int(select_h(gcv_curve(model, es, data, grid), 2)[0] == grid[-1])
        self.assertGreaterEqual(largest, 160)

    def test_bandwidth_rate(self):
        config = SimConfig()
        model = get_family('gaussian')
        ns = 2 ** np.arange(7, 12)
        logs = []
        for n in ns:
            es = build_eigensystem(2, 50)
            hs = []
            for rep in range(20):
                data = generate_dataset(config, int(n), np.random.default_rng([int(n), rep]))
                hs.append(select_h(gcv_curve(model, es, data), 2)[1])
            logs.append(np.mean(np.log(hs)))
        slope = np.polyfit(np.log(ns), logs, 1)[0]
        self.assertAlmostEqual(slope, -0.2, delta=0.07)


if __name__ == "__main__":
    unittest.main()
