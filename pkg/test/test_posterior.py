import unittest
import numpy as np
from numpy.testing import assert_allclose
from scipy.stats import norm as std_normal

from splinebayes.eigen import free_beam_eigensystem
from splinebayes.family import get_family
from splinebayes.posterior import (PosteriorGP, build_posterior, build_prior, log_rn_derivative,
                                   rn_tail_bound, sample_coefficients, sample_posterior, sample_prior)
from splinebayes.simulation import true_function_beta_mix
from splinebayes.spline import Dataset, fit_penalized_mle
from splinebayes.utils.errors import DomainError


def gaussian_fit(es, n=200, lam=1e-4, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(size=n)
    data = Dataset(x, true_function_beta_mix(x) + rng.standard_normal(n))
    return fit_penalized_mle(get_family('gaussian'), es, data, lam)


class TestTuningPrior(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.es = free_beam_eigensystem(30)

    def test_branches(self):
        n, lam, sigma2 = 100, 1e-3, [2.0, 0.5]
        prior = build_prior(self.es, 2, 2.0, sigma2, lam, n)
        assert_allclose(prior.prior_var[:2], np.array(sigma2) / (1 + n * lam * np.array(sigma2)))
        rho = self.es.rho[2:]
        assert_allclose(prior.prior_var[2:], 1.0 / (rho ** 1.5 + n * lam * rho))
        self.assertTrue(np.all(prior.tau2 > 0))
        self.assertTrue(np.all(prior.prior_var <= 1.0 / prior.tau2))

    def test_base_prior(self):
        prior = build_prior(self.es, 2, 2.0, [1.0, 1.0], 0.0, 100)
        assert_allclose(prior.prior_var, 1.0 / prior.tau2)

    def test_roughness_expectation(self):
        prior = build_prior(self.es, 2, 2.0, [1.0, 1.0], 1e-3, 100)
        direct = 0.0
        for nu in range(2, self.es.N):
            direct += self.es.rho[nu] / (self.es.rho[nu] ** 1.5 + 100 * 1e-3 * self.es.rho[nu])
        self.assertAlmostEqual(np.sum(self.es.rho[2:] * prior.prior_var[2:]), direct, places=12)
        self.assertTrue(np.isfinite(direct))

    def test_beta_domain(self):
        with self.assertRaises(DomainError):
            build_prior(self.es, 2, 1.0, [1.0, 1.0], 1e-3, 100)

    def test_tau_scale(self):
        n, lam = 512, 1e-6
        literal = build_prior(self.es, 2, 2.0, [1.0, 1.0], lam, n)
        scaled = build_prior(self.es, 2, 2.0, [1.0, 1.0], lam, n, tau_scale=1e-8)
        assert_allclose(scaled.tau2[:2], literal.tau2[:2])
        assert_allclose(scaled.tau2[2:], 1e-8 * literal.tau2[2:])
        self.assertTrue(np.all(scaled.prior_var[2:] > literal.prior_var[2:]))
        with self.assertRaises(DomainError):
            build_prior(self.es, 2, 2.0, [1.0, 1.0], lam, n, tau_scale=0.0)

    def test_literal_tau_swamps_data(self):
        # rho_3^(3/2) is about 1.1e4, far above n = 512
        n = 512
        fhat = np.ones(self.es.N)
        literal = build_prior(self.es, 2, 2.0, [1.0, 1.0], 0.0, n)
        post = PosteriorGP(self.es, fhat, literal.tau2, n, 0.0)
        self.assertLess(post.a[2], 0.05)
        scaled = build_prior(self.es, 2, 2.0, [1.0, 1.0], 0.0, n, tau_scale=1e-10)
        post = PosteriorGP(self.es, fhat, scaled.tau2, n, 0.0)
        self.assertGreater(post.a[2], 0.999)

    def test_prior_paths(self):
        prior = build_prior(self.es, 2, 2.0, [1.0, 1.0], 0.0, 100)
        grid = np.array([0.25, 0.5])
        paths = sample_prior(prior, np.random.default_rng(1), grid, size=20000)
        self.assertEqual(paths.shape, (20000, 2))
        expected = np.square(self.es.design(grid)) @ prior.prior_var
        assert_allclose(np.var(paths, axis=0), expected, rtol=0.05)


class TestPosterior(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.es = free_beam_eigensystem(30)
        cls.fit = gaussian_fit(cls.es)
        cls.prior = build_prior(cls.es, 2, 2.0, [1.0, 1.0], cls.fit.lam, 200)
        cls.post = build_posterior(cls.es, cls.fit, cls.prior, 200)

    def test_formulas(self):
        es2 = free_beam_eigensystem(2)
        post = PosteriorGP(es2, [1.0, 2.0], [1.0, 0.0], 100, 0.0)
        self.assertAlmostEqual(post.a[0], 100.0 / 101.0)
        self.assertEqual(post.a[1], 1.0)
        self.assertAlmostEqual(post.b[1], 0.1)
        assert_allclose(post.center, post.a * np.array([1.0, 2.0]))

    def test_conjugacy_identity(self):
        post = self.post
        precision = 200 * (1 + post.lam * post.gamma) + self.prior.tau2
        assert_allclose(post.b ** -2, precision, rtol=1e-12)
        self.assertTrue(np.all((post.a > 0) & (post.a < 1)))
        assert_allclose(post.center, post.a * self.fit.coeffs)

    def test_large_n_shrinkage(self):
        n = 10 ** 6
        prior = build_prior(self.es, 2, 2.0, [1.0, 1.0], 1.0, n)
        post = PosteriorGP(self.es, np.zeros(self.es.N), prior.tau2, n, 1.0)
        self.assertTrue(np.all(1 - post.a[:5] <= 1e-3))

    def test_mismatched_lambda(self):
        prior = build_prior(self.es, 2, 2.0, [1.0, 1.0], 2 * self.fit.lam, 200)
        with self.assertRaises(AssertionError):
            build_posterior(self.es, self.fit, prior, 200)

    def test_sampler_moments(self):
        draws = 100000
        coeffs = sample_coefficients(self.post, np.random.default_rng(2), draws)
        b = self.post.b
        mean_err = np.abs(coeffs.mean(axis=0) - self.post.center)
        self.assertTrue(np.all(mean_err <= 4 * b / np.sqrt(draws)))
        var_err = np.abs(coeffs.var(axis=0, ddof=1) - b ** 2)
        self.assertTrue(np.all(var_err <= 4 * b ** 2 * np.sqrt(2.0 / (draws - 1))))

    def test_determinism(self):
        grid = np.linspace(0, 1, 11)
        a = sample_posterior(self.post, 7, grid, size=3)
        b = sample_posterior(self.post, 7, grid, size=3)
        assert_allclose(a, b, rtol=0, atol=0)
        coeffs = sample_coefficients(self.post, 7, 3)
        assert_allclose(a, coeffs @ self.es.design(grid).T, rtol=0, atol=0)

    def test_zero_scale(self):
        post = PosteriorGP(self.es, self.fit.coeffs, self.prior.tau2, 200, self.fit.lam)
        post.b = np.zeros(self.es.N)
        grid = np.linspace(0, 1, 5)
        paths = sample_posterior(post, np.random.default_rng(0), grid, size=2)
        assert_allclose(paths, np.tile(self.es.design(grid) @ post.center, (2, 1)))


class TestRadonNikodym(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.es = free_beam_eigensystem(20)

    def test_base_prior(self):
        prior = build_prior(self.es, 2, 2.0, [1.0, 1.0], 0.0, 50)
        self.assertEqual(log_rn_derivative(prior, np.ones(20), 50, 0.0), 0.0)

    def test_density_ratio(self):
        n, lam = 100, 1e-3
        prior = build_prior(self.es, 2, 2.0, [1.5, 0.5], lam, n)
        rng = np.random.default_rng(9)
        for _ in range(5):
            coeffs = rng.standard_normal(20) * np.sqrt(prior.prior_var)
            expected = np.sum(std_normal.logpdf(coeffs, scale=np.sqrt(prior.prior_var))
                              - std_normal.logpdf(coeffs, scale=np.sqrt(1.0 / prior.tau2)))
            self.assertAlmostEqual(log_rn_derivative(prior, coeffs, n, lam), expected, delta=1e-8)

    def test_density_ratio_scaled(self):
        n, lam = 100, 1e-3
        prior = build_prior(self.es, 2, 2.0, [1.0, 1.0], lam, n, tau_scale=1e-4)
        coeffs = np.random.default_rng(10).standard_normal(20) * np.sqrt(prior.prior_var)
        expected = np.sum(std_normal.logpdf(coeffs, scale=np.sqrt(prior.prior_var))
                          - std_normal.logpdf(coeffs, scale=np.sqrt(1.0 / prior.tau2)))
        self.assertAlmostEqual(log_rn_derivative(prior, coeffs, n, lam), expected, delta=1e-8)

    def test_decreasing_in_penalty(self):
        prior = build_prior(self.es, 2, 2.0, [1.0, 1.0], 1e-3, 100)
        values = [log_rn_derivative(prior, s * np.ones(20) / self.es.gamma, 100, 1e-3)
                  for s in (0.0, 0.5, 1.0, 2.0)]
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_tail_bound(self):
        small = build_prior(free_beam_eigensystem(20), 2, 2.0, [1.0, 1.0], 1e-3, 100)
        large = build_prior(free_beam_eigensystem(80), 2, 2.0, [1.0, 1.0], 1e-3, 100)
        self.assertGreater(rn_tail_bound(small, 100, 1e-3), rn_tail_bound(large, 100, 1e-3))
        self.assertEqual(rn_tail_bound(small, 100, 0.0), 0.0)


if __name__ == "__main__":
    unittest.main()
