"""The tuning prior and the Gaussian pseudo-posterior.

   In coefficient space the base prior G is a product of N(0, tau_nu^-2), with
   tau_nu^2 = sigma_nu^-2 on the null space (nu <= m) and kappa rho_nu^(1 + beta/(2m))
   beyond, kappa being the tau scale (1 unless configured). The tuning prior G_lam reweights G by exp(-(n lam/2) J(f)), which adds
   n lam gamma_nu to every precision. Tilting G by exp(-(n/2)||f - fhat||^2) with the
   lam-norm gives the pseudo-posterior W: independent coordinates with mean
   a_nu fhat_nu and standard deviation b_nu.
"""

import logging
import numpy as np
from .utils.errors import DomainError
from .utils.utility import as_generator

logger = logging.getLogger("SplineBayes-Posterior")


class TuningPrior(object):
    """Gaussian prior G_lam in coefficient space.

    Args:
        es (EigenSystem): the eigen-system.
        m (int): Sobolev order.
        beta (float): regularity parameter, larger than 1.
        sigma2 (array like): null space variances sigma_1^2..sigma_m^2.
        lam (float): nonnegative smoothing parameter, 0 gives the base prior G.
        n (int): sample size.
        tau_scale (float): positive factor kappa of tau_nu^2 beyond the null space.
    """
    def __init__(self, es, m, beta, sigma2, lam, n, tau_scale=1.0):
        sigma2 = np.asarray(sigma2, dtype=float)
        assert sigma2.shape == (m,) and np.all(sigma2 > 0), "need m positive null space variances"
        assert lam >= 0 and n >= 1 and tau_scale > 0
        tau2 = np.empty(es.N)
        tau2[:m] = 1.0 / sigma2
        tau2[m:] = tau_scale * es.rho[m:] ** (1.0 + beta / (2.0 * m))
        self.es = es
        self.m = int(m)
        self.beta = float(beta)
        self.sigma2 = sigma2
        self.lam = float(lam)
        self.n = int(n)
        self.tau_scale = float(tau_scale)
        self.tau2 = tau2
        self.prior_var = 1.0 / (tau2 + n * lam * es.gamma)
        for arr in (self.sigma2, self.tau2, self.prior_var):
            arr.flags.writeable = False

    def __repr__(self):
        return 'TuningPrior(m={}, beta={}, lam={:.4g}, n={})'.format(self.m, self.beta, self.lam, self.n)


class PosteriorGP(object):
    """Pseudo-posterior W = ftilde + W_n.

    Args:
        es (EigenSystem): the eigen-system.
        fhat (ndarray): smoothing spline coefficients.
        tau2 (ndarray): base prior precisions.
        n (int): sample size.
        lam (float): smoothing parameter.
    """
    def __init__(self, es, fhat, tau2, n, lam):
        data_precision = n * (1.0 + lam * es.gamma)
        precision = tau2 + data_precision
        self.es = es
        self.n = int(n)
        self.lam = float(lam)
        self.tau2 = np.array(tau2, dtype=float)
        self.fhat = np.array(fhat, dtype=float)
        self.a = data_precision / precision
        self.b = 1.0 / np.sqrt(precision)
        self.center = self.a * self.fhat
        for arr in (self.tau2, self.fhat, self.a, self.b, self.center):
            arr.flags.writeable = False

    @property
    def gamma(self):
        return self.es.gamma

    def __repr__(self):
        return 'PosteriorGP(N={}, n={}, lam={:.4g})'.format(self.es.N, self.n, self.lam)


def build_prior(es, m, beta, sigma2, lam, n, tau_scale=1.0):
    '''Build the tuning prior, beta must exceed 1 and the tau scale must be positive.'''
    if beta <= 1:
        raise DomainError("beta should be larger than 1, got {}".format(beta))
    if not tau_scale > 0:
        raise DomainError("tau_scale should be positive, got {}".format(tau_scale))
    assert es.m == m, "eigen-system order {} differs from m={}".format(es.m, m)
    return TuningPrior(es, m, beta, sigma2, lam, n, tau_scale)


def build_posterior(es, fit, prior, n):
    '''Pseudo-posterior with a = n(1+lam gamma)/(tau^2 + n(1+lam gamma)) and b = precision^-1/2.'''
    assert prior.es is es, "fit and prior must share the eigen-system"
    assert np.isclose(fit.lam, prior.lam, rtol=1e-12, atol=0.0), "fit and prior must share lambda"
    post = PosteriorGP(es, fit.coeffs, prior.tau2, n, fit.lam)
    logger.debug('%r, a_1=%.6f, b_1=%.4g', post, post.a[0], post.b[0])
    return post


def sample_coefficients(post, rng, size=1):
    '''Draw coefficient vectors ftilde_nu + b_nu eta_nu, shape (size, N).'''
    rng = as_generator(rng)
    eta = rng.standard_normal(size=(size, post.es.N))
    return post.center + post.b * eta


def sample_posterior(post, rng, grid, size=1):
    '''Posterior paths on a grid, shape (size, len(grid)).

       Paths use the same draws as sample_coefficients with an equal random source.
    '''
    return sample_coefficients(post, rng, size) @ post.es.design(grid).T


def sample_prior(prior, rng, grid, size=1):
    '''Paths of the tuning prior G_lam (the base prior G when lam = 0).'''
    rng = as_generator(rng)
    coeffs = rng.standard_normal(size=(size, prior.es.N)) * np.sqrt(prior.prior_var)
    return coeffs @ prior.es.design(grid).T


def rn_tail_bound(prior, n, lam):
    '''Bound on the log-sum terms beyond the truncation level.

       Uses log(1+x) <= x and rho_nu >= rho_N (nu/N)^(2m), so the tail is at most
       (n lam / 2 kappa) rho_N^(-beta/(2m)) N / (beta - 1).
    '''
    es, m, beta = prior.es, prior.m, prior.beta
    if lam == 0 or es.N <= m:
        return 0.0
    tail = 0.5 * n * lam * es.rho[-1] ** (-beta / (2.0 * m)) * es.N / (beta - 1.0)
    return tail / prior.tau_scale


def log_rn_derivative(prior, coeffs, n, lam):
    '''log dG_lam/dG at the coefficient vector coeffs.

       sum_{nu<=m} log(1 + n lam sigma_nu^2)/2 + sum_{nu>m} log(1 + n lam rho_nu^(-beta/(2m)) / kappa)/2
       - (n lam / 2) sum_nu gamma_nu f_nu^2, truncated at N; the quadratic term is J(f) plus
       the null space coordinates, matching the prior variances. rn_tail_bound gives the error bar.
    '''
    assert lam >= 0
    if lam == 0:
        return 0.0
    es = prior.es
    coeffs = np.zeros(es.N) if coeffs is None else np.asarray(coeffs, dtype=float)
    # n lam gamma_nu / tau_nu^2 reduces to n lam sigma_nu^2 on the null space
    log_terms = np.log1p(n * lam * es.gamma / prior.tau2)
    k = coeffs.size
    penalty = np.dot(es.gamma[:k] * coeffs, coeffs)
    logger.debug('log RN derivative tail bound %.3e', rn_tail_bound(prior, n, lam))
    return float(0.5 * np.sum(log_terms) - 0.5 * n * lam * penalty)
