"""Smoothing parameter selection by generalized cross validation and its mapping to
   the tuning prior hyper-parameter.

   For the Gaussian family the smoother is A_lam = Phi M^-1 (1/n) Phi' with
   M = (1/n) Phi' Phi + lam Gamma. Other families score the working response
   z = Phi c + W^-1 (y - Adot(Phi c)) of the converged Newton fit with weights W,
   the usual iteratively reweighted least squares surrogate.
"""

import logging
import math
import numpy as np
from scipy import linalg
from .family.gaussian import GaussianFamily
from .spline import FitOptions, fit_penalized_mle
from .utils.errors import DegenerateScoreError, DomainError, FitError, SelectionError

logger = logging.getLogger("SplineBayes-Tuning")

# relative size below which tr(I - A_lam) counts as zero
DEGENERATE_TRACE = 1e-10

# lower bound on the IRLS weights Addot(eta), keeps the working response finite near separation
WEIGHT_FLOOR = 1e-10


def default_lambda_grid(size=40, low=1e-8, high=10.0):
    '''Logarithmically spaced smoothing parameters, ascending.'''
    return np.logspace(math.log10(low), math.log10(high), size)


def _score(phi, z, weights, gamma, lam):
    n = phi.shape[0]
    gram = phi.T @ (weights[:, None] * phi) / n
    system = gram.copy()
    system[np.diag_indices_from(system)] += lam * gamma
    factor = linalg.cho_factor(system)
    coeffs = linalg.cho_solve(factor, phi.T @ (weights * z) / n)
    trace = np.trace(linalg.cho_solve(factor, gram))
    residual_df = 1.0 - trace / n
    if residual_df <= DEGENERATE_TRACE:
        raise DegenerateScoreError("tr(I - A_lam) vanishes at lam={:.3g}".format(lam))
    rss = np.mean(weights * np.square(z - phi @ coeffs))
    return rss / residual_df ** 2


def gcv_score(model, es, data, lam, design=None, opts=None):
    '''GCV score at one smoothing parameter.

       Args:
           model (ExpFamilyModel): the exponential family.
           es (EigenSystem): the eigen-system.
           data (Dataset): observations.
           lam (float): positive smoothing parameter.
           design (ndarray, optional): precomputed es.design(data.x).
           opts (FitOptions, optional): Newton options for non-Gaussian families.

       Returns:
           float: the score, raises DegenerateScoreError in the interpolation regime.
    '''
    assert lam > 0, "lambda should be positive"
    phi = es.design(data.x) if design is None else design
    if isinstance(model, GaussianFamily):
        return _score(phi, data.y, np.ones(data.n), es.gamma, lam)
    fit = fit_penalized_mle(model, es, data, lam, opts=opts, design=phi)
    working, weights = working_response(model, phi @ fit.coeffs, data.y)
    return _score(phi, working, weights, es.gamma, lam)


def working_response(model, eta, y):
    '''IRLS working response and weights at the linear predictor eta.

       Weights are floored at WEIGHT_FLOOR so that fitted probabilities or means
       collapsing to the boundary give a finite, heavily downweighted residual.

       Returns:
           tuple: (eta + (y - Adot(eta)) / w, w) with w = max(Addot(eta), WEIGHT_FLOOR).
    '''
    weights = np.maximum(model.Addot(eta), WEIGHT_FLOOR)
    return eta + (y - model.Adot(eta)) / weights, weights


def gcv_curve(model, es, data, lam_grid=None, opts=None):
    '''GCV scores over a grid of smoothing parameters.

       Degenerate grid points and non-Gaussian fits that fail get a nan score.

       Args:
           model (ExpFamilyModel): the exponential family.
           es (EigenSystem): the eigen-system.
           data (Dataset): observations.
           lam_grid (array like, optional): positive ascending grid, default_lambda_grid().
           opts (FitOptions, optional): Newton options for non-Gaussian families.

       Returns:
           list: (lam, score) pairs in grid order.
    '''
    lam_grid = default_lambda_grid() if lam_grid is None else np.asarray(lam_grid, dtype=float)
    assert lam_grid.size > 0 and np.all(lam_grid > 0), "lambda grid should be positive"
    assert np.all(np.diff(lam_grid) > 0), "lambda grid should be sorted ascending"
    phi = es.design(data.x)
    curve = []
    for lam in lam_grid:
        try:
            score = gcv_score(model, es, data, lam, design=phi, opts=opts)
        except (DegenerateScoreError, FitError) as e:
            logger.warning('GCV score skipped at lam=%.3g: %s', lam, e)
            score = float('nan')
        if not np.isfinite(score):
            if not np.isnan(score):
                logger.warning('GCV score skipped at lam=%.3g: not finite', lam)
            score = float('nan')
        curve.append((float(lam), float(score)))
    return curve


def select_h(curve, m):
    '''Pick the GCV minimizer, ties go to the larger lambda.

       Args:
           curve (list): (lam, score) pairs from gcv_curve.
           m (int): Sobolev order.

       Returns:
           tuple: (lam_gcv, h_gcv = lam_gcv^(1/(2m))).
    '''
    valid = [(lam, score) for lam, score in curve if np.isfinite(score)]
    if not valid:
        raise SelectionError("no valid GCV score among {} grid points".format(len(curve)))
    best = min(score for _, score in valid)
    lam_gcv = max(lam for lam, score in valid if score == best)
    h_gcv = lam_gcv ** (1.0 / (2 * m))
    logger.debug('GCV selected lam=%.4g, h=%.4g', lam_gcv, h_gcv)
    return lam_gcv, h_gcv


def prior_h_from_gcv(h_gcv, m, beta, scale=1.0):
    '''Map the GCV bandwidth to the tuning prior: h = scale h_gcv^((2m+1)/(2m+beta)).

       The map only fixes the rate n^(-1/(2m+beta)); scale is the constant in front of
       it and leaves the exponent untouched.

       Args:
           h_gcv (float): GCV bandwidth in (0, 1).
           m (int): Sobolev order.
           beta (float): prior regularity parameter.
           scale (float): positive constant factor, 1 by default.

       Returns:
           tuple: (h, lam = h^(2m)).
    '''
    if not 0.0 < h_gcv < 1.0:
        raise DomainError("h_gcv should lie in (0, 1), got {}".format(h_gcv))
    if not scale > 0:
        raise DomainError("h scale should be positive, got {}".format(scale))
    h = scale * h_gcv ** ((2.0 * m + 1.0) / (2.0 * m + beta))
    return h, h ** (2 * m)


def tune_lambda(model, es, data, m, beta, lam_grid=None, opts=None, h_scale=1.0):
    '''GCV selection followed by the prior mapping, returns (lam_gcv, h_gcv, h, lam).'''
    lam_gcv, h_gcv = select_h(gcv_curve(model, es, data, lam_grid, opts), m)
    h, lam = prior_h_from_gcv(h_gcv, m, beta, h_scale)
    return lam_gcv, h_gcv, h, lam
