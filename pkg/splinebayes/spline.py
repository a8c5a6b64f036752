"""Smoothing spline estimate: the maximizer of the penalized likelihood

       l(f) = (1/n) sum [y_i f(x_i) - A(f(x_i))] - (lam/2) J(f, f)

   over the span of the first N eigenfunctions, where J(f, f) = sum gamma_nu f_nu^2.
"""

from collections import namedtuple
import logging
import numpy as np
from scipy import linalg
from sklearn.utils import check_array, check_consistent_length
from .utils.errors import ConditioningError, DomainError, NonConvergenceError, RangeError

logger = logging.getLogger("SplineBayes-Fit")

FitOptions = namedtuple('FitOptions', ['max_iter', 'tol', 'damping'])
FitOptions.__new__.__defaults__ = (100, 1e-9, 0.5)

MAX_HALVINGS = 30
MAX_CONDITION = 1e14
SEPARATION_TOL = 1e-6


class Dataset(object):
    """Observations (x_i, y_i), i = 1..n, with x_i in [0, 1].

    Args:
        x (array like): design points.
        y (array like): responses.
    """
    def __init__(self, x, y):
        x = check_array(x, ensure_2d=False, dtype=np.float64)
        y = check_array(y, ensure_2d=False, dtype=np.float64)
        check_consistent_length(x, y)
        assert x.ndim == 1 and y.ndim == 1, "x and y should be one dimensional"
        assert x.size > 0, "dataset should not be empty"
        assert np.all((x >= 0.0) & (x <= 1.0)), "design points should lie in [0, 1]"
        x.flags.writeable = False
        y.flags.writeable = False
        self.x = x
        self.y = y

    @property
    def n(self):
        return self.x.size

    def check_support(self, model):
        '''Raise DomainError unless every response is a possible value of the model.'''
        outside = ~np.asarray(model.in_support(self.y), dtype=bool)
        if np.any(outside):
            raise DomainError("{} responses outside the support of {}: {}".format(
                int(np.sum(outside)), model, model.response_support))

    def __len__(self):
        return self.n


class SplineFit(object):
    """Result of fit_penalized_mle.

    Args:
        coeffs (ndarray): fitted coefficients fhat_nu.
        lam (float): smoothing parameter.
        m (int): Sobolev order, h = lam^(1/(2m)).
        iterations (int): Newton iterations.
        grad_norm (float): final gradient norm.
        objective (float): penalized likelihood at the fit.
    """
    def __init__(self, coeffs, lam, m, iterations, grad_norm, objective):
        coeffs = np.array(coeffs, dtype=float)
        coeffs.flags.writeable = False
        self.coeffs = coeffs
        self.lam = float(lam)
        self.m = int(m)
        self.h = self.lam ** (1.0 / (2 * self.m))
        self.iterations = iterations
        self.grad_norm = grad_norm
        self.objective = objective

    def __repr__(self):
        return 'SplineFit(lam={:.4g}, h={:.4g}, iterations={}, grad_norm={:.3g})'.format(
            self.lam, self.h, self.iterations, self.grad_norm)


def _objective(model, phi, y, gamma, lam, coeffs):
    eta = phi @ coeffs
    model.check_range(eta)
    return np.mean(y * eta - model.A(eta)) - 0.5 * lam * np.dot(gamma * coeffs, coeffs)


def _penalized_hessian(model, phi, gamma, lam, eta):
    addot = model.Addot(eta)
    hess = phi.T @ (addot[:, None] * phi) / phi.shape[0]
    hess[np.diag_indices_from(hess)] += lam * gamma
    return hess


def _perfect_prediction(model, y, eta):
    # fitted means reproduce y while the curvature vanishes: eta is running off to infinity
    fitted = model.Adot(eta)
    return bool(np.all(np.abs(y - fitted) <= SEPARATION_TOL * (1.0 + np.abs(y)))
                and np.any(model.Addot(eta) <= SEPARATION_TOL))


def _newton(model, phi, y, gamma, lam, opts):
    '''Damped Newton ascent from zero, returns (coeffs, iterations, grad_norm, objective).'''
    n, N = phi.shape
    coeffs = np.zeros(N)
    objective = _objective(model, phi, y, gamma, lam, coeffs)
    for it in range(opts.max_iter + 1):
        eta = phi @ coeffs
        grad = phi.T @ (y - model.Adot(eta)) / n - lam * gamma * coeffs
        grad_norm = float(np.linalg.norm(grad))
        logger.debug('iteration %d: objective %.12g, gradient norm %.3e', it, objective, grad_norm)
        if grad_norm <= opts.tol * (1.0 + abs(objective)):
            if lam == 0 and _perfect_prediction(model, y, eta):
                raise NonConvergenceError("perfect separation or prediction, the likelihood has "
                                          "no finite maximizer", coeffs, it, grad_norm)
            return coeffs, it, grad_norm, objective
        if it == opts.max_iter:
            break

        hess = _penalized_hessian(model, phi, gamma, lam, eta)
        try:
            if np.linalg.cond(hess) > MAX_CONDITION:
                raise linalg.LinAlgError("condition number above {:.0e}".format(MAX_CONDITION))
            step = linalg.cho_solve(linalg.cho_factor(hess), grad)
        except linalg.LinAlgError as e:
            if it == 0:
                raise ConditioningError("penalized Hessian is numerically singular: {}".format(e)) from e
            raise NonConvergenceError("Hessian lost rank along the Newton path, the likelihood "
                                      "has no finite maximizer", coeffs, it, grad_norm) from e

        # roundoff slack so a converged iterate is not rejected by noise in the objective
        slack = 4.0 * np.finfo(float).eps * (1.0 + abs(objective))
        t = 1.0
        for _ in range(MAX_HALVINGS):
            trial = coeffs + t * step
            try:
                trial_objective = _objective(model, phi, y, gamma, lam, trial)
            except RangeError:
                trial_objective = -np.inf
            if trial_objective >= objective - slack:
                break
            t *= opts.damping
        else:
            raise NonConvergenceError("step halving failed to find an ascent step",
                                      coeffs, it, grad_norm)
        coeffs, objective = trial, trial_objective

    raise NonConvergenceError("no convergence in {} iterations".format(opts.max_iter),
                              coeffs, opts.max_iter, grad_norm)


def fit_penalized_mle(model, es, data, lam, opts=None, design=None):
    '''Compute the smoothing spline estimate by Newton iteration on the coefficients.

       Args:
           model (ExpFamilyModel): the exponential family.
           es (EigenSystem): the eigen-system providing phi_nu and gamma_nu.
           data (Dataset): observations.
           lam (float): nonnegative smoothing parameter.
           opts (FitOptions, optional): max_iter, tol and step damping factor.
           design (ndarray, optional): precomputed es.design(data.x).

       Returns:
           SplineFit: the fit.
    '''
    assert lam >= 0, "lambda should be nonnegative"
    opts = opts or FitOptions()
    data.check_support(model)
    phi = es.design(data.x) if design is None else design
    coeffs, iterations, grad_norm, objective = _newton(model, phi, data.y, es.gamma, lam, opts)
    fit = SplineFit(coeffs, lam, es.m, iterations, grad_norm, objective)
    logger.debug('%r', fit)
    return fit


def evaluate_fit(fit, es, z):
    '''The fitted function sum fhat_nu phi_nu(z).'''
    values = es.design(z) @ fit.coeffs
    return float(values[0]) if np.ndim(z) == 0 else values


def objective_value(model, es, data, coeffs, lam):
    '''The penalized likelihood of the coefficient vector coeffs.'''
    coeffs = np.asarray(coeffs, dtype=float)
    return float(_objective(model, es.design(data.x)[:, :coeffs.size], data.y,
                            es.gamma[:coeffs.size], lam, coeffs))
