from functools import lru_cache
import logging
import math
import numpy as np
from scipy.optimize import brentq
from .eigen import eigen_backend_registry, EigenBackend, EigenSystem
from ..utils.errors import DomainError, RootFindingError

logger = logging.getLogger("SplineBayes-Eigen")

SQRT3 = math.sqrt(3.0)


def _sech(x):
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)


def _frequency_equation(x):
    # cos(x) cosh(x) = 1 divided by cosh(x), finite for any x
    return np.cos(x) - _sech(x)


def _frequency_slope(x):
    return -np.sin(x) + _sech(x) * np.tanh(x)


@lru_cache(maxsize=8)
def _roots(count):
    roots = []
    half_pi = 0.5 * math.pi
    # panel edges sit at odd multiples of pi/4 where |cos| = 1/sqrt(2), far from any root
    max_panels = 2 * count + 8
    for j in range(max_panels):
        a = half_pi * j + 0.25 * math.pi
        b = a + half_pi
        fa, fb = _frequency_equation(a), _frequency_equation(b)
        if fa * fb > 0:
            continue
        x = brentq(_frequency_equation, a, b, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200)
        for _ in range(2):
            slope = _frequency_slope(x)
            if slope != 0.0:
                step = _frequency_equation(x) / slope
                if a < x - step < b:
                    x -= step
        roots.append(x)
        if len(roots) == count:
            break
    if len(roots) < count:
        raise RootFindingError("found {} of {} roots of cos(x)cosh(x)=1 in {} panels".format(
            len(roots), count, max_panels))
    roots = np.array(roots)
    roots.flags.writeable = False
    return roots


def solve_free_beam_roots(count):
    '''The first count positive solutions of cos(x) cosh(x) = 1, ascending.

       Roots are bracketed by sign changes on half-pi panels and refined by Brent's
       method to 1e-12 followed by two Newton steps.

       Args:
           count (int): number of roots, at least 1.

       Returns:
           ndarray: the roots.
    '''
    assert int(count) >= 1, "count should be at least 1"
    return _roots(int(count))


def _hyperbolic_ratio(gamma, t, numerator, denominator):
    '''numerator(gamma t) / denominator(gamma / 2) for t in [-1/2, 1/2] without overflow.

       numerator and denominator are "cosh" or "sinh".
    '''
    a = np.abs(t)
    e = np.exp(gamma * (a - 0.5))
    decay = np.exp(-2.0 * gamma * a)
    top = 1.0 + decay if numerator == 'cosh' else np.sign(t) * (1.0 - decay)
    bottom = 1.0 + math.exp(-gamma) if denominator == 'cosh' else 1.0 - math.exp(-gamma)
    return e * top / bottom


# derivative cycles: (trig function, sign) for orders 0..3
_COS_CYCLE = ((np.cos, 1.0), (np.sin, -1.0), (np.cos, -1.0), (np.sin, 1.0))
_SIN_CYCLE = ((np.sin, 1.0), (np.cos, 1.0), (np.sin, -1.0), (np.cos, -1.0))


def _is_symmetric_mode(gamma):
    '''A free-free mode is symmetric about 1/2 iff tan(gamma/2) + tanh(gamma/2) = 0.'''
    half = 0.5 * gamma
    return abs(math.tan(half) + math.tanh(half)) < abs(math.tan(half) - math.tanh(half))


def _mode(gamma, z, deriv):
    t = z - 0.5
    scale = gamma ** deriv
    if _is_symmetric_mode(gamma):
        func, sign = _COS_CYCLE[deriv % 4]
        trig = sign * func(gamma * t) / math.cos(0.5 * gamma)
        hyper = _hyperbolic_ratio(gamma, t, 'cosh' if deriv % 2 == 0 else 'sinh', 'cosh')
    else:
        func, sign = _SIN_CYCLE[deriv % 4]
        trig = sign * func(gamma * t) / math.sin(0.5 * gamma)
        hyper = _hyperbolic_ratio(gamma, t, 'sinh' if deriv % 2 == 0 else 'cosh', 'sinh')
    return scale * (trig + hyper)


def free_beam_eigensystem(N):
    '''Closed form eigen-system of the uniform free beam (m=2, unit weight).

       phi_1 = 1, phi_2 = sqrt(3)(2z - 1) and for nu >= 3 the trigonometric plus
       hyperbolic modes with frequencies from solve_free_beam_roots, rho_nu = gamma^4.
       Symmetric modes use cos/cosh, antisymmetric ones sin/sinh.

       Args:
           N (int): number of eigenpairs, at least 2.
    '''
    if N < 2:
        raise DomainError("free beam eigen-system needs N >= 2, got {}".format(N))
    freqs = solve_free_beam_roots(N - 2) if N > 2 else np.empty(0)
    rho = np.concatenate([[0.0, 0.0], freqs ** 4])

    def evaluator(z, deriv):
        out = np.zeros((z.size, N))
        if deriv == 0:
            out[:, 0] = 1.0
            out[:, 1] = SQRT3 * (2.0 * z - 1.0)
        elif deriv == 1:
            out[:, 1] = 2.0 * SQRT3
        for k, gamma in enumerate(freqs):
            out[:, k + 2] = _mode(gamma, z, deriv)
        return out

    logger.debug('Free beam eigen-system with N=%d, largest frequency %.4f', N,
                 freqs[-1] if freqs.size else 0.0)
    return EigenSystem(2, rho, evaluator, 'closed_form_free_beam', weight_desc='1',
                       frequencies=np.concatenate([[0.0, 0.0], freqs]))


@eigen_backend_registry
class FreeBeamEigenBackend(EigenBackend):
    '''Closed form backend, only valid for m=2 and unit weight.'''

    def build(self, m, N, weight=None, **kwargs):
        if m != 2 or weight is not None:
            raise DomainError("the free beam backend needs m=2 and unit weight")
        return free_beam_eigensystem(N)
