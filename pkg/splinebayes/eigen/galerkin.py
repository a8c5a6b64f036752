import logging
import numpy as np
from numpy.polynomial import legendre
from scipy import linalg
from .eigen import eigen_backend_registry, EigenBackend, EigenSystem, gauss_legendre
from ..utils.errors import DiscretizationError

logger = logging.getLogger("SplineBayes-Eigen")


def _basis_coefficients(m, basis_size):
    '''Legendre coefficients (in s = 2x - 1) of the intermediate basis.

       The first m columns are P_0..P_{m-1}, spanning the monomials 1..x^(m-1) that form
       the null space of U. Column m + k is the m-fold antiderivative of the orthonormal
       shifted Legendre polynomial of degree k, so the m-th derivatives of the remaining
       columns are orthonormal and U is the identity on them.
    '''
    coef = np.zeros((basis_size, basis_size))
    coef[np.arange(m), np.arange(m)] = 1.0
    k = np.arange(basis_size - m)
    q = np.zeros((basis_size - m, basis_size - m))
    q[k, k] = np.sqrt(2.0 * k + 1.0)
    # d/dx = 2 d/ds
    integrated = legendre.legint(q, m=m, axis=0) / 2.0 ** m
    coef[:, m:] = integrated[:basis_size]
    return coef


def _evaluate(coef, z, deriv):
    if deriv > 0:
        coef = legendre.legder(coef, m=deriv, axis=0) * 2.0 ** deriv
    return legendre.legvander(2.0 * z - 1.0, coef.shape[0] - 1) @ coef


def galerkin_eigensystem(m, weight, basis_size, N, quad_order=None):
    '''Solve U c = rho V_w c in a smooth intermediate basis.

       Because U is the identity off its null space, eliminating the null space
       coefficients leaves the symmetric problem S c1 = (1/rho) c1 with S the Schur
       complement of V_w, which keeps the low eigenvalues accurate.

       Args:
           m (int): Sobolev order.
           weight (callable): w(x) bounded above and below by positive constants.
           basis_size (int): size of the intermediate basis, at least 4N.
           N (int): number of eigenpairs returned.
           quad_order (int, optional): Gauss-Legendre nodes, defaults to 4 * basis_size.

       Returns:
           EigenSystem: with V_w-orthonormal eigenfunctions.
    '''
    assert m >= 1 and N > m, "need N > m"
    assert basis_size >= 4 * N, "basis_size should be at least 4N"
    quad_order = quad_order or 4 * basis_size
    nodes, weights = gauss_legendre(quad_order)
    w = np.asarray(weight(nodes), dtype=float)
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise DiscretizationError("weight must be finite and positive on [0, 1]",
                                  suggested_quad_order=quad_order)

    coef = _basis_coefficients(m, basis_size)
    basis = _evaluate(coef, nodes, 0)
    mass = basis.T @ ((weights * w)[:, None] * basis)
    mass = 0.5 * (mass + mass.T)

    v00, v01, v11 = mass[:m, :m], mass[:m, m:], mass[m:, m:]
    try:
        chol = linalg.cholesky(v00, lower=True)
    except linalg.LinAlgError as e:
        raise DiscretizationError("null space block of V_w is not positive definite",
                                  suggested_quad_order=2 * quad_order) from e
    elim = linalg.cho_solve((chol, True), v01)
    schur = v11 - v01.T @ elim
    mu, vecs = linalg.eigh(0.5 * (schur + schur.T))
    mu, vecs = mu[::-1], vecs[:, ::-1]
    # the tail of the spectrum sits at roundoff level, only a clearly negative value
    # or a retained eigenvalue lost in roundoff signals a bad discretization
    tiny = mu[0] * np.finfo(float).eps * basis_size
    if mu[0] <= 0 or mu[-1] < -np.sqrt(np.finfo(float).eps) * mu[0] or mu[N - m - 1] <= tiny:
        raise DiscretizationError("discretized V_w is indefinite or rank deficient, "
                                  "retry with a larger quadrature",
                                  suggested_quad_order=2 * quad_order)
    mu, vecs = mu[:N - m], vecs[:, :N - m]
    # V_w-normalize: c' V_w c = mu |c1|^2
    c1 = vecs / np.sqrt(mu)
    c0 = -elim @ c1

    null = linalg.solve_triangular(chol, np.eye(m), lower=True).T
    coeffs = np.zeros((basis_size, N))
    coeffs[:m, :m] = null
    coeffs[:m, m:] = c0
    coeffs[m:, m:] = c1
    phi_coef = coef @ coeffs

    # sign convention: phi_nu(1) > 0, falling back to phi_nu(0.9)
    ends = _evaluate(phi_coef, np.array([1.0, 0.9]), 0)
    signs = np.where(np.abs(ends[0]) > 1e-8, np.sign(ends[0]), np.sign(ends[1]))
    signs[signs == 0] = 1.0
    phi_coef = phi_coef * signs
    phi_coef.flags.writeable = False

    rho = np.concatenate([np.zeros(m), 1.0 / mu])

    def evaluator(z, deriv):
        return _evaluate(phi_coef, z, deriv)

    logger.debug('Galerkin eigen-system m=%d N=%d basis=%d quad=%d, rho_%d=%.6g',
                 m, N, basis_size, quad_order, m + 1, rho[m])
    return EigenSystem(m, rho, evaluator, 'galerkin', weight=weight,
                       weight_desc=getattr(weight, '__name__', 'custom'))


@eigen_backend_registry
class GalerkinEigenBackend(EigenBackend):
    '''Galerkin backend for any Sobolev order and positive weight.'''

    def build(self, m, N, weight=None, basis_size=None, quad_order=None, **kwargs):
        if weight is None:
            weight = _unit_weight
        return galerkin_eigensystem(m, weight, basis_size or 4 * N, N, quad_order=quad_order)


def _unit_weight(x):
    return np.ones_like(np.asarray(x, dtype=float))
