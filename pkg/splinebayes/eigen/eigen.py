from abc import abstractmethod
from functools import lru_cache
import logging
import math
import numpy as np
from scipy.special import roots_legendre

'''Eigen-systems (phi_nu, rho_nu) simultaneously diagonalizing the weighted L2 form
   V(g, g~) = int w g g~ and the roughness form U(g, g~) = int g^(m) g~^(m) on [0, 1].

   The backends producing them are registered in EIGEN_BACKENDS: the closed form
   free beam (m=2, unit weight) and a Galerkin solver for general m and weight.
   A backend class is named ABCEigenBackend and selected by the "abc" string in the
   eigen.basis field of the config.
'''
EIGEN_BACKENDS = {}

NORM_KINDS = ('V_norm', 'lambda_norm', 'J', 'omega_norm')

logger = logging.getLogger("SplineBayes-Eigen")


def eigen_backend_registry(cls):
    '''The class decorator used to register all EigenBackend subclasses.

       Args:
           cls (class): The class of register.
    '''
    assert cls.__name__.endswith('EigenBackend'), "The name of subclass of EigenBackend should end with \'EigenBackend\' substring."
    if cls.__name__[:-len('EigenBackend')].lower() in EIGEN_BACKENDS:
        raise ValueError('Cannot have two eigen backends with the same name.')
    EIGEN_BACKENDS[cls.__name__[:-len('EigenBackend')].lower()] = cls
    return cls


class EigenBackend(object):
    '''The base class of eigen-system backends.'''

    @abstractmethod
    def build(self, m, N, weight=None, **kwargs):
        '''Build an EigenSystem with N retained eigenpairs.

           Args:
               m (int): Sobolev order.
               N (int): truncation level.
               weight (callable, optional): w(x) on [0, 1], None means w = 1.
        '''
        raise NotImplementedError


def _uniform_weight(x):
    return np.ones_like(np.asarray(x, dtype=float))


class EigenSystem(object):
    """Truncated eigen-system of the pair (V, U).

    Args:
        m (int): Sobolev order.
        rho (ndarray): eigenvalues, rho_1 = .. = rho_m = 0.
        evaluator (callable): evaluator(z, deriv) -> (len(z), N) matrix of phi_nu^(deriv)(z).
        provenance (string): 'closed_form_free_beam' or 'galerkin'.
        weight (callable, optional): w(x) = Addot(f0(x)) pi(x), defaults to 1.
        weight_desc (string, optional): human readable weight description.
        frequencies (ndarray, optional): free beam frequencies rho_nu^(1/4).
    """
    def __init__(self, m, rho, evaluator, provenance, weight=None, weight_desc='1',
                 frequencies=None):
        rho = np.array(rho, dtype=float)
        assert m >= 1 and rho.ndim == 1 and rho.size >= m
        assert np.all(rho[:m] == 0.0), "the first m eigenvalues must vanish"
        assert np.all(rho[m:] > 0.0) and np.all(np.diff(rho) >= 0.0), \
            "eigenvalues must be nondecreasing and positive beyond the null space"
        gamma = rho.copy()
        gamma[:m] = 1.0
        rho.flags.writeable = False
        gamma.flags.writeable = False
        self.m = int(m)
        self.N = rho.size
        self.rho = rho
        self.gamma = gamma
        self.provenance = provenance
        self.weight = weight if weight is not None else _uniform_weight
        self.weight_desc = weight_desc
        if frequencies is not None:
            frequencies = np.array(frequencies, dtype=float)
            frequencies.flags.writeable = False
        self.frequencies = frequencies
        self._evaluator = evaluator

    def design(self, z, deriv=0):
        '''Matrix of eigenfunction values (or derivatives) at the points z.

           Args:
               z (array like): points in [0, 1].
               deriv (int): derivative order.

           Returns:
               ndarray: shape (len(z), N).
        '''
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return self._evaluator(z, deriv)

    def phi(self, nu, z, deriv=0):
        '''Evaluate the nu-th eigenfunction (1-based) at z.'''
        assert 1 <= nu <= self.N
        values = self.design(z, deriv)[:, nu - 1]
        return float(values[0]) if np.ndim(z) == 0 else values

    def __repr__(self):
        return 'EigenSystem(m={}, N={}, provenance={})'.format(self.m, self.N, self.provenance)


@lru_cache(maxsize=16)
def _gauss_legendre_unit(order):
    nodes, weights = roots_legendre(order)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def gauss_legendre(order, a=0.0, b=1.0):
    '''Gauss-Legendre nodes and weights on [a, b].

       Args:
           order (int): number of nodes.
           a (float): left end.
           b (float): right end.
    '''
    nodes, weights = _gauss_legendre_unit(int(order))
    return a + (b - a) * nodes, (b - a) * weights


def default_truncation(n, m, beta):
    '''N = max(50, ceil(10 n^(1/(2m+beta)))).'''
    return max(50, int(math.ceil(10.0 * float(n) ** (1.0 / (2 * m + beta)))))


def omega_weights(N, tau_omega):
    '''Weak norm weights omega_nu = nu^-1 (log 2nu)^-tau for nu = 1..N.'''
    assert tau_omega > 1, "tau_omega should be larger than 1"
    nu = np.arange(1, N + 1, dtype=float)
    return 1.0 / (nu * np.log(2.0 * nu) ** tau_omega)


def project(es, g, quad_order=2048):
    '''Coefficients g_nu = V(g, phi_nu) by weighted Gauss-Legendre quadrature.

       Args:
           es (EigenSystem): the eigen-system.
           g (callable): bounded function on [0, 1], vectorized.
           quad_order (int): number of quadrature nodes.

       Returns:
           ndarray: N coefficients.
    '''
    nodes, weights = gauss_legendre(quad_order)
    values = np.asarray(g(nodes), dtype=float)
    return es.design(nodes).T @ (weights * es.weight(nodes) * values)


def norm(es, coeffs, lam=0.0, kind='V_norm', tau_omega=2.0):
    '''Squared norms of a coefficient vector.

       V_norm = sum g^2, lambda_norm = sum g^2 (1 + lam rho), J = sum g^2 gamma,
       omega_norm = sum omega g^2.

       Args:
           es (EigenSystem): the eigen-system.
           coeffs (array like): at most N coefficients, missing ones are zero.
           lam (float): smoothing parameter, used by lambda_norm.
           kind (string): one of NORM_KINDS.
           tau_omega (float): weak norm exponent, used by omega_norm.
    '''
    assert kind in NORM_KINDS, "norm kind {} is NOT supported".format(kind)
    assert lam >= 0
    coeffs = np.asarray(coeffs, dtype=float)
    k = coeffs.shape[-1]
    assert k <= es.N, "more coefficients than retained eigenpairs"
    sq = np.square(coeffs)
    if kind == 'V_norm':
        weights = np.ones(k)
    elif kind == 'lambda_norm':
        weights = 1.0 + lam * es.rho[:k]
    elif kind == 'J':
        weights = es.gamma[:k]
    else:
        weights = omega_weights(k, tau_omega)
    return sq @ weights


def reproducing_kernel(es, lam, x, y):
    '''Truncated kernel K(x, y) = sum phi_nu(x) phi_nu(y) / (1 + lam rho_nu).

       Args:
           es (EigenSystem): the eigen-system.
           lam (float): positive smoothing parameter.
           x, y (float or array like): points in [0, 1].

       Returns:
           float or ndarray of shape (len(x), len(y)).
    '''
    assert lam > 0, "lambda should be positive"
    scale = 1.0 / (1.0 + lam * es.rho)
    kernel = (es.design(x) * scale) @ es.design(y).T
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(kernel[0, 0])
    return kernel


def gram_matrices(es, quad_order=2048):
    '''Quadrature Gram matrices (V(phi_mu, phi_nu), U(phi_mu, phi_nu)).'''
    nodes, weights = gauss_legendre(quad_order)
    phi = es.design(nodes)
    dphi = es.design(nodes, es.m)
    v_gram = phi.T @ ((weights * es.weight(nodes))[:, None] * phi)
    u_gram = dphi.T @ (weights[:, None] * dphi)
    return v_gram, u_gram


def gram_row_residuals(es, quad_order=2048):
    '''Per-row deviations of the Gram matrices from I and diag(rho).

       The U residual of row mu is relative to max(1, rho_mu).

       Returns:
           tuple: (V residuals, U residuals), arrays of length N.
    '''
    v_gram, u_gram = gram_matrices(es, quad_order)
    v_rows = np.max(np.abs(v_gram - np.eye(es.N)), axis=1)
    u_rows = np.max(np.abs(u_gram - np.diag(es.rho)), axis=1) / np.maximum(1.0, es.rho)
    return v_rows, u_rows


def gram_residuals(es, quad_order=2048):
    '''Largest deviations of the V and U Gram matrices from I and diag(rho).

       Returns:
           tuple: (V residual, U residual).
    '''
    v_rows, u_rows = gram_row_residuals(es, quad_order)
    v_res, u_res = np.max(v_rows), np.max(u_rows)
    logger.debug('Gram residuals of %r: V %.3e, U %.3e', es, v_res, u_res)
    return float(v_res), float(u_res)


def build_eigensystem(m, N, weight=None, basis='auto', **kwargs):
    '''Build the eigen-system with the backend named by basis.

       "auto" picks the closed form free beam for m=2 and unit weight, the Galerkin
       solver otherwise.

       Args:
           m (int): Sobolev order.
           N (int): truncation level.
           weight (callable, optional): w(x), None means w = 1.
           basis (string): "auto" or a key of EIGEN_BACKENDS.
           kwargs: backend options, e.g. basis_size for Galerkin.
    '''
    if basis == 'auto':
        basis = 'freebeam' if (m == 2 and weight is None) else 'galerkin'
    assert basis in EIGEN_BACKENDS, "The eigen backend {} is NOT supported".format(basis)
    return EIGEN_BACKENDS[basis]().build(m, N, weight=weight, **kwargs)
