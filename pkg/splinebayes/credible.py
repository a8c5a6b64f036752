from abc import abstractmethod
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
import logging
import threading
import numpy as np
from scipy.stats import norm as std_normal
from .eigen.eigen import gauss_legendre, norm, omega_weights
from .posterior import sample_coefficients
from .utils.errors import DegenerateRadiusError

'''Credible sets of the pseudo-posterior: the strong region (l2 ball around ftilde),
   the weak region (omega-weighted ball), the weak region restricted to J(f) <= M, and
   intervals for linear functionals.

   Region kinds are registered in REGIONS. A new kind is added by implementing an
   ABCRegion subclass of Region in this file, selected with the "abc" string.
'''
REGIONS = {}

RADIUS_METHODS = ('monte_carlo', 'asymptotic')

# Monte Carlo draws are generated in fixed-size chunks with spawned seeds, so the
# sample does not depend on how chunks are scheduled
CHUNK_DRAWS = 10000

# weak norm limit: N_omega terms and draws of sum omega_nu eta_nu^2
LIMIT_TERMS = 2000
LIMIT_DRAWS = 200000
LIMIT_SEED = 20151

logger = logging.getLogger("SplineBayes-Credible")


RadiusSpec = namedtuple('RadiusSpec', ['method', 'alpha', 'tau_omega', 'draws', 'seed'])
RadiusSpec.__new__.__defaults__ = ('monte_carlo', 0.05, 2.0, 10000, 0)


def check_radius_spec(spec):
    assert spec.method in RADIUS_METHODS, "radius method {} is NOT supported".format(spec.method)
    assert 0.0 < spec.alpha < 1.0, "alpha should lie in (0, 1)"
    assert spec.tau_omega > 1.0, "tau_omega should be larger than 1"
    if spec.method == 'monte_carlo':
        assert spec.draws >= 10000, "monte carlo radii need at least 1e4 draws"


class LinearFunctional(object):
    """A bounded linear functional F represented by F(phi_nu), nu = 1..N.

    Args:
        kind (string): 'evaluation' or 'integral'.
        values (ndarray): F(phi_nu) for nu = 1..N.
        label (string): description used in reports.
        nodes (ndarray, optional): quadrature nodes (or the evaluation point).
        weights (ndarray, optional): quadrature weights times the functional's weight.
    """
    def __init__(self, kind, values, label='', nodes=None, weights=None):
        assert kind in ('evaluation', 'integral')
        values = np.array(values, dtype=float)
        values.flags.writeable = False
        self.kind = kind
        self.values = values
        self.label = label
        self._nodes = nodes
        self._weights = weights

    @classmethod
    def evaluation(cls, es, z):
        '''F_z(f) = f(z).'''
        assert 0.0 <= z <= 1.0
        return cls('evaluation', es.design([z])[0], 'eval(z={:.4f})'.format(z),
                   nodes=np.array([z]), weights=np.array([1.0]))

    @classmethod
    def integral(cls, es, weight=None, z0=None, quad_order=2048):
        '''F(f) = int_0^1 f(z) w(z) dz, or int_0^z0 f(z) dz for the indicator of [0, z0].'''
        if z0 is not None:
            assert 0.0 <= z0 <= 1.0 and weight is None
            nodes, weights = gauss_legendre(quad_order, 0.0, z0)
            label = 'integral(z0={:.4f})'.format(z0)
        else:
            nodes, weights = gauss_legendre(quad_order)
            if weight is not None:
                weights = weights * np.asarray(weight(nodes), dtype=float)
            label = 'integral({})'.format(getattr(weight, '__name__', 'w') if weight else '1')
        return cls('integral', es.design(nodes).T @ weights, label, nodes=nodes, weights=weights)

    def __call__(self, coeffs):
        '''F applied to coefficient vector(s), linear in coeffs.'''
        coeffs = np.asarray(coeffs, dtype=float)
        return coeffs @ self.values[:coeffs.shape[-1]]

    def apply(self, g):
        '''F applied directly to a vectorized function g on [0, 1].'''
        assert self._nodes is not None, "functional has no quadrature rule"
        return float(np.dot(self._weights, np.asarray(g(self._nodes), dtype=float)))

    def __repr__(self):
        return 'LinearFunctional({})'.format(self.label or self.kind)


def _precision(post):
    return post.tau2 + post.n * (1.0 + post.lam * post.gamma)


def zeta(post, k):
    '''zeta_{k,n} = sum_nu (1 + lam gamma_nu + tau_nu^2/n)^-k over the retained nu.'''
    assert k >= 1
    return float(np.sum((_precision(post) / post.n) ** (-k)))


def zeta_tail_bound(post, k):
    '''Bound on the omitted terms, using (lam rho_nu)^-k and rho_nu >= rho_N (nu/N)^(2m).'''
    es, m = post.es, post.es.m
    if post.lam == 0 or 2 * m * k <= 1:
        return float('inf')
    return float((post.lam * es.rho[-1]) ** (-k) * es.N / (2 * m * k - 1))


def theta(post, F, k):
    '''theta_{k,n}^2 = sum_nu F(phi_nu)^2 / (tau_nu^2 + n(1 + lam gamma_nu))^k.'''
    assert k in (1, 2)
    values = F.values[:post.es.N]
    return float(np.sum(np.square(values) / _precision(post) ** k))


def _chunk_sums(scales, seed, draws):
    rng = np.random.default_rng(seed)
    eta = rng.standard_normal(size=(draws, scales.size))
    return np.square(eta) @ scales


def weighted_chi2_sample(scales, draws, seed, workers=1):
    '''Sorted Monte Carlo sample of sum_nu scales_nu eta_nu^2, eta iid N(0, 1).

       Args:
           scales (ndarray): nonnegative weights.
           draws (int): sample size.
           seed (int or SeedSequence): root seed, split into one substream per chunk.
           workers (int): threads used to generate chunks.
    '''
    scales = np.asarray(scales, dtype=float)
    sizes = [CHUNK_DRAWS] * (draws // CHUNK_DRAWS)
    if draws % CHUNK_DRAWS:
        sizes.append(draws % CHUNK_DRAWS)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seeds = root.spawn(len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda args: _chunk_sums(scales, *args), zip(seeds, sizes)))
    else:
        parts = [_chunk_sums(scales, s, size) for s, size in zip(seeds, sizes)]
    return np.sort(np.concatenate(parts))


_limit_lock = threading.Lock()


@lru_cache(maxsize=8)
def _limit_sample(tau_omega, terms, draws, seed):
    sample = weighted_chi2_sample(omega_weights(terms, tau_omega), draws, seed)
    sample.flags.writeable = False
    return sample


def weak_limit_quantile(alpha, tau_omega=2.0, terms=LIMIT_TERMS, draws=LIMIT_DRAWS, seed=LIMIT_SEED):
    '''c_alpha: the (1 - alpha) quantile of sum_{nu <= terms} omega_nu eta_nu^2.'''
    assert 0.0 < alpha < 1.0
    with _limit_lock:
        sample = _limit_sample(float(tau_omega), int(terms), int(draws), seed)
    return float(np.quantile(sample, 1.0 - alpha))


class Region(object):
    '''The base class of credible regions around ftilde.

    Args:
        tau_omega (float): weak norm exponent.
    '''
    def __init__(self, tau_omega=2.0):
        assert tau_omega > 1
        self.tau_omega = float(tau_omega)

    @abstractmethod
    def norm_weights(self, N):
        '''Weights of the squared norm, a length N vector.'''
        raise NotImplementedError

    @abstractmethod
    def asymptotic_radius(self, post, alpha):
        raise NotImplementedError

    def distance(self, post, coeffs):
        '''Norm of coeffs - ftilde, coeffs shorter than N are zero padded.'''
        coeffs = np.asarray(coeffs, dtype=float)
        diff = -np.array(post.center)
        diff[:coeffs.shape[-1]] += coeffs
        return float(np.sqrt(np.square(diff) @ self.norm_weights(post.es.N)))

    def radii(self, post, spec, alphas):
        '''Radii for several alphas; Monte Carlo radii share one sample.'''
        alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
        check_radius_spec(spec._replace(alpha=float(alphas[0])))
        if spec.method == 'asymptotic':
            return np.array([self.asymptotic_radius(post, a) for a in alphas])
        sample = weighted_chi2_sample(self.norm_weights(post.es.N) * np.square(post.b),
                                      spec.draws, spec.seed)
        return np.sqrt(np.quantile(sample, 1.0 - alphas))

    def radius(self, post, spec):
        '''Radius r with posterior mass 1 - alpha inside the region.'''
        return float(self.radii(post, spec, [spec.alpha])[0])

    def contains(self, post, coeffs, radius):
        '''(membership, distance) of a candidate coefficient vector.'''
        distance = self.distance(post, coeffs)
        return bool(distance <= radius), distance


def region_registry(cls):
    '''The class decorator used to register all Region subclasses.

       Args:
           cls (class): The class of register.
    '''
    assert cls.__name__.endswith('Region'), "The name of subclass of Region should end with \'Region\' substring."
    key = cls.__name__[:-len('Region')].lower()
    if key in REGIONS:
        raise ValueError('Cannot have two regions with the same name')
    REGIONS[key] = cls
    return cls


@region_registry
class StrongRegion(Region):
    '''{f : ||f - ftilde||_2 <= r}, the CR of the coverage tables.'''

    def norm_weights(self, N):
        return np.ones(N)

    def asymptotic_radius(self, post, alpha):
        radicand = zeta(post, 1) + np.sqrt(2.0 * zeta(post, 2)) * std_normal.ppf(1.0 - alpha)
        if radicand < 0:
            raise DegenerateRadiusError("negative radicand {:.4g} for alpha={}".format(radicand, alpha))
        return float(np.sqrt(radicand / post.n))


@region_registry
class WeakRegion(Region):
    '''{f : ||f - ftilde||_omega <= r}, the MCR of the coverage tables.'''

    def norm_weights(self, N):
        return omega_weights(N, self.tau_omega)

    def asymptotic_radius(self, post, alpha):
        return float(np.sqrt(weak_limit_quantile(alpha, self.tau_omega) / post.n))


@region_registry
class RestrictedWeakRegion(WeakRegion):
    '''The weak region intersected with {f : J(f) <= M}.

    Args:
        tau_omega (float): weak norm exponent.
        bound (float, optional): M, defaults to factor * J(fhat) of the posterior.
        factor (float): multiple of J(fhat) used when bound is None.
    '''
    def __init__(self, tau_omega=2.0, bound=None, factor=2.0):
        super(RestrictedWeakRegion, self).__init__(tau_omega)
        assert bound is None or bound > 0
        self.bound = bound
        self.factor = factor

    def penalty_bound(self, post):
        if self.bound is not None:
            return self.bound
        return self.factor * norm(post.es, post.fhat, kind='J')

    def contains(self, post, coeffs, radius):
        inside, distance = super(RestrictedWeakRegion, self).contains(post, coeffs, radius)
        smooth = norm(post.es, coeffs, kind='J') <= self.penalty_bound(post)
        return bool(inside and smooth), distance


def make_region(kind, tau_omega=2.0, **kwargs):
    '''Instantiate a registered region: "strong", "weak" or "restrictedweak".'''
    key = kind.lower().replace('_', '')
    assert key in REGIONS, "The region {} is NOT supported".format(kind)
    return REGIONS[key](tau_omega=tau_omega, **kwargs)


def strong_radius(post, spec):
    '''r_n(alpha) of the strong region.'''
    return StrongRegion(spec.tau_omega).radius(post, spec)


def weak_radius(post, spec):
    '''r_{omega,n}(alpha) of the weak region.'''
    return WeakRegion(spec.tau_omega).radius(post, spec)


def region_contains(post, kind, candidate_coeffs, radius, tau_omega=2.0, bound=None):
    '''Membership test of a candidate in a credible region.

       Args:
           post (PosteriorGP): the pseudo-posterior.
           kind (string): "strong", "weak" or "restricted_weak".
           candidate_coeffs (array like): candidate projected on the eigen-system.
           radius (float): the region radius.
           tau_omega (float): weak norm exponent.
           bound (float, optional): M for the restricted region.

       Returns:
           tuple: (contained, distance).
    '''
    kwargs = {'bound': bound} if kind.replace('_', '').lower() == 'restrictedweak' else {}
    return make_region(kind, tau_omega, **kwargs).contains(post, candidate_coeffs, radius)


def functional_interval(post, F, alpha):
    '''Credible interval F(ftilde) +- theta_{1,n} z_{alpha/2}.

       Returns:
           tuple: (center, radius), a zero functional gives radius 0.
    '''
    assert 0.0 < alpha < 1.0
    center = float(F(post.center))
    theta1 = np.sqrt(theta(post, F, 1))
    return center, float(theta1 * std_normal.ppf(1.0 - alpha / 2.0))


def posterior_credibility(post, region, radius, rng, draws=10000):
    '''Fraction of posterior draws inside a region of the given radius.'''
    coeffs = sample_coefficients(post, rng, draws)
    diff = coeffs - post.center
    distances = np.sqrt(np.square(diff) @ region.norm_weights(post.es.N))
    return float(np.mean(distances <= radius))
