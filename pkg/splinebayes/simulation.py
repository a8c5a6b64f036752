"""Coverage experiments for the credible sets.

   Each replicate draws data from the beta mixture truth, tunes lambda, fits the
   smoothing spline, builds the pseudo-posterior and checks whether the credible
   regions and functional intervals cover the truth. Replicates are independent jobs
   with seeds derived from (experiment seed, sample size index, replicate index).
"""

from collections import namedtuple, OrderedDict
from concurrent.futures import ThreadPoolExecutor
import csv
import logging
import os
import numpy as np
from scipy.special import betaln, xlogy
from scipy.stats import norm as std_normal
from .credible import (LinearFunctional, RadiusSpec, StrongRegion, WeakRegion,
                       RestrictedWeakRegion, functional_interval)
from .eigen import build_eigensystem, default_truncation, galerkin_eigensystem, gauss_legendre, project
from .family import get_family
from .family.gaussian import GaussianFamily
from .posterior import build_posterior, build_prior
from .spline import Dataset, FitOptions, fit_penalized_mle
from .tuning import default_lambda_grid, gcv_curve, tune_lambda
from .utils.errors import ExperimentError, SplineBayesError
from .utils.utility import AverageMeter, Timeout, worker_count

logger = logging.getLogger("SplineBayes-Simulation")

COVERAGE_HEADER = ['n', 'alpha', 'set_kind', 'coverage', 'mean_radius', 'reps', 'failures',
                   'radius_method']
CURVE_HEADER = ['z', 'f0', 'fhat_mean', 'lower', 'upper']
CURVE_POINTS = 101

SimConfig = namedtuple('SimConfig', [
    'model', 'trials', 'm', 'beta', 'sigma2', 'n_list', 'replications', 'alphas',
    'radius_method', 'draws', 'tau_omega', 'restricted_factor', 'tuning', 'h', 'lambda_grid',
    'fit_options', 'basis', 'N', 'quad_order', 'seed', 'eval_points', 'integral_points',
    'workers', 'timeout', 'max_failure_rate', 'tau_scale', 'h_scale'])
SimConfig.__new__.__defaults__ = (
    'gaussian', 1, 2, 2.0, (1.0, 1.0), (512,), 500, (0.05,), 'monte_carlo', 10000, 2.0, 2.0,
    'gcv', None, None, FitOptions(), 'auto', None, 2048, 1978, (), (), None, 0, 0.05, 1.0, 1.0)

CoverageRecord = namedtuple('CoverageRecord', [
    'n', 'alpha', 'set_kind', 'coverage', 'mean_radius', 'replications', 'failures',
    'radius_method', 'covered'])

# result of one successful replicate: {(alpha, set_kind): (covered, radius)} and the
# pointwise band of the fit on the curve grid at the first alpha
ReplicateResult = namedtuple('ReplicateResult', ['outcomes', 'fhat', 'lower', 'upper'])


def sim_config(cfg):
    '''Build a SimConfig from a validated Conf().cfg.'''
    grid = cfg.tuning.lambda_grid
    return SimConfig(
        model=cfg.model.name, trials=cfg.model.trials, m=cfg.model.m, beta=cfg.prior.beta,
        sigma2=tuple(cfg.prior.sigma2), n_list=tuple(cfg.experiment.n_list),
        replications=cfg.experiment.replications, alphas=tuple(cfg.experiment.alphas),
        radius_method=cfg.credible.method, draws=cfg.credible.draws,
        tau_omega=cfg.credible.tau_omega, restricted_factor=cfg.credible.restricted_factor,
        tuning=cfg.tuning.method, h=cfg.tuning.h,
        lambda_grid=tuple(default_lambda_grid(grid.size, grid.low, grid.high)),
        fit_options=FitOptions(max_iter=cfg.tuning.max_iter, tol=cfg.tuning.tol),
        basis=cfg.eigen.basis, N=cfg.eigen.N, quad_order=cfg.eigen.quad_order,
        seed=cfg.experiment.seed, eval_points=tuple(cfg.experiment.eval_points),
        integral_points=tuple(cfg.experiment.integral_points),
        workers=cfg.experiment.workers, timeout=cfg.experiment.timeout,
        max_failure_rate=cfg.experiment.max_failure_rate, tau_scale=cfg.prior.tau_scale,
        h_scale=cfg.tuning.h_scale)


def check_sim_config(config):
    assert config.replications >= 1, "replications should be at least 1"
    assert len(config.alphas) > 0 and all(0 < a < 1 for a in config.alphas), \
        "alphas should lie in (0, 1)"
    assert config.tuning in ('gcv', 'fixed_h')
    assert config.tuning == 'gcv' or (config.h is not None and 0 < config.h < 1)
    assert len(config.sigma2) == config.m
    assert config.tau_scale > 0 and config.h_scale > 0


def _beta_pdf(z, a, b):
    return np.exp(xlogy(a - 1.0, z) + xlogy(b - 1.0, 1.0 - z) - betaln(a, b))


def true_function_beta_mix(z):
    '''f0(z) = 3 Beta(30, 17)(z) + 2 Beta(3, 11)(z).'''
    z = np.asarray(z, dtype=float)
    value = 3.0 * _beta_pdf(z, 30.0, 17.0) + 2.0 * _beta_pdf(z, 3.0, 11.0)
    return float(value) if value.ndim == 0 else value


def make_model(config):
    if config.model == 'binomial':
        return get_family('binomial', a=config.trials)
    return get_family(config.model)


def generate_dataset(config, n, rng):
    '''Draw X ~ U[0, 1] and Y from the exponential family at eta = f0(X).'''
    assert n >= 1
    model = make_model(config)
    x = rng.uniform(0.0, 1.0, size=n)
    y = model.sample_response(true_function_beta_mix(x), rng)
    return Dataset(x, y)


def truncation_level(config, n):
    return config.N or default_truncation(n, config.m, config.beta)


def truth_coefficients(es, quad_order=2048):
    '''Projection of f0 and its V-norm truncation residual.'''
    coeffs = project(es, true_function_beta_mix, quad_order)
    nodes, weights = gauss_legendre(quad_order)
    total = np.dot(weights * es.weight(nodes), np.square(true_function_beta_mix(nodes)))
    residual = float(np.sqrt(max(total - np.sum(np.square(coeffs)), 0.0)))
    return coeffs, residual


def make_functionals(config, es):
    '''Evaluation and integral functionals keyed by set_kind label.'''
    functionals = OrderedDict()
    for z in config.eval_points:
        functionals['eval_CI(z={:.4f})'.format(z)] = LinearFunctional.evaluation(es, z)
    for z0 in config.integral_points:
        functionals['integral_CI(z0={:.4f})'.format(z0)] = \
            LinearFunctional.integral(es, z0=z0, quad_order=config.quad_order)
    return functionals


def _tune(config, model, es, data):
    if config.tuning == 'fixed_h':
        return config.h ** (2 * config.m)
    _, h_gcv, h, lam = tune_lambda(model, es, data, config.m, config.beta,
                                   config.lambda_grid, config.fit_options, config.h_scale)
    logger.debug('GCV h=%.4g mapped to prior h=%.4g', h_gcv, h)
    return lam


def _weighted_eigensystem(config, model, data, N):
    '''Galerkin eigen-system with weight Addot(fhat_pilot) from a pilot fit.'''
    pilot_es = build_eigensystem(config.m, N)
    pilot = fit_penalized_mle(model, pilot_es, data, _tune(config, model, pilot_es, data),
                              config.fit_options)

    def pilot_weight(x):
        return model.Addot(pilot_es.design(x) @ pilot.coeffs)

    return galerkin_eigensystem(config.m, pilot_weight, 4 * N, N)


def _pointwise_band(post, grid_design, alpha):
    center = grid_design @ post.center
    half = np.sqrt(np.square(grid_design) @ (post.b ** 2)) * std_normal.ppf(1.0 - alpha / 2.0)
    return center, center - half, center + half


def run_replicate(config, n, seed, shared=None, radius_override=None, curve_grid=None):
    '''One replicate: data, tuning, fit, posterior, radii and membership.

       Args:
           config (SimConfig): the experiment.
           n (int): sample size.
           seed (SeedSequence): replicate seed.
           shared (tuple, optional): (es, truth coeffs, functionals) reused across replicates.
           radius_override (float, optional): radius used for every set, a test hook.
           curve_grid (ndarray, optional): points of the pointwise band summary.

       Returns:
           ReplicateResult
    '''
    data_seed, radius_seed = seed.spawn(2)
    rng = np.random.default_rng(data_seed)
    model = make_model(config)
    data = generate_dataset(config, n, rng)
    if shared is None:
        es = _weighted_eigensystem(config, model, data, truncation_level(config, n))
        truth, residual = truth_coefficients(es, config.quad_order)
        logger.debug('weighted projection residual of f0: %.3e', residual)
        functionals = make_functionals(config, es)
    else:
        es, truth, functionals = shared

    lam = _tune(config, model, es, data)
    fit = fit_penalized_mle(model, es, data, lam, config.fit_options)
    prior = build_prior(es, config.m, config.beta, config.sigma2, lam, n, config.tau_scale)
    post = build_posterior(es, fit, prior, n)

    alphas = np.asarray(config.alphas)
    spec = RadiusSpec(config.radius_method, float(alphas[0]), config.tau_omega, config.draws,
                      radius_seed)
    # the override lifts the smoothness bound too, so every set is the whole space
    bound = np.inf if radius_override is not None else None
    regions = OrderedDict([
        ('CR', StrongRegion(config.tau_omega)),
        ('MCR', WeakRegion(config.tau_omega)),
        ('restricted_MCR', RestrictedWeakRegion(config.tau_omega, bound=bound, factor=config.restricted_factor)),
    ])
    outcomes = {}
    radii = {}
    for kind, region in regions.items():
        if radius_override is not None:
            radii[kind] = np.full(alphas.size, float(radius_override))
        elif kind == 'restricted_MCR':
            radii[kind] = radii['MCR']
        else:
            radii[kind] = region.radii(post, spec, alphas)
        for alpha, radius in zip(config.alphas, radii[kind]):
            covered, _ = region.contains(post, truth, radius)
            outcomes[(alpha, kind)] = (covered, float(radius))

    for kind, F in functionals.items():
        value = F.apply(true_function_beta_mix)
        for alpha in config.alphas:
            center, radius = functional_interval(post, F, alpha)
            if radius_override is not None:
                radius = float(radius_override)
            outcomes[(alpha, kind)] = (bool(abs(value - center) <= radius), radius)

    band = (None, None, None)
    if curve_grid is not None:
        band = _pointwise_band(post, es.design(curve_grid), config.alphas[0])
    return ReplicateResult(outcomes, *band)


def replicate_seed(config, index, replicate):
    '''Seed of one replicate, index counts the sorted sample sizes.'''
    return np.random.SeedSequence(config.seed, spawn_key=(index, replicate))


def replicate_gcv_curve(config, index=0, replicate=0):
    '''GCV curve of one replicate's dataset, the same data run_replicate draws for it.

       Returns:
           list: (lam, score) pairs over config.lambda_grid.
    '''
    n = sorted(config.n_list)[index]
    data_seed, _ = replicate_seed(config, index, replicate).spawn(2)
    model = make_model(config)
    data = generate_dataset(config, n, np.random.default_rng(data_seed))
    if isinstance(model, GaussianFamily):
        es = build_eigensystem(config.m, truncation_level(config, n), basis=config.basis)
    else:
        es = _weighted_eigensystem(config, model, data, truncation_level(config, n))
    return gcv_curve(model, es, data, config.lambda_grid, config.fit_options)


def _aggregate(config, n, results, failures):
    records = []
    keys = sorted(results[0].outcomes, key=lambda k: (k[0], k[1]))
    for alpha, kind in keys:
        meter = AverageMeter()
        covered = 0
        for result in results:
            hit, radius = result.outcomes[(alpha, kind)]
            covered += int(hit)
            meter.update(radius)
        records.append(CoverageRecord(n, alpha, kind, covered / float(len(results)), meter.avg,
                                      len(results), failures, config.radius_method, covered))
    return records


def _curve_rows(grid, results):
    fhat = np.mean([r.fhat for r in results], axis=0)
    lower = np.mean([r.lower for r in results], axis=0)
    upper = np.mean([r.upper for r in results], axis=0)
    truth = true_function_beta_mix(grid)
    return [tuple(float(v) for v in row) for row in zip(grid, truth, fhat, lower, upper)]


def run_coverage_experiment(config, radius_override=None, curve=None):
    '''Coverage of CR, MCR, restricted MCR and functional intervals over config.n_list.

       Args:
           config (SimConfig): the experiment.
           radius_override (float, optional): radius used for every set, a test hook.
           curve (list, optional): filled with curve.csv rows for the largest n.

       Returns:
           list: CoverageRecord entries sorted by (n, alpha, set_kind).
    '''
    check_sim_config(config)
    gaussian = isinstance(make_model(config), GaussianFamily)
    workers = worker_count(config.workers)
    records = []
    largest = max(config.n_list)

    with Timeout(config.timeout) as t:
        for index, n in enumerate(sorted(config.n_list)):
            shared = None
            if gaussian:
                es = build_eigensystem(config.m, truncation_level(config, n), basis=config.basis)
                truth, residual = truth_coefficients(es, config.quad_order)
                logger.info('n=%d: N=%d, projection residual of f0 %.3e', n, es.N, residual)
                shared = (es, truth, make_functionals(config, es))
            grid = np.linspace(0.0, 1.0, CURVE_POINTS) if (curve is not None and n == largest) else None
            seeds = [replicate_seed(config, index, rep) for rep in range(config.replications)]

            def job(seed):
                if t.timed_out:
                    return 'timeout'
                try:
                    return run_replicate(config, n, seed, shared, radius_override, grid)
                except SplineBayesError as e:
                    logger.warning('n=%d replicate excluded: %s', n, e)
                    return None

            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(job, seeds))
            if any(o == 'timeout' for o in outcomes):
                raise ExperimentError("timeout of {}s reached at n={}".format(config.timeout, n),
                                      failures=sum(o is None for o in outcomes),
                                      replications=config.replications)
            results = [o for o in outcomes if o is not None]
            failures = len(outcomes) - len(results)
            if not results or failures > config.max_failure_rate * config.replications:
                raise ExperimentError("{} of {} replicates failed at n={}".format(
                    failures, config.replications, n), failures=failures,
                    replications=config.replications)
            records.extend(_aggregate(config, n, results, failures))
            logger.info('n=%d done: %d replicates, %d failures', n, len(results), failures)
            if grid is not None:
                curve.extend(_curve_rows(grid, results))
    return records


def _fmt(value):
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def write_coverage_csv(records, path):
    '''Write coverage.csv with a header row, numbers in shortest round-trip form.'''
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(COVERAGE_HEADER)
        for r in records:
            writer.writerow([r.n, _fmt(r.alpha), r.set_kind, _fmt(r.coverage), _fmt(r.mean_radius),
                             r.replications, r.failures, r.radius_method])


def write_curve_csv(rows, path):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CURVE_HEADER)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def run_and_write(config, out_dir, coverage_name='coverage.csv', curve_name='curve.csv'):
    '''Run the experiment and write both CSV files, returns their paths.'''
    os.makedirs(out_dir, exist_ok=True)
    curve = []
    records = run_coverage_experiment(config, curve=curve)
    coverage_path = os.path.join(out_dir, coverage_name)
    curve_path = os.path.join(out_dir, curve_name)
    write_coverage_csv(records, coverage_path)
    write_curve_csv(curve, curve_path)
    return coverage_path, curve_path
