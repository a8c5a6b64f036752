"""Command line entry point: splinebayes {fit,sample,interval,coverage,eigen}."""

import argparse
import contextlib
import csv
import logging
import sys
import numpy as np
from .conf import Conf
from .credible import LinearFunctional, functional_interval
from .eigen import build_eigensystem, default_truncation, gram_row_residuals
from .family import FAMILIES, get_family
from .posterior import build_posterior, build_prior, sample_posterior
from .simulation import replicate_gcv_curve, run_and_write, sim_config
from .spline import Dataset, evaluate_fit, fit_penalized_mle
from .tuning import gcv_curve, prior_h_from_gcv, select_h
from .utils.errors import DomainError, SplineBayesError

logger = logging.getLogger("SplineBayes-CLI")

FIT_GRID_POINTS = 512


@contextlib.contextmanager
def _csv_writer(path):
    if path in (None, '-'):
        yield csv.writer(sys.stdout, lineterminator='\n')
        return
    with open(path, 'w', newline='') as f:
        yield csv.writer(f, lineterminator='\n')


def _fmt(value):
    return repr(float(value))


def read_dataset(path):
    '''Read a CSV with a header row and columns x, y.'''
    table = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    if table.shape[1] < 2:
        raise SplineBayesError("{} should have the columns x,y".format(path))
    x = table[:, 0]
    if table.shape[0] == 0 or np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("{} should hold at least one row with x in [0, 1]".format(path))
    return Dataset(x, table[:, 1])


def _write_gcv_curve(path, curve):
    with _csv_writer(path) as writer:
        writer.writerow(['lambda', 'score'])
        for lam, score in curve:
            writer.writerow([_fmt(lam), _fmt(score)])


def _model(args):
    if args.model == 'binomial':
        return get_family('binomial', a=args.trials)
    return get_family(args.model)


def _smoothing(args, model, es, data, posterior):
    '''lambda from --lambda, or GCV (mapped to the tuning prior when posterior is True).'''
    if args.lam is not None:
        return args.lam
    curve = gcv_curve(model, es, data)
    if args.gcv_out:
        _write_gcv_curve(args.gcv_out, curve)
    lam_gcv, h_gcv = select_h(curve, args.m)
    if not posterior:
        logger.info('GCV selected lambda=%.4g', lam_gcv)
        return lam_gcv
    h, lam = prior_h_from_gcv(h_gcv, args.m, args.beta, args.h_scale)
    logger.info('GCV h=%.4g, prior h=%.4g, lambda=%.4g', h_gcv, h, lam)
    return lam


def _setup(args, posterior):
    data = read_dataset(args.data)
    model = _model(args)
    data.check_support(model)
    es = build_eigensystem(args.m, args.N or default_truncation(data.n, args.m, args.beta))
    lam = _smoothing(args, model, es, data, posterior)
    fit = fit_penalized_mle(model, es, data, lam)
    return data, model, es, fit


def _posterior(args):
    data, model, es, fit = _setup(args, posterior=True)
    prior = build_prior(es, args.m, args.beta, [args.sigma2] * args.m, fit.lam, data.n,
                        args.tau_scale)
    return es, build_posterior(es, fit, prior, data.n)


def cmd_fit(args):
    _, _, es, fit = _setup(args, posterior=False)
    grid = np.linspace(0.0, 1.0, FIT_GRID_POINTS)
    values = evaluate_fit(fit, es, grid)
    with _csv_writer(args.grid_out or args.out) as writer:
        writer.writerow(['z', 'fhat'])
        for z, v in zip(grid, values):
            writer.writerow([_fmt(z), _fmt(v)])


def cmd_sample(args):
    es, post = _posterior(args)
    rng = np.random.default_rng(args.seed)
    grid = np.linspace(0.0, 1.0, args.grid_size)
    paths = sample_posterior(post, rng, grid, args.paths)
    with _csv_writer(args.out) as writer:
        writer.writerow(['path_id', 'z', 'value'])
        for path_id, path in enumerate(paths):
            for z, v in zip(grid, path):
                writer.writerow([path_id, _fmt(z), _fmt(v)])
    if args.band_out:
        with _csv_writer(args.band_out) as writer:
            writer.writerow(['z', 'center', 'lower', 'upper'])
            for z in grid:
                center, radius = functional_interval(post, LinearFunctional.evaluation(es, z), args.alpha)
                writer.writerow([_fmt(z), _fmt(center), _fmt(center - radius), _fmt(center + radius)])


def parse_functional(es, text):
    '''Build a functional from "eval:z" or "integral:z0".'''
    kind, _, value = text.partition(':')
    try:
        point = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("bad functional {!r}".format(text))
    if kind == 'eval':
        return LinearFunctional.evaluation(es, point)
    if kind == 'integral':
        return LinearFunctional.integral(es, z0=point)
    raise argparse.ArgumentTypeError("functional should be eval:z or integral:z0, got {!r}".format(text))


def cmd_interval(args):
    es, post = _posterior(args)
    F = parse_functional(es, args.functional)
    center, radius = functional_interval(post, F, args.alpha)
    with _csv_writer(args.out) as writer:
        writer.writerow(['functional', 'alpha', 'center', 'radius', 'lower', 'upper'])
        writer.writerow([args.functional, _fmt(args.alpha), _fmt(center), _fmt(radius),
                         _fmt(center - radius), _fmt(center + radius)])


def cmd_coverage(args):
    cfg = Conf(args.config).cfg if args.config else Conf({}).cfg
    cfg.model.name = args.model if args.model_given else cfg.model.name
    for key, section, value in [('m', 'model', args.m_given), ('trials', 'model', args.trials_given),
                                ('beta', 'prior', args.beta_given), ('seed', 'experiment', args.seed_given),
                                ('replications', 'experiment', args.replications),
                                ('n_list', 'experiment', args.n),
                                ('method', 'credible', args.radius_method), ('N', 'eigen', args.N),
                                ('tau_scale', 'prior', args.tau_scale_given),
                                ('h_scale', 'tuning', args.h_scale_given)]:
        if value is not None:
            cfg[section][key] = value
    if args.fixed_h is not None:
        cfg.tuning.method, cfg.tuning.h = 'fixed_h', args.fixed_h
    elif args.gcv:
        cfg.tuning.method = 'gcv'
    if args.model_given or args.m_given is not None:
        cfg.prior.sigma2 = [args.sigma2] * cfg.model.m
    # re-run the sanity check on the merged settings
    cfg = Conf(dict(cfg)).cfg
    out_dir = args.out if args.out not in (None, '-') else cfg.output.dir
    config = sim_config(cfg)
    if args.gcv_out:
        # the first replicate at the smallest n
        _write_gcv_curve(args.gcv_out, replicate_gcv_curve(config))
    coverage_path, curve_path = run_and_write(config, out_dir, cfg.output.coverage,
                                              cfg.output.curve)
    logger.info('coverage written to %s, curve to %s', coverage_path, curve_path)


def cmd_eigen(args):
    N = args.N or 50
    es = build_eigensystem(args.m, N, basis=args.basis)
    v_rows, u_rows = gram_row_residuals(es, args.quad_order)
    # gamma_nu = rho_nu^(1/(2m)), the free beam frequencies for m = 2
    frequencies = es.frequencies if es.frequencies is not None else es.rho ** (1.0 / (2 * es.m))
    with _csv_writer(args.out) as writer:
        writer.writerow(['nu', 'gamma', 'rho', 'v_residual', 'u_residual'])
        for nu in range(es.N):
            writer.writerow([nu + 1, _fmt(frequencies[nu]), _fmt(es.rho[nu]), _fmt(v_rows[nu]),
                             _fmt(u_rows[nu])])


def _common(parser):
    parser.add_argument('--model', choices=sorted(FAMILIES), default=None)
    parser.add_argument('--trials', type=int, default=None, help='binomial trials a')
    parser.add_argument('--m', type=int, default=None, help='Sobolev order')
    parser.add_argument('--beta', type=float, default=None, help='prior regularity, > 1')
    parser.add_argument('--sigma2', type=float, default=1.0, help='null space prior variance')
    parser.add_argument('--tau-scale', type=float, default=None,
                        help='factor of the prior precisions tau_nu^2 beyond the null space')
    parser.add_argument('--h-scale', type=float, default=None,
                        help='constant factor of the GCV to prior bandwidth map')
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--out', default='-', help='output CSV path (or directory for coverage)')
    parser.add_argument('--N', type=int, default=None, help='truncation level')
    parser.add_argument('--verbose', action='store_true')


def _smoothing_flags(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--lambda', dest='lam', type=float, default=None)
    group.add_argument('--gcv', action='store_true', help='select lambda by GCV (default)')
    parser.add_argument('--gcv-out', default=None, help='write the GCV curve as CSV')


def build_parser():
    parser = argparse.ArgumentParser('splinebayes', description='Smoothing spline credible sets under the tuning prior')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    fit = sub.add_parser('fit', help='penalized likelihood fit on a 512 point grid')
    fit.add_argument('data', help='CSV with header x,y')
    _common(fit)
    _smoothing_flags(fit)
    fit.add_argument('--grid-out', default=None)
    fit.set_defaults(func=cmd_fit)

    sample = sub.add_parser('sample', help='posterior paths on a grid')
    sample.add_argument('data')
    _common(sample)
    _smoothing_flags(sample)
    sample.add_argument('--paths', type=int, default=10)
    sample.add_argument('--grid-size', type=int, default=101)
    sample.add_argument('--alpha', type=float, default=0.05)
    sample.add_argument('--band-out', default=None, help='pointwise credible band CSV')
    sample.set_defaults(func=cmd_sample)

    interval = sub.add_parser('interval', help='credible interval of a linear functional')
    interval.add_argument('data')
    _common(interval)
    _smoothing_flags(interval)
    interval.add_argument('--functional', required=True, help='eval:z or integral:z0')
    interval.add_argument('--alpha', type=float, default=0.05)
    interval.set_defaults(func=cmd_interval)

    coverage = sub.add_parser('coverage', help='coverage experiment')
    _common(coverage)
    coverage.add_argument('--config', default=None, help='yaml/json file or preset:<name>')
    coverage.add_argument('--replications', type=int, default=None)
    coverage.add_argument('--n', type=int, nargs='+', default=None)
    coverage.add_argument('--radius-method', choices=['monte_carlo', 'asymptotic'], default=None)
    tuning = coverage.add_mutually_exclusive_group()
    tuning.add_argument('--gcv', action='store_true')
    tuning.add_argument('--fixed-h', type=float, default=None)
    coverage.add_argument('--gcv-out', default=None,
                          help='write the GCV curve of the first replicate at the smallest n')
    coverage.set_defaults(func=cmd_coverage)

    eigen = sub.add_parser('eigen', help='dump the eigen-system')
    _common(eigen)
    eigen.add_argument('--basis', default='auto')
    eigen.add_argument('--quad-order', type=int, default=2048)
    eigen.set_defaults(func=cmd_eigen)
    return parser


def _resolve_defaults(args):
    # remember which common flags were given so config files keep precedence otherwise
    args.model_given = args.model is not None
    args.m_given, args.beta_given = args.m, args.beta
    args.trials_given, args.seed_given = args.trials, args.seed
    args.tau_scale_given, args.h_scale_given = args.tau_scale, args.h_scale
    args.tau_scale = args.tau_scale if args.tau_scale is not None else 1.0
    args.h_scale = args.h_scale if args.h_scale is not None else 1.0
    args.model = args.model or 'gaussian'
    args.m = args.m or 2
    args.beta = args.beta if args.beta is not None else 2.0
    args.trials = args.trials or 1
    args.seed = args.seed if args.seed is not None else 1978
    return args


def main(argv=None):
    logging.basicConfig(level=logging.INFO,
                        datefmt='[%H:%M:%S]',
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    args = _resolve_defaults(build_parser().parse_args(argv))
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        args.func(args)
    except (SplineBayesError, argparse.ArgumentTypeError) as e:
        logger.error('%s: %s', type(e).__name__, e)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
