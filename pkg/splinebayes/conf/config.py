import os
from ..utils.utility import cfg_from_file
from ..utils.errors import ConfigError
from ..family import FAMILIES
from ..eigen import EIGEN_BACKENDS

PRESET_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'presets')

SECTIONS = {
    'model': ['name', 'm', 'trials'],
    'prior': ['beta', 'sigma2', 'tau_scale'],
    'eigen': ['basis', 'N', 'quad_order'],
    'tuning': ['method', 'h', 'h_scale', 'lambda_grid', 'max_iter', 'tol'],
    'credible': ['method', 'draws', 'tau_omega', 'restricted_factor'],
    'experiment': ['n_list', 'replications', 'alphas', 'seed', 'timeout', 'workers',
                   'eval_points', 'integral_points', 'max_failure_rate'],
    'output': ['dir', 'coverage', 'curve'],
}


class YamlAttr(dict):
    """access yaml using attributes instead of using the dictionary notation.

    Args:
        value (dict): The dict object to access.

    """
    def __init__(self, value=None):
        if value is None:
            pass
        elif isinstance(value, dict):
            for key in value:
                self.__setitem__(key, value[key])
        else:
            raise TypeError('expected dict')

    def __getitem__(self, key):
        return self.get(key, None)

    def __setitem__(self, key, value):
        if isinstance(value, dict) and not isinstance(value, YamlAttr):
            value = YamlAttr(value)
        super(YamlAttr, self).__setitem__(key, value)

    def __getstate__(self):
        return self.__dict__

    def __setstate__(self, d):
        self.__dict__.update(d)

    __setattr__, __getattr__ = __setitem__, __getitem__


def preset_path(name):
    '''Path of a shipped preset, e.g. "desk", "regions" or "functionals".'''
    path = os.path.join(PRESET_DIR, name + '.yaml')
    if not os.path.isfile(path):
        raise ConfigError("preset {} not found in {}".format(name, PRESET_DIR))
    return path


class Conf(object):
    """config parser.

    Args:
        cfg (string or dict): path to a yaml/json configuration file, "preset:<name>",
                              or an already loaded dict.

    """
    def __init__(self, cfg):
        assert cfg is not None
        self.cfg = self._read_cfg(cfg)

    def _read_cfg(self, cfg):
        try:
            if isinstance(cfg, str):
                if cfg.startswith('preset:'):
                    cfg = preset_path(cfg[len('preset:'):])
                cfg = cfg_from_file(cfg) or {}
            cfg = YamlAttr(cfg)
            self._sanity_check(cfg)
            return cfg
        except ConfigError:
            raise
        except Exception as e:
            raise ConfigError(
                "The configuration is not correct ({}). Please refer to docs/tutorial.md.".format(e)
            ) from e

    def _sanity_check(self, cfg):
        for key in cfg.keys():
            assert key in SECTIONS, "unknown section {}".format(key)
            if cfg[key] is None:
                cfg[key] = {}
            assert isinstance(cfg[key], dict), "section {} should be a mapping".format(key)
            for sub in cfg[key].keys():
                assert sub in SECTIONS[key], "unknown key {}.{}".format(key, sub)
        for key in SECTIONS:
            if key not in cfg.keys():
                cfg[key] = {}

        model = cfg.model
        if not model.name:
            model.name = 'gaussian'
        assert model.name.lower() in FAMILIES, \
            "The model {} specified in config is NOT supported".format(model.name)
        model.name = model.name.lower()
        if model.m is None:
            model.m = 2
        assert isinstance(model.m, int) and model.m >= 1, "model.m should be a positive integer"
        if model.trials is None:
            model.trials = 1
        assert isinstance(model.trials, int) and model.trials >= 1

        prior = cfg.prior
        if prior.beta is None:
            prior.beta = 2.0
        prior.beta = float(prior.beta)
        assert prior.beta > 1, "prior.beta should be larger than 1"
        if prior.sigma2 is None:
            prior.sigma2 = [1.0] * model.m
        if not isinstance(prior.sigma2, list):
            prior.sigma2 = [prior.sigma2] * model.m
        prior.sigma2 = [float(s) for s in prior.sigma2]
        assert len(prior.sigma2) == model.m and all(s > 0 for s in prior.sigma2), \
            "prior.sigma2 should hold m positive variances"
        if prior.tau_scale is None:
            prior.tau_scale = 1.0
        prior.tau_scale = float(prior.tau_scale)
        assert prior.tau_scale > 0, "prior.tau_scale should be positive"

        eigen = cfg.eigen
        if not eigen.basis:
            eigen.basis = 'auto'
        assert eigen.basis == 'auto' or eigen.basis in EIGEN_BACKENDS, \
            "The eigen basis {} is NOT supported".format(eigen.basis)
        if eigen.basis == 'freebeam':
            assert model.m == 2, "the free beam basis needs m=2"
        if eigen.N is not None:
            assert isinstance(eigen.N, int) and eigen.N > model.m, "eigen.N should exceed m"
        if not eigen.quad_order:
            eigen.quad_order = 2048

        tuning = cfg.tuning
        if not tuning.method:
            tuning.method = 'gcv'
        assert tuning.method in ['gcv', 'fixed_h'], \
            "The tuning method {} is NOT supported".format(tuning.method)
        if tuning.method == 'fixed_h':
            assert tuning.h is not None and 0 < tuning.h < 1, "fixed_h tuning needs h in (0, 1)"
        if tuning.h_scale is None:
            tuning.h_scale = 1.0
        tuning.h_scale = float(tuning.h_scale)
        assert tuning.h_scale > 0, "tuning.h_scale should be positive"
        if not tuning.lambda_grid:
            tuning.lambda_grid = {}
        grid = tuning.lambda_grid
        for sub in grid.keys():
            assert sub in ['size', 'low', 'high']
        grid.size = grid.size or 40
        grid.low = float(grid.low or 1e-8)
        grid.high = float(grid.high or 10.0)
        assert 0 < grid.low < grid.high and grid.size >= 1
        if not tuning.max_iter:
            tuning.max_iter = 100
        if not tuning.tol:
            tuning.tol = 1e-9

        credible = cfg.credible
        if not credible.method:
            credible.method = 'monte_carlo'
        assert credible.method in ['monte_carlo', 'asymptotic'], \
            "The radius method {} is NOT supported".format(credible.method)
        if not credible.draws:
            credible.draws = 10000
        assert credible.draws >= 10000, "credible.draws should be at least 1e4"
        if credible.tau_omega is None:
            credible.tau_omega = 2.0
        assert credible.tau_omega > 1, "credible.tau_omega should be larger than 1"
        if credible.restricted_factor is None:
            credible.restricted_factor = 2.0
        assert credible.restricted_factor > 0

        experiment = cfg.experiment
        if not experiment.n_list:
            experiment.n_list = [512]
        if not isinstance(experiment.n_list, list):
            experiment.n_list = [experiment.n_list]
        assert all(isinstance(n, int) and n >= 1 for n in experiment.n_list)
        if experiment.replications is None:
            experiment.replications = 500
        assert isinstance(experiment.replications, int) and experiment.replications >= 1, \
            "experiment.replications should be at least 1"
        if not experiment.alphas:
            experiment.alphas = [0.05]
        if not isinstance(experiment.alphas, list):
            experiment.alphas = [experiment.alphas]
        experiment.alphas = [float(a) for a in experiment.alphas]
        assert all(0 < a < 1 for a in experiment.alphas), "experiment.alphas should lie in (0, 1)"
        if experiment.seed is None:
            experiment.seed = 1978
        if not experiment.timeout:
            experiment.timeout = 0
        if experiment.eval_points is None:
            experiment.eval_points = []
        if experiment.integral_points is None:
            experiment.integral_points = []
        for key in ['eval_points', 'integral_points']:
            points = experiment[key]
            if isinstance(points, int):
                # count of evenly spaced interior points
                points = [(k + 1.0) / (points + 1.0) for k in range(points)]
            experiment[key] = [float(z) for z in points]
            assert all(0 <= z <= 1 for z in experiment[key]), \
                "experiment.{} should lie in [0, 1]".format(key)
        if experiment.max_failure_rate is None:
            experiment.max_failure_rate = 0.05

        output = cfg.output
        if not output.dir:
            output.dir = './'
        if not output.coverage:
            output.coverage = 'coverage.csv'
        if not output.curve:
            output.curve = 'curve.csv'
