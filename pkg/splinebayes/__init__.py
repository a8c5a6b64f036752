from .family import FAMILIES, get_family
from .eigen import EIGEN_BACKENDS, build_eigensystem, default_truncation, project, norm
from .spline import Dataset, FitOptions, fit_penalized_mle, evaluate_fit
from .tuning import gcv_curve, select_h, prior_h_from_gcv, tune_lambda
from .posterior import build_prior, build_posterior, sample_posterior, sample_prior
from .credible import (REGIONS, LinearFunctional, RadiusSpec, functional_interval, region_contains,
                       strong_radius, weak_radius)
from .simulation import SimConfig, run_coverage_experiment, true_function_beta_mix
from .conf import Conf
