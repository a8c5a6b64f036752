"""Helpers shared across splinebayes: config file loading, averaging, timeouts and
   worker pool sizing.
"""

import numbers
import os
import time
import numpy as np
import yaml
from sklearn.utils import check_random_state

THREADS_ENV = 'SPLINEBAYES_THREADS'


def cfg_from_file(file_name):
    """Load a yaml (or json) config file into a plain dict.

       Args:
           file_name (string): The name of configuration file
    """
    with open(file_name, 'r') as f:
        yaml_cfg = yaml.load(f, yaml.SafeLoader)

    return yaml_cfg


class AverageMeter(object):
    """Running average of the values passed to update."""
    def __init__(self):
        self.reset()

    def reset(self):
        self.sum = 0
        self.cnt = 0
        self.avg = 0

    def update(self, val):
        self.cnt += 1
        self.sum += val
        self.avg = self.sum / self.cnt


class Timeout(object):
    """Timeout class to check if spending time is beyond target.

       Args:
           seconds (optional, integar): the timeout value, 0 means no limit.
    """
    def __init__(self, seconds=0):
        self.seconds = seconds

    def __enter__(self):
        self.die_after = time.time() + self.seconds
        return self

    def __exit__(self, type, value, traceback):
        pass

    @property
    def timed_out(self):
        return self.seconds != 0 and time.time() > self.die_after


def worker_count(requested=None):
    """Number of replicate workers, capped by the SPLINEBAYES_THREADS variable.

       Args:
           requested (optional, int): explicit request, defaults to the cpu count.
    """
    count = requested or os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError:
            raise ValueError("{} must be an integer, got {!r}".format(THREADS_ENV, cap))
    return max(1, count)


def as_generator(rng):
    """Normalize a seed, RandomState or Generator to a numpy Generator.

       Args:
           rng (None, int, RandomState or Generator): the random source.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, numbers.Integral):
        return np.random.default_rng(rng)
    state = check_random_state(rng)
    return np.random.default_rng(state.randint(np.iinfo(np.int32).max))
