from .family import family_registry, ExpFamilyModel, ETA_LIMIT
from ..utils.errors import RangeError
from scipy.special import expit
import numpy as np


@family_registry
class BinomialFamily(ExpFamilyModel):
    '''Binomial regression with a trials, A(z) = a log(1 + e^z).

    Args:
        a (int): number of trials, a=1 gives binary regression.
    '''
    name = 'binomial'

    def __init__(self, a=1):
        assert int(a) == a and a >= 1, "number of trials should be a positive integer"
        self.a = int(a)
        self.response_support = 'integers 0..{}'.format(self.a)
        self._freeze()

    def check_range(self, eta):
        if np.any(np.abs(eta) > ETA_LIMIT):
            raise RangeError("natural parameter beyond +-{} for {}".format(ETA_LIMIT, self.name))

    def A(self, z):
        return self.a * np.logaddexp(0.0, z)

    def Adot(self, z):
        return self.a * expit(z)

    def Addot(self, z):
        p = expit(z)
        return self.a * p * (1.0 - p)

    def Adddot(self, z):
        p = expit(z)
        return self.a * p * (1.0 - p) * (1.0 - 2.0 * p)

    def _draw(self, eta, rng):
        return np.asarray(rng.binomial(self.a, expit(eta)), dtype=float)

    def in_support(self, y):
        y = np.asarray(y, dtype=float)
        return (y >= 0) & (y <= self.a) & (np.floor(y) == y)

    def __repr__(self):
        return '{}(a={})'.format(type(self).__name__, self.a)


@family_registry
class BinaryFamily(BinomialFamily):
    '''Logistic regression, the one-trial binomial family.'''
    name = 'binary'

    def __init__(self):
        super(BinaryFamily, self).__init__(a=1)

    def __repr__(self):
        return 'BinaryFamily()'
