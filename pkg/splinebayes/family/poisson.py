from .family import family_registry, ExpFamilyModel, ETA_LIMIT
from ..utils.errors import RangeError
import numpy as np


@family_registry
class PoissonFamily(ExpFamilyModel):
    '''Poisson regression with log link, A(z) = e^z and so are its derivatives.

       Responses come from numpy's Poisson generator, which is exact: inversion by
       sequential search for small means and transformed rejection above.
    '''
    name = 'poisson'
    response_support = 'nonnegative integers'

    def __init__(self):
        self._freeze()

    def check_range(self, eta):
        if np.any(np.abs(eta) > ETA_LIMIT):
            raise RangeError("exp({}) is not representable".format(float(np.max(np.abs(eta)))))

    def A(self, z):
        return np.exp(z)

    Adot = Addot = Adddot = A

    def _draw(self, eta, rng):
        return np.asarray(rng.poisson(np.exp(eta)), dtype=float)

    def in_support(self, y):
        y = np.asarray(y, dtype=float)
        return (y >= 0) & (np.floor(y) == y)
