from .family import family_registry, ExpFamilyModel
import numpy as np


@family_registry
class GaussianFamily(ExpFamilyModel):
    '''Gaussian regression with unit noise variance, A(z) = z^2/2.'''
    name = 'gaussian'
    response_support = 'real line'

    def __init__(self):
        self._freeze()

    def A(self, z):
        return 0.5 * np.square(z)

    def Adot(self, z):
        return np.array(z, dtype=float)

    def Addot(self, z):
        return np.ones_like(z, dtype=float)

    def Adddot(self, z):
        return np.zeros_like(z, dtype=float)

    def _draw(self, eta, rng):
        return eta + rng.standard_normal(size=eta.shape)

    def in_support(self, y):
        return np.isfinite(y)
