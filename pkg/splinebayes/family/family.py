from abc import abstractmethod
import numpy as np

'''The natural exponential families supported by splinebayes.

   A family is fixed by its log-partition A: the conditional density of Y given X=x
   is proportional to exp(y f(x) - A(f(x))). User could add a new family by
   implementing an ExpFamilyModel subclass under this directory. The naming
   convention of the subclass is ABCFamily, and it is then selected with the "abc"
   string in the model.name field of the config.

   FAMILIES variable is used to store all implemented ExpFamilyModel subclasses.
'''
FAMILIES = {}

# exp() overflows just above 709
ETA_LIMIT = 700.0


def family_registry(cls):
    '''The class decorator used to register all ExpFamilyModel subclasses.

       Args:
           cls (class): The class of register.
    '''
    assert cls.__name__.endswith('Family'), "The name of subclass of ExpFamilyModel should end with \'Family\' substring."
    if cls.__name__[:-len('Family')].lower() in FAMILIES:
        raise ValueError('Cannot have two families with the same name.')
    FAMILIES[cls.__name__[:-len('Family')].lower()] = cls
    return cls


def get_family(name, **kwargs):
    '''Instantiate a registered family by name.

       Args:
           name (string): registry key, e.g. "gaussian", "binary", "binomial", "poisson".
           kwargs: family parameters, e.g. a=5 for binomial.
    '''
    key = name.lower()
    assert key in FAMILIES, "The family {} is NOT supported, choose from {}".format(name, sorted(FAMILIES))
    return FAMILIES[key](**kwargs)


class ExpFamilyModel(object):
    '''The base class of exponential family regression models.

       Instances are immutable after construction. Every method accepts scalars or
       numpy arrays of natural parameters.
    '''
    name = None
    response_support = None

    def __setattr__(self, key, value):
        if getattr(self, '_frozen', False):
            raise AttributeError('{} is immutable'.format(type(self).__name__))
        super(ExpFamilyModel, self).__setattr__(key, value)

    def _freeze(self):
        self._frozen = True

    def check_range(self, eta):
        '''Raise RangeError when the link cannot be evaluated at eta.'''
        pass

    @abstractmethod
    def A(self, z):
        raise NotImplementedError

    @abstractmethod
    def Adot(self, z):
        raise NotImplementedError

    @abstractmethod
    def Addot(self, z):
        raise NotImplementedError

    @abstractmethod
    def Adddot(self, z):
        raise NotImplementedError

    @abstractmethod
    def _draw(self, eta, rng):
        raise NotImplementedError

    @abstractmethod
    def in_support(self, y):
        '''Elementwise check that y is a possible response value.'''
        raise NotImplementedError

    def link_derivatives(self, z):
        '''Evaluate A and its first three derivatives.

           Args:
               z (float or ndarray): finite natural parameter(s).

           Returns:
               tuple: (A, Adot, Addot, Adddot) evaluated at z.
        '''
        z = np.asarray(z, dtype=float)
        assert np.all(np.isfinite(z)), "natural parameter must be finite"
        self.check_range(z)
        values = (self.A(z), self.Adot(z), self.Addot(z), self.Adddot(z))
        if values[0].ndim == 0:
            return tuple(float(v) for v in values)
        return values

    def sample_response(self, eta, rng):
        '''Draw responses given natural parameter(s) eta.

           Args:
               eta (float or ndarray): natural parameter(s).
               rng (numpy.random.Generator): explicitly passed random source.

           Returns:
               float or ndarray: draws with mean Adot(eta).
        '''
        eta = np.asarray(eta, dtype=float)
        assert np.all(np.isfinite(eta)), "natural parameter must be finite"
        self.check_range(eta)
        draws = self._draw(eta, rng)
        if np.ndim(draws) == 0:
            return float(draws)
        return draws

    def regularity_bounds(self, C, grid_size=2001):
        '''Grid bounds on Addot and |Adddot| over [-2C, 2C].

           Args:
               C (float): positive bound on the sup norm of the regression function.
               grid_size (int): number of grid points; 0 and the endpoints are always included.

           Returns:
               tuple: (min Addot, max Addot, max |Adddot|).

           Raises:
               RangeError: 2C exceeds the range where the link can be evaluated.
        '''
        assert C > 0, "C should be positive"
        grid = np.union1d(np.linspace(-2.0 * C, 2.0 * C, max(int(grid_size), 2)), [0.0])
        self.check_range(grid)
        addot = self.Addot(grid)
        return float(np.min(addot)), float(np.max(addot)), float(np.max(np.abs(self.Adddot(grid))))

    def __repr__(self):
        return '{}()'.format(type(self).__name__)
