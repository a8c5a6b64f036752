"""The exception hierarchy of splinebayes.

   Plain argument misuse is still caught by asserts, the errors below signal the
   numerical and statistical failure modes callers are expected to handle.
"""


class SplineBayesError(Exception):
    """Root of all splinebayes errors."""


class RangeError(SplineBayesError, OverflowError):
    """A natural parameter is outside the range where the link can be evaluated."""


class DomainError(SplineBayesError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigError(SplineBayesError, ValueError):
    """The configuration file or dict failed the sanity check."""


class RootFindingError(SplineBayesError, RuntimeError):
    """The frequency scan found fewer roots than requested."""


class DiscretizationError(SplineBayesError, RuntimeError):
    """The discretized mass form is indefinite or rank deficient.

    Args:
        message (string): The error message.
        suggested_quad_order (int, optional): A quadrature order worth retrying with.
    """
    def __init__(self, message, suggested_quad_order=None):
        super(DiscretizationError, self).__init__(message)
        self.suggested_quad_order = suggested_quad_order


class FitError(SplineBayesError, RuntimeError):
    """Base class of penalized likelihood fitting failures."""


class NonConvergenceError(FitError):
    """Newton iteration did not reach stationarity.

    Args:
        message (string): The error message.
        last_iterate (ndarray): Coefficients of the last accepted iterate.
        iterations (int): Number of Newton iterations run.
        grad_norm (float): Gradient norm at the last iterate.
    """
    def __init__(self, message, last_iterate=None, iterations=0, grad_norm=float('nan')):
        super(NonConvergenceError, self).__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations
        self.grad_norm = grad_norm


class ConditioningError(FitError):
    """The penalized Hessian is numerically singular at the starting point."""


class DegenerateScoreError(SplineBayesError, ArithmeticError):
    """GCV denominator vanished, the smoother interpolates the data."""


class SelectionError(SplineBayesError, ValueError):
    """No valid GCV score to select from."""


class DegenerateRadiusError(SplineBayesError, ArithmeticError):
    """The asymptotic radius formula has a negative radicand."""


class ExperimentError(SplineBayesError, RuntimeError):
    """A coverage experiment could not produce trustworthy records.

    Args:
        message (string): The error message.
        failures (int): Number of failed replicates.
        replications (int): Number of attempted replicates.
    """
    def __init__(self, message, failures=0, replications=0):
        super(ExperimentError, self).__init__(message)
        self.failures = failures
        self.replications = replications
