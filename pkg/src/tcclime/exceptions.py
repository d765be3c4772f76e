"""Exception hierarchy shared across the package.

Three branches matter to callers: ConfigError (bad request), DataError (bad
input data), NumericalError (computation failed on valid input). The CLI maps
them to exit codes 2, 3 and 4 respectively.
"""


class TcclimeError(Exception):
    """Base class for all package errors."""


class ConfigError(TcclimeError):
    """A configuration value or combination of values is invalid."""


class DataError(TcclimeError):
    """Input data violates a precondition (shape, type, content)."""


class NumericalError(TcclimeError):
    """A numerical routine failed on otherwise valid input."""


class NotPositiveDefinite(NumericalError):
    """Matrix required to be positive definite is not."""


class NoConvergence(NumericalError):
    """Iterative routine exhausted its iteration budget."""


class NonPositiveDiagonal(NumericalError):
    """Rescaling to a correlation matrix needs a strictly positive diagonal."""


class LengthMismatch(DataError):
    """Paired vectors have different lengths."""


class TooFewSamples(DataError):
    """Not enough observations for the requested statistic."""


class ZeroVariance(DataError):
    """A data column is constant where variation is required."""


class EmptyInformativeSet(ConfigError):
    """A transfer step was requested with no informative studies."""


class DimensionMismatch(DataError):
    """Objects that must share a dimension do not."""


class Infeasible(NumericalError):
    """The constraint set of a column program is empty."""


class NumericalFailure(NumericalError):
    """The LP backend stopped without a clean optimum."""


class QuadratureFailure(NumericalError):
    """Numerical integration did not reach the requested tolerance."""


class DegenerateTruth(DataError):
    """A reference graph has no edges or no non-edges, so a ROC is undefined."""
