"""Exception hierarchy shared by all kloostlab modules."""


class KloostlabError(Exception):
    """Base class for library errors."""


class DomainError(KloostlabError, ValueError):
    """A parameter lies outside the range where a formula is defined."""


class ZeroInverse(KloostlabError, ZeroDivisionError):
    """Attempted to invert a residue congruent to zero."""


class PrecisionExhausted(KloostlabError, ArithmeticError):
    """A certified floor could not be decided at the maximum working precision."""


class QuadratureFailure(KloostlabError, ArithmeticError):
    """Numerical integration did not reach the requested tolerance."""


class DegenerateDecomposition(KloostlabError, ValueError):
    """The segment decomposition would contain no segments."""


class RangeError(KloostlabError, ValueError):
    """Size preconditions of a bound are not met."""


class ConfigError(KloostlabError, ValueError):
    """An experiment configuration is malformed."""


class ComputeError(KloostlabError, RuntimeError):
    """A computation inside an experiment failed."""


class FieldError(KloostlabError, KeyError):
    """A requested result field does not exist."""
