"""
Exception hierarchy shared by every numerical module.

Each class carries the process exit code the CLI maps it to, so callers
never have to translate exception types by hand.
"""


class HmpError(Exception):
    """Base class for all library errors"""
    exit_code = 1


class DomainError(HmpError, ValueError):
    """A point, matrix or map lies outside the domain of the operation"""
    exit_code = 2


class SingularityError(HmpError, ValueError):
    """Zero normalizer, pole of a fractional linear map, or vanishing denominator"""
    exit_code = 2


class ArgumentError(HmpError, ValueError):
    """A parameter is outside its documented range"""
    exit_code = 2


class ModelError(HmpError, ValueError):
    """Invalid hidden Markov model or radius problem specification"""
    exit_code = 2


class SamplingError(HmpError, ValueError):
    """A rejection sampler exhausted its attempt cap"""
    exit_code = 2


class NumericalError(HmpError, ArithmeticError):
    """Iteration failed to converge or an internal consistency check failed"""
    exit_code = 1


class ResourceError(HmpError, RuntimeError):
    """An enumeration would exceed the configured size guard"""
    exit_code = 3
