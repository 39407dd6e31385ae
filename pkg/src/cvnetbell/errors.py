"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so library code should raise the most
specific class that applies.
"""


class CvNetBellError(Exception):
    """Base class for all package errors."""


class DomainError(CvNetBellError, ValueError):
    """A physical parameter lies outside its allowed range (e.g. s > 0, r < 0)."""


class StructuralError(CvNetBellError, ValueError):
    """Shapes, indices or descriptors are inconsistent."""


class ContractViolation(CvNetBellError, ValueError):
    """A documented precondition between arguments does not hold."""


class NumericError(CvNetBellError, ArithmeticError):
    """A computation is ill-conditioned (singular covariance, overflow)."""


class UnsupportedError(CvNetBellError, NotImplementedError):
    """Valid input that this package deliberately does not handle."""


class ResourceError(CvNetBellError, RuntimeError):
    """A size or truncation limit is insufficient for the requested accuracy."""
