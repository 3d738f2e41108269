"""Exception hierarchy for bregqn"""


class QnError(Exception):
    """Base class for all bregqn errors"""
    pass


class ValidationError(QnError, ValueError):
    """Raised when input validation fails"""
    pass


class PotentialError(ValidationError):
    """Raised for potential parameters outside their admissible range"""
    pass


class UnsupportedFamily(ValidationError):
    """Raised when an operation has no formula for the requested update family"""
    pass


class NumericalError(QnError, ArithmeticError):
    """Raised when a numerical procedure cannot produce a valid result"""
    pass


class NotPositiveDefinite(NumericalError):
    pass


class DowndateBreakdown(NumericalError):
    """A sequential Cholesky downdate met a nonpositive pivot"""
    pass


class DetOverflow(NumericalError):
    pass


class CurvatureViolation(NumericalError):
    """s'y is not sufficiently positive"""
    pass


class NonConvergence(NumericalError):
    pass


class EvaluationError(NumericalError):
    """Objective or gradient returned a non-finite value"""
    pass


class LineSearchFailure(NumericalError):
    pass


class ResampleLimitExceeded(NumericalError):
    pass
