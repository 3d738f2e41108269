"""
Utility modules for bregqn: constants, errors, logging, settings, validation
"""
from bregqn.utils.errors import (
    CurvatureViolation,
    DetOverflow,
    DowndateBreakdown,
    EvaluationError,
    LineSearchFailure,
    NonConvergence,
    NotPositiveDefinite,
    NumericalError,
    PotentialError,
    QnError,
    ResampleLimitExceeded,
    UnsupportedFamily,
    ValidationError,
)

__all__ = [
    'QnError',
    'ValidationError',
    'PotentialError',
    'UnsupportedFamily',
    'NumericalError',
    'NotPositiveDefinite',
    'DowndateBreakdown',
    'DetOverflow',
    'CurvatureViolation',
    'NonConvergence',
    'EvaluationError',
    'LineSearchFailure',
    'ResampleLimitExceeded',
]
