"""Input validation utilities for bregqn"""
from enum import Enum
from typing import List, Optional

import numpy as np

from bregqn.utils.constants import ERROR_MESSAGES
from bregqn.utils.errors import ValidationError

__all__ = [
    'ValidationError',
    'validate_dimension',
    'validate_vector',
    'validate_positive',
    'validate_nonnegative',
    'validate_unit_interval',
    'validate_wolfe_constants',
    'parse_float_list',
    'parse_int_list',
    'option_text',
]


def validate_dimension(n: int, minimum: int = 1) -> int:
    """
    Validate a problem dimension.

    Args:
        n: Dimension
        minimum: Smallest admissible dimension

    Returns:
        Dimension as int

    Raises:
        ValidationError: If n is not an integer >= minimum
    """
    try:
        value = int(n)
    except (TypeError, ValueError):
        raise ValidationError(f"Dimension must be an integer, got {n!r}")

    if value != n or value < minimum:
        raise ValidationError(f"Dimension must be an integer >= {minimum}, got {n!r}")

    return value


def validate_vector(x, n: Optional[int] = None, name: str = 'vector') -> np.ndarray:
    """
    Validate a real vector.

    Args:
        x: Array-like of reals
        n: Expected length (not checked when None)
        name: Name used in error messages

    Returns:
        1-D float64 array (a copy)

    Raises:
        ValidationError: If x is not 1-D, has the wrong length or non-finite entries
    """
    arr = np.array(x, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")

    if n is not None and arr.shape[0] != n:
        raise ValidationError(
            f"{name}: " + ERROR_MESSAGES['dimension_mismatch'].format(expected=n, actual=arr.shape[0])
        )

    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")

    return arr


def validate_positive(value: float, name: str) -> float:
    """
    Validate a strictly positive finite real.

    Raises:
        ValidationError: If value <= 0 or not finite
    """
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be positive, got {value}")
    return value


def validate_nonnegative(value: float, name: str) -> float:
    """Validate a finite real >= 0."""
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ValidationError(f"{name} must be >= 0, got {value}")
    return value


def validate_unit_interval(value: float, name: str) -> float:
    """Validate a real in the closed interval [0, 1]."""
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {value}")
    return value


def validate_wolfe_constants(c1: float, c2: float) -> None:
    """
    Validate Wolfe constants.

    Raises:
        ValidationError: Unless 0 < c1 < c2 < 1
    """
    if not 0.0 < c1 < c2 < 1.0:
        raise ValidationError(f"Wolfe constants need 0 < c1 < c2 < 1, got c1={c1}, c2={c2}")


def parse_float_list(text: str, name: str = 'list') -> List[float]:
    """
    Parse a comma-separated list of reals, e.g. ``"1,10,1e3"``.

    Raises:
        ValidationError: On empty input or entries that are not numbers
    """
    items = [item.strip() for item in str(text).split(',') if item.strip()]
    if not items:
        raise ValidationError(f"{name} must not be empty")
    try:
        return [float(item) for item in items]
    except ValueError as e:
        raise ValidationError(f"Invalid number in {name}: {e}")


def parse_int_list(text: str, name: str = 'list') -> List[int]:
    """Parse a comma-separated list of integers, e.g. ``"10,100"``."""
    values = parse_float_list(text, name)
    if any(v != int(v) for v in values):
        raise ValidationError(f"{name} must contain integers, got {text!r}")
    return [int(v) for v in values]


def option_text(value) -> str:
    """Lower-case name of an option given as text or as a str-valued Enum member."""
    if isinstance(value, Enum):
        value = value.value
    return str(value).strip().lower()
