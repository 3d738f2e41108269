"""
Benchmark objectives

p1: f(x) = 1/2 x^T A x - e^T x
p2: f(x) = 1/2 x^T A x - e^T x - 1/(n+1)^2 sum_i (2 x_i + cos x_i)

A is the tridiagonal matrix with 2 on the diagonal and -1 beside it; it is
never formed for f and grad. User problems use the same Problem record.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from bregqn.utils.constants import ERROR_MESSAGES
from bregqn.utils.errors import EvaluationError, ValidationError
from bregqn.utils.validation import option_text, validate_dimension, validate_vector

ObjectiveFn = Callable[[np.ndarray], float]
GradientFn = Callable[[np.ndarray], np.ndarray]
HessianFn = Callable[[np.ndarray], np.ndarray]


class ProblemKind(str, Enum):
    P1 = 'p1'
    P2 = 'p2'


@dataclass(frozen=True)
class Problem:
    n: int
    f: ObjectiveFn
    grad: GradientFn
    hess: Optional[HessianFn] = None
    name: str = 'user'


def tridiagonal_matvec(x: np.ndarray) -> np.ndarray:
    """A x for A = tridiag(-1, 2, -1)"""
    out = 2.0 * x
    out[:-1] -= x[1:]
    out[1:] -= x[:-1]
    return out


def tridiagonal_matrix(n: int) -> np.ndarray:
    return 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)


def make_problem(kind, n: int) -> Problem:
    """
    Build benchmark problem p1 or p2 of dimension n >= 2.

    Raises:
        ValidationError: Unknown kind or n < 2
    """
    n = validate_dimension(n, minimum=2)
    try:
        kind = ProblemKind(option_text(kind))
    except ValueError:
        raise ValidationError(f"Unknown problem '{kind}'. Expected p1 or p2")

    if kind == ProblemKind.P1:
        def f(x):
            return 0.5 * float(x @ tridiagonal_matvec(x)) - float(np.sum(x))

        def grad(x):
            return tridiagonal_matvec(x) - 1.0

        def hess(x):
            return tridiagonal_matrix(n)

        return Problem(n=n, f=f, grad=grad, hess=hess, name=kind.value)

    c = 1.0 / (n + 1) ** 2

    def f(x):
        return 0.5 * float(x @ tridiagonal_matvec(x)) - float(np.sum(x)) - c * float(np.sum(2.0 * x + np.cos(x)))

    def grad(x):
        return tridiagonal_matvec(x) - 1.0 - c * (2.0 - np.sin(x))

    def hess(x):
        return tridiagonal_matrix(n) + c * np.diag(np.cos(x))

    return Problem(n=n, f=f, grad=grad, hess=hess, name=kind.value)


def evaluate(problem: Problem, x: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Return (f(x), grad f(x)).

    Raises:
        ValidationError: Dimension mismatch
        EvaluationError: Non-finite objective or gradient
    """
    x = validate_vector(x, n=problem.n, name='x')
    value = float(problem.f(x))
    if not math.isfinite(value):
        raise EvaluationError(ERROR_MESSAGES['non_finite'].format(what='objective', norm=np.linalg.norm(x)))
    g = np.asarray(problem.grad(x), dtype=float)
    if g.shape != (problem.n,) or not np.all(np.isfinite(g)):
        raise EvaluationError(ERROR_MESSAGES['non_finite'].format(what='gradient', norm=np.linalg.norm(x)))
    return value, g
