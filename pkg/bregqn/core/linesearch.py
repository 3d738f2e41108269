"""
Step-length selection

wolfe_search: weak Wolfe conditions by bracketing and zoom with cubic
(then quadratic, then bisection) interpolation. _cubicmin and _quadmin
follow the private interpolation helpers of scipy.optimize._linesearch.
near_exact_search: bounded Brent minimization of phi (golden section with
parabolic steps), the same algorithm as MATLAB's fminbnd.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from bregqn.utils import constants
from bregqn.utils.constants import ERROR_MESSAGES, LOG_MESSAGES
from bregqn.utils.errors import ValidationError
from bregqn.utils.logging_config import get_logger
from bregqn.utils.settings import Settings
from bregqn.utils.validation import validate_positive, validate_wolfe_constants

logger = get_logger(__name__)

ScalarFn = Callable[[float], float]


class LineSearchMode(str, Enum):
    WOLFE = 'wolfe'
    NEAR_EXACT = 'exact'


@dataclass(frozen=True)
class LineSearchParams:
    mode: LineSearchMode = LineSearchMode.WOLFE
    c1: float = constants.DEFAULT_C1
    c2: float = constants.DEFAULT_C2
    tol_x: float = constants.DEFAULT_TOL_X
    max_evals: int = constants.DEFAULT_MAX_EVALS
    bracket_cap: float = constants.DEFAULT_BRACKET_CAP
    initial_step: float = constants.DEFAULT_INITIAL_STEP

    def __post_init__(self):
        object.__setattr__(self, 'mode', LineSearchMode(self.mode))
        validate_wolfe_constants(self.c1, self.c2)
        validate_positive(self.tol_x, 'tol_x')
        validate_positive(self.initial_step, 'initial_step')
        if self.max_evals < 1:
            raise ValidationError(f"max_evals must be >= 1, got {self.max_evals}")
        if self.bracket_cap < 1:
            raise ValidationError(f"bracket_cap must be >= 1, got {self.bracket_cap}")

    @classmethod
    def from_settings(cls, settings: Settings, mode=LineSearchMode.WOLFE, **overrides) -> 'LineSearchParams':
        values = dict(
            mode=mode,
            c1=settings.c1,
            c2=settings.c2,
            tol_x=settings.tol_x,
            max_evals=settings.max_evals,
            bracket_cap=settings.bracket_cap,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class LineSearchResult:
    """alpha with phi(alpha); converged is False when the evaluation budget ran out"""
    alpha: float
    phi: float
    evals: int
    converged: bool = True


def _cubicmin(a, fa, fpa, b, fb, c, fc) -> Optional[float]:
    """Minimizer of the cubic through (a,fa), (b,fb), (c,fc) with slope fpa at a, or None."""
    with np.errstate(divide='raise', over='raise', invalid='raise'):
        try:
            C = fpa
            db = b - a
            dc = c - a
            denom = (db * dc) ** 2 * (db - dc)
            d1 = np.array([[dc ** 2, -db ** 2], [-dc ** 3, db ** 3]])
            A, B = d1 @ np.array([fb - fa - C * db, fc - fa - C * dc])
            A /= denom
            B /= denom
            radical = B * B - 3 * A * C
            xmin = a + (-B + np.sqrt(radical)) / (3 * A)
        except ArithmeticError:
            return None
    if not np.isfinite(xmin):
        return None
    return float(xmin)


def _quadmin(a, fa, fpa, b, fb) -> Optional[float]:
    """Minimizer of the parabola through (a,fa), (b,fb) with slope fpa at a, or None."""
    with np.errstate(divide='raise', over='raise', invalid='raise'):
        try:
            db = b - a
            B = (fb - fa - fpa * db) / (db * db)
            xmin = a - fpa / (2.0 * B)
        except ArithmeticError:
            return None
    if not np.isfinite(xmin):
        return None
    return float(xmin)


def wolfe_search(
    phi: ScalarFn,
    dphi: ScalarFn,
    params: LineSearchParams = LineSearchParams(),
    phi0: Optional[float] = None,
    dphi0: Optional[float] = None,
) -> LineSearchResult:
    """
    Find alpha with

        phi(alpha) <= phi(0) + c1 alpha phi'(0)     (sufficient decrease)
        phi'(alpha) >= c2 phi'(0)                   (curvature)

    Args:
        phi: alpha -> f(x + alpha d); may return inf for failed evaluations
        dphi: alpha -> grad f(x + alpha d)^T d
        params: Wolfe constants and evaluation budget
        phi0, dphi0: phi(0) and phi'(0) if already known

    Returns:
        LineSearchResult; converged=False means the budget ran out and alpha
        is the best sufficient-decrease step found (0 if none)

    Raises:
        ValidationError: phi'(0) >= 0
    """
    phi0 = phi(0.0) if phi0 is None else phi0
    dphi0 = dphi(0.0) if dphi0 is None else dphi0
    if not dphi0 < 0:
        raise ValidationError(ERROR_MESSAGES['not_descent'].format(dphi0=dphi0))

    c1, c2 = params.c1, params.c2
    state = {'evals': 0, 'best': (0.0, phi0)}

    def sufficient(alpha: float, value: float) -> bool:
        return value <= phi0 + c1 * alpha * dphi0

    def evaluate(alpha: float) -> float:
        state['evals'] += 1
        value = phi(alpha)
        value = value if math.isfinite(value) else math.inf
        if sufficient(alpha, value) and value < state['best'][1]:
            state['best'] = (alpha, value)
        return value

    def zoom(lo, phi_lo, dphi_lo, hi, phi_hi) -> Optional[LineSearchResult]:
        rec, phi_rec = 0.0, phi0
        first = True
        while state['evals'] < params.max_evals:
            delta = hi - lo
            a_min, a_max = min(lo, hi), max(lo, hi)
            trial = None
            if not first:
                trial = _cubicmin(lo, phi_lo, dphi_lo, hi, phi_hi, rec, phi_rec)
            if trial is None or not a_min + 0.2 * abs(delta) < trial < a_max - 0.2 * abs(delta):
                trial = _quadmin(lo, phi_lo, dphi_lo, hi, phi_hi)
                if trial is None or not a_min + 0.1 * abs(delta) < trial < a_max - 0.1 * abs(delta):
                    trial = lo + 0.5 * delta
            first = False

            phi_t = evaluate(trial)
            if not sufficient(trial, phi_t) or phi_t >= phi_lo:
                rec, phi_rec = hi, phi_hi
                hi, phi_hi = trial, phi_t
            else:
                dphi_t = dphi(trial)
                if dphi_t >= c2 * dphi0:
                    return LineSearchResult(trial, phi_t, state['evals'])
                if dphi_t * (hi - lo) >= 0:
                    rec, phi_rec = hi, phi_hi
                    hi, phi_hi = lo, phi_lo
                else:
                    rec, phi_rec = lo, phi_lo
                lo, phi_lo, dphi_lo = trial, phi_t, dphi_t
            if abs(hi - lo) <= constants.MACHINE_EPS * max(1.0, abs(lo)):
                return None
        return None

    a_prev, phi_prev, dphi_prev = 0.0, phi0, dphi0
    alpha = min(params.initial_step, params.bracket_cap)
    while state['evals'] < params.max_evals:
        phi_a = evaluate(alpha)
        if not sufficient(alpha, phi_a) or (a_prev > 0 and phi_a >= phi_prev):
            result = zoom(a_prev, phi_prev, dphi_prev, alpha, phi_a)
            if result is not None:
                return result
            break
        dphi_a = dphi(alpha)
        if dphi_a >= c2 * dphi0:
            return LineSearchResult(alpha, phi_a, state['evals'])
        if alpha >= params.bracket_cap:
            break
        a_prev, phi_prev, dphi_prev = alpha, phi_a, dphi_a
        alpha = min(2.0 * alpha, params.bracket_cap)

    best_alpha, best_phi = state['best']
    logger.warning(LOG_MESSAGES['wolfe_max_evals'].format(evals=state['evals'], alpha=best_alpha))
    return LineSearchResult(best_alpha, best_phi, state['evals'], converged=False)


def expand_bracket(phi: ScalarFn, bracket_cap: float = constants.DEFAULT_BRACKET_CAP, phi0: Optional[float] = None):
    """
    Upper end of the near-exact search interval: double alpha from 1 until
    phi increases, capped at bracket_cap.

    Returns:
        (alpha_max, number of phi evaluations)
    """
    previous = phi(0.0) if phi0 is None else phi0
    evals = 0 if phi0 is not None else 1
    alpha = 1.0
    while alpha < bracket_cap:
        value = phi(alpha)
        evals += 1
        if not math.isfinite(value) or value > previous:
            return alpha, evals
        previous = value
        alpha *= 2.0
    return float(bracket_cap), evals


def near_exact_search(
    phi: ScalarFn,
    alpha_max: Optional[float] = None,
    tol_x: float = constants.DEFAULT_TOL_X,
    max_evals: int = constants.DEFAULT_MAX_EVALS,
    bracket_cap: float = constants.DEFAULT_BRACKET_CAP,
    phi0: Optional[float] = None,
) -> LineSearchResult:
    """
    Minimize phi on (0, alpha_max] with bounded Brent.

    Args:
        phi: alpha -> f(x + alpha d)
        alpha_max: Right end of the interval (found by expand_bracket when None)
        tol_x: Absolute tolerance on alpha
        max_evals: Iteration budget of the scalar minimizer
        bracket_cap: Cap for the bracket expansion
        phi0: phi(0) if already known

    Returns:
        LineSearchResult with the best alpha found
    """
    evals = 0
    if alpha_max is None:
        alpha_max, evals = expand_bracket(phi, bracket_cap, phi0)
    validate_positive(alpha_max, 'alpha_max')

    def bounded_phi(alpha: float) -> float:
        value = phi(alpha)
        return value if math.isfinite(value) else np.finfo(float).max

    result = optimize.minimize_scalar(
        bounded_phi,
        bounds=(0.0, alpha_max),
        method='bounded',
        options={'xatol': tol_x, 'maxiter': max_evals},
    )
    return LineSearchResult(float(result.x), float(result.fun), evals + int(result.nfev), bool(result.success))


def line_search(
    params: LineSearchParams,
    phi: ScalarFn,
    dphi: ScalarFn,
    phi0: float,
    dphi0: float,
) -> LineSearchResult:
    """Dispatch on params.mode."""
    if params.mode == LineSearchMode.WOLFE:
        return wolfe_search(phi, dphi, params, phi0=phi0, dphi0=dphi0)
    return near_exact_search(
        phi,
        tol_x=params.tol_x,
        max_evals=params.max_evals,
        bracket_cap=params.bracket_cap,
        phi0=phi0,
    )
