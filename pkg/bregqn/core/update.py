"""
Hessian update formulae

Classical BFGS/DFP rank-two updates, the scale equation that fixes the
determinant of a V-Bregman update, the primal V-BFGS update and the
dispatch over the update families:

    vbfgs-b   B+ = primal(B, s, y)
    vdfp-h    H+ = primal(H, y, s)
    vdfp-b    B+ = primal(B^-1, y, s)^-1     (inverse_primal_update on B)
    vbfgs-h   H+ = primal(H^-1, s, y)^-1     (inverse_primal_update on H)
    broyden   mix * vbfgs-b(V1) + (1 - mix) * vdfp-b(V2)

primal(M, u, v) = theta * BFGS[M; u, v] + (1 - theta) v v^T / u^T v with
theta = nu(z*) / nu(det M), where z* = det of the result solves
log z - (n-1) log nu(z) = logdet BFGS[M; u, v] - (n-1) log nu(det M).
All scale arithmetic is done on logarithms.
"""
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from bregqn.core.potential import Potential, make_potential, parse_potential
from bregqn.core.spd import SpdCholesky, cholesky
from bregqn.utils import constants
from bregqn.utils.constants import ERROR_MESSAGES, LOG_MESSAGES
from bregqn.utils.errors import CurvatureViolation, DowndateBreakdown, NonConvergence, ValidationError
from bregqn.utils.logging_config import get_logger
from bregqn.utils.validation import validate_unit_interval, validate_vector

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class SecantPair:
    """Step s = x+ - x and gradient difference y = g+ - g"""
    s: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        s = validate_vector(self.s, name='s')
        y = validate_vector(self.y, n=s.shape[0], name='y')
        object.__setattr__(self, 's', s)
        object.__setattr__(self, 'y', y)

    @property
    def curvature(self) -> float:
        return float(self.s @ self.y)

    def satisfies_curvature(self) -> bool:
        margin = constants.CURVATURE_RTOL * float(np.linalg.norm(self.s) * np.linalg.norm(self.y))
        return self.curvature > margin

    def perturbed(self, eps: float, y_bar: np.ndarray, s_bar: Optional[np.ndarray] = None) -> 'SecantPair':
        """(s + eps s_bar, y + eps y_bar); s_bar defaults to s"""
        s_bar = self.s if s_bar is None else s_bar
        return SecantPair(self.s + eps * np.asarray(s_bar, dtype=float), self.y + eps * np.asarray(y_bar, dtype=float))


def check_curvature(u: np.ndarray, v: np.ndarray) -> float:
    """
    Return u^T v.

    Raises:
        CurvatureViolation: If u^T v <= 1e-12 |u| |v|
    """
    uv = float(u @ v)
    if not uv > constants.CURVATURE_RTOL * float(np.linalg.norm(u) * np.linalg.norm(v)):
        raise CurvatureViolation(ERROR_MESSAGES['curvature'].format(sy=uv))
    return uv


def _refactor(dense: np.ndarray) -> SpdCholesky:
    logger.debug(LOG_MESSAGES['dense_fallback'].format(n=dense.shape[0]))
    return cholesky(dense, check_symmetry=False)


def bfgs_core(B: SpdCholesky, s: np.ndarray, y: np.ndarray) -> SpdCholesky:
    """B - B s s^T B / s^T B s + y y^T / s^T y as an update then a downdate of L."""
    sy = check_curvature(s, y)
    Bs = B.matvec(s)
    sBs = float(s @ Bs)
    try:
        return B.rank_one_modify(y / math.sqrt(sy), 1).rank_one_modify(Bs / math.sqrt(sBs), -1)
    except DowndateBreakdown:
        return _refactor(B.matrix() - np.outer(Bs, Bs) / sBs + np.outer(y, y) / sy)


def dfp_core(B: SpdCholesky, s: np.ndarray, y: np.ndarray) -> SpdCholesky:
    """(I - y s^T / s^T y) B (I - s y^T / s^T y) + y y^T / s^T y, refactorized."""
    sy = check_curvature(s, y)
    P = np.eye(B.n) - np.outer(y, s) / sy
    return cholesky(P @ B.matrix() @ P.T + np.outer(y, y) / sy, check_symmetry=False)


def solve_log_scale_equation(log_c: float, potential: Potential, n: int) -> float:
    """
    Root t = log z* of zeta(t) = t - (n-1) log nu(exp(t)) = log_c.

    zeta'(t) = 1 - (n-1) beta(exp(t)) > 1/n, so the root is unique. The
    bracket grows from exp(log_c) by a factor 10 whose exponent doubles at
    every expansion; inside it Newton steps that leave the bracket are
    replaced by bisection.

    Raises:
        ValidationError: Non-finite log_c
        NonConvergence: No root after 200 iterations
    """
    if not math.isfinite(log_c):
        raise ValidationError(f"Scale equation needs a finite log C, got {log_c}")
    if n == 1:
        return log_c

    def residual(t: float) -> float:
        return t - (n - 1) * potential.log_nu(t) - log_c

    scale = max(1.0, abs(log_c))
    tol = constants.SCALE_RESIDUAL_TOL * scale
    # iterate to rounding level; tol is only the acceptance bound
    tight = 4.0 * constants.MACHINE_EPS * scale
    t = log_c
    f = residual(t)
    if abs(f) <= tight:
        return t

    lo, hi = t, t
    step = math.log(constants.SCALE_BRACKET_FACTOR)
    for _ in range(constants.SCALE_MAX_ITER):
        if f < 0:
            lo, hi = hi, hi + step
            if residual(hi) >= 0:
                break
        else:
            lo, hi = lo - step, lo
            if residual(lo) <= 0:
                break
        step *= 2.0
    else:
        raise NonConvergence(ERROR_MESSAGES['nonconvergence'].format(iters=constants.SCALE_MAX_ITER, residual=f))

    best_t, best_f = t, f
    t = min(max(t, lo), hi)
    for _ in range(constants.SCALE_MAX_ITER):
        f = residual(t)
        if abs(f) < abs(best_f):
            best_t, best_f = t, f
        if abs(f) <= tight:
            return t
        if f < 0:
            lo = t
        else:
            hi = t
        slope = 1.0 - (n - 1) * potential.beta_at_log(t)
        t_new = t - f / slope if slope > 0 else math.nan
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if t_new == t or hi - lo <= 4.0 * constants.MACHINE_EPS * max(1.0, abs(t)):
            break
        t = t_new
    if abs(best_f) <= tol:
        return best_t
    raise NonConvergence(ERROR_MESSAGES['nonconvergence'].format(iters=constants.SCALE_MAX_ITER, residual=best_f))


def solve_scale_equation(log_c: float, potential: Potential, n: int) -> float:
    """z* solving log z - (n-1) log nu(z) = log_c (may be inf if z* overflows)."""
    return _safe_exp(solve_log_scale_equation(log_c, potential, n))


def _safe_exp(t: float) -> float:
    return math.exp(t) if t < constants.LOG_MAX_FLOAT else math.inf


@dataclass(frozen=True, eq=False)
class PrimalUpdate:
    """Result of a primal update: new factor, mixing weight theta and log z*, the log det of the primal solution"""
    factor: SpdCholesky
    theta: float
    log_z_star: float

    @property
    def z_star(self) -> float:
        return _safe_exp(self.log_z_star)


def primal_update(M: SpdCholesky, u: np.ndarray, v: np.ndarray, potential: Potential) -> PrimalUpdate:
    """
    Minimizer of D_V(X, M) over positive-definite X with X u = v.

    X = theta * BFGS[M; u, v] + (1 - theta) v v^T / u^T v, built by scaling
    the BFGS factor by sqrt(theta) and a rank-one modification with
    sqrt(|1 - theta| / u^T v) v of sign (1 - theta).

    Raises:
        CurvatureViolation: u^T v not sufficiently positive
    """
    uv = check_curvature(u, v)
    n = M.n
    bfgs = bfgs_core(M, u, v)
    log_nu_m = potential.log_nu(M.logdet())
    log_c = bfgs.logdet() - (n - 1) * log_nu_m
    t = solve_log_scale_equation(log_c, potential, n)
    theta = math.exp(potential.log_nu(t) - log_nu_m)

    return PrimalUpdate(blend_with_secant(bfgs, theta, v, uv), theta, t)


def blend_with_secant(bfgs: SpdCholesky, theta: float, v: np.ndarray, uv: float) -> SpdCholesky:
    """Factor of theta * bfgs + (1 - theta) v v^T / uv."""
    if theta == 1.0:
        return bfgs
    w = math.sqrt(abs(1.0 - theta) / uv) * v
    try:
        return bfgs.scaled(theta).rank_one_modify(w, 1 if theta < 1.0 else -1)
    except DowndateBreakdown:
        return _refactor(theta * bfgs.matrix() + (1.0 - theta) * np.outer(v, v) / uv)


def power_mixing_coefficient(B: SpdCholesky, s: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """Closed-form theta = (s^T y / s^T B s)^rho, rho = gamma / (1 - (n-1) gamma), of the power potential."""
    rho = gamma / (1.0 - (B.n - 1) * gamma)
    return (float(s @ y) / float(s @ B.matvec(s))) ** rho


def inverse_primal_update(N: SpdCholesky, u: np.ndarray, v: np.ndarray, potential: Potential) -> PrimalUpdate:
    """
    Factor of primal_update(N^-1, u, v)^-1 computed from N itself.

    With M = N^-1 and X = primal(M, u, v),

        X^-1 = (1/theta) DFP[N; v, u] + (1 - 1/theta) u u^T / u^T v

    since DFP[N; v, u] is the inverse of BFGS[M; u, v]. theta and log_z_star
    are those of the primal problem, so det X^-1 = exp(-log_z_star).

    Raises:
        CurvatureViolation: u^T v not sufficiently positive
    """
    uv = check_curvature(u, v)
    n = N.n
    dfp = dfp_core(N, v, u)
    log_nu_m = potential.log_nu(-N.logdet())
    t = solve_log_scale_equation(-dfp.logdet() - (n - 1) * log_nu_m, potential, n)
    theta = math.exp(potential.log_nu(t) - log_nu_m)
    return PrimalUpdate(blend_with_secant(dfp, 1.0 / theta, u, uv), theta, t)


def vdfp_direct(B: SpdCholesky, s: np.ndarray, y: np.ndarray, potential: Potential) -> SpdCholesky:
    """
    V-DFP update of B without going through B^{-1}:

        B+ = r DFP[B; s, y] + (1 - r) y y^T / s^T y,  r = nu(1/det B) / nu(1/det B+)
    """
    return inverse_primal_update(B, y, s, potential).factor


def nu_of(A: SpdCholesky, potential: Potential) -> float:
    """nu(det A) through log det"""
    return math.exp(potential.log_nu(A.logdet()))


def stationarity_residual(B: SpdCholesky, B_next: SpdCholesky, potential: Potential) -> np.ndarray:
    """
    R = -nu(det B+) B+^{-1} + nu(det B) B^{-1}.

    For the primal update R = s l^T + l s^T for some l, so R has rank <= 2.
    """
    R = -nu_of(B_next, potential) * B_next.invert().matrix() + nu_of(B, potential) * B.invert().matrix()
    return 0.5 * (R + R.T)


def bregman_divergence(P: SpdCholesky, Q: SpdCholesky, potential: Potential) -> float:
    """
    D_V(P, Q) = V(det P) - V(det Q) + nu(det Q) <Q^{-1}, P> - n nu(det Q).

    Zero iff P = Q; for the negative log it is twice the Kullback-Leibler
    divergence between N(0, Q^{-1}) and N(0, P^{-1}).
    """
    nu_q = nu_of(Q, potential)
    trace = float(np.trace(Q.solve(P.matrix())))
    return (
        potential.value_at_log(P.logdet())
        - potential.value_at_log(Q.logdet())
        + nu_q * trace
        - P.n * nu_q
    )


class FamilyKind(str, Enum):
    VBFGS_B = 'vbfgs-b'
    VDFP_B = 'vdfp-b'
    VBFGS_H = 'vbfgs-h'
    VDFP_H = 'vdfp-h'
    BROYDEN = 'broyden'


@dataclass(frozen=True)
class UpdateFamily:
    """
    Update family with its potential. For broyden, ``mix`` weighs the
    vbfgs-b result built with ``potential`` against the vdfp-b result built
    with ``dfp_potential``.
    """
    kind: FamilyKind
    potential: Potential
    mix: float = 1.0
    dfp_potential: Optional[Potential] = field(default=None)

    def __post_init__(self):
        if self.kind == FamilyKind.BROYDEN:
            validate_unit_interval(self.mix, 'Broyden weight')
            if self.dfp_potential is None:
                raise ValidationError("broyden family needs a second potential")

    @classmethod
    def vbfgs_b(cls, potential: Potential) -> 'UpdateFamily':
        return cls(FamilyKind.VBFGS_B, potential)

    @classmethod
    def vdfp_b(cls, potential: Potential) -> 'UpdateFamily':
        return cls(FamilyKind.VDFP_B, potential)

    @classmethod
    def vbfgs_h(cls, potential: Potential) -> 'UpdateFamily':
        return cls(FamilyKind.VBFGS_H, potential)

    @classmethod
    def vdfp_h(cls, potential: Potential) -> 'UpdateFamily':
        return cls(FamilyKind.VDFP_H, potential)

    @classmethod
    def broyden(cls, mix: float, bfgs_potential: Potential, dfp_potential: Potential) -> 'UpdateFamily':
        return cls(FamilyKind.BROYDEN, bfgs_potential, mix=mix, dfp_potential=dfp_potential)

    @property
    def inverse_state(self) -> bool:
        """True when the state approximates the inverse Hessian"""
        return self.kind in (FamilyKind.VBFGS_H, FamilyKind.VDFP_H)

    @property
    def label(self) -> str:
        if self.kind == FamilyKind.BROYDEN:
            return f"broyden:theta={self.mix!r},v1={self.potential.label},v2={self.dfp_potential.label}"
        return self.kind.value


_BROYDEN_RE = re.compile(r'^theta=(?P<mix>[^,]+),v1=(?P<v1>.+),v2=(?P<v2>.+)$')


def parse_family(text: str, potential: Optional[Potential] = None) -> UpdateFamily:
    """
    Parse ``vbfgs-b``, ``vdfp-b``, ``vbfgs-h``, ``vdfp-h`` or
    ``broyden:theta=<t>,v1=<pot>,v2=<pot>``. Non-Broyden families use
    ``potential`` (negative log when omitted).
    """
    name, _, rest = str(text).strip().partition(':')
    name = name.strip().lower()
    if name == FamilyKind.BROYDEN.value:
        match = _BROYDEN_RE.match(rest.replace(' ', ''))
        if not match:
            raise ValidationError(ERROR_MESSAGES['unknown_family'].format(name=text))
        try:
            mix = float(match['mix'])
        except ValueError:
            raise ValidationError(f"Invalid Broyden weight in '{text}'")
        return UpdateFamily.broyden(mix, parse_potential(match['v1']), parse_potential(match['v2']))
    try:
        kind = FamilyKind(name)
    except ValueError:
        raise ValidationError(ERROR_MESSAGES['unknown_family'].format(name=text))
    return UpdateFamily(kind, potential if potential is not None else make_potential('neglog'))


@dataclass(frozen=True, eq=False)
class FamilyStep:
    factor: SpdCholesky
    theta: float


def apply_family(family: UpdateFamily, state: SpdCholesky, pair: SecantPair) -> FamilyStep:
    """family_update that also reports the self-scaling weight theta (nan for broyden)."""
    s, y = pair.s, pair.y
    check_curvature(s, y)
    kind = family.kind

    if kind == FamilyKind.VBFGS_B:
        result = primal_update(state, s, y, family.potential)
        return FamilyStep(result.factor, result.theta)
    if kind == FamilyKind.VDFP_H:
        result = primal_update(state, y, s, family.potential)
        return FamilyStep(result.factor, result.theta)
    if kind == FamilyKind.VDFP_B:
        result = inverse_primal_update(state, y, s, family.potential)
        return FamilyStep(result.factor, result.theta)
    if kind == FamilyKind.VBFGS_H:
        result = inverse_primal_update(state, s, y, family.potential)
        return FamilyStep(result.factor, result.theta)

    bfgs_part = primal_update(state, s, y, family.potential).factor.matrix()
    dfp_part = inverse_primal_update(state, y, s, family.dfp_potential).factor.matrix()
    combined = family.mix * bfgs_part + (1.0 - family.mix) * dfp_part
    return FamilyStep(cholesky(combined, check_symmetry=False), math.nan)


def family_update(family: UpdateFamily, state: SpdCholesky, pair: SecantPair) -> SpdCholesky:
    """
    One quasi-Newton update of ``state`` (B for -b families, H for -h
    families and broyden uses B).

    Raises:
        CurvatureViolation: s^T y not sufficiently positive
    """
    return apply_family(family, state, pair).factor
