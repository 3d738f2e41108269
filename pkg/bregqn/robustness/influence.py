"""
Influence functions of the V-Bregman updates

A line search that returns (1 + eps) s instead of s while the gradient
difference becomes y + eps y_bar perturbs the secant constraint to

    B (s + eps s_bar) = y + eps y_bar          (s_bar = s for line searches)

The influence function is dB(eps)/deps at eps = 0. delta_influence gives it
in closed form for the primal problem; gamma_influence covers problems that
are primal in the inverse matrix. perturbed_update estimates it with a
forward difference through the actual update code.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from bregqn.core.potential import Potential
from bregqn.core.spd import SpdCholesky
from bregqn.core.update import (
    FamilyKind,
    SecantPair,
    UpdateFamily,
    check_curvature,
    family_update,
    inverse_primal_update,
    primal_update,
)
from bregqn.utils.constants import ERROR_MESSAGES
from bregqn.utils.errors import CurvatureViolation, UnsupportedFamily, ValidationError
from bregqn.utils.logging_config import get_logger
from bregqn.utils.validation import validate_vector

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """eps with the directions y_bar and s_bar (s_bar = s when None)"""
    eps: float
    y_bar: np.ndarray
    s_bar: Optional[np.ndarray] = None

    def apply(self, s: np.ndarray, y: np.ndarray) -> SecantPair:
        """
        Perturbed pair (s + eps s_bar, y + eps y_bar).

        Raises:
            CurvatureViolation: The perturbed pair has no positive curvature
        """
        pair = SecantPair(s, y).perturbed(self.eps, self.y_bar, self.s_bar)
        check_curvature(pair.s, pair.y)
        return pair


class PerturbedUpdate(NamedTuple):
    matrix: SpdCholesky
    approx_if: float
    quotient: np.ndarray


def _symmetrize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def _delta(
    M: SpdCholesky,
    s: np.ndarray,
    s_bar: np.ndarray,
    y: np.ndarray,
    y_bar: np.ndarray,
    potential: Potential,
):
    """Delta together with the unperturbed update it was expanded around."""
    sy = check_curvature(s, y)
    n = M.n
    base = primal_update(M, s, y, potential)
    B0 = base.factor
    r = base.theta
    beta = potential.beta_at_log(base.log_z_star)
    coef = beta / (1.0 - (n - 1) * beta)

    Bs = M.matvec(s)
    Bs_bar = M.matvec(s_bar)
    sBs = float(s @ Bs)
    sbar_Bs = float(s_bar @ Bs)
    B0_inv_Bs = B0.solve(Bs)

    yy = np.outer(y, y)
    scalar = (float(s @ y_bar) - float(s_bar @ y)) / sy + r * (
        2.0 * sbar_Bs * float(Bs @ B0_inv_Bs) / sBs ** 2
        - 2.0 * float(Bs_bar @ B0_inv_Bs) / sBs
    )
    result = (
        scalar * coef * (B0.matrix() - yy / sy)
        + (np.outer(y, y_bar) + np.outer(y_bar, y)) / sy
        - (float(s @ y_bar) + float(s_bar @ y)) / sy ** 2 * yy
        + r * (
            2.0 * sbar_Bs / sBs ** 2 * np.outer(Bs, Bs)
            - (np.outer(Bs, Bs_bar) + np.outer(Bs_bar, Bs)) / sBs
        )
    )
    return _symmetrize(result), B0


def delta_influence(
    M: SpdCholesky,
    s: np.ndarray,
    s_bar: np.ndarray,
    y: np.ndarray,
    y_bar: np.ndarray,
    potential: Potential,
) -> np.ndarray:
    """
    dB/deps at 0 for min D_V(B, M) s.t. B (s + eps s_bar) = y + eps y_bar.

    With B0 = primal_update(M, s, y) and r = nu(det B0) / nu(det M):

        {(s'y_bar - s_bar'y)/s'y + r (2 s_bar'Ms s'M B0^-1 Ms/(s'Ms)^2 - 2 s_bar'M B0^-1 Ms/s'Ms)}
          * beta/(1 - (n-1) beta) [B0 - yy'/s'y]
        + (y y_bar' + y_bar y')/s'y - (s'y_bar + s_bar'y)/(s'y)^2 yy'
        + r [2 s_bar'Ms/(s'Ms)^2 Ms s'M - M(s s_bar' + s_bar s')M/s'Ms]

    beta is evaluated at det B0 in the log domain.

    Raises:
        CurvatureViolation: s'y not sufficiently positive
    """
    n = M.n
    s = validate_vector(s, n=n, name='s')
    y = validate_vector(y, n=n, name='y')
    s_bar = validate_vector(s_bar, n=n, name='s_bar')
    y_bar = validate_vector(y_bar, n=n, name='y_bar')
    return _delta(M, s, s_bar, y, y_bar, potential)[0]


def gamma_influence(
    M: SpdCholesky,
    u: np.ndarray,
    u_bar: np.ndarray,
    v: np.ndarray,
    v_bar: np.ndarray,
    potential: Potential,
) -> np.ndarray:
    """
    dX/deps at 0 for X = argmin D_V(X^-1, M^-1) s.t. X (u + eps u_bar) = v + eps v_bar:

        -X0 Delta[M^-1; v, v_bar, u, u_bar] X0,  X0 = primal_update(M^-1, v, u)^-1

    Raises:
        CurvatureViolation: u'v not sufficiently positive
    """
    n = M.n
    u = validate_vector(u, n=n, name='u')
    v = validate_vector(v, n=n, name='v')
    u_bar = validate_vector(u_bar, n=n, name='u_bar')
    v_bar = validate_vector(v_bar, n=n, name='v_bar')
    inner, _ = _delta(M.invert(), v, v_bar, u, u_bar, potential)
    X0 = inverse_primal_update(M, v, u, potential).factor.matrix()
    return _symmetrize(-X0 @ inner @ X0)


def family_influence(
    family: UpdateFamily,
    state: SpdCholesky,
    s: np.ndarray,
    y: np.ndarray,
    y_bar: np.ndarray,
) -> np.ndarray:
    """
    Closed-form influence of a line-search perturbation ((1+eps) s, y + eps y_bar)
    on one update of ``state`` (B for -b families, H for -h families).

    Raises:
        UnsupportedFamily: Broyden combinations
        CurvatureViolation: s'y not sufficiently positive
    """
    kind = family.kind
    V = family.potential
    if kind == FamilyKind.VBFGS_B:
        return delta_influence(state, s, s, y, y_bar, V)
    if kind == FamilyKind.VDFP_B:
        return gamma_influence(state, s, s, y, y_bar, V)
    if kind == FamilyKind.VBFGS_H:
        return gamma_influence(state, y, y_bar, s, s, V)
    if kind == FamilyKind.VDFP_H:
        return delta_influence(state, y, y_bar, s, s, V)
    raise UnsupportedFamily(ERROR_MESSAGES['unsupported_family'].format(family=family.label))


def perturbed_update(
    family: UpdateFamily,
    state: SpdCholesky,
    s: np.ndarray,
    y: np.ndarray,
    y_bar: np.ndarray,
    eps: float,
    base: Optional[SpdCholesky] = None,
) -> PerturbedUpdate:
    """
    Forward-difference influence: M(eps) from ((1+eps) s, y + eps y_bar),
    M(0) from (s, y) and approx_if = |(M(eps) - M(0)) / eps|_F.

    Args:
        base: M(0) if already computed (sweeps over eps reuse it)

    Raises:
        ValidationError: eps == 0
        CurvatureViolation: Either pair lacks positive curvature
    """
    if eps == 0:
        raise ValidationError("perturbed_update needs eps != 0")
    spec = PerturbationSpec(eps, np.asarray(y_bar, dtype=float))
    try:
        pair = spec.apply(s, y)
    except CurvatureViolation:
        logger.debug(f"Perturbed pair lost curvature at eps={eps:g}")
        raise
    if base is None:
        base = family_update(family, state, SecantPair(s, y))
    moved = family_update(family, state, pair)
    quotient = (moved.matrix() - base.matrix()) / eps
    return PerturbedUpdate(moved, float(np.linalg.norm(quotient)), quotient)
