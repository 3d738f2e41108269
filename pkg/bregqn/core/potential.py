"""
Potential functions V on the positive reals

A potential induces phi(P) = V(det P) on the positive-definite cone and
through it the V-Bregman divergence. Everything the update formulas need is
carried by

    nu(z)   = -z V'(z)              (> 0)
    beta(z) = z nu'(z) / nu(z)      (< 1/n)

and the limit z / nu(z)^(n-1) -> 0 as z -> 0. Determinants of the matrices we
work with overflow doubles for n beyond ~170, so every built-in potential also
evaluates log nu and beta at z = exp(ell) directly in the log domain.

Usage:
    from bregqn.core.potential import make_potential, parse_potential, validate

    pot = parse_potential('power:gamma=-1')
    V, nu, beta = evaluate(pot, 2.0)
    report = validate(pot, n=10)
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from bregqn.utils import constants
from bregqn.utils.constants import ERROR_MESSAGES
from bregqn.utils.errors import PotentialError, ValidationError
from bregqn.utils.logging_config import get_logger

logger = get_logger(__name__)

ScalarFn = Callable[[float], float]


class PotentialKind(str, Enum):
    NEGLOG = 'neglog'
    POWER = 'power'
    BOUNDED = 'bounded'
    CUSTOM = 'custom'


@dataclass(frozen=True)
class CustomDerivatives:
    """User supplied V, V' and V'' (analytic; never differentiated numerically)"""
    value: ScalarFn
    first: ScalarFn
    second: ScalarFn


@dataclass(frozen=True)
class Potential:
    """
    Scalar potential with its induced nu and beta.

    Build instances with make_potential or parse_potential; the constructor
    does not check parameter ranges.
    """
    kind: PotentialKind
    gamma: float = 0.0
    a: float = 0.0
    b: float = 1.0
    nu_bounds: Optional[Tuple[float, float]] = None
    custom: Optional[CustomDerivatives] = field(default=None, compare=False)

    @property
    def label(self) -> str:
        """Name in the CLI/config syntax"""
        if self.kind == PotentialKind.POWER:
            return f"power:gamma={self.gamma!r}"
        if self.kind == PotentialKind.BOUNDED:
            return f"bounded:a={self.a!r},b={self.b!r}"
        return self.kind.value

    def _is_neglog(self) -> bool:
        return (
            self.kind == PotentialKind.NEGLOG
            or (self.kind == PotentialKind.POWER and self.gamma == 0.0)
            or (self.kind == PotentialKind.BOUNDED and self.a == 0.0 and self.b == 1.0)
        )

    # Values at z > 0

    def value(self, z: float) -> float:
        ell = _log_arg(z)
        if self.kind == PotentialKind.CUSTOM:
            return float(self.custom.value(z))
        return self.value_at_log(ell)

    def value_at_log(self, ell: float) -> float:
        """V(exp(ell))"""
        if self.kind == PotentialKind.CUSTOM:
            return float(self.custom.value(math.exp(ell)))
        if self.kind == PotentialKind.POWER and self.gamma != 0.0:
            return -math.expm1(self.gamma * ell) / self.gamma
        if self.kind == PotentialKind.BOUNDED:
            if self.a == 0.0:
                return -self.b * ell
            return self.a * float(np.logaddexp(0.0, math.log(self.a) + ell)) - self.b * ell
        return -ell

    def derivative(self, z: float) -> float:
        """V'(z)"""
        _log_arg(z)
        if self.kind == PotentialKind.CUSTOM:
            return float(self.custom.first(z))
        return -self.nu(z) / z

    def second_derivative(self, z: float) -> float:
        """V''(z)"""
        _log_arg(z)
        if self.kind == PotentialKind.CUSTOM:
            return float(self.custom.second(z))
        if self.kind == PotentialKind.POWER:
            return (1.0 - self.gamma) * z ** (self.gamma - 2.0)
        if self.kind == PotentialKind.BOUNDED:
            return -self.a ** 3 / (self.a * z + 1.0) ** 2 + self.b / z ** 2
        return 1.0 / z ** 2

    def nu(self, z: float) -> float:
        if self.kind == PotentialKind.CUSTOM:
            return -z * float(self.custom.first(z))
        return math.exp(self.log_nu(_log_arg(z)))

    def beta(self, z: float) -> float:
        if self.kind == PotentialKind.CUSTOM:
            return 1.0 + z * float(self.custom.second(z)) / float(self.custom.first(z))
        return self.beta_at_log(_log_arg(z))

    # Log domain, z = exp(ell)

    def log_nu(self, ell: float) -> float:
        """log nu(exp(ell))"""
        if self.kind == PotentialKind.CUSTOM:
            nu = self.nu(math.exp(ell))
            return math.log(nu) if nu > 0 else -math.inf
        if self.kind == PotentialKind.POWER:
            return self.gamma * ell
        if self.kind == PotentialKind.BOUNDED:
            if self.a == 0.0:
                return math.log(self.b)
            x = math.log(self.a) + ell
            return float(np.logaddexp(math.log(self.b - self.a), math.log(self.a) - np.logaddexp(0.0, x)))
        return 0.0

    def beta_at_log(self, ell: float) -> float:
        """beta(exp(ell))"""
        if self.kind == PotentialKind.CUSTOM:
            return self.beta(math.exp(ell))
        if self.kind == PotentialKind.POWER:
            return self.gamma
        if self.kind == PotentialKind.BOUNDED:
            if self.a == 0.0:
                return 0.0
            log_a = math.log(self.a)
            x = log_a + ell
            log_mag = (
                log_a + x
                - float(np.logaddexp(0.0, x))
                - float(np.logaddexp(math.log(self.b - self.a) + x, math.log(self.b)))
            )
            return -math.exp(log_mag)
        return 0.0


def _log_arg(z: float) -> float:
    if not z > 0:
        raise ValidationError(f"Potential evaluated outside its domain: z={z}")
    return math.log(z)


def make_potential(
    kind,
    params: Optional[Mapping[str, object]] = None,
    n_max: Optional[int] = None,
) -> Potential:
    """
    Create a potential.

    Args:
        kind: 'neglog', 'power', 'bounded', 'custom' or a PotentialKind
        params: gamma for power; a, b for bounded; V, dV, d2V (callables) and
            optional nu_bounds for custom
        n_max: Largest working dimension; power requires gamma < 1/n_max

    Returns:
        Potential

    Raises:
        PotentialError: On parameters outside the admissible range
    """
    params = dict(params or {})
    try:
        kind = PotentialKind(kind)
    except ValueError:
        raise PotentialError(ERROR_MESSAGES['unknown_potential'].format(name=kind))

    if kind == PotentialKind.NEGLOG:
        return Potential(kind=kind, nu_bounds=(1.0, 1.0))

    if kind == PotentialKind.POWER:
        if 'gamma' not in params:
            raise PotentialError("power potential needs gamma")
        gamma = float(params['gamma'])
        limit = 1.0 / n_max if n_max else 1.0
        if not math.isfinite(gamma) or gamma >= limit:
            raise PotentialError(f"power potential needs gamma < {limit:g}, got {gamma}")
        bounds = (1.0, 1.0) if gamma == 0.0 else None
        return Potential(kind=kind, gamma=gamma, nu_bounds=bounds)

    if kind == PotentialKind.BOUNDED:
        a = float(params.get('a', 0.0))
        b = float(params.get('b', 1.0))
        if not (math.isfinite(a) and math.isfinite(b)) or a < 0 or a >= b:
            raise PotentialError(f"bounded potential needs 0 <= a < b, got a={a}, b={b}")
        return Potential(kind=kind, a=a, b=b, nu_bounds=(b - a, b))

    missing = [key for key in ('V', 'dV', 'd2V') if not callable(params.get(key))]
    if missing:
        raise PotentialError(f"custom potential needs callables {', '.join(missing)}")
    bounds = params.get('nu_bounds')
    return Potential(
        kind=kind,
        nu_bounds=tuple(bounds) if bounds is not None else None,
        custom=CustomDerivatives(params['V'], params['dV'], params['d2V']),
    )


def parse_potential(text: str, n_max: Optional[int] = None) -> Potential:
    """
    Parse the CLI/config syntax: ``neglog``, ``power:gamma=<g>``,
    ``bounded:a=<a>,b=<b>``.
    """
    name, _, rest = str(text).strip().partition(':')
    params = {}
    for item in filter(None, (part.strip() for part in rest.split(','))):
        key, sep, value = item.partition('=')
        if not sep:
            raise PotentialError(ERROR_MESSAGES['unknown_potential'].format(name=text))
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise PotentialError(f"Invalid number for {key.strip()} in '{text}'")
    if name.strip().lower() == PotentialKind.CUSTOM.value:
        raise PotentialError("custom potentials are only available from Python")
    return make_potential(name.strip().lower(), params, n_max=n_max)


def evaluate(potential: Potential, z: float) -> Tuple[float, float, float]:
    """Return (V(z), nu(z), beta(z)); z must be positive."""
    return potential.value(z), potential.nu(z), potential.beta(z)


@dataclass
class ValidationReport:
    """Grid-based check of the potential conditions for dimension n"""
    potential: str
    n: int
    grid_size: int
    violations: List[str] = field(default_factory=list)
    nu_range: Tuple[float, float] = (math.nan, math.nan)
    beta_max: float = math.nan
    nu_bounds: Optional[Tuple[float, float]] = None
    derivative_points: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        lines = [
            f"potential: {self.potential}",
            f"n: {self.n}",
            f"grid points: {self.grid_size}",
            f"nu range on grid: [{self.nu_range[0]:.6g}, {self.nu_range[1]:.6g}]",
            f"max beta on grid: {self.beta_max:.6g} (limit 1/n = {1.0 / self.n:.6g})",
        ]
        if self.nu_bounds is not None:
            lines.append(f"nu bounds: ({self.nu_bounds[0]:.6g}, {self.nu_bounds[1]:.6g}]")
        lines.extend(f"violation: {v}" for v in self.violations[:20])
        if len(self.violations) > 20:
            lines.append(f"... {len(self.violations) - 20} more violations")
        lines.append("result: pass" if self.passed else "result: fail")
        return '\n'.join(lines)


def log_grid(
    grid_min: float = constants.DEFAULT_GRID_MIN,
    grid_max: float = constants.DEFAULT_GRID_MAX,
    points: int = constants.DEFAULT_GRID_POINTS,
) -> np.ndarray:
    if not 0 < grid_min < grid_max or points < 2:
        raise ValidationError(f"Invalid grid [{grid_min}, {grid_max}] with {points} points")
    return np.logspace(math.log10(grid_min), math.log10(grid_max), points)


def validate(potential: Potential, n: int, grid: Optional[Sequence[float]] = None) -> ValidationReport:
    """
    Check nu > 0, beta < 1/n, V decreasing and convex, the small-z limit
    and the consistency of the stored derivatives on a grid.

    The limit condition is checked heuristically: zeta(z) = log z -
    (n-1) log nu(z) must increase over the smallest grid points, i.e.
    z / nu^(n-1) keeps falling towards zero.

    Never raises for a bad potential; violations are listed in the report.
    """
    zs = np.sort(np.asarray(log_grid() if grid is None else grid, dtype=float))
    if zs.size == 0 or np.any(zs <= 0):
        raise ValidationError("Validation grid must be non-empty with positive entries")

    report = ValidationReport(
        potential=potential.label,
        n=n,
        grid_size=int(zs.size),
        nu_bounds=potential.nu_bounds,
    )
    nus, betas, zetas = [], [], []
    for z in zs:
        z = float(z)
        ell = math.log(z)
        nu = potential.nu(z)
        beta = potential.beta_at_log(ell)
        nus.append(nu)
        betas.append(beta)
        if not nu > 0:
            report.violations.append(f"nu({z:.3g}) = {nu:.6g} is not positive")
            zetas.append(math.nan)
            continue
        zetas.append(ell - (n - 1) * potential.log_nu(ell))
        if not beta < 1.0 / n:
            report.violations.append(f"beta({z:.3g}) = {beta:.6g} is not < 1/n = {1.0 / n:.6g}")
        if not potential.second_derivative(z) >= 0:
            report.violations.append(f"V''({z:.3g}) < 0: V is not convex")

        step = constants.DERIVATIVE_STEP * z
        value = potential.value(z)
        first = potential.derivative(z)
        # skip points where rounding in V swamps the central difference
        if abs(value) * constants.MACHINE_EPS > 1e-3 * constants.DERIVATIVE_RTOL * abs(first) * step:
            continue
        numeric = (potential.value(z + step) - potential.value(z - step)) / (2.0 * step)
        report.derivative_points += 1
        if abs(numeric - first) > constants.DERIVATIVE_RTOL * abs(first):
            report.violations.append(f"V'({z:.3g}) = {first:.6g} disagrees with finite difference {numeric:.6g}")

    report.nu_range = (float(np.nanmin(nus)), float(np.nanmax(nus)))
    report.beta_max = float(np.nanmax(betas))

    head = np.array(zetas[:constants.LIMIT_CHECK_POINTS])
    if not (np.all(np.isfinite(head)) and np.all(np.diff(head) > 0)):
        report.violations.append("z / nu(z)^(n-1) is not decreasing towards 0 at the smallest grid points")

    if potential.nu_bounds is None:
        logger.info(constants.LOG_MESSAGES['no_nu_bounds'].format(potential=potential.label))
    return report
