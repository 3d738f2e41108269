"""
Quasi-Newton driver

    d_k = -B_k^{-1} grad f(x_k)          (or -H_k grad f(x_k))
    alpha_k from the line search
    s_k = (1 + eps_k) alpha_k d_k        eps_k ~ U[-h, h], eps_k = 0 when h = 0
    B_{k+1} = family update with (s_k, grad f(x_k + s_k) - grad f(x_k))

Updates whose pair fails the curvature condition are skipped and recorded.
"""
import math
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional

import numpy as np

from bregqn.core.linesearch import LineSearchParams, line_search
from bregqn.core.potential import make_potential
from bregqn.core.problems import Problem, evaluate
from bregqn.core.spd import SpdCholesky
from bregqn.core.update import FamilyStep, SecantPair, UpdateFamily, apply_family
from bregqn.utils import constants
from bregqn.utils.constants import LOG_MESSAGES
from bregqn.utils.errors import EvaluationError, ValidationError
from bregqn.utils.logging_config import get_logger, log_function_call
from bregqn.utils.validation import validate_nonnegative, validate_positive, validate_vector

logger = get_logger(__name__)

Updater = Callable[[SpdCholesky, SecantPair], FamilyStep]


class Outcome(str, Enum):
    CONVERGED = 'Converged'
    MAX_ITER = 'MaxIter'
    LINE_SEARCH_FAILURE = 'LineSearchFailure'


class NoiseAdvance(str, Enum):
    PERTURBED = 'perturbed'
    NOMINAL = 'nominal'


@dataclass(frozen=True)
class SolverConfig:
    """
    Solver settings.

    initial is B_0 (identity when None); inverse-state families start from
    its inverse. grad_tol defaults to n * 1e-5. ``updater`` replaces the
    family update, e.g. by a reference comparator; it must return a
    FamilyStep for the same kind of state.
    """
    family: UpdateFamily = field(default_factory=lambda: UpdateFamily.vbfgs_b(make_potential('neglog')))
    line_search: LineSearchParams = field(default_factory=LineSearchParams)
    initial: Optional[SpdCholesky] = None
    grad_tol: Optional[float] = None
    max_iter: int = constants.DEFAULT_MAX_ITER
    noise: float = 0.0
    noise_advance: NoiseAdvance = NoiseAdvance.PERTURBED
    seed: Optional[int] = None
    updater: Optional[Updater] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'noise_advance', NoiseAdvance(self.noise_advance))
        validate_nonnegative(self.noise, 'noise level h')
        if self.grad_tol is not None:
            validate_positive(self.grad_tol, 'grad_tol')
        if self.max_iter < 0:
            raise ValidationError(f"max_iter must be >= 0, got {self.max_iter}")

    def describe(self) -> Dict[str, object]:
        return {
            'family': self.family.label,
            'potential': self.family.potential.label,
            'line_search': {k: (v.value if isinstance(v, Enum) else v) for k, v in asdict(self.line_search).items()},
            'initial': 'identity' if self.initial is None else 'given',
            'grad_tol': self.grad_tol,
            'max_iter': self.max_iter,
            'noise': self.noise,
            'noise_advance': self.noise_advance.value,
            'seed': self.seed,
            'updater': None if self.updater is None else getattr(self.updater, '__name__', 'custom'),
        }


@dataclass(frozen=True)
class IterationRecord:
    k: int
    f: float
    grad_norm: float
    alpha: float
    theta: float
    logdet: float
    skipped: bool
    eps: float = 0.0


@dataclass
class SolverTrace:
    records: List[IterationRecord]
    outcome: Outcome
    x: np.ndarray
    f: float
    grad_norm: float
    config: Dict[str, object] = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        """Number of iterations performed before termination"""
        return len(self.records)

    def to_dict(self) -> Dict[str, object]:
        def clean(value):
            return None if isinstance(value, float) and not math.isfinite(value) else value

        return {
            'config': self.config,
            'outcome': self.outcome.value,
            'iterations': self.iterations,
            'f': self.f,
            'grad_norm': self.grad_norm,
            'x': [float(v) for v in self.x],
            'records': [{k: clean(v) for k, v in asdict(r).items()} for r in self.records],
        }


def minimize(
    problem: Problem,
    x0: np.ndarray,
    config: Optional[SolverConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> SolverTrace:
    """
    Minimize ``problem`` from ``x0``.

    Args:
        problem: Objective and gradient
        x0: Starting point
        config: Solver settings
        rng: Generator for the secant noise (built from config.seed when None)

    Returns:
        SolverTrace with outcome Converged, MaxIter or LineSearchFailure

    Raises:
        ValidationError: Dimension mismatch or bad initial matrix
        EvaluationError: Non-finite objective at an accepted iterate
    """
    config = config or SolverConfig()
    n = problem.n
    x = validate_vector(x0, n=n, name='x0')
    family = config.family
    grad_tol = config.grad_tol if config.grad_tol is not None else n * constants.DEFAULT_GRAD_TOL_PER_DIM
    if config.initial is not None and config.initial.n != n:
        raise ValidationError(f"B0 has dimension {config.initial.n}, problem has {n}")
    if rng is None:
        rng = np.random.Generator(np.random.Philox(config.seed))

    initial = config.initial if config.initial is not None else SpdCholesky.identity(n)
    state = initial.invert() if family.inverse_state else initial
    updater = config.updater or (lambda current, pair: apply_family(family, current, pair))

    log_function_call(logger, 'minimize', problem=problem.name, n=n, family=family.label, h=config.noise)
    if family.potential.nu_bounds is None:
        logger.info(LOG_MESSAGES['no_nu_bounds'].format(potential=family.potential.label))

    def objective(point: np.ndarray) -> float:
        try:
            return evaluate(problem, point)[0]
        except EvaluationError:
            return math.inf

    f, g = evaluate(problem, x)
    records: List[IterationRecord] = []
    no_progress = 0
    started = time.perf_counter()

    while True:
        grad_norm = float(np.linalg.norm(g))
        if grad_norm <= grad_tol:
            outcome = Outcome.CONVERGED
            break
        if len(records) >= config.max_iter:
            outcome = Outcome.MAX_ITER
            break

        k = len(records)
        d = -state.matvec(g) if family.inverse_state else -state.solve(g)
        dphi0 = float(g @ d)
        if not dphi0 < 0:
            d = -g
            dphi0 = -grad_norm ** 2

        logdet_b = -state.logdet() if family.inverse_state else state.logdet()
        result = line_search(
            config.line_search,
            lambda a: objective(x + a * d),
            lambda a: float(problem.grad(x + a * d) @ d),
            f,
            dphi0,
        )
        alpha = result.alpha
        if not (alpha > 0 and result.phi < f):
            no_progress += 1
            records.append(IterationRecord(k, f, grad_norm, alpha, math.nan, logdet_b, True))
            if no_progress >= constants.MAX_NO_DECREASE:
                logger.warning(
                    constants.ERROR_MESSAGES['line_search_failure'].format(count=no_progress)
                )
                outcome = Outcome.LINE_SEARCH_FAILURE
                break
            continue
        no_progress = 0

        eps = float(rng.uniform(-config.noise, config.noise)) if config.noise > 0 else 0.0
        step = alpha * d
        s = (1.0 + eps) * step
        f_pair, g_pair = evaluate(problem, x + s)
        pair = SecantPair(s, g_pair - g)

        if config.noise_advance == NoiseAdvance.PERTURBED or eps == 0.0:
            x, f_next, g_next = x + s, f_pair, g_pair
        else:
            x = x + step
            f_next, g_next = evaluate(problem, x)

        theta = math.nan
        skipped = not pair.satisfies_curvature()
        if skipped:
            logger.debug(LOG_MESSAGES['curvature_skip'].format(k=k))
        else:
            update = updater(state, pair)
            state, theta = update.factor, update.theta

        records.append(IterationRecord(k, f, grad_norm, alpha, theta, logdet_b, skipped, eps))
        f, g = f_next, g_next

    logger.debug(
        LOG_MESSAGES['solver_done'].format(outcome=outcome.value, k=len(records), gnorm=grad_norm)
        + f" ({time.perf_counter() - started:.2f}s)"
    )
    description = config.describe()
    description.update({'problem': problem.name, 'n': n, 'grad_tol': grad_tol})
    return SolverTrace(
        records=records,
        outcome=outcome,
        x=x,
        f=f,
        grad_norm=grad_norm,
        config=description,
    )
