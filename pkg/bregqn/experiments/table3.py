"""
Iteration counts under a noisy line search

Each run draws x0 ~ N(0, 10 I) once per (problem, n, run) and solves it with
every method at every noise level h, so methods and noise levels are
compared on the same starting points. The step returned by the near-exact
line search is multiplied by (1 + eps), eps ~ U[-h, h].
"""
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from bregqn.core.linesearch import LineSearchMode, LineSearchParams
from bregqn.core.potential import make_potential
from bregqn.core.problems import ProblemKind, make_problem
from bregqn.core.solver import NoiseAdvance, Outcome, SolverConfig, minimize
from bregqn.core.spd import SpdCholesky
from bregqn.core.update import FamilyStep, SecantPair, UpdateFamily, bfgs_core, blend_with_secant
from bregqn.utils import constants
from bregqn.utils.constants import LOG_MESSAGES
from bregqn.utils.errors import ValidationError
from bregqn.utils.logging_config import get_logger, log_performance
from bregqn.utils.parallel import parallel_map, stream, trial_seed
from bregqn.utils.validation import option_text, validate_nonnegative

logger = get_logger(__name__)

METHOD_BFGS = 'bfgs'
METHOD_DFP = 'dfp'
METHOD_SS_BFGS = 'ss-bfgs'
METHODS = (METHOD_BFGS, METHOD_DFP, METHOD_SS_BFGS)
REFERENCE_METHODS = (METHOD_SS_BFGS,)


def popular_self_scaling_update(state: SpdCholesky, pair: SecantPair) -> FamilyStep:
    """
    theta * BFGS[B; s, y] + (1 - theta) y y^T / s^T y with theta = s^T y / s^T B s.

    No potential produces this theta (it would need beta = 1/n), so it is
    only a comparator.
    """
    s, y = pair.s, pair.y
    sy = pair.curvature
    theta = sy / float(s @ state.matvec(s))
    return FamilyStep(blend_with_secant(bfgs_core(state, s, y), theta, y, sy), theta)


@dataclass(frozen=True)
class Table3Config:
    problems: Tuple[ProblemKind, ...] = (ProblemKind.P1, ProblemKind.P2)
    dims: Tuple[int, ...] = constants.DEFAULT_TABLE3_DIMS
    noise_levels: Tuple[float, ...] = constants.DEFAULT_NOISE_LEVELS
    methods: Tuple[str, ...] = (METHOD_BFGS, METHOD_DFP)
    runs: int = constants.DEFAULT_RUNS
    seed: int = constants.DEFAULT_SEED
    max_iter: int = constants.DEFAULT_MAX_ITER
    tol_x: float = constants.DEFAULT_TOL_X
    noise_advance: NoiseAdvance = NoiseAdvance.PERTURBED
    workers: Optional[int] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, 'problems', tuple(ProblemKind(option_text(p)) for p in self.problems))
        except ValueError:
            raise ValidationError(f"Unknown problem in {self.problems}. Expected p1 or p2")
        object.__setattr__(self, 'dims', tuple(int(n) for n in self.dims))
        object.__setattr__(self, 'noise_levels', tuple(float(h) for h in self.noise_levels))
        object.__setattr__(self, 'methods', tuple(option_text(m) for m in self.methods))
        object.__setattr__(self, 'noise_advance', NoiseAdvance(self.noise_advance))
        for h in self.noise_levels:
            validate_nonnegative(h, 'noise level h')
            if h >= 1:
                raise ValidationError(f"noise level must be < 1, got {h}")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValidationError(f"Unknown method(s) {unknown}. Expected one of {', '.join(METHODS)}")
        if self.runs < 1:
            raise ValidationError(f"runs must be >= 1, got {self.runs}")
        if any(n < 2 for n in self.dims):
            raise ValidationError(f"Table 3 dimensions must be >= 2, got {self.dims}")


@dataclass(frozen=True)
class RunRecord:
    problem: str
    n: int
    h: float
    method: str
    run: int
    iterations: int
    outcome: str
    seed: int


CellKey = Tuple[str, int, float, str]


@dataclass
class Table3Result:
    config: Table3Config
    records: List[RunRecord] = field(default_factory=list)

    @property
    def means(self) -> Dict[CellKey, float]:
        """Mean iteration count per (problem, n, h, method)"""
        grouped: Dict[CellKey, List[int]] = {}
        for record in self.records:
            grouped.setdefault((record.problem, record.n, record.h, record.method), []).append(record.iterations)
        return {key: float(np.mean(values)) for key, values in grouped.items()}

    def mean(self, problem, n: int, h: float, method: str) -> float:
        return self.means[(ProblemKind(option_text(problem)).value, int(n), float(h), method)]

    @property
    def unconverged(self) -> List[RunRecord]:
        return [record for record in self.records if record.outcome != Outcome.CONVERGED.value]


def method_config(method: str, h: float, config: Table3Config, seed: int) -> SolverConfig:
    neglog = make_potential('neglog')
    family = UpdateFamily.vdfp_b(neglog) if method == METHOD_DFP else UpdateFamily.vbfgs_b(neglog)
    return SolverConfig(
        family=family,
        line_search=LineSearchParams(mode=LineSearchMode.NEAR_EXACT, tol_x=config.tol_x),
        max_iter=config.max_iter,
        noise=h,
        noise_advance=config.noise_advance,
        seed=seed,
        updater=popular_self_scaling_update if method == METHOD_SS_BFGS else None,
    )


def _run(config: Table3Config, problem_kind: ProblemKind, n: int, run: int) -> List[RunRecord]:
    problem = make_problem(problem_kind, n)
    start_rng = stream(config.seed, ('table3', problem_kind.value, n), run)
    x0 = math.sqrt(constants.STEP_VARIANCE) * start_rng.standard_normal(n)

    records = []
    for h in config.noise_levels:
        for method in config.methods:
            cell = ('table3', problem_kind.value, n, h, method)
            seed = trial_seed(config.seed, cell, run)
            trace = minimize(problem, x0, method_config(method, h, config, seed), rng=stream(config.seed, cell, run))
            if trace.outcome == Outcome.MAX_ITER:
                logger.warning(LOG_MESSAGES['max_iter'].format(problem=problem.name, n=n, h=h, method=method, run=run))
            records.append(RunRecord(problem.name, n, h, method, run, trace.iterations, trace.outcome.value, seed))
    return records


def run_table3(config: Optional[Table3Config] = None) -> Table3Result:
    """
    Solve every (problem, n, run) start with all methods and noise levels.

    Returns:
        Table3Result with records ordered by (problem, n, run, h, method)
    """
    config = config or Table3Config()
    for method in config.methods:
        if method in REFERENCE_METHODS:
            logger.warning(LOG_MESSAGES['reference_method'].format(method=method))
    started = time.perf_counter()
    tasks = [
        ((config.problems.index(kind), n, run), (kind, n, run))
        for kind in config.problems
        for n in config.dims
        for run in range(config.runs)
    ]
    logger.info(f"Table 3: {len(tasks)} starts, methods={list(config.methods)}, h={list(config.noise_levels)}")
    results = parallel_map(lambda task: _run(config, *task), tasks, workers=config.workers, label='table3 runs')
    records = [record for _, run_records in results for record in run_records]
    log_performance(logger, 'Table 3', time.perf_counter() - started)
    return Table3Result(config, records)
