"""
Approximate influence of one perturbed update

For every (setup, n, trial) one secant pair and one perturbation
(eps, y_bar) are drawn and shared by all families and gammas:

    DetOne  B_k = diag(1..n) / (n!)^(1/n)
    Diag    B_k = diag(1..n)
            s, y ~ N(0, 10 I), y flipped when s'y <= 0 and (s, y) redrawn
            while cos(s, y) < min_cosine, eps ~ U[-0.2, 0.2],
            y_bar ~ N(0, I), (eps, y_bar) redrawn until the perturbed pair
            keeps positive curvature
    Spike   s ~ N(0, 10 I), y = s, p a unit vector orthogonal to y,
            B_k = I + n^3 p p', y_bar = p, eps ~ U[-0.2, 0.2]

-h families use the same matrix as H_k. gamma = 0 is the negative log.
"""
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from bregqn.core.potential import Potential, make_potential
from bregqn.core.spd import SpdCholesky, cholesky
from bregqn.core.update import FamilyKind, SecantPair, UpdateFamily
from bregqn.robustness.influence import family_influence, perturbed_update
from bregqn.robustness.sequences import orthonormal_complement
from bregqn.utils import constants
from bregqn.utils.constants import ERROR_MESSAGES, LOG_MESSAGES
from bregqn.utils.errors import NumericalError, ResampleLimitExceeded, ValidationError
from bregqn.utils.logging_config import get_logger, log_performance
from bregqn.utils.parallel import parallel_map, stream, trial_seed
from bregqn.utils.validation import option_text, validate_positive

logger = get_logger(__name__)

TABLE2_FAMILIES: Tuple[FamilyKind, ...] = (
    FamilyKind.VBFGS_B,
    FamilyKind.VDFP_B,
    FamilyKind.VBFGS_H,
    FamilyKind.VDFP_H,
)


class Setup(str, Enum):
    DET_ONE = 'DetOne'
    DIAG = 'Diag'
    SPIKE = 'Spike'

    @classmethod
    def parse(cls, text) -> 'Setup':
        for setup in cls:
            if option_text(text) == setup.value.lower():
                return setup
        raise ValidationError(f"Unknown setup '{text}'. Expected DetOne, Diag or Spike")


@dataclass(frozen=True)
class Table2Config:
    dims: Tuple[int, ...] = constants.DEFAULT_TABLE2_DIMS
    setups: Tuple[Setup, ...] = tuple(Setup)
    gammas: Tuple[float, ...] = constants.DEFAULT_GAMMAS
    families: Tuple[FamilyKind, ...] = TABLE2_FAMILIES
    trials: int = constants.DEFAULT_TRIALS
    seed: int = constants.DEFAULT_SEED
    eps_range: float = constants.DEFAULT_EPS_RANGE
    resample_cap: int = constants.RESAMPLE_CAP
    min_cosine: float = constants.DEFAULT_MIN_COSINE
    quadratic_perturbation: bool = False  # y_bar = y, every approx_if is 0
    workers: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'dims', tuple(int(n) for n in self.dims))
        object.__setattr__(self, 'setups', tuple(Setup.parse(s) for s in self.setups))
        object.__setattr__(self, 'gammas', tuple(float(g) for g in self.gammas))
        object.__setattr__(self, 'families', tuple(FamilyKind(f) for f in self.families))
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if any(n < 3 for n in self.dims):
            raise ValidationError(f"Table 2 dimensions must be >= 3, got {self.dims}")
        if FamilyKind.BROYDEN in self.families:
            raise ValidationError("Table 2 covers the four single-potential families only")
        validate_positive(self.eps_range, 'eps range')
        if self.eps_range >= 1:
            raise ValidationError(f"eps range must be < 1, got {self.eps_range}")
        if not 0 <= self.min_cosine < 1:
            raise ValidationError(f"min cosine must lie in [0, 1), got {self.min_cosine}")
        for gamma in self.gammas:
            for n in self.dims:
                make_potential('power', {'gamma': gamma}, n_max=n)


@dataclass(frozen=True)
class TrialRecord:
    setup: str
    family: str
    gamma: float
    n: int
    trial: int
    approx_if: float
    if_norm: float
    seed: int
    error: Optional[str] = None


CellKey = Tuple[str, str, float, int]


@dataclass
class Table2Result:
    config: Table2Config
    records: List[TrialRecord] = field(default_factory=list)

    @property
    def means(self) -> Dict[CellKey, float]:
        """Mean approx_if per (setup, family, gamma, n) over trials without errors"""
        grouped: Dict[CellKey, List[float]] = {}
        for record in self.records:
            key = (record.setup, record.family, record.gamma, record.n)
            values = grouped.setdefault(key, [])
            if record.error is None:
                values.append(record.approx_if)
        return {key: (float(np.mean(values)) if values else math.nan) for key, values in grouped.items()}

    def mean(self, setup, family, gamma: float, n: int) -> float:
        return self.means[(Setup.parse(setup).value, FamilyKind(family).value, float(gamma), int(n))]

    @property
    def failures(self) -> int:
        return sum(1 for record in self.records if record.error is not None)


def table2_potential(gamma: float, n: int) -> Potential:
    if gamma == 0:
        return make_potential('neglog')
    return make_potential('power', {'gamma': gamma}, n_max=n)


def setup_matrix(setup: Setup, n: int, p: Optional[np.ndarray] = None) -> SpdCholesky:
    """B_k of a setup; Spike needs its unit vector p."""
    diagonal = np.arange(1, n + 1, dtype=float)
    if setup == Setup.DIAG:
        return SpdCholesky.diagonal(diagonal)
    if setup == Setup.DET_ONE:
        return SpdCholesky.diagonal(diagonal * math.exp(-math.lgamma(n + 1) / n))
    return cholesky(np.eye(n) + float(n) ** 3 * np.outer(p, p), check_symmetry=False)


@dataclass(frozen=True, eq=False)
class TrialDraw:
    state: SpdCholesky
    s: np.ndarray
    y: np.ndarray
    y_bar: np.ndarray
    eps: float


def draw_direction_pair(n: int, rng: np.random.Generator, config: Table2Config) -> Tuple[np.ndarray, np.ndarray]:
    """
    s, y ~ N(0, 10 I) with y flipped when s'y <= 0, redrawn while
    cos(s, y) < config.min_cosine (min_cosine = 0 keeps the first draw).

    Raises:
        ResampleLimitExceeded: No pair reached the angle floor
    """
    scale = math.sqrt(constants.STEP_VARIANCE)
    for _ in range(config.resample_cap):
        s = scale * rng.standard_normal(n)
        y = scale * rng.standard_normal(n)
        if s @ y <= 0:
            y = -y
        if s @ y >= config.min_cosine * np.linalg.norm(s) * np.linalg.norm(y):
            return s, y
    raise ResampleLimitExceeded(ERROR_MESSAGES['resample_limit'].format(cap=config.resample_cap))


def draw_trial(setup: Setup, n: int, rng: np.random.Generator, config: Table2Config) -> TrialDraw:
    """
    Raises:
        ResampleLimitExceeded: (s, y) kept missing the angle floor or (eps, y_bar)
            kept breaking the curvature condition
    """
    scale = math.sqrt(constants.STEP_VARIANCE)
    h = config.eps_range

    if setup == Setup.SPIKE:
        s = scale * rng.standard_normal(n)
        y = s.copy()
        (p,) = orthonormal_complement([y], 1, n, rng)
        eps = float(rng.uniform(-h, h))
        y_bar = y.copy() if config.quadratic_perturbation else p
        return TrialDraw(setup_matrix(setup, n, p), s, y, y_bar, eps)

    s, y = draw_direction_pair(n, rng, config)
    for _ in range(config.resample_cap):
        eps = float(rng.uniform(-h, h))
        y_bar = y.copy() if config.quadratic_perturbation else rng.standard_normal(n)
        if eps != 0 and SecantPair((1.0 + eps) * s, y + eps * y_bar).satisfies_curvature():
            return TrialDraw(setup_matrix(setup, n), s, y, y_bar, eps)
    raise ResampleLimitExceeded(ERROR_MESSAGES['resample_limit'].format(cap=config.resample_cap))


def _run_trial(config: Table2Config, setup: Setup, n: int, trial: int) -> List[TrialRecord]:
    cell = ('table2', setup.value, n)
    seed = trial_seed(config.seed, cell, trial)
    rng = stream(config.seed, cell, trial)
    records: List[TrialRecord] = []

    try:
        draw = draw_trial(setup, n, rng, config)
    except ResampleLimitExceeded as e:
        logger.warning(LOG_MESSAGES['trial_error'].format(
            setup=setup.value, n=n, trial=trial, family='all', gamma='all', error=e))
        for kind in config.families:
            for gamma in config.gammas:
                records.append(TrialRecord(setup.value, kind.value, gamma, n, trial, math.nan, math.nan, seed, str(e)))
        return records

    for kind in config.families:
        for gamma in config.gammas:
            family = UpdateFamily(kind, table2_potential(gamma, n))
            try:
                approx = perturbed_update(family, draw.state, draw.s, draw.y, draw.y_bar, draw.eps).approx_if
                closed = float(np.linalg.norm(family_influence(family, draw.state, draw.s, draw.y, draw.y_bar)))
                records.append(TrialRecord(setup.value, kind.value, gamma, n, trial, approx, closed, seed))
            except NumericalError as e:
                logger.warning(LOG_MESSAGES['trial_error'].format(
                    setup=setup.value, n=n, trial=trial, family=kind.value, gamma=gamma, error=e))
                records.append(TrialRecord(setup.value, kind.value, gamma, n, trial, math.nan, math.nan, seed, str(e)))
    return records


def run_table2(config: Optional[Table2Config] = None) -> Table2Result:
    """
    Run every (setup, n, trial) task on the worker pool.

    Returns:
        Table2Result with records ordered by (setup, n, trial, family, gamma)
    """
    config = config or Table2Config()
    started = time.perf_counter()
    tasks = [
        ((config.setups.index(setup), n, trial), (setup, n, trial))
        for setup in config.setups
        for n in config.dims
        for trial in range(config.trials)
    ]
    logger.info(f"Table 2: {len(tasks)} trials, setups={[s.value for s in config.setups]}, dims={config.dims}")
    results = parallel_map(lambda task: _run_trial(config, *task), tasks, workers=config.workers, label='table2 trials')
    records = [record for _, trial_records in results for record in trial_records]
    log_performance(logger, 'Table 2', time.perf_counter() - started)
    return Table2Result(config, records)
