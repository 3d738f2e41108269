"""
Influence probes along adversarial sequences

A probe draws one secant pair (s, y) with s, y ~ N(0, 10 I) (y flipped
when s'y <= 0) and a direction y_bar ~ N(0, I), builds the requested
sequence of prior matrices mapping u onto v ((s, y) for -b families,
(y, s) for -h families) and records the closed-form and finite-difference
influence norms of one update from each of them.

The supremum over all priors is never computed; a probe only shows whether
the norm stays bounded along one sequence.
"""
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from bregqn.core.spd import SpdCholesky
from bregqn.core.update import SecantPair, UpdateFamily, family_update
from bregqn.robustness.influence import family_influence, perturbed_update
from bregqn.robustness.sequences import SequenceKind, SequenceParams, adversarial_sequence
from bregqn.utils import constants
from bregqn.utils.logging_config import get_logger, log_function_call
from bregqn.utils.parallel import parallel_map, stream
from bregqn.utils.validation import validate_dimension, validate_positive

logger = get_logger(__name__)

BOUNDED = 'bounded'
GROWING = 'growing'


def eps_label(eps: float) -> str:
    """Short scientific form used in column names: 1e-4, 2.5e-3"""
    return np.format_float_scientific(eps, trim='-', exp_digits=1)


@dataclass(frozen=True)
class ProbeRow:
    param: float
    closed_form_norm: float
    fd_norms: Dict[float, float]
    agreement: float


@dataclass
class InfluenceReport:
    family: str
    potential: str
    probe: str
    n: int
    seed: int
    eps: List[float]
    rows: List[ProbeRow] = field(default_factory=list)
    growth_factor: float = constants.GROWTH_FACTOR

    @property
    def growth(self) -> float:
        """Closed-form norm at the last parameter over the first"""
        first, last = self.rows[0].closed_form_norm, self.rows[-1].closed_form_norm
        if first == 0:
            return math.inf if last > 0 else 1.0
        return last / first

    @property
    def verdict(self) -> str:
        return GROWING if self.growth >= self.growth_factor else BOUNDED

    def to_csv(self, header: Optional[str] = None) -> str:
        buffer = io.StringIO()
        if header:
            buffer.write(f"# {header}\n")
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(
            ['probe_param', 'closed_form_norm']
            + [f"fd_norm_eps{eps_label(eps)}" for eps in self.eps]
            + ['agreement']
        )
        for row in self.rows:
            writer.writerow(
                [repr(float(row.param)), repr(float(row.closed_form_norm))]
                + [repr(float(row.fd_norms[eps])) for eps in self.eps]
                + [repr(float(row.agreement))]
            )
        return buffer.getvalue()

    def summary(self) -> str:
        lines = [
            f"family: {self.family}",
            f"potential: {self.potential}",
            f"probe: {self.probe} (n={self.n}, seed={self.seed})",
        ]
        for row in self.rows:
            lines.append(f"  {row.param:>12g}  |IF|={row.closed_form_norm:.6e}  agreement={row.agreement:.4f}")
        lines.append(f"growth: {self.growth:.3e}")
        lines.append(f"verdict: {self.verdict}")
        return '\n'.join(lines)


def draw_probe_pair(n: int, rng: np.random.Generator):
    """(s, y, y_bar) for a probe"""
    scale = math.sqrt(constants.STEP_VARIANCE)
    s = scale * rng.standard_normal(n)
    y = scale * rng.standard_normal(n)
    if s @ y <= 0:
        y = -y
    y_bar = rng.standard_normal(n)
    return s, y, y_bar


def probe_influence(
    family: UpdateFamily,
    n: int,
    kind,
    values: Sequence[float],
    d: float = 1.0,
    seed: int = constants.DEFAULT_SEED,
    eps: Sequence[float] = (constants.DEFAULT_PROBE_EPS,),
    growth_factor: float = constants.GROWTH_FACTOR,
    workers: Optional[int] = None,
) -> InfluenceReport:
    """
    Influence norms of ``family`` along sequence ``kind``.

    Args:
        family: Update family (not broyden)
        n: Dimension
        kind: fixed-det, spike or scaling
        values: Sequence parameters a, i or c
        d: Determinant of the fixed-det sequence
        seed: Seed of the pair draw and of the orthogonal directions
        eps: Finite-difference step sizes
        growth_factor: Last/first ratio reported as growing
        workers: Pool size for the sequence elements

    Raises:
        UnsupportedFamily: Broyden family
        ValidationError: Bad dimension or parameters
    """
    n = validate_dimension(n, minimum=2)
    kind = SequenceKind(kind)
    validate_positive(growth_factor, 'growth factor')
    eps = [float(e) for e in eps]
    log_function_call(logger, 'probe_influence', family=family.label, n=n, probe=kind.value, seed=seed)

    rng = stream(seed, ('probe', kind.value, n), 0)
    s, y, y_bar = draw_probe_pair(n, rng)
    u, v = (y, s) if family.inverse_state else (s, y)
    params = SequenceParams(values, d=d)
    matrices = adversarial_sequence(kind, u, v, (), params, rng=rng)

    def run(item) -> ProbeRow:
        param, state = item
        closed = float(np.linalg.norm(family_influence(family, state, s, y, y_bar)))
        base = family_update(family, state, SecantPair(s, y))
        fd = {e: perturbed_update(family, state, s, y, y_bar, e, base=base).approx_if for e in eps}
        agreement = fd[eps[0]] / closed if closed > 0 else math.nan
        return ProbeRow(param, closed, fd, agreement)

    items = [(index, (param, state)) for index, (param, state) in enumerate(zip(params.values, matrices))]
    rows = [row for _, row in parallel_map(run, items, workers=workers, label='probe points')]
    return InfluenceReport(
        family=family.label,
        potential=family.potential.label,
        probe=kind.value,
        n=n,
        seed=seed,
        eps=eps,
        rows=rows,
        growth_factor=growth_factor,
    )


def influence_along(
    family: UpdateFamily,
    matrices: Sequence[SpdCholesky],
    s: np.ndarray,
    y: np.ndarray,
    y_bar: np.ndarray,
) -> List[float]:
    """Closed-form influence norms of one update from each matrix."""
    return [float(np.linalg.norm(family_influence(family, M, s, y, y_bar))) for M in matrices]
