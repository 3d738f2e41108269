"""
Matrix sequences along which influence norms are probed

fixed-det  M(a) = S (I + a p1 p1' + b p2 p2') S,  S = BFGS[I; u, v]^(1/2),
           b = (d / det S^2) / (1 + a) - 1, so det M(a) = d and M(a) u = v
spike      M_i = S (I + i p1 p1') S, M_i u = v, |M_i| grows linearly in i
scaling    c * base, base = I unless given

p1, p2 are orthonormal and orthogonal to S u and to S w for every preserved
vector w, so M(a) w = S^2 w for those as well.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from bregqn.core.spd import SpdCholesky, cholesky, matrix_square_root
from bregqn.core.update import bfgs_core, check_curvature
from bregqn.utils.errors import ValidationError
from bregqn.utils.logging_config import get_logger
from bregqn.utils.validation import validate_vector

logger = get_logger(__name__)

ORTHOGONAL_ATTEMPTS = 10
ORTHOGONAL_MIN_NORM = 1e-8


class SequenceKind(str, Enum):
    FIXED_DET = 'fixed-det'
    SPIKE = 'spike'
    SCALING = 'scaling'


@dataclass(frozen=True, eq=False)
class SequenceParams:
    """
    values: a for fixed-det, i for spike, c for scaling
    d: target determinant of the fixed-det sequence
    base: matrix scaled by the scaling sequence (identity when None)
    """
    values: Sequence[float]
    d: float = 1.0
    base: Optional[SpdCholesky] = field(default=None)

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValidationError("Sequence needs at least one parameter value")
        if not self.d > 0:
            raise ValidationError(f"Target determinant must be positive, got {self.d}")
        object.__setattr__(self, 'values', values)


def orthonormal_complement(
    vectors: Sequence[np.ndarray],
    count: int,
    n: int,
    rng: np.random.Generator,
) -> List[np.ndarray]:
    """
    ``count`` orthonormal vectors orthogonal to span(vectors), by Gram-Schmidt
    of seeded Gaussian draws against a QR basis of the span.

    Raises:
        ValidationError: n too small or no complement found
    """
    if n < len(vectors) + count:
        raise ValidationError(
            f"Need n >= {len(vectors) + count} for {count} orthogonal directions, got n={n}"
        )
    if vectors:
        Q = np.linalg.qr(np.column_stack(vectors))[0]
    else:
        Q = np.zeros((n, 0))

    found: List[np.ndarray] = []
    for _ in range(count):
        for _ in range(ORTHOGONAL_ATTEMPTS):
            r = rng.standard_normal(n)
            for _ in range(2):
                r = r - Q @ (Q.T @ r)
            norm = float(np.linalg.norm(r))
            if norm > ORTHOGONAL_MIN_NORM:
                break
        else:
            raise ValidationError("No orthogonal complement available for the requested directions")
        p = r / norm
        found.append(p)
        Q = np.column_stack([Q, p])
    return found


def _sandwich(S: np.ndarray, middle: np.ndarray) -> SpdCholesky:
    return cholesky(S @ middle @ S, check_symmetry=False)


def adversarial_sequence(
    kind,
    u: np.ndarray,
    v: np.ndarray,
    preserve: Sequence[np.ndarray] = (),
    params: Optional[SequenceParams] = None,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> List[SpdCholesky]:
    """
    Build one matrix per value of ``params.values``.

    Args:
        kind: SequenceKind or its name
        u, v: Pair the fixed-det and spike matrices map onto (M u = v)
        preserve: Vectors w whose images M w stay fixed along the sequence
        params: Sequence parameters
        seed: Seed of the Gram-Schmidt draws (ignored when rng is given)

    Raises:
        ValidationError: Unknown kind, u'v <= 0 or n too small
    """
    try:
        kind = SequenceKind(kind)
    except ValueError:
        raise ValidationError(f"Unknown sequence '{kind}'. Expected fixed-det, spike or scaling")
    if params is None:
        raise ValidationError("adversarial_sequence needs params")
    u = validate_vector(u, name='u')
    n = u.shape[0]
    v = validate_vector(v, n=n, name='v')
    preserve = [validate_vector(w, n=n, name='preserve') for w in preserve]
    if rng is None:
        rng = np.random.Generator(np.random.Philox(seed))

    if kind == SequenceKind.SCALING:
        base = params.base if params.base is not None else SpdCholesky.identity(n)
        if base.n != n:
            raise ValidationError(f"Base matrix has dimension {base.n}, vectors have {n}")
        return [base.scaled(c) for c in params.values]

    check_curvature(u, v)
    anchor = bfgs_core(SpdCholesky.identity(n), u, v)
    S = matrix_square_root(anchor)
    constrained = [S @ u] + [S @ w for w in preserve]
    I = np.eye(n)

    if kind == SequenceKind.SPIKE:
        (p1,) = orthonormal_complement(constrained, 1, n, rng)
        spikes = []
        for i in params.values:
            if not i >= 0:
                raise ValidationError(f"Spike height must be >= 0, got {i}")
            spikes.append(_sandwich(S, I + i * np.outer(p1, p1)))
        return spikes

    if n < len(preserve) + 3:
        raise ValidationError(f"fixed-det sequence needs n >= {len(preserve) + 3}, got n={n}")
    p1, p2 = orthonormal_complement(constrained, 2, n, rng)
    ratio = math.exp(math.log(params.d) - anchor.logdet())
    matrices = []
    for a in params.values:
        if not a > -1:
            raise ValidationError(f"fixed-det parameter must be > -1, got {a}")
        b = ratio / (1.0 + a) - 1.0
        middle = I + a * np.outer(p1, p1) + b * np.outer(p2, p2)
        matrices.append(_sandwich(S, middle))
    logger.debug(f"fixed-det sequence: n={n}, d={params.d:g}, {len(matrices)} matrices")
    return matrices
