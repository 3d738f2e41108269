"""
Dense symmetric positive-definite matrices held as Cholesky factors

SpdCholesky values are immutable: every operation returns a new factor.
Determinants are only ever handled through logdet; det() refuses to
overflow.
"""
import io
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import linalg

from bregqn.utils import constants
from bregqn.utils.constants import ERROR_MESSAGES
from bregqn.utils.errors import DetOverflow, DowndateBreakdown, NotPositiveDefinite, ValidationError
from bregqn.utils.logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class SpdCholesky:
    """
    Positive-definite matrix A = L L^T, L lower triangular with a positive
    diagonal.
    """
    L: np.ndarray

    def __post_init__(self):
        L = np.array(self.L, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValidationError(f"Cholesky factor must be square, got shape {L.shape}")
        if not np.all(np.diag(L) > 0):
            raise NotPositiveDefinite("Cholesky factor needs a strictly positive diagonal")
        L = np.tril(L)
        L.setflags(write=False)
        object.__setattr__(self, 'L', L)

    @classmethod
    def identity(cls, n: int) -> 'SpdCholesky':
        return cls(np.eye(n))

    @classmethod
    def diagonal(cls, values) -> 'SpdCholesky':
        values = np.asarray(values, dtype=float)
        if np.any(values <= 0):
            raise NotPositiveDefinite("Diagonal entries must be positive")
        return cls(np.diag(np.sqrt(values)))

    @property
    def n(self) -> int:
        return self.L.shape[0]

    def matrix(self) -> np.ndarray:
        """Dense A = L L^T (exactly symmetric)"""
        A = self.L @ self.L.T
        return 0.5 * (A + A.T)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.L @ (self.L.T @ x)

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.L))))

    def det(self) -> float:
        """
        Raises:
            DetOverflow: If the determinant does not fit in a double
        """
        value = self.logdet()
        if value > constants.LOG_MAX_FLOAT:
            raise DetOverflow(ERROR_MESSAGES['det_overflow'].format(logdet=value))
        return math.exp(value)

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve A x = b by forward and back substitution through L."""
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise ValidationError(ERROR_MESSAGES['dimension_mismatch'].format(expected=self.n, actual=b.shape[0]))
        return linalg.cho_solve((self.L, True), b, check_finite=False)

    def invert(self) -> 'SpdCholesky':
        """
        Factor of A^{-1}. With L^{-1} = Q R, A^{-1} = R^T R, so R^T (rows
        signed for a positive diagonal) is the factor; A^{-1} is never formed.
        """
        L_inv = linalg.solve_triangular(self.L, np.eye(self.n), lower=True, check_finite=False)
        (R,) = linalg.qr(L_inv, mode='r', check_finite=False)
        signs = np.where(np.diag(R) < 0, -1.0, 1.0)
        return SpdCholesky((signs[:, None] * R).T)

    def scaled(self, c: float) -> 'SpdCholesky':
        """Factor of c A for c > 0."""
        if not c > 0:
            raise NotPositiveDefinite(f"Scale factor must be positive, got {c}")
        return SpdCholesky(math.sqrt(c) * self.L)

    def rank_one_modify(self, w: np.ndarray, sign: int) -> 'SpdCholesky':
        return rank_one_modify(self, w, sign)

    def to_csv(self) -> str:
        """Dense matrix as CSV with a header line holding n"""
        buffer = io.StringIO()
        buffer.write(f"{self.n}\n")
        np.savetxt(buffer, self.matrix(), delimiter=',', fmt='%.17g')
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> 'SpdCholesky':
        header, _, body = text.partition('\n')
        try:
            n = int(header.strip())
            A = np.loadtxt(io.StringIO(body), delimiter=',', ndmin=2)
        except ValueError as e:
            raise ValidationError(f"Invalid matrix CSV: {e}")
        if A.shape != (n, n):
            raise ValidationError(f"Matrix CSV declares n={n} but holds shape {A.shape}")
        return cholesky(A)


MatrixLike = Union[np.ndarray, SpdCholesky]


def cholesky(matrix: np.ndarray, check_symmetry: bool = True) -> SpdCholesky:
    """
    Factor a dense symmetric positive-definite matrix.

    Args:
        matrix: Square array
        check_symmetry: Reject inputs whose asymmetry exceeds 1e-12 of the
            Frobenius norm (the symmetric part is factored either way)

    Returns:
        SpdCholesky

    Raises:
        ValidationError: Not square or not symmetric
        NotPositiveDefinite: A pivot at or below n * eps * max diagonal
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"Matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NotPositiveDefinite("Matrix has non-finite entries")

    asym = float(np.linalg.norm(A - A.T))
    if check_symmetry and asym > constants.SYMMETRY_RTOL * float(np.linalg.norm(A)):
        raise ValidationError(ERROR_MESSAGES['not_symmetric'].format(asym=asym))
    A = 0.5 * (A + A.T)

    n = A.shape[0]
    try:
        L = linalg.cholesky(A, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"Matrix is not positive definite: {e}")

    pivots = np.diag(L) ** 2
    threshold = n * constants.MACHINE_EPS * float(np.max(np.diag(A)))
    small = np.nonzero(pivots <= threshold)[0]
    if small.size:
        index = int(small[0])
        raise NotPositiveDefinite(
            ERROR_MESSAGES['not_positive_definite'].format(pivot=pivots[index], index=index)
        )
    return SpdCholesky(L)


def rank_one_modify(A: SpdCholesky, w: np.ndarray, sign: int) -> SpdCholesky:
    """
    Factor of A + sign * w w^T by sequential rotations (hyperbolic for
    sign = -1).

    Raises:
        ValidationError: Wrong dimension or sign
        DowndateBreakdown: A downdate pivot became nonpositive; the caller
            should refactor the explicitly formed matrix instead
    """
    if sign not in (1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {sign}")
    x = np.array(w, dtype=float)
    n = A.n
    if x.shape != (n,):
        raise ValidationError(ERROR_MESSAGES['dimension_mismatch'].format(expected=n, actual=x.shape))

    L = np.array(A.L)
    for k in range(n):
        d = L[k, k]
        r2 = d * d + sign * x[k] * x[k]
        if r2 <= n * constants.MACHINE_EPS * d * d:
            raise DowndateBreakdown(ERROR_MESSAGES['downdate_breakdown'].format(index=k, r2=r2))
        r = math.sqrt(r2)
        c = r / d
        s = x[k] / d
        L[k, k] = r
        if k + 1 < n:
            L[k + 1:, k] = (L[k + 1:, k] + sign * s * x[k + 1:]) / c
            x[k + 1:] = c * x[k + 1:] - s * L[k + 1:, k]
    return SpdCholesky(L)


def matrix_square_root(A: SpdCholesky) -> np.ndarray:
    """Symmetric S with S S = A, from the symmetric eigendecomposition."""
    eigvals, eigvecs = linalg.eigh(A.matrix())
    eigvals = np.clip(eigvals, 0.0, None)
    S = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
    return 0.5 * (S + S.T)
