"""
Constants for bregqn
Centralized constants to avoid magic numbers throughout the codebase
"""
import sys
from typing import Dict, Tuple

# Floating point
MACHINE_EPS: float = sys.float_info.epsilon
LOG_MAX_FLOAT: float = 709.782712893384  # log(sys.float_info.max)
LOG_Z_CLIP: float = 690.0  # exp(±690) stays inside the double range

# Linear algebra
SYMMETRY_RTOL: float = 1e-12  # relative to the Frobenius norm
CURVATURE_RTOL: float = 1e-12  # s'y <= CURVATURE_RTOL * |s| * |y| is a violation

# Scale equation
SCALE_MAX_ITER: int = 200
SCALE_RESIDUAL_TOL: float = 1e-12
SCALE_BRACKET_FACTOR: float = 10.0

# Line search
DEFAULT_C1: float = 1e-4
DEFAULT_C2: float = 0.9
DEFAULT_TOL_X: float = 1e-12
DEFAULT_MAX_EVALS: int = 500
DEFAULT_BRACKET_CAP: float = 2.0 ** 30
DEFAULT_INITIAL_STEP: float = 1.0
MAX_NO_DECREASE: int = 3

# Solver
DEFAULT_GRAD_TOL_PER_DIM: float = 1e-5  # grad_tol = n * this
DEFAULT_MAX_ITER: int = 50000

# Potential validation grid
DEFAULT_GRID_MIN: float = 1e-8
DEFAULT_GRID_MAX: float = 1e8
DEFAULT_GRID_POINTS: int = 200
LIMIT_CHECK_POINTS: int = 10
DERIVATIVE_STEP: float = 1e-6
DERIVATIVE_RTOL: float = 1e-5

# Experiments
DEFAULT_TABLE2_DIMS: Tuple[int, ...] = (10, 100)
FULL_TABLE2_DIMS: Tuple[int, ...] = (10, 100, 500, 1000)
DEFAULT_TABLE3_DIMS: Tuple[int, ...] = (100,)
FULL_TABLE3_DIMS: Tuple[int, ...] = (100, 500, 1000)
DEFAULT_GAMMAS: Tuple[float, ...] = (-2.0, -1.0, 0.0)
DEFAULT_NOISE_LEVELS: Tuple[float, ...] = (0.0, 0.1, 0.2, 0.3)
DEFAULT_TRIALS: int = 20
DEFAULT_RUNS: int = 20
DEFAULT_SEED: int = 42
DEFAULT_EPS_RANGE: float = 0.2
STEP_VARIANCE: float = 10.0  # s, y, x0 ~ N(0, 10 I)
RESAMPLE_CAP: int = 1000
DEFAULT_MIN_COSINE: float = 0.1  # Table 2 redraws (s, y) while cos(s, y) < this
THREADS_ENV: str = 'QN_THREADS'

# Influence probes
DEFAULT_PROBE_EPS: float = 1e-4
GROWTH_FACTOR: float = 10.0  # last/first norm ratio that counts as unbounded

ERROR_MESSAGES: Dict[str, str] = {
    'dimension_mismatch': "Dimension mismatch: expected {expected}, got {actual}",
    'not_symmetric': "Matrix is not symmetric (asymmetry {asym:.3e})",
    'not_positive_definite': "Matrix is not positive definite (pivot {pivot:.3e} at {index})",
    'downdate_breakdown': "Cholesky downdate broke down at column {index} (r^2={r2:.3e})",
    'det_overflow': "Determinant overflows (logdet={logdet:.6g}); use logdet instead",
    'curvature': "Curvature condition violated: s'y={sy:.3e}",
    'nonconvergence': "Scale equation did not converge after {iters} iterations (residual {residual:.3e})",
    'non_finite': "Non-finite value from {what} at x with |x|={norm:.3e}",
    'not_descent': "Not a descent direction: phi'(0)={dphi0:.3e}",
    'line_search_failure': "Line search made no progress for {count} consecutive iterations",
    'unsupported_family': "No closed-form influence function for family {family}",
    'resample_limit': "Perturbation positivity kept failing after {cap} resamples",
    'unknown_potential': "Unknown potential '{name}'. Expected neglog, power:gamma=<g> or bounded:a=<a>,b=<b>",
    'unknown_family': "Unknown family '{name}'. Expected vbfgs-b, vdfp-b, vbfgs-h, vdfp-h or broyden:theta=<t>,v1=<pot>,v2=<pot>",
}

LOG_MESSAGES: Dict[str, str] = {
    'dense_fallback': "Rank-one downdate broke down; refactorizing dense matrix (n={n})",
    'curvature_skip': "Iteration {k}: curvature condition failed, update skipped",
    'wolfe_max_evals': "Wolfe search hit {evals} evaluations; returning best sufficient-decrease step {alpha:.3e}",
    'no_nu_bounds': "Potential {potential} has no nu bounds; global convergence guarantee does not apply",
    'max_iter': "{problem} n={n} h={h} {method} run {run}: reached max_iter",
    'trial_error': "{setup} n={n} trial {trial} {family} gamma={gamma}: {error}",
    'reference_method': "Method {method} is a reference comparator not derived from a Bregman potential",
    'solver_done': "{outcome} after {k} iterations, |grad|={gnorm:.3e}",
}
