"""
Core numerics: potentials, Cholesky kernel, update formulae, line searches,
benchmark problems and the quasi-Newton driver.

Usage:
    from bregqn.core import (
        SolverConfig, UpdateFamily, make_potential, make_problem, minimize
    )

    family = UpdateFamily.vbfgs_b(make_potential('power', {'gamma': -1}))
    trace = minimize(make_problem('p1', 10), x0, SolverConfig(family=family))
"""
from bregqn.core.linesearch import (
    LineSearchMode,
    LineSearchParams,
    LineSearchResult,
    near_exact_search,
    wolfe_search,
)
from bregqn.core.potential import (
    Potential,
    PotentialKind,
    ValidationReport,
    evaluate,
    make_potential,
    parse_potential,
    validate,
)
from bregqn.core.problems import Problem, ProblemKind, make_problem
from bregqn.core.solver import IterationRecord, NoiseAdvance, Outcome, SolverConfig, SolverTrace, minimize
from bregqn.core.spd import SpdCholesky, cholesky, matrix_square_root, rank_one_modify
from bregqn.core.update import (
    FamilyKind,
    PrimalUpdate,
    SecantPair,
    UpdateFamily,
    bfgs_core,
    bregman_divergence,
    dfp_core,
    family_update,
    inverse_primal_update,
    parse_family,
    primal_update,
    solve_scale_equation,
    vdfp_direct,
)

__all__ = [
    'LineSearchMode', 'LineSearchParams', 'LineSearchResult', 'near_exact_search', 'wolfe_search',
    'Potential', 'PotentialKind', 'ValidationReport', 'evaluate', 'make_potential', 'parse_potential', 'validate',
    'Problem', 'ProblemKind', 'make_problem',
    'IterationRecord', 'NoiseAdvance', 'Outcome', 'SolverConfig', 'SolverTrace', 'minimize',
    'SpdCholesky', 'cholesky', 'matrix_square_root', 'rank_one_modify',
    'FamilyKind', 'PrimalUpdate', 'SecantPair', 'UpdateFamily', 'bfgs_core', 'bregman_divergence',
    'dfp_core', 'family_update', 'inverse_primal_update', 'parse_family', 'primal_update',
    'solve_scale_equation', 'vdfp_direct',
]
