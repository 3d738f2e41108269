"""Tests for the line searches"""
import math

import pytest

from bregqn.core.linesearch import (
    LineSearchMode,
    LineSearchParams,
    _cubicmin,
    _quadmin,
    expand_bracket,
    line_search,
    near_exact_search,
    wolfe_search,
)
from bregqn.utils.errors import ValidationError
from bregqn.utils.settings import load_settings


def quadratic(center, scale=1.0):
    return (lambda a: scale * (a - center) ** 2), (lambda a: 2.0 * scale * (a - center))


def assert_wolfe(phi, dphi, result, params=LineSearchParams()):
    phi0, dphi0 = phi(0.0), dphi(0.0)
    assert result.converged
    assert result.alpha > 0
    assert phi(result.alpha) <= phi0 + params.c1 * result.alpha * dphi0
    assert dphi(result.alpha) >= params.c2 * dphi0


class TestInterpolation:
    """Test the zoom interpolation helpers"""

    def test_cubic(self):
        """Should return the local minimizer x = 1 of x^3 - 3x from three samples"""
        assert _cubicmin(0.0, 0.0, -3.0, 2.0, 2.0, -1.0, 2.0) == pytest.approx(1.0)

    def test_quadratic(self):
        """Should return the vertex of (x - 0.3)^2"""
        assert _quadmin(0.0, 0.09, -0.6, 1.0, 0.49) == pytest.approx(0.3)

    def test_degenerate(self):
        """Should give None when the samples carry no curvature"""
        assert _quadmin(0.0, 0.0, -1.0, 1.0, -1.0) is None
        assert _cubicmin(0.0, 0.0, -1.0, 1.0, -1.0, 1.0, -1.0) is None


class TestWolfeSearch:
    """Test the weak Wolfe search"""

    def test_unit_step_accepted(self):
        """Should accept alpha = 1 when it satisfies both conditions"""
        phi, dphi = quadratic(2.0)
        result = wolfe_search(phi, dphi)
        assert result.alpha == 1.0
        assert result.evals == 1

    @pytest.mark.parametrize('center', [0.1, 0.003, 0.7])
    def test_zoom(self, center):
        """Should zoom into a short step"""
        phi, dphi = quadratic(center)
        assert_wolfe(phi, dphi, wolfe_search(phi, dphi))

    @pytest.mark.parametrize('center', [30.0, 1000.0])
    def test_expansion(self, center):
        """Should double the step for distant minimizers"""
        phi, dphi = quadratic(center)
        result = wolfe_search(phi, dphi)
        assert_wolfe(phi, dphi, result)
        assert result.alpha > 1.0

    def test_nonquadratic(self):
        """Should satisfy both conditions on a quartic with a wiggle"""
        def phi(a):
            return (a - 0.4) ** 4 + 0.01 * math.sin(10 * a) - 0.1 * a

        def dphi(a):
            return 4 * (a - 0.4) ** 3 + 0.1 * math.cos(10 * a) - 0.1

        assert_wolfe(phi, dphi, wolfe_search(phi, dphi))

    def test_infinite_values(self):
        """Should treat failed evaluations as too long a step"""
        def phi(a):
            return (a - 0.5) ** 2 if a < 0.8 else math.inf

        def dphi(a):
            return 2 * (a - 0.5)

        result = wolfe_search(phi, dphi)
        assert_wolfe(phi, dphi, result)
        assert result.alpha < 0.8

    def test_strict_constants(self):
        """Should honor a small c2"""
        params = LineSearchParams(c1=1e-4, c2=0.1)
        phi, dphi = quadratic(0.37)
        assert_wolfe(phi, dphi, wolfe_search(phi, dphi, params), params)

    def test_not_descent(self):
        """Should reject phi'(0) >= 0"""
        phi, dphi = quadratic(-1.0)
        with pytest.raises(ValidationError, match="descent"):
            wolfe_search(phi, dphi)

    def test_budget_exhausted(self):
        """Should return the best sufficient-decrease step when the budget runs out"""
        params = LineSearchParams(max_evals=1)
        phi, dphi = quadratic(0.01)
        result = wolfe_search(phi, dphi, params)
        assert not result.converged
        assert result.alpha == 0.0


class TestNearExactSearch:
    """Test the bounded Brent search"""

    @pytest.mark.parametrize('center', [0.3, 3.0, 25.0])
    def test_quadratic_minimizer(self, center):
        """Should reach the minimizer of a convex quadratic to 1e-10"""
        phi, _ = quadratic(center, scale=2.0)
        result = near_exact_search(phi, tol_x=1e-12)
        assert result.alpha == pytest.approx(center, abs=1e-10)

    def test_explicit_interval(self):
        """Should stay inside (0, alpha_max]"""
        phi, _ = quadratic(5.0)
        result = near_exact_search(phi, alpha_max=2.0)
        assert 0 < result.alpha <= 2.0
        assert result.alpha == pytest.approx(2.0, abs=1e-5)

    def test_infinite_values(self):
        """Should avoid regions where phi is not finite"""
        def phi(a):
            return (a - 3.0) ** 2 if a <= 5.0 else math.inf

        result = near_exact_search(phi)
        assert result.alpha == pytest.approx(3.0, abs=1e-6)

    def test_bad_interval(self):
        """Should reject a nonpositive alpha_max"""
        with pytest.raises(ValidationError):
            near_exact_search(lambda a: a, alpha_max=0.0)


class TestExpandBracket:
    """Test the bracket expansion"""

    def test_stops_when_phi_rises(self):
        """Should double from 1 until phi increases"""
        phi, _ = quadratic(3.0)
        alpha, evals = expand_bracket(phi)
        assert alpha == 8.0
        assert evals == 5

    def test_cap(self):
        """Should stop at the cap"""
        alpha, evals = expand_bracket(lambda a: -a, bracket_cap=16.0, phi0=0.0)
        assert alpha == 16.0
        assert evals == 4


class TestParams:
    """Test LineSearchParams"""

    @pytest.mark.parametrize('kwargs', [
        {'c1': 0.5, 'c2': 0.5},
        {'c1': 0.0},
        {'c2': 1.0},
        {'max_evals': 0},
        {'tol_x': 0.0},
        {'bracket_cap': 0.5},
        {'mode': 'newton'},
    ])
    def test_invalid(self, kwargs):
        """Should reject invalid settings"""
        with pytest.raises(ValueError):
            LineSearchParams(**kwargs)

    def test_from_settings(self):
        """Should take defaults from the settings and apply overrides"""
        params = LineSearchParams.from_settings(load_settings(), mode='exact', c2=0.5, tol_x=None)
        assert params.mode == LineSearchMode.NEAR_EXACT
        assert params.c2 == 0.5
        assert params.tol_x == 1e-12

    def test_dispatch(self):
        """Should route to the search named by the mode"""
        phi, dphi = quadratic(0.25)
        exact = line_search(LineSearchParams(mode='exact'), phi, dphi, phi(0.0), dphi(0.0))
        assert exact.alpha == pytest.approx(0.25, abs=1e-9)
        wolfe = line_search(LineSearchParams(), phi, dphi, phi(0.0), dphi(0.0))
        assert_wolfe(phi, dphi, wolfe)
