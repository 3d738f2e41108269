"""Tests for potentials and their validation"""
import math

import numpy as np
import pytest

from bregqn.core.potential import (
    PotentialKind,
    evaluate,
    log_grid,
    make_potential,
    parse_potential,
    validate,
)
from bregqn.utils.errors import PotentialError, ValidationError


class TestBuiltinPotentials:
    """Test nu and beta of the built-in potentials"""

    def test_neglog(self, neglog):
        """Should have nu = 1 and beta = 0"""
        V, nu, beta = evaluate(neglog, 3.0)
        assert V == pytest.approx(-math.log(3.0))
        assert nu == pytest.approx(1.0)
        assert beta == 0.0

    def test_power(self, power_minus_one):
        """Should have nu = z^gamma and beta = gamma"""
        V, nu, beta = evaluate(power_minus_one, 2.0)
        assert V == pytest.approx(1.0 / 2.0 - 1.0)
        assert nu == pytest.approx(0.5)
        assert beta == -1.0

    def test_power_zero_is_neglog(self):
        """Should reduce to the negative log for gamma = 0"""
        pot = make_potential('power', {'gamma': 0.0})
        assert pot.value(5.0) == pytest.approx(-math.log(5.0))
        assert pot.nu_bounds == (1.0, 1.0)

    def test_bounded(self, bounded_one_two):
        """Should have nu between b - a and b"""
        V, nu, beta = evaluate(bounded_one_two, 1.0)
        assert V == pytest.approx(math.log(2.0))
        assert nu == pytest.approx(1.5)
        assert beta == pytest.approx(-1.0 / 6.0)
        assert bounded_one_two.nu(1e-12) == pytest.approx(2.0)
        assert bounded_one_two.nu(1e12) == pytest.approx(1.0)
        assert bounded_one_two.nu_bounds == (1.0, 2.0)

    def test_second_derivative(self, bounded_one_two):
        """Should match a central difference of V'"""
        z, h = 0.7, 1e-6
        numeric = (bounded_one_two.derivative(z + h) - bounded_one_two.derivative(z - h)) / (2 * h)
        assert bounded_one_two.second_derivative(z) == pytest.approx(numeric, rel=1e-6)

    def test_log_domain_matches_direct(self, power_minus_one, bounded_one_two):
        """Should give the same nu from log nu at moderate arguments"""
        for pot in (power_minus_one, bounded_one_two):
            for z in (1e-3, 0.5, 4.0, 1e3):
                assert math.exp(pot.log_nu(math.log(z))) == pytest.approx(pot.nu(z))

    def test_log_domain_far_out(self, bounded_one_two):
        """Should stay finite where det would overflow"""
        ell = 5000.0
        assert math.isfinite(bounded_one_two.log_nu(ell))
        assert bounded_one_two.beta_at_log(ell) == pytest.approx(0.0, abs=1e-12)
        assert make_potential('power', {'gamma': -2.0}).log_nu(ell) == -10000.0

    def test_outside_domain(self, neglog):
        """Should reject z <= 0"""
        with pytest.raises(ValidationError):
            neglog.nu(0.0)
        with pytest.raises(ValidationError):
            neglog.value(-1.0)


class TestCustomPotential:
    """Test user supplied potentials"""

    def test_custom_neglog(self):
        """Should derive nu and beta from the supplied derivatives"""
        pot = make_potential('custom', {
            'V': lambda z: -math.log(z),
            'dV': lambda z: -1.0 / z,
            'd2V': lambda z: 1.0 / z ** 2,
        })
        assert pot.kind == PotentialKind.CUSTOM
        assert pot.nu(2.0) == pytest.approx(1.0)
        assert pot.beta(2.0) == pytest.approx(0.0, abs=1e-12)
        assert pot.log_nu(0.3) == pytest.approx(0.0, abs=1e-12)

    def test_custom_missing_callables(self):
        """Should list the missing derivatives"""
        with pytest.raises(PotentialError, match="d2V"):
            make_potential('custom', {'V': abs, 'dV': abs})


class TestPotentialParameters:
    """Test parameter range checks"""

    def test_power_gamma_limit(self):
        """Should require gamma < 1/n_max"""
        make_potential('power', {'gamma': 0.2}, n_max=4)
        with pytest.raises(PotentialError, match="gamma"):
            make_potential('power', {'gamma': 0.25}, n_max=4)

    def test_power_needs_gamma(self):
        """Should reject a power potential without gamma"""
        with pytest.raises(PotentialError):
            make_potential('power')

    @pytest.mark.parametrize('a,b', [(2.0, 1.0), (1.0, 1.0), (-0.5, 1.0)])
    def test_bounded_range(self, a, b):
        """Should require 0 <= a < b"""
        with pytest.raises(PotentialError):
            make_potential('bounded', {'a': a, 'b': b})

    def test_unknown_kind(self):
        """Should reject unknown potentials"""
        with pytest.raises(PotentialError, match="Unknown potential"):
            make_potential('entropy')

    def test_potential_error_is_validation_error(self):
        """Should be reported as a usage error"""
        assert issubclass(PotentialError, ValidationError)


class TestParsePotential:
    """Test the command-line potential syntax"""

    def test_parse_neglog(self):
        """Should parse the bare name"""
        assert parse_potential('neglog').kind == PotentialKind.NEGLOG

    def test_parse_power(self):
        """Should parse gamma"""
        pot = parse_potential('power:gamma=-1')
        assert pot.gamma == -1.0
        assert pot.label == 'power:gamma=-1.0'

    def test_parse_bounded(self):
        """Should parse a and b"""
        pot = parse_potential('bounded:a=0.5, b=2')
        assert (pot.a, pot.b) == (0.5, 2.0)

    def test_parse_round_trip_label(self):
        """Should accept its own labels"""
        pot = parse_potential('bounded:a=1,b=3')
        assert parse_potential(pot.label) == pot

    @pytest.mark.parametrize('text', ['power:gamma', 'power:gamma=abc', 'custom', 'sqrt'])
    def test_parse_invalid(self, text):
        """Should reject malformed or unavailable potentials"""
        with pytest.raises(PotentialError):
            parse_potential(text)

    def test_parse_checks_dimension(self):
        """Should apply the gamma < 1/n limit when n_max is given"""
        with pytest.raises(PotentialError):
            parse_potential('power:gamma=0.25', n_max=4)


class TestValidate:
    """Test grid validation of the potential conditions"""

    @pytest.mark.parametrize('text', ['neglog', 'power:gamma=-1', 'power:gamma=-2', 'bounded:a=1,b=2'])
    def test_valid_potentials_pass(self, text):
        """Should pass the built-in potentials"""
        report = validate(parse_potential(text), 10)
        assert report.passed, report.violations
        assert report.derivative_points > 0
        assert 'result: pass' in report.summary()

    def test_beta_violation(self):
        """Should flag beta >= 1/n"""
        report = validate(make_potential('power', {'gamma': 0.25}), 4)
        assert not report.passed
        assert any('beta' in v for v in report.violations)
        assert report.beta_max == pytest.approx(0.25)
        assert 'result: fail' in report.summary()

    def test_limit_violation(self):
        """Should flag z / nu^(n-1) not vanishing at zero"""
        report = validate(make_potential('power', {'gamma': 0.5}), 4)
        assert any('decreasing towards 0' in v for v in report.violations)

    def test_nonconvex_custom(self):
        """Should flag a concave V"""
        pot = make_potential('custom', {
            'V': lambda z: -math.log(z) - z ** 2,
            'dV': lambda z: -1.0 / z - 2 * z,
            'd2V': lambda z: 1.0 / z ** 2 - 2.0,
        })
        report = validate(pot, 3, grid=np.logspace(-3, 2, 40))
        assert any('convex' in v for v in report.violations)

    def test_wrong_derivative(self):
        """Should flag a V' that disagrees with V"""
        pot = make_potential('custom', {
            'V': lambda z: -math.log(z),
            'dV': lambda z: -2.0 / z,
            'd2V': lambda z: 2.0 / z ** 2,
        })
        report = validate(pot, 3, grid=np.logspace(-2, 2, 20))
        assert any('finite difference' in v for v in report.violations)

    def test_report_ranges(self, bounded_one_two):
        """Should report the nu range on the grid"""
        report = validate(bounded_one_two, 5)
        low, high = report.nu_range
        assert 1.0 <= low < high <= 2.0
        assert report.nu_bounds == (1.0, 2.0)

    def test_log_grid(self):
        """Should build a log-spaced grid and reject empty ranges"""
        grid = log_grid(1e-2, 1e2, 5)
        np.testing.assert_allclose(grid, [1e-2, 1e-1, 1.0, 1e1, 1e2])
        with pytest.raises(ValidationError):
            log_grid(1.0, 0.5, 5)
