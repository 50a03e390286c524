from fractions import Fraction

import pytest

from heungap.cli import golden_text
from heungap.elliptic import lattice_from_periods
from heungap.exceptions import ConfigError
from heungap.fingap import PotentialSpec, compute_xi
from heungap.symalg import LARGE_E_CONTEXT, WKB_CONTEXT
from heungap.wkb import (WkbSeries, bridge_residual, check_parity, finite_gap_riccati,
                         large_e_terms, monodromy_asymptotics, split_odd_even, verify_riccati,
                         wkb_terms)


square = lattice_from_periods(1, 1j)


@pytest.fixture(scope='module')
def series():
    return wkb_terms(8)


@pytest.mark.wkb
class TestWkbSeries():

    @pytest.mark.parametrize('j,name', [(-1, 's_m1'), (0, 's_0'), (1, 's_1')])
    def test_golden(self, series, j, name):
        assert series.term(j).render() == golden_text(name)

    def test_s0_is_log_derivative(self, series):
        u = WKB_CONTEXT.var('u')
        u_inv = WKB_CONTEXT.variable('u', -1)
        assert series.term(0) == -u.derive_x() * u_inv * Fraction(1, 2)

    def test_riccati(self, series):
        report = verify_riccati(series, 8)
        assert report.ok, report.residue

    def test_riccati_catches_a_wrong_term(self, series):
        terms = list(series.terms)
        terms[2] = terms[2] * 2
        report = verify_riccati(WkbSeries(terms, series.order))
        assert not report.ok
        assert report.details['order'] == 0

    def test_odd_even(self, series):
        split = split_odd_even(series)
        assert split.report.ok, split.report.residue
        assert sorted(split.odd) == [-1, 1, 3, 5, 7]
        assert sorted(split.even) == [0, 2, 4, 6, 8]

    def test_parity(self, series):
        assert check_parity(series).ok

    def test_render(self):
        lines = wkb_terms(1).render()
        assert lines[0] == 'S_-1 = u'
        assert len(lines) == 3

    def test_order_limits(self):
        with pytest.raises(ConfigError):
            wkb_terms(13)
        with pytest.raises(ConfigError):
            wkb_terms(-1)
        with pytest.raises(ConfigError):
            verify_riccati(wkb_terms(2), 4)

    def test_lame_form_only(self):
        with pytest.raises(ConfigError):
            wkb_terms(2, PotentialSpec((1, 1, 0, 0)))


@pytest.mark.wkb
@pytest.mark.fingap
class TestFiniteGapRiccati():

    @pytest.mark.parametrize('l', [(1, 0, 0, 0), (2, 0, 0, 0), (1, 1, 0, 0)])
    def test_exact(self, l):
        result = finite_gap_riccati(compute_xi(PotentialSpec(l)))
        assert result.ok
        assert result.first.is_zero()
        assert result.second.is_zero()

    def test_needs_symbolic_xi(self):
        xi = compute_xi(PotentialSpec.lame(1), 'numeric', square, 1.7)
        with pytest.raises(ConfigError):
            finite_gap_riccati(xi)


@pytest.mark.wkb
class TestLargeE():

    def test_first_terms(self):
        ctx = LARGE_E_CONTEXT
        L, z, zeta = ctx.variables_of('L', 'z', 'zeta')
        psi = large_e_terms(None, 2)
        assert psi.term(1) == -L * zeta * Fraction(1, 2)
        assert psi.term(2) == -L * z * Fraction(1, 4)

    def test_third_term(self):
        ctx = LARGE_E_CONTEXT
        L, g2, w, x = ctx.variables_of('L', 'g2', 'w', 'x')
        psi = large_e_terms(None, 3)
        z2 = w * Fraction(1, 6) + g2 * x * Fraction(1, 12)
        want = (L * Fraction(3, 4) - L * L * Fraction(1, 8)) * z2 - L * g2 * x * Fraction(1, 16)
        assert psi.term(3) == want

    def test_fourth_derivative(self):
        ctx = LARGE_E_CONTEXT
        L, z, w = ctx.variables_of('L', 'z', 'w')
        psi = large_e_terms(None, 4)
        assert psi.derivative(4) == (L * L * Fraction(1, 4) - L * Fraction(3, 4)) * z * w
        assert psi.term(4) == (L * L * Fraction(1, 8) - L * Fraction(3, 8)) * z * z

    def test_derivatives(self):
        psi = large_e_terms(None, 5)
        for j in range(1, 6):
            assert psi.term(j).derive_x() == psi.derivative(j)

    def test_numeric_strength(self):
        ctx = LARGE_E_CONTEXT
        psi = large_e_terms(2, 1)
        assert psi.term(1) == -ctx.var('zeta') * 3
        assert psi.render() == ['psi_1 = ' + psi.term(1).render()]

    def test_increments(self):
        ctx = LARGE_E_CONTEXT
        L, g2 = ctx.variables_of('L', 'g2')
        increments = monodromy_asymptotics(large_e_terms(None, 4))
        by_power = dict((inc.power, inc) for inc in increments)
        assert by_power[1].omega == 2
        assert by_power[-1].eta == -L
        assert by_power[-1].omega.is_zero()
        assert by_power[-2].is_zero()
        assert by_power[-3].omega == -L * L * g2 / 48
        assert by_power[-4].is_zero()

    def test_order_limits(self):
        with pytest.raises(ConfigError):
            large_e_terms(None, 0)
        with pytest.raises(ConfigError):
            large_e_terms(None, 11)

    @pytest.mark.slow
    def test_bridge_converges(self):
        low = bridge_residual(2, square, 8.0)
        high = bridge_residual(2, square, 16.0)
        assert 16 <= low / high <= 64
