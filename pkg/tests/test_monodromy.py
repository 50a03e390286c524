import cmath
import math

import numpy as np
import pytest

from heungap.elliptic import lattice_from_periods
from heungap.exceptions import (ConfigError, ConsistencyError, ExcludedPointError,
                                ExtractionError)
from heungap.fingap import PotentialSpec, compute_q, compute_xi, spectral_curve_roots
from heungap.monodromy import (ANTIPERIODIC_EDGE, GAP, PERIODIC_EDGE, _nearest_edge,
                               band_trace, bloch_branch, classify_band, compare_routes,
                               floquet_bloch, floquet_pair, hk_example_l1, hk_example_l2,
                               hk_extract, hk_multiplier, integrate_floquet, lambda_eval,
                               monodromy_hyperelliptic, reduction_check, schrodinger_residual,
                               three_way_agreement)
from heungap.settings import DEFAULT_TOLERANCES


square = lattice_from_periods(1, 1j)
skew = lattice_from_periods(1, 0.3 + 1.1j)

free = PotentialSpec((0, 0, 0, 0))
lame1 = PotentialSpec.lame(1)
lame2 = PotentialSpec.lame(2)


def gap_energies(spec, L):
    roots = spectral_curve_roots(compute_q(compute_xi(spec)), L)
    return [roots[0] - 0.7, 0.5 * (roots[1] + roots[2])]


def band_energy(spec, L):
    roots = spectral_curve_roots(compute_q(compute_xi(spec)), L)
    return 0.5 * (roots[0] + roots[1])


@pytest.fixture(scope='module')
def curve1():
    xi = compute_xi(lame1)
    return xi, compute_q(xi)


@pytest.fixture(scope='module')
def curve2():
    xi = compute_xi(lame2)
    return xi, compute_q(xi)


@pytest.mark.monodromy
class TestFloquet():

    @pytest.mark.parametrize('E', [1.5, -0.8, 0.3 + 0.2j])
    def test_free_trace(self, E):
        result = integrate_floquet(free, square, E, 1)
        assert abs(result.trace - 2 * cmath.cos(2 * cmath.sqrt(E))) < 1e-8
        assert abs(result.det - 1) < 1e-8

    def test_free_multiplier(self):
        result = integrate_floquet(free, square, 1.5, 1)
        assert abs(result.multiplier - cmath.exp(2j * math.sqrt(1.5))) < 1e-8

    def test_free_third_period(self):
        E = 0.6
        result = integrate_floquet(free, square, E, 3)
        assert abs(result.trace - 2 * cmath.cos(2j * math.sqrt(E))) < 1e-7

    @pytest.mark.parametrize('i', [1, 2, 3])
    def test_lame1_edges(self, i):
        trace = band_trace(lame1, square, -square.e(i).real)
        assert abs(abs(trace) - 2) < 1e-6

    def test_realline_matches_complex_base(self):
        E = 0.4
        a = integrate_floquet(lame2, square, E, 1, realline=True)
        b = integrate_floquet(lame2, square, E, 1)
        assert abs(a.trace - b.trace) < 1e-7

    def test_pair_on_common_eigenvector(self):
        pair = floquet_pair(lame1, skew, 0.9 + 0.4j)
        assert abs(pair.first.det - 1) < 1e-7
        assert abs(pair.third.det - 1) < 1e-7
        # m3 is an eigenvalue of the third matrix
        m = pair.third.matrix
        det = (m[0][0] - pair.m3) * (m[1][1] - pair.m3) - m[0][1] * m[1][0]
        assert abs(det) < 1e-6 * max(1, abs(pair.m3)) ** 2

    @pytest.mark.parametrize('seed', [3, 11])
    def test_unit_determinant_at_complex_energy(self, seed):
        rng = np.random.RandomState(seed)
        E = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        for k in (1, 3):
            assert abs(integrate_floquet(lame2, skew, E, k).det - 1) < 1e-7

    def test_determinant_drift_raises(self):
        tight = DEFAULT_TOLERANCES.replace(det=1e-30)
        with pytest.raises(ConsistencyError) as exc:
            integrate_floquet(lame2, skew, 0.37 + 0.81j, 1, tolerances=tight)
        assert exc.value.invariant == 'floquet-det'

    def test_bloch_branches_are_reciprocal(self, curve1):
        xi, Q = curve1
        E = gap_energies(lame1, square)[0]
        s = bloch_branch(Q, square, E)
        assert s.real > 0 and s.imag == 0
        plus = floquet_bloch(xi, Q, square, E, s=s)
        minus = floquet_bloch(xi, Q, square, E, s=-s)
        assert abs(plus.m1 * minus.m1 - 1) < 1e-8
        assert abs(plus.m3 * minus.m3 - 1) < 1e-8
        assert abs(abs(plus.m1) - 1) > 1e-3

    def test_period_index(self):
        with pytest.raises(ConfigError):
            integrate_floquet(lame1, square, 0.5, 2)

    def test_realline_restrictions(self):
        with pytest.raises(ConfigError):
            integrate_floquet(PotentialSpec((1, 1, 0, 0)), square, 0.5, 1, realline=True)
        with pytest.raises(ConfigError):
            integrate_floquet(lame1, square, 0.5, 3, realline=True)
        with pytest.raises(ConfigError):
            integrate_floquet(lame1, skew, 0.5, 1, realline=True)

    def test_needs_deltas(self):
        with pytest.raises(ConfigError):
            integrate_floquet(PotentialSpec((1, 0, 0, 0), 1), square, 0.5, 1)


@pytest.mark.monodromy
@pytest.mark.spectrum
class TestClassifyBand():

    def test_free_has_one_edge(self):
        grid = [-1.05 + 0.1 * k for k in range(31)]
        points, edges = classify_band(free, square, grid)
        assert len(edges) == 1
        assert abs(edges[0].E) < 1e-8
        assert edges[0].kind == PERIODIC_EDGE
        assert points[0].kind == GAP
        assert points[-1].kind != GAP

    @pytest.mark.slow
    def test_lame1_edges(self):
        exact = sorted(-square.e(i).real for i in (1, 2, 3))
        grid = [exact[0] - 1 + (exact[-1] - exact[0] + 2) * k / 39 for k in range(40)]
        edges = classify_band(lame1, square, grid)[1]
        assert len(edges) == 3
        for edge, want in zip(sorted(edges, key=lambda e: e.E), exact):
            assert abs(edge.E - want) < 1e-8
            assert edge.kind in (PERIODIC_EDGE, ANTIPERIODIC_EDGE)

    def test_precomputed_traces(self):
        grid = [-1.0, 1.0]
        traces = [2 * math.cosh(2), 2 * math.cos(2)]
        points, edges = classify_band(free, square, grid, traces)
        assert [p.kind for p in points] == [GAP, 'bounded-band']
        assert len(edges) == 1


@pytest.mark.monodromy
class TestIntegralRepresentation():

    def test_branches_multiply_to_xi(self):
        xi = compute_xi(lame1)
        Q = compute_q(xi)
        E = 0.4 + 0.2j
        x = 0.7 + 0.45j
        plus = lambda_eval(xi, Q, skew, E, x, branch=1)
        minus = lambda_eval(xi, Q, skew, E, x, branch=-1)
        assert abs(plus * minus - xi.evaluator(skew, E)(x)[0]) < 1e-9 * abs(plus * minus)

    @pytest.mark.parametrize('spec', [lame1, lame2])
    def test_solves_schrodinger(self, spec):
        xi = compute_xi(spec)
        Q = compute_q(xi)
        E = 0.4 + 0.2j

        def f(x):
            return lambda_eval(xi, Q, skew, E, x)
        for x in (0.7 + 0.45j, 0.4 + 0.75j):
            assert schrodinger_residual(f, x, E, spec, skew) < 1e-6

    def test_numeric_q(self):
        E = 0.9
        xi = compute_xi(lame1, 'numeric', skew, E)

        def f(x):
            return lambda_eval(xi, None, skew, E, x)
        assert schrodinger_residual(f, 0.7 + 0.45j, E, lame1, skew) < 1e-6


@pytest.mark.monodromy
class TestHermiteKrichever():

    def test_extract_reproduces_multipliers(self):
        hk = hk_example_l1(0.7 + 0.3j, skew)
        m1, m3 = hk_multiplier(hk, skew, 1), hk_multiplier(hk, skew, 3)
        back = hk_extract(m1, m3, skew)
        assert abs(back.wp_alpha - hk.wp_alpha) < 1e-8 * abs(hk.wp_alpha)
        assert abs(back.kappa) < 1e-8
        assert abs(back.multiplier(skew, 1) / m1 - 1) < 1e-9

    def test_extract_lattice_point(self):
        with pytest.raises(ExtractionError):
            hk_extract(1, 1, square)

    def test_l1_third_period(self, curve1):
        xi, Q = curve1
        E = -2.5
        s = bloch_branch(Q, square, E)
        pair = floquet_bloch(xi, Q, square, E, s=s)
        hk = hk_example_l1(E, square, s=s)
        assert abs(hk_multiplier(hk, square, 1) - pair.m1) < 1e-6 * abs(pair.m1)
        assert abs(hk_multiplier(hk, square, 3) - pair.m3) < 1e-6 * abs(pair.m3)

    @pytest.mark.parametrize('index', [0, 1])
    def test_l2_extract_from_floquet(self, curve2, index):
        xi, Q = curve2
        E = gap_energies(lame2, square)[index]
        s = bloch_branch(Q, square, E)
        pair = floquet_bloch(xi, Q, square, E, s=s)
        hk = hk_extract(pair.m1, pair.m3, square)
        D = E * E - 3 * square.g2
        wp_alpha = -(E ** 3 - 27 * square.g3) / (9 * D)
        assert abs(hk.wp_alpha - wp_alpha) < 1e-6 * abs(wp_alpha)
        kappa = 2 * s / (3 * D)
        assert abs(hk.kappa - kappa) < 1e-6 * max(1, abs(kappa))

    @pytest.mark.parametrize('i', [1, 2, 3])
    def test_l2_kappa_vanishes_at_band_edge(self, curve2, i):
        E = 3 * square.e(i).real
        roots = spectral_curve_roots(curve2[1], square)
        assert min(abs(r - E) for r in roots) < 1e-8
        hk = hk_example_l2(E, square)
        assert abs(hk.kappa) < 1e-5
        assert abs(hk.wp_alpha - square.e(i)) < 1e-8
        # an edge multiplier is +-1 and fixes the trace
        m1 = hk_multiplier(hk, square, 1)
        assert abs(abs(m1) - 1) < 1e-5 and abs(m1.imag) < 1e-5
        assert abs(2 * m1.real - band_trace(lame2, square, E)) < 1e-5

    def test_l2_large_energy(self):
        E = 1000.0
        hk = hk_example_l2(E, square)
        assert abs(hk.wp_alpha + E / 9) < 1e-3 * E / 9

    def test_l2_excluded_point(self):
        with pytest.raises(ExcludedPointError):
            hk_example_l2(math.sqrt(3 * square.g2.real), square)


@pytest.mark.monodromy
class TestThreeRoutes():

    @pytest.mark.parametrize('E', gap_energies(lame1, square) + [band_energy(lame1, square)])
    def test_lame1(self, E):
        reports = three_way_agreement(lame1, square, E)
        assert [r.k for r in reports] == [1, 3]
        for r in reports:
            assert r.ok, (r.k, r.diff_hyperelliptic, r.diff_hk, r.diff_routes)

    @pytest.mark.slow
    @pytest.mark.parametrize('E', gap_energies(lame2, square))
    def test_lame2(self, E):
        for r in three_way_agreement(lame2, square, E):
            assert r.ok, (r.k, r.diff_hyperelliptic, r.diff_hk, r.diff_routes)

    def test_both_branches_agree(self, curve1):
        xi, Q = curve1
        E = gap_energies(lame1, square)[1]
        s = bloch_branch(Q, square, E)
        plus = three_way_agreement(lame1, square, E, xi, Q, s=s)
        minus = three_way_agreement(lame1, square, E, xi, Q, s=-s)
        assert all(r.ok for r in plus + minus)
        for a, b in zip(plus, minus):
            assert abs(a.floquet * b.floquet - 1) < 1e-8

    def test_flipped_kappa_disagrees(self, curve2):
        xi, Q = curve2
        E = gap_energies(lame2, square)[0]
        s = bloch_branch(Q, square, E)
        pair = floquet_bloch(xi, Q, square, E, s=s)
        hk = hk_example_l2(E, square, s=s)
        flipped = hk._replace(kappa=-hk.kappa)
        for k, m in ((1, pair.m1), (3, pair.m3)):
            hyper = monodromy_hyperelliptic(xi, Q, square, E, k, s=s)
            good = compare_routes(E, k, s, m, hyper, hk_multiplier(hk, square, k), 1e-6)
            bad = compare_routes(E, k, s, m, hyper, hk_multiplier(flipped, square, k), 1e-6)
            assert good.ok
            assert not bad.ok and bad.diff_hk > 1e-3 and bad.diff_routes > 1e-3

    def test_band_multiplier_on_unit_circle(self, curve1):
        xi, Q = curve1
        E = band_energy(lame1, square)
        s = bloch_branch(Q, square, E)
        assert s.real == 0 and s.imag > 0
        m1 = monodromy_hyperelliptic(xi, Q, square, E, 1)
        assert abs(abs(m1) - 1) < 1e-8
        assert abs(m1 - floquet_bloch(xi, Q, square, E, s=s).m1) < 1e-6

    def test_hyperelliptic_third_period(self, curve1):
        xi, Q = curve1
        E = gap_energies(lame1, square)[0]
        pair = floquet_bloch(xi, Q, square, E)
        m3 = monodromy_hyperelliptic(xi, Q, square, E, 3)
        assert abs(m3 - pair.m3) < 1e-6 * abs(pair.m3)

    def test_edge_at_or_below_energy(self):
        roots = [-2.0, 1.0, 3.0]
        assert _nearest_edge(roots, 2.9) == 1.0
        assert _nearest_edge(roots, 0.5) == -2.0
        assert _nearest_edge(roots, 1.0) == 1.0
        assert _nearest_edge(roots, -5.0) == -2.0

    def test_hyperelliptic_needs_symbolic_xi(self):
        xi = compute_xi(lame1, 'numeric', square, 1.7)
        with pytest.raises(ConfigError):
            monodromy_hyperelliptic(xi, None, square, 1.7, 1)

    def test_only_lame_cases(self):
        with pytest.raises(ConfigError):
            three_way_agreement(PotentialSpec((1, 1, 0, 0)), square, -3.0)


@pytest.mark.monodromy
class TestReduction():

    def generic_energies(self, L):
        root = math.sqrt(3 * L.g2.real)
        roots = sorted([-root, root] + [3 * L.e(i).real for i in (1, 2, 3)])
        return [0.5 * (a + b) for a, b in zip(roots, roots[1:])] + [roots[-1] + 1.0]

    def test_generic_energies(self):
        for E in self.generic_energies(square):
            report = reduction_check(E, square)
            assert report.diff_first < 1e-8 * max(1, abs(report.xi))
            assert report.diff_second < 1e-8
            assert report.ok

    def test_xi_matches_closed_form(self):
        E = self.generic_energies(square)[-1]
        report = reduction_check(E, square)
        assert abs(report.xi - hk_example_l2(E, square).wp_alpha) < 1e-8 * abs(report.xi)

    def test_needs_rectangular_lattice(self):
        with pytest.raises(ConfigError):
            reduction_check(1.0, skew)
