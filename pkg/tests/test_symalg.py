from fractions import Fraction
import pickle

import pytest
import sympy

from heungap.exceptions import ConfigError, ConsistencyError, ContextMismatchError
from heungap.symalg import (DiffOp, E_CONTEXT, G_CONTEXT, LARGE_E_CONTEXT, MultiPoly,
                            RatFunc, WKB_CONTEXT, exact_div, get_context, op_commutator,
                            op_compose, poly_arith, poly_gcd, solve_nullspace)


@pytest.mark.symbolic
class TestArithmetic():

    def test_w_square_reduces_in_e_context(self):
        z, w, e1, e2 = E_CONTEXT.variables_of('z', 'w', 'e1', 'e2')
        got = poly_arith(w, w, 'mul')
        assert got == (z - e1) * (z - e2) * (z + e1 + e2) * 4
        assert got.degree('w') == 0

    def test_difference_of_squares(self):
        E, z = G_CONTEXT.variables_of('E', 'z')
        assert poly_arith(E + z, E - z, 'mul').render() == 'E^2 - z^2'

    def test_g2_in_e_context(self):
        ctx = E_CONTEXT
        e1, e2, e3 = ctx.e(1), ctx.e(2), ctx.e(3)
        assert (e1 * e2 + e2 * e3 + e3 * e1) * (-4) == ctx.g2
        assert ctx.g2 == (e1 * e1 + e1 * e2 + e2 * e2) * 4

    def test_g3_in_e_context(self):
        ctx = E_CONTEXT
        assert ctx.e(1) * ctx.e(2) * ctx.e(3) * 4 == ctx.g3

    def test_context_mismatch(self):
        with pytest.raises(ContextMismatchError):
            poly_arith(G_CONTEXT.var('z'), E_CONTEXT.var('z'), 'add')

    def test_unknown_operation(self):
        z = G_CONTEXT.var('z')
        with pytest.raises(ConfigError):
            poly_arith(z, z, 'div')

    def test_exact_coefficients(self):
        z = G_CONTEXT.var('z')
        p = z * Fraction(1, 3) + Fraction(2, 3)
        assert p * 3 == z + 2
        assert (p / 2).coefficient('z', 1).constant_value() == Fraction(1, 6)

    def test_evaluate_exact_and_float(self):
        E, z = G_CONTEXT.variables_of('E', 'z')
        p = E * E + z * 3
        assert p.evaluate({'E': 1, 'z': Fraction(1, 3)}) == 2
        assert p.evaluate({'E': 0.5, 'z': 1.0}) == 3.25

    def test_evaluate_missing_value(self):
        E, z = G_CONTEXT.variables_of('E', 'z')
        with pytest.raises(ConfigError):
            (E + z).evaluate({'E': 1})

    def test_contexts_survive_pickling(self):
        p = G_CONTEXT.var('E') + G_CONTEXT.var('z')
        back = pickle.loads(pickle.dumps(p))
        assert back.context is G_CONTEXT
        assert back == p

    def test_get_context(self):
        assert get_context('large_e') is LARGE_E_CONTEXT
        with pytest.raises(ConfigError):
            get_context('nope')


@pytest.mark.symbolic
class TestDerivations():

    def test_derive_z(self):
        z, w = G_CONTEXT.variables_of('z', 'w')
        assert z.derive_x() == w

    def test_derive_w(self):
        z, w = G_CONTEXT.variables_of('z', 'w')
        assert w.derive_x() == z * z * 6 - G_CONTEXT.g2 * Fraction(1, 2)

    def test_leibniz(self):
        z, w = G_CONTEXT.variables_of('z', 'w')
        assert (z * z).derive_x() == z * w * 2

    def test_zeta_and_x(self):
        zeta, x, z = LARGE_E_CONTEXT.variables_of('zeta', 'x', 'z')
        assert zeta.derive_x() == -z
        assert x.derive_x() == 1

    def test_u_derivative(self):
        ctx = WKB_CONTEXT
        u, w = ctx.variables_of('u', 'w')
        assert u.derive_x() == w * ctx.variable('u', -1) * Fraction(1, 2)

    def test_u_square(self):
        ctx = WKB_CONTEXT
        u, z, E = ctx.variables_of('u', 'z', 'E')
        assert u * u == z - E
        assert u * ctx.variable('u', -1) == 1

    def test_ratfunc_quotient_rule(self):
        z, w = G_CONTEXT.variables_of('z', 'w')
        f = RatFunc(G_CONTEXT.constant(1), z)
        assert f.derive_x() == RatFunc(-w, z * z)


@pytest.mark.symbolic
class TestDivision():

    def test_gcd(self):
        E, z = G_CONTEXT.variables_of('E', 'z')
        assert poly_gcd((E + z) * (E - z), (E + z) * (E + z)) == E + z

    def test_gcd_coprime(self):
        E, z = G_CONTEXT.variables_of('E', 'z')
        assert poly_gcd(E + z, E - z) == 1

    def test_exact_div(self):
        E, z = G_CONTEXT.variables_of('E', 'z')
        assert exact_div((E + z) * (E - z), E - z) == E + z

    def test_exact_div_rejects_remainder(self):
        E, z = G_CONTEXT.variables_of('E', 'z')
        with pytest.raises(ConsistencyError) as exc:
            exact_div(E * E + 1, E - z)
        assert exc.value.invariant == 'exact-division'

    def test_ratfunc_lowest_terms(self):
        E, z = G_CONTEXT.variables_of('E', 'z')
        f = RatFunc((E + z) * (E - z), E + z)
        assert f.is_polynomial()
        assert f.as_poly() == E - z


@pytest.mark.symbolic
class TestNullspace():

    def test_identity_has_empty_nullspace(self):
        assert solve_nullspace([[1, 0], [0, 1]], G_CONTEXT) == []

    def test_rank_one(self):
        basis = solve_nullspace([[1, 1], [1, 1]], G_CONTEXT)
        assert len(basis) == 1
        assert basis[0][0] == 1
        assert basis[0][1] == -1

    def test_polynomial_entries_cleared(self):
        E, z = G_CONTEXT.variables_of('E', 'z')
        basis = solve_nullspace([[E, RatFunc(E * E, z)]], G_CONTEXT)
        assert len(basis) == 1
        a, b = basis[0]
        assert (E * z * a + E * E * b).is_zero()


@pytest.mark.symbolic
class TestSympyViews():

    def test_round_trip_through_poly(self):
        E, z, g2 = G_CONTEXT.variables_of('E', 'z', 'g2')
        p = (E + z * Fraction(1, 3)) * (E - g2)
        poly = p.as_sympy()
        assert isinstance(poly, sympy.Poly)
        assert poly.gens == G_CONTEXT.symbols
        assert MultiPoly.from_sympy(G_CONTEXT, poly) == p

    def test_from_expression_applies_rules(self):
        g2, g3, z = G_CONTEXT.symbols[0], G_CONTEXT.symbols[1], G_CONTEXT.symbols[3]
        w = G_CONTEXT.symbols[4]
        got = MultiPoly.from_sympy(G_CONTEXT, w ** 2 - 4 * z ** 3)
        assert got == MultiPoly.from_sympy(G_CONTEXT, -g2 * z - g3)

    def test_laurent_terms_have_no_poly(self):
        with pytest.raises(ConsistencyError) as exc:
            WKB_CONTEXT.variable('u', -1).as_sympy()
        assert exc.value.invariant == 'polynomial'

    def test_laurent_product(self):
        u = WKB_CONTEXT.var('u')
        u_inv = WKB_CONTEXT.variable('u', -1)
        assert (u * u_inv).is_constant()
        assert (u * u_inv).constant_value() == 1

    def test_gcd_with_rational_coefficients(self):
        z, e1, e2 = E_CONTEXT.variables_of('z', 'e1', 'e2')
        a = (z - e1) * (z - e2) * 2
        b = (z - e1) * (z + e1 + e2) * Fraction(1, 3)
        g = poly_gcd(a, b)
        assert exact_div(z - e1, g).is_constant()
        assert g.leading_term()[1] == 1

    def test_ratfunc_cancels_over_e_context(self):
        z, e1, e2 = E_CONTEXT.variables_of('z', 'e1', 'e2')
        f = RatFunc((z - e1) * (z - e2) * 6, (z - e1) * 4)
        assert f.is_polynomial()
        assert f.as_poly() == (z - e2) * Fraction(3, 2)

    def test_nullspace_of_partial_fractions(self):
        z, e1, e2 = E_CONTEXT.variables_of('z', 'e1', 'e2')
        row = [RatFunc(E_CONTEXT.constant(1), z - e1), RatFunc(E_CONTEXT.constant(1), z - e2)]
        basis = solve_nullspace([row], E_CONTEXT)
        assert len(basis) == 1
        a, b = basis[0]
        assert (a * (z - e2) + b * (z - e1)).is_zero()
        assert poly_gcd(a, b) == 1
        assert a.leading_term()[1] > 0


@pytest.mark.symbolic
class TestOperators():

    def test_commutator_with_multiplication(self):
        ctx = G_CONTEXT
        z, w = ctx.variables_of('z', 'w')
        got = op_commutator(DiffOp.d(ctx, 2), DiffOp.mult(z))
        want = DiffOp(ctx, [z * z * 6 - ctx.g2 * Fraction(1, 2), w * 2])
        assert got == want

    def test_compose_d(self):
        ctx = G_CONTEXT
        assert op_compose(DiffOp.d(ctx), DiffOp.d(ctx)) == DiffOp.d(ctx, 2)

    def test_self_commutator_vanishes(self):
        ctx = G_CONTEXT
        z, w = ctx.variables_of('z', 'w')
        A = DiffOp(ctx, [w, z * 3, 0, 1])
        assert op_commutator(A, A).is_zero()

    def test_apply(self):
        ctx = G_CONTEXT
        z = ctx.var('z')
        got = DiffOp.d(ctx, 2).apply(z)
        assert got == RatFunc(z * z * 6 - ctx.g2 * Fraction(1, 2))

    def test_render(self):
        ctx = G_CONTEXT
        z, w = ctx.variables_of('z', 'w')
        A = DiffOp(ctx, [w * Fraction(-3, 2), z * (-3), 0, 1])
        assert A.render() == 'D^3 - 3*z*D - (3/2)*w'
