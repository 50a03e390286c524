from fractions import Fraction

import pytest

from heungap.exceptions import (ConfigError, ConsistencyError, PoleError, ScanError,
                                UnexpectedTokenError)
from heungap.parser import (parse_complex, parse_int_list, parse_lattice, parse_poly,
                            parse_range)
from heungap.scanner import Scanner, TokenType
from heungap.settings import DEFAULT_TOLERANCES, ENV_VAR, Tolerances
from heungap.symalg import G_CONTEXT, WKB_CONTEXT


def token_types(text):
    return [tok.type_ for tok in Scanner(text).scan()]


@pytest.mark.parsing
class TestScanner():

    def test_complex_tokens(self):
        assert token_types('0.5+2i') == [TokenType.Number, TokenType.Plus,
                                         TokenType.Imaginary, TokenType.End]

    def test_imaginary_content_drops_unit(self):
        toks = list(Scanner('-1.25i').scan())
        assert toks[1].type_ == TokenType.Imaginary
        assert toks[1].content == '1.25'

    def test_identifier_with_digits(self):
        toks = list(Scanner('g2*E^3').scan())
        assert [t.content for t in toks[:-1]] == ['g2', '*', 'E', '^', '3']

    def test_whitespace_ignored(self):
        assert token_types('  1 ,  1i ') == [TokenType.Number, TokenType.Comma,
                                             TokenType.Imaginary, TokenType.End]

    def test_bad_character(self):
        with pytest.raises(ScanError) as exc:
            list(Scanner('1 $ 2').scan())
        assert exc.value.pos == 2
        assert 'Unexpected character' in str(exc.value)

    def test_number_glued_to_name(self):
        with pytest.raises(ScanError):
            list(Scanner('2x').scan())


@pytest.mark.parsing
class TestLiterals():

    def test_complex_forms(self):
        assert parse_complex('0.5+2i') == 0.5 + 2j
        assert parse_complex('-1.25i') == -1.25j
        assert parse_complex('3') == 3 + 0j
        assert parse_complex('i') == 1j
        assert parse_complex('-i') == -1j

    def test_complex_exact_decimal(self):
        # 0.1 + 0.2 summed exactly before the float conversion
        assert parse_complex('0.1+0.2') == float(Fraction(3, 10))

    def test_complex_exponent(self):
        assert parse_complex('1e-3') == 1e-3

    def test_complex_trailing_garbage(self):
        with pytest.raises(UnexpectedTokenError):
            parse_complex('1,2')

    def test_lattice(self):
        assert parse_lattice('1,1i') == (1 + 0j, 1j)
        assert parse_lattice('1, 0.5+1.2i') == (1 + 0j, 0.5 + 1.2j)

    def test_lattice_needs_two(self):
        with pytest.raises(UnexpectedTokenError):
            parse_lattice('1')

    def test_int_list(self):
        assert parse_int_list('2,0,0,0', 4) == (2, 0, 0, 0)
        assert parse_int_list('60', 1) == (60,)

    def test_int_list_length(self):
        with pytest.raises(UnexpectedTokenError) as exc:
            parse_int_list('2,0,0', 4)
        assert exc.value.expected == 4

    def test_int_list_rejects_decimals(self):
        with pytest.raises(UnexpectedTokenError):
            parse_int_list('1.5')
        with pytest.raises(UnexpectedTokenError):
            parse_int_list('2.0')

    def test_range(self):
        assert parse_range('-3:5:400') == (-3.0, 5.0, 400)

    def test_range_needs_points(self):
        with pytest.raises(UnexpectedTokenError):
            parse_range('0:1:0')


@pytest.mark.parsing
@pytest.mark.symbolic
class TestPolyText():

    def test_rendering_reads_back(self):
        text = 'E^5 - (21/4)*g2*E^3 - (27/4)*g3*E^2 + (27/4)*g2^2*E + (81/4)*g2*g3'
        p = parse_poly(text, G_CONTEXT)
        assert p.render() == text

    def test_reduction_applies(self):
        assert parse_poly('w^2', G_CONTEXT) == parse_poly('4*z^3 - g2*z - g3', G_CONTEXT)

    def test_laurent_exponent(self):
        p = parse_poly('-(1/4)*w*u^-2', WKB_CONTEXT)
        assert p.render() == '-(1/4)*w*u^-2'

    def test_unknown_variable(self):
        with pytest.raises(UnexpectedTokenError) as exc:
            parse_poly('E + y', G_CONTEXT)
        assert exc.value.found == 'y'

    def test_negative_power_rejected(self):
        with pytest.raises(ConfigError):
            parse_poly('z^-1', G_CONTEXT)


@pytest.mark.parsing
class TestTolerances():

    def test_defaults(self):
        assert DEFAULT_TOLERANCES.lattice == 1e-12
        assert DEFAULT_TOLERANCES.ode_rtol == 1e-10
        assert DEFAULT_TOLERANCES.agreement == 1e-6

    def test_from_env(self):
        tol = Tolerances.from_env({ENV_VAR: 'ode_rtol=1e-9, edge=1e-8'})
        assert tol.ode_rtol == 1e-9
        assert tol.edge == 1e-8
        assert tol.quad == DEFAULT_TOLERANCES.quad

    def test_from_env_empty(self):
        assert Tolerances.from_env({}) is DEFAULT_TOLERANCES

    def test_unknown_name(self):
        with pytest.raises(ConfigError) as exc:
            Tolerances.from_env({ENV_VAR: 'speed=1'})
        assert 'speed' in exc.value.message

    def test_bad_value(self):
        with pytest.raises(ConfigError):
            Tolerances.parse_overrides('edge=small')
        with pytest.raises(ConfigError):
            Tolerances.parse_overrides('edge')

    def test_render_reads_back(self):
        tol = DEFAULT_TOLERANCES.replace(det=1e-6, delta=1e-12)
        assert Tolerances(**Tolerances.parse_overrides(tol.render())) == tol
        assert DEFAULT_TOLERANCES.render() == ''


@pytest.mark.parsing
class TestErrorText():

    def test_consistency_error_names_invariant(self):
        text = str(ConsistencyError('q-degree', 'Q must be monic', {'genus': 2}))
        assert 'q-degree' in text
        assert 'Q must be monic' in text

    def test_pole_error_fields(self):
        exc = PoleError.make(2j, 2j)
        assert exc.lattice_point == 2j
        assert 'lattice point' in str(exc)

    def test_unexpected_token_text(self):
        with pytest.raises(UnexpectedTokenError) as exc:
            parse_lattice('1:1')
        assert 'found' in str(exc.value)
