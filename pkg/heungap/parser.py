from fractions import Fraction

from .exceptions import UnexpectedTokenError
from .scanner import Scanner, TokenType


_SIGNS = (TokenType.Plus, TokenType.Minus)


def _to_fraction(tok):
    # decimal text converts exactly, "0.1" is 1/10 and not the nearest double
    return Fraction(tok.content)


class LiteralParser(object):
    """
    Recursive descent over the token stream of one literal. Every public
    `parse_*` method consumes the whole text and fails on trailing tokens.
    """

    def __init__(self, text):
        self._text = text
        self._tok_generator = Scanner(text).scan()
        self._tok = None
        self.next_tok()

    @property
    def tok(self):
        return self._tok

    def next_tok(self):
        try:
            self._tok = next(self._tok_generator)
        except StopIteration:
            # the End marker is sticky
            pass
        return self._tok

    def expect(self, *types):
        tok = self._tok
        if tok.type_ not in types:
            raise UnexpectedTokenError(tok.type_, types if len(types) > 1 else types[0],
                                       'in %r' % self._text, token=tok)
        self.next_tok()
        return tok

    def expect_end(self):
        self.expect(TokenType.End)

    def parse_sign(self):
        if self._tok.type_ in _SIGNS:
            sign = -1 if self._tok.type_ == TokenType.Minus else 1
            self.next_tok()
            return sign
        return 1

    def parse_real(self):
        sign = self.parse_sign()
        tok = self.expect(TokenType.Number)
        return sign * _to_fraction(tok)

    def parse_integer(self):
        sign = self.parse_sign()
        tok = self.expect(TokenType.Number)
        value = _to_fraction(tok)
        if value.denominator != 1 or '.' in tok.content:
            raise UnexpectedTokenError(tok.type_, 'integer', 'integer literal expected', token=tok)
        return sign * int(value)

    def parse_complex_terms(self):
        """
        Sum of real and imaginary terms, `3`, `-1.25i`, `0.5+2i`, `i`. Returns
        the exact (real, imaginary) pair.
        """
        re_part = Fraction(0)
        im_part = Fraction(0)
        first = True
        while True:
            if first:
                sign = self.parse_sign()
            elif self._tok.type_ in _SIGNS:
                sign = self.parse_sign()
            else:
                break
            first = False
            tok = self._tok
            if tok.type_ == TokenType.Number:
                re_part += sign * _to_fraction(tok)
            elif tok.type_ == TokenType.Imaginary:
                im_part += sign * _to_fraction(tok)
            elif tok.type_ == TokenType.Identifier and tok.content in ('i', 'j'):
                im_part += sign
            else:
                raise UnexpectedTokenError(tok.type_,
                                           (TokenType.Number, TokenType.Imaginary),
                                           'complex literal term expected', token=tok)
            self.next_tok()
        return re_part, im_part

    def parse_complex(self):
        re_part, im_part = self.parse_complex_terms()
        return complex(float(re_part), float(im_part))

    def parse_poly(self, context):
        # poly := term (("+" | "-") term)*, with an optional leading sign
        sign = self.parse_sign()
        result = self.parse_term(context) * sign
        while self._tok.type_ in _SIGNS:
            sign = self.parse_sign()
            result = result + self.parse_term(context) * sign
        return result

    def parse_term(self, context):
        result = self.parse_factor(context)
        while self._tok.type_ == TokenType.Star:
            self.next_tok()
            result = result * self.parse_factor(context)
        return result

    def parse_factor(self, context):
        tok = self._tok
        if tok.type_ == TokenType.LParen:
            self.next_tok()
            inner = self.parse_poly(context)
            self.expect(TokenType.RParen)
            return inner
        elif tok.type_ == TokenType.Number:
            self.next_tok()
            value = _to_fraction(tok)
            # "p/q" directly after a number is a rational coefficient
            if self._tok.type_ == TokenType.Slash:
                self.next_tok()
                value = value / _to_fraction(self.expect(TokenType.Number))
            return context.constant(value)
        elif tok.type_ == TokenType.Identifier:
            if tok.content not in context.variables:
                raise UnexpectedTokenError(tok.content, context.variables,
                                           'unknown variable for context %r' % context.name,
                                           token=tok)
            self.next_tok()
            exponent = 1
            if self._tok.type_ == TokenType.Caret:
                self.next_tok()
                exponent = self.parse_integer()
            return context.variable(tok.content, exponent)
        raise UnexpectedTokenError(tok.type_,
                                   (TokenType.LParen, TokenType.Number, TokenType.Identifier),
                                   'polynomial factor expected', token=tok)


def parse_complex(text):
    parser = LiteralParser(text)
    value = parser.parse_complex()
    parser.expect_end()
    return value


def parse_lattice(text):
    """`"1,1i"` -> (1+0j, 1j), the two half-periods."""
    parser = LiteralParser(text)
    omega1 = parser.parse_complex()
    parser.expect(TokenType.Comma)
    omega3 = parser.parse_complex()
    parser.expect_end()
    return omega1, omega3


def parse_int_list(text, length=None):
    parser = LiteralParser(text)
    values = [parser.parse_integer()]
    while parser.tok.type_ == TokenType.Comma:
        parser.next_tok()
        values.append(parser.parse_integer())
    if length is not None and len(values) != length:
        raise UnexpectedTokenError(len(values), length,
                                   'integer list of length %d expected' % length,
                                   token=parser.tok)
    parser.expect_end()
    return tuple(values)


def parse_range(text):
    """`"-3:5:400"` -> (-3.0, 5.0, 400), the end points and the point count."""
    parser = LiteralParser(text)
    lo = parser.parse_real()
    parser.expect(TokenType.Colon)
    hi = parser.parse_real()
    parser.expect(TokenType.Colon)
    tok = parser.tok
    count = parser.parse_integer()
    if count < 1:
        raise UnexpectedTokenError(count, 'positive count', 'range needs at least one point',
                                   token=tok)
    parser.expect_end()
    return float(lo), float(hi), count


def parse_poly(text, context):
    parser = LiteralParser(text)
    value = parser.parse_poly(context)
    parser.expect_end()
    return value
