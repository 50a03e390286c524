from collections import namedtuple
from enum import Enum
import re

from .exceptions import ScanError


_NUMBER_RX = re.compile(r'(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?')
_WS_RX = re.compile(r'\s+')


class Keywords(object):
    plus = '+'
    minus = '-'
    star = '*'
    slash = '/'
    caret = '^'
    lparen = '('
    rparen = ')'
    comma = ','
    colon = ':'
    imag_units = 'ij'


class KeywordSets(object):
    operators = Keywords.plus + Keywords.minus + Keywords.star + Keywords.slash + Keywords.caret
    delimiters = Keywords.lparen + Keywords.rparen + Keywords.comma + Keywords.colon
    ident_start = 'abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_'


TokenType = Enum('TokenType', ' '.join((
    'Number',
    'Imaginary',
    'Identifier',
    'Plus',
    'Minus',
    'Star',
    'Slash',
    'Caret',
    'LParen',
    'RParen',
    'Comma',
    'Colon',
    'End'
    )))


_CHAR_TYPES = {
    Keywords.plus: TokenType.Plus,
    Keywords.minus: TokenType.Minus,
    Keywords.star: TokenType.Star,
    Keywords.slash: TokenType.Slash,
    Keywords.caret: TokenType.Caret,
    Keywords.lparen: TokenType.LParen,
    Keywords.rparen: TokenType.RParen,
    Keywords.comma: TokenType.Comma,
    Keywords.colon: TokenType.Colon,
}


class Token(namedtuple('Token', 'type_ content text start end')):
    __slots__ = ()

    def __repr__(self):
        return ('Token: {{\n'
                '        type_: {!r}\n'
                '      content: "{}"\n'
                '   start, end: {}, {}\n'
                '         text: "{}"\n'
                '}}').format(self.type_, self.content, self.start, self.end, self.text)


class Scanner(object):
    """
    Splits one line of literal text (complex numbers, lattice pairs, integer
    lists, ranges, polynomials) into typed tokens. Scanning is driven by
    state functions, each returning the next state and an optional token.
    """

    def __init__(self, text):
        self.text = text
        self.start = 0
        self.pos = 0

    @property
    def _c(self):
        return self.text[self.pos]

    @property
    def _eol(self):
        return self.pos >= len(self.text)

    @property
    def _to_eol_content(self):
        return self.text[self.pos:]

    def scan(self):
        scan_fn = self._scan_item
        while scan_fn:
            scan_fn, tok = scan_fn()
            if tok:
                yield tok

    def _ignore(self):
        self.start = self.pos

    def _make_token(self, type_):
        tok = Token(type_,
                    self.text[self.start:self.pos],
                    self.text,
                    self.start,
                    self.pos)
        self.start = self.pos
        return tok

    def _make_marker_token(self, type_):
        """Make a token that has no content"""
        return Token(type_, '', self.text, self.start, self.start)

    def _accept_name_run(self):
        count = 0
        while not self._eol and (self._c.isalnum() or self._c == '_'):
            count += 1
            self.pos += 1
        return count

    def _consume_re(self, test_re):
        if self._eol:
            return False
        m = test_re.match(self._to_eol_content)
        if not m:
            return False
        self.pos += m.end()
        return True

    def _scan_item(self):
        self._consume_re(_WS_RX)
        self._ignore()
        if self._eol:
            return None, self._make_marker_token(TokenType.End)
        c = self._c
        if c.isdigit() or c == '.':
            return self._scan_number()
        elif c in KeywordSets.ident_start:
            return self._scan_identifier()
        elif c in _CHAR_TYPES:
            self.pos += 1
            return self._scan_item, self._make_token(_CHAR_TYPES[c])
        else:
            raise ScanError.make(self, 'Unexpected character: %r' % c)

    def _scan_number(self):
        if not self._consume_re(_NUMBER_RX):
            raise ScanError.make(self, 'Invalid number literal: %r' % self._to_eol_content)
        # a trailing "i" or "j" not followed by a name character marks an imaginary literal
        if not self._eol and self._c in Keywords.imag_units:
            nxt = self.pos + 1
            if nxt >= len(self.text) or not (self.text[nxt].isalnum() or self.text[nxt] == '_'):
                tok = self._make_token(TokenType.Imaginary)
                self.pos += 1
                self._ignore()
                return self._scan_item, tok
        if not self._eol and (self._c.isalpha() or self._c == '_'):
            raise ScanError.make(self, 'Invalid number literal, unexpected name character: %r' %
                                       self._to_eol_content)
        return self._scan_item, self._make_token(TokenType.Number)

    def _scan_identifier(self):
        self._accept_name_run()
        return self._scan_item, self._make_token(TokenType.Identifier)
