"""
Exact symbolic kernel.

Polynomials live in a `Context`, a fixed tuple of variables plus the
reduction rules and derivations of the Weierstrass algebra:

    z = wp(x),  w = wp'(x),  w^2 = 4 z^3 - g2 z - g3,
    z' = w,  w' = 6 z^2 - g2/2,  zeta' = -z,  x' = 1,  u' = w / (2 u)

Four contexts are predefined:

    E_CONTEXT        e1, e2, E, z, w           (e3 = -e1 - e2 eliminated)
    G_CONTEXT        g2, g3, E, z, w
    WKB_CONTEXT      g2, g3, E, z, w, u        (u^2 = z - E, u may be inverted)
    LARGE_E_CONTEXT  L, g2, g3, z, w, zeta, x  (L = l(l+1))

Coefficients are `fractions.Fraction`; no floating point enters until
`evaluate`. Products, gcds, exact division and cancellation go through
`sympy.Poly` over QQ, nullspaces through sympy over the fraction field of
the context variables; the context rules are applied to every product.
"""
from fractions import Fraction
import functools
import logging
import math
import operator

import sympy
from sympy.polys.matrices import DomainMatrix
from sympy.polys.polyerrors import ExactQuotientFailed

from .exceptions import ConfigError, ConsistencyError, ContextMismatchError


logger = logging.getLogger(__name__)

# rendering priority, remaining variables follow in context order
_RENDER_PRIORITY = ('E', 'z', 'w', 'u', 'zeta', 'x')


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError('exact rational expected, got %r' % (value,))


def _is_exact(value):
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def _to_rational(c):
    return sympy.Rational(c.numerator, c.denominator)


def _from_rational(c):
    c = sympy.Rational(c)
    return Fraction(int(c.p), int(c.q))


def _shift_of(terms, width):
    """Per-variable shift making every exponent non-negative (Laurent u)."""
    if not terms:
        return (0,) * width
    return tuple(min(0, min(exps[i] for exps in terms)) for i in range(width))


def _to_poly(context, terms, shift=None):
    if shift is None:
        shift = context.zero_exps
    rep = dict((tuple(map(operator.sub, exps, shift)), _to_rational(c))
               for exps, c in terms.items())
    return sympy.Poly.from_dict(rep, *context.symbols, domain=sympy.QQ)


def _from_poly(poly, shift=None):
    """Raw `{exps: Fraction}` of a sympy polynomial, shifted back."""
    out = {}
    for exps, c in poly.as_dict().items():
        if shift is not None:
            exps = tuple(map(operator.add, exps, shift))
        out[exps] = _from_rational(c)
    return out


class Context(object):
    """
    Variable set of a polynomial algebra. Contexts are singletons, two
    polynomials combine only when they share the same context object.
    """

    def __init__(self, name, variables, laurent=None, eager_w=True):
        self.name = name
        self.variables = tuple(variables)
        self.laurent = laurent
        self.eager_w = eager_w
        self._index = dict((v, i) for i, v in enumerate(self.variables))
        self._reduce_cache = {}
        self._derive_cache = {}
        self._rules = None
        self._derivations = None
        self._free = None
        self._symbols = None
        priority = [self._index[v] for v in _RENDER_PRIORITY if v in self._index]
        rest = [i for i in range(len(self.variables)) if i not in priority]
        self._render_order = tuple(priority + rest)

    def __repr__(self):
        return 'Context(%s: %s)' % (self.name, ', '.join(self.variables))

    def __reduce__(self):
        # pickled polynomials resolve back to the module singletons
        return (get_context, (self.name,))

    def has(self, name):
        return name in self._index

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise ContextMismatchError(name, self.name, 'variable lookup')

    @property
    def zero_exps(self):
        return (0,) * len(self.variables)

    def unit_exps(self, name, exponent=1):
        exps = [0] * len(self.variables)
        exps[self.index(name)] = exponent
        return tuple(exps)

    def constant(self, value):
        value = _as_fraction(value)
        return MultiPoly(self, {self.zero_exps: value} if value else {})

    def variable(self, name, exponent=1):
        if exponent < 0 and name != self.laurent:
            raise ConfigError('Negative exponent for non-invertible variable %s' % name,
                              extra=self.name)
        return MultiPoly(self, self._reduce_terms({self.unit_exps(name, exponent): Fraction(1)}))

    def var(self, name):
        return self.variable(name, 1)

    def variables_of(self, *names):
        return tuple(self.var(n) for n in names)

    @property
    def symbols(self):
        """The variables as sympy generators, in context order."""
        if self._symbols is None:
            self._symbols = tuple(sympy.Symbol(v) for v in self.variables)
        return self._symbols

    @property
    def g2(self):
        if self.has('g2'):
            return self.var('g2')
        e1, e2 = self.var('e1'), self.var('e2')
        return (e1 * e1 + e1 * e2 + e2 * e2) * 4

    @property
    def g3(self):
        if self.has('g3'):
            return self.var('g3')
        e1, e2 = self.var('e1'), self.var('e2')
        return e1 * e1 * e2 * (-4) - e1 * e2 * e2 * 4

    def e(self, i):
        """The half-period value e_i, e-context only."""
        if i == 3:
            return -self.var('e1') - self.var('e2')
        return self.var('e%d' % i)

    def w_square(self):
        z = self.var('z')
        return z * z * z * 4 - self.g2 * z - self.g3

    @property
    def rules(self):
        if self._rules is None:
            rules = []
            # rule right-hand sides must be built without rules of their own
            self._rules = []
            if self.has('w') and self.eager_w:
                rules.append((self.index('w'), 2, dict(self.w_square().terms)))
            if self.laurent is not None:
                z_minus_e = self.var('z') - self.var('E')
                rules.append((self.index(self.laurent), 2, dict(z_minus_e.terms)))
            self._rules = rules
            self._reduce_cache.clear()
        return self._rules

    @property
    def derivations(self):
        if self._derivations is None:
            d = {}
            if self.has('z'):
                d['z'] = self.var('w')
            if self.has('w'):
                d['w'] = self.var('z') * self.var('z') * 6 - self.g2 * Fraction(1, 2)
            if self.has('zeta'):
                d['zeta'] = -self.var('z')
            if self.has('x'):
                d['x'] = self.constant(1)
            if self.laurent is not None:
                d[self.laurent] = self.var('w') * self.variable(self.laurent, -1) * Fraction(1, 2)
            self._derivations = dict((self.index(k), v) for k, v in d.items())
        return self._derivations

    @property
    def free(self):
        """The same variables with no reduction rules, used for canonical forms."""
        if self._free is None:
            self._free = _FreeContext(self)
        return self._free

    def _reduce_monomial(self, exps):
        try:
            return self._reduce_cache[exps]
        except KeyError:
            pass
        for idx, power, repl in self.rules:
            if exps[idx] >= power:
                base = list(exps)
                base[idx] -= power
                out = {}
                for r_exps, r_c in repl.items():
                    prod = tuple(a + b for a, b in zip(base, r_exps))
                    for t_exps, t_c in self._reduce_monomial(prod).items():
                        out[t_exps] = out.get(t_exps, 0) + r_c * t_c
                result = dict((k, v) for k, v in out.items() if v)
                break
        else:
            result = {exps: Fraction(1)}
        self._reduce_cache[exps] = result
        return result

    def _reduce_terms(self, raw):
        if not self.rules:
            return dict((k, v) for k, v in raw.items() if v)
        out = {}
        for exps, c in raw.items():
            if not c:
                continue
            for t_exps, t_c in self._reduce_monomial(exps).items():
                out[t_exps] = out.get(t_exps, 0) + c * t_c
        return dict((k, v) for k, v in out.items() if v)

    def derive_monomial(self, exps):
        try:
            return self._derive_cache[exps]
        except KeyError:
            pass
        result = MultiPoly(self, {})
        for idx, e in enumerate(exps):
            if not e or idx not in self.derivations:
                continue
            rest = list(exps)
            rest[idx] -= 1
            factor = MultiPoly(self, self._reduce_terms({tuple(rest): Fraction(e)}))
            result = result + factor * self.derivations[idx]
        self._derive_cache[exps] = result
        return result

    def canonical_terms(self, terms):
        return terms

    def render_key(self, exps):
        return tuple(exps[i] for i in self._render_order)


class _FreeContext(Context):

    def __init__(self, parent):
        Context.__init__(self, parent.name + ':free', parent.variables, parent.laurent, False)
        self.parent = parent
        self._rules = []

    @property
    def rules(self):
        return self._rules


class _WkbContext(Context):
    """
    Laurent context for the large-parameter expansion. The w^2 relation is
    not applied eagerly, so rendered terms keep the shape the recursion
    produces; equality compares canonical forms in which z = u^2 + E and
    w appears at most linearly.
    """

    def __init__(self, name, variables):
        Context.__init__(self, name, variables, laurent='u', eager_w=False)

    def canonical_terms(self, terms):
        free = self.free
        u, e = free.var('u'), free.var('E')
        z_sub = u * u + e
        w_sq = z_sub * z_sub * z_sub * 4 - free.var('g2') * z_sub - free.var('g3')
        zi, wi = self.index('z'), self.index('w')
        out = MultiPoly(free, {})
        for exps, c in terms.items():
            rest = list(exps)
            a, b = rest[zi], rest[wi]
            rest[zi] = 0
            rest[wi] = b % 2
            part = MultiPoly(free, {tuple(rest): c})
            part = part * (z_sub ** a) * (w_sq ** (b // 2))
            out = out + part
        return out.terms


class MultiPoly(object):
    """
    Immutable sparse polynomial, a map from exponent tuples (in context
    variable order) to nonzero `Fraction` coefficients.
    """

    __slots__ = ('context', 'terms')

    def __init__(self, context, terms):
        self.context = context
        self.terms = terms

    # construction helpers

    def _new(self, raw):
        return MultiPoly(self.context, self.context._reduce_terms(raw))

    def _coerce(self, other, op):
        if isinstance(other, MultiPoly):
            if other.context is not self.context:
                raise ContextMismatchError(self.context.name, other.context.name, op)
            return other
        if _is_exact(other):
            return self.context.constant(other)
        return None

    # arithmetic

    def __add__(self, other):
        other = self._coerce(other, 'add')
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for exps, c in other.terms.items():
            v = out.get(exps, 0) + c
            if v:
                out[exps] = v
            else:
                out.pop(exps, None)
        return MultiPoly(self.context, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.context, dict((k, -v) for k, v in self.terms.items()))

    def __sub__(self, other):
        other = self._coerce(other, 'sub')
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other, 'sub')
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if _is_exact(other):
            other = _as_fraction(other)
            if not other:
                return MultiPoly(self.context, {})
            return MultiPoly(self.context, dict((k, v * other) for k, v in self.terms.items()))
        other = self._coerce(other, 'mul')
        if other is None:
            return NotImplemented
        if not self.terms or not other.terms:
            return MultiPoly(self.context, {})
        ctx = self.context
        width = len(ctx.variables)
        sa, sb = _shift_of(self.terms, width), _shift_of(other.terms, width)
        product = _to_poly(ctx, self.terms, sa) * _to_poly(ctx, other.terms, sb)
        return self._new(_from_poly(product, tuple(map(operator.add, sa, sb))))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not _is_exact(other):
            return NotImplemented
        return self * (1 / _as_fraction(other))

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError('non-negative integer power expected')
        result = self.context.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # comparison

    def __eq__(self, other):
        other = self._coerce(other, 'eq')
        if other is None:
            return NotImplemented
        if self.terms == other.terms:
            return True
        ctx = self.context
        return ctx.canonical_terms(self.terms) == ctx.canonical_terms(other.terms)

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    __hash__ = None

    def is_zero(self):
        if not self.terms:
            return True
        return not self.context.canonical_terms(self.terms)

    def is_constant(self):
        return all(not any(exps) for exps in self.terms)

    def constant_value(self):
        if not self.is_constant():
            raise ConsistencyError('constant', 'polynomial is not constant', self.render())
        return self.terms.get(self.context.zero_exps, Fraction(0))

    # structure

    def variables_present(self):
        names = set()
        for exps in self.terms:
            for i, e in enumerate(exps):
                if e:
                    names.add(self.context.variables[i])
        return names

    def degree(self, name):
        idx = self.context.index(name)
        if not self.terms:
            return -1
        return max(exps[idx] for exps in self.terms)

    def min_degree(self, name):
        idx = self.context.index(name)
        if not self.terms:
            return 0
        return min(exps[idx] for exps in self.terms)

    def coefficients(self, name):
        """`{k: coefficient of name^k}`, coefficients free of `name`."""
        idx = self.context.index(name)
        parts = {}
        for exps, c in self.terms.items():
            rest = list(exps)
            k = rest[idx]
            rest[idx] = 0
            parts.setdefault(k, {})[tuple(rest)] = c
        return dict((k, MultiPoly(self.context, v)) for k, v in parts.items())

    def coefficient(self, name, k):
        return self.coefficients(name).get(k, MultiPoly(self.context, {}))

    def leading_term(self):
        exps = max(self.terms)
        return exps, self.terms[exps]

    def substitute(self, name, value):
        """Replace variable `name` by the polynomial `value`."""
        value = self._coerce(value, 'substitute')
        result = MultiPoly(self.context, {})
        for k, coeff in self.coefficients(name).items():
            if k < 0:
                raise ConsistencyError('substitute', 'negative power of %s' % name, k)
            result = result + coeff * value ** k
        return result

    # sympy views

    def as_sympy(self):
        """`sympy.Poly` over QQ in the context generators."""
        if any(e < 0 for exps in self.terms for e in exps):
            raise ConsistencyError('polynomial', 'negative exponents have no Poly form',
                                   self.render())
        return _to_poly(self.context, self.terms)

    def as_expr(self):
        return self.as_sympy().as_expr()

    @classmethod
    def from_sympy(cls, context, poly):
        """Inverse of `as_sympy`; plain expressions are converted first."""
        if not isinstance(poly, sympy.Poly):
            poly = sympy.Poly(poly, *context.symbols, domain=sympy.QQ)
        return MultiPoly(context, context._reduce_terms(_from_poly(poly)))

    # calculus

    def derive_x(self):
        ctx = self.context
        result = MultiPoly(ctx, {})
        for exps, c in self.terms.items():
            result = result + ctx.derive_monomial(exps) * c
        return result

    def evaluate(self, values):
        """
        Numeric value for `values`, a mapping of variable name to number.
        Exact inputs give an exact `Fraction`.
        """
        names = self.context.variables
        needed = self.variables_present()
        missing = needed.difference(values)
        if missing:
            raise ConfigError('Missing values for evaluation: %s' % ', '.join(sorted(missing)),
                              extra=self.context.name)
        exact = all(_is_exact(values[n]) for n in needed)
        total = Fraction(0) if exact else 0j
        for exps, c in self.terms.items():
            term = c if exact else float(c)
            for name, e in zip(names, exps):
                if e:
                    term = term * values[name] ** e
            total = total + term
        return total

    # text

    def sorted_terms(self):
        key = self.context.render_key
        return sorted(self.terms.items(), key=lambda item: key(item[0]), reverse=True)

    def render(self):
        if not self.terms:
            return '0'
        parts = []
        for n, (exps, c) in enumerate(self.sorted_terms()):
            sign = '-' if c < 0 else '+'
            text = _render_monomial(self.context.variables, exps, abs(c))
            if n == 0:
                parts.append(text if sign == '+' else '-' + text)
            else:
                parts.append(' %s %s' % (sign, text))
        return ''.join(parts)

    __str__ = render

    def __repr__(self):
        return 'MultiPoly(%s: %s)' % (self.context.name, self.render())

    def to_json(self):
        return {
            'context': self.context.name,
            'variables': list(self.context.variables),
            'terms': [[list(exps), str(c)] for exps, c in self.sorted_terms()],
        }


def _render_coefficient(c):
    if c.denominator == 1:
        return str(c.numerator)
    return '(%d/%d)' % (c.numerator, c.denominator)


def _render_monomial(variables, exps, c):
    factors = []
    for name, e in zip(variables, exps):
        if e == 1:
            factors.append(name)
        elif e:
            factors.append('%s^%d' % (name, e))
    if not factors:
        return _render_coefficient(c)
    if c == 1:
        return '*'.join(factors)
    return '*'.join([_render_coefficient(c)] + factors)


E_CONTEXT = Context('e', ('e1', 'e2', 'E', 'z', 'w'))
G_CONTEXT = Context('g', ('g2', 'g3', 'E', 'z', 'w'))
WKB_CONTEXT = _WkbContext('wkb', ('g2', 'g3', 'E', 'z', 'w', 'u'))
LARGE_E_CONTEXT = Context('large_e', ('L', 'g2', 'g3', 'z', 'w', 'zeta', 'x'))

CONTEXTS = dict((c.name, c) for c in (E_CONTEXT, G_CONTEXT, WKB_CONTEXT, LARGE_E_CONTEXT))


def get_context(name):
    try:
        return CONTEXTS[name]
    except KeyError:
        raise ConfigError('Unknown polynomial context: %s' % name, extra=sorted(CONTEXTS))


def poly_arith(a, b, op):
    """`op` is one of "add", "sub", "mul"."""
    ops = {'add': operator.add, 'sub': operator.sub, 'mul': operator.mul}
    if op not in ops:
        raise ConfigError('Unknown polynomial operation: %s' % op, extra=sorted(ops))
    if isinstance(a, MultiPoly) and isinstance(b, MultiPoly) and a.context is not b.context:
        raise ContextMismatchError(a.context.name, b.context.name, op)
    return ops[op](a, b)


# gcd, exact division and cancellation by sympy.Poly


def _check_pair(a, b, op):
    if a.context is not b.context:
        raise ContextMismatchError(a.context.name, b.context.name, op)


def exact_div(a, b):
    """`a / b` when `b` divides `a`; `b` must be free of w and u."""
    _check_pair(a, b, 'div')
    if b.is_zero():
        raise ZeroDivisionError('exact_div by zero polynomial')
    try:
        quotient = a.as_sympy().exquo(b.as_sympy())
    except ExactQuotientFailed:
        raise ConsistencyError('exact-division', 'divisor does not divide dividend',
                               (a.render(), b.render()))
    return MultiPoly.from_sympy(a.context, quotient)


def poly_gcd(a, b):
    """Monic greatest common divisor, leading term taken in context order."""
    _check_pair(a, b, 'gcd')
    if a.is_zero() and b.is_zero():
        return MultiPoly(a.context, {})
    g = a.as_sympy().gcd(b.as_sympy())
    return MultiPoly.from_sympy(a.context, g.monic())


def poly_lcm(a, b):
    _check_pair(a, b, 'lcm')
    return MultiPoly.from_sympy(a.context, a.as_sympy().lcm(b.as_sympy()))


def _split_w(p):
    if not p.context.has('w'):
        return p, MultiPoly(p.context, {})
    parts = p.coefficients('w')
    zero = MultiPoly(p.context, {})
    if set(parts) - {0, 1}:
        raise ConsistencyError('w-linear', 'w must appear at most linearly', p.render())
    return parts.get(0, zero), parts.get(1, zero)


class RatFunc(object):
    """
    Quotient of two polynomials of one context, kept in lowest terms with a
    w-free denominator whose lex-leading coefficient is 1.
    """

    __slots__ = ('num', 'den')

    def __init__(self, num, den=None):
        if den is None:
            den = num.context.constant(1)
        if num.context is not den.context:
            raise ContextMismatchError(num.context.name, den.context.name, 'ratfunc')
        if den.is_zero():
            raise ZeroDivisionError('RatFunc with zero denominator')
        num, den = _normalize(num, den)
        self.num = num
        self.den = den

    @property
    def context(self):
        return self.num.context

    @staticmethod
    def coerce(value, context):
        if isinstance(value, RatFunc):
            return value
        if isinstance(value, MultiPoly):
            return RatFunc(value)
        return RatFunc(context.constant(value))

    def _other(self, other, op):
        if isinstance(other, RatFunc):
            if other.context is not self.context:
                raise ContextMismatchError(self.context.name, other.context.name, op)
            return other
        if isinstance(other, MultiPoly) or _is_exact(other):
            if isinstance(other, MultiPoly) and other.context is not self.context:
                raise ContextMismatchError(self.context.name, other.context.name, op)
            return RatFunc.coerce(other, self.context)
        return None

    def __add__(self, other):
        other = self._other(other, 'add')
        if other is None:
            return NotImplemented
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        other = self._other(other, 'sub')
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._other(other, 'sub')
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._other(other, 'mul')
        if other is None:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise ZeroDivisionError('inverse of zero RatFunc')
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        other = self._other(other, 'div')
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._other(other, 'div')
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc(self.num ** n, self.den ** n)

    def __eq__(self, other):
        other = self._other(other, 'eq')
        if other is None:
            return NotImplemented
        return (self.num * other.den - other.num * self.den).is_zero()

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    __hash__ = None

    def is_zero(self):
        return self.num.is_zero()

    def is_polynomial(self):
        return self.den.is_constant()

    def as_poly(self):
        if not self.is_polynomial():
            raise ConsistencyError('polynomial', 'rational function has a denominator',
                                   self.render())
        return self.num * (1 / self.den.constant_value())

    def derive_x(self):
        n, d = self.num, self.den
        return RatFunc(n.derive_x() * d - n * d.derive_x(), d * d)

    def evaluate(self, values):
        return self.num.evaluate(values) / self.den.evaluate(values)

    def as_expr(self):
        return self.num.as_expr() / self.den.as_expr()

    def render(self):
        if self.is_polynomial():
            return self.as_poly().render()
        return '(%s)/(%s)' % (self.num.render(), self.den.render())

    __str__ = render

    def __repr__(self):
        return 'RatFunc(%s: %s)' % (self.context.name, self.render())


def _conjugate_w(p):
    if not p.context.has('w'):
        return p
    p0, p1 = _split_w(p)
    return p0 - p1 * p.context.var('w')


def _normalize(num, den):
    if den.context.has('w') and den.degree('w') > 0:
        conj = _conjugate_w(den)
        num, den = num * conj, den * conj
    if num.is_zero():
        return num, num.context.constant(1)
    if not den.is_constant():
        ctx = num.context
        p, q = num.as_sympy().cancel(den.as_sympy(), include=True)
        num, den = MultiPoly.from_sympy(ctx, p), MultiPoly.from_sympy(ctx, q)
    _, c = den.leading_term()
    if c != 1:
        num, den = num * (1 / c), den * (1 / c)
    return num, den


def solve_nullspace(matrix, context=None):
    """
    Exact nullspace basis of `matrix`, a list of rows whose entries are
    `RatFunc`, `MultiPoly` or rationals. The system is solved by sympy over
    the field of rational functions in the context variables. Every
    returned vector has polynomial entries with no common divisor and its
    first nonzero entry has a positive leading coefficient.
    """
    if context is None:
        for row in matrix:
            for entry in row:
                if isinstance(entry, (MultiPoly, RatFunc)):
                    context = entry.context
                    break
            if context is not None:
                break
    if context is None:
        context = G_CONTEXT
    if not matrix:
        return []
    ncols = len(matrix[0])
    field = sympy.QQ.frac_field(*context.symbols)
    rows = []
    for row in matrix:
        if len(row) != ncols:
            raise ConsistencyError('matrix-shape', 'ragged matrix', [len(r) for r in matrix])
        rows.append([field.from_sympy(RatFunc.coerce(x, context).as_expr()) for x in row])
    null = DomainMatrix(rows, (len(rows), ncols), field).nullspace()
    basis = null.to_Matrix().tolist()
    logger.debug('nullspace: %d x %d matrix, rank %d', len(rows), ncols, ncols - len(basis))
    return [_clear_vector(v, context) for v in basis]


def _clear_vector(entries, context):
    gens = context.symbols
    parts = [sympy.fraction(sympy.cancel(e)) for e in entries]
    den = sympy.lcm_list([q for _, q in parts])
    polys = [sympy.Poly(sympy.cancel(p * den / q), *gens, domain=sympy.QQ) for p, q in parts]
    g = functools.reduce(lambda a, b: a.gcd(b), [p for p in polys if not p.is_zero])
    polys = [p.exquo(g) for p in polys]
    coeffs = [sympy.Rational(c) for p in polys for c in p.coeffs() if c]
    top = functools.reduce(sympy.igcd, [abs(int(c.p)) for c in coeffs])
    bottom = functools.reduce(sympy.ilcm, [int(c.q) for c in coeffs])
    scale = Fraction(bottom, top)
    out = [MultiPoly.from_sympy(context, p) * scale for p in polys]
    first = next(p for p in out if not p.is_zero())
    if first.leading_term()[1] < 0:
        out = [-p for p in out]
    return out


class DiffOp(object):
    """
    Differential operator sum_k coeffs[k] D^k with `RatFunc` coefficients,
    D = d/dx acting through `derive_x`.
    """

    __slots__ = ('context', 'coeffs')

    def __init__(self, context, coeffs):
        coeffs = [RatFunc.coerce(c, context) for c in coeffs]
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        self.context = context
        self.coeffs = coeffs

    @staticmethod
    def d(context, order=1):
        return DiffOp(context, [0] * order + [1])

    @staticmethod
    def mult(value, context=None):
        if context is None:
            context = value.context
        return DiffOp(context, [value])

    @property
    def order(self):
        return len(self.coeffs) - 1

    def coefficient(self, k):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return RatFunc(self.context.constant(0))

    def is_zero(self):
        return not self.coeffs

    def _check(self, other, op):
        if other.context is not self.context:
            raise ContextMismatchError(self.context.name, other.context.name, op)

    def __add__(self, other):
        self._check(other, 'add')
        n = max(len(self.coeffs), len(other.coeffs))
        return DiffOp(self.context, [self.coefficient(k) + other.coefficient(k) for k in range(n)])

    def __neg__(self):
        return DiffOp(self.context, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, value):
        return DiffOp(self.context, [c * value for c in self.coeffs])

    def compose(self, other):
        """(self o other) f = self(other(f)), with D b = b D + b' expanded by Leibniz."""
        self._check(other, 'compose')
        if self.is_zero() or other.is_zero():
            return DiffOp(self.context, [])
        # derivatives of other's coefficients, up to self's order
        derivs = []
        for b in other.coeffs:
            seq = [b]
            for _ in range(self.order):
                seq.append(seq[-1].derive_x())
            derivs.append(seq)
        out = [RatFunc(self.context.constant(0))
               for _ in range(self.order + other.order + 1)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for k in range(i + 1):
                binom = math.comb(i, k)
                for j, seq in enumerate(derivs):
                    bk = seq[k]
                    if bk.is_zero():
                        continue
                    out[i - k + j] = out[i - k + j] + a * bk * binom
        return DiffOp(self.context, out)

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return self.compose(other)
        return self.scale(other)

    def __pow__(self, n):
        result = DiffOp(self.context, [1])
        for _ in range(n):
            result = result.compose(self)
        return result

    def commutator(self, other):
        return self.compose(other) - other.compose(self)

    def apply(self, f):
        f = RatFunc.coerce(f, self.context)
        result = RatFunc(self.context.constant(0))
        current = f
        for k, c in enumerate(self.coeffs):
            if k:
                current = current.derive_x()
            if not c.is_zero():
                result = result + c * current
        return result

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return (self - other).is_zero()

    def __ne__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return not (self - other).is_zero()

    __hash__ = None

    def render(self):
        if not self.coeffs:
            return '0'
        parts = []
        for k in reversed(range(len(self.coeffs))):
            c = self.coeffs[k]
            if c.is_zero():
                continue
            d = '' if k == 0 else ('D' if k == 1 else 'D^%d' % k)
            if c.is_polynomial():
                for exps, coeff in c.as_poly().sorted_terms():
                    sign = '-' if coeff < 0 else '+'
                    mono = _render_monomial(c.context.variables, exps, abs(coeff))
                    if d:
                        mono = d if mono == '1' else '%s*%s' % (mono, d)
                    parts.append((sign, mono))
            else:
                text = '(%s)' % c.render()
                parts.append(('+', '%s*%s' % (text, d) if d else text))
        out = []
        for n, (sign, text) in enumerate(parts):
            if n == 0:
                out.append(text if sign == '+' else '-' + text)
            else:
                out.append(' %s %s' % (sign, text))
        return ''.join(out)

    __str__ = render

    def __repr__(self):
        return 'DiffOp(%s: %s)' % (self.context.name, self.render())


def op_compose(a, b):
    return a.compose(b)


def op_commutator(a, b):
    return a.commutator(b)
