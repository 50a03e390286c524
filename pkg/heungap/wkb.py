"""
Formal large-parameter expansions for -f'' + eta^2 (wp(x) - E) f = 0 and
for -f'' + l(l+1) wp(x) f = E f with E = -eta^2.

The first expansion runs in `WKB_CONTEXT`, where u = (wp - E)^(1/2) and
its inverse are formal symbols; the second in `LARGE_E_CONTEXT`, where
antiderivatives are taken in closed form and zeta, x carry the
quasi-periodic part.
"""
from collections import namedtuple
from fractions import Fraction
import cmath
import logging

from .exceptions import ConfigError, ConsistencyError
from .fingap import CheckReport, PotentialSpec, compute_q, potential
from .monodromy import integrate_floquet
from .settings import DEFAULT_TOLERANCES
from .symalg import LARGE_E_CONTEXT, WKB_CONTEXT, RatFunc


logger = logging.getLogger(__name__)

MAX_WKB_ORDER = 12
MAX_LARGE_E_ORDER = 10


class WkbSeries(namedtuple('WkbSeries', 'terms order')):
    """`terms[j + 1]` is S_j, j = -1 .. order."""
    __slots__ = ()

    def term(self, j):
        return self.terms[j + 1]

    def render(self):
        return ['S_%d = %s' % (j, self.term(j).render()) for j in range(-1, self.order + 1)]


class SplitSeries(namedtuple('SplitSeries', 'odd even report')):
    """`odd` and `even` map j to S_j for odd and even j."""
    __slots__ = ()


class LargeESeries(namedtuple('LargeESeries', 'terms derivatives l order')):
    """`terms[j - 1]` is psi_j and `derivatives[j - 1]` its x-derivative."""
    __slots__ = ()

    def term(self, j):
        return self.terms[j - 1]

    def derivative(self, j):
        return self.derivatives[j - 1]

    def render(self):
        return ['psi_%d = %s' % (j, self.term(j).render()) for j in range(1, self.order + 1)]


class Increment(namedtuple('Increment', 'power omega eta')):
    """
    Increment of the eta^power coefficient of eta x + sum psi_j eta^-j under
    x -> x + 2 omega_i, as `omega` * omega_i + `eta` * eta_i.
    """
    __slots__ = ()

    def is_zero(self):
        return self.omega.is_zero() and self.eta.is_zero()

    def evaluate(self, L, i, strength):
        values = dict(L.symbol_values(), L=strength)
        return (complex(self.omega.evaluate(values)) * L.omega(i) +
                complex(self.eta.evaluate(values)) * L.eta(i))


class FiniteGapRiccati(namedtuple('FiniteGapRiccati', 'A B first second ok')):
    """
    S~ = sqrt(-Q) B + A with A = Xi'/(2 Xi), B = 1/Xi. `first` is
    A^2 - Q B^2 + A' - (v - E), `second` is 2 A B + B'; both vanish.
    """
    __slots__ = ()


# the eta^-j expansion in WKB_CONTEXT


def wkb_terms(N, spec=None):
    """
    S_-1 .. S_N of S = f'/f, from S_-1 = u and
    2 S_-1 S_j = -(sum_{k+m=j-1} S_k S_m + S_(j-1)'), k, m >= 0.
    """
    if spec is not None and not spec.is_lame_type():
        raise ConfigError('the expansion is for the Lame form l0 wp(x)', extra=spec.render())
    if not 0 <= N <= MAX_WKB_ORDER:
        raise ConfigError('order must lie in [0, %d]' % MAX_WKB_ORDER, extra=N)
    ctx = WKB_CONTEXT
    u_inv = ctx.variable('u', -1) * Fraction(1, 2)
    terms = [ctx.var('u')]
    for j in range(N + 1):
        total = terms[j].derive_x()
        for k in range(j):
            total = total + terms[k + 1] * terms[j - k]
        terms.append(-total * u_inv)
        logger.debug('S_%d: %d terms', j, len(terms[-1].terms))
    logger.info('wkb_terms: S_-1 .. S_%d', N)
    return WkbSeries(terms, N)


def _riccati_coefficient(series, power):
    # eta^power coefficient of S^2 + S' - eta^2 (z - E)
    ctx = WKB_CONTEXT
    total = ctx.constant(0)
    for k in range(-1, series.order + 1):
        m = -power - k
        if -1 <= m <= series.order:
            total = total + series.term(k) * series.term(m)
    if -1 <= -power <= series.order:
        total = total + series.term(-power).derive_x()
    if power == 2:
        total = total - (ctx.var('z') - ctx.var('E'))
    return total


def verify_riccati(series, N=None):
    """
    Expand S^2 + S' - eta^2 Q by full convolution and require every
    coefficient from eta^2 down to eta^(1-N) to vanish.
    """
    N = series.order if N is None else N
    if N > series.order:
        raise ConfigError('series has only %d terms' % series.order, extra=N)
    for power in range(2, -N, -1):
        residue = _riccati_coefficient(series, power)
        if not residue.is_zero():
            logger.warning('riccati residue at eta^%d: %s', power, residue.render())
            return CheckReport('riccati', False, residue.render(), {'order': power})
    return CheckReport('riccati', True, '0', {'orders': [2, 1 - N]})


def split_odd_even(series, N=None):
    """
    Split S by the parity of j and check 2 S_odd S_even + S_odd' = 0
    through eta^(1-N), i.e. S_even = -S_odd'/(2 S_odd) to that order.
    """
    N = series.order if N is None else N
    odd = dict((j, series.term(j)) for j in range(-1, series.order + 1) if j % 2)
    even = dict((j, series.term(j)) for j in range(0, series.order + 1, 2))
    ctx = WKB_CONTEXT
    report = CheckReport('odd-even', True, '0', {'orders': [1, 1 - N]})
    for power in range(1, -N, -1):
        total = ctx.constant(0)
        for k, s_odd in odd.items():
            m = -power - k
            if m in even:
                total = total + s_odd * even[m] * 2
        if -power in odd:
            total = total + odd[-power].derive_x()
        if not total.is_zero():
            report = CheckReport('odd-even', False, total.render(), {'order': power})
            break
    return SplitSeries(odd, even, report)


def check_parity(series):
    """S_j has odd w-degree in every term for even j and even w-degree for odd j."""
    wi = WKB_CONTEXT.index('w')
    for j in range(0, series.order + 1):
        want = 1 if j % 2 == 0 else 0
        for exps in series.term(j).terms:
            if exps[wi] % 2 != want:
                return CheckReport('parity', False, series.term(j).render(), {'j': j})
    return CheckReport('parity', True, '0', {'through': series.order})


def finite_gap_riccati(xi, Q=None):
    """Exact check of S~^2 + S~' = v - E with -Q carried as the square of sqrt(-Q)."""
    if not xi.is_symbolic:
        raise ConfigError('finite_gap_riccati needs a symbolic Xi')
    ctx = xi.context
    if Q is None:
        Q = compute_q(xi)
    R = xi.as_ratfunc()
    R1 = R.derive_x()
    A = R1 / (R * 2)
    B = R.inverse()
    v = potential(xi.spec, ctx)
    q = RatFunc(Q.coeffs)
    first = A * A - q * B * B + A.derive_x() - (v - RatFunc(ctx.var('E')))
    second = A * B * 2 + B.derive_x()
    ok = first.is_zero() and second.is_zero()
    logger.info('finite-gap riccati %s: %s', xi.spec.render(), 'ok' if ok else 'FAILED')
    return FiniteGapRiccati(A, B, first, second, ok)


# the E = -eta^2 expansion in LARGE_E_CONTEXT


def _constant_part(exps, zi, wi):
    rest = list(exps)
    rest[zi] = rest[wi] = 0
    return tuple(rest)


class _Antiderivatives(object):
    """Closed-form antiderivatives of z^n and z^n w in the Weierstrass algebra."""

    def __init__(self, context):
        self.context = context
        self._cache = {}

    def z_power(self, n):
        try:
            return self._cache[n]
        except KeyError:
            pass
        ctx = self.context
        z, w = ctx.var('z'), ctx.var('w')
        if n == 0:
            result = ctx.var('x')
        elif n == 1:
            result = -ctx.var('zeta')
        else:
            # (z^(n-2) w)' = (4n - 2) z^n - (n - 3/2) g2 z^(n-2) - (n - 2) g3 z^(n-3)
            result = z ** (n - 2) * w + self.z_power(n - 2) * ctx.g2 * Fraction(2 * n - 3, 2)
            if n > 2:
                result = result + self.z_power(n - 3) * ctx.g3 * (n - 2)
            result = result * Fraction(1, 4 * n - 2)
        self._cache[n] = result
        return result

    def integrate(self, poly):
        ctx = self.context
        present = poly.variables_present() & {'zeta', 'x'}
        if present:
            raise ConsistencyError('antiderivative', 'integrand is not in Q[z, w]',
                                   poly.render())
        zi, wi = ctx.index('z'), ctx.index('w')
        result = ctx.constant(0)
        for exps, c in poly.terms.items():
            coeff = ctx.constant(c) * _monomial(ctx, _constant_part(exps, zi, wi))
            n, b = exps[zi], exps[wi]
            if b == 1:
                part = ctx.var('z') ** (n + 1) * Fraction(1, n + 1)
            elif b == 0:
                part = self.z_power(n)
            else:
                raise ConsistencyError('antiderivative', 'unreduced power of w', poly.render())
            result = result + coeff * part
        return result


def _monomial(ctx, exps):
    result = ctx.constant(1)
    for name, e in zip(ctx.variables, exps):
        if e:
            result = result * ctx.variable(name, e)
    return result


def large_e_terms(l=None, N=4):
    """
    psi_1 .. psi_N of log f = eta x + sum psi_j eta^-j for E = -eta^2, from
    2 psi_1' = l(l+1) z and 2 psi_j' = -psi_(j-1)'' - sum_{k+m=j-1} psi_k' psi_m'.
    Integration constants are zero. With `l` None the strength stays the
    symbol L = l(l+1).
    """
    if not 1 <= N <= MAX_LARGE_E_ORDER:
        raise ConfigError('order must lie in [1, %d]' % MAX_LARGE_E_ORDER, extra=N)
    ctx = LARGE_E_CONTEXT
    strength = ctx.var('L') if l is None else ctx.constant(l * (l + 1))
    anti = _Antiderivatives(ctx)
    derivatives = [strength * ctx.var('z') * Fraction(1, 2)]
    for j in range(2, N + 1):
        total = derivatives[j - 2].derive_x()
        for k in range(1, j - 1):
            total = total + derivatives[k - 1] * derivatives[j - 2 - k]
        derivatives.append(-total * Fraction(1, 2))
    terms = [anti.integrate(d) for d in derivatives]
    logger.info('large_e_terms: psi_1 .. psi_%d', N)
    return LargeESeries(terms, derivatives, l, N)


def _increment(poly):
    ctx = poly.context
    zeta_i, x_i = ctx.index('zeta'), ctx.index('x')
    omega, eta = ctx.constant(0), ctx.constant(0)
    for exps, c in poly.terms.items():
        a, b = exps[zeta_i], exps[x_i]
        if not (a or b):
            continue
        rest = list(exps)
        rest[zeta_i] = rest[x_i] = 0
        coeff = _monomial(ctx, tuple(rest)) * c
        if a + b > 1 or coeff.variables_present() & {'z', 'w'}:
            raise ConsistencyError('increment', 'increment depends on x', poly.render())
        if a:
            eta = eta + coeff * 2
        else:
            omega = omega + coeff * 2
    return omega, eta


def monodromy_asymptotics(series):
    """
    Increments of eta x + sum psi_j eta^-j under x -> x + 2 omega_i for the
    powers eta^1, eta^-1, ..., eta^-N; even j must give zero.
    """
    ctx = LARGE_E_CONTEXT
    out = [Increment(1, ctx.constant(2), ctx.constant(0))]
    for j in range(1, series.order + 1):
        omega, eta = _increment(series.term(j))
        inc = Increment(-j, omega, eta)
        if j % 2 == 0 and not inc.is_zero():
            raise ConsistencyError('increment-parity', 'nonzero increment at even order',
                                   {'j': j, 'omega': omega.render(), 'eta': eta.render()})
        out.append(inc)
    return out


def predicted_log_multiplier(increments, L, i, eta, strength):
    return sum(inc.evaluate(L, i, strength) * eta ** inc.power for inc in increments)


def bridge_residual(l, L, eta, i=1, N=4, tolerances=DEFAULT_TOLERANCES):
    """
    |log m_i - prediction| at E = -eta^2, with m_i the Floquet multiplier
    of -f'' + l(l+1) wp f = E f along 2 omega_i.
    """
    increments = monodromy_asymptotics(large_e_terms(l, N))
    result = integrate_floquet(PotentialSpec.lame(l), L, -eta * eta, i, tolerances=tolerances)
    predicted = predicted_log_multiplier(increments, L, i, eta, l * (l + 1))
    residual = abs(cmath.log(result.multiplier) - predicted)
    logger.info('large-E bridge l=%d eta=%r: residual %.3g', l, eta, residual)
    return residual
