"""
Finite-gap data of the elliptic-form Heun operator

    H = -d^2/dx^2 + sum_i l_i (l_i + 1) wp(x + omega_i)
        + 2 sum_j (wp(x - delta_j) + wp(x + delta_j))

the doubly-periodic product of eigenfunctions Xi(x, E), the spectral
polynomial Q(E), the commuting operator A and the Heun parameter map.

Symbolic work happens in the z = wp(x), w = wp'(x) algebra of `symalg`;
shifted functions wp(x + omega_i) enter through the half-period identity
wp(x + omega_i) = e_i + (e_i - e_j)(e_i - e_k) / (wp(x) - e_i).
"""
from collections import namedtuple
from fractions import Fraction
import logging

import numpy as np

from .elliptic import reduce_to_cell, wp_pair
from .exceptions import (ConfigError, ConsistencyError, LatticeError, PoleError,
                         SearchError)
from .settings import DEFAULT_TOLERANCES
from .symalg import (DiffOp, E_CONTEXT, G_CONTEXT, MultiPoly, RatFunc, poly_lcm,
                     solve_nullspace)


logger = logging.getLogger(__name__)

_HALF = Fraction(1, 2)


class HeunParams(namedtuple('HeunParams', 'alpha beta gamma delta epsilon q t')):
    __slots__ = ()

    def fuchs_defect(self):
        return self.gamma + self.delta + self.epsilon - self.alpha - self.beta - 1


class PotentialSpec(namedtuple('PotentialSpec', 'l M deltas')):
    """
    `l` holds the four coefficients (l0, l1, l2, l3); `M` the number of
    apparent-singularity pairs, whose positions `deltas` are only needed for
    numeric work.
    """
    __slots__ = ()

    def __new__(cls, l, M=0, deltas=()):
        l = tuple(l)
        if len(l) != 4:
            raise ConfigError('Four coefficients l0..l3 expected', extra=l)
        deltas = tuple(complex(d) for d in deltas)
        if deltas and len(deltas) != M:
            raise ConfigError('Expected %d delta values' % M, extra=deltas)
        return super(PotentialSpec, cls).__new__(cls, l, M, deltas)

    @staticmethod
    def lame(l):
        return PotentialSpec((l, 0, 0, 0))

    def is_integral(self):
        return all(isinstance(x, int) and x >= 0 for x in self.l)

    def is_lame_type(self):
        return self.l[1] == self.l[2] == self.l[3] == 0

    def strengths(self):
        return tuple(x * (x + 1) for x in self.l)

    def render(self):
        text = ','.join(str(x) for x in self.l)
        if self.M:
            text += ';M=%d' % self.M
        return text


class EllipticForm(namedtuple('EllipticForm', 'l E t scale')):
    """Image of Heun parameters: coefficients l, eigenvalue E, modulus t, scale e2 - e1."""
    __slots__ = ()


class XiFunction(namedtuple('XiFunction', 'spec c0 b d genus context E lattice residual')):
    """
    Xi = c0 + sum b[(i, j)] wp(x + omega_i)^(l_i - j) + sum d[k] (wp(x + delta_k) + wp(x - delta_k)).

    Symbolic instances hold `MultiPoly` coefficients in E and the lattice
    symbols; numeric instances hold complex numbers at a fixed `E` and
    `lattice`, together with the nullspace `residual`.
    """
    __slots__ = ()

    @property
    def is_symbolic(self):
        return self.context is not None

    def as_ratfunc(self):
        if not self.is_symbolic:
            raise ConfigError('numeric Xi has no symbolic form', extra=self.spec)
        ctx = self.context
        total = RatFunc(self.c0)
        for (i, j), coeff in sorted(self.b.items()):
            total = total + shifted_wp(i, ctx) ** (self.spec.l[i] - j) * coeff
        return total

    def evaluator(self, L, E=None, order=0):
        """
        Callable x -> [Xi, Xi', ..., Xi^(order)] for a concrete lattice; the
        symbolic form is prepared once.
        """
        if self.is_symbolic:
            if E is None:
                raise ConfigError('E is required to evaluate a symbolic Xi')
            return _symbolic_evaluator(self, L, E, order)
        if E is not None and E != self.E:
            raise ConfigError('numeric Xi was computed for E=%r' % (self.E,), extra=E)
        return _numeric_evaluator(self, order)

    def render(self):
        if self.is_symbolic:
            return self.as_ratfunc().render()
        return repr(self)

    def to_json(self):
        if not self.is_symbolic:
            return {
                'l': list(self.spec.l),
                'M': self.spec.M,
                'E': [complex(self.E).real, complex(self.E).imag],
                'c0': [self.c0.real, self.c0.imag],
                'b': [[i, j, [v.real, v.imag]] for (i, j), v in sorted(self.b.items())],
                'd': [[k, [v.real, v.imag]] for k, v in sorted(self.d.items())],
                'residual': self.residual,
            }
        return {
            'l': list(self.spec.l),
            'genus': self.genus,
            'variables': list(self.context.variables),
            'c0': self.c0.to_json()['terms'],
            'b': [[i, j, coeff.to_json()['terms']] for (i, j), coeff in sorted(self.b.items())],
            'text': self.render(),
        }


class SpectralPolynomial(namedtuple('SpectralPolynomial', 'coeffs genus band_edges')):
    __slots__ = ()

    def numeric_coefficients(self, L):
        """Highest power first, for numpy.roots / numpy.polyval."""
        values = L.symbol_values()
        deg = self.coeffs.degree('E')
        parts = self.coeffs.coefficients('E')
        out = []
        for k in range(deg, -1, -1):
            part = parts.get(k)
            out.append(complex(part.evaluate(values)) if part is not None else 0j)
        return out

    def evaluate(self, E, L):
        values = L.symbol_values()
        values['E'] = E
        return complex(self.coeffs.evaluate(values))

    def with_edges(self, L):
        return self._replace(band_edges=tuple(spectral_curve_roots(self, L)))

    def render(self):
        return self.coeffs.render()

    def to_json(self):
        out = {
            'genus': self.genus,
            'variables': list(self.coeffs.context.variables),
            'terms': self.coeffs.to_json()['terms'],
            'text': self.render(),
        }
        if self.band_edges is not None:
            out['band_edges'] = list(self.band_edges)
        return out


class CommutingOperator(namedtuple('CommutingOperator', 'op a_seq genus sign')):
    """`op` is monic; `sign` records the (-1)^g stripped from the raw sum."""
    __slots__ = ()

    def render(self):
        return self.op.render()

    def to_json(self):
        return {
            'genus': self.genus,
            'order': self.op.order,
            'sign': self.sign,
            'a': [a.render() for a in self.a_seq],
            'text': self.render(),
        }


class CheckReport(namedtuple('CheckReport', 'name ok residue details')):
    __slots__ = ()

    def to_json(self):
        return {'name': self.name, 'ok': self.ok, 'residue': self.residue,
                'details': self.details}


# contexts and the symbolic potential


def context_for(spec):
    return G_CONTEXT if spec.is_lame_type() else E_CONTEXT


def shifted_wp(i, context):
    """wp(x + omega_i) as a `RatFunc` in z."""
    z = context.var('z')
    if i == 0:
        return RatFunc(z)
    if not context.has('e1'):
        raise ConfigError('shifted wp needs the e-context', extra=context.name)
    ei = context.e(i)
    ej, ek = [context.e(j) for j in (1, 2, 3) if j != i]
    return RatFunc(ei) + RatFunc((ei - ej) * (ei - ek), z - ei)


def potential(spec, context=None):
    """The potential sum l_i (l_i + 1) wp(x + omega_i) as a `RatFunc` (M = 0)."""
    if spec.M:
        raise ConfigError('symbolic potentials need M = 0', extra=spec.render())
    _check_integral(spec)
    context = context or context_for(spec)
    v = RatFunc(context.constant(0))
    for i, strength in enumerate(spec.strengths()):
        if strength:
            v = v + shifted_wp(i, context) * strength
    return v


def hamiltonian(spec, context=None):
    context = context or context_for(spec)
    return DiffOp(context, [potential(spec, context), 0, -1])


def _check_integral(spec):
    if not spec.is_integral():
        raise ConfigError('finite-gap machinery needs non-negative integers l_i', extra=spec.l)


# Xi


def _xi_basis(spec, context):
    """[(key, function)] for c0 and every b[(i, j)]."""
    basis = [('c0', RatFunc(context.constant(1)))]
    for i, li in enumerate(spec.l):
        if not li:
            continue
        p = shifted_wp(i, context)
        for j in range(li):
            basis.append(((i, j), p ** (li - j)))
    return basis


def _product_operator(phi, v, v_prime, E):
    """phi''' - 4 (v - E) phi' - 2 v' phi"""
    d1 = phi.derive_x()
    d3 = d1.derive_x().derive_x()
    return d3 - d1 * (v - E) * 4 - phi * v_prime * 2


def _collect_zw(poly):
    ctx = poly.context
    zi, wi = ctx.index('z'), ctx.index('w')
    out = {}
    for exps, c in poly.terms.items():
        key = (exps[zi], exps[wi])
        rest = list(exps)
        rest[zi] = rest[wi] = 0
        out.setdefault(key, {})[tuple(rest)] = c
    return dict((k, MultiPoly(ctx, v)) for k, v in out.items())


def compute_xi(spec, mode='symbolic', L=None, E=None, tolerances=DEFAULT_TOLERANCES):
    """
    The unique doubly-periodic solution Xi of the product equation
    Xi''' - 4 (v - E) Xi' - 2 v' Xi = 0 in the ansatz form.

    `mode='symbolic'` (M = 0) returns polynomial coefficients in E with c0
    monic; `mode='numeric'` (M <= 1) solves the same system at sample
    points for the given lattice `L` and value `E`.
    """
    _check_integral(spec)
    if mode == 'numeric':
        return _compute_xi_numeric(spec, L, E, tolerances)
    if mode != 'symbolic':
        raise ConfigError('Unknown compute_xi mode: %s' % mode, extra=('symbolic', 'numeric'))
    if spec.M:
        raise ConfigError('symbolic Xi needs M = 0, use mode="numeric"', extra=spec.render())
    context = context_for(spec)
    E_var = context.var('E')
    v = potential(spec, context)
    v_prime = v.derive_x()
    basis = _xi_basis(spec, context)

    images = [_product_operator(phi, v, v_prime, E_var) for _, phi in basis]
    den = context.constant(1)
    for image in images:
        if not image.is_zero() and not image.is_polynomial():
            den = poly_lcm(den, image.den)
    numerators = [(image * RatFunc(den)).as_poly() for image in images]
    columns = [_collect_zw(n) for n in numerators]
    keys = sorted(set(k for col in columns for k in col))
    zero = context.constant(0)
    matrix = [[col.get(k, zero) for col in columns] for k in keys]
    if not matrix:
        matrix = [[zero] * len(basis)]
    logger.debug('compute_xi %s: %d equations, %d unknowns', spec.render(), len(matrix),
                 len(basis))

    null = solve_nullspace(matrix, context)
    if len(null) != 1:
        raise ConsistencyError('xi-nullspace', 'Xi nullspace must be one-dimensional',
                               {'l': spec.l, 'dimension': len(null)})
    vector = null[0]
    c0 = vector[0]
    genus = c0.degree('E')
    lead = c0.coefficient('E', genus)
    if genus < 0 or not lead.is_constant():
        raise ConsistencyError('xi-monic', 'leading E-coefficient of c0 is not a constant',
                               c0.render())
    scale = 1 / lead.constant_value()
    c0 = c0 * scale
    b = {}
    for (key, _), coeff in zip(basis[1:], vector[1:]):
        b[key] = coeff * scale
    for key, coeff in b.items():
        if not coeff.is_zero() and coeff.degree('E') >= genus:
            raise ConsistencyError('xi-degree', 'deg_E b must stay below the genus',
                                   {'key': key, 'coefficient': coeff.render()})
    xi = XiFunction(spec, c0, b, {}, genus, context, None, None, None)
    logger.info('compute_xi %s: genus %d', spec.render(), genus)
    return xi


def _symbolic_evaluator(xi, L, E, order):
    funcs = [xi.as_ratfunc()]
    for _ in range(order):
        funcs.append(funcs[-1].derive_x())
    base = L.symbol_values()
    base['E'] = E

    def evaluate(x):
        z, w = wp_pair(x, L)
        values = dict(base, z=z, w=w)
        return [complex(f.evaluate(values)) for f in funcs]
    return evaluate


# numeric Xi, any M <= 1


def _power_derivatives(P, P1, m, g2):
    """(f, f', f''') for f = P^m with P'' = 6P^2 - g2/2, P''' = 12 P P'."""
    P2 = 6 * P * P - g2 / 2
    P3 = 12 * P * P1
    f = P ** m
    f1 = m * P ** (m - 1) * P1
    f3 = m * P ** (m - 1) * P3
    if m >= 2:
        f3 += 3 * m * (m - 1) * P ** (m - 2) * P1 * P2
    if m >= 3:
        f3 += m * (m - 1) * (m - 2) * P ** (m - 3) * P1 ** 3
    return f, f1, f3


def _numeric_terms(spec, L, x):
    """wp values and derivatives at x + omega_i and x -/+ delta."""
    shifted = {}
    for i in range(4):
        if spec.l[i]:
            shifted[i] = wp_pair(x + L.omega(i), L)
    pairs = []
    for delta in spec.deltas:
        pairs.append((wp_pair(x + delta, L), wp_pair(x - delta, L)))
    return shifted, pairs


def potential_numeric(spec, L, x):
    """v(x) for any M; `spec.deltas` must be set when M > 0."""
    if spec.M and len(spec.deltas) != spec.M:
        raise ConfigError('numeric potential needs the delta values', extra=spec.render())
    total = 0j
    for i, strength in enumerate(spec.strengths()):
        if strength:
            total += strength * wp_pair(x + L.omega(i), L)[0]
    for delta in spec.deltas:
        total += 2 * (wp_pair(x + delta, L)[0] + wp_pair(x - delta, L)[0])
    return total


def _numeric_columns(spec, L, E, x):
    shifted, pairs = _numeric_terms(spec, L, x)
    g2 = L.g2
    v = sum(s * shifted[i][0] for i, s in enumerate(spec.strengths()) if s)
    v1 = sum(s * shifted[i][1] for i, s in enumerate(spec.strengths()) if s)
    for (pp, pm) in pairs:
        v += 2 * (pp[0] + pm[0])
        v1 += 2 * (pp[1] + pm[1])
    row = [-2 * v1]
    for i, li in enumerate(spec.l):
        for j in range(li):
            f, f1, f3 = _power_derivatives(shifted[i][0], shifted[i][1], li - j, g2)
            row.append(f3 - 4 * (v - E) * f1 - 2 * v1 * f)
    for (pp, pm) in pairs:
        f = pp[0] + pm[0]
        f1 = pp[1] + pm[1]
        f3 = 12 * (pp[0] * pp[1] + pm[0] * pm[1])
        row.append(f3 - 4 * (v - E) * f1 - 2 * v1 * f)
    return row


def sample_points(L, count, avoid=()):
    """Deterministic points spread over the period cell, away from `avoid` (mod lattice)."""
    points = []
    k = 0
    radius = 0.1 * abs(L.omega1)
    while len(points) < count and k < 50 * count:
        a = (0.1234 + 0.6180339887 * k) % 1.0
        b = (0.3456 + 0.4142135624 * k) % 1.0
        k += 1
        x = 2 * a * L.omega1 + 2 * b * L.omega3
        if all(abs(reduce_to_cell(x - p, L)[0]) > radius for p in avoid):
            points.append(x)
    return points


def _compute_xi_numeric(spec, L, E, tolerances):
    if L is None or E is None:
        raise ConfigError('numeric Xi needs a lattice and a value of E')
    if spec.M > 1:
        raise ConfigError('numeric Xi supports M <= 1', extra=spec.render())
    if len(spec.deltas) != spec.M:
        raise ConfigError('numeric Xi needs the delta values', extra=spec.render())
    keys = ['c0'] + [(i, j) for i, li in enumerate(spec.l) for j in range(li)] + \
        [('d', k) for k in range(spec.M)]
    ncols = len(keys)
    avoid = [0j] + [-L.omega(i) for i in range(4)] + \
        [d for d in spec.deltas] + [-d for d in spec.deltas]
    points = sample_points(L, max(3 * ncols, ncols + 6), avoid)
    rows = np.array([_numeric_columns(spec, L, E, x) for x in points], dtype=complex)
    norms = np.linalg.norm(rows, axis=0)
    if not norms.any():
        # constant potential, Xi = 1
        residual, vector = 0.0, np.eye(ncols, dtype=complex)[0]
    else:
        norms[norms == 0] = 1.0
        _, s, vh = np.linalg.svd(rows / norms)
        residual = s[-1] / s[0]
        if ncols > 1 and s[-2] / s[0] <= 1e-6:
            raise ConsistencyError('xi-nullspace', 'numeric Xi nullspace is not one-dimensional',
                                   {'singular values': s.tolist()})
        vector = vh[-1].conj() / norms
    if residual > tolerances.nullspace:
        raise ConsistencyError('xi-nullspace', 'no numeric Xi within tolerance',
                               {'residual': float(residual), 'E': E})
    pivot = vector[0] if abs(vector[0]) > 1e-8 * np.max(np.abs(vector)) \
        else vector[np.argmax(np.abs(vector))]
    vector = vector / pivot
    b = {}
    d = {}
    for key, value in zip(keys[1:], vector[1:]):
        if key[0] == 'd':
            d[key[1]] = complex(value)
        else:
            b[key] = complex(value)
    logger.info('numeric Xi %s at E=%r: residual %.3g', spec.render(), E, residual)
    return XiFunction(spec, complex(vector[0]), b, d, None, None, E, L, float(residual))


def _numeric_evaluator(xi, order):
    if order > 2:
        raise ConfigError('numeric Xi derivatives are available up to order 2', extra=order)
    spec, L = xi.spec, xi.lattice
    g2 = L.g2

    def evaluate(x):
        shifted, pairs = _numeric_terms(spec, L, x)
        f = [xi.c0, 0j, 0j]
        for (i, j), coeff in xi.b.items():
            P, P1 = shifted[i]
            m = spec.l[i] - j
            P2 = 6 * P * P - g2 / 2
            f[0] += coeff * P ** m
            f[1] += coeff * m * P ** (m - 1) * P1
            second = m * P ** (m - 1) * P2
            if m >= 2:
                second += m * (m - 1) * P ** (m - 2) * P1 ** 2
            f[2] += coeff * second
        for k, coeff in xi.d.items():
            pp, pm = pairs[k]
            f[0] += coeff * (pp[0] + pm[0])
            f[1] += coeff * (pp[1] + pm[1])
            f[2] += coeff * (6 * pp[0] ** 2 + 6 * pm[0] ** 2 - g2)
        return f[:order + 1]
    return evaluate


def q_numeric(xi, L, E, x):
    """Xi^2 (E - v) + Xi Xi''/2 - Xi'^2/4 at one point, any M."""
    f0, f1, f2 = xi.evaluator(L, E if xi.is_symbolic else None, order=2)(x)
    v = potential_numeric(xi.spec, L, x)
    return f0 * f0 * (E - v) + 0.5 * f0 * f2 - 0.25 * f1 * f1


# Q and A


def compute_q(xi, spec=None):
    """Spectral polynomial Q(E) = Xi^2 (E - v) + Xi Xi''/2 - Xi'^2/4."""
    spec = spec or xi.spec
    context = xi.context
    R = xi.as_ratfunc()
    v = potential(spec, context)
    R1 = R.derive_x()
    R2 = R1.derive_x()
    E = RatFunc(context.var('E'))
    Q = R * R * (E - v) + R * R2 * _HALF - R1 * R1 * Fraction(1, 4)
    if not Q.is_polynomial():
        raise ConsistencyError('q-constant', 'Q has a z-dependent denominator', Q.render())
    Q = Q.as_poly()
    leftover = Q.variables_present() & {'z', 'w'}
    if leftover:
        raise ConsistencyError('q-constant', 'Q depends on x', Q.render())
    degree = Q.degree('E')
    lead = Q.coefficient('E', degree)
    if degree != 2 * xi.genus + 1 or lead != 1:
        raise ConsistencyError('q-degree', 'Q must be monic of degree 2g+1',
                               {'genus': xi.genus, 'Q': Q.render()})
    logger.info('compute_q %s: %s', spec.render(), Q.render())
    return SpectralPolynomial(Q, xi.genus, None)


def _a_sequence(xi):
    R = xi.as_ratfunc()
    g = xi.genus
    a_seq = []
    for j in range(g + 1):
        a_seq.append(RatFunc(R.num.coefficient('E', g - j), R.den))
    return a_seq


def build_A(xi, spec=None):
    """
    A = (-1)^g sum_j (a_j D - a_j'/2) H^(g-j), H = -D^2 + v, with a_j the
    E-coefficients of Xi. The sign makes A monic.
    """
    spec = spec or xi.spec
    context = xi.context
    H = hamiltonian(spec, context)
    g = xi.genus
    a_seq = _a_sequence(xi)
    if a_seq[0] != 1:
        raise ConsistencyError('a0', 'leading E-coefficient of Xi must be 1', a_seq[0].render())
    powers = [DiffOp(context, [1])]
    for _ in range(g):
        powers.append(powers[-1].compose(H))
    total = DiffOp(context, [])
    for j, a in enumerate(a_seq):
        block = DiffOp(context, [-a.derive_x() * _HALF, a])
        total = total + block.compose(powers[g - j])
    sign = -1 if g % 2 else 1
    op = total.scale(sign)
    lead = op.coefficient(op.order)
    if op.order != 2 * g + 1 or lead != 1:
        raise ConsistencyError('a-leading', 'A must be monic of order 2g+1', op.render())
    return CommutingOperator(op, a_seq, g, sign)


def verify_commutation(A, spec):
    context = A.op.context
    H = hamiltonian(spec, context)
    comm = A.op.commutator(H)
    if not comm.is_zero():
        k = next(k for k, c in enumerate(comm.coeffs) if not c.is_zero())
        return CheckReport('commutation', False, comm.coeffs[k].render(), {'power': k})
    v = potential(spec, context)
    v1 = v.derive_x()
    a = A.a_seq + [RatFunc(context.constant(0))]
    for j in range(len(A.a_seq)):
        d1 = a[j].derive_x()
        expr = d1.derive_x().derive_x() - v * d1 * 4 - v1 * a[j] * 2 + a[j + 1].derive_x() * 4
        if not expr.is_zero():
            return CheckReport('a-recursion', False, expr.render(), {'j': j})
    return CheckReport('commutation', True, None, {'order': A.op.order})


def verify_burchnall_chaundy(A, Q, spec):
    """A o A + Q(H) must vanish; Q(H) is assembled by Horner's rule."""
    if A.genus != Q.genus:
        raise ConfigError('genus mismatch between A and Q', extra=(A.genus, Q.genus))
    context = A.op.context
    H = hamiltonian(spec, context)
    parts = Q.coeffs.coefficients('E')
    degree = Q.coeffs.degree('E')
    QH = DiffOp(context, [parts[degree]])
    for k in range(degree - 1, -1, -1):
        QH = QH.compose(H)
        if k in parts:
            QH = QH + DiffOp(context, [parts[k]])
    residue = A.op.compose(A.op) + QH
    if not residue.is_zero():
        k = next(k for k, c in enumerate(residue.coeffs) if not c.is_zero())
        return CheckReport('burchnall-chaundy', False, residue.coeffs[k].render(), {'power': k})
    return CheckReport('burchnall-chaundy', True, None, {'genus': A.genus})


def xi_derivative_basis(xi):
    """
    (a(E), c(E)) of the expansion of Xi over the even derivatives
    D^(2j) wp(x + omega_i): a is the sum of the j = 0 coefficients, c the
    constant part.
    """
    context = xi.context
    z = context.var('z')
    zero = context.constant(0)
    a_total = zero
    c_total = xi.c0
    for i, li in enumerate(xi.spec.l):
        if not li:
            continue
        F = zero
        for j in range(li):
            coeff = xi.b.get((i, j), zero)
            F = F + coeff * z ** (li - j)
        derivs = [z]
        for _ in range(li - 1):
            derivs.append(derivs[-1].derive_x().derive_x())
        coeffs = [zero] * li
        for j in range(li - 1, -1, -1):
            top = derivs[j].coefficient('z', j + 1)
            lead = top.constant_value()
            a_j = F.coefficient('z', j + 1) * (1 / lead)
            coeffs[j] = a_j
            F = F - a_j * derivs[j]
        if F.degree('z') > 0:
            raise ConsistencyError('derivative-basis', 'expansion left a z-dependent part',
                                   F.render())
        a_total = a_total + coeffs[0]
        c_total = c_total + F
    return a_total, c_total


def polished_roots(Q, L):
    """All roots of Q on `L`, Newton polished; near-real ones are snapped to the real line."""
    coeffs = np.array(Q.numeric_coefficients(L), dtype=complex)
    deriv = np.polyder(coeffs)
    polished = []
    for r in np.roots(coeffs):
        for _ in range(4):
            d = np.polyval(deriv, r)
            if d == 0:
                break
            r = r - np.polyval(coeffs, r) / d
        if abs(r.imag) <= 1e-7 * max(1.0, abs(r)):
            r = float(r.real)
        polished.append(r)
    return polished


def spectral_curve_roots(Q, L):
    """Numeric roots of Q on `L`; the real ones, sorted, are the band edges."""
    roots = polished_roots(Q, L)
    real = sorted(r for r in roots if isinstance(r, float))
    logger.info('spectral curve: %d roots, %d real', len(roots), len(real))
    return real


# Heun parameters


def _k_terms(alpha, beta, gamma, delta, epsilon):
    ab2 = (alpha - beta) ** 2
    k1 = (-ab2 + 2 * gamma ** 2 + 6 * gamma * epsilon + 2 * epsilon ** 2 - 4 * gamma
          - 4 * epsilon - delta ** 2 + 2 * delta + 1)
    k2 = (-ab2 + 2 * gamma ** 2 + 6 * gamma * delta + 2 * delta ** 2 - 4 * gamma
          - 4 * delta - epsilon ** 2 + 2 * epsilon + 1)
    return k1, k2


def _exact(value):
    return Fraction(value) if isinstance(value, int) else value


def _normalize_l(value):
    if value.imag == 0 and value.real < -_HALF:
        return -value - 1
    return value


def _as_int(value):
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    return value


def heun_to_elliptic(h, normalize=True, scale=1, tolerance=1e-12):
    """
    Map Heun parameters to the elliptic form with z = (wp(x) - e1) / (e2 - e1):
    coefficients l, eigenvalue E (for e2 - e1 = `scale`) and the modulus
    constraint t = (e3 - e1) / (e2 - e1). With `normalize` each real
    l_i < -1/2 is replaced by -l_i - 1, which leaves l_i (l_i + 1) unchanged.

    Exact (int / Fraction) parameters give exact results.
    """
    if abs(h.fuchs_defect()) > tolerance:
        raise ConfigError('Heun parameters violate gamma + delta + epsilon = alpha + beta + 1',
                          extra=h.fuchs_defect())
    l = (h.beta - h.alpha - _HALF, _HALF - h.gamma, _HALF - h.delta, _HALF - h.epsilon)
    k1, k2 = _k_terms(*[_exact(x) for x in h[:5]])
    E = scale * (-4 * h.q + _exact(k1) / 3 + _exact(k2) * h.t / 3)
    if normalize:
        l = tuple(_normalize_l(x) for x in l)
    return EllipticForm(tuple(_as_int(x) for x in l), E, h.t, scale)


def elliptic_to_heun(spec, E, L=None, t=None, scale=1):
    """
    Inverse of `heun_to_elliptic(h, normalize=False)` for M = 0. The modulus
    and scale come from `L` when given, otherwise from `t` and `scale`.
    """
    if spec.M:
        raise ConfigError('elliptic_to_heun needs M = 0', extra=spec.render())
    if L is not None:
        if abs(L.e2 - L.e1) <= 1e-12 * max(1.0, abs(L.e1)):
            raise LatticeError('t is undefined for e2 = e1', (L.e1, L.e2))
        scale = L.e2 - L.e1
        t = (L.e3 - L.e1) / scale
    if t is None:
        raise ConfigError('elliptic_to_heun needs a lattice or t')
    l0, l1, l2, l3 = [_exact(x) for x in spec.l]
    gamma, delta, epsilon = _HALF - l1, _HALF - l2, _HALF - l3
    diff = l0 + _HALF
    total = gamma + delta + epsilon - 1
    alpha = (total - diff) / 2
    beta = (total + diff) / 2
    k1, k2 = _k_terms(alpha, beta, gamma, delta, epsilon)
    q = (k1 / 3 + k2 * _exact(t) / 3 - _exact(E) / _exact(scale)) / 4
    return HeunParams(alpha, beta, gamma, delta, epsilon, q, t)


def heun_transport_residual(h, L, x):
    """
    Residual of -f'' + (v - E) f = 0 for f = z^(-l1/2) (z-1)^(-l2/2)
    (z-t)^(-l3/2) y(z), z = (wp(x) - e1)/(e2 - e1), y any solution of Heun's
    equation. y'' is eliminated through the Heun equation, so the residual
    is linear in (y, y'); the larger of the two basis residuals, relative
    to the size of the terms, is returned.
    """
    scale = L.e2 - L.e1
    t = (L.e3 - L.e1) / scale
    if abs(complex(h.t) - t) > 1e-9 * max(1.0, abs(t)):
        raise ConfigError('Heun t does not match the lattice modulus', extra=(h.t, t))
    form = heun_to_elliptic(h, normalize=False, scale=scale)
    l = [complex(x) for x in form.l]
    P, P1 = wp_pair(x, L)
    z = (P - L.e1) / scale
    z1 = P1 / scale
    z2 = (6 * P * P - L.g2 / 2) / scale
    a, b, c, d, e, q = [complex(v) for v in h[:6]]
    gauge = -l[1] / (2 * z) - l[2] / (2 * (z - 1)) - l[3] / (2 * (z - t))
    gauge1 = l[1] / (2 * z ** 2) + l[2] / (2 * (z - 1) ** 2) + l[3] / (2 * (z - t) ** 2)
    p_coef = c / z + d / (z - 1) + e / (z - t)
    q_coef = (a * b * z - q) / (z * (z - 1) * (z - t))
    v = sum(li * (li + 1) * wp_pair(x + L.omega(i), L)[0]
            for i, li in enumerate(l) if li * (li + 1) != 0)
    worst = 0.0
    for y, y1 in ((1.0, 0.0), (0.0, 1.0)):
        y2 = -p_coef * y1 - q_coef * y
        f2 = (y2 + 2 * y1 * gauge + y * (gauge * gauge + gauge1)) * z1 ** 2 + \
            (y1 + y * gauge) * z2
        res = -f2 + (v - form.E) * y
        size = abs(f2) + abs(v * y) + abs(form.E * y) + 1e-300
        worst = max(worst, abs(res) / size)
    logger.debug('heun transport residual at x=%r: %.3g', x, worst)
    return worst


# delta condition for M = 1


def delta_condition(delta, l, L):
    """sum_i (l_i + 1/2)^2 wp'(delta + omega_i)"""
    return sum((li + 0.5) ** 2 * wp_pair(delta + L.omega(i), L)[1] for i, li in enumerate(l))


def _delta_condition_prime(delta, l, L):
    total = 0j
    for i, li in enumerate(l):
        P = wp_pair(delta + L.omega(i), L)[0]
        total += (li + 0.5) ** 2 * (6 * P * P - L.g2 / 2)
    return total


def _near_half_period(delta, L, radius):
    for i in range(4):
        if abs(reduce_to_cell(delta - L.omega(i), L)[0]) < radius:
            return True
    return False


def solve_delta_condition(l, L, tolerances=DEFAULT_TOLERANCES, grid=16):
    """
    A root delta of the M = 1 condition off the half-periods. A grid over
    the period cell seeds Newton iterations, best residual first.
    """
    radius = 0.05 * abs(L.omega1)
    points, residuals = [], []
    for ia in range(grid + 1):
        for ib in range(grid + 1):
            delta = 2 * L.omega1 * ia / grid + 2 * L.omega3 * ib / grid
            if _near_half_period(delta, L, radius):
                continue
            try:
                value = delta_condition(delta, l, L)
            except PoleError:
                continue
            points.append(delta)
            residuals.append(abs(value))
    order = np.argsort(residuals)
    for idx in order[:24]:
        delta = points[idx]
        for step in range(50):
            try:
                F = delta_condition(delta, l, L)
                dF = _delta_condition_prime(delta, l, L)
            except PoleError:
                break
            logger.debug('delta newton %d: delta=%r |F|=%.3g', step, delta, abs(F))
            if abs(F) < tolerances.delta:
                break
            if dF == 0:
                break
            delta = delta - F / dF
        else:
            continue
        try:
            F = delta_condition(delta, l, L)
        except PoleError:
            continue
        if abs(F) < tolerances.delta and not _near_half_period(delta, L, radius):
            delta = reduce_to_cell(delta, L)[0]
            logger.info('delta condition for l=%s: delta=%r residual %.3g', l, delta, abs(F))
            return delta
    raise SearchError('no root of the delta condition off the half-periods', points, residuals)
