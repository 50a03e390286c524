"""
Monodromy of -f'' + v f = E f along the periods, by three routes: direct
Floquet integration, the hyperelliptic integral over E, and the
Hermite-Krichever form exp(-2 eta_k alpha + 2 omega_k zeta(alpha) + 2 kappa omega_k).
"""
from collections import namedtuple
import cmath
import logging

from mpmath import mp
import numpy as np
from scipy.integrate import solve_ivp

from .elliptic import (reduce_quasi, reduce_to_cell, wp_inverse, wp_pair, wp_shifted,
                       zeta_w)
from .exceptions import (ConfigError, ConsistencyError, ExcludedPointError, ExtractionError,
                         PathError, PoleError)
from .fingap import (compute_q, compute_xi, polished_roots, potential_numeric,
                     q_numeric, spectral_curve_roots, xi_derivative_basis)
from .settings import DEFAULT_TOLERANCES


logger = logging.getLogger(__name__)

BOUNDED_BAND = 'bounded-band'
GAP = 'gap'
PERIODIC_EDGE = 'periodic-edge'
ANTIPERIODIC_EDGE = 'antiperiodic-edge'

_POLE_CLEARANCE = 0.05


def _pair(value):
    value = complex(value)
    return [value.real, value.imag]


class MonodromyResult(namedtuple('MonodromyResult', 'period_index multiplier trace matrix')):
    """
    `matrix` is [[f1, f2], [f1', f2']] at x + 2 omega_k; a solution with data c at
    the base point arrives with data `matrix` c.
    """
    __slots__ = ()

    @property
    def det(self):
        m = self.matrix
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]

    def to_json(self):
        return {
            'k': self.period_index,
            'multiplier': _pair(self.multiplier),
            'trace': _pair(self.trace),
            'matrix': [[_pair(x) for x in row] for row in self.matrix],
        }


class FloquetPair(namedtuple('FloquetPair', 'm1 m3 first third')):
    """Multipliers of one common eigenfunction along both periods."""
    __slots__ = ()


class HKParams(namedtuple('HKParams', 'alpha kappa wp_alpha wp_prime_alpha')):
    __slots__ = ()

    def multiplier(self, L, k):
        return hk_multiplier(self, L, k)

    def to_json(self):
        return dict((name, _pair(getattr(self, name))) for name in self._fields)


class BandClassification(namedtuple('BandClassification', 'E kind trace1 trace3')):
    __slots__ = ()

    def to_json(self):
        return {'E': self.E, 'kind': self.kind, 'trace1': self.trace1, 'trace3': self.trace3}


class ReductionReport(namedtuple('ReductionReport', 'E xi wp_of_integral diff_first '
                                                     'lhs_second rhs_second diff_second ok')):
    __slots__ = ()

    def to_json(self):
        out = self._asdict()
        for name in ('xi', 'wp_of_integral', 'lhs_second', 'rhs_second'):
            out[name] = _pair(out[name])
        return out


class AgreementReport(namedtuple('AgreementReport', 'E k branch floquet hyperelliptic hk '
                                                     'diff_hyperelliptic diff_hk diff_routes '
                                                     'ok')):
    """
    One period, one Bloch branch: diff_hyperelliptic and diff_hk are taken
    against the Floquet multiplier, diff_routes between the other two.
    """
    __slots__ = ()

    @property
    def worst(self):
        return max(self.diff_hyperelliptic, self.diff_hk, self.diff_routes)

    def to_json(self):
        out = self._asdict()
        for name in ('branch', 'floquet', 'hyperelliptic', 'hk'):
            out[name] = _pair(out[name])
        return out


# Floquet integration


def _pole_points(spec, L):
    points = [0j]
    for i in range(1, 4):
        if spec.l[i]:
            points.append(L.omega(i))
    for delta in spec.deltas:
        points.extend((delta, -delta))
    return points


def _path_clearance(x0, step, spec, L, samples=256):
    best = None
    for point in _pole_points(spec, L):
        for n in range(samples + 1):
            d = abs(reduce_to_cell(x0 + step * n / samples - point, L)[0])
            if best is None or d < best:
                best = d
    return best


def _base_candidates(L):
    centre = (L.omega1 + L.omega3) / 2
    for c1, c3 in ((0, 0), (0.13, 0.21), (-0.17, 0.11), (0.23, -0.19), (0.07, 0.37)):
        yield centre + c1 * L.omega1 + c3 * L.omega3


def _check_realline(spec, L, k):
    if k != 1:
        raise ConfigError('real-line integration runs along 2 omega1 only', extra=k)
    if spec.l[2] or spec.l[3] or spec.M:
        raise ConfigError('real-line integration needs l2 = l3 = 0 and M = 0', extra=spec.l)
    if not L.is_rectangular():
        raise ConfigError('real-line integration needs a rectangular lattice',
                          extra=(L.omega1, L.omega3))


def _make_rhs(spec, L, E, step):
    strengths = [(i, s) for i, s in enumerate(spec.strengths()) if s]
    deltas = [wp_pair(d, L) for d in spec.deltas]
    half_g2 = L.g2 / 2

    def potential_at(P, dP):
        v = 0j
        for i, s in strengths:
            v += s * wp_shifted(P, i, L)
        for pd, dpd in deltas:
            denom = P - pd
            v += 2 * (0.25 * ((dP - dpd) / denom) ** 2 + 0.25 * ((dP + dpd) / denom) ** 2
                      - 2 * P - 2 * pd)
        return v

    def rhs(s, y):
        f1, d1, f2, d2, P, dP = y
        u = potential_at(P, dP) - E
        return step * np.array([d1, u * f1, d2, u * f2, dP, 6 * P * P - half_g2])
    return rhs


def _integrate_once(spec, L, E, k, x0, tolerances):
    step = 2 * L.omega(k)
    clearance = _path_clearance(x0, step, spec, L)
    if clearance < _POLE_CLEARANCE * abs(L.omega1):
        raise PathError('integration path passes %.3g from a pole' % clearance, x0)
    P0, dP0 = wp_pair(x0, L)
    y0 = np.array([1, 0, 0, 1, P0, dP0], dtype=complex)
    sol = solve_ivp(_make_rhs(spec, L, E, step), (0.0, 1.0), y0, method='RK45',
                    rtol=tolerances.ode_rtol, atol=1e-12)
    if not sol.success:
        raise PathError('ODE integration failed: %s' % sol.message, x0)
    f1, d1, f2, d2, P, _ = sol.y[:, -1]
    if abs(P - P0) > 1e-6 * max(1.0, abs(P0)):
        raise PathError('integrated wp lost its periodicity', (P0, P))
    logger.debug('floquet k=%d E=%r: %d steps from x0=%r', k, E, sol.t.size, x0)
    return [[f1, f2], [d1, d2]]


def _leading_multiplier(matrix):
    values = np.linalg.eigvals(np.array(matrix, dtype=complex))
    values = sorted(values, key=lambda m: (-round(abs(m), 10), -m.imag))
    return complex(values[0])


def _floquet_matrix(spec, L, E, k, realline, base, tolerances):
    if realline:
        _check_realline(spec, L, k)
        return _integrate_once(spec, L, E, k, L.omega3 if base is None else base, tolerances)
    if base is not None:
        return _integrate_once(spec, L, E, k, base, tolerances)
    error = None
    for n, x0 in enumerate(_base_candidates(L)):
        try:
            matrix = _integrate_once(spec, L, E, k, x0, tolerances)
        except PathError as exc:
            error = exc
            continue
        if n:
            logger.warning('floquet base point shifted to %r', x0)
        return matrix
    raise error


def integrate_floquet(spec, L, E, k, realline=False, base=None,
                      tolerances=DEFAULT_TOLERANCES):
    """
    Floquet matrix of the shift x -> x + 2 omega_k, from the fundamental
    pair f1 = 1, f1' = 0; f2 = 0, f2' = 1 at the base point. wp is carried
    along the path through wp'' = 6 wp^2 - g2/2.

    With `realline` the path is omega3 + [0, 2 omega1], on which the
    potential is real and pole free for l2 = l3 = 0.
    """
    if k not in (1, 3):
        raise ConfigError('period index must be 1 or 3', extra=k)
    if spec.M and len(spec.deltas) != spec.M:
        raise ConfigError('Floquet integration needs the delta values', extra=spec.render())
    matrix = _floquet_matrix(spec, L, E, k, realline, base, tolerances)
    result = MonodromyResult(k, _leading_multiplier(matrix), matrix[0][0] + matrix[1][1],
                             matrix)
    # the Wronskian is conserved; scale by the size of the cancelling products
    scale = max(1.0, abs(matrix[0][0] * matrix[1][1]), abs(matrix[0][1] * matrix[1][0]))
    if abs(result.det - 1) > tolerances.det * scale:
        raise ConsistencyError('floquet-det', 'Floquet determinant deviates from 1',
                               {'E': E, 'k': k, 'det': result.det})
    return result


def _common_base(spec, L):
    limit = _POLE_CLEARANCE * abs(L.omega1)
    for x0 in _base_candidates(L):
        if all(_path_clearance(x0, 2 * L.omega(k), spec, L) >= limit for k in (1, 3)):
            return x0
    raise PathError('no base point clears the poles along both periods', spec.render())


def _matching_vector(vectors, log_derivative):
    # sine of the angle between c and (1, f'/f)
    target = np.array([1, log_derivative], dtype=complex)
    target /= np.linalg.norm(target)
    return int(np.argmin([abs(c[0] * target[1] - c[1] * target[0]) / np.linalg.norm(c)
                          for c in vectors.T]))


def floquet_pair(spec, L, E, base=None, log_derivative=None,
                 tolerances=DEFAULT_TOLERANCES):
    """
    m1 from an eigenvector of the first Floquet matrix, m3 as the Rayleigh
    quotient of the third one on that vector.

    Without `log_derivative` the eigenvector of the leading multiplier is
    taken; with it, the one whose solution has f'/f nearest that value at
    the base point.
    """
    if base is None:
        base = _common_base(spec, L)
    first = integrate_floquet(spec, L, E, 1, base=base, tolerances=tolerances)
    third = integrate_floquet(spec, L, E, 3, base=base, tolerances=tolerances)
    m1_mat = np.array(first.matrix, dtype=complex)
    m3_mat = np.array(third.matrix, dtype=complex)
    # Lambda = (f1, f2) c with M c = m c
    values, vectors = np.linalg.eig(m1_mat)
    if log_derivative is None:
        idx = int(np.argmin([abs(v - first.multiplier) for v in values]))
    else:
        idx = _matching_vector(vectors, log_derivative)
    vec = vectors[:, idx]
    m3 = complex(np.vdot(vec, m3_mat.dot(vec)) / np.vdot(vec, vec))
    return FloquetPair(complex(values[idx]), m3, first, third)


def _kind(trace, tolerance):
    t = trace.real
    if abs(t) < 2 - tolerance:
        return BOUNDED_BAND
    if abs(t) > 2 + tolerance:
        return GAP
    return PERIODIC_EDGE if t > 0 else ANTIPERIODIC_EDGE


def band_trace(spec, L, E, tolerances=DEFAULT_TOLERANCES):
    """Real trace of the first Floquet matrix on the real line."""
    result = integrate_floquet(spec, L, E, 1, realline=True, tolerances=tolerances)
    if abs(result.trace.imag) > 1e-9 * max(1.0, abs(result.trace)):
        logger.warning('trace at E=%r has imaginary part %.3g', E, result.trace.imag)
    return result.trace.real


def _bisect_edge(spec, L, lo, hi, f_lo, tolerances):
    while hi - lo > tolerances.edge:
        mid = 0.5 * (lo + hi)
        f_mid = abs(band_trace(spec, L, mid, tolerances)) - 2
        logger.debug('edge bisection [%r, %r]: %.3g', lo, hi, f_mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify_band(spec, L, E_grid, traces=None, tolerances=DEFAULT_TOLERANCES):
    """
    Classify each real E by the first Floquet trace and refine the band
    edges between grid points by bisection on |trace| - 2. `traces` may
    carry precomputed traces for `E_grid`.

    Returns `(points, edges)`, edges as BandClassification with edge kinds.
    """
    E_grid = [float(E) for E in E_grid]
    if traces is None:
        traces = [band_trace(spec, L, E, tolerances) for E in E_grid]
    points = [BandClassification(E, _kind(t, tolerances.edge), t, None)
              for E, t in zip(E_grid, traces)]
    edges = []
    order = sorted(range(len(E_grid)), key=lambda n: E_grid[n])
    for a, b in zip(order, order[1:]):
        fa, fb = abs(traces[a]) - 2, abs(traces[b]) - 2
        if fa == 0 or (fa > 0) == (fb > 0):
            continue
        E_edge = _bisect_edge(spec, L, E_grid[a], E_grid[b], fa, tolerances)
        t = band_trace(spec, L, E_edge, tolerances)
        edges.append(BandClassification(E_edge, PERIODIC_EDGE if t > 0 else ANTIPERIODIC_EDGE,
                                        t, None))
    logger.info('classify_band %s: %d points, %d edges', spec.render(), len(points), len(edges))
    return points, edges


# the integral representation


def _segment_values(fn, a, b, samples):
    return [fn(a + (b - a) * n / samples) for n in range(samples + 1)]


def _continued_sqrt(values):
    """Square roots along a sampled path, each chosen nearest the previous one."""
    roots = [cmath.sqrt(values[0])]
    for value in values[1:]:
        r = cmath.sqrt(value)
        if abs(r - roots[-1]) > abs(-r - roots[-1]):
            r = -r
        roots.append(r)
    return roots


def _q_value(xi, Q, L, E, base):
    if Q is None:
        return q_numeric(xi, L, E, base)
    if hasattr(Q, 'evaluate'):
        return Q.evaluate(E, L)
    return complex(Q)


def bloch_branch(Q, L, E, xi=None, base=None):
    """
    s = sqrt(-Q(E)), principal; positive in real gaps, positive imaginary in
    real bands. It fixes which of the two Bloch solutions is meant. With
    Q = None, Q is evaluated from `xi` at `base`.
    """
    if Q is None and (xi is None or base is None):
        raise ConfigError('bloch_branch needs Q, or Xi and a base point')
    q = -complex(_q_value(xi, Q, L, E, base))
    if abs(q.imag) <= 1e-12 * abs(q):
        q = q.real
    return complex(mp.sqrt(q))


def bloch_log_derivative(xi, L, E, s, x):
    """Lambda'/Lambda = Xi'/(2 Xi) + s/Xi at x."""
    value, slope = xi.evaluator(L, E if xi.is_symbolic else None, order=1)(x)[:2]
    if abs(value) < 1e-10 * max(1.0, abs(slope)):
        raise PathError('base point sits on a zero of Xi', x)
    return slope / (2 * value) + s / value


def floquet_bloch(xi, Q, L, E, s=None, tolerances=DEFAULT_TOLERANCES):
    """
    (m1, m3) of Lambda = sqrt(Xi) exp(s int dx/Xi) from the Floquet matrices,
    s = sqrt(-Q(E)) as `bloch_branch` picks it unless given.
    """
    base = _common_base(xi.spec, L)
    if s is None:
        s = bloch_branch(Q, L, E, xi, base)
    return floquet_pair(xi.spec, L, E, base=base,
                        log_derivative=bloch_log_derivative(xi, L, E, s, base),
                        tolerances=tolerances)


def lambda_eval(xi, Q, L, E, x, branch=1, base=None, samples=64,
                tolerances=DEFAULT_TOLERANCES):
    """
    Lambda(x, E) = sqrt(Xi) exp(branch sqrt(-Q) int_base^x dx / Xi) along the
    straight segment, sqrt(Xi) continued from its principal value at the
    base point. `Q` is a SpectralPolynomial, a number, or None to evaluate
    Q numerically from Xi.
    """
    if base is None:
        base = (L.omega1 + L.omega3) / 2
    evaluate = xi.evaluator(L, E if xi.is_symbolic else None)

    def value(t):
        return evaluate(t)[0]
    try:
        values = _segment_values(value, base, x, samples)
    except PoleError as exc:
        raise PathError('quadrature path meets a pole of Xi', exc.x)
    scale = max(abs(v) for v in values)
    if min(abs(v) for v in values) < 1e-8 * scale:
        raise PathError('quadrature path passes near a zero of Xi', (base, x))
    root = _continued_sqrt(values)[-1]
    if x == base:
        return root
    s = cmath.sqrt(-_q_value(xi, Q, L, E, base))
    span = x - base
    integral = complex(mp.quad(lambda t: span / value(base + complex(t) * span), [0, 1]))
    return root * cmath.exp(branch * s * integral)


def schrodinger_residual(f, x, E, spec, L, h=1e-3):
    """
    Relative residual of -f'' + (v - E) f at x, f'' by the Richardson
    combination of central second differences with steps h and h/2.
    """
    def second(step):
        return (f(x + step) - 2 * f(x) + f(x - step)) / step ** 2
    d2 = (4 * second(h / 2) - second(h)) / 3
    fx = f(x)
    v = potential_numeric(spec, L, x)
    size = abs(d2) + abs(v * fx) + abs(E * fx)
    return abs(-d2 + (v - E) * fx) / size if size else 0.0


# hyperelliptic route


def _nearest_edge(roots, E, E0=None):
    if E0 is not None:
        between = [r for r in roots if min(E, E0) < r < max(E, E0)
                   and abs(r - E) > 1e-12 and abs(r - E0) > 1e-12]
        if between:
            raise PathError('a branch point lies between E0 and E, integrate piecewise',
                            between)
        return E0
    if not roots:
        raise PathError('Q has no real roots', E)
    below = [r for r in roots if r <= E]
    if below:
        return max(below)
    logger.debug('E=%r lies below every band edge, starting from %r', E, min(roots))
    return min(roots)


def _carried_branch(Q, L, E, s):
    """
    sqrt(-Q(t)) on the real segment ending at E, continuous away from the
    roots and equal to `s` at E.
    """
    lead = mp.sqrt(Q.numeric_coefficients(L)[0])
    product = _continued_s([complex(r) for r in polished_roots(Q, L)])

    def branch(t):
        return lead * product(t)
    at_E = complex(branch(E))
    sign = 1 if abs(s - at_E) <= abs(s + at_E) else -1
    return lambda t: sign * branch(t)


def monodromy_hyperelliptic(xi, Q, L, E, k, E0=None, s=None, tolerances=DEFAULT_TOLERANCES):
    """
    (-1)^q_k exp(-1/2 int_E0^E (-2 eta_k a + 2 omega_k c) / s(E') dE') for the
    Bloch solution of branch s = sqrt(-Q(E)) (`bloch_branch` unless given),
    s(E') carried continuously from E back to E0. E0 defaults to the
    nearest real root of Q at or below E; q_k is read off the Floquet
    trace at E0.
    """
    if not xi.is_symbolic:
        raise ConfigError('monodromy_hyperelliptic needs a symbolic Xi')
    a_poly, c_poly = xi_derivative_basis(xi)
    roots = spectral_curve_roots(Q, L)
    E = float(E)
    E0 = _nearest_edge(roots, E, E0)
    if s is None:
        s = bloch_branch(Q, L, E)
    edge = integrate_floquet(xi.spec, L, E0, k, tolerances=tolerances)
    q_k = 0 if edge.trace.real > 0 else 1
    values = L.symbol_values()
    eta, omega = L.eta(k), L.omega(k)
    carried = _carried_branch(Q, L, E, s)

    def integrand(t):
        point = dict(values, E=complex(t))
        num = -2 * eta * a_poly.evaluate(point) + 2 * omega * c_poly.evaluate(point)
        return num / carried(t)
    integral = complex(mp.quad(integrand, [E0, E])) if E != E0 else 0j
    multiplier = (-1) ** q_k * cmath.exp(-0.5 * integral)
    logger.info('hyperelliptic multiplier k=%d E=%r (E0=%r, q=%d): %r', k, E, E0, q_k,
                multiplier)
    return multiplier


# Hermite-Krichever


def hk_multiplier(hk, L, k):
    return cmath.exp(-2 * L.eta(k) * hk.alpha + 2 * L.omega(k) * zeta_w(hk.alpha, L)
                     + 2 * hk.kappa * L.omega(k))


def _hk_params(alpha, kappa, L):
    P, dP = wp_pair(alpha, L)
    cubic = 4 * P ** 3 - L.g2 * P - L.g3
    if abs(dP * dP - cubic) > 1e-8 * max(1.0, abs(cubic)):
        raise ExtractionError('wp(alpha) is off the elliptic curve', abs(dP * dP - cubic))
    return HKParams(alpha, kappa, P, dP)


def hk_extract(m1, m3, L, tolerances=DEFAULT_TOLERANCES):
    """
    (alpha, kappa) with log m_k = -2 eta_k alpha + 2 omega_k (zeta(alpha) + kappa),
    k = 1, 3. The Legendre relation eliminates kappa, so alpha comes out
    in closed form; the branches of the logs shift alpha by periods.
    """
    l1, l3 = cmath.log(m1), cmath.log(m3)
    w1, w3 = L.omega1, L.omega3
    alpha0 = (w1 * l3 - w3 * l1) / (cmath.pi * 1j)
    alpha = reduce_to_cell(alpha0, L)[0]
    if abs(alpha) < 1e-9 * abs(w1):
        raise ExtractionError('alpha is a lattice point', abs(alpha))
    z0 = (l1 + 2 * L.eta1 * alpha0) / (2 * w1)
    try:
        kappa = z0 - zeta_w(alpha0, L)
    except PoleError as exc:
        raise ExtractionError('alpha is a lattice point', exc.x)
    hk = _hk_params(alpha, kappa, L)
    residual = max(abs(hk_multiplier(hk, L, 1) / m1 - 1), abs(hk_multiplier(hk, L, 3) / m3 - 1))
    if residual > 1e-9:
        raise ExtractionError('multipliers are not reproduced', residual)
    logger.info('hk_extract: alpha=%r kappa=%r residual %.3g', alpha, kappa, residual)
    return hk


def hk_example_l1(E, L, s=None):
    """
    l0 = 1: wp(alpha) = -E, wp'(alpha) = 2 s, kappa = 0, with
    s = sqrt(-Q(E)), Q = E^3 - g2 E/4 + g3/4 (principal unless given).
    """
    E = complex(E)
    if s is None:
        s = complex(mp.sqrt(-(E ** 3 - L.g2 * E / 4 + L.g3 / 4)))
    return _hk_params(wp_inverse(-E, L, prime=2 * s), 0j, L)


def _l2_root(E, L, s=None):
    D = E * E - 3 * L.g2
    if abs(D) <= 1e-10 * max(1.0, abs(E) ** 2):
        raise ExcludedPointError('E^2 = 3 g2 is excluded', E)
    if s is None:
        Q = D * (E ** 3 - 9 * L.g2 * E / 4 - 27 * L.g3 / 4)
        s = complex(mp.sqrt(-Q))
    return D, s


def hk_example_l2(E, L, s=None):
    """
    Closed form for l0 = 2:
    wp(alpha) = -(E^3 - 27 g3) / (9 (E^2 - 3 g2)), kappa = 2 s / (3 (E^2 - 3 g2)),
    with s = sqrt(-Q(E)) (principal unless given).
    """
    E = complex(E)
    D, s = _l2_root(E, L, s)
    xi = -(E ** 3 - 27 * L.g3) / (9 * D)
    kappa = 2 * s / (3 * D)
    prime = 2 * (E ** 3 - 9 * L.g2 * E + 54 * L.g3) * s / (27 * D * D)
    alpha = wp_inverse(xi, L, prime=prime)
    return _hk_params(alpha, kappa, L)


def _l2_xi_value(E, L):
    return -(E ** 3 - 27 * L.g3) / (9 * (E * E - 3 * L.g2))


def _continued_s(roots):
    def s(t):
        out = mp.mpc(0, 1)
        for r in roots:
            out *= mp.sqrt(t - r)
        return out
    return s


def _piecewise_quad(f, lo, hi, roots):
    cuts = [lo] + sorted(r for r in roots if lo < r < hi) + [hi]
    total = mp.mpc(0)
    for a, b in zip(cuts, cuts[1:]):
        if b - a > 0:
            total += mp.quad(f, [a, b])
    return total


def reduction_check(E, L, tolerances=DEFAULT_TOLERANCES):
    """
    For l0 = 2, check wp(I(E)) = xi(E) with I(E) = -1/2 int_inf^E 3E'/s dE', and
    1/2 int_3e1^E c/s = -kappa(E) + zeta(I(3 e1)) - zeta(I(E)) modulo
    quasi-periods, s continued from the upper half plane on the real line.
    """
    E = float(E)
    if not L.is_rectangular():
        raise ConfigError('reduction_check needs a rectangular lattice')
    # Q = (E^2 - 3 g2) prod (E - 3 e_i)
    root = (3 * L.g2.real) ** 0.5
    roots = sorted([-root, root] + [3 * L.e(i).real for i in (1, 2, 3)])
    for r in roots:
        if 0 < abs(E - r) < 1e-8:
            raise PathError('E sits on a branch point', r)
    s = _continued_s(roots)
    g2 = L.g2.real

    def first_kind(t):
        return 3 * t / s(t)

    far = max(roots[-1], E) + 1

    def integral_to_inf(lo):
        # -1/2 int_inf^lo = 1/2 int_lo^inf
        return 0.5 * (_piecewise_quad(first_kind, lo, far, roots) +
                      mp.quad(first_kind, [far, mp.inf]))

    e1 = L.e1.real
    start = 3 * e1
    I_E = complex(integral_to_inf(E))
    I_start = complex(integral_to_inf(start))
    xi = _l2_xi_value(complex(E), L)
    wp_I = wp_pair(I_E, L)[0]
    diff_first = abs(wp_I - xi)

    lo, hi = min(start, E), max(start, E)
    second = _piecewise_quad(lambda t: (t * t - 1.5 * g2) / s(t), lo, hi, roots)
    lhs = 0.5 * complex(second) * (1 if E >= start else -1)
    kappa = hk_example_l2(E, L, s=complex(s(E)))[1]
    rhs = -kappa + zeta_w(I_start, L) - zeta_w(I_E, L)
    diff_second = abs(reduce_quasi(lhs - rhs, L))
    ok = diff_first < 1e-8 * max(1.0, abs(xi)) and diff_second < 1e-8
    logger.info('reduction_check E=%r: first %.3g second %.3g', E, diff_first, diff_second)
    return ReductionReport(E, xi, wp_I, diff_first, lhs, rhs, diff_second, ok)


# three routes


def compare_routes(E, k, branch, floquet, hyperelliptic, hk, tolerance):
    """Pairwise relative differences of the three multipliers, no m <-> 1/m freedom."""
    scale = abs(floquet)
    d_hyper = abs(hyperelliptic - floquet) / scale
    d_hk = abs(hk - floquet) / scale
    d_routes = abs(hk - hyperelliptic) / scale
    ok = max(d_hyper, d_hk, d_routes) < tolerance
    if not ok:
        logger.warning('routes disagree at E=%r k=%d: %.3g %.3g %.3g', E, k, d_hyper, d_hk,
                       d_routes)
    return AgreementReport(E, k, branch, floquet, hyperelliptic, hk, d_hyper, d_hk, d_routes,
                           ok)


def three_way_agreement(spec, L, E, xi=None, Q=None, s=None, tolerances=DEFAULT_TOLERANCES):
    """
    Floquet, hyperelliptic and Hermite-Krichever multipliers of one Bloch
    solution along 2 omega1 and 2 omega3 at real E, for l = (1,0,0,0) or
    (2,0,0,0). The branch s = sqrt(-Q(E)) is fixed once (`bloch_branch`
    unless given) and fed to all three routes.

    Returns the reports for k = 1 and k = 3.
    """
    if spec.l not in ((1, 0, 0, 0), (2, 0, 0, 0)) or spec.M:
        raise ConfigError('three-way agreement covers the Lame cases l0 = 1, 2',
                          extra=spec.render())
    xi = xi or compute_xi(spec)
    Q = Q or compute_q(xi)
    E = float(E)
    if s is None:
        s = bloch_branch(Q, L, E)
    pair = floquet_bloch(xi, Q, L, E, s=s, tolerances=tolerances)
    hk = hk_example_l1(E, L, s=s) if spec.l[0] == 1 else hk_example_l2(E, L, s=s)
    reports = []
    for k, m_floquet in ((1, pair.m1), (3, pair.m3)):
        m_hyper = monodromy_hyperelliptic(xi, Q, L, E, k, s=s, tolerances=tolerances)
        reports.append(compare_routes(E, k, s, m_floquet, m_hyper, hk_multiplier(hk, L, k),
                                      tolerances.agreement))
    return reports
