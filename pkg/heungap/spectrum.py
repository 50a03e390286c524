"""
Lame-polynomial eigenvalues of -f'' + l(l+1) wp(x + omega3) f = E f on a
rectangular lattice, and the large-l counting function and density they
approach once normalized by eta^2 = l(l+1).
"""
from collections import namedtuple
import itertools
import logging
import math

from mpmath import mp
import numpy as np
from scipy.linalg import eigh_tridiagonal

from .exceptions import ConfigError, ConsistencyError, DomainError
from .fingap import PotentialSpec
from .monodromy import integrate_floquet
from .settings import DEFAULT_TOLERANCES


logger = logging.getLogger(__name__)

MAX_L = 200
PAIR_RATIO = 0.25


class LameEigenvalues(namedtuple('LameEigenvalues', 'l values families')):
    """`families[n]` is the prefactor label rho (e.g. '101') of `values[n]`."""
    __slots__ = ()

    @property
    def eta(self):
        return math.sqrt(self.l * (self.l + 1))

    def normalized(self):
        return [v / (self.l * (self.l + 1)) for v in self.values]

    def rows(self):
        return [(self.l, v, f) for v, f in zip(self.values, self.families)]


class DensityProfile(namedtuple('DensityProfile', 'E n density eta')):
    __slots__ = ()

    def rows(self):
        return list(zip(self.E, self.n, self.density))


class QuantizationResidual(namedtuple('QuantizationResidual', 'top bottom E_top E_bottom')):
    __slots__ = ()


class WkbComparison(namedtuple('WkbComparison', 'l probes raw wkb max_deviation '
                                                'bins max_relative_error')):
    __slots__ = ()

    def to_json(self):
        return {
            'l': self.l,
            'probes': list(self.probes),
            'raw': list(self.raw),
            'wkb': list(self.wkb),
            'max_deviation': self.max_deviation,
            'bins': [list(b) for b in self.bins],
            'max_relative_error': self.max_relative_error,
        }


def _real_roots(L):
    if not L.is_rectangular():
        raise ConfigError('a rectangular lattice is needed', extra=(L.omega1, L.omega3))
    return L.e1.real, L.e2.real, L.e3.real


# eigenvalues


def _families(l):
    for rho in itertools.product((0, 1), repeat=3):
        if sum(rho) <= l and (l - sum(rho)) % 2 == 0:
            yield rho


def _family_matrix(l, rho, e1, e2, e3):
    """
    Diagonal and both off-diagonals of the operator
    P -> Pi (z - e_i) F'' + 1/2 sum_i Pi_{j != i} (z - e_j) F' - l(l+1)/4 z F
    on F = Pi (z - e_i)^(rho_i / 2) s^n, s = z - e2. Eigenvalues are -E/4.
    """
    L = l * (l + 1)
    N = (l - sum(rho)) // 2
    a, b = e1 - e2, e2 - e3
    r1, r2, r3 = rho
    g1, g2, g3 = r1 + 0.5, r2 + 0.5, r3 + 0.5
    total = g1 + g2 + g3
    first = g1 * b + g2 * (b - a) - g3 * a

    def pair(x, y):
        return x * y / 2.0 + (x + y) / 4.0
    c12, c13, c23 = pair(r1, r2), pair(r1, r3), pair(r2, r3)
    k1 = c12 + c13 + c23 - L / 4.0
    k0 = c12 * b - c23 * a - L * e2 / 4.0
    n = np.arange(N + 1, dtype=float)
    diag = n * (n - 1) * (b - a) + n * first + k0
    up = (n * (n - 1) + n * total + k1)[:-1]
    low = -a * b * n[1:] * (n[1:] - 1 + g2)
    return diag, up, low


def _family_eigenvalues(l, rho, e1, e2, e3):
    diag, up, low = _family_matrix(l, rho, e1, e2, e3)
    if len(diag) == 1:
        return [-4 * diag[0]]
    product = up * low
    if np.all(product > 0):
        lam = eigh_tridiagonal(diag, np.sqrt(product), eigvals_only=True)
    else:
        logger.warning('family %s for l=%d is not symmetrizable, using a dense solve',
                       rho, l)
        dense = np.diag(diag) + np.diag(up, -1) + np.diag(low, 1)
        lam = np.linalg.eigvals(dense).real
    return [-4 * x for x in lam]


def lame_eigenvalues(l, L, validate=False, tolerances=DEFAULT_TOLERANCES):
    """
    The 2l+1 values of E with a doubly periodic (up to sign) solution,
    collected over the families f = Pi (wp - e_i)^(rho_i/2) P(wp),
    |rho| = l mod 2, deg P = (l - |rho|)/2.
    """
    if not isinstance(l, int) or not 1 <= l <= MAX_L:
        raise ConfigError('l must be an integer in [1, %d]' % MAX_L, extra=l)
    e1, e2, e3 = _real_roots(L)
    found = []
    for rho in _families(l):
        label = ''.join(str(r) for r in rho)
        for value in _family_eigenvalues(l, rho, e1, e2, e3):
            found.append((float(value), label))
    if len(found) != 2 * l + 1:
        raise ConsistencyError('lame-count', 'expected %d eigenvalues' % (2 * l + 1),
                               extra=len(found))
    found.sort()
    result = LameEigenvalues(l, [v for v, _ in found], [f for _, f in found])
    logger.info('lame l=%d: %d eigenvalues in [%.6g, %.6g]', l, len(found),
                result.values[0], result.values[-1])
    if validate:
        validate_lame(result, L, tolerances=tolerances)
    return result


def validate_lame(result, L, tolerance=1e-6, tolerances=DEFAULT_TOLERANCES):
    """
    Every value must give |trace| = 2 for the Floquet matrices of both
    periods. Returns the (E, k, trace) rows that were checked.
    """
    spec = PotentialSpec.lame(result.l)
    rows = []
    for E in result.values:
        for k in (1, 3):
            trace = integrate_floquet(spec, L, E, k, tolerances=tolerances).trace
            rows.append((E, k, trace))
            if abs(abs(trace) - 2) > tolerance:
                raise ConsistencyError('lame-floquet',
                                       'eigenvalue is not doubly periodic',
                                       extra=(E, k, trace))
    logger.info('lame l=%d: all %d eigenvalues pass the Floquet test', result.l,
                len(result.values))
    return rows


# counting function and density


def _check_domain(E, e1, e2, e3):
    if not e3 < E < e1:
        raise DomainError('E must lie in (e3, e1)', extra=(E, e3, e1))
    if E == e2:
        raise DomainError('E = e2 is excluded', extra=E)


def counting_function(E, eta, L):
    """
    Number of eigenvalues below E in the large-eta limit:
    (eta/pi)(pi - int_e2^e1 sqrt((z-E)/R)) on (e3, e2) and
    (eta/pi) int_e3^e2 sqrt((E-z)/R) on (e2, e1).
    """
    e1, e2, e3 = _real_roots(L)
    E = float(E)
    _check_domain(E, e1, e2, e3)
    if E < e2:
        value = mp.quad(lambda z: mp.sqrt((z - E) / ((e1 - z) * (z - e2) * (z - e3))),
                        [e2, e1])
        n = eta / math.pi * (math.pi - float(value))
    else:
        value = mp.quad(lambda z: mp.sqrt((E - z) / ((e1 - z) * (e2 - z) * (z - e3))),
                        [e3, e2])
        n = eta / math.pi * float(value)
    logger.debug('n(%r) = %r (eta=%r)', E, n, eta)
    return n


def _log_part(width, gap):
    # int_0^width du / sqrt(u (u + gap))
    return 2 * math.asinh(math.sqrt(width / gap))


def density(E, L):
    """
    (1/eta) dn/dE = (1/2 pi) int dz / sqrt|(e1-z)(z-e2)(z-e3)(z-E)| over the
    interval on the other side of e2. The logarithmic part coming from the
    endpoint e2 is summed in closed form and only the regular remainder is
    integrated.
    """
    e1, e2, e3 = _real_roots(L)
    E = float(E)
    for i, e in enumerate((e1, e2, e3), 1):
        if E == e:
            raise DomainError('density is singular at e%d' % i, extra=E)
    _check_domain(E, e1, e2, e3)

    def g(z):
        return 1 / mp.sqrt((e1 - z) * (z - e3))
    g0 = 1 / math.sqrt((e1 - e2) * (e2 - e3))
    if E > e2:
        lo, hi, width = e3, e2, e2 - e3
    else:
        lo, hi, width = e2, e1, e1 - e2
    gap = abs(E - e2)
    rest = mp.quad(lambda z: (g(z) - g0) / mp.sqrt(abs((E - z) * (e2 - z))), [lo, hi])
    value = (g0 * _log_part(width, gap) + float(rest)) / (2 * math.pi)
    logger.debug('density(%r) = %r', E, value)
    return value


def density_asymptotic_e2(E, L):
    e1, e2, e3 = _real_roots(L)
    a, b = e1 - e2, e2 - e3
    return (math.log(16 * a * b / ((e1 - e3) * abs(E - e2))) /
            (2 * math.pi * math.sqrt(a * b)))


def density_degenerate(E, L):
    """Power-law density 1 / (2 sqrt((e1 - e2)(E - e2))) of the limit e2 = e3."""
    e1, e2, _ = _real_roots(L)
    if not e2 < E < e1:
        raise DomainError('E must lie in (e2, e1)', extra=E)
    return 1 / (2 * math.sqrt((e1 - e2) * (E - e2)))


def pi_identities(L):
    """Both arcsine integrals over (e3, e2) and (e2, e1); each equals pi."""
    e1, e2, e3 = _real_roots(L)
    lower = mp.quad(lambda z: 1 / mp.sqrt((e2 - z) * (z - e3)), [e3, e2])
    upper = mp.quad(lambda z: 1 / mp.sqrt((e1 - z) * (z - e2)), [e2, e1])
    return float(lower), float(upper)


def profile_point(E, L, eta=1.0):
    return counting_function(E, eta, L), density(E, L)


def profile_grid(L, count):
    """`count` cell midpoints of (e3, e1), dropping any that falls on e2."""
    e1, e2, e3 = _real_roots(L)
    step = (e1 - e3) / count
    grid = []
    for k in range(count):
        E = e3 + (k + 0.5) * step
        if abs(E - e2) <= 1e-9 * step:
            logger.debug('profile grid: skipping E=%r at e2', E)
            continue
        grid.append(E)
    return grid


def density_profile(L, count, eta=1.0):
    grid = profile_grid(L, count)
    values = [profile_point(E, L, eta) for E in grid]
    return DensityProfile(grid, [v[0] for v in values], [v[1] for v in values], eta)


# merging and comparisons


def merged_locations(values, ratio=PAIR_RATIO):
    """
    Greedy pairing of sorted neighbours closer than `ratio` times the median
    gap. Returns `(location, multiplicity)` with pairs averaged.
    """
    values = sorted(values)
    if len(values) < 2:
        return [(v, 1) for v in values]
    limit = ratio * float(np.median(np.diff(values)))
    merged = []
    i = 0
    while i < len(values):
        if i + 1 < len(values) and values[i + 1] - values[i] < limit:
            merged.append((0.5 * (values[i] + values[i + 1]), 2))
            i += 2
        else:
            merged.append((values[i], 1))
            i += 1
    singles = sum(1 for _, m in merged if m == 1)
    if singles > 1:
        logger.warning('%d unpaired eigenvalues after merging', singles)
    return merged


def _merged_normalized(l, L, eigenvalues):
    if eigenvalues is None:
        eigenvalues = lame_eigenvalues(l, L)
    return eigenvalues, [loc for loc, _ in merged_locations(eigenvalues.normalized())]


def quantization_check(l, m, L, eigenvalues=None):
    """
    Residuals of the quantization conditions at the m-th merged location
    from the top and from the bottom. On the upper branch
    int_e3^e2 sqrt((E-z)/R) = pi - m pi / eta is n(E) = eta - m, so both
    residuals are read off the counting function as (pi/eta)|n - target|.
    """
    if not 1 <= m <= l:
        raise ConfigError('m must lie in [1, l]', extra=(m, l))
    eigenvalues, locations = _merged_normalized(l, L, eigenvalues)
    if m > len(locations):
        raise ConfigError('only %d merged locations' % len(locations), extra=m)
    eta = eigenvalues.eta
    e1, e2, e3 = _real_roots(L)

    def residual(E, target):
        E = min(max(E, e3 + 1e-12), e1 - 1e-12)
        if E == e2:
            E = e2 + 1e-12
        return math.pi / eta * abs(counting_function(E, eta, L) - target)
    E_top, E_bottom = locations[-m], locations[m - 1]
    result = QuantizationResidual(residual(E_top, eta - m), residual(E_bottom, m),
                                  E_top, E_bottom)
    logger.info('quantization l=%d m=%d: top %.3g bottom %.3g', l, m, result.top, result.bottom)
    return result


def gap_midpoints(locations, L, exclusion=0.05):
    e1, e2, e3 = _real_roots(L)
    margin = exclusion * (e1 - e3)
    mids = [0.5 * (a + b) for a, b in zip(locations, locations[1:])]
    return [E for E in mids if e3 < E < e1 and abs(E - e2) > margin]


def _pick(items, count):
    if len(items) <= count:
        return list(items)
    step = (len(items) - 1) / float(count - 1)
    return [items[int(round(k * step))] for k in range(count)]


def _snapped_edges(mids, L, bins):
    e1, e2, e3 = _real_roots(L)
    edges = [e3]
    for k in range(1, bins):
        target = e3 + k * (e1 - e3) / bins
        snapped = min(mids, key=lambda E: abs(E - target))
        if snapped > edges[-1]:
            edges.append(snapped)
    edges.append(e1)
    return edges


def empirical_vs_wkb(l, L, E_probes=None, bins=20, eigenvalues=None):
    """
    Raw eigenvalue counts of l(l+1) wp against 2 n(E) (each WKB location
    carries a merged pair) at `E_probes`, default 9 gap midpoints, and a
    histogram comparison over `bins` bins whose inner edges are moved to the
    nearest gap midpoint. The bin containing e2 is left out.
    """
    if l < 20:
        raise ConfigError('the WKB comparison needs l >= 20', extra=l)
    eigenvalues, locations = _merged_normalized(l, L, eigenvalues)
    normalized = np.array(eigenvalues.normalized())
    eta = eigenvalues.eta
    e1, e2, e3 = _real_roots(L)
    all_mids = [0.5 * (a + b) for a, b in zip(locations, locations[1:])
                if e3 < 0.5 * (a + b) < e1 and 0.5 * (a + b) != e2]
    if E_probes is None:
        E_probes = _pick(gap_midpoints(locations, L), 9)
    raw = [int(np.sum(normalized < E)) for E in E_probes]
    wkb = [2 * counting_function(E, eta, L) for E in E_probes]
    deviation = max(abs(r - w) for r, w in zip(raw, wkb)) if E_probes else 0.0

    edges = _snapped_edges(all_mids, L, bins)
    counts = np.histogram(normalized, bins=[-np.inf] + edges[1:-1] + [np.inf])[0]
    n_edges = [0.0] + [counting_function(E, eta, L) for E in edges[1:-1]] + [eta]
    rows, worst = [], 0.0
    for k, count in enumerate(counts):
        lo, hi = edges[k], edges[k + 1]
        expected = 2 * (n_edges[k + 1] - n_edges[k])
        if lo < e2 < hi or e2 in (lo, hi):
            continue
        error = abs(count - expected) / expected
        worst = max(worst, error)
        rows.append((lo, hi, int(count), expected))
    report = WkbComparison(l, list(E_probes), raw, wkb, deviation, rows, worst)
    logger.info('wkb comparison l=%d: max deviation %.3g, histogram error %.3g over %d bins',
                l, deviation, worst, len(rows))
    return report
