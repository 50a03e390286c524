"""
Weierstrass functions from half-periods, evaluated through Jacobi theta
series in the nome q = exp(i pi tau), tau = omega3 / omega1.

Arguments are reduced to the period parallelogram centred at 0 before the
series is summed; quasi-periodicity restores zeta and sigma.
"""
from collections import namedtuple
import cmath
import logging
import math

from mpmath import mp

from .exceptions import LatticeError, PoleError
from .settings import DEFAULT_TOLERANCES


logger = logging.getLogger(__name__)

_PI = math.pi


class _Frame(namedtuple('_Frame', 'w1 w3 q th2 th3 th4 dth1 eta1 eta3')):
    """Basis the theta series are summed in, possibly reduced from the user's."""
    __slots__ = ()


def _make_frame(omega1, omega3):
    w1, w3 = complex(omega1), complex(omega3)
    tau = w3 / w1
    # unimodular moves keep the lattice, only the basis changes
    for _ in range(64):
        n = round(tau.real)
        if n:
            w3 -= n * w1
            tau = w3 / w1
        if abs(cmath.exp(1j * _PI * tau)) <= 0.5 or abs(tau) >= 1.0 - 1e-15:
            break
        w1, w3 = w3, -w1
        tau = w3 / w1
    q = cmath.exp(1j * _PI * tau)
    th2 = mp.jtheta(2, 0, q)
    th3 = mp.jtheta(3, 0, q)
    th4 = mp.jtheta(4, 0, q)
    dth1 = mp.jtheta(1, 0, q, 1)
    d3th1 = mp.jtheta(1, 0, q, 3)
    eta1 = complex(-_PI ** 2 * d3th1 / (12 * w1 * dth1))
    eta3 = (eta1 * w3 - _PI * 0.5j) / w1
    logger.debug('theta frame: w1=%r w3=%r |q|=%.3g', w1, w3, abs(q))
    return _Frame(w1, w3, q, th2, th3, th4, dth1, eta1, eta3)


def _reduce(x, w1, w3):
    a_vec, b_vec = 2 * w1, 2 * w3
    x = complex(x)
    a = (x * b_vec.conjugate()).imag / (a_vec * b_vec.conjugate()).imag
    b = (x * a_vec.conjugate()).imag / (b_vec * a_vec.conjugate()).imag
    m, n = int(round(a)), int(round(b))
    return x - m * a_vec - n * b_vec, m, n


def _frame_reduce(frame, x):
    return _reduce(x, frame.w1, frame.w3)


def _check_pole(frame, x, x_red, tolerances):
    if abs(x_red) <= tolerances.lattice * abs(frame.w1):
        raise PoleError.make(x, x - x_red)


def _frame_wp_pair(frame, x_red):
    k = _PI / (2 * frame.w1)
    v = k * x_red
    q = frame.q
    t1 = mp.jtheta(1, v, q)
    t2 = mp.jtheta(2, v, q)
    dt1 = mp.jtheta(1, v, q, 1)
    dt2 = mp.jtheta(2, v, q, 1)
    c = k * frame.th3 * frame.th4
    ratio = t2 / t1
    e1 = (_PI ** 2 / (12 * frame.w1 ** 2)) * (frame.th3 ** 4 + frame.th4 ** 4)
    value = e1 + (c * ratio) ** 2
    prime = c ** 2 * k * 2 * ratio * (dt2 * t1 - t2 * dt1) / t1 ** 2
    return complex(value), complex(prime)


def _frame_zeta(frame, x, tolerances):
    x_red, m, n = _frame_reduce(frame, x)
    _check_pole(frame, x, x_red, tolerances)
    k = _PI / (2 * frame.w1)
    v = k * x_red
    core = frame.eta1 * x_red / frame.w1 + k * complex(mp.jtheta(1, v, frame.q, 1) /
                                                       mp.jtheta(1, v, frame.q))
    return core + 2 * m * frame.eta1 + 2 * n * frame.eta3


def _frame_sigma(frame, x):
    x_red, m, n = _frame_reduce(frame, x)
    k = _PI / (2 * frame.w1)
    core = complex((2 * frame.w1 / _PI) * mp.exp(frame.eta1 * x_red ** 2 / (2 * frame.w1)) *
                   mp.jtheta(1, k * x_red, frame.q) / frame.dth1)
    if not (m or n):
        return core
    shift = 2 * m * frame.eta1 + 2 * n * frame.eta3
    sign = -1 if (m + n + m * n) % 2 else 1
    return sign * core * cmath.exp(shift * (x_red + m * frame.w1 + n * frame.w3))


class Lattice(namedtuple('Lattice', 'omega1 omega3 tau nome e1 e2 e3 g2 g3 eta1 eta3 frame')):
    """
    Period lattice 2 omega1 Z + 2 omega3 Z with its half-period values,
    invariants and quasi-periods. Build with `lattice_from_periods`.
    """
    __slots__ = ()

    @property
    def omega2(self):
        return -self.omega1 - self.omega3

    def omega(self, i):
        return (0j, self.omega1, self.omega2, self.omega3)[i]

    def e(self, i):
        return (None, self.e1, self.e2, self.e3)[i]

    def eta(self, i):
        return {1: self.eta1, 2: -self.eta1 - self.eta3, 3: self.eta3}[i]

    def is_rectangular(self, tol=1e-12):
        w1, w3 = self.omega1, self.omega3
        return (w1.real > 0 and abs(w1.imag) <= tol * abs(w1) and
                w3.imag > 0 and abs(w3.real) <= tol * abs(w3))

    def symbol_values(self):
        """Values for the symbolic variables e1, e2, g2, g3."""
        return {'e1': self.e1, 'e2': self.e2, 'g2': self.g2, 'g3': self.g3}

    def to_json(self):
        out = {}
        for name in ('omega1', 'omega3', 'tau', 'nome', 'e1', 'e2', 'e3', 'g2', 'g3',
                     'eta1', 'eta3'):
            value = complex(getattr(self, name))
            out[name] = [value.real, value.imag]
        return out


def lattice_from_periods(omega1, omega3):
    omega1, omega3 = complex(omega1), complex(omega3)
    if omega1 == 0:
        raise LatticeError('omega1 must be nonzero', (omega1, omega3))
    tau = omega3 / omega1
    if tau.imag <= 0:
        raise LatticeError('Im(omega3/omega1) must be positive', tau)
    frame = _make_frame(omega1, omega3)
    tol = DEFAULT_TOLERANCES
    e = []
    for w in (omega1, -omega1 - omega3, omega3):
        x_red, _, _ = _frame_reduce(frame, w)
        e.append(_frame_wp_pair(frame, x_red)[0])
    e1, e2, e3 = e
    g2 = -4 * (e1 * e2 + e2 * e3 + e3 * e1)
    g3 = 4 * e1 * e2 * e3
    eta1 = _frame_zeta(frame, omega1, tol)
    eta3 = _frame_zeta(frame, omega3, tol)
    lattice = Lattice(omega1, omega3, tau, cmath.exp(1j * _PI * tau),
                      e1, e2, e3, g2, g3, eta1, eta3, frame)
    logger.info('lattice (%r, %r): e=(%.6g, %.6g, %.6g) g2=%.8g g3=%.8g',
                omega1, omega3, e1.real, e2.real, e3.real, g2.real, g3.real)
    return lattice


def reduce_to_cell(x, L):
    """`(x_red, m, n)` with `x = x_red + 2 m omega1 + 2 n omega3`, x_red nearest 0."""
    return _reduce(x, L.omega1, L.omega3)


def wp_pair(x, L, tolerances=DEFAULT_TOLERANCES):
    """`(wp(x), wp'(x))` from one series evaluation."""
    x_red, _, _ = _frame_reduce(L.frame, x)
    _check_pole(L.frame, x, x_red, tolerances)
    return _frame_wp_pair(L.frame, x_red)


def wp(x, L, tolerances=DEFAULT_TOLERANCES):
    return wp_pair(x, L, tolerances)[0]


def wp_prime(x, L, tolerances=DEFAULT_TOLERANCES):
    return wp_pair(x, L, tolerances)[1]


def wp_second(x, L, tolerances=DEFAULT_TOLERANCES):
    value = wp(x, L, tolerances)
    return 6 * value ** 2 - L.g2 / 2


def zeta_w(x, L, tolerances=DEFAULT_TOLERANCES):
    return _frame_zeta(L.frame, x, tolerances)


def sigma_w(x, L):
    return _frame_sigma(L.frame, x)


def wp_shifted(value, i, L):
    """wp(x + omega_i) from value = wp(x), by the half-period addition identity."""
    if i == 0:
        return value
    ei = L.e(i)
    ej, ek = [L.e(j) for j in (1, 2, 3) if j != i]
    return ei + (ei - ej) * (ei - ek) / (value - ei)


def wp_inverse(value, L, prime=None, tolerances=DEFAULT_TOLERANCES):
    """
    A point x with wp(x) = value. The Carlson integral R_F gives a first
    guess which is polished by Newton steps; with `prime` given the sign of
    x is chosen so that wp'(x) matches it.
    """
    value = complex(value)
    for i in (1, 2, 3):
        if abs(value - L.e(i)) <= tolerances.identity * max(1.0, abs(value)):
            return L.omega(i)
    x = complex(mp.elliprf(value - L.e1, value - L.e2, value - L.e3))
    x = _newton_wp(x, value, L, tolerances)
    if x is None:
        x = _seeded_wp_inverse(value, L, tolerances)
    if prime is not None:
        p = wp_prime(x, L, tolerances)
        if abs(p - prime) > abs(-p - prime):
            x = -x
    return x


def _newton_wp(x, value, L, tolerances, steps=30):
    scale = max(1.0, abs(value))
    for _ in range(steps):
        try:
            f, fp = wp_pair(x, L, tolerances)
        except PoleError:
            return None
        err = f - value
        if abs(err) <= 1e-14 * scale:
            return x
        if fp == 0:
            return None
        x = x - err / fp
    f = wp(x, L, tolerances)
    return x if abs(f - value) <= tolerances.identity * scale else None


def _seeded_wp_inverse(value, L, tolerances):
    logger.debug('wp_inverse: R_F guess failed for %r, seeding a grid', value)
    best, best_err = None, None
    for a in range(1, 8):
        for b in range(1, 8):
            seed = (2 * a / 8.0 - 1) * L.omega1 + (2 * b / 8.0 - 1) * L.omega3
            try:
                err = abs(wp(seed, L, tolerances) - value)
            except PoleError:
                continue
            if best_err is None or err < best_err:
                best, best_err = seed, err
    x = _newton_wp(best, value, L, tolerances, steps=60)
    if x is None:
        raise LatticeError('wp_inverse did not converge', value)
    return x


def reduce_quasi(x, L):
    """`x` modulo the quasi-period lattice 2 eta1 Z + 2 eta3 Z."""
    return _reduce(x, L.eta1, L.eta3)[0]
