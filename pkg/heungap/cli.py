"""
Command line front end. Every computation is a subcommand; output is
text, JSON or CSV (plot-ready columns).

    heungap xi --l 2,0,0,0
    heungap --format csv bands --l 1,0,0,0 --lattice 1,1i --grid 400
    heungap --jobs 4 density --lattice 1,1i --grid 200
    heungap check --quick
"""
from collections import namedtuple
from functools import partial
import argparse
import json
import logging
import math
import os
import shlex
import sys

from . import __version__
from .elliptic import lattice_from_periods
from .exceptions import (ConfigError, ConsistencyError, HeungapError, LatticeError,
                         ScanError, UnexpectedTokenError)
from .fingap import (CheckReport, PotentialSpec, build_A, compute_q, compute_xi,
                     delta_condition, solve_delta_condition, spectral_curve_roots,
                     verify_burchnall_chaundy, verify_commutation)
from .monodromy import (band_trace, bloch_branch, classify_band, hk_example_l1,
                        hk_example_l2, hk_multiplier, integrate_floquet, monodromy_hyperelliptic,
                        reduction_check, three_way_agreement)
from .parser import parse_complex, parse_int_list, parse_lattice, parse_range
from .settings import Tolerances
from .spectrum import (density, density_asymptotic_e2, empirical_vs_wkb, lame_eigenvalues,
                       profile_grid, profile_point, validate_lame)
from .utils import dump_csv, dump_json, grid_map, save_to_name_list
from .wkb import (bridge_residual, large_e_terms, monodromy_asymptotics, verify_riccati,
                  wkb_terms)


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_CONSISTENCY = 3

FORMATS = ('text', 'json', 'csv')

_GOLDEN_DIR = os.path.join(os.path.dirname(__file__), 'golden')
_SCHEMA_DIR = os.path.join(os.path.dirname(__file__), 'schemas')

_CONFIG_FIELDS = ('lattice', 'l', 'M', 'deltas', 'E', 'range', 'grid')
_GLOBAL_FIELDS = ('format', 'jobs', 'tol', 'verbose', 'command', 'handler')


def golden_text(name):
    with open(os.path.join(_GOLDEN_DIR, name + '.txt')) as f:
        return f.read().rstrip('\n')


def golden_thresholds():
    with open(os.path.join(_GOLDEN_DIR, 'thresholds.json')) as f:
        return json.load(f)


def schema_path(command):
    return os.path.join(_SCHEMA_DIR, command + '.json')


def _real(value):
    value = complex(value)
    if value.imag:
        raise ConfigError('a real value is needed', extra=value)
    return value.real


def _flag(name):
    return '--' + name.replace('_', '-')


def _arg(name, value):
    value = str(value)
    # a leading minus would read as an option
    if value.startswith('-'):
        return '%s=%s' % (_flag(name), value)
    return '%s %s' % (_flag(name), value)


class RunConfig(namedtuple('RunConfig', 'command lattice l M deltas E range grid '
                                        'format jobs tol options')):
    """
    One invocation: the shared literals as their command line text plus the
    command specific `options`, a sorted tuple of (name, value) pairs.
    `render` gives canonical argv text and `parse` reads it back.
    """
    __slots__ = ()

    @staticmethod
    def from_namespace(ns):
        values = vars(ns)
        known = dict((name, values.get(name)) for name in _CONFIG_FIELDS)
        options = tuple(sorted((k, v) for k, v in values.items()
                               if k not in _CONFIG_FIELDS and k not in _GLOBAL_FIELDS
                               and v is not None and v is not False))
        return RunConfig(ns.command, format=ns.format, jobs=ns.jobs, tol=ns.tol,
                         options=options, **known)

    @staticmethod
    def parse(text):
        return RunConfig.from_namespace(build_parser().parse_args(shlex.split(text)))

    def render(self):
        parts = []
        if self.format != 'text':
            parts.append(_arg('format', self.format))
        if self.jobs != 1:
            parts.append(_arg('jobs', self.jobs))
        if self.tol:
            parts.append(_arg('tol', self.tol))
        parts.append(self.command)
        for name in _CONFIG_FIELDS:
            value = getattr(self, name)
            if value is not None:
                parts.append(_arg(name, value))
        for name, value in self.options:
            parts.append(_flag(name) if value is True else _arg(name, value))
        return ' '.join(parts)

    def option(self, name, default=None):
        return dict(self.options).get(name, default)

    def tolerances(self):
        tol = Tolerances.from_env()
        if self.tol:
            tol = tol.replace(**Tolerances.parse_overrides(self.tol))
        return tol

    def lattice_value(self):
        if self.lattice is None:
            raise ConfigError('--lattice is required for %s' % self.command)
        return lattice_from_periods(*parse_lattice(self.lattice))

    def potential(self):
        if self.l is None:
            raise ConfigError('--l is required for %s' % self.command)
        l = parse_int_list(self.l, 4)
        M = self.M or 0
        deltas = ()
        if self.deltas:
            deltas = tuple(complex(parse_complex(d)) for d in self.deltas.split(';'))
        return PotentialSpec(l, M, deltas)

    def lame_l(self):
        if self.l is None:
            raise ConfigError('--l is required for %s' % self.command)
        return parse_int_list(self.l, 1)[0]

    def energies(self, default=None):
        if self.E is not None:
            return [_real(parse_complex(x)) for x in self.E.split(';')]
        if self.range is not None:
            lo, hi, count = parse_range(self.range)
            if count == 1:
                return [lo]
            return [lo + (hi - lo) * k / (count - 1) for k in range(count)]
        if default is None:
            raise ConfigError('--E or --range is required for %s' % self.command)
        return default


class Output(namedtuple('Output', 'data header rows text ok')):
    __slots__ = ()


def emit(output, fmt, stream):
    if fmt == 'json':
        stream.write(dump_json(output.data) + '\n')
    elif fmt == 'csv':
        if output.header is None:
            raise ConfigError('no CSV form for this command', extra=FORMATS)
        stream.write(dump_csv(output.header, output.rows))
    else:
        stream.write(output.text + '\n')


# symbolic commands


def _xi(config):
    spec = config.potential()
    if config.option('numeric'):
        L = config.lattice_value()
        E = config.energies()[0]
        return compute_xi(spec, 'numeric', L, E, config.tolerances())
    return compute_xi(spec)


def cmd_xi(config):
    xi = _xi(config)
    return Output(xi.to_json(), None, None, xi.render(), True)


def cmd_qpoly(config):
    xi = compute_xi(config.potential())
    Q = compute_q(xi)
    text = Q.render()
    if config.lattice is not None:
        Q = Q.with_edges(config.lattice_value())
        text += '\nedges: ' + ', '.join('%.12g' % e for e in Q.band_edges)
    return Output(Q.to_json(), None, None, text, True)


def cmd_opA(config):
    A = build_A(compute_xi(config.potential()))
    return Output(A.to_json(), None, None, A.render(), True)


# monodromy commands


def _default_band_range(spec, L, count):
    size = sum(spec.strengths()) * max(abs(L.e(i)) for i in (1, 2, 3)) + 1.0
    return [-size + 2 * size * k / (count - 1) for k in range(count)]


def _third_trace(spec, L, tolerances, E):
    return integrate_floquet(spec, L, E, 3, tolerances=tolerances).trace.real


def cmd_bands(config):
    spec = config.potential()
    L = config.lattice_value()
    tol = config.tolerances()
    grid = config.energies(default=_default_band_range(spec, L, config.grid or 200))
    traces = grid_map(partial(band_trace, spec, L, tolerances=tol), grid, config.jobs)
    points, edges = classify_band(spec, L, grid, traces, tol)
    if config.option('third'):
        thirds = grid_map(partial(_third_trace, spec, L, tol),
                          [p.E for p in points + edges], config.jobs)
        merged = [p._replace(trace3=t) for p, t in zip(points + edges, thirds)]
    else:
        merged = points + edges
    merged.sort(key=lambda p: p.E)
    rows = [(p.E, p.trace1, '' if p.trace3 is None else p.trace3, p.kind) for p in merged]
    data = {'l': list(spec.l), 'lattice': config.lattice,
            'points': [p.to_json() for p in points], 'edges': [p.to_json() for p in edges]}
    text = '\n'.join('%-18s %.12g' % (e.kind, e.E) for e in edges) or 'no band edges'
    return Output(data, ('E', 'trace1', 'trace3', 'kind'), rows, text, True)


def _monodromy_point(spec, L, method, tolerances, E):
    rows = []
    if method in ('floquet', 'all'):
        for k in (1, 3):
            m = integrate_floquet(spec, L, E, k, tolerances=tolerances).multiplier
            rows.append((E, k, m.real, m.imag, 'floquet'))
    if method == 'floquet':
        return rows
    # the hyperelliptic and hk rows follow the Bloch branch s = sqrt(-Q(E))
    xi = compute_xi(spec)
    Q = compute_q(xi)
    s = bloch_branch(Q, L, E)
    if method in ('hyperelliptic', 'all'):
        for k in (1, 3):
            m = monodromy_hyperelliptic(xi, Q, L, E, k, s=s, tolerances=tolerances)
            rows.append((E, k, m.real, m.imag, 'hyperelliptic'))
    if method in ('hk', 'all'):
        if spec.l not in ((1, 0, 0, 0), (2, 0, 0, 0)):
            raise ConfigError('the closed Hermite-Krichever forms cover l0 = 1, 2',
                              extra=spec.render())
        hk = hk_example_l1(E, L, s=s) if spec.l[0] == 1 else hk_example_l2(E, L, s=s)
        for k in (1, 3):
            m = hk_multiplier(hk, L, k)
            rows.append((E, k, m.real, m.imag, 'hk'))
    return rows


def _agreement_point(spec, L, tolerances, E):
    return three_way_agreement(spec, L, E, tolerances=tolerances)


def cmd_monodromy(config):
    spec = config.potential()
    L = config.lattice_value()
    tol = config.tolerances()
    energies = config.energies()
    method = config.option('method', 'floquet')
    per_point = grid_map(partial(_monodromy_point, spec, L, method, tol), energies,
                         config.jobs)
    rows = [row for part in per_point for row in part]
    data = {'l': list(spec.l), 'lattice': config.lattice,
            'rows': [dict(zip(('E', 'k', 're_mult', 'im_mult', 'method'), r)) for r in rows]}
    lines = ['%.12g k=%d %s %r' % (r[0], r[1], r[4], complex(r[2], r[3])) for r in rows]
    ok = True
    if config.option('check_three_way'):
        per_energy = grid_map(partial(_agreement_point, spec, L, tol), energies, config.jobs)
        reports = [r for part in per_energy for r in part]
        ok = all(r.ok for r in reports)
        data['agreement'] = [r.to_json() for r in reports]
        lines.extend('%s E=%.12g k=%d hyperelliptic %.3g hk %.3g routes %.3g' %
                     ('agree' if r.ok else 'DISAGREE', r.E, r.k, r.diff_hyperelliptic,
                      r.diff_hk, r.diff_routes)
                     for r in reports)
    return Output(data, ('E', 'k', 're_mult', 'im_mult', 'method'), rows, '\n'.join(lines), ok)


def _generic_energies(L):
    root = math.sqrt(3 * L.g2.real)
    roots = sorted([-root, root] + [3 * L.e(i).real for i in (1, 2, 3)])
    mids = [0.5 * (a + b) for a, b in zip(roots, roots[1:])]
    return mids + [roots[-1] + 1.0]


def cmd_reduction(config):
    L = config.lattice_value()
    tol = config.tolerances()
    energies = config.energies(default=_generic_energies(L))
    reports = grid_map(partial(reduction_check, L=L, tolerances=tol), energies, config.jobs)
    rows = [(r.E, r.diff_first, r.diff_second, r.ok) for r in reports]
    text = '\n'.join('%s E=%.12g first %.3g second %.3g' %
                     ('ok' if r.ok else 'FAILED', r.E, r.diff_first, r.diff_second)
                     for r in reports)
    return Output({'lattice': config.lattice, 'reports': [r.to_json() for r in reports]},
                  ('E', 'diff_first', 'diff_second', 'ok'), rows, text,
                  all(r.ok for r in reports))


# spectrum and wkb commands


def cmd_lame(config):
    result = lame_eigenvalues(config.lame_l(), config.lattice_value(),
                              validate=bool(config.option('validate')),
                              tolerances=config.tolerances())
    text = '\n'.join('%.12g %s' % (v, f) for v, f in zip(result.values, result.families))
    data = {'l': result.l, 'values': result.values, 'families': result.families}
    return Output(data, ('l', 'E', 'family'), result.rows(), text, True)


def cmd_density(config):
    L = config.lattice_value()
    eta = float(_real(parse_complex(config.option('eta', '1'))))
    grid = profile_grid(L, config.grid or 200)
    values = grid_map(partial(profile_point, L=L, eta=eta), grid, config.jobs)
    rows = [(E, n, d) for E, (n, d) in zip(grid, values)]
    data = {'lattice': config.lattice, 'eta': eta,
            'E': grid, 'n': [r[1] for r in rows], 'density': [r[2] for r in rows]}
    text = '\n'.join('%.12g %.12g %.12g' % r for r in rows)
    return Output(data, ('E', 'n', 'density'), rows, text, True)


def cmd_wkb(config):
    count = config.option('terms', 4)
    if count < 2:
        raise ConfigError('--terms must be at least 2', extra=count)
    # --terms N renders S_-1 .. S_(N-3)
    series = wkb_terms(max(count - 3, 0))
    terms = [(j, series.term(j).render()) for j in range(-1, count - 2)]
    data = {'S': [{'j': j, 'text': t} for j, t in terms]}
    lines = ['S_%d = %s' % item for item in terms]
    large = config.option('large_e')
    if large:
        l = config.lame_l() if config.l is not None else None
        psi = large_e_terms(l, large)
        data['psi'] = [{'j': j, 'text': psi.term(j).render()} for j in range(1, large + 1)]
        lines.extend(psi.render())
    return Output(data, ('j', 'text'), terms, '\n'.join(lines), True)


# the acceptance suite


def _named(report, suffix):
    return report._replace(name='%s[%s]' % (report.name, suffix))


def _square():
    return lattice_from_periods(1, 1j)


def _compare(name, got, want):
    return CheckReport(name, got == want, None if got == want else got, {'expected': want})


def check_symbolic(quick):
    xi1 = compute_xi(PotentialSpec.lame(1))
    xi2 = compute_xi(PotentialSpec.lame(2))
    return [
        _compare('xi_l2', xi2.render(), golden_text('xi_l2')),
        _compare('q_l2', compute_q(xi2).render(), golden_text('q_l2')),
        _compare('a_l2', build_A(xi2).render(), golden_text('a_l2')),
        _compare('q_l1', compute_q(xi1).render(), golden_text('q_l1')),
    ]


def check_commutation(quick):
    out = []
    for l in ((0, 0, 0, 0), (1, 0, 0, 0), (2, 0, 0, 0), (1, 1, 0, 0)):
        spec = PotentialSpec(l)
        xi = compute_xi(spec)
        A = build_A(xi)
        label = spec.render()
        out.append(_named(verify_commutation(A, spec), label))
        out.append(_named(verify_burchnall_chaundy(A, compute_q(xi), spec), label))
    return out


def _gap_samples(roots, count):
    gaps = [(roots[0] - 1.0, roots[0])]
    gaps.extend((roots[k], roots[k + 1]) for k in range(1, len(roots) - 1, 2))
    return [lo + (hi - lo) * (k + 0.5) / count for lo, hi in gaps for k in range(count)]


def check_three_way(quick):
    L = _square()
    out = []
    for l0 in (1, 2):
        spec = PotentialSpec.lame(l0)
        xi = compute_xi(spec)
        Q = compute_q(xi)
        roots = spectral_curve_roots(Q, L)
        for E in _gap_samples(roots, 2 if quick else 10):
            for report in three_way_agreement(spec, L, E, xi, Q):
                out.append(CheckReport('three-way[%d, %.6g, k=%d]' % (l0, E, report.k),
                                       report.ok, report.worst, None))
    return out


def check_band_edges(quick):
    L = _square()
    out = []
    for l0 in (1, 2):
        spec = PotentialSpec.lame(l0)
        roots = spectral_curve_roots(compute_q(compute_xi(spec)), L)
        count = 60 if quick else 200
        lo, hi = roots[0] - 1.0, roots[-1] + 1.0
        grid = [lo + (hi - lo) * k / (count - 1) for k in range(count)]
        edges = sorted(e.E for e in classify_band(spec, L, grid)[1])
        worst = max(min(abs(e - r) for e in edges) for r in roots) if edges else float('inf')
        out.append(CheckReport('edges[%d]' % l0, len(edges) == len(roots) and worst < 1e-6,
                               worst, {'edges': edges, 'roots': roots}))
        if l0 == 1:
            exact = sorted(-L.e(i).real for i in (1, 2, 3))
            dev = max(abs(a - b) for a, b in zip(edges, exact)) if len(edges) == 3 else None
            out.append(CheckReport('edges-exact[1]', dev is not None and dev < 1e-8, dev,
                                   None))
    return out


def check_reduction(quick):
    L = _square()
    out = []
    for E in _generic_energies(L):
        report = reduction_check(E, L)
        hk = hk_example_l2(E, L)
        diff = abs(report.xi - hk.wp_alpha)
        out.append(CheckReport('reduction[%.6g]' % E, report.ok and diff < 1e-8,
                               max(report.diff_first, report.diff_second, diff), None))
    return out


def lame_floquet_reports(L, degrees):
    """Floquet validation of the Lame eigenvalues, one report per degree."""
    out = []
    for l in degrees:
        result = lame_eigenvalues(l, L)
        try:
            rows = validate_lame(result, L)
        except ConsistencyError as exc:
            details = {'invariant': exc.invariant, 'message': exc.message}
            out.append(CheckReport('lame-floquet[%d]' % l, False, None, details))
        else:
            worst = max(abs(abs(trace) - 2) for _, _, trace in rows)
            out.append(CheckReport('lame-floquet[%d]' % l, True, worst, None))
    return out


def check_spectrum(quick):
    limits = golden_thresholds()
    L = _square()
    e1, e2 = L.e1.real, L.e2.real
    out = lame_floquet_reports(L, range(1, 4 if quick else 9))
    lame = lame_eigenvalues(60, L)
    out.append(CheckReport('lame-count', len(lame.values) == 121, len(lame.values), None))
    report = empirical_vs_wkb(60, L, eigenvalues=lame)
    out.append(CheckReport('wkb-count', report.max_deviation <= limits['count_deviation'],
                           report.max_deviation, {'probes': len(report.probes)}))
    if not quick:
        report = empirical_vs_wkb(100, L)
        out.append(CheckReport('histogram',
                               report.max_relative_error <= limits['histogram_error'],
                               report.max_relative_error, {'bins': len(report.bins)}))
    E = e2 + 1e-3 * (e1 - e2)
    ratio = density(E, L) / density_asymptotic_e2(E, L)
    out.append(CheckReport('density-asymptotic', abs(ratio - 1) <= limits['density_ratio'],
                           ratio, None))
    return out


def _s_golden(j):
    return 's_m1' if j < 0 else 's_%d' % j


def check_wkb(quick):
    series = wkb_terms(8)
    out = [_compare('S_%d' % j, series.term(j).render(), golden_text(_s_golden(j)))
           for j in (-1, 0, 1)]
    out.append(verify_riccati(series, 8))
    increments = monodromy_asymptotics(large_e_terms(None, 4))
    by_power = dict((inc.power, inc) for inc in increments)
    ctx = increments[0].omega.context
    Lv, g2 = ctx.var('L'), ctx.var('g2')
    expected = {
        1: (ctx.constant(2), ctx.constant(0)),
        -1: (ctx.constant(0), -Lv),
        -3: (-Lv * Lv * g2 / 48, ctx.constant(0)),
    }
    for power, (omega, eta) in sorted(expected.items()):
        inc = by_power[power]
        ok = inc.omega == omega and inc.eta == eta
        out.append(CheckReport('increment[%d]' % power, ok, None if ok else
                               (inc.omega.render(), inc.eta.render()), None))
    if not quick:
        L = _square()
        low, high = bridge_residual(2, L, 8.0), bridge_residual(2, L, 16.0)
        ratio = low / high
        out.append(CheckReport('bridge', 16 <= ratio <= 64, ratio,
                               {'eta8': low, 'eta16': high}))
    return out


def check_delta(quick):
    L = _square()
    out = []
    for l in ((0, 0, 0, 0), (1, 0, 0, 0)):
        delta = solve_delta_condition(l, L)
        residual = abs(delta_condition(delta, l, L))
        xi = compute_xi(PotentialSpec(l, 1, (delta,)), 'numeric', L, 1.7)
        label = ','.join(str(x) for x in l)
        out.append(CheckReport('delta[%s]' % label, residual < 1e-10, residual,
                               {'delta': [delta.real, delta.imag]}))
        out.append(CheckReport('xi-numeric[%s]' % label, xi.residual < 1e-8, xi.residual,
                               None))
    return out


CHECKS = (
    ('symbolic', check_symbolic),
    ('commutation', check_commutation),
    ('three_way', check_three_way),
    ('band_edges', check_band_edges),
    ('reduction', check_reduction),
    ('spectrum', check_spectrum),
    ('wkb', check_wkb),
    ('delta', check_delta),
)


def run_checks(quick=False, only=None):
    summary = {}
    ok = True
    for group, func in CHECKS:
        if only and group not in only:
            continue
        try:
            reports = func(quick)
        except HeungapError as exc:
            reports = [CheckReport('error', False, str(exc), None)]
        for report in reports:
            ok = ok and bool(report.ok)
            save_to_name_list(summary, (group, report.name), report.to_json())
        logger.info('check %s: %d reports', group, len(reports))
    return ok, summary


def cmd_check(config):
    only = config.option('only')
    only = set(only.split(',')) if only else None
    ok, summary = run_checks(bool(config.option('quick')), only)
    lines = []
    for group in sorted(summary):
        for name, report in sorted(summary[group].items()):
            lines.append('%s %s.%s' % ('PASS' if report['ok'] else 'FAIL', group, name))
    return Output({'ok': ok, 'checks': summary}, None, None, '\n'.join(lines), ok)


# argument parsing


def _add_shared(parser, names):
    if 'lattice' in names:
        parser.add_argument('--lattice', help='half-periods "omega1,omega3", e.g. 1,1i')
    if 'l' in names:
        parser.add_argument('--l', help='coefficients l0,l1,l2,l3 (lame: the integer l)')
    if 'M' in names:
        parser.add_argument('--M', type=int, help='number of apparent-singularity pairs')
    if 'deltas' in names:
        parser.add_argument('--deltas', help='";"-separated delta values')
    if 'E' in names:
        parser.add_argument('--E', help='";"-separated real energies')
    if 'range' in names:
        parser.add_argument('--range', help='energy range lo:hi:count')
    if 'grid' in names:
        parser.add_argument('--grid', type=int, help='number of grid points')


def _xi_args(parser):
    parser.add_argument('--numeric', action='store_true',
                        help='solve at the given --lattice and --E')


def _bands_args(parser):
    parser.add_argument('--third', action='store_true', help='add the omega3 trace column')


def _monodromy_args(parser):
    parser.add_argument('--method', choices=('floquet', 'hyperelliptic', 'hk', 'all'))
    parser.add_argument('--check-three-way', action='store_true', dest='check_three_way')


def _lame_args(parser):
    parser.add_argument('--validate', action='store_true',
                        help='check each eigenvalue with the Floquet matrices')


def _density_args(parser):
    parser.add_argument('--eta', help='large parameter for the counting column')


def _wkb_args(parser):
    parser.add_argument('--terms', type=int, help='N renders S_-1 .. S_(N-3)')
    parser.add_argument('--large-e', type=int, dest='large_e',
                        help='also render psi_1 .. psi_N')


def _check_args(parser):
    parser.add_argument('--quick', action='store_true')
    parser.add_argument('--only', help='comma separated check groups')


COMMANDS = {
    'xi':        (cmd_xi, ('l', 'M', 'deltas', 'lattice', 'E'), _xi_args),
    'qpoly':     (cmd_qpoly, ('l', 'lattice'), None),
    'opA':       (cmd_opA, ('l',), None),
    'bands':     (cmd_bands, ('l', 'lattice', 'E', 'range', 'grid'), _bands_args),
    'monodromy': (cmd_monodromy, ('l', 'M', 'deltas', 'lattice', 'E', 'range'),
                  _monodromy_args),
    'reduction': (cmd_reduction, ('lattice', 'E', 'range'), None),
    'lame':      (cmd_lame, ('l', 'lattice'), _lame_args),
    'density':   (cmd_density, ('lattice', 'grid'), _density_args),
    'wkb':       (cmd_wkb, ('l',), _wkb_args),
    'check':     (cmd_check, (), _check_args),
}


def build_parser():
    parser = argparse.ArgumentParser(prog='heungap',
                                     description='Finite-gap Heun and Lame computations.')
    parser.add_argument('--version', action='version', version=__version__)
    parser.add_argument('--format', choices=FORMATS, default='text')
    parser.add_argument('--jobs', type=int, default=1, help='processes for grid commands')
    parser.add_argument('--tol', help='tolerance overrides name=value,...')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True
    for name in sorted(COMMANDS):
        handler, shared, extra = COMMANDS[name]
        cmd = sub.add_parser(name, help=(handler.__doc__ or name).strip().split('\n')[0])
        _add_shared(cmd, shared)
        if extra is not None:
            extra(cmd)
        cmd.set_defaults(handler=handler)
    return parser


def _configure_logging(verbose):
    if not verbose:
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    root = logging.getLogger('heungap')
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose > 1 else logging.INFO)


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ns = build_parser().parse_args(argv)
    _configure_logging(ns.verbose)
    try:
        config = RunConfig.from_namespace(ns)
        output = ns.handler(config)
        emit(output, config.format, stdout)
    except (ScanError, UnexpectedTokenError, ConfigError, LatticeError) as exc:
        stderr.write('%s\n' % exc)
        return EXIT_CONFIG
    except ConsistencyError as exc:
        stderr.write('consistency failure [%s]\n%s\n' % (exc.invariant, exc))
        return EXIT_CONSISTENCY
    except HeungapError as exc:
        stderr.write('%s\n' % exc)
        return EXIT_FAILED
    return EXIT_OK if output.ok else EXIT_FAILED
