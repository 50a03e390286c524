import io
import json

import jsonschema
import pytest

from heungap import cli
from heungap.cli import (EXIT_CONFIG, EXIT_CONSISTENCY, EXIT_FAILED, EXIT_OK, RunConfig,
                         golden_text, main, schema_path)
from heungap.elliptic import lattice_from_periods
from heungap.exceptions import ConsistencyError
from heungap.settings import ENV_VAR
from heungap.utils import dump_csv, dump_json, grid_map, save_to_name_list


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv.split(), out, err)
    return code, out.getvalue(), err.getvalue()


def run_json(argv, command):
    code, out, err = run('--format json ' + argv)
    assert code == EXIT_OK, err
    data = json.loads(out)
    with open(schema_path(command)) as f:
        jsonschema.validate(data, json.load(f))
    return data


def csv_rows(out):
    lines = out.strip().split('\n')
    return lines[0].split(','), [line.split(',') for line in lines[1:]]


@pytest.mark.cli
class TestRunConfig():

    @pytest.mark.parametrize('text', [
        'qpoly --lattice 1,1i --l 1,0,0,0',
        '--format json --jobs 2 density --lattice 1,1i --grid 50 --eta 10',
        'bands --lattice 1,1i --l 1,0,0,0 --range=-3:3:50 --third',
        'monodromy --lattice 1,1i --l 2,0,0,0 --E=-2.5;0.8 --check-three-way --method all',
        '--tol edge=1e-08 check --only symbolic,wkb --quick',
        'wkb --large-e 4 --terms 6',
    ])
    def test_render_reads_back(self, text):
        config = RunConfig.parse(text)
        assert config.render() == text
        assert RunConfig.parse(config.render()) == config

    def test_canonical_order(self):
        config = RunConfig.parse('xi --l 2,0,0,0 --numeric --E 1.7 --lattice 1,1i')
        assert config.render() == 'xi --lattice 1,1i --l 2,0,0,0 --E 1.7 --numeric'

    def test_energies(self):
        assert RunConfig.parse('reduction --range=-1:1:3').energies() == [-1.0, 0.0, 1.0]
        assert RunConfig.parse('reduction --E=0.5;-2').energies() == [0.5, -2.0]
        assert RunConfig.parse('reduction').energies(default=[7.0]) == [7.0]

    def test_tolerances(self, monkeypatch):
        monkeypatch.setenv(ENV_VAR, 'quad=1e-9')
        tol = RunConfig.parse('--tol edge=1e-6 check').tolerances()
        assert tol.edge == 1e-6
        assert tol.quad == 1e-9


@pytest.mark.cli
class TestCommands():

    def test_qpoly_text(self):
        code, out, _ = run('qpoly --l 1,0,0,0')
        assert code == EXIT_OK
        assert out.strip() == golden_text('q_l1')

    def test_qpoly_free(self):
        code, out, _ = run('qpoly --l 0,0,0,0')
        assert code == EXIT_OK
        assert out.strip() == 'E'

    def test_qpoly_edges(self):
        code, out, _ = run('qpoly --l 1,0,0,0 --lattice 1,1i')
        assert code == EXIT_OK
        assert out.split('\n')[1].startswith('edges: ')

    @pytest.mark.slow
    def test_bands_edges(self):
        code, out, _ = run('--format json bands --l 1,0,0,0 --lattice 1,1i --grid 400')
        assert code == EXIT_OK
        square = lattice_from_periods(1, 1j)
        exact = sorted(-square.e(i).real for i in (1, 2, 3))
        edges = sorted(e['E'] for e in json.loads(out)['edges'])
        assert len(edges) == 3
        for got, want in zip(edges, exact):
            assert abs(got - want) < 1e-6

    def test_lame_csv(self):
        code, out, _ = run('--format csv lame --l 60 --lattice 1,1i')
        assert code == EXIT_OK
        header, rows = csv_rows(out)
        assert header == ['l', 'E', 'family']
        assert len(rows) == 121
        values = [float(r[1]) for r in rows]
        assert values == sorted(values)

    def test_density_csv(self):
        code, out, _ = run('--format csv density --lattice 1,1i --grid 20 --eta 5')
        assert code == EXIT_OK
        header, rows = csv_rows(out)
        assert header == ['E', 'n', 'density']
        n = [float(r[1]) for r in rows]
        assert n == sorted(n)
        assert 0 < n[0] and n[-1] < 5

    def test_wkb_terms(self):
        code, out, _ = run('wkb --terms 4')
        assert code == EXIT_OK
        lines = out.strip().split('\n')
        assert lines == ['S_-1 = ' + golden_text('s_m1'), 'S_0 = ' + golden_text('s_0'),
                         'S_1 = ' + golden_text('s_1')]

    def test_wkb_terms_lower_bound(self):
        code, out, _ = run('wkb --terms 2')
        assert code == EXIT_OK
        assert out.strip().split('\n') == ['S_-1 = ' + golden_text('s_m1')]
        assert run('wkb --terms 1')[0] == EXIT_CONFIG

    def test_wkb_large_e(self):
        code, out, _ = run('wkb --terms 2 --large-e 2')
        assert code == EXIT_OK
        assert out.strip().split('\n')[1:] == ['psi_1 = -(1/2)*L*zeta', 'psi_2 = -(1/4)*L*z']

    def test_check_quick(self):
        code, out, _ = run('check --quick --only symbolic,wkb')
        assert code == EXIT_OK
        lines = out.strip().split('\n')
        assert all(line.startswith('PASS ') for line in lines)
        assert 'PASS symbolic.q_l2' in lines


@pytest.mark.cli
class TestJsonOutput():

    def test_xi(self):
        data = run_json('xi --l 2,0,0,0', 'xi')
        assert data['l'] == [2, 0, 0, 0]

    def test_qpoly(self):
        data = run_json('qpoly --l 2,0,0,0 --lattice 1,1i', 'qpoly')
        assert data['genus'] == 2
        assert len(data['band_edges']) == 5

    def test_opA(self):
        data = run_json('opA --l 1,0,0,0', 'opA')
        assert data['order'] == 3

    def test_bands(self):
        data = run_json('bands --l 0,0,0,0 --lattice 1,1i --range=-1.05:1.95:11', 'bands')
        assert len(data['points']) == 11
        assert len(data['edges']) == 1

    def test_monodromy(self):
        data = run_json('monodromy --l 1,0,0,0 --lattice 1,1i --E=-2.5 --method all '
                        '--check-three-way', 'monodromy')
        assert sorted(set(r['method'] for r in data['rows'])) == ['floquet', 'hk',
                                                                  'hyperelliptic']
        assert len(data['rows']) == 6
        assert [a['k'] for a in data['agreement']] == [1, 3]
        assert all(a['ok'] for a in data['agreement'])
        rows = dict(((r['k'], r['method']), complex(r['re_mult'], r['im_mult']))
                    for r in data['rows'])
        for k in (1, 3):
            assert abs(rows[k, 'hk'] - rows[k, 'hyperelliptic']) < 1e-6 * abs(rows[k, 'hk'])

    def test_reduction(self):
        data = run_json('reduction --lattice 1,1i --E 5.0', 'reduction')
        assert data['reports'][0]['ok']

    def test_lame(self):
        data = run_json('lame --l 3 --lattice 1,1i', 'lame')
        assert len(data['values']) == 7

    def test_density(self):
        data = run_json('density --lattice 1,1i --grid 8', 'density')
        assert len(data['E']) == len(data['n']) == len(data['density']) == 8

    def test_wkb(self):
        data = run_json('wkb --terms 3 --large-e 1', 'wkb')
        assert [s['j'] for s in data['S']] == [-1, 0]
        assert len(data['psi']) == 1

    def test_check(self):
        data = run_json('check --quick --only symbolic', 'check')
        assert data['ok']
        assert data['checks']['symbolic']['xi_l2']['ok']


@pytest.mark.cli
class TestExitCodes():

    def test_bad_lattice(self):
        code, _, err = run('qpoly --l 1,0,0,0 --lattice 1,2')
        assert code == EXIT_CONFIG
        assert err

    def test_bad_literal(self):
        assert run('xi --l 1,0,0')[0] == EXIT_CONFIG
        assert run('density --lattice 1,$')[0] == EXIT_CONFIG

    def test_missing_argument(self):
        assert run('lame --l 3')[0] == EXIT_CONFIG

    def test_no_csv_form(self):
        assert run('--format csv xi --l 1,0,0,0')[0] == EXIT_CONFIG

    def test_bad_tolerance(self):
        assert run('--tol speed=1 bands --l 0,0,0,0 --lattice 1,1i --E 1')[0] == EXIT_CONFIG

    def test_consistency_failure(self, monkeypatch):
        def broken(xi):
            raise ConsistencyError('q-degree', 'Q must be monic', None)
        monkeypatch.setattr(cli, 'compute_q', broken)
        code, _, err = run('qpoly --l 1,0,0,0')
        assert code == EXIT_CONSISTENCY
        assert 'q-degree' in err

    def test_spectrum_check_validates_lame(self, monkeypatch):
        square = lattice_from_periods(1, 1j)
        report = cli.lame_floquet_reports(square, [3])[0]
        assert report.name == 'lame-floquet[3]'
        assert report.ok and report.residue < 1e-6

        def broken(result, L):
            raise ConsistencyError('lame-floquet', 'eigenvalue is not doubly periodic',
                                   (0.0, 1, 2.5))
        monkeypatch.setattr(cli, 'validate_lame', broken)
        report = cli.lame_floquet_reports(square, [1])[0]
        assert not report.ok
        assert report.details['invariant'] == 'lame-floquet'

    def test_failed_check(self, monkeypatch):
        monkeypatch.setattr(cli, 'golden_text', lambda name: 'nope')
        code, out, _ = run('check --quick --only symbolic')
        assert code == EXIT_FAILED
        assert 'FAIL symbolic.xi_l2' in out


@pytest.mark.cli
class TestUtils():

    def test_save_to_name_list(self):
        dest = {}
        save_to_name_list(dest, ('a', 'b'), 1)
        save_to_name_list(dest, ('a', 'c'), 2)
        save_to_name_list(dest, ('d',), 3)
        assert dest == {'a': {'b': 1, 'c': 2}, 'd': 3}

    def test_dump_csv(self):
        text = dump_csv(('E', 'kind'), [(0.1, 'gap'), (2, 'bounded-band')])
        assert text == 'E,kind\n0.10000000000000001,gap\n2,bounded-band\n'

    def test_dump_json_complex(self):
        assert json.loads(dump_json({'m': 1 + 2j, 'v': (1, 2)})) == {'m': [1.0, 2.0],
                                                                    'v': [1, 2]}

    def test_grid_map(self):
        assert grid_map(abs, [-1, -2, 3]) == [1, 2, 3]
        assert grid_map(abs, [-1, -2, 3, -4], jobs=2) == [1, 2, 3, 4]
