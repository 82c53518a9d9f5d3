import json
import pytest
import pandas as pd
import skforge as sk
from skforge import cli


IDENTITY_ONLY = {'gates': [{'name': 'I',
                            'matrix': [['1', '0'], ['0', '0'],
                                       ['0', '0'], ['1', '0']]}]}

T_ONLY = {'gates': [{'name': 'T',
                     'matrix': [['0.9238795325112867561', '0.3826834323650897717'],
                                ['0', '0'], ['0', '0'],
                                ['0.9238795325112867561', '-0.3826834323650897717']]}]}


@pytest.fixture(scope="module")
def net_file(tmp_path_factory):
    path = str(tmp_path_factory.mktemp('net') / 'ct10.sknet')
    assert cli.main(['net-build', '--L0', '10', '--out', path]) == 0
    return path


@pytest.fixture
def gateset_file(tmp_path):
    def write(data, name='gates.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)
    return write


@pytest.mark.parametrize("args", [['elkasapy-lengths', '16'],
                                  ['nilfib', '6'],
                                  ['cross', '50'],
                                  ['endpoints', '14'],
                                  ['ccan']])
def test01_verify_suites(args, capsys):
    assert cli.main(['verify'] + args) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert 'FAIL' not in out


def test02_verify_ccan_constants(capsys):
    cli.main(['verify', 'ccan'])
    out = capsys.readouterr().out
    assert 'comm: ell=4 c=2 alpha=2.0000 b=0.2500 M=7.000' in out
    assert 'et14: ell=14 c=5' in out


def test03_net_build_errors(tmp_path, gateset_file):
    out = str(tmp_path / 'x.sknet')
    missing = str(tmp_path / 'missing.json')
    assert cli.main(['net-build', '--gateset', missing, '--L0', '4',
                     '--out', out]) == cli.EXIT_IO
    bad = gateset_file(T_ONLY)
    assert cli.main(['net-build', '--gateset', bad, '--L0', '4',
                     '--out', out]) == cli.EXIT_GATESET


def test04_net_build_identity_only(tmp_path, gateset_file, capsys):
    gates = gateset_file(IDENTITY_ONLY)
    out = str(tmp_path / 'id.sknet')
    assert cli.main(['net-build', '--gateset', gates, '--L0', '5',
                     '--out', out]) == cli.EXIT_OK
    text = capsys.readouterr().out
    assert 'entries: 1' in text
    covering = float(text.split('covering_estimate:')[1].split()[0])
    assert 1.4 < covering < 1.6


def test05_synth(net_file, capsys):
    assert cli.main(['synth', '--net', net_file, 'identity', '-n', '8']) == 0
    assert 'length: 0' in capsys.readouterr().out
    assert cli.main(['synth', '--net', net_file, 'random:3', '-n', '12']) == 0
    out = capsys.readouterr().out
    assert float(out.split('bits:')[1].split()[0]) > 12
    assert cli.main(['synth', '--net', net_file, '0.5', '0.5', '0.5', '0.5',
                     '-n', '10', '--ck', '5']) == 0


def test06_synth_errors(net_file, tmp_path, gateset_file):
    assert cli.main(['synth', '--net', net_file, '1', '2', '-n', '8']) == \
        cli.EXIT_GATESET
    assert cli.main(['synth', '--net', str(tmp_path / 'none.sknet'),
                     'identity', '-n', '8']) == cli.EXIT_IO
    gates = gateset_file(IDENTITY_ONLY)
    # The net was built for another gate set
    assert cli.main(['synth', '--gateset', gates, '--net', net_file,
                     'identity', '-n', '8']) == cli.EXIT_IO

    out = str(tmp_path / 'id.sknet')
    assert cli.main(['net-build', '--gateset', gates, '--L0', '3',
                     '--out', out]) == 0
    assert cli.main(['synth', '--gateset', gates, '--net', out,
                     '0', '1', '0', '0', '-n', '6']) == cli.EXIT_UNREACHABLE


def test07_parse_target():
    gs = sk.load_gateset()
    with sk.precision(128):
        assert cli.parse_target('identity', gs) == sk.identity()
        assert cli.parse_target('T', gs) == gs.elements()[2]
        a = cli.parse_target('random:4', gs)
        b = cli.parse_target('random:4', gs)
        assert a == b
        g = cli.parse_target(['0', '0', '0', '2'], gs)
        assert g.d == 1
        with pytest.raises(ValueError):
            cli.parse_target('bogus', gs)


def test08_bench_deterministic(net_file, tmp_path):
    args = ['bench', '--net', net_file, '--n-min', '6', '--n-max', '8',
            '--targets', '2', '--no-timing', '--seed', '11']
    a, b = str(tmp_path / 'a.csv'), str(tmp_path / 'b.csv')
    code_a = cli.main(args + ['--out', a])
    code_b = cli.main(args + ['--out', b])
    assert code_a == code_b
    with open(a, 'rb') as f:
        data = f.read()
    with open(b, 'rb') as f:
        assert f.read() == data

    lines = data.decode().splitlines()
    assert lines[0] == ','.join(cli.BENCH_COLUMNS)
    # Three accuracies, two targets, zigzag and baseline rows
    assert len(lines) == 1 + 3 * 2 * 2
    assert sum(',zigzag,' in l for l in lines) == 6
    assert sum(',none,dn,' in l for l in lines) == 6

    with open(a + '.manifest.json') as f:
        manifest = json.load(f)
    assert manifest['seed'] == 11 and manifest['targets'] == 2
    assert manifest['templates'] == ['comm']
    assert manifest['net_max_len'] == 10
    assert manifest['timing'] is False


def test09_bench_slopes():
    df = pd.DataFrame(
        [(n, 2.0 ** -n, 2.0 ** -n, 3 * n * n, 'comm', 'zigzag', 0.0, 'ok')
         for n in (8, 16, 32)], columns=cli.BENCH_COLUMNS)
    slopes = cli.bench_slopes(df)
    assert abs(slopes['comm'] - 2) < 1e-9


def test10_run_manifest():
    m = cli.RunManifest('00', 10, 1e-4, 0.1, ('comm',), 3, 6, 6, 128, 0,
                        10, 12, 2, False)
    data = json.loads(m.dumps())
    assert data['version'] == sk.__version__
    assert data['window'] == 3


def test11_bench_scaling(net_file, tmp_path):
    out = str(tmp_path / 'scaling.csv')
    cli.main(['bench', '--net', net_file, '--n-min', '10', '--n-max', '30',
              '--targets', '2', '--template', 'comm', '--template', 'et14',
              '--no-timing', '--seed', '4', '--out', out])
    df = pd.read_csv(out, keep_default_na=False, na_values=[''])
    slopes = cli.bench_slopes(df)
    assert 1.6 <= slopes['comm'] <= 2.8
    assert slopes['et14'] <= slopes['comm'] + 0.2
    assert max(slopes['comm'], slopes['et14']) < slopes['dn']
