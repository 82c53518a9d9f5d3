import os as _os
import sys as _sys
import json as _json
import math as _math
import argparse as _argparse
import logging as _logging
from dataclasses import dataclass as _dataclass, asdict as _asdict

import mpmath as _mp
import numpy as _np
import pandas as _pd

import skforge as _sk
from skforge import config as _config
from skforge import const as _const
from skforge import detail as _detail
from skforge import errors as _errors
from skforge import net as _net
from skforge import quaternion as _q
from skforge import series as _series
from skforge import steps as _steps
from skforge import words as _words
from skforge import zigzag as _zigzag

_log = _logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_GATESET = 2
EXIT_IO = 3
EXIT_UNREACHABLE = 4
EXIT_PRECISION = 5

BENCH_COLUMNS = ['n', 'eps_target', 'eps_achieved', 'len', 'template',
                 'algo', 'wall_ms', 'status']

DN_MAX_DEPTH = 6


@_dataclass(frozen=True)
class RunManifest:
    '''Everything needed to reproduce a bench run.'''
    gateset_digest: str
    net_max_len: int
    net_delta_d: float
    net_covering_estimate: float
    templates: tuple
    window: int
    conj_len: int
    c_k: int
    precision_bits: int
    seed: int
    n_min: int
    n_max: int
    targets: int
    timing: bool
    version: str = _config.SKFORGE_VERSION

    def dumps(self):
        return _json.dumps(_asdict(self), indent=2, sort_keys=True) + '\n'


# -------------------------------------------------------------------
#                         Shared helpers
# -------------------------------------------------------------------

def _gateset(path):
    return _net.load_gateset(path)


def open_net(net_path, gateset, max_len=None):
    '''
    Loads the net at ``net_path``. Without a path the net cache directory is
    consulted and a missing net is built and stored there.
    '''
    if net_path is not None:
        return _net.load_net(net_path, gateset)
    max_len = _config.NET_MAX_LEN if max_len is None else max_len
    path = _net.default_net_path(gateset, max_len)
    if _os.path.exists(path):
        return _net.load_net(path, gateset)
    _log.info("open_net(): no cached net for L0=%i, building %s",
              max_len, path)
    net = _net.build_net(gateset, max_len)
    _os.makedirs(_os.path.dirname(path), exist_ok=True)
    _net.save_net(net, path)
    return net


def parse_target(text, gateset):
    '''
    Target of a synthesis run at the working precision: ``identity``, a gate
    name, ``random:<seed>`` or four comma separated reals ``a,b,c,d``.
    '''
    if isinstance(text, (list, tuple)):
        text = ','.join(text)
    text = text.strip()
    if text == 'identity':
        return _q.identity()
    if text in gateset.names:
        return gateset.elements()[gateset.index(text)]
    if text.startswith('random:'):
        rng = _np.random.default_rng(int(text[7:]))
        return _q.random_element(rng)
    parts = [p for p in text.replace(',', ' ').split() if p]
    if len(parts) != 4:
        raise ValueError("parse_target(): expected a name, random:<seed> or "
                         "four reals, got %r!" % text)
    return _q.element(*parts)


def _ck(value, step_params):
    if value is None:
        return _config.SYNTH_CK
    if value == 'auto':
        params = _zigzag.SynthParams.from_steps(step_params)
        return _zigzag.calibrate_ck(params)
    return int(value)


def _generator(net, template, window, conj_len):
    params = _steps.StepParams.from_template(template, window, conj_len)
    return _steps.StepGenerator(net, params, _steps.StepCache())


# -------------------------------------------------------------------
#                          Subcommands
# -------------------------------------------------------------------

def cmd_net_build(gateset_path, L0, delta_d, out_path):
    '''Builds a net, writes it to ``out_path`` and prints its covering.'''
    try:
        gateset = _gateset(gateset_path)
    except OSError as e:
        print("net-build: cannot read the gate set (%s)" % e, file=_sys.stderr)
        return EXIT_IO
    except (_errors.NonSymmetricGateSet, _errors.EmptyGateSet,
            ValueError) as e:
        print("net-build: %s" % e, file=_sys.stderr)
        return EXIT_GATESET
    L0 = _config.NET_MAX_LEN if L0 is None else L0
    net = _net.build_net(gateset, L0, delta_d)
    if out_path is None:
        out_path = _net.default_net_path(gateset, L0)
    try:
        parent = _os.path.dirname(_os.path.abspath(out_path))
        _os.makedirs(parent, exist_ok=True)
        _net.save_net(net, out_path)
    except OSError as e:
        print("net-build: cannot write %r (%s)" % (out_path, e),
              file=_sys.stderr)
        return EXIT_IO
    print("entries: %i" % len(net))
    print("covering_estimate: %.6f" % net.covering_estimate)
    print("written: %s" % out_path)
    return EXIT_OK


def cmd_synth(net_path, target, n, template=None, gateset_path=None,
              window=None, conj_len=None, ck=None, precision_bits=None,
              L0=None):
    '''Synthesizes one target and prints the word and its accuracy.'''
    try:
        gateset = _gateset(gateset_path)
        net = open_net(net_path, gateset, L0)
    except (OSError, _errors.CorruptFile, _errors.VersionMismatch) as e:
        print("synth: %s" % e, file=_sys.stderr)
        return EXIT_IO
    except (_errors.NonSymmetricGateSet, _errors.EmptyGateSet) as e:
        print("synth: %s" % e, file=_sys.stderr)
        return EXIT_GATESET

    generator = _generator(net, template, window, conj_len)
    params = _zigzag.SynthParams.from_steps(
        generator.params, c_k=_ck(ck, generator.params))
    bits = max(_const.synthesis_precision(n), int(precision_bits or 0))
    try:
        with _q.precision(bits):
            g = parse_target(target, gateset)
    except ValueError as e:
        print("synth: %s" % e, file=_sys.stderr)
        return EXIT_GATESET
    try:
        result = _zigzag.Synthesizer(generator, params).synthesize(
            g, n, bits=bits)
    except (_errors.TargetUnreachable, _errors.NetTooCoarse,
            _errors.StepUnreachable) as e:
        print("synth: %s" % e, file=_sys.stderr)
        return EXIT_UNREACHABLE
    except _errors.PrecisionShortfall as e:
        print("synth: %s" % e, file=_sys.stderr)
        return EXIT_PRECISION

    print("word: %s" % _words.format_word(result.word))
    print("length: %i" % result.length)
    print("distance: %s rad" % _mp.nstr(result.achieved_distance, 12))
    print("bits: %.2f" % result.bits)
    return EXIT_OK


def _bench_synth(synth, g, n, spine, timing, bits=None):
    try:
        r = synth.synthesize(g, n, spine, bits)
    except _errors.TargetUnreachable:
        return _math.nan, 0, 0.0, 'unreachable'
    except _errors.PrecisionShortfall:
        return _math.nan, 0, 0.0, 'precision'
    return (float(r.achieved_distance), r.length,
            r.stats.wall_ms if timing else 0.0, 'ok')


def _bench_dn(net, g, n, depths, timing):
    # Shallowest depth meeting 2^-n; results per depth are shared across n
    eps = 2.0 ** -n
    for depth in range(DN_MAX_DEPTH + 1):
        if depth not in depths:
            try:
                depths[depth] = _zigzag.dn_synthesize(g, depth, net)
            except _errors.ConvergenceFailure:
                depths[depth] = None
        r = depths[depth]
        if r is None:
            return _math.nan, 0, 0.0, 'diverged'
        if r.achieved_distance < eps:
            return (float(r.achieved_distance), r.length,
                    r.stats.wall_ms if timing else 0.0, 'ok')
    return float(r.achieved_distance), r.length, 0.0, 'missed'


def bench_slopes(df):
    '''
    Growth exponents of a bench table: ``log len`` against ``log n`` per
    template and, for the baseline, against ``log log(1/eps)``.
    '''
    out = {}
    ok = df[df['status'] == 'ok']
    for (template, algo), rows in ok.groupby(['template', 'algo'], sort=False):
        if algo == 'dn':
            x = _np.log(_np.log(1.0 / rows['eps_achieved'].to_numpy()))
        else:
            x = _np.log(rows['n'].to_numpy(dtype=float))
        y = _np.log(_np.maximum(rows['len'].to_numpy(dtype=float), 1.0))
        out['dn' if algo == 'dn' else template] = _detail.fit_slope(x, y)
    return out


def cmd_bench(net_path, n_min, n_max, templates, targets, out_csv,
              gateset_path=None, window=None, conj_len=None, ck=None,
              seed=None, timing=True, precision_bits=None, L0=None):
    '''
    Runs the zigzag synthesis for every template together with the
    balanced-commutator baseline over ``n_min..n_max`` and ``targets`` seeded
    random targets; writes the CSV table and its run manifest.
    '''
    if not 1 <= n_min <= n_max:
        raise ValueError("cmd_bench(): need 1 <= n_min <= n_max!")
    templates = list(templates or [_config.STEP_TEMPLATE])
    seed = _config.BENCH_SEED if seed is None else seed
    try:
        gateset = _gateset(gateset_path)
        net = open_net(net_path, gateset, L0)
    except (OSError, _errors.CorruptFile, _errors.VersionMismatch) as e:
        print("bench: %s" % e, file=_sys.stderr)
        return EXIT_IO
    except (_errors.NonSymmetricGateSet, _errors.EmptyGateSet) as e:
        print("bench: %s" % e, file=_sys.stderr)
        return EXIT_GATESET

    rng = _np.random.default_rng(seed)
    with _q.precision(_config.PRECISION_FLOOR):
        goals = [_q.random_element(rng) for _ in range(targets)]

    synths, c_k = {}, None
    for name in templates:
        generator = _generator(net, name, window, conj_len)
        if c_k is None:
            c_k = _ck(ck, generator.params)
        params = _zigzag.SynthParams.from_steps(generator.params, c_k=c_k)
        synths[name] = _zigzag.Synthesizer(generator, params)

    rows = []
    spines = {(i, name): {} for i in range(targets) for name in templates}
    dn_depths = {i: {} for i in range(targets)}
    for n in range(n_min, n_max + 1):
        for i, g in enumerate(goals):
            for name in templates:
                eps, length, ms, status = _bench_synth(
                    synths[name], g, n, spines[(i, name)], timing,
                    precision_bits)
                rows.append((n, 2.0 ** -n, eps, length, name, 'zigzag', ms,
                             status))
            eps, length, ms, status = _bench_dn(net, g, n, dn_depths[i],
                                                timing)
            rows.append((n, 2.0 ** -n, eps, length, 'none', 'dn', ms, status))
            _log.info("bench: n=%i target=%i done", n, i)

    df = _pd.DataFrame(rows, columns=BENCH_COLUMNS)
    manifest = RunManifest(
        gateset.digest.hex(), net.max_len, net.delta_d,
        round(net.covering_estimate, 12), tuple(templates),
        _config.STEP_WINDOW if window is None else window,
        _config.STEP_CONJ_LEN if conj_len is None else conj_len, c_k,
        max(_const.synthesis_precision(n_max), int(precision_bits or 0)),
        seed, n_min, n_max, targets, bool(timing))
    try:
        _os.makedirs(_os.path.dirname(_os.path.abspath(out_csv)),
                     exist_ok=True)
        with _detail.atomic_write(out_csv, 'w') as f:
            df.to_csv(f, index=False, lineterminator='\n',
                      float_format='%.6e')
        with _detail.atomic_write(out_csv + '.manifest.json', 'w') as f:
            f.write(manifest.dumps())
    except OSError as e:
        print("bench: cannot write %r (%s)" % (out_csv, e), file=_sys.stderr)
        return EXIT_IO

    for name, slope in bench_slopes(df).items():
        print("slope %s: %s" % (name, 'n/a' if slope is None
                                else '%.3f' % slope))
    for name, synth in synths.items():
        C = _steps.step_constant(synth.generator.cache, synth.params.alpha)
        zz = df[(df['template'] == name) & (df['status'] == 'ok')]
        bound = synth.params.M * C * zz['n'].astype(float) ** synth.params.alpha
        held = bool((zz['len'] <= bound).all())
        print("lemma %s: b=%.4f M=%.3f C=%.3f len <= M C n^alpha: %s"
              % (name, synth.params.b, synth.params.M, C,
                 'yes' if held else 'no'))

    success = float((df['status'] == 'ok').mean())
    print("rows: %i, success: %.1f%%" % (len(df), 100 * success))
    return EXIT_OK if success >= _config.BENCH_SUCCESS_RATIO \
        else EXIT_UNREACHABLE


def _table(header, rows):
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    fmt = '  '.join('%%%is' % w for w in widths)
    print(fmt % tuple(header))
    for r in rows:
        print(fmt % tuple(str(x) for x in r))


def _verify_cross(trials=1000, seed=0, bits=128):
    rng = _np.random.default_rng(seed)
    passed = 0
    with _q.precision(bits):
        tol = _const.tolerance(24)
        z, x = (0, 0, 1), (1, 0, 0)
        for _ in range(trials):
            psi = _mp.mpf(float(rng.uniform(0, _math.pi / 2)))
            theta = _mp.mpf(float(rng.uniform(0, _math.pi)))
            g = _q.exp_axis(z, psi)
            h = _q.conj(g, _q.exp_axis(x, theta / 2))
            d = _q.distance(_q.commutator(g, h), _q.identity())
            if abs(d - _q.comm_distance(psi, theta)) < tol:
                passed += 1
    return passed


def cmd_verify(what, n_max=None):
    '''Runs one of the verification suites and prints a pass/fail table.'''
    ok = True
    if what == 'elkasapy-lengths':
        rows = _words.check_elkasapy(24 if n_max is None else n_max)
        table = [(n, length, expected, agree,
                  'pass' if length == expected and agree else 'FAIL')
                 for n, length, expected, agree in rows]
        _table(('n', 'len', 'expected', 'recurrences', 'status'), table)
        ok = all(r[-1] == 'pass' for r in table)
        print("%i/%i passed" % (sum(r[-1] == 'pass' for r in table),
                                len(table)))
    elif what == 'nilfib':
        reports = [_series.verify_nilfib(n)
                   for n in range(1, (9 if n_max is None else n_max) + 1)]
        _table(('n', 'f_n', 'degree', 'leading', 'expected', 'status'),
               [(r.n, r.fib, r.degree, r.leading, r.expected,
                 'pass' if r.passed else 'FAIL') for r in reports])
        ok = all(r.passed for r in reports)
    elif what == 'cross':
        trials = 1000 if n_max is None else n_max
        passed = _verify_cross(trials)
        print("%i/%i within tolerance" % (passed, trials))
        ok = passed == trials
    elif what == 'endpoints':
        rows = _words.check_endpoints(24 if n_max is None else n_max)
        table = [(n, ends, zlen, zexp,
                  'pass' if ends and zlen == zexp else 'FAIL')
                 for n, ends, zlen, zexp in rows]
        _table(('n', 'ends', 'zeta_len', 'expected', 'status'), table)
        ok = all(r[-1] == 'pass' for r in table)
    elif what == 'ccan':
        table = []
        for name, expected in (('len14', 4), ('et14', 5)):
            got = _series.ccan_witness(_words.template(name))
            table.append((name, got, expected,
                          'pass' if got == expected else 'FAIL'))
        _table(('word', 'ccan', 'expected', 'status'), table)
        ok = all(r[-1] == 'pass' for r in table)
        for name in ('comm', 'et14', 'elk5', 'elk9'):
            p = _steps.StepParams.from_template(name)
            b, M = _zigzag.lemma_constants(p.alpha)
            print("%s: ell=%i c=%i alpha=%.4f b=%.4f M=%.3f"
                  % (name, p.ell, p.c, p.alpha, b, M))
    else:
        raise ValueError("cmd_verify(): unknown suite %r!" % what)
    return EXIT_OK if ok else EXIT_MISMATCH


# -------------------------------------------------------------------
#                          Argument parsing
# -------------------------------------------------------------------

def _template_name(value):
    _words.template(value)
    return value


def build_parser():
    parser = _argparse.ArgumentParser(
        prog='skforge',
        description="Gate synthesis by zigzag refinement of roughly "
                    "exponential steps.")
    parser.add_argument('--version', action='version',
                        version='skforge ' + _config.SKFORGE_VERSION)
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help="more log output (repeatable)")
    parser.add_argument('-q', '--quiet', action='store_true',
                        help="only log errors")

    common = _argparse.ArgumentParser(add_help=False)
    common.add_argument('--gateset', default=None,
                        help="gate set JSON file (default: bundled "
                             "Clifford+T set)")
    common.add_argument('--net', default=None,
                        help="net file (default: cached net, built on "
                             "demand)")
    common.add_argument('--L0', type=int, default=None,
                        help="net word length for the cached net")
    common.add_argument('--precision-bits', type=int, default=None)
    common.add_argument('--seed', type=int, default=None)
    common.add_argument('--window', type=int, default=None)
    common.add_argument('--conj-len', type=int, default=None)
    common.add_argument('--ck', default=None,
                        help="precision slack in bits, or 'auto' to "
                             "calibrate")
    common.add_argument('--out', default=None)

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('net-build', parents=[common], help="build a net")
    p.add_argument('--delta-d', type=float, default=None)

    p = sub.add_parser('synth', parents=[common], help="synthesize a target")
    p.add_argument('target', nargs='+',
                   help="identity, a gate name, random:<seed> or a b c d")
    p.add_argument('-n', type=int, required=True, help="accuracy 2^-n")
    p.add_argument('--template', type=_template_name,
                   default=_config.STEP_TEMPLATE)

    p = sub.add_parser('bench', parents=[common], help="scaling benchmark")
    p.add_argument('--n-min', type=int, default=10)
    p.add_argument('--n-max', type=int, default=30)
    p.add_argument('--template', type=_template_name, action='append',
                   dest='templates')
    p.add_argument('--targets', type=int, default=20)
    p.add_argument('--no-timing', action='store_true')

    p = sub.add_parser('verify', help="run a verification suite")
    p.add_argument('what', choices=['elkasapy-lengths', 'nilfib', 'cross',
                                    'endpoints', 'ccan'])
    p.add_argument('n_max', type=int, nargs='?', default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    _logging.basicConfig(format='%(levelname)s %(name)s: %(message)s')
    if args.quiet:
        _sk.set_log_level(_logging.ERROR)
    elif args.verbose:
        _sk.set_log_level(_logging.INFO if args.verbose == 1
                          else _logging.DEBUG)

    if args.command == 'net-build':
        return cmd_net_build(args.gateset, args.L0, args.delta_d, args.out)
    if args.command == 'synth':
        return cmd_synth(args.net, args.target, args.n, args.template,
                         args.gateset, args.window, args.conj_len, args.ck,
                         args.precision_bits, args.L0)
    if args.command == 'bench':
        out = args.out if args.out is not None else 'bench.csv'
        return cmd_bench(args.net, args.n_min, args.n_max, args.templates,
                         args.targets, out, args.gateset, args.window,
                         args.conj_len, args.ck, args.seed,
                         not args.no_timing, args.precision_bits, args.L0)
    return cmd_verify(args.what, args.n_max)
