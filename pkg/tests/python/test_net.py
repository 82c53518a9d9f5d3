import math
import pytest
import numpy as np
import mpmath as mp
import skforge as sk
from skforge import net as nt
from skforge import quaternion as q


def neg(x):
    x = str(x)
    return x[1:] if x.startswith('-') else '-' + x


def gate(name, a, b=0, c=0, d=0, inverse_of=None):
    '''Gate record of the quaternion ``a + ib X + ic Y + id Z``.'''
    rec = {'name': name,
           'matrix': [[str(a), str(d)], [str(c), str(b)],
                      [neg(c), str(b)], [str(a), neg(d)]]}
    if inverse_of is not None:
        rec['inverse_of'] = inverse_of
    return rec


@pytest.fixture(scope="module")
def gateset():
    return nt.load_gateset()


@pytest.fixture(scope="module")
def small_net(gateset):
    return nt.build_net(gateset, 10, probes=2000)


def test01_default_gateset(gateset):
    assert gateset.names == ('I', 'H', 'T', 'Tdg')
    assert gateset.identity_index == 0
    assert gateset.inverses == (0, 1, 3, 2)
    assert gateset.generators == [1, 2, 3]
    with sk.precision(128):
        T = gateset.elements()[2]
        assert q.distance(T, q.exp_axis((0, 0, 1), mp.pi / 8)) < \
            sk.tolerance(16)
        # H^2 = -1 in SU(2), the identity up to sign
        H = gateset.elements()[1]
        assert q.pdistance(H * H, q.identity()) < sk.tolerance(16)


def test02_identity_added():
    gs = nt.GateSet([gate('H', 0, '0.7071067811865475244', 0,
                          '0.7071067811865475244')])
    assert gs.names == ('H', 'I')
    assert gs.identities == frozenset([1])
    assert gs.inverses == (0, 1)


def test03_invalid_gatesets():
    with pytest.raises(sk.EmptyGateSet):
        nt.GateSet([])
    T = gate('T', math.cos(math.pi / 8), 0, 0, math.sin(math.pi / 8))
    with pytest.raises(sk.NonSymmetricGateSet):
        nt.GateSet([T])
    X = gate('X', 0, 1, 0, 0)
    Z = gate('Z', 0, 0, 0, 1, inverse_of='X')
    with pytest.raises(sk.NonSymmetricGateSet):
        nt.GateSet([X, Z])


def test04_malformed_file(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{"gates": [')
    with pytest.raises(ValueError):
        nt.load_gateset(str(path))
    with pytest.raises(OSError):
        nt.load_gateset(str(tmp_path / 'missing.json'))


def test05_gate_words(gateset):
    w = gateset.word('H H T Tdg I T')
    assert sk.format_word(w) == 'T'
    with sk.precision(128):
        d = q.pdistance(gateset.evaluate(gateset.word('T T T T T T T T')),
                        q.identity())
        assert d < sk.tolerance(16)


def test06_net_structure(small_net, gateset):
    net = small_net
    assert len(net) > 100
    assert net.word(0) == sk.empty(gateset.alphabet)
    assert np.all(np.diff(net.lengths) >= 0)
    assert net.lengths.max() <= 10
    for i in range(0, len(net), max(1, len(net) // 50)):
        g = net.element(i).numpy()
        p = net.points[i]
        assert min(np.linalg.norm(g - p), np.linalg.norm(g + p)) < 1e-9


def test07_net_entries_distinct(small_net):
    # No two entries closer than delta_d, sign flips included
    p = small_net.points
    worst = np.inf
    for i in range(0, len(p), 256):
        a = p[i:i + 256, None]
        d = np.minimum(np.linalg.norm(a - p[None], axis=2),
                       np.linalg.norm(a + p[None], axis=2))
        d[np.arange(len(d)), i + np.arange(len(d))] = np.inf
        worst = min(worst, float(d.min()))
    assert worst >= small_net.delta_d


def test08_nearest_matches_scan(small_net):
    rng = np.random.default_rng(0)
    t = rng.standard_normal((500, 4))
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    idx, chord = small_net.nearest_many(t)
    p = small_net.points
    for i in range(len(t)):
        brute = np.minimum(np.linalg.norm(p - t[i], axis=1),
                           np.linalg.norm(p + t[i], axis=1))
        assert math.isclose(chord[i], brute.min(), abs_tol=1e-12)
        assert math.isclose(brute[idx[i]], brute.min(), abs_tol=1e-12)


def test09_nearest_on_entries(small_net):
    for i in (0, 1, 7, len(small_net) - 1):
        word, d = nt.nearest(small_net, small_net.points[i])
        assert d < 1e-6
        assert len(word) <= small_net.lengths[i]


def test10_base_approx(small_net):
    with sk.precision(128):
        g = q.random_element(np.random.default_rng(1))
        with pytest.raises(sk.NetTooCoarse):
            nt.base_approx(small_net, g, small_net.covering_estimate / 2)
        w = nt.base_approx(small_net, g, 2 * small_net.covering_estimate)
        d = q.pdistance(small_net.gateset.evaluate(w), g)
        assert d < 2 * small_net.covering_estimate


def test11_pair_approx(small_net):
    rng = np.random.default_rng(2)
    with sk.precision(128):
        for _ in range(10):
            g = q.random_element(rng)
            _, d1 = nt.nearest(small_net, g)
            w, d2 = nt.pair_approx(small_net, g)
            assert d2 <= d1 + 1e-12
            d = q.pdistance(small_net.gateset.evaluate(w), g)
            assert abs(float(d) - d2) < 1e-7
        with pytest.raises(sk.NetTooCoarse):
            nt.pair_approx(small_net, g, eps0=1e-12)
    assert nt.pair_covering_estimate(small_net) < small_net.covering_estimate


def test12_identity_only_net():
    gs = nt.GateSet([gate('I', 1)])
    net = nt.build_net(gs, 4, probes=2000)
    assert len(net) == 1
    # Projective covering radius: every element is within pi/2 of +-1
    assert 1.4 < net.covering_estimate <= math.pi / 2 + 1e-9


def test13_save_load(small_net, gateset, tmp_path):
    path = str(tmp_path / 'net.sknet')
    nt.save_net(small_net, path)
    net = nt.load_net(path, gateset)
    assert len(net) == len(small_net)
    assert net.codes == small_net.codes
    assert np.array_equal(net.points, small_net.points)
    assert net.covering_estimate == small_net.covering_estimate
    assert net.max_len == 10


def test14_load_errors(small_net, gateset, tmp_path):
    path = tmp_path / 'net.sknet'
    nt.save_net(small_net, str(path))
    data = path.read_bytes()

    bad = tmp_path / 'flipped.sknet'
    mid = len(data) // 2
    bad.write_bytes(data[:mid] + bytes([data[mid] ^ 0xff]) + data[mid + 1:])
    with pytest.raises(sk.CorruptFile):
        nt.load_net(str(bad), gateset)

    bad.write_bytes(b'NOTNET' + data[6:])
    with pytest.raises(sk.VersionMismatch):
        nt.load_net(str(bad), gateset)

    bad.write_bytes(data[:20])
    with pytest.raises(sk.CorruptFile):
        nt.load_net(str(bad), gateset)

    other = nt.GateSet([gate('X', 0, 1, 0, 0)])
    with pytest.raises(sk.VersionMismatch):
        nt.load_net(str(path), other)


def test15_default_net_path(gateset, monkeypatch, tmp_path):
    monkeypatch.setenv('SKFORGE_NET_CACHE', str(tmp_path))
    path = nt.default_net_path(gateset, 12)
    assert path.startswith(str(tmp_path))
    assert path.endswith('-L12.sknet')


def test16_covering_nonincreasing(gateset):
    # A deeper net contains the shallower one, so it covers at least as well
    coverings = [nt.build_net(gateset, L0, probes=2000).covering_estimate
                 for L0 in (4, 6, 8)]
    assert coverings[0] >= coverings[1] >= coverings[2]


def test17_rounding_twins_merged():
    # A finite group: many words reach one element, some with opposite signs
    s = '0.7071067811865475244'
    gs = nt.GateSet([gate('A', 0, s, 0, s), gate('B', s, 0, s, 0),
                     gate('Bdg', s, 0, neg(s), 0, inverse_of='B')])
    net = nt.build_net(gs, 6, probes=500)
    # Dihedral group of order 8 in SO(3)
    assert len(net) == 8
    c = sk.detail.canonical_rows(net.points)
    for i in range(len(c)):
        d = np.minimum(np.linalg.norm(c - c[i], axis=1),
                       np.linalg.norm(c + c[i], axis=1))
        d[i] = np.inf
        assert d.min() >= net.delta_d


def test18_low_precision_callers(gateset, small_net):
    T = gateset.word('T')
    with mp.workprec(53):
        g = gateset.evaluate(T)
        e = small_net.element(small_net.codes.index(T.codes))
    with sk.precision(128):
        ref = mp.cos(mp.pi / 8)
        assert abs(g.a - ref) < mp.ldexp(1, -60)
        assert abs(abs(e.a) - ref) < mp.ldexp(1, -60)
