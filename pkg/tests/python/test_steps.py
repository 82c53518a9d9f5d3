import math
import pytest
import numpy as np
import mpmath as mp
import skforge as sk
from skforge import net as nt
from skforge import steps as st
from skforge import words as w
from skforge import quaternion as q


@pytest.fixture(scope="module")
def net():
    return nt.build_net(nt.load_gateset(), 10, probes=2000)


@pytest.fixture(autouse=True)
def prec128():
    with sk.precision(128):
        yield


def test01_params():
    p = st.StepParams.from_template('comm')
    assert (p.ell, p.c, p.name) == (4, 2, 'comm')
    assert p.alpha == 2
    p = st.StepParams.from_template('et14', window=5, conj_len=4)
    assert (p.ell, p.c, p.window, p.conj_len) == (14, 5, 5, 4)
    assert math.isclose(p.alpha, math.log(14) / math.log(5))


def test02_params_validation():
    comm = w.template('comm')
    with pytest.raises(ValueError):
        st.StepParams(comm, 4, 1)
    with pytest.raises(ValueError):
        st.StepParams(comm, 3, 2)
    with pytest.raises(ValueError):
        st.StepParams(comm, 4, 4)
    with pytest.raises(ValueError):
        st.StepParams(w.template('len14'), 14, 4)
    with pytest.raises(ValueError):
        st.StepParams(w.parse_word("g h g h"), 4, 2)
    with pytest.raises(ValueError):
        st.StepParams(comm, 4, 2, window=0)


def test03_in_window():
    assert st.in_window(mp.mpf('0.3'), 2)
    assert not st.in_window(mp.mpf('0.25'), 2)
    assert not st.in_window(mp.mpf('0.5'), 2)


def test04_conjugator_pool(net):
    pool = st.conjugator_pool(net, 3)
    lengths = [len(u) for u, _ in pool]
    assert lengths == sorted(lengths)
    assert max(lengths) <= 3
    assert pool[0][0] == sk.empty(net.gateset.alphabet)
    assert q.pdistance(pool[0][1], q.identity()) == 0
    for u, g in pool:
        assert q.pdistance(net.gateset.evaluate(u), g) < sk.tolerance(16)

    # A zero-length budget leaves only the identity
    pool = st.conjugator_pool(net, 0)
    assert len(pool) == 1 and len(pool[0][0]) == 0


def test05_tune_angle():
    comm = w.template('comm')
    psi = mp.ldexp(3, -6)
    s = q.exp_axis((0, 0, 1), psi)
    e = w.empty()
    small = (e, q.exp_axis((1, 0, 0), mp.mpf('0.01')))
    right = (w.generator(0), q.exp_axis((1, 0, 0), mp.pi / 4))
    r = st.tune_angle(s, comm, [small, right], 8)
    assert r.word == w.generator(0)
    assert abs(r.distance - q.comm_distance(psi, mp.pi / 2)) < \
        sk.tolerance(24)
    assert st.in_window(r.distance, 8)

    with pytest.raises(sk.NoConjugatorFound) as ei:
        st.tune_angle(s, comm, [small], 8)
    assert len(ei.value.thetas) == 1
    assert abs(ei.value.thetas[0] - 0.02) < 1e-9


def test06_largest_gap():
    assert math.isclose(st.largest_gap([0.5, 1.0]), math.pi - 1.0)
    assert math.isclose(st.largest_gap([]), math.pi)


def test07_cache_store():
    cache = st.StepCache()
    g = q.exp_axis((0, 0, 1), mp.mpf('0.3'))
    entry = cache.store(2, w.empty(), g)
    assert entry.length == 0
    assert 2 in cache and len(cache) == 1
    with pytest.raises(sk.StepUnreachable):
        cache.store(3, w.empty(), g)
    assert 3 not in cache


@pytest.mark.parametrize("template, n_max", [('comm', 28), ('et14', 8)])
def test08_step_windows(net, template, n_max):
    gen = st.StepGenerator(net, st.StepParams.from_template(template))
    one = q.identity()
    for n in range(0, n_max + 1):
        s = gen.step(n)
        d = q.pdistance(s.element, one)
        assert st.in_window(d, n)
        # The word evaluates to the cached value
        assert q.pdistance(net.gateset.evaluate(s.word), s.element) < \
            sk.tolerance(16)
    assert set(range(n_max + 1)) <= set(gen.lengths())


def test09_step_deterministic(net):
    params = st.StepParams.from_template('comm')
    a = st.StepGenerator(net, params)
    b = st.StepGenerator(net, params)
    for n in range(1, 13):
        assert a.step(n).word == b.step(n).word


def test10_cache_hits(net):
    cache = st.StepCache()
    params = st.StepParams.from_template('comm')
    word = st.step(9, params, cache, net)
    assert cache[9].word == word
    hits = cache.hits
    assert st.step(9, params, cache, net) == word
    assert cache.hits == hits + 1
    with pytest.raises(ValueError):
        st.step(0, params, cache, net)


def test11_refresh(net):
    cache = st.StepCache()
    gen = st.StepGenerator(net, st.StepParams.from_template('comm'), cache)
    for n in range(1, 10):
        gen.step(n)
    # Identity word outside of any window is dropped on refresh
    cache.entries[12] = st.StepEntry(w.empty(net.gateset.alphabet),
                                     q.exp_axis((0, 0, 1), mp.ldexp(3, -13)),
                                     0)
    with sk.precision(256):
        cache.refresh(net.gateset)
        assert cache.precision == 256
        assert 12 not in cache
        assert set(range(1, 10)) <= set(cache.entries)
        for n, e in cache.items():
            assert st.in_window(q.pdistance(e.element, q.identity()), n)


def test12_step_lengths(net):
    cache = st.StepCache()
    params = st.StepParams.from_template('comm')
    gen = st.StepGenerator(net, params, cache)
    for n in range(1, 29):
        gen.step(n)
    C = st.step_constant(cache, params.alpha)
    for n, e in cache.items():
        if n == 0:
            continue
        assert e.length <= C * n ** params.alpha + 1e-9
    assert st.length_exponent(cache, 100, 200) is None
    assert 1.6 <= st.length_exponent(cache, 8, 28) <= 2.6


def test13_unreachable():
    gs = nt.GateSet([{'name': 'I',
                      'matrix': [['1', '0'], ['0', '0'],
                                 ['0', '0'], ['1', '0']]}])
    net = nt.build_net(gs, 2, probes=500)
    gen = st.StepGenerator(net)
    with pytest.raises(sk.StepUnreachable):
        gen.step(3)


def test14_candidates(net):
    gen = st.StepGenerator(net, st.StepParams.from_template('comm'))
    assert gen.candidates(9) == [4, 3, 2]
    assert gen.candidates(2) == [1, 0]
    assert gen.candidates(1) == [0]
    gen = st.StepGenerator(net, st.StepParams.from_template('et14'))
    assert gen.candidates(12) == [2, 1, 0]


def test15_conjugators(net):
    table = st.Conjugators(net, 3, span=16)
    assert list(table.lengths) == sorted(table.lengths)
    assert len(table) > 16
    for k in list(range(40)) + list(range(len(table) - 5, len(table))):
        w_k, g = table.entry(k)
        assert len(w_k) <= table.lengths[k]
        p = table.points[k]
        assert min(np.linalg.norm(p - g.numpy()),
                   np.linalg.norm(p + g.numpy())) < 1e-9
    # Net entries beyond the pool bound close the table
    assert table.lengths[-1] == max(len(c) for c in net.codes)


def test16_conjugation_profile():
    comm = w.template('comm')
    psi = mp.mpf('0.1')
    s = q.exp_axis((1, 2, 2), psi)
    grid, profile = st.conjugation_profile(s, comm, samples=33)
    assert len(grid) == len(profile) == 33
    assert grid[0] == 0 and math.isclose(grid[-1], math.pi)
    for theta, d in zip(grid, profile):
        assert abs(d - float(q.comm_distance(psi, theta))) < 1e-12

    # Predicted and exact angles agree for the conjugators of a table
    axis = np.array([1.0, 2.0, 2.0]) / 3
    u = q.exp_axis((0, 1, 1), mp.mpf('0.4'))
    theta = st.image_angles(u.numpy()[None], axis)[0]
    assert abs(theta - float(q.angle_between(s, q.conj(s, u)))) < 1e-12


def test17_cache_tables(net):
    cache = st.StepCache()
    calls = []

    def factory():
        calls.append(1)
        return len(calls)

    assert cache.table('x', factory) == 1
    assert cache.table('x', factory) == 1
    assert len(calls) == 1
    gen = st.StepGenerator(net, st.StepParams.from_template('comm'), cache)
    assert gen.pool is gen.pool
    assert gen.conjugators is gen.conjugators
    cache.refresh(net.gateset)
    assert cache.table('x', factory) == 2
