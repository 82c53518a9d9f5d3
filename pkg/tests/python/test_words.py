import math
import pytest
import mpmath as mp
import numpy as np
import skforge as sk
from skforge import words as w
from skforge import quaternion as q


def word(text, alphabet=w.FREE2):
    return w.parse_word(text, alphabet)


def test01_free_reduction():
    assert word("g g' h") == word("h")
    assert word("g h h' g'") == w.empty()
    assert len(word("g h g' h'")) == 4
    assert w.reduce([(0, 1), (1, 1), (1, -1), (0, 1)]) == word("g g")


def test02_invert_concat():
    x = word("g h g'")
    assert w.invert(x) == word("g h' g'")
    assert w.concat(x, w.invert(x)) == w.empty()
    assert w.concat(word("g h"), word("h' g")) == word("g g")
    assert x * word("g") == word("g h")


def test03_text_round_trip():
    x = word("g h' g' h")
    assert w.format_word(x) == "g h' g' h"
    assert word("g h^-1 g^-1 h") == x
    assert w.format_word(w.empty()) == ''
    with pytest.raises(ValueError):
        word("g k")


def test04_commutator_conjugate():
    g, h = w.generator(0), w.generator(1)
    assert w.commutator_word(g, h) == word("g h g' h'")
    assert w.commutator_word(g, g) == w.empty()
    assert w.conjugate_word(g, h) == word("h g h'")


def test05_substitute():
    comm = w.template('comm')
    x, y = word("g g"), word("h g")
    assert w.substitute(comm, x, y) == w.commutator_word(x, y)
    assert w.substitute(comm, x, x) == w.empty()
    with pytest.raises(TypeError):
        w.concat(word("g"), w.generator(0, w.FREE3))


def test06_evaluate():
    with sk.precision(128):
        rng = np.random.default_rng(0)
        g, h = q.random_element(rng), q.random_element(rng)
        value = w.evaluate(word("g h g' h'"), [g, h])
        assert q.distance(value, q.commutator(g, h)) < sk.tolerance(16)
        assert w.evaluate(w.empty(), [g, h]) == q.identity()


def test07_fibonacci():
    assert [w.fibonacci(n) for n in range(1, 10)] == \
        [1, 1, 2, 3, 5, 8, 13, 21, 34]


def test08_elkasapy_small():
    assert w.elkasapy_pair(1).omega == word("g")
    assert w.elkasapy_pair(1).zeta == word("h' g'")
    assert w.elkasapy_pair(2).omega == word("h")
    assert w.elkasapy_pair(3).omega == w.commutator_word(word("h'"), word("g"))
    assert [len(w.elkasapy_pair(n).omega) for n in range(2, 8)] == \
        [1, 4, 8, 14, 30, 60]


@pytest.mark.parametrize("n", range(1, 15))
def test09_recurrences_agree(n):
    assert w.omega_by_commutators(n) == w.elkasapy_pair(n).omega


def test10_elkasapy_lengths():
    rows = w.check_elkasapy(24)
    assert len(rows) == 23
    for n, length, expected, agree in rows:
        assert length == expected == (13 * 2 ** (n - 2) +
                                      (2, 4, -6)[n % 3]) // 7
        assert agree


def test11_endpoints():
    rows = w.check_endpoints(20)
    assert len(rows) == 19
    for n, ends, zlen, zexp in rows:
        assert ends
        assert zlen == zexp
    for n in range(3, 12):
        pair = w.elkasapy_pair(n)
        e = w.endpoints(n)
        assert w.has_endpoints(pair.omega, e.omega_head, e.omega_tail)
        assert w.has_endpoints(pair.zeta, e.zeta_head, e.zeta_tail)


def test12_word_stats():
    s = w.word_stats(5)
    assert s.length == 14 and s.ccan_expected == 5 and s.fib_index == 5
    assert math.isclose(s.alpha, math.log(14) / math.log(5))
    # The exponent approaches log_phi(2) from above
    assert w.word_stats(30).alpha > sk.golden_exponent
    assert w.word_stats(30).alpha - sk.golden_exponent < 0.05
    with pytest.raises(ValueError):
        w.word_stats(2)


@pytest.mark.parametrize("name", w.template_names() + ['len14'])
def test13_templates(name):
    t = w.template(name)
    assert not any(w.exponent_sums(t))
    assert w.template_degree(name) >= 2


def test14_example_words():
    assert len(w.template('len14')) == 14
    assert len(w.template('et14')) == 14
    assert w.template('len14').alphabet.size == 3
    with pytest.raises(ValueError):
        w.template('bogus')


def test15_alphabet():
    a = w.Alphabet(['I', 'H', 'T', 'Tdg'], inverses=[0, 1, 3, 2],
                   identities=[0])
    assert not a.is_free
    x = w.parse_word('H H T Tdg I T', a)
    assert w.format_word(x) == 'T'
    assert w.invert(w.parse_word('T H', a)) == w.parse_word('H Tdg', a)


def random_word(rng, alphabet, length):
    gens = rng.integers(0, alphabet.size, length).tolist()
    signs = rng.choice([-1, 1], length).tolist()
    return w.reduce(list(zip(gens, signs)), alphabet)


def test16_evaluate_homomorphism():
    rng = np.random.default_rng(2)
    with sk.precision(128):
        values = [q.random_element(rng) for _ in range(3)]
        for _ in range(50):
            x = random_word(rng, w.FREE3, int(rng.integers(0, 40)))
            y = random_word(rng, w.FREE3, int(rng.integers(0, 40)))
            gx, gy = w.evaluate(x, values), w.evaluate(y, values)
            assert q.distance(w.evaluate(w.concat(x, y), values),
                              gx * gy) < sk.tolerance(16)
            assert q.distance(w.evaluate(w.invert(x), values),
                              q.inverse(gx)) < sk.tolerance(16)


def test17_substitute_evaluate():
    rng = np.random.default_rng(3)
    with sk.precision(128):
        values = [q.random_element(rng) for _ in range(3)]
        for _ in range(30):
            t = random_word(rng, w.FREE2, int(rng.integers(1, 16)))
            x = random_word(rng, w.FREE3, int(rng.integers(0, 12)))
            y = random_word(rng, w.FREE3, int(rng.integers(0, 12)))
            direct = w.evaluate(w.substitute(t, x, y), values)
            nested = w.evaluate(t, [w.evaluate(x, values),
                                    w.evaluate(y, values)])
            assert q.distance(direct, nested) < sk.tolerance(16)
