import pytest
import numpy as np
from fractions import Fraction
import skforge as sk
from skforge import series as s
from skforge import words as w


def test01_gauss_rational():
    a = s.GaussRational(Fraction(1, 2), 3)
    b = s.gauss((2, -1))
    assert a + b == s.GaussRational(Fraction(5, 2), 2)
    assert a * b == s.GaussRational(4, Fraction(11, 2))
    assert (a * b) / b == a
    assert a.conj() == s.GaussRational(Fraction(1, 2), -3)
    assert not s.GaussRational()
    assert s.gauss(2j) == s.GaussRational(0, 2)
    with pytest.raises(TypeError):
        s.gauss(0.5)


def test02_truncation():
    x = s.TruncatedSeries([0, 1], 3)
    y = x * x * x * x
    assert not y
    assert (x * x)[2] == 1
    one = s.TruncatedSeries.constant(1, 3)
    z = (one + x) * (one - x)
    assert z == one - x * x
    assert (x * x).valuation() == 2
    with pytest.raises(ValueError):
        x + s.TruncatedSeries([1], 4)


def test03_exp_det_inverse():
    x = s.i_pauli_half('Z')
    e = s.series_exp(x, 6)
    assert s.series_det(e) == s.TruncatedSeries.constant(1, 6)
    assert e.inverse() == s.series_exp(s.scale2(x, -1), 6)
    assert e @ e.inverse() == s.SeriesMatrix.identity(6)
    # exp(eps x) is unitary for anti-Hermitian x
    assert e @ s.adjoint(e) == s.SeriesMatrix.identity(6)


def test04_pauli_algebra():
    X, Y, Z = (s.PAULI[k] for k in 'XYZ')
    iZ = s.scale2(Z, (0, 1))
    assert s.matmul2(X, Y) == iZ
    for name in 'XYZ':
        P = s.PAULI[name]
        assert s.matmul2(P, P) == s.PAULI['I']


def test05_rational_rotations():
    for rot in s.RATIONAL_ROTATIONS:
        assert sum(x * x for x in rot) == 1
        u = s.quaternion_matrix(*rot)
        assert s.matmul2(u, s.adjoint2(u)) == s.PAULI['I']


def test06_word_series_commutator():
    # [exp(eps x), exp(eps y)] = 1 + eps^2 [x, y] + O(eps^3)
    g, h = s.pauli_inputs(4)
    degree, coeff = s.leading_coefficient(w.template('comm'), [g, h])
    assert degree == 2
    x, y = s.i_pauli_half('Z'), s.i_pauli_half('Y')
    xy, yx = s.matmul2(x, y), s.matmul2(y, x)
    expected = tuple(tuple(a - b for a, b in zip(r1, r2))
                     for r1, r2 in zip(xy, yx))
    assert coeff == expected


def test07_above_truncation():
    g, h = s.pauli_inputs(1)
    with pytest.raises(sk.AboveTruncation):
        s.leading_coefficient(w.template('comm'), [g, h])
    with pytest.raises(TypeError):
        s.eval_word_series(w.Word((1,), w.Alphabet(['A'], [0])), [g])


@pytest.mark.parametrize("n", range(1, 8))
def test08_nilfib(n):
    r = s.verify_nilfib(n)
    assert r.passed
    assert r.degree == w.fibonacci(n)
    assert r.leading == r.expected
    assert r.expected == 'i%s/2' % ('X', 'Z', 'Y')[n % 3]


@pytest.mark.parametrize("n", [8, 9])
def test09_nilfib_large(n):
    r = s.verify_nilfib(n)
    assert r.passed and r.degree == (21, 34)[n - 8]


def test10_ccan_witness():
    assert s.ccan_witness(w.template('comm')) == 2
    assert s.ccan_witness(w.template('len14')) == 4
    assert s.ccan_witness(w.template('et14')) == 5


def test11_word_series_homomorphism():
    rng = np.random.default_rng(5)
    g, h = s.pauli_inputs(5)
    for _ in range(10):
        x, y = [w.reduce(zip(rng.integers(0, 2, 8).tolist(),
                             rng.choice([-1, 1], 8).tolist()))
                for _ in range(2)]
        ex = s.eval_word_series(x, [g, h])
        ey = s.eval_word_series(y, [g, h])
        assert s.eval_word_series(w.concat(x, y), [g, h]) == ex @ ey
        assert s.eval_word_series(w.invert(x), [g, h]) @ ex == \
            s.SeriesMatrix.identity(5)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test12_leading_degree_orders(n):
    omega = w.elkasapy_pair(n).omega
    fib = w.fibonacci(n)
    for order in range(fib, fib + 4):
        assert s.leading_degree(omega, s.pauli_inputs(order), order) == fib
    with pytest.raises(sk.AboveTruncation):
        s.leading_degree(omega, s.pauli_inputs(fib - 1))
    with pytest.raises(ValueError):
        s.leading_degree(omega, s.pauli_inputs(fib + 1), fib + 2)
