'''
Exact truncated power series in a formal parameter ``eps`` with Gaussian
rational coefficients, and 2x2 matrices over them.

The module answers one question exactly: to which order in ``eps`` does a
word evaluated at near-identity inputs ``exp(eps x_i)`` agree with the
identity? No floating point arithmetic is involved anywhere.
'''

import logging as _logging
from fractions import Fraction as _Fraction
from typing import NamedTuple as _NamedTuple

from skforge import errors as _errors
from skforge import words as _words

_log = _logging.getLogger(__name__)

_ZERO = _Fraction(0)


class GaussRational:
    '''Exact complex number ``re + i im`` with rational parts.'''

    __slots__ = ('re', 'im')

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is _Fraction else _Fraction(re)
        self.im = im if type(im) is _Fraction else _Fraction(im)

    def __add__(self, other):
        other = gauss(other)
        return GaussRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = gauss(other)
        return GaussRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return gauss(other) - self

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __mul__(self, other):
        other = gauss(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b:
            return GaussRational(a * c, a * d if d else _ZERO)
        if not d:
            return GaussRational(a * c if a else _ZERO, b * c)
        return GaussRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = gauss(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("GaussRational(): division by zero!")
        return self * GaussRational(other.re / n, -other.im / n)

    def conj(self):
        return GaussRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            other = gauss(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return 'GaussRational(%s, %s)' % (self.re, self.im)


def gauss(value):
    '''
    Converts ints, ``Fraction`` values, ``(re, im)`` pairs and complex
    numbers with integral parts to :py:class:`GaussRational`.
    '''
    if isinstance(value, GaussRational):
        return value
    if isinstance(value, (int, _Fraction)):
        return GaussRational(value, 0)
    if isinstance(value, tuple) and len(value) == 2:
        return GaussRational(value[0], value[1])
    if isinstance(value, complex) and value.real.is_integer() \
            and value.imag.is_integer():
        return GaussRational(int(value.real), int(value.imag))
    raise TypeError("gauss(): unsupported coefficient %r!" % (value,))


class TruncatedSeries:
    '''
    Series ``sum_k coeffs[k] eps^k`` truncated after degree ``order``.
    Products are exact below the truncation order.
    '''

    __slots__ = ('coeffs', 'order')

    def __init__(self, coeffs, order):
        coeffs = [gauss(c) for c in coeffs][:order + 1]
        coeffs += [GaussRational()] * (order + 1 - len(coeffs))
        self.coeffs = tuple(coeffs)
        self.order = order

    @classmethod
    def zero(cls, order):
        return cls((), order)

    @classmethod
    def constant(cls, value, order):
        return cls((value,), order)

    def _check(self, other, name):
        if not isinstance(other, TruncatedSeries):
            raise TypeError("%s(): expected a TruncatedSeries!" % name)
        if other.order != self.order:
            raise ValueError("%s(): truncation orders differ (%i vs %i)!"
                             % (name, self.order, other.order))

    def __getitem__(self, k):
        return self.coeffs[k]

    def __add__(self, other):
        self._check(other, 'add')
        return TruncatedSeries([x + y for x, y in zip(self.coeffs, other.coeffs)],
                               self.order)

    def __sub__(self, other):
        self._check(other, 'sub')
        return TruncatedSeries([x - y for x, y in zip(self.coeffs, other.coeffs)],
                               self.order)

    def __neg__(self):
        return TruncatedSeries([-x for x in self.coeffs], self.order)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            s = gauss(other)
            return TruncatedSeries([x * s for x in self.coeffs], self.order)
        self._check(other, 'mul')
        n = self.order
        re = [_ZERO] * (n + 1)
        im = [_ZERO] * (n + 1)
        b = [(j, y.re, y.im) for j, y in enumerate(other.coeffs) if y]
        for i, x in enumerate(self.coeffs):
            if not x:
                continue
            xr, xi = x.re, x.im
            for j, yr, yi in b:
                k = i + j
                if k > n:
                    break
                if xr:
                    if yr:
                        re[k] += xr * yr
                    if yi:
                        im[k] += xr * yi
                if xi:
                    if yi:
                        re[k] -= xi * yi
                    if yr:
                        im[k] += xi * yr
        return TruncatedSeries([GaussRational(r, i) for r, i in zip(re, im)], n)

    __rmul__ = __mul__

    def conj(self):
        return TruncatedSeries([x.conj() for x in self.coeffs], self.order)

    def valuation(self):
        '''Degree of the first nonzero coefficient, ``None`` for zero.'''
        for k, x in enumerate(self.coeffs):
            if x:
                return k
        return None

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, TruncatedSeries) and \
            self.order == other.order and self.coeffs == other.coeffs

    def __repr__(self):
        terms = ['(%s%+si)e^%i' % (c.re, c.im, k)
                 for k, c in enumerate(self.coeffs) if c]
        return 'TruncatedSeries(%s; O(e^%i))' % (' + '.join(terms) or '0',
                                                 self.order + 1)


class SeriesMatrix:
    '''
    2x2 matrix of :py:class:`TruncatedSeries`, stored row-major.
    '''

    __slots__ = ('entries', 'order')

    def __init__(self, entries, order):
        entries = tuple(entries)
        if len(entries) != 4:
            raise ValueError("SeriesMatrix(): expected four entries!")
        self.entries = entries
        self.order = order

    @classmethod
    def identity(cls, order):
        one = TruncatedSeries.constant(1, order)
        zero = TruncatedSeries.zero(order)
        return cls((one, zero, zero, one), order)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[2 * i + j]

    def __matmul__(self, other):
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return SeriesMatrix((_mac(a, e, b, g), _mac(a, f, b, h),
                             _mac(c, e, d, g), _mac(c, f, d, h)), self.order)

    __mul__ = __matmul__

    def __add__(self, other):
        return SeriesMatrix([x + y for x, y in zip(self.entries, other.entries)],
                            self.order)

    def __sub__(self, other):
        return SeriesMatrix([x - y for x, y in zip(self.entries, other.entries)],
                            self.order)

    def __neg__(self):
        return SeriesMatrix([-x for x in self.entries], self.order)

    def __eq__(self, other):
        return isinstance(other, SeriesMatrix) and self.entries == other.entries

    def coefficient(self, k):
        '''The degree ``k`` coefficient as a 2x2 nested tuple.'''
        e = self.entries
        return ((e[0][k], e[1][k]), (e[2][k], e[3][k]))

    def constant_term(self):
        return self.coefficient(0)

    def adjoint(self):
        '''Conjugate transpose, conjugating every coefficient.'''
        a, b, c, d = self.entries
        return SeriesMatrix((a.conj(), c.conj(), b.conj(), d.conj()), self.order)

    def det(self):
        a, b, c, d = self.entries
        return a * d - b * c

    def inverse(self):
        '''
        Inverse of an element of ``1 + eps M[[eps]]`` by the Neumann series
        ``(1 + S)^-1 = sum_k (-S)^k``, exact through the truncation order.
        '''
        one = SeriesMatrix.identity(self.order)
        if self.constant_term() != one.constant_term():
            raise ValueError("SeriesMatrix.inverse(): constant term must be "
                             "the identity!")
        neg = one - self
        result, power = one, one
        for _ in range(self.order):
            power = power @ neg
            if not any(power.entries):
                break
            result = result + power
        return result

    def __repr__(self):
        return 'SeriesMatrix(%r)' % (self.entries,)


def _mac(a, b, c, d):
    if not a or not b:
        return c * d if c and d else TruncatedSeries.zero(a.order)
    if not c or not d:
        return a * b
    return a * b + c * d


# -------------------------------------------------------------------
#                   Constant 2x2 Gaussian matrices
# -------------------------------------------------------------------

def _m(a, b, c, d):
    return ((gauss(a), gauss(b)), (gauss(c), gauss(d)))


PAULI = {
    'I': _m(1, 0, 0, 1),
    'X': _m(0, 1, 1, 0),
    'Y': _m(0, (0, -1), (0, 1), 0),
    'Z': _m(1, 0, 0, -1),
}


def matmul2(x, y):
    return tuple(tuple(x[i][0] * y[0][j] + x[i][1] * y[1][j] for j in range(2))
                 for i in range(2))


def scale2(x, s):
    s = gauss(s)
    return tuple(tuple(v * s for v in row) for row in x)


def adjoint2(x):
    return ((x[0][0].conj(), x[1][0].conj()), (x[0][1].conj(), x[1][1].conj()))


def i_pauli_half(name):
    '''``i P / 2`` for a Pauli matrix ``P``.'''
    return scale2(PAULI[name], GaussRational(0, _Fraction(1, 2)))


def quaternion_matrix(a, b, c, d):
    '''Exact 2x2 matrix of the quaternion ``a + ib X + ic Y + id Z``.'''
    a, b, c, d = (_Fraction(v) for v in (a, b, c, d))
    return _m((a, d), (c, b), (-c, b), (a, -d))


# Unit quaternions with rational coordinates, from Pythagorean quadruples
RATIONAL_ROTATIONS = (
    (_Fraction(3, 5), _Fraction(4, 5), _ZERO, _ZERO),
    (_Fraction(1, 5), _Fraction(2, 5), _Fraction(2, 5), _Fraction(4, 5)),
    (_Fraction(2, 7), _Fraction(3, 7), _Fraction(6, 7), _ZERO),
    (_Fraction(1, 9), _Fraction(4, 9), _Fraction(8, 9), _ZERO),
    (_Fraction(2, 9), _Fraction(4, 9), _Fraction(5, 9), _Fraction(6, 9)),
    (_Fraction(2, 3), _Fraction(2, 3), _Fraction(1, 3), _ZERO),
    (_Fraction(1, 2), _Fraction(1, 2), _Fraction(1, 2), _Fraction(1, 2)),
    (_Fraction(4, 9), _Fraction(4, 9), _Fraction(7, 9), _ZERO),
)


def conjugate_matrix(x, q):
    '''``U x U^*`` where ``U`` is the matrix of the rational unit quaternion
    ``q``.'''
    u = quaternion_matrix(*q)
    return matmul2(matmul2(u, x), adjoint2(u))


# -------------------------------------------------------------------
#                        Series operations
# -------------------------------------------------------------------

def series_exp(x, order):
    '''
    ``exp(eps x) = sum_{k <= order} (eps x)^k / k!`` for a constant 2x2
    matrix ``x`` of Gaussian rationals.
    '''
    x = tuple(tuple(gauss(v) for v in row) for row in x)
    term = PAULI['I']
    coeffs = [[term[i][j]] for i in range(2) for j in range(2)]
    for k in range(1, order + 1):
        term = scale2(matmul2(term, x), _Fraction(1, k))
        for i in range(2):
            for j in range(2):
                coeffs[2 * i + j].append(term[i][j])
    return SeriesMatrix([TruncatedSeries(c, order) for c in coeffs], order)


def series_det(m):
    return m.det()


def adjoint(m):
    return m.adjoint()


def pauli_inputs(order):
    '''The input pair ``g = exp(eps iZ/2)``, ``h = exp(eps iY/2)``.'''
    return (series_exp(i_pauli_half('Z'), order),
            series_exp(i_pauli_half('Y'), order))


def eval_word_series(w, assignment):
    '''
    Product of series matrices following the word ``w``.

    Args:
        w (Word): word over a free alphabet
        assignment: sequence sending generator indices to
            :py:class:`SeriesMatrix` values in ``1 + eps M[[eps]]``

    Returns:
        SeriesMatrix: the product, exact through the truncation order
    '''
    if not w.alphabet.is_free:
        raise TypeError("eval_word_series(): expected a free word!")
    assignment = list(assignment)
    if len(assignment) < w.alphabet.size:
        raise ValueError("eval_word_series(): missing generator values!")
    order = assignment[0].order
    table = {}
    for c in set(w.codes):
        m = assignment[abs(c) - 1]
        table[c] = m if c > 0 else m.inverse()
    acc = SeriesMatrix.identity(order)
    for c in w.codes:
        acc = acc @ table[c]
    return acc


def leading_coefficient(w, assignment):
    '''
    Smallest degree ``k >= 1`` at which ``eval_word_series(w) - 1`` has a
    nonzero coefficient, together with that coefficient.

    Raises:
        AboveTruncation: all coefficients through the truncation order vanish
    '''
    m = eval_word_series(w, assignment)
    for k in range(1, m.order + 1):
        c = m.coefficient(k)
        if any(v for row in c for v in row):
            return k, c
    raise _errors.AboveTruncation(
        "leading_coefficient(): no nonzero coefficient up to degree %i!" % m.order)


def leading_degree(w, assignment, order=None):
    '''
    Smallest degree ``k >= 1`` with a nonzero coefficient in
    ``eval_word_series(w) - 1``.

    The truncation order travels with the assignment series; when ``order``
    is given it must match theirs.

    Raises:
        ValueError: ``order`` differs from the order of the assignment
        AboveTruncation: all coefficients through the order vanish
    '''
    assignment = list(assignment)
    if order is not None and any(m.order != order for m in assignment):
        raise ValueError("leading_degree(): the assignment is truncated at "
                         "another order than %i!" % order)
    return leading_coefficient(w, assignment)[0]


class NilfibReport(_NamedTuple):
    n: int
    fib: int
    order: int
    degree: int
    leading: str
    expected: str
    passed: bool


_NILFIB_PAULI = ('X', 'Z', 'Y')


def verify_nilfib(n):
    '''
    Evaluates ``omega_n`` at ``g = exp(eps iZ/2)``, ``h = exp(eps iY/2)`` and
    checks that it deviates from the identity first at degree ``f_n`` with
    coefficient ``iZ/2``, ``iY/2`` or ``iX/2`` for ``n = 1, 2, 0 (mod 3)``.
    '''
    fib = _words.fibonacci(n)
    order = fib + 2
    expected = _NILFIB_PAULI[n % 3]
    omega = _words.elkasapy_pair(n).omega
    try:
        degree, coeff = leading_coefficient(omega, pauli_inputs(order))
    except _errors.AboveTruncation:
        return NilfibReport(n, fib, order, -1, '-', 'i%s/2' % expected, False)
    leading = '?'
    for name in 'XYZ':
        for sign, prefix in ((1, ''), (-1, '-')):
            if coeff == scale2(i_pauli_half(name), sign):
                leading = '%si%s/2' % (prefix, name)
    passed = degree == fib and leading == 'i%s/2' % expected
    _log.debug("verify_nilfib(): n=%i degree=%i leading=%s", n, degree, leading)
    return NilfibReport(n, fib, order, degree, leading, 'i%s/2' % expected,
                        passed)


def ccan_witness(w, trials=4, order=8):
    '''
    Upper bound witness for the conjugate cancellation degree of ``w``.

    The generators are sent to ``exp(eps x)``, ``exp(eps x^u1)``, ... with
    ``x = iZ/2`` and exact rational rotations ``u_j``; the smallest leading
    degree observed over ``trials`` choices of rotations is returned.
    '''
    k = w.alphabet.size
    x = i_pauli_half('Z')
    base = series_exp(x, order)
    best = None
    for t in range(trials):
        inputs = [base]
        for j in range(1, k):
            q = RATIONAL_ROTATIONS[(t * (k - 1) + j - 1) % len(RATIONAL_ROTATIONS)]
            inputs.append(series_exp(conjugate_matrix(x, q), order))
        try:
            degree = leading_degree(w, inputs, order)
        except _errors.AboveTruncation:
            continue
        best = degree if best is None else min(best, degree)
    if best is None:
        raise _errors.AboveTruncation(
            "ccan_witness(): no trial deviates from the identity up to "
            "degree %i!" % order)
    return best
