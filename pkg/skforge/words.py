import math as _math
import logging as _logging
from functools import lru_cache as _lru_cache
from typing import NamedTuple as _NamedTuple

import numpy as _np

from skforge import quaternion as _q

_log = _logging.getLogger(__name__)


class Letter(_NamedTuple):
    generator: int
    sign: int


class Alphabet:
    '''
    Alphabet of a word algebra.

    Letters are stored as nonzero integer codes: ``+(i+1)`` is generator
    ``i`` and ``-(i+1)`` its formal inverse. A *free* alphabet keeps both
    signs. A *gate* alphabet (see :py:func:`skforge.net.GateSet`) has an
    explicit inverse pairing between generators, so every letter is stored
    with a positive code and ``A A^-1`` cancels whenever the gates are paired.
    Generators listed in ``identities`` are dropped by reduction.
    '''

    __slots__ = ('names', 'inverses', 'identities', '_inv', '_key')

    def __init__(self, names, inverses=None, identities=()):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("Alphabet(): duplicate letter names!")
        self.names = names
        self.inverses = None if inverses is None else tuple(inverses)
        self.identities = frozenset(identities)
        k = len(names)
        if self.inverses is None:
            inv = {c: -c for c in range(-k, k + 1) if c != 0}
        else:
            if len(self.inverses) != k:
                raise ValueError("Alphabet(): inverse table has the wrong size!")
            inv = {i + 1: j + 1 for i, j in enumerate(self.inverses)}
        self._inv = inv
        self._key = (names, self.inverses, tuple(sorted(self.identities)))

    @classmethod
    def free(cls, names):
        return cls(names)

    @property
    def size(self):
        return len(self.names)

    @property
    def is_free(self):
        return self.inverses is None

    def code(self, generator, sign=1):
        if not 0 <= generator < len(self.names) or sign not in (1, -1):
            raise ValueError("Alphabet.code(): invalid letter (%r, %r)!"
                             % (generator, sign))
        if sign == 1 or self.inverses is None:
            return sign * (generator + 1)
        return self.inverses[generator] + 1

    def letter(self, code):
        return Letter(abs(code) - 1, 1 if code > 0 else -1)

    def inverse_code(self, code):
        return self._inv[code]

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return 'Alphabet(%r)' % (self.names,)


FREE2 = Alphabet.free(('g', 'h'))
FREE3 = Alphabet.free(('f', 'g', 'h'))


class Word:
    '''
    Freely reduced word over an :py:class:`Alphabet`.

    The constructor trusts that ``codes`` is already reduced; use
    :py:func:`reduce` or :py:func:`parse_word` to build words from raw
    letters.
    '''

    __slots__ = ('codes', 'alphabet')

    def __init__(self, codes=(), alphabet=FREE2):
        self.codes = tuple(codes)
        self.alphabet = alphabet

    def __len__(self):
        return len(self.codes)

    def __iter__(self):
        return (self.alphabet.letter(c) for c in self.codes)

    def __eq__(self, other):
        return isinstance(other, Word) and self.codes == other.codes \
            and self.alphabet == other.alphabet

    def __hash__(self):
        return hash((self.codes, self.alphabet))

    def __mul__(self, other):
        return concat(self, other)

    def __str__(self):
        return format_word(self)

    def __repr__(self):
        return 'Word(%r)' % format_word(self)

    @property
    def letters(self):
        return list(self)


def _join(x, y, alphabet):
    # Both operands are reduced, so cancellation only happens at the seam
    inv = alphabet._inv
    lx, m = len(x), min(len(x), len(y))
    k = 0
    while k < m and inv[x[lx - 1 - k]] == y[k]:
        k += 1
    return x[:lx - k] + y[k:]


def _reduce_codes(codes, alphabet):
    inv, ident = alphabet._inv, alphabet.identities
    stack = []
    for c in codes:
        if abs(c) - 1 in ident:
            continue
        if stack and stack[-1] == inv[c]:
            stack.pop()
        else:
            stack.append(c)
    return tuple(stack)


def _check_alphabet(name, *words):
    alphabet = words[0].alphabet
    for w in words[1:]:
        if w.alphabet != alphabet:
            raise TypeError("%s(): words over incompatible alphabets!" % name)
    return alphabet


def reduce(letters, alphabet=FREE2):
    '''
    Builds a freely reduced word from a sequence of letters.

    Args:
        letters: iterable of :py:class:`Letter` or ``(generator, sign)`` pairs
        alphabet (Alphabet): alphabet of the result

    Returns:
        Word: the reduced word
    '''
    codes = [alphabet.code(int(g), int(s)) for g, s in letters]
    return Word(_reduce_codes(codes, alphabet), alphabet)


def empty(alphabet=FREE2):
    return Word((), alphabet)


def generator(i, alphabet=FREE2):
    '''Single-letter word of generator ``i``.'''
    return reduce([(i, 1)], alphabet)


def invert(w):
    inv = w.alphabet._inv
    return Word(tuple(inv[c] for c in reversed(w.codes)), w.alphabet)


def concat(*words):
    alphabet = _check_alphabet('concat', *words)
    codes = ()
    for w in words:
        codes = _join(codes, w.codes, alphabet)
    return Word(codes, alphabet)


def conjugate_word(w, u):
    '''Returns ``u w u^-1`` freely reduced.'''
    return concat(u, w, invert(u))


def commutator_word(w1, w2):
    '''Returns ``w1 w2 w1^-1 w2^-1`` freely reduced.'''
    return concat(w1, w2, invert(w1), invert(w2))


def substitute(template, *values):
    '''
    Replaces generator ``i`` of ``template`` by the word ``values[i]``
    (inverting for inverse letters) and freely reduces the result.

    The template must be over a free alphabet; the values share one
    alphabet, which becomes the alphabet of the result.
    '''
    if not template.alphabet.is_free:
        raise TypeError("substitute(): the template must be a free word!")
    if len(values) == 1 and not isinstance(values[0], Word):
        values = tuple(values[0])
    if len(values) < template.alphabet.size:
        raise ValueError("substitute(): expected %i values, got %i!"
                         % (template.alphabet.size, len(values)))
    alphabet = _check_alphabet('substitute', *values)
    pieces = {}
    for i, v in enumerate(values[:template.alphabet.size]):
        pieces[i + 1] = v.codes
        pieces[-(i + 1)] = invert(v).codes
    codes = ()
    for c in template.codes:
        codes = _join(codes, pieces[c], alphabet)
    return Word(codes, alphabet)


def evaluate(w, assignment):
    '''
    Value of a word as a group product.

    Args:
        w (Word): the word
        assignment: sequence (or mapping) sending generator indices to
            :py:class:`skforge.quaternion.GroupElement` values

    Returns:
        GroupElement: left-to-right product, the identity for the empty word
    '''
    table = {}
    for c in set(w.codes):
        g = assignment[abs(c) - 1]
        table[c] = g if c > 0 else _q.inverse(g)
    acc = _q.identity()
    for i, c in enumerate(w.codes):
        acc = _q.product(acc, table[c])
        if i % 64 == 63:
            acc = _q.normalize(acc)
    return _q.normalize(acc)


def exponent_sums(w):
    '''Image of a free word in the abelianisation, one sum per generator.'''
    sums = [0] * w.alphabet.size
    for c in w.codes:
        sums[abs(c) - 1] += 1 if c > 0 else -1
    return sums


# -------------------------------------------------------------------
#                      Text serialization
# -------------------------------------------------------------------

def format_word(w):
    '''
    Whitespace separated letter names; free inverses carry a trailing
    ``'``. The empty word is the empty string.
    '''
    names = w.alphabet.names
    out = []
    for c in w.codes:
        name = names[abs(c) - 1]
        out.append(name if c > 0 else name + "'")
    return ' '.join(out)


def parse_word(text, alphabet=FREE2):
    '''Inverse of :py:func:`format_word`. Accepts ``x'`` and ``x^-1``.'''
    index = {n: i for i, n in enumerate(alphabet.names)}
    letters = []
    for token in text.split():
        sign = 1
        if token.endswith("'"):
            token, sign = token[:-1], -1
        elif token.endswith('^-1'):
            token, sign = token[:-3], -1
        if token not in index:
            raise ValueError("parse_word(): unknown letter %r!" % token)
        letters.append((index[token], sign))
    return reduce(letters, alphabet)


# -------------------------------------------------------------------
#                      Elkasapy words
# -------------------------------------------------------------------

class ElkasapyPair(_NamedTuple):
    omega: Word
    zeta: Word
    index: int


class Endpoints(_NamedTuple):
    omega_head: Word
    omega_tail: Word
    zeta_head: Word
    zeta_tail: Word


class WordStats(_NamedTuple):
    length: int
    ccan_expected: int
    fib_index: int
    alpha: float


@_lru_cache(maxsize=None)
def fibonacci(n):
    '''Fibonacci numbers with ``f(1) = f(2) = 1``.'''
    if n < 1:
        raise ValueError("fibonacci(): n must be >= 1!")
    a, b = 1, 1
    for _ in range(n - 1):
        a, b = b, a + b
    return a


def _seam(x, y):
    # numpy flavour of _join for the free alphabet
    lx, m = len(x), min(len(x), len(y))
    k = 0
    while k < m and x[lx - 1 - k] == -y[k]:
        k += 1
    return _np.concatenate((x[:lx - k], y[k:]))


def _inv_array(x):
    return -x[::-1]


def _elkasapy_arrays(n):
    omega = _np.array([1], dtype=_np.int8)
    zeta = _np.array([-2, -1], dtype=_np.int8)
    for _ in range(n - 1):
        omega, zeta = (_seam(_inv_array(omega), _inv_array(zeta)),
                       _seam(omega, zeta))
    return omega, zeta


def _omega_commutator_arrays(n):
    prev, cur = _np.array([1], dtype=_np.int8), _np.array([2], dtype=_np.int8)
    if n == 1:
        return prev
    for _ in range(n - 2):
        a = _inv_array(cur)
        nxt = _seam(_seam(_seam(a, prev), cur), _inv_array(prev))
        prev, cur = cur, nxt
    return cur


@_lru_cache(maxsize=None)
def elkasapy_pair(n):
    '''
    The pair ``(omega_n, zeta_n)`` built by

    ``(omega_1, zeta_1) = (g, h^-1 g^-1)`` and
    ``(omega_{n+1}, zeta_{n+1}) = (omega_n^-1 zeta_n^-1, omega_n zeta_n)``.
    '''
    if n < 1:
        raise ValueError("elkasapy_pair(): n must be >= 1!")
    omega, zeta = _elkasapy_arrays(n)
    return ElkasapyPair(Word(omega.tolist(), FREE2),
                        Word(zeta.tolist(), FREE2), n)


def omega_by_commutators(n):
    '''
    ``omega_n`` from ``omega_1 = g``, ``omega_2 = h`` and
    ``omega_{n+2} = [omega_{n+1}^-1, omega_n]``.
    '''
    if n < 1:
        raise ValueError("omega_by_commutators(): n must be >= 1!")
    return Word(_omega_commutator_arrays(n).tolist(), FREE2)


def elkasapy_length(n):
    '''Closed form length of ``omega_n`` for ``n >= 2``.'''
    if n < 2:
        raise ValueError("elkasapy_length(): n must be >= 2!")
    offset = (2, 4, -6)[n % 3]
    return (13 * 2 ** (n - 2) + offset) // 7


def zeta_length(n):
    '''Closed form length of ``zeta_n`` for ``n >= 2``.'''
    if n < 2:
        raise ValueError("zeta_length(): n must be >= 2!")
    offset = (2, 4, 8)[n % 3]
    return (13 * 2 ** (n - 2) + offset) // 7


def check_elkasapy(n_max):
    '''
    Computes ``omega_n`` for ``2 <= n <= n_max`` with both recurrences and
    compares them with each other and with the closed form lengths.

    Returns:
        list: one ``(n, length, expected, recurrences_agree)`` tuple per n
    '''
    rows = []
    omega, zeta = _elkasapy_arrays(1)
    prev = _np.array([1], dtype=_np.int8)
    cur = _np.array([2], dtype=_np.int8)
    for n in range(2, n_max + 1):
        omega, zeta = (_seam(_inv_array(omega), _inv_array(zeta)),
                       _seam(omega, zeta))
        if n > 2:
            nxt = _seam(_seam(_seam(_inv_array(cur), prev), cur),
                        _inv_array(prev))
            prev, cur = cur, nxt
        agree = len(cur) == len(omega) and bool(_np.array_equal(cur, omega))
        rows.append((n, len(omega), elkasapy_length(n), agree))
    return rows


def endpoints(n):
    '''
    Boundary letters of ``omega_n`` and ``zeta_n`` by the residue of ``n``
    modulo 3. Heads and tails are short words that must prefix (resp.
    suffix) the corresponding Elkasapy word.
    '''
    if n < 2:
        raise ValueError("endpoints(): n must be >= 2!")
    p = lambda s: parse_word(s, FREE2)  # noqa
    r = n % 3
    if r == 0:
        return Endpoints(p("h'"), p("h g'"), p('h'), p("h' g'"))
    elif r == 1:
        return Endpoints(p("g h'"), p("h'"), p("h'"), p("h' g'"))
    else:
        return Endpoints(p('h'), p('h'), p("g h'"), p("h' g'"))


def has_endpoints(w, head, tail):
    k, m = len(head), len(tail)
    return len(w) >= max(k, m) and w.codes[:k] == head.codes \
        and w.codes[len(w) - m:] == tail.codes


def _array_has_ends(x, head, tail):
    k, m = len(head), len(tail)
    return len(x) >= max(k, m) and x[:k].tolist() == list(head.codes) \
        and x[len(x) - m:].tolist() == list(tail.codes)


def check_endpoints(n_max):
    '''
    Checks the boundary letters of :py:func:`endpoints` and the closed form
    :py:func:`zeta_length` for ``2 <= n <= n_max``.

    Returns:
        list: one ``(n, ends_match, zeta_len, zeta_expected)`` tuple per n
    '''
    rows = []
    omega, zeta = _elkasapy_arrays(1)
    for n in range(2, n_max + 1):
        omega, zeta = (_seam(_inv_array(omega), _inv_array(zeta)),
                       _seam(omega, zeta))
        e = endpoints(n)
        ok = _array_has_ends(omega, e.omega_head, e.omega_tail) and \
            _array_has_ends(zeta, e.zeta_head, e.zeta_tail)
        rows.append((n, ok, len(zeta), zeta_length(n)))
    return rows


def word_stats(n):
    '''Length, expected cancellation degree and exponent of ``omega_n``.'''
    if n < 3:
        raise ValueError("word_stats(): n must be >= 3!")
    length = elkasapy_length(n)
    c = fibonacci(n)
    return WordStats(length, c, n, _math.log(length) / _math.log(c))


# -------------------------------------------------------------------
#                      Step templates
# -------------------------------------------------------------------

def template(name):
    '''
    Named free words used as step templates and as test subjects:

    * ``comm``: ``[g, h]``
    * ``elk3`` ... ``elkN``: the Elkasapy word ``omega_N``
    * ``et14``: ``[[g, h], [h, g^-1]]``
    * ``len14``: ``[[f, g], [g, h]]`` (three generators)
    '''
    if name == 'comm':
        return commutator_word(generator(0), generator(1))
    if name == 'et14':
        g, h = generator(0), generator(1)
        return commutator_word(commutator_word(g, h),
                               commutator_word(h, invert(g)))
    if name == 'len14':
        f, g, h = (generator(i, FREE3) for i in range(3))
        return commutator_word(commutator_word(f, g), commutator_word(g, h))
    if name.startswith('elk') and name[3:].isdigit() and int(name[3:]) >= 3:
        return elkasapy_pair(int(name[3:])).omega
    raise ValueError("template(): unknown template %r!" % name)


def template_degree(name):
    '''Expected conjugate cancellation degree of a named template.'''
    if name == 'comm':
        return 2
    if name == 'et14':
        return 5
    if name == 'len14':
        return 4
    if name.startswith('elk') and name[3:].isdigit():
        return fibonacci(int(name[3:]))
    raise ValueError("template_degree(): unknown template %r!" % name)


def template_names(max_elk=9):
    return ['comm', 'et14'] + ['elk%i' % i for i in range(3, max_elk + 1)]

