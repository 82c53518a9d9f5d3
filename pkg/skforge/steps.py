import math as _math
import logging as _logging
from dataclasses import dataclass as _dataclass
from typing import NamedTuple as _NamedTuple

import mpmath as _mp
import numpy as _np

from skforge import config as _config
from skforge import detail as _detail
from skforge import errors as _errors
from skforge import quaternion as _q
from skforge import words as _words

_log = _logging.getLogger(__name__)


@_dataclass(frozen=True)
class StepParams:
    '''
    Template word and search knobs of the step generator.

    Args:
        word (Word): two-generator template ``omega`` with zero exponent sums
        ell (int): ``len(omega)``
        c (int): conjugate cancellation degree of ``omega``
        window (int): number of candidate indices ``m`` tried per step
        conj_len (int): maximum conjugator word length
        name (str): template name for reports
    '''
    word: _words.Word
    ell: int
    c: int
    window: int = _config.STEP_WINDOW
    conj_len: int = _config.STEP_CONJ_LEN
    name: str = 'custom'

    def __post_init__(self):
        if self.c < 2:
            raise ValueError("StepParams(): c must be >= 2!")
        if self.ell < 4:
            raise ValueError("StepParams(): ell must be >= 4!")
        if self.alpha <= 1:
            raise ValueError("StepParams(): alpha = log(ell)/log(c) must "
                             "exceed 1!")
        if self.word.alphabet.size != 2:
            raise ValueError("StepParams(): the template needs exactly two "
                             "generators!")
        if any(_words.exponent_sums(self.word)):
            raise ValueError("StepParams(): the template must have zero "
                             "exponent sums!")
        if self.window < 1 or self.conj_len < 0:
            raise ValueError("StepParams(): invalid window or conj_len!")

    @property
    def alpha(self):
        return _math.log(self.ell) / _math.log(self.c)

    @classmethod
    def from_template(cls, name=None, window=None, conj_len=None):
        if name is None:
            name = _config.STEP_TEMPLATE
        w = _words.template(name)
        return cls(w, len(w), _words.template_degree(name),
                   _config.STEP_WINDOW if window is None else window,
                   _config.STEP_CONJ_LEN if conj_len is None else conj_len,
                   name)


class StepEntry(_NamedTuple):
    word: _words.Word
    element: _q.GroupElement
    length: int




def in_window(d, n):
    '''``2^-n < d < 2^(1-n)``'''
    return _mp.ldexp(1, -n) < d < _mp.ldexp(1, 1 - n)


class StepCache:
    '''
    Memo table ``n -> s_n``. Every stored step lies strictly inside its
    distance window; distances are projective.
    '''

    def __init__(self):
        self.entries = {}
        self.hits = 0
        self.precision = _mp.mp.prec
        self._tables = {}

    def __contains__(self, n):
        return n in self.entries

    def __getitem__(self, n):
        return self.entries[n]

    def __len__(self):
        return len(self.entries)

    def get(self, n):
        return self.entries.get(n)

    def items(self):
        return sorted(self.entries.items())

    def store(self, n, word, element):
        d = _q.pdistance(element, _q.identity())
        if not in_window(d, n):
            raise _errors.StepUnreachable(
                "StepCache.store(): s_%i at distance %s violates its window!"
                % (n, _mp.nstr(d, 8)))
        entry = StepEntry(word, element, len(word))
        self.entries[n] = entry
        _log.debug("step: s_%i has length %i", n, len(word))
        return entry

    def table(self, key, factory):
        '''
        Auxiliary table stored under ``key``, built by ``factory()`` on first
        use. Tables are dropped by :py:meth:`refresh`.
        '''
        value = self._tables.get(key)
        if value is None:
            value = self._tables[key] = factory()
        return value

    def refresh(self, gateset):
        '''
        Re-evaluates every cached word at the working precision, dropping
        steps that no longer satisfy their window.
        '''
        bits = _mp.mp.prec
        for n, entry in list(self.entries.items()):
            g = gateset.evaluate(entry.word)
            if in_window(_q.pdistance(g, _q.identity()), n):
                self.entries[n] = StepEntry(entry.word, g, entry.length)
            else:
                del self.entries[n]
        self._tables.clear()
        self.precision = bits


def _pool_order(net):
    return sorted(range(len(net)), key=lambda i: (len(net.codes[i]),
                                                  net.codes[i]))


@_q.floor_precision
def conjugator_pool(net, conj_len):
    '''
    Net entries of word length at most ``conj_len``, ordered by length and
    then lexicographically, with their values at the working precision.
    '''
    idx = [i for i in _pool_order(net) if len(net.codes[i]) <= conj_len]
    return [(net.word(i), net.element(i)) for i in idx]


def image_angles(quats, axis):
    '''
    Corner angles between ``axis`` and its images under conjugation by the
    rows of ``quats``, in double precision.

    Args:
        quats (numpy.ndarray): unit quaternions of shape ``(K, 4)``
        axis (numpy.ndarray): unit vector of shape ``(3,)``
    '''
    axis = _np.asarray(axis, dtype=_np.float64)
    v = _np.concatenate(([0.0], axis))
    img = _detail.qmul(_detail.qmul(quats, v), _detail.qconj(quats))[:, 1:]
    cos = img @ axis
    sin = _np.linalg.norm(_np.cross(img, axis), axis=1)
    return _np.arctan2(sin, cos)


def _unit_axis(g):
    axis, _ = _q.log_elem(g)
    return _np.array([float(x) for x in axis])


class Conjugators:
    '''
    Conjugator candidates of the step generator: the products ``a b`` of two
    words of the conjugator pool, followed by the net entries longer than
    the pool bound. Candidates are ordered by ``len(a) + len(b)``, then by
    the pool order of ``a`` and ``b``.

    Args:
        net (Net): the net
        conj_len (int): pool bound ``L_u``
        span (int | None): only the first ``span`` pool words enter products
    '''

    def __init__(self, net, conj_len, span=None):
        if span is None:
            span = _config.STEP_PAIR_SPAN
        self.net = net
        order = _np.array(_pool_order(net), dtype=_np.int64)
        rank = _np.empty(len(order), dtype=_np.int64)
        rank[order] = _np.arange(len(order))
        lengths = net.lengths
        short = order[lengths[order] <= conj_len][:max(1, int(span))]
        rest = order[lengths[order] > conj_len]
        one = order[0]

        a = _np.repeat(short, len(short))
        b = _np.tile(short, len(short))
        # (u, 1) repeats the single u
        keep = (lengths[b] > 0) | (lengths[a] == 0)
        a = _np.concatenate((a[keep], _np.full(len(rest), one)))
        b = _np.concatenate((b[keep], rest))
        total = lengths[a] + lengths[b]
        idx = _np.lexsort((rank[b], rank[a], total))
        self.left, self.right, self.lengths = a[idx], b[idx], total[idx]
        q = _detail.qmul(net.points[self.left], net.points[self.right])
        self.points = q / _np.linalg.norm(q, axis=1, keepdims=True)
        self.pool_points = net.points[short]

    def __len__(self):
        return len(self.left)

    def word(self, k):
        return _words.concat(self.net.word(int(self.left[k])),
                             self.net.word(int(self.right[k])))

    def entry(self, k):
        '''Word of candidate ``k`` and its value at the working precision.'''
        w = self.word(k)
        return w, self.net.gateset.evaluate(w)

    def angles(self, axis):
        return image_angles(self.points, axis)


def conjugation_profile(s, template, samples=None):
    '''
    Distance ``d(omega(s, r s r^-1), 1)`` on a uniform grid of corner angles
    ``theta`` in ``[0, pi]`` between the axes of ``s`` and ``r s r^-1``.

    The pair ``(s, r s r^-1)`` is fixed up to a common conjugation by the
    rotation angle of ``s`` and ``theta``, so the profile predicts the
    distance reached by any conjugator from its corner angle alone.

    Returns:
        tuple: the grid and the distances as ``numpy`` arrays
    '''
    if samples is None:
        samples = _config.STEP_PROFILE_SAMPLES
    axis, _ = _q.log_elem(s)
    perp = _q.perpendicular(axis)
    one = _q.identity()
    grid = _np.linspace(0.0, _math.pi, int(samples))
    out = _np.empty(len(grid))
    for i, theta in enumerate(grid.tolist()):
        c, sn = _mp.cos(theta), _mp.sin(theta)
        turned = tuple(c * x + sn * y for x, y in zip(axis, perp))
        h = _q.conj(s, _q.rotation_between(axis, turned))
        out[i] = float(_q.pdistance(_words.evaluate(template, [s, h]), one))
    return grid, out


class Tuning(_NamedTuple):
    word: _words.Word
    element: _q.GroupElement
    value: _q.GroupElement
    distance: _q.Angle


@_q.floor_precision
def tune_angle(s_m, template, pool, n):
    '''
    First conjugator ``u`` of ``pool`` such that
    ``omega(s_m, u s_m u^-1)`` lies in the window of step ``n``.

    Args:
        pool: iterable of ``(Word, GroupElement)`` pairs

    Raises:
        NoConjugatorFound: no pool entry works; the exception carries the
            sampled conjugation angles in ``thetas``
    '''
    one = _q.identity()
    thetas = []
    for word, u in pool:
        h = _q.conj(s_m, u)
        value = _words.evaluate(template, [s_m, h])
        d = _q.pdistance(value, one)
        if in_window(d, n):
            return Tuning(word, u, value, d)
        try:
            thetas.append(float(_q.angle_between(s_m, h)))
        except _errors.DegenerateInput:
            pass
    e = _errors.NoConjugatorFound(
        "tune_angle(): no conjugator places step %i in its window!" % n)
    e.thetas = sorted(thetas)
    raise e


def largest_gap(thetas):
    '''Largest gap between sampled angles in ``[0, pi]``.'''
    pts = _np.concatenate(([0.0], _np.sort(_np.asarray(thetas, dtype=float)),
                           [_math.pi]))
    return float(_np.max(_np.diff(pts)))


class StepGenerator:
    '''
    Roughly exponential steps ``s_n`` with ``2^-n < d(s_n, 1) < 2^(1-n)``.

    ``s_n`` is either a short net word (while the net resolves ``2^-n``) or
    ``omega(s_m, u s_m u^-1)`` for a smaller index ``m`` near ``n/c`` and a
    conjugator ``u`` tuned so that the result falls into the window. The
    conjugators are screened in double precision with the conjugation
    profile of ``s_m`` and the survivors are verified in order with
    :py:func:`tune_angle`.
    '''

    def __init__(self, net, params=None, cache=None):
        self.net = net
        self.params = params if params is not None else StepParams.from_template()
        self.cache = cache if cache is not None else StepCache()
        self._is_comm = self.params.word == _words.template('comm')

    @property
    def pool(self):
        '''Conjugator pool of ``params.conj_len`` at the working precision.'''
        return self.cache.table(
            ('pool', self.params.conj_len, _mp.mp.prec),
            lambda: conjugator_pool(self.net, self.params.conj_len))

    @property
    def conjugators(self):
        return self.cache.table(
            ('conjugators', self.params.conj_len),
            lambda: Conjugators(self.net, self.params.conj_len))

    def candidates(self, n):
        '''Indices ``m < n`` tried for ``s_n``, from ``floor(n/c)`` down.'''
        top = n // self.params.c
        out = []
        for i in range(self.params.window):
            m = max(0, top - i)
            if m < n and m not in out:
                out.append(m)
        return out

    @_q.floor_precision
    def step(self, n):
        if n < 0:
            raise ValueError("step(): n must be >= 0!")
        entry = self.cache.get(n)
        if entry is not None:
            self.cache.hits += 1
            return entry

        base_ok = 1.5 * _math.ldexp(1.0, -n) >= 2 * self.net.covering_estimate
        if base_ok:
            entry = self._base(n)
            if entry is not None:
                return entry

        thetas = []
        for m in self.candidates(n):
            try:
                s = self.step(m)
            except _errors.StepUnreachable:
                continue
            if self._is_comm:
                psi = _q.pdistance(s.element, _q.identity())
                if _q.comm_distance(psi, _mp.pi / 2) < _mp.ldexp(1, 2 - n):
                    continue
            try:
                tune = self._tune(m, s, n)
            except _errors.NoConjugatorFound as e:
                thetas.extend(e.thetas)
                continue
            word = _words.substitute(self.params.word, s.word,
                                     _words.conjugate_word(s.word, tune.word))
            _log.debug("step(): s_%i from s_%i, conjugator of length %i",
                       n, m, len(tune.word))
            return self.cache.store(n, word, tune.value)

        if not base_ok:
            entry = self._base(n)
            if entry is not None:
                return entry
        gap = largest_gap(thetas) if thetas else _math.pi
        raise _errors.StepUnreachable(
            "step(): no construction reaches the window of s_%i (largest "
            "conjugation angle gap %.3f); widen the window or increase "
            "conj_len!" % (n, gap))

    def _tune(self, m, s, n):
        table = self.conjugators
        thetas = table.angles(_unit_axis(s.element))
        grid, profile = self.cache.table(
            ('profile', m, self.params.word, _mp.mp.prec),
            lambda: conjugation_profile(s.element, self.params.word))
        guess = _np.interp(thetas, grid, profile)
        lo, hi = _math.ldexp(1.0, -n), _math.ldexp(1.0, 1 - n)
        mu = _config.STEP_SCREEN_MARGIN
        hits = _np.flatnonzero((guess > lo * (1 - mu)) & (guess < hi * (1 + mu)))
        hits = hits[:_config.STEP_VERIFY_LIMIT].tolist()
        try:
            return tune_angle(s.element, self.params.word,
                              (table.entry(k) for k in hits), n)
        except _errors.NoConjugatorFound as e:
            e.thetas = thetas.tolist()
            raise

    def _base(self, n):
        '''
        Net word in the window of ``s_n``. Among the shortest candidates
        those whose axis is moved evenly by the conjugator pool are
        preferred; words on a symmetry axis of the gate set leave large
        gaps in the reachable corner angles.
        '''
        pts = self.net.points
        chord = _np.minimum(_np.linalg.norm(pts - (1, 0, 0, 0), axis=1),
                            _np.linalg.norm(pts + (1, 0, 0, 0), axis=1))
        d = _detail.chord_to_angle(chord)
        lo, hi = _math.ldexp(1.0, -n), _math.ldexp(1.0, 1 - n)
        idx = _np.flatnonzero((d > lo) & (d < hi))
        if len(idx) == 0:
            return None
        order = _np.lexsort((idx, _np.abs(d[idx] - 1.5 * lo),
                             self.net.lengths[idx]))
        idx = idx[order][:_config.STEP_BASE_CANDIDATES]
        pool = self.conjugators.pool_points
        gaps = _np.array([
            largest_gap(image_angles(pool, v / _np.linalg.norm(v)))
            for v in pts[idx, 1:]])
        generic = idx[gaps <= max(_config.STEP_BASE_GAP, float(gaps.min()))]
        for i in generic.tolist():
            g = self.net.element(i)
            if in_window(_q.pdistance(g, _q.identity()), n):
                return self.cache.store(n, self.net.word(i), g)
        return None

    def lengths(self):
        return {n: e.length for n, e in self.cache.items()}


@_q.floor_precision
def step(n, params, cache, net):
    '''Returns the word of ``s_n``, computing and caching it on demand.'''
    if n < 1:
        raise ValueError("step(): n must be >= 1!")
    return StepGenerator(net, params, cache).step(n).word


def step_constant(cache, alpha, n_min=1):
    '''``max len(s_n) / n^alpha`` over the cached steps with ``n >= n_min``.'''
    ratios = [e.length / n ** alpha for n, e in cache.items()
              if n >= max(1, n_min)]
    return max(ratios) if ratios else 0.0


def length_exponent(cache, n_min, n_max):
    '''Least-squares slope of ``log len(s_n)`` against ``log n``.'''
    rows = [(n, e.length) for n, e in cache.items()
            if n_min <= n <= n_max and e.length > 0]
    if not rows:
        return None
    n, length = zip(*rows)
    return _detail.fit_slope(_np.log(n), _np.log(length))
