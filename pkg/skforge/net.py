import io as _io
import os as _os
import json as _json
import math as _math
import struct as _struct
import logging as _logging
import itertools as _itertools
from functools import cached_property as _cached_property

import mpmath as _mp
import numpy as _np

from skforge import config as _config
from skforge import const as _const
from skforge import detail as _detail
from skforge import errors as _errors
from skforge import quaternion as _q
from skforge import words as _words

_log = _logging.getLogger(__name__)

_MAGIC = b'SKNET1'
_HEADER = _struct.Struct('<32sIIdd')
_OFFSETS = _np.array(list(_itertools.product((-1, 0, 1), repeat=4)),
                     dtype=_np.int64)

# -------------------------------------------------------------------
#                            Gate sets
# -------------------------------------------------------------------


class GateSet:
    '''
    Finite symmetric set of named SU(2) gates.

    The matrices are kept as given (decimal strings or numbers) so that the
    gates can be evaluated at any working precision. On construction every
    gate is normalized into SU(2), the identity is added when missing and
    each gate is paired with its inverse. Inverses are matched up to the
    central element ``-1``.

    Args:
        gates (list): records ``{"name": str, "matrix": [[re, im]] * 4,
            "inverse_of": str (optional)}``, the matrix given row-major.
    '''

    def __init__(self, gates):
        gates = list(gates)
        if not gates:
            raise _errors.EmptyGateSet("GateSet(): the gate set is empty!")
        self.records = []
        for rec in gates:
            m = rec['matrix']
            if len(m) == 2:
                m = [m[0][0], m[0][1], m[1][0], m[1][1]]
            if len(m) != 4:
                raise ValueError("GateSet(): gate %r needs four matrix "
                                 "entries!" % rec.get('name'))
            entries = tuple(tuple(str(v) for v in _pair(e)) for e in m)
            self.records.append({'name': str(rec['name']), 'matrix': entries,
                                 'inverse_of': rec.get('inverse_of')})
        self._cache = {}

        points = self._evaluate(64)
        pts = _np.array([p.numpy() for p in points])
        ident = [i for i, p in enumerate(pts)
                 if min(_np.linalg.norm(p - (1, 0, 0, 0)),
                        _np.linalg.norm(p + (1, 0, 0, 0))) < 1e-12]
        if not ident:
            self.records.append({'name': 'I', 'inverse_of': None,
                                 'matrix': (('1', '0'), ('0', '0'),
                                            ('0', '0'), ('1', '0'))})
            pts = _np.vstack((pts, (1.0, 0.0, 0.0, 0.0)))
            ident = [len(pts) - 1]
        self.identity_index = ident[0]
        self.identities = frozenset(ident)

        names = [r['name'] for r in self.records]
        if len(set(names)) != len(names):
            raise ValueError("GateSet(): duplicate gate names!")
        self.names = tuple(names)
        self.inverses = tuple(self._pair_inverses(pts))
        self.alphabet = _words.Alphabet(self.names, self.inverses,
                                        self.identities)
        self.points = pts
        self._cache.clear()

    def _evaluate(self, bits):
        out = []
        with _mp.workprec(bits):
            for rec in self.records:
                m = [_mp.mpc(_mp.mpf(re), _mp.mpf(im)) for re, im in rec['matrix']]
                try:
                    g = _q.from_matrix([[m[0], m[1]], [m[2], m[3]]])
                except _errors.DegenerateInput:
                    raise ValueError("GateSet(): gate %r is singular!"
                                     % rec['name']) from None
                out.append(g)
        return out

    def _pair_inverses(self, pts):
        names = [r['name'] for r in self.records]
        matches = []
        for i, p in enumerate(pts):
            if i in self.identities:
                matches.append([i])
                continue
            target = _detail.qconj(p)
            dist = _np.minimum(_np.linalg.norm(pts - target, axis=1),
                               _np.linalg.norm(pts + target, axis=1))
            match = [int(j) for j in _np.flatnonzero(dist < 1e-9)
                     if j not in self.identities]
            claim = self.records[i]['inverse_of']
            if claim is not None:
                if claim not in names or names.index(claim) not in match:
                    raise _errors.NonSymmetricGateSet(
                        "GateSet(): %r is not the inverse of %r!"
                        % (claim, names[i]))
                match = [names.index(claim)]
            if not match:
                raise _errors.NonSymmetricGateSet(
                    "GateSet(): the inverse of %r is missing!" % names[i])
            matches.append(match)
        inv = []
        for i, match in enumerate(matches):
            # Prefer a partner that points back, so the pairing is an involution
            back = [j for j in match if i in matches[j]]
            inv.append(back[0] if back else match[0])
        for i, j in enumerate(inv):
            if inv[j] != i:
                raise _errors.NonSymmetricGateSet(
                    "GateSet(): inconsistent inverse pairing of %r and %r!"
                    % (names[i], names[j]))
        return inv

    def __len__(self):
        return len(self.names)

    @_q.floor_precision
    def elements(self):
        '''Gates as group elements at the working precision.'''
        bits = _mp.mp.prec
        if bits not in self._cache:
            self._cache[bits] = self._evaluate(bits)
        return self._cache[bits]

    @property
    def generators(self):
        '''Indices of the non-identity gates.'''
        return [i for i in range(len(self.names)) if i not in self.identities]

    def index(self, name):
        return self.names.index(name)

    def word(self, text):
        return _words.parse_word(text, self.alphabet)

    @_q.floor_precision
    def evaluate(self, w):
        '''Value of a gate word at the working precision.'''
        return _words.evaluate(w, self.elements())

    @_cached_property
    def digest(self):
        '''32-byte SHA-256 of the normalized gate records.'''
        payload = _json.dumps([[r['name'], r['matrix']] for r in self.records],
                              sort_keys=True).encode('utf-8')
        return _detail.sha256(payload)

    def __repr__(self):
        return 'GateSet(%s)' % ', '.join(self.names)


def _pair(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError("GateSet(): complex entries are [re, im] pairs!")
        return v
    if isinstance(v, complex):
        return (repr(v.real), repr(v.imag))
    return (v, 0)


def loads_gateset(text):
    data = _json.loads(text)
    if isinstance(data, dict):
        data = data.get('gates', [])
    return GateSet(data)


def load_gateset(path=None):
    '''
    Loads a gate set from a JSON file; the bundled Clifford+T style set is
    used when ``path`` is ``None``.
    '''
    if path is None:
        path = _config.DEFAULT_GATESET
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    try:
        return loads_gateset(text)
    except (KeyError, TypeError, _json.JSONDecodeError) as e:
        raise ValueError("load_gateset(): malformed gate set file %r (%s)!"
                         % (path, e)) from None


# -------------------------------------------------------------------
#                                Net
# -------------------------------------------------------------------


class Net:
    '''
    Enumerated short gate words with a bucket-grid index over SU(2).

    Entries are stored in breadth-first order, so smaller indices never
    carry longer words. ``points`` holds the values of the words in double
    precision; queries are projective (``q`` and ``-q`` are identified).
    '''

    def __init__(self, gateset, points, codes, max_len, delta_d,
                 covering_estimate=None, probes=None):
        self.gateset = gateset
        self.points = _np.ascontiguousarray(points, dtype=_np.float64)
        self.codes = list(codes)
        self.max_len = int(max_len)
        self.delta_d = float(delta_d)
        self.lengths = _np.array([len(c) for c in self.codes], dtype=_np.int64)
        self._build_index()
        if covering_estimate is None or _math.isnan(covering_estimate):
            covering_estimate = self._measure_covering(
                probes if probes is not None else _config.NET_PROBES)
        self.covering_estimate = float(covering_estimate)

    def __len__(self):
        return len(self.codes)

    def word(self, i):
        return _words.Word(self.codes[i], self.gateset.alphabet)

    @_q.floor_precision
    def element(self, i):
        '''Entry ``i`` re-evaluated at the working precision.'''
        return self.gateset.evaluate(self.word(i))

    def _build_index(self):
        n = len(self.points)
        spacing = (_const.s3_volume / max(n, 1)) ** (1.0 / 3.0)
        self.bucket_width = float(min(2.0, max(self.delta_d, 2.0 * spacing)))
        self._canon = _detail.canonical_rows(self.points)
        self._span = int(_math.floor(2.0 / self.bucket_width)) + 4
        keys = self._keys(self._cells(self._canon))
        self._order = _np.argsort(keys, kind='stable')
        self._sorted = keys[self._order]

    def _cells(self, x):
        return _np.floor((x + 1.0) / self.bucket_width).astype(_np.int64)

    def _keys(self, cells):
        c = cells + 1
        s = self._span
        return ((c[..., 0] * s + c[..., 1]) * s + c[..., 2]) * s + c[..., 3]

    def nearest_many(self, targets):
        '''
        Batched projective nearest neighbour query.

        Args:
            targets (numpy.ndarray): array of shape ``(Q, 4)``

        Returns:
            tuple: entry indices ``(Q,)`` and chordal distances ``(Q,)``
        '''
        t = _np.atleast_2d(_np.asarray(targets, dtype=_np.float64))
        q = len(t)
        both = _np.stack((self._cells(t), self._cells(-t)), axis=1)
        nb = (both[:, :, None, :] + _OFFSETS[None, None]).reshape(q, -1, 4)
        keys = self._keys(nb)
        lo = _np.searchsorted(self._sorted, keys, side='left').ravel()
        hi = _np.searchsorted(self._sorted, keys, side='right').ravel()
        cnt = hi - lo
        per_query = cnt.reshape(q, -1).sum(axis=1)

        best_idx = _np.full(q, -1, dtype=_np.int64)
        best = _np.full(q, _np.inf)
        total = int(cnt.sum())
        if total:
            rep = _np.repeat(_np.arange(cnt.size), cnt)
            starts = _np.cumsum(cnt) - cnt
            idx = self._order[lo[rep] + _np.arange(total) - starts[rep]]
            qid = rep // nb.shape[1]
            c, tq = self._canon[idx], t[qid]
            dist = _np.minimum(_np.linalg.norm(c - tq, axis=1),
                               _np.linalg.norm(c + tq, axis=1))
            nonempty = _np.flatnonzero(per_query)
            gstart = _np.searchsorted(qid, nonempty)
            best[nonempty] = _np.minimum.reduceat(dist, gstart)
            tie = _np.where(dist <= best[qid], idx, _np.iinfo(_np.int64).max)
            best_idx[nonempty] = _np.minimum.reduceat(tie, gstart)

        for i in _np.flatnonzero(best > self.bucket_width):
            d = _np.minimum(_np.linalg.norm(self._canon - t[i], axis=1),
                            _np.linalg.norm(self._canon + t[i], axis=1))
            best_idx[i] = int(_np.argmin(d))
            best[i] = d[best_idx[i]]
        return best_idx, best

    def _measure_covering(self, probes):
        pts = _detail.s3_from_cube(_detail.halton(int(probes), 3))
        worst = 0.0
        for chunk in _np.array_split(pts, max(1, len(pts) // 2048)):
            _, d = self.nearest_many(chunk)
            worst = max(worst, float(d.max()))
        return float(_detail.chord_to_angle(worst))

    @_cached_property
    def pair_covering_estimate(self):
        '''Worst :py:func:`pair_approx` distance over a fixed probe set.'''
        pts = _detail.s3_from_cube(
            _detail.halton(_config.NET_PAIR_PROBES, 3, skip=7919))
        worst = 0.0
        for p in pts:
            _, _, d = _pair_search(self, p, _config.NET_PAIR_SPAN)
            worst = max(worst, d)
        _log.debug("Net: pair covering estimate %.3g", worst)
        return worst

    def __repr__(self):
        return 'Net(%i entries, L0=%i, covering=%.4f)' % (
            len(self), self.max_len, self.covering_estimate)


def _cell_keys(cells, offset):
    base = 2 * offset + 1
    k = cells + offset
    return ((k[..., 0] * base + k[..., 1]) * base + k[..., 2]) * base + k[..., 3]


def _near(table, query, radius, offset, chunk=4096):
    '''
    Pairs ``(i, j)`` with ``min(|query[i] - table[j]|, |query[i] + table[j]|)``
    below ``radius``, located through a grid of cell width ``radius``. A pair
    within ``radius`` differs by at most one cell per coordinate, so the 81
    neighbour cells of ``query[i]`` and of ``-query[i]`` hold every partner.
    '''
    keys = _cell_keys(_np.rint(table / radius).astype(_np.int64), offset)
    order = _np.argsort(keys, kind='stable')
    keys = keys[order]
    out_i, out_j = [], []
    for start in range(0, len(query), chunk):
        q = query[start:start + chunk]
        both = _np.stack((_np.rint(q / radius), _np.rint(-q / radius)),
                         axis=1).astype(_np.int64)
        nb = (both[:, :, None, :] + _OFFSETS[None, None]).reshape(len(q), -1, 4)
        k = _cell_keys(nb, offset).ravel()
        lo = _np.searchsorted(keys, k, side='left')
        cnt = _np.searchsorted(keys, k, side='right') - lo
        total = int(cnt.sum())
        if total == 0:
            continue
        rep = _np.repeat(_np.arange(cnt.size), cnt)
        starts = _np.cumsum(cnt) - cnt
        j = order[lo[rep] + _np.arange(total) - starts[rep]]
        i = rep // nb.shape[1]
        d = _np.minimum(_np.linalg.norm(q[i] - table[j], axis=1),
                        _np.linalg.norm(q[i] + table[j], axis=1))
        close = d < radius
        out_i.append(i[close] + start)
        out_j.append(j[close])
    if not out_i:
        empty = _np.zeros(0, dtype=_np.int64)
        return empty, empty
    return _np.concatenate(out_i), _np.concatenate(out_j)


def build_net(gateset, max_len=None, delta_d=None, probes=None):
    '''
    Enumerates all freely reduced gate words up to length ``max_len`` in
    breadth-first order. A word is dropped when its value lies within
    ``delta_d`` (chordal, up to sign) of a kept entry or of an earlier word
    of the same length, so no two entries are closer than ``delta_d``.

    Args:
        gateset (GateSet): the gates
        max_len (int): maximum word length ``L0``
        delta_d (float): deduplication radius
        probes (int): number of low-discrepancy probes for the covering
            estimate

    Returns:
        Net: the net
    '''
    if max_len is None:
        max_len = _config.NET_MAX_LEN
    if delta_d is None:
        delta_d = _config.NET_DEDUPE_RADIUS
    if max_len < 1:
        raise ValueError("build_net(): max_len must be >= 1!")
    offset = int(_math.ceil(1.0 / delta_d)) + 1
    if (2 * offset + 1) ** 4 >= 2 ** 62:
        raise ValueError("build_net(): delta_d = %g is too small!" % delta_d)
    if len(gateset) == 0:
        raise _errors.EmptyGateSet("build_net(): the gate set is empty!")

    alphabet = gateset.alphabet
    gens = gateset.generators
    pts = gateset.points

    # Entries are deduplicated up to sign, points keep the sign of the word
    all_points = _np.array([[1.0, 0.0, 0.0, 0.0]])
    all_last = _np.zeros(1, dtype=_np.int64)
    codes = [()]
    frontier = _np.zeros(1, dtype=_np.int64)

    for level in range(1, max_len + 1):
        if len(frontier) == 0 or not gens:
            break
        qs, parents, letters = [], [], []
        for g in gens:
            code = alphabet.code(g)
            mask = all_last[frontier] != alphabet.inverse_code(code)
            f = frontier[mask]
            qs.append(_detail.qmul(all_points[f], pts[g]))
            parents.append(f)
            letters.append(_np.full(len(f), code, dtype=_np.int64))
        cand = _np.concatenate(qs)
        parent = _np.concatenate(parents)
        letter = _np.concatenate(letters)
        cand /= _np.linalg.norm(cand, axis=1, keepdims=True)

        canon = _detail.canonical_rows(cand)
        drop = _np.zeros(len(cand), dtype=bool)
        i, j = _near(canon, canon, delta_d, offset)
        drop[i[j < i]] = True
        i, _ = _near(_detail.canonical_rows(all_points), canon, delta_d, offset)
        drop[i] = True
        keep = _np.flatnonzero(~drop)

        base = len(codes)
        for p, c in zip(parent[keep].tolist(), letter[keep].tolist()):
            codes.append(codes[p] + (c,))
        all_points = _np.vstack((all_points, cand[keep]))
        all_last = _np.concatenate((all_last, letter[keep]))
        frontier = _np.arange(base, len(codes), dtype=_np.int64)
        _log.info("build_net(): level %i, %i new entries, %i total",
                  level, len(keep), len(codes))

    net = Net(gateset, all_points, codes, max_len, delta_d, probes=probes)
    _log.info("build_net(): %i entries, covering estimate %.4f",
              len(net), net.covering_estimate)
    return net


def nearest(net, target):
    '''
    Entry closest to ``target`` up to sign.

    Returns:
        tuple: ``(Word, distance)`` with the distance in radians
    '''
    t = target.numpy() if isinstance(target, _q.GroupElement) else target
    idx, chord = net.nearest_many(_np.asarray(t, dtype=_np.float64)[None])
    return net.word(int(idx[0])), float(_detail.chord_to_angle(chord[0]))


def base_approx(net, target, eps0):
    '''
    Net word within ``eps0`` of ``target`` (projectively).

    Raises:
        NetTooCoarse: ``eps0`` is below the covering estimate, or the
            nearest entry misses it
    '''
    if eps0 < net.covering_estimate:
        raise _errors.NetTooCoarse(
            "base_approx(): eps0 = %.3g is below the covering estimate %.3g;"
            " increase L0!" % (eps0, net.covering_estimate))
    word, d = nearest(net, target)
    if d >= eps0:
        raise _errors.NetTooCoarse(
            "base_approx(): nearest entry is at %.3g >= %.3g!" % (d, eps0))
    return word


def _pair_search(net, t, span):
    span = min(int(span), len(net))
    a = net.points[:span]
    targets = _detail.qmul(_detail.qconj(a), t[None])
    idx, chord = net.nearest_many(targets)
    total = net.lengths[:span] + net.lengths[idx]
    order = _np.lexsort((_np.arange(span), total, chord))
    i = int(order[0])
    return i, int(idx[i]), float(_detail.chord_to_angle(chord[i]))


def pair_approx(net, target, eps0=None, span=None):
    '''
    Best product ``a b`` of two net words approximating ``target``, with the
    first factor drawn from the ``span`` shortest entries.

    Returns:
        tuple: ``(Word, distance)``

    Raises:
        NetTooCoarse: the best product is not within ``eps0``
    '''
    if span is None:
        span = _config.NET_PAIR_SPAN
    t = target.numpy() if isinstance(target, _q.GroupElement) else \
        _np.asarray(target, dtype=_np.float64)
    i, j, d = _pair_search(net, t, span)
    if eps0 is not None and d >= eps0:
        raise _errors.NetTooCoarse(
            "pair_approx(): best product is at %.3g >= %.3g!" % (d, eps0))
    return _words.concat(net.word(i), net.word(j)), d


def pair_covering_estimate(net):
    return net.pair_covering_estimate


# -------------------------------------------------------------------
#                             Net files
# -------------------------------------------------------------------


def save_net(net, path):
    '''
    Writes ``net`` to ``path``: magic ``SKNET1``, gate set digest, entry
    count, ``L0``, ``delta_d``, covering estimate, then per entry the word
    length (u32), the gate indices (u16) and four f64 coordinates, followed
    by the SHA-256 of everything before it. Little-endian throughout.
    '''
    buf = _io.BytesIO()
    buf.write(_MAGIC)
    buf.write(_HEADER.pack(net.gateset.digest, len(net), net.max_len,
                           net.delta_d, net.covering_estimate))
    for codes, p in zip(net.codes, net.points):
        buf.write(_struct.pack('<I', len(codes)))
        if codes:
            buf.write((_np.asarray(codes, dtype=_np.int64) - 1)
                      .astype("<u2").tobytes())
        buf.write(_np.asarray(p, dtype='<f8').tobytes())
    body = buf.getvalue()
    with _detail.atomic_write(path, 'wb') as f:
        f.write(body)
        f.write(_detail.sha256(body))


def load_net(path, gateset=None):
    '''
    Reads a net written by :py:func:`save_net`.

    Raises:
        VersionMismatch: wrong magic, or the file belongs to another gate set
        CorruptFile: truncated file or checksum mismatch
    '''
    if gateset is None:
        gateset = load_gateset()
    with open(path, 'rb') as f:
        data = f.read()
    if data[:len(_MAGIC)] != _MAGIC:
        if len(data) < len(_MAGIC):
            raise _errors.CorruptFile("load_net(): %r is truncated!" % path)
        raise _errors.VersionMismatch(
            "load_net(): %r is not an SKNET1 file!" % path)
    if len(data) < len(_MAGIC) + _HEADER.size + 32:
        raise _errors.CorruptFile("load_net(): %r is truncated!" % path)
    body, checksum = data[:-32], data[-32:]
    if _detail.sha256(body) != checksum:
        raise _errors.CorruptFile("load_net(): checksum mismatch in %r!" % path)

    try:
        digest, count, max_len, delta_d, covering = \
            _HEADER.unpack_from(body, len(_MAGIC))
        if digest != gateset.digest:
            raise _errors.VersionMismatch(
                "load_net(): %r was built for a different gate set!" % path)
        pos = len(_MAGIC) + _HEADER.size
        codes = []
        points = _np.empty((count, 4))
        for i in range(count):
            (n,) = _struct.unpack_from('<I', body, pos)
            pos += 4
            letters = _np.frombuffer(body, dtype='<u2', count=n, offset=pos)
            codes.append(tuple(int(x) + 1 for x in letters))
            pos += 2 * n
            points[i] = _np.frombuffer(body, dtype='<f8', count=4, offset=pos)
            pos += 32
        if pos != len(body):
            raise _errors.CorruptFile("load_net(): trailing data in %r!" % path)
    except (_struct.error, ValueError) as e:
        raise _errors.CorruptFile("load_net(): cannot parse %r (%s)!"
                                  % (path, e)) from None
    return Net(gateset, points, codes, max_len, delta_d, covering)


def default_net_path(gateset, max_len):
    name = '%s-L%i%s' % (gateset.digest.hex()[:16], max_len,
                         _config.NET_FILE_SUFFIX)
    return _os.path.join(_config.net_cache_dir(), name)
