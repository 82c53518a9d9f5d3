'''
Zigzag refinement of gate words.

A word ``w_m`` that approximates the target to ``2^-m`` is corrected by two
conjugated copies of a step ``s`` whose conjugators are themselves
approximated, recursively, to the coarser accuracy ``2^-k``. The residual of
``w_m`` is small enough to be reached by two strokes of ``s`` and the error
made on the conjugators is damped by the short length of ``s``, so the
accuracy roughly grows by the factor ``1/(1-b)`` per level while the word
grows by a constant factor.

The module also carries the classic balanced-commutator recursion
(:py:func:`dn_synthesize`) as a comparison baseline.
'''

import math as _math
import time as _time
import logging as _logging
from dataclasses import dataclass as _dataclass
from typing import NamedTuple as _NamedTuple

import mpmath as _mp
import numpy as _np

from skforge import config as _config
from skforge import const as _const
from skforge import errors as _errors
from skforge import net as _net
from skforge import quaternion as _q
from skforge import words as _words

_log = _logging.getLogger(__name__)

_BASE_SPANS = (64, 256, _config.NET_PAIR_SPAN)


def lemma_constants(alpha):
    '''
    Branching fraction ``b`` and length multiplier ``M`` for a step family of
    length exponent ``alpha``.

    ``b = 4^(1/(1-alpha))`` and ``M = 3/((1-b)^(1-alpha) - 1)``; for
    ``alpha = 2`` the simplified choice ``b = 1/4``, ``M = 7`` is used.
    '''
    alpha = float(alpha)
    if alpha <= 1:
        raise ValueError("lemma_constants(): alpha must exceed 1!")
    if abs(alpha - 2) < 1e-12:
        return 0.25, 7.0
    b = 4.0 ** (1.0 / (1.0 - alpha))
    return b, 3.0 / ((1.0 - b) ** (1.0 - alpha) - 1.0)


@_dataclass(frozen=True)
class SynthParams:
    '''
    Knobs of the zigzag recursion.

    Args:
        b (float): branching fraction, the conjugators are synthesized to
            ``2^-k`` with ``k = ceil(b n) + c_k``
        alpha (float): length exponent of the step family
        M (float): length multiplier of the length bound ``M C n^alpha``
        N (int | None): base-case cutoff. Targets with ``n <= N`` are handed
            to the two-word net search; ``None`` derives it from the net
        c_k (int): precision slack in bits
        template (str): step template name
        max_rounds (int): zigzag rounds per level
    '''
    b: float
    alpha: float
    M: float
    N: int = None
    c_k: int = _config.SYNTH_CK
    template: str = _config.STEP_TEMPLATE
    max_rounds: int = _config.SYNTH_MAX_ROUNDS

    def __post_init__(self):
        if not 0 < self.b < 1:
            raise ValueError("SynthParams(): b must lie in (0, 1)!")
        if self.M <= 0:
            raise ValueError("SynthParams(): M must be positive!")
        if self.c_k < 0 or self.max_rounds < 1:
            raise ValueError("SynthParams(): invalid c_k or max_rounds!")

    @classmethod
    def from_steps(cls, step_params, c_k=None, N=None, max_rounds=None):
        b, M = lemma_constants(step_params.alpha)
        return cls(b, step_params.alpha, M, N,
                   _config.SYNTH_CK if c_k is None else int(c_k),
                   step_params.name,
                   _config.SYNTH_MAX_ROUNDS if max_rounds is None
                   else int(max_rounds))


class SynthStats(_NamedTuple):
    depth: int
    hits: int
    wall_ms: float
    base_calls: int
    rounds: int
    precision: int


class SynthResult(_NamedTuple):
    word: _words.Word
    achieved_distance: _q.Angle
    target_n: int
    stats: SynthStats

    @property
    def length(self):
        return len(self.word)

    @property
    def bits(self):
        return _const.bits(self.achieved_distance)


def precision_budget(n, params):
    '''``k = ceil(b n) + c_k``, the accuracy index of the conjugators.'''
    if n < 1:
        raise ValueError("precision_budget(): n must be >= 1!")
    return int(_math.ceil(params.b * n - 1e-12)) + int(params.c_k)


def _split_angle(g):
    # Sign with a >= 0, so that the angle lies in [0, pi/2]
    if g.a < 0:
        g = -g
    axis, angle = _q.log_elem(g)
    return g, axis, angle


def solve_two_conjugate(t, s):
    '''
    Conjugators ``g_u``, ``g_v`` with ``s^g_u s^g_v = t`` up to sign.

    Both conjugates of ``s`` have the rotation angle ``psi`` of ``s``; the
    real part of their product fixes the angle ``2 beta`` between the two
    axes, and the plane spanned by the axes is then turned so that the
    product's axis coincides with the axis of ``t``.

    Raises:
        Unsolvable: ``d(t, 1) > 2 psi``, i.e. two strokes cannot reach ``t``
    '''
    s, n_s, psi = _split_angle(s)
    t, t_hat, tau = _split_angle(t)
    if psi < _const.tolerance(16):
        raise _errors.DegenerateInput("solve_two_conjugate(): s is central!")
    if tau > 2 * psi + _const.tolerance(32):
        raise _errors.Unsolvable(
            "solve_two_conjugate(): d(t, 1) = %s exceeds the reach %s of two "
            "strokes!" % (_mp.nstr(tau, 6), _mp.nstr(2 * psi, 6)))
    sin_psi, cos_psi = _mp.sin(psi), _mp.cos(psi)
    cos_2beta = (cos_psi ** 2 - _mp.cos(tau)) / sin_psi ** 2
    cos_2beta = min(max(cos_2beta, _mp.mpf(-1)), _mp.mpf(1))
    beta = _mp.acos(cos_2beta) / 2
    gamma = _mp.atan2(sin_psi * _mp.sin(beta), cos_psi)

    k_hat = _q.perpendicular(t_hat)
    cg, sg = _mp.cos(gamma), _mp.sin(gamma)
    e1 = tuple(cg * x - sg * y for x, y in zip(t_hat, k_hat))
    e3 = tuple(sg * x + cg * y for x, y in zip(t_hat, k_hat))
    e2 = _q._cross(e3, e1)
    cb, sb = _mp.cos(beta), _mp.sin(beta)
    n1 = tuple(cb * x + sb * y for x, y in zip(e1, e2))
    n2 = tuple(cb * x - sb * y for x, y in zip(e1, e2))
    return _q.rotation_between(n_s, n1), _q.rotation_between(n_s, n2)


def two_stroke(s, g_u, g_v):
    return _q.mul(_q.conj(s, g_u), _q.conj(s, g_v))


def calibrate_ck(params, n=None, trials=None, seed=0, max_ck=24):
    '''
    Smallest slack ``c_k`` for which perturbing both conjugators by ``2^-k``
    moves the two-stroke endpoint by less than ``2^(-n-1)``.

    The step is sampled in the middle of its window ``d(s, 1) = 1.5 2^-m``
    and the targets at distance ``1.5 d(s, 1)``; perturbations have random
    axes. Deterministic for a fixed seed.
    '''
    if n is None:
        n = 32
    if trials is None:
        trials = _config.SYNTH_CALIBRATION_TRIALS
    rng = _np.random.default_rng(seed)
    m = int(_math.ceil((1 - params.b) * n))
    with _q.precision(_const.synthesis_precision(n)):
        psi = 1.5 * _mp.ldexp(1, -m)
        cases = []
        for _ in range(int(trials)):
            s = _q.exp_axis(rng.standard_normal(3).tolist(), psi)
            t = _q.exp_axis(rng.standard_normal(3).tolist(), 1.5 * psi)
            g_u, g_v = solve_two_conjugate(t, s)
            du = rng.standard_normal(3).tolist()
            dv = rng.standard_normal(3).tolist()
            cases.append((s, two_stroke(s, g_u, g_v), g_u, g_v, du, dv))
        bound = _mp.ldexp(1, -n - 1)
        for c_k in range(0, max_ck + 1):
            k = int(_math.ceil(params.b * n - 1e-12)) + c_k
            worst = _mp.mpf(0)
            for s, end, g_u, g_v, du, dv in cases:
                step = _mp.ldexp(1, -k)
                gu = _q.mul(g_u, _q.exp_axis(du, step))
                gv = _q.mul(g_v, _q.exp_axis(dv, step))
                worst = max(worst, _q.pdistance(two_stroke(s, gu, gv), end))
            if worst < bound:
                _log.info("calibrate_ck(): c_k = %i (n = %i, %i trials)",
                          c_k, n, trials)
                return c_k
    raise _errors.ConvergenceFailure(
        "calibrate_ck(): no slack up to %i bits meets the sensitivity bound!"
        % max_ck)


class Synthesizer:
    '''
    Recursive zigzag synthesis over a prebuilt net and step generator.

    Args:
        generator (StepGenerator): steps ``s_n`` with their cache and net
        params (SynthParams | None): recursion knobs; derived from the step
            template when omitted
    '''

    def __init__(self, generator, params=None):
        self.generator = generator
        self.net = generator.net
        self.gateset = generator.net.gateset
        if params is None:
            params = SynthParams.from_steps(generator.params)
        self.params = params
        self.cutoff = params.N if params.N is not None else self.base_cutoff()
        self._reset()

    def _reset(self):
        self._depth = 0
        self._base_calls = 0
        self._rounds = 0

    def base_cutoff(self):
        '''Largest ``n`` the two-word search is expected to resolve.'''
        d = self.net.pair_covering_estimate
        if d <= 0:
            return 64
        return max(0, int(_math.floor(-_math.log2(d))) - 1)

    def synthesize(self, g, n, spine=None, bits=None):
        '''
        Gate word within ``2^-n`` of ``g`` (projectively).

        The synthesis runs at ``p = max(128, 4n + 64)`` bits and the result
        is verified by an independent evaluation of the word at the same
        precision. A failed verification is retried once at ``2p``.

        Args:
            g (GroupElement): target
            n (int): accuracy index
            spine (dict | None): words ``w_m`` for this target from earlier
                calls, filled in place
            bits (int | None): lower bound on the working precision

        Raises:
            TargetUnreachable: the net or the step generator cannot serve
                the recursion
            PrecisionShortfall: the verification failed twice
        '''
        if n < 1:
            raise ValueError("synthesize(): n must be >= 1!")
        if spine is None:
            spine = {}
        bits = max(_const.synthesis_precision(n, _config.PRECISION_FLOOR),
                   int(bits or 0))
        start = _time.perf_counter()
        hits = self.generator.cache.hits
        self._reset()
        for attempt in range(2):
            with _q.precision(bits):
                if self.generator.cache.precision != bits:
                    self.generator.cache.refresh(self.gateset)
                target = _q.element(*g)
                try:
                    word, _ = self._approx(target, n, 0, spine)
                except (_errors.StepUnreachable, _errors.NetTooCoarse) as e:
                    raise _errors.TargetUnreachable(
                        "synthesize(): %s" % e) from e
                d = _q.pdistance(self.gateset.evaluate(word), target)
                if d < _mp.ldexp(1, -n):
                    stats = SynthStats(
                        self._depth, self.generator.cache.hits - hits,
                        1000 * (_time.perf_counter() - start),
                        self._base_calls, self._rounds, bits)
                    _log.debug("synthesize(): n = %i, length %i, %.1f bits",
                               n, len(word), _const.bits(d))
                    return SynthResult(word, d, n, stats)
            _log.warning("synthesize(): verification at %i bits failed "
                         "(%.1f bits achieved)%s", bits, _const.bits(d),
                         ", retrying" if attempt == 0 else "")
            bits *= 2
            spine.clear()
        raise _errors.PrecisionShortfall(
            "synthesize(): the word misses 2^-%i after the precision retry!"
            % n)

    def _base(self, g, n):
        # Single entries first, then products over growing spans
        self._base_calls += 1
        eps = 0.5 * _math.ldexp(1.0, -n)
        word, d = _net.nearest(self.net, g)
        if d >= eps:
            for span in _BASE_SPANS:
                word, d = _net.pair_approx(self.net, g, span=span)
                if d < eps:
                    break
        value = self.gateset.evaluate(word)
        return word, value

    def _approx(self, g, n, depth, spine=None):
        self._depth = max(self._depth, depth)
        if spine is not None and n in spine:
            word = spine[n]
            return word, self.gateset.evaluate(word)
        eps = _mp.ldexp(1, -n)

        if n <= self.cutoff or n <= 1:
            word, value = self._base(g, n)
            if _q.pdistance(value, g) < eps or n <= 1:
                if spine is not None:
                    spine[n] = word
                return word, value

        m = min(int(_math.ceil((1 - self.params.b) * n - 1e-12)), n - 1)
        k = min(precision_budget(n, self.params), n - 1)
        word, value = self._approx(g, m, depth + 1, spine)

        for rnd in range(self.params.max_rounds + 1):
            t = _q.mul(_q.inverse(value), g)
            tau = _q.pdistance(t, _q.identity())
            if tau < eps:
                break
            if rnd == self.params.max_rounds:
                # Outer levels absorb a miss in their next round
                if depth == 0:
                    raise _errors.TargetUnreachable(
                        "synthesize(): residual %.3g still above 2^-%i after "
                        "%i rounds!" % (float(tau), n, rnd))
                _log.debug("zigzag: n = %i missed by %.3g after %i rounds",
                           n, float(tau), rnd)
                break
            j = min(m, int(_math.floor(1 - _math.log2(float(tau)))))
            s, g_u, g_v = self._stroke(t, j)
            self._rounds += 1
            u, u_val = self._approx(g_u, k, depth + 1)
            v, v_val = self._approx(g_v, k, depth + 1)
            piece = _words.concat(_words.conjugate_word(s.word, u),
                                  _words.conjugate_word(s.word, v))
            word = _words.concat(word, piece)
            value = _q.mul(value, two_stroke(s.element, u_val, v_val))
            _log.debug("zigzag: n = %i, round %i, step s_%i, k = %i, "
                       "residual %.3g", n, rnd, j, k, float(tau))
        if spine is not None:
            spine[n] = word
        return word, value

    def _stroke(self, t, j):
        # s_j first, s_(j-1) covers rounding at the reach boundary
        for i in (j, j - 1):
            if i < 0:
                continue
            s = self.generator.step(i)
            try:
                g_u, g_v = solve_two_conjugate(t, s.element)
            except _errors.Unsolvable:
                continue
            return s, g_u, g_v
        raise _errors.TargetUnreachable(
            "synthesize(): residual out of reach of s_%i and s_%i!"
            % (j, j - 1))


def synthesize(g, n, params, caches):
    '''
    Gate word ``w`` with ``d(w, g) < 2^-n`` by zigzag refinement.

    Args:
        g (GroupElement): target
        n (int): accuracy index
        params (SynthParams | None): recursion knobs
        caches (StepGenerator): net, step template and step cache

    Returns:
        SynthResult: the word and its verified distance
    '''
    return Synthesizer(caches, params).synthesize(g, n)


# -------------------------------------------------------------------
#                    Balanced-commutator baseline
# -------------------------------------------------------------------


def balanced_commutator(delta):
    '''
    Elements ``V``, ``W`` with ``[V, W] = delta`` whose rotation angles
    ``chi`` obey ``sin(chi)^2 = sin(tau / 2)`` for ``tau = d(delta, 1)``.

    ``V`` and ``W`` start on the ``x`` and ``y`` axes and are then conjugated
    by the rotation taking the axis of their commutator to the axis of
    ``delta``.
    '''
    delta, axis, tau = _split_angle(delta)
    chi = _mp.asin(_mp.sqrt(_mp.sin(tau / 2)))
    one, zero = _mp.mpf(1), _mp.mpf(0)
    V = _q.exp_axis((one, zero, zero), chi)
    W = _q.exp_axis((zero, one, zero), chi)
    c_axis, _ = _q.log_elem(_q.commutator(V, W))
    r = _q.rotation_between(c_axis, axis)
    return _q.conj(V, r), _q.conj(W, r)


class _DN:
    def __init__(self, net):
        self.net = net
        self.gateset = net.gateset
        self.base_calls = 0

    def approx(self, g, depth):
        if depth == 0:
            self.base_calls += 1
            word, _ = _net.pair_approx(self.net, g)
            return word, self.gateset.evaluate(word)
        word, value = self.approx(g, depth - 1)
        return self.refine(g, word, value, depth)

    def refine(self, g, word, value, depth):
        delta = _q.mul(g, _q.inverse(value))
        if _q.pdistance(delta, _q.identity()) < _const.tolerance(16):
            return word, value
        V, W = balanced_commutator(delta)
        v, v_val = self.approx(V, depth - 1)
        w, w_val = self.approx(W, depth - 1)
        word = _words.concat(_words.commutator_word(v, w), word)
        value = _q.mul(_q.commutator(v_val, w_val), value)
        return word, value


def dn_synthesize(g, depth, net, bits=None):
    '''
    Balanced-commutator recursion of the given depth.

    Level ``k`` approximates ``delta = g w_(k-1)^-1`` by the group commutator
    of depth ``k-1`` approximations of its balanced factors and prepends it
    to ``w_(k-1)``; level 0 is the two-word net search.

    Raises:
        ConvergenceFailure: the accuracy along the recursion spine did not
            improve, which means the base accuracy is above the convergence
            threshold of the recursion
    '''
    if depth < 0:
        raise ValueError("dn_synthesize(): depth must be >= 0!")
    if bits is None:
        bits = max(_config.PRECISION_FLOOR, _mp.mp.prec)
    start = _time.perf_counter()
    dn = _DN(net)
    with _q.precision(bits):
        target = _q.element(*g)
        word, value = dn.approx(target, 0)
        eps = _q.pdistance(value, target)
        floor = _const.tolerance(32)
        for k in range(1, depth + 1):
            word, value = dn.refine(target, word, value, k)
            new = _q.pdistance(value, target)
            _log.debug("dn_synthesize(): depth %i, eps %.3g, length %i",
                       k, float(new), len(word))
            if new >= eps and eps > floor:
                raise _errors.ConvergenceFailure(
                    "dn_synthesize(): accuracy %.3g at depth %i does not "
                    "improve on %.3g; the base net is too coarse!"
                    % (float(new), k, float(eps)))
            eps = new
        d = _q.pdistance(net.gateset.evaluate(word), target)
    stats = SynthStats(depth, 0, 1000 * (_time.perf_counter() - start),
                       dn.base_calls, depth, bits)
    return SynthResult(word, d, int(min(_const.bits(d), bits)), stats)
