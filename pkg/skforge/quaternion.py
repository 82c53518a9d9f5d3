import logging as _logging
import functools as _functools
from typing import NamedTuple as _NamedTuple

import mpmath as _mp
import numpy as _np

from skforge import config as _config
from skforge import errors as _errors
from skforge.const import tolerance as _tolerance

_log = _logging.getLogger(__name__)

Real = _mp.mpf
Angle = _mp.mpf


class GroupElement(_NamedTuple):
    '''
    Element of SU(2) stored as the unit quaternion ``a + ib X + ic Y + id Z``.

    The coordinates are mpmath reals at the precision in effect when the
    element was created. Elements are immutable; all operations return new
    elements. As a 2x2 complex matrix the element reads
    ``[[a + id, c + ib], [-c + ib, a - id]]``.
    '''
    a: Real
    b: Real
    c: Real
    d: Real

    def __mul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return GroupElement(-self.a, -self.b, -self.c, -self.d)

    def __repr__(self):
        return 'GroupElement(%s, %s, %s, %s)' % tuple(
            _mp.nstr(x, 12) for x in self)

    @property
    def vector(self):
        return (self.b, self.c, self.d)

    def numpy(self):
        '''Returns the coordinates as a double precision ``numpy`` array.'''
        return _np.array([float(x) for x in self], dtype=_np.float64)


def element(a, b=0, c=0, d=0, normalize=True):
    '''
    Creates a group element from four coordinates at the working precision.

    Args:
        a, b, c, d: Coordinates in the basis ``(1, iX, iY, iZ)``. Strings are
            parsed by mpmath at full precision.
        normalize (bool): Rescale to unit norm.

    Returns:
        GroupElement: the element
    '''
    q = (_mp.mpf(a), _mp.mpf(b), _mp.mpf(c), _mp.mpf(d))
    if not normalize:
        return GroupElement(*q)
    return _normalize(q)


def identity():
    return GroupElement(_mp.mpf(1), _mp.mpf(0), _mp.mpf(0), _mp.mpf(0))


def _normalize(q):
    a, b, c, d = q
    n = _mp.sqrt(a * a + b * b + c * c + d * d)
    if n == 0:
        raise _errors.DegenerateInput("normalize(): zero quaternion!")
    return GroupElement(a / n, b / n, c / n, d / n)


def normalize(q):
    return _normalize(q)


def product(x, y, /):
    '''Quaternion product without renormalization.'''
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return GroupElement(
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + a2 * b1 - (c1 * d2 - d1 * c2),
        a1 * c2 + a2 * c1 - (d1 * b2 - b1 * d2),
        a1 * d2 + a2 * d1 - (b1 * c2 - c1 * b2))


def mul(x, y, /):
    '''
    Multiplies two group elements.

    Args:
        x (GroupElement): Left factor
        y (GroupElement): Right factor

    Returns:
        GroupElement: the product ``x*y``, renormalized to unit norm
    '''
    return _normalize(product(x, y))


def inverse(g, /):
    return GroupElement(g.a, -g.b, -g.c, -g.d)


def negate(g, /):
    return -g


def canonical(g, /):
    '''
    Representative of ``{g, -g}`` whose first nonzero coordinate is positive.
    '''
    for x in g:
        if x > 0:
            return g
        if x < 0:
            return -g
    return g


def _chord(g, h):
    return _mp.sqrt(sum((x - y) ** 2 for x, y in zip(g, h)))


def _chord_angle(chord):
    return 2 * _mp.asin(min(chord / 2, _mp.mpf(1)))


def distance(g, h, /):
    '''
    Bi-invariant distance ``arccos(tr(g h^-1) / 2)`` between two elements.

    The chordal form ``2 asin(|g - h| / 2)`` is used; it is algebraically
    equal and keeps full relative accuracy for nearby elements.

    Returns:
        Angle: a value in ``[0, pi]``
    '''
    return _chord_angle(_chord(g, h))


def pdistance(g, h, /):
    '''
    Projective distance ``min(d(g, h), d(-g, h))``, i.e. the distance of the
    images in SU(2)/{1, -1}. Always at most ``pi/2``.
    '''
    plus = _mp.sqrt(sum((x + y) ** 2 for x, y in zip(g, h)))
    return _chord_angle(min(_chord(g, h), plus))


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0])


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _norm(u):
    return _mp.sqrt(_dot(u, u))


def angle_between(g, h, /):
    '''
    Corner angle at the identity of the spherical triangle ``(1, g, h)``,
    i.e. the angle between the log-vectors of ``g`` and ``h``.
    '''
    one = identity()
    tol = _tolerance(16)
    for x in (g, h):
        if distance(x, one) < tol or _norm(x.vector) < tol:
            raise _errors.DegenerateInput(
                "angle_between(): argument too close to the center!")
    u, v = g.vector, h.vector
    return _mp.atan2(_norm(_cross(u, v)), _dot(u, v))


def conj(g, u, /):
    '''Returns ``u g u^-1``.'''
    return mul(product(u, g), inverse(u))


def commutator(g, h, /):
    '''Returns ``g h g^-1 h^-1``.'''
    gh = product(g, h)
    return mul(product(gh, inverse(g)), inverse(h))


def comm_distance(psi, theta):
    '''
    Distance of ``[g, h]`` from the identity for ``d(g, 1) = d(h, 1) = psi``
    and corner angle ``theta``: ``2 asin(sin(psi)^2 sin(theta))``.
    '''
    x = _mp.sin(psi) ** 2 * _mp.sin(theta)
    x = min(max(x, _mp.mpf(0)), _mp.mpf(1))
    return 2 * _mp.asin(x)


def exp_axis(axis, angle):
    '''
    Returns ``cos(angle) + sin(angle) (n . (iX, iY, iZ))`` for the unit
    vector ``n`` along ``axis``.
    '''
    axis = tuple(_mp.mpf(x) for x in axis)
    n = _norm(axis)
    if n == 0:
        raise _errors.DegenerateInput("exp_axis(): zero axis!")
    angle = _mp.mpf(angle)
    s = _mp.sin(angle) / n
    return GroupElement(_mp.cos(angle), axis[0] * s, axis[1] * s, axis[2] * s)


def log_elem(g, /):
    '''
    Inverse of :py:func:`exp_axis` on angles in ``(0, pi)``.

    At ``1`` and ``-1`` the axis is undefined; the fixed axis ``z`` is
    returned together with the angle ``0`` or ``pi``.

    Returns:
        tuple: ``(axis, angle)`` with ``axis`` a tuple of three reals
    '''
    v = g.vector
    r = _norm(v)
    if r == 0:
        _log.debug("log_elem(): element is central, using the z axis")
        zero, one = _mp.mpf(0), _mp.mpf(1)
        return (zero, zero, one), (_mp.mpf(0) if g.a > 0 else +_mp.pi)
    return tuple(x / r for x in v), _mp.atan2(r, g.a)


def rotation_between(a, b):
    '''
    Unit quaternion ``r`` such that conjugation by ``r`` maps the axis ``a``
    onto the axis ``b``, i.e. ``conj(exp_axis(a, t), r) == exp_axis(b, t)``.

    Conjugation by ``exp_axis(n, phi)`` rotates the vector part by ``-2 phi``
    about ``n``, hence the vector part of ``r`` is ``-(a x b)``.
    '''
    a = tuple(_mp.mpf(x) for x in a)
    b = tuple(_mp.mpf(x) for x in b)
    na, nb = _norm(a), _norm(b)
    if na == 0 or nb == 0:
        raise _errors.DegenerateInput("rotation_between(): zero axis!")
    a = tuple(x / na for x in a)
    b = tuple(x / nb for x in b)
    c = _dot(a, b)
    if 1 + c < _tolerance(8):
        return GroupElement(_mp.mpf(0), *perpendicular(a))
    x = _cross(a, b)
    return _normalize((1 + c, -x[0], -x[1], -x[2]))


def perpendicular(a):
    '''Some unit vector orthogonal to ``a``.'''
    a = tuple(_mp.mpf(x) for x in a)
    i = min(range(3), key=lambda j: abs(a[j]))
    e = [_mp.mpf(0)] * 3
    e[i] = _mp.mpf(1)
    p = _cross(a, e)
    n = _norm(p)
    return tuple(x / n for x in p)


def from_matrix(m):
    '''
    Converts a 2x2 unitary matrix into a group element. The matrix is divided
    by a square root of its determinant and the sign is chosen by
    :py:func:`canonical`.

    Args:
        m: nested sequence or ``numpy`` array of complex entries, or strings
           accepted by ``mpmath.mpc``
    '''
    m = [[_mp.mpc(m[i][j]) for j in range(2)] for i in range(2)]
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if abs(det) == 0:
        raise _errors.DegenerateInput("from_matrix(): singular matrix!")
    s = _mp.sqrt(det)
    m00, m01 = m[0][0] / s, m[0][1] / s
    return canonical(_normalize((m00.real, m01.imag, m01.real, m00.imag)))


def to_matrix(g, /):
    '''Returns the 2x2 matrix of ``g`` as nested lists of ``mpmath.mpc``.'''
    a, b, c, d = g
    return [[_mp.mpc(a, d), _mp.mpc(c, b)],
            [_mp.mpc(-c, b), _mp.mpc(a, -d)]]


def random_element(rng):
    '''
    Haar-random element drawn from a ``numpy.random.Generator``.
    '''
    while True:
        x = rng.standard_normal(4)
        if _np.linalg.norm(x) > 1e-6:
            break
    return element(*x.tolist())


def precision(bits):
    '''
    Context manager setting the working precision (in bits) for all
    arithmetic in its scope, e.g.

    .. code-block:: python

        with sk.precision(192):
            g = sk.mul(x, y)
    '''
    if bits < _config.PRECISION_MIN:
        raise ValueError("precision(): at least %i bits are required!"
                         % _config.PRECISION_MIN)
    return _mp.workprec(int(bits))


def working_precision():
    return _mp.mp.prec


def floor_precision(func):
    '''
    Decorator running ``func`` at no less than ``config.PRECISION_MIN`` bits,
    which lifts calls made at the mpmath default of 53 bits.
    '''
    @_functools.wraps(func)
    def wrapper(*args, **kwargs):
        if _mp.mp.prec >= _config.PRECISION_MIN:
            return func(*args, **kwargs)
        with _mp.workprec(_config.PRECISION_MIN):
            return func(*args, **kwargs)
    return wrapper
