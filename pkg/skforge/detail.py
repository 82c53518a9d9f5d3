import os as _os
import hashlib as _hashlib
import tempfile as _tempfile
from contextlib import contextmanager as _contextmanager

import numpy as _np

# First primes, used as Halton bases
_PRIMES = (2, 3, 5, 7, 11, 13)


def qmul(q1, q2):
    """
    Vectorised quaternion product in the basis ``(1, iX, iY, iZ)``.

    Parameter ``q1``, ``q2`` (``numpy.ndarray``):
        Arrays of shape ``(..., 4)``; leading dimensions broadcast.

    The vector part follows ``a1 v2 + a2 v1 - v1 x v2``, which is the
    product rule of the 2x2 special unitary matrices
    ``[[a + id, c + ib], [-c + ib, a - id]]``.
    """
    q1 = _np.asarray(q1, dtype=_np.float64)
    q2 = _np.asarray(q2, dtype=_np.float64)
    a1, v1 = q1[..., :1], q1[..., 1:]
    a2, v2 = q2[..., :1], q2[..., 1:]
    a = a1 * a2 - _np.sum(v1 * v2, axis=-1, keepdims=True)
    v = a1 * v2 + a2 * v1 - _np.cross(v1, v2)
    return _np.concatenate((a, v), axis=-1)


def qconj(q):
    q = _np.array(q, dtype=_np.float64)
    q[..., 1:] *= -1
    return q


def canonical_rows(q, tol=1e-12):
    """
    Flips the sign of every row whose first coordinate of magnitude at least
    ``tol`` is negative, so that ``q`` and ``-q`` map to the same
    representative. Smaller coordinates are rounding noise.
    """
    q = _np.array(q, dtype=_np.float64)
    nz = _np.abs(q) >= tol
    first = _np.argmax(nz, axis=-1)
    lead = _np.take_along_axis(q, first[..., None], axis=-1)[..., 0]
    q[lead < 0] *= -1
    return q


def chord_to_angle(chord):
    """Turns a chordal distance on S^3 into the group distance."""
    return 2.0 * _np.arcsin(_np.minimum(_np.asarray(chord) * 0.5, 1.0))


def halton(count, dim=3, skip=1):
    """
    Deterministic low-discrepancy points in the unit cube.

    Parameter ``count`` (``int``):
        Number of points.

    Parameter ``dim`` (``int``):
        Dimension, at most 6.

    Parameter ``skip`` (``int``):
        Index of the first point (``0`` yields the origin).
    """
    if dim > len(_PRIMES):
        raise ValueError("halton(): at most %i dimensions are supported!"
                         % len(_PRIMES))
    idx = _np.arange(skip, skip + count, dtype=_np.int64)
    out = _np.zeros((count, dim))
    for j in range(dim):
        base = _PRIMES[j]
        i = idx.copy()
        f = 1.0
        while _np.any(i > 0):
            f /= base
            out[:, j] += f * (i % base)
            i //= base
    return out


def s3_from_cube(u):
    """
    Maps points of the unit cube to S^3 so that uniform input gives the
    uniform (Haar) distribution on SU(2).
    """
    u = _np.asarray(u, dtype=_np.float64)
    r1 = _np.sqrt(1.0 - u[:, 0])
    r2 = _np.sqrt(u[:, 0])
    t1 = 2.0 * _np.pi * u[:, 1]
    t2 = 2.0 * _np.pi * u[:, 2]
    return _np.stack((r2 * _np.cos(t2), r1 * _np.sin(t1),
                      r1 * _np.cos(t1), r2 * _np.sin(t2)), axis=-1)


def fit_slope(x, y):
    """
    Least-squares slope of ``y`` against ``x``. Returns ``None`` when fewer
    than two distinct abscissae are available.
    """
    x = _np.asarray(x, dtype=_np.float64)
    y = _np.asarray(y, dtype=_np.float64)
    if x.size < 2 or _np.unique(x).size < 2:
        return None
    slope, _ = _np.polyfit(x, y, 1)
    return float(slope)


def sha256(data):
    return _hashlib.sha256(data).digest()


@_contextmanager
def atomic_write(path, mode='wb', **kwargs):
    """
    Opens a temporary file next to ``path`` and renames it into place when
    the block exits normally. On error the temporary file is removed and
    ``path`` is left untouched.
    """
    path = _os.path.abspath(path)
    dirname = _os.path.dirname(path)
    _os.makedirs(dirname, exist_ok=True)
    fd, tmp = _tempfile.mkstemp(dir=dirname, prefix='.tmp-')
    try:
        with _os.fdopen(fd, mode, **kwargs) as f:
            yield f
        _os.replace(tmp, path)
    except BaseException:
        if _os.path.exists(tmp):
            _os.unlink(tmp)
        raise
