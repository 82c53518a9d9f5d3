import math as _math
import mpmath as _mp

# -------------------------------------------------------------------
#                      Mathematical constants
# -------------------------------------------------------------------

log_two               = 0.69314718055994530942  # noqa
inv_log_two           = 1.44269504088896340736  # noqa

pi                    = 3.14159265358979323846  # noqa
half_pi               = 1.57079632679489661923  # noqa
two_pi                = 6.28318530717958647692  # noqa

sqrt_two              = 1.41421356237309504880  # noqa
inv_sqrt_two          = 0.70710678118654752440  # noqa

golden_ratio          = 1.61803398874989484820  # noqa

# Word length exponent of the Elkasapy steps, log_phi(2)
golden_exponent       = 1.44042009041255449807  # noqa

# Dawson-Nielsen length exponent, log_{3/2}(5)
dn_exponent           = 3.96936229021526218080  # noqa

# Volume of the unit 3-sphere S^3
s3_volume             = 19.7392088021787172376  # noqa

_epsilon_64           = float.fromhex('0x1p-53')  # noqa


def epsilon(bits=None):
    '''
    Returns the machine epsilon at a given mantissa precision.

    Args:
        bits (int | None): Mantissa precision in bits. When omitted, the
            current mpmath working precision is used.

    Returns:
        mpmath.mpf: ``2^(-bits)``
    '''
    if bits is None:
        bits = _mp.mp.prec
    return _mp.ldexp(_mp.mpf(1), -int(bits))


def tolerance(k, bits=None):
    '''
    Returns the tolerance ``2^(k - p)`` where ``p`` is the working precision.

    Tolerances in skforge are always expressed relative to the precision in
    effect, e.g. ``tolerance(16)`` is the threshold below which a distance
    to the identity is considered degenerate.
    '''
    if bits is None:
        bits = _mp.mp.prec
    return _mp.ldexp(_mp.mpf(1), int(k) - int(bits))


def synthesis_precision(n, floor=128):
    '''Working precision used to synthesize at accuracy ``2^-n``.'''
    return max(int(floor), 4 * int(n) + 64)


def bits(distance):
    '''Accuracy of a distance in bits, i.e. ``-log2(distance)``.'''
    distance = float(distance)
    if distance <= 0:
        return _math.inf
    return -_math.log2(distance)
