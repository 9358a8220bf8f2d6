"""Error function and its complement for real arguments.

|x| < 2 uses the all-positive series
    erf(x) = 2/sqrt(pi) exp(-x^2) sum_k 2^k x^(2k+1) / (1*3*...*(2k+1)),
and x >= 2 evaluates erfc by the Laplace continued fraction
    erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
with modified Lentz iteration, so erfc keeps relative accuracy in the tail.
"""

import math

import numpy as np

from wimpyrg.errors import NonFiniteInput

_SWITCH = 2.0
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_TINY = 1e-300


def _check(x):
    x = float(x)
    if not math.isfinite(x):
        raise NonFiniteInput(f"argument {x!r} is not finite")
    return x


def _erf_series(x):
    x2 = x * x
    term = x
    total = x
    k = 0
    while abs(term) > 1e-17 * abs(total):
        k += 1
        term *= 2.0 * x2 / (2 * k + 1)
        total += term
    return _TWO_OVER_SQRT_PI * math.exp(-x2) * total


def _erfc_cf(x):
    # b0 = x, then a_j = j/2 over b_j = x
    f = x
    c = x
    d = 0.0
    for j in range(1, 500):
        a = 0.5 * j
        d = x + a * d
        d = _TINY if d == 0.0 else d
        c = x + a / c
        c = _TINY if c == 0.0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x * x) / (math.sqrt(math.pi) * f)


def _erfc_scalar(x):
    if x >= _SWITCH:
        return _erfc_cf(x)
    if x <= -_SWITCH:
        return 2.0 - _erfc_cf(-x)
    return 1.0 - _erf_series(x)


def _erf_scalar(x):
    if abs(x) < _SWITCH:
        return _erf_series(x)
    tail = _erfc_cf(abs(x))
    return math.copysign(1.0 - tail, x)


def erf(x):
    """erf of a scalar or array."""
    if np.ndim(x) == 0:
        return _erf_scalar(_check(x))
    return np.vectorize(lambda v: _erf_scalar(_check(v)), otypes=[float])(x)


def erfc(x):
    """1 - erf(x), accurate in relative terms for large positive x."""
    if np.ndim(x) == 0:
        return _erfc_scalar(_check(x))
    return np.vectorize(lambda v: _erfc_scalar(_check(v)), otypes=[float])(x)


def erf_maclaurin(x, terms=8):
    """Truncated alternating Maclaurin series of erf, for small |x|."""
    total = 0.0
    for k in range(terms):
        total += (-1) ** k * x ** (2 * k + 1) / ((2 * k + 1) * math.factorial(k))
    return _TWO_OVER_SQRT_PI * total


def erfc_asymptotic(x, terms=6):
    """Truncated large-|x| asymptotic series of erfc."""
    s = 1.0
    term = 1.0
    for k in range(1, terms):
        term *= -(2 * k - 1) / (2.0 * x * x)
        s += term
    step = 2.0 if x < 0 else 0.0
    return step + math.exp(-x * x) / (x * math.sqrt(math.pi)) * s
