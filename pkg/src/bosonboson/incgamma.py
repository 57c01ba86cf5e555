"""Upper incomplete gamma Gamma(a, z) for real order a and complex z.

Regimes:
  |z| >= 8   modified Lentz continued fraction (any real a)
  |z| <  8   stable alternating series at the base order a0 = a - round(a)
             in [-1/2, 1/2) (the E1 series when a is an integer), then the
             recurrence Gamma(a+1, z) = a Gamma(a, z) + z^a e^-z walks the
             integer offset up or down.

Centering a0 keeps every recurrence divisor at magnitude >= 1/2. The a0 -> 0
limit is handled without cancellation by pairing Gamma(a0+1) - 1 and
z^a0 - 1 through expm1, with log Gamma(1+a0) from its zeta series when a0 is
too small for lgamma's absolute accuracy. Principal branch of z^a
throughout; accuracy degrades on the negative real axis like every
representation of this function.
"""

from __future__ import annotations

import cmath
import math

_MAX_ITER = 512
_EPS = 1e-16
_TINY = 1e-300

_EULER_GAMMA = 0.57721566490153286060651209008240243104215933593992


class IncGammaError(ArithmeticError):
    """Continued fraction or series failed to converge."""


def _cexpm1(w: complex) -> complex:
    if abs(w) > 0.5:
        return cmath.exp(w) - 1.0
    term = w
    total = w
    for k in range(2, 40):
        term *= w / k
        total += term
        if abs(term) < _EPS * abs(total):
            break
    return total


def _upper_cf(a: float, z: complex) -> complex:
    # Gamma(a,z) = z^a e^-z / (z+1-a - 1(1-a)/(z+3-a - 2(2-a)/(...))),
    # modified Lentz.
    b = z + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0 else 1.0 / _TINY
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return cmath.exp(a * cmath.log(z) - z) * h
    raise IncGammaError(f"continued fraction stalled for a={a}, z={z}")


def _e1_series(z: complex) -> complex:
    # Gamma(0,z) = E1(z) = -euler_gamma - log z - sum_k (-z)^k / (k k!)
    total = -_EULER_GAMMA - cmath.log(z)
    term = 1.0 + 0.0j
    for k in range(1, _MAX_ITER):
        term *= -z / k
        total -= term / k
        if abs(term) < _EPS * max(abs(total), 1e-30):
            return total
    raise IncGammaError(f"E1 series stalled for z={z}")


def _lgamma1p(a: float) -> float:
    # log Gamma(1+a) with full absolute accuracy for tiny a, where lgamma's
    # error floor (~4e-16) would otherwise dominate a result of size gamma*a
    if abs(a) > 1e-3:
        return math.lgamma(1.0 + a)
    zeta = (1.6449340668482264, 1.2020569031595943, 1.0823232337111382,
            1.0369277551433699, 1.0173430619844491)
    total = -_EULER_GAMMA
    power = -1.0
    for k, zk in enumerate(zeta, start=2):
        power *= -a
        total += zk * power / k
    return a * total


def _upper_series_base(a: float, z: complex) -> complex:
    # a in [-1/2, 1/2) nonzero, |z| < 8:
    # Gamma(a,z) = (Gamma(a+1) - z^a)/a - z^a sum_{n>=1} (-z)^n / (n! (a+n))
    # with the first bracket evaluated as expm1 differences so a -> 0 is
    # smooth (the limit is E1 + its log/gamma pieces).
    lz = cmath.log(z)
    head = (math.expm1(_lgamma1p(a)) - _cexpm1(a * lz)) / a
    term = 1.0 + 0.0j
    tail = 0.0 + 0.0j
    for n in range(1, _MAX_ITER):
        term *= -z / n
        tail += term / (a + n)
        if abs(term) < _EPS * max(abs(tail), 1e-30):
            return head - cmath.exp(a * lz) * tail
    raise IncGammaError(f"series stalled for a={a}, z={z}")


def upper_gamma(a: float, z: complex) -> complex:
    """Gamma(a, z) = integral_z^inf t^(a-1) e^-t dt, principal branch."""
    a = float(a)
    z = complex(z)
    if z == 0:
        if a <= 0:
            raise IncGammaError("Gamma(a, 0) diverges for a <= 0")
        return complex(math.gamma(a))
    if abs(z) >= 8.0:
        return _upper_cf(a, z)
    # shift the order to a0 = a - m with a0 in [-1/2, 1/2), so the recurrence
    # never divides by anything smaller than 1/2
    m = math.floor(a + 0.5)
    a0 = a - m
    if a0 == 0.0:
        g = _e1_series(z)
    else:
        g = _upper_series_base(a0, z)
    if m >= 0:
        for k in range(m):  # walk up: Gamma(a+1,z) = a Gamma(a,z) + z^a e^-z
            ak = a0 + k
            g = ak * g + cmath.exp(ak * cmath.log(z) - z)
    else:
        for k in range(-m):  # walk down: Gamma(a,z) = (Gamma(a+1,z) - z^a e^-z)/a
            ak = a0 - k - 1
            g = (g - cmath.exp(ak * cmath.log(z) - z)) / ak
    return g
