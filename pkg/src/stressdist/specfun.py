"""Regularized incomplete gamma functions.

The series is used for ``x < a + 1`` and the Lentz continued fraction
otherwise. Both are accurate for shapes as small as ``1/72``, where the
mass of the distribution piles up against ``x = 0``.
"""

import math

EPS = 1e-16
TINY = 1e-300
MAX_ITER = 10_000_000


STIRLING_MIN = 50.0
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def _excess_log(r):
    # r - 1 - log(r), without cancellation near r = 1
    t = r - 1.0
    if abs(t) < 0.1:
        total, term, n = 0.0, -t, 1
        while True:
            term *= -t
            n += 1
            add = term / n
            total += add
            if abs(add) <= EPS * abs(total):
                return total
    return t - math.log(r)


def _log_prefactor(a, x):
    # log(x^a e^{-x} / Gamma(a)); for large a the naive form cancels to ~a*eps
    if a < STIRLING_MIN:
        return a * math.log(x) - x - math.lgamma(a)
    corr = (1 / 12 - (1 / 360 - (1 / 1260 - 1 / (1680 * a * a)) / (a * a)) / (a * a)) / a
    return -a * _excess_log(x / a) + 0.5 * math.log(a) - _LOG_SQRT_2PI - corr


def _series_p(a, x):
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * EPS:
            break
    else:
        raise RuntimeError("incomplete gamma series did not converge")
    return total * math.exp(_log_prefactor(a, x))


def _cf_q(a, x):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < TINY:
            d = TINY
        c = b + an / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    else:
        raise RuntimeError("incomplete gamma continued fraction did not converge")
    return h * math.exp(_log_prefactor(a, x))


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma ``P(a, x)``."""
    if a <= 0:
        raise ValueError("shape must be positive")
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _series_p(a, x))
    return max(0.0, 1.0 - _cf_q(a, x))


def gammainc_upper(a, x):
    """Regularized upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    if a <= 0:
        raise ValueError("shape must be positive")
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _series_p(a, x))
    return min(1.0, _cf_q(a, x))
