"""Special functions used by the closed forms.

Scalar routines are pure Python on top of :mod:`math`.  The regularized
incomplete gamma function follows the usual split: power series below
``x = a + 1`` and a modified-Lentz continued fraction above it.  The upper
incomplete gamma function accepts any real order, which the interference
formulas need because ``1 - alpha/2`` is negative once ``alpha > 2``.
"""

import math

import numpy as np
from scipy.special import gammaln

from .errors import ConvergenceError, DomainError

__all__ = [
    "log_gamma",
    "reg_lower_gamma",
    "reg_upper_gamma",
    "upper_gamma",
    "expint_e1",
    "expint_ei",
    "reg_lower_gamma_seq",
    "reg_upper_gamma_seq",
]

EPS = 1e-16
TINY = 1e-300
MAXITER = 10_000
EULER_GAMMA = 0.57721566490153286061
# below this x the continued fraction converges too slowly for s <= 0
CF_MIN_X = 1.5


def _check_finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


def log_gamma(a):
    """Natural logarithm of the gamma function for ``a > 0``."""
    a = float(a)
    _check_finite("a", a)
    if a <= 0:
        raise DomainError(f"log_gamma requires a > 0, got {a!r}")
    return math.lgamma(a)


def _lower_series(a, x):
    # sum_{n>=0} x^n / (a (a+1) ... (a+n)), scaled by x^a e^-x / Gamma(a)
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(MAXITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * EPS:
            return total
    raise ConvergenceError(f"lower gamma series did not converge (a={a}, x={x})")


def _upper_cf(a, x):
    """Continued fraction h with Gamma(a, x) = x^a e^-x h; any real a, x > 0."""
    b = x + 1.0 - a
    c = 1.0 / TINY
    d = 1.0 / b if b != 0 else 1.0 / TINY
    h = d
    for i in range(1, MAXITER):
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
            return h
    raise ConvergenceError(f"upper gamma continued fraction did not converge (a={a}, x={x})")


def _check_ax(a, x):
    a = float(a)
    x = float(x)
    _check_finite("a", a)
    _check_finite("x", x)
    if a <= 0:
        raise DomainError(f"incomplete gamma requires a > 0, got a={a!r}")
    if x < 0:
        raise DomainError(f"incomplete gamma requires x >= 0, got x={x!r}")
    return a, x


def reg_lower_gamma(a, x):
    """Normalized lower incomplete gamma ``P(a, x)``, in ``[0, 1]``."""
    a, x = _check_ax(a, x)
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _lower_series(a, x) * math.exp(-x + a * math.log(x) - math.lgamma(a))
    return 1.0 - _upper_cf(a, x) * math.exp(-x + a * math.log(x) - math.lgamma(a))


def reg_upper_gamma(a, x):
    """Normalized upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    a, x = _check_ax(a, x)
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _lower_series(a, x) * math.exp(-x + a * math.log(x) - math.lgamma(a))
    return _upper_cf(a, x) * math.exp(-x + a * math.log(x) - math.lgamma(a))


def expint_e1(x):
    """Exponential integral ``E1(x) = int_x^inf e^-t / t dt`` for ``x > 0``."""
    x = float(x)
    _check_finite("x", x)
    if x <= 0:
        raise DomainError(f"E1 requires x > 0, got {x!r}")
    if x < 1.0:
        total = 0.0
        term = 1.0
        for n in range(1, MAXITER):
            term *= -x / n
            contrib = term / n
            total += contrib
            if abs(contrib) < EPS * abs(total):
                break
        return -EULER_GAMMA - math.log(x) - total
    return math.exp(-x) * _upper_cf(0.0, x)


def expint_ei(x):
    """Exponential integral ``Ei(x) = -E1(-x)`` restricted to ``x < 0``."""
    x = float(x)
    if math.isinf(x) and x < 0:
        return -0.0
    _check_finite("x", x)
    if x >= 0:
        raise DomainError(f"expint_ei is only defined here for x < 0, got {x!r}")
    return -expint_e1(-x)


def upper_gamma(s, x):
    """Upper incomplete gamma ``Gamma(s, x) = int_x^inf t^(s-1) e^-t dt``.

    ``s`` may be any real number.  For ``s <= 0`` and small ``x`` the value is
    obtained by downward recurrence
    ``Gamma(s, x) = (Gamma(s+1, x) - x^s e^-x) / s`` from a positive anchor
    ``s + ceil(-s) + 1`` (or from ``E1`` when ``s`` is an integer).  For
    ``x >= 1.5`` the continued fraction is used directly; it converges for
    every real order there and avoids the cancellation the recurrence
    suffers at large ``x``.
    """
    s = float(s)
    x = float(x)
    _check_finite("s", s)
    _check_finite("x", x)
    if x < 0:
        raise DomainError(f"upper_gamma requires x >= 0, got x={x!r}")
    if x == 0.0:
        if s > 0:
            return math.gamma(s)
        raise DomainError(f"upper_gamma(s={s!r}, 0) diverges for s <= 0")

    if s > 0 and x < s + 1.0:
        p = _lower_series(s, x) * math.exp(-x + s * math.log(x) - math.lgamma(s))
        return math.exp(math.lgamma(s)) * (1.0 - p)
    if s > 0 or x >= CF_MIN_X:
        return math.exp(-x + s * math.log(x)) * _upper_cf(s, x)

    if s == math.floor(s):
        g = expint_e1(x)
        t = 0.0
    else:
        t = s + math.ceil(-s) + 1.0
        g = upper_gamma(t, x)
    ex = math.exp(-x)
    while t > s + 0.5:
        t -= 1.0
        g = (g - x**t * ex) / t
    return g


def _poisson_logpmf(top, x):
    j = np.arange(top + 1, dtype=float)
    return j * math.log(x) - x - gammaln(j + 1.0)


def _check_seq(kmax, x):
    kmax = int(kmax)
    x = float(x)
    if kmax < 1:
        raise DomainError(f"kmax must be >= 1, got {kmax}")
    _check_finite("x", x)
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x!r}")
    return kmax, x


def reg_lower_gamma_seq(kmax, x):
    """``P(k, x)`` for ``k = 1 .. kmax`` as an array.

    Uses ``P(k, x) = Pr(N >= k)`` with ``N ~ Poisson(x)``, summing the Poisson
    mass from the top so that no subtraction occurs.
    """
    kmax, x = _check_seq(kmax, x)
    if x == 0.0:
        return np.zeros(kmax)
    top = max(kmax + 60, int(math.ceil(x + 14.0 * math.sqrt(x) + 60.0)))
    tail = np.cumsum(np.exp(_poisson_logpmf(top, x))[::-1])[::-1]
    return np.minimum(tail[1 : kmax + 1], 1.0)


def reg_upper_gamma_seq(kmax, x):
    """``Q(k, x) = 1 - P(k, x)`` for ``k = 1 .. kmax``.

    Equals ``Pr(N <= k - 1)`` for ``N ~ Poisson(x)``; summed from the bottom,
    so values close to zero keep full relative accuracy.
    """
    kmax, x = _check_seq(kmax, x)
    if x == 0.0:
        return np.ones(kmax)
    head = np.cumsum(np.exp(_poisson_logpmf(kmax - 1, x)))
    return np.minimum(head, 1.0)
