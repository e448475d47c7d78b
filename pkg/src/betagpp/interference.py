"""Mean and variance of the interference seen by a typical point.

Interference at the origin, conditioned on a point there (reduced Palm
distribution), is ``I = sum_x h_x l(|x|)`` with unit-mean exponential fading
and the bounded power law ``l(r) = max(r0, r)^(-alpha)``.

Two independent routes are provided for each moment.  The closed forms come
from the gamma representation of the squared moduli.  The quadrature routes
integrate the second and third moment densities directly, the latter over
``(r1, r2, theta)`` in polar coordinates.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import zeta

from .errors import ConvergenceError, DomainError
from .pointproc import GppModel, MhcpModel, mhcp_retention
from .specfun import expint_ei, reg_lower_gamma_seq, reg_upper_gamma, upper_gamma

__all__ = [
    "PathLoss",
    "InterferenceMoments",
    "mean_interference",
    "mean_interference_unbounded",
    "mean_interference_alpha4",
    "variance_interference",
    "variance_interference_alpha4",
    "variance_bound_unbounded",
    "variance_tail_bound",
    "mean_interference_quadrature",
    "second_moment_first_term",
    "second_moment_first_term_quadrature",
    "pair_term_quadrature",
    "variance_interference_quadrature",
    "ppp_mean_interference",
    "ppp_gap",
    "mhcp_mean_interference",
]

DEFAULT_KMAX = 200


@dataclass(frozen=True)
class PathLoss:
    """Bounded power law ``l(r) = max(r0, r)^(-alpha)``; ``r0 = 0`` is unbounded."""

    r0: float
    alpha: float

    def __post_init__(self):
        r0, alpha = float(self.r0), float(self.alpha)
        if not (math.isfinite(r0) and r0 >= 0):
            raise DomainError(f"r0 must be finite and nonnegative, got {self.r0!r}")
        if not (math.isfinite(alpha) and alpha > 1):
            raise DomainError(f"alpha must exceed 1, got {self.alpha!r}")
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "alpha", alpha)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.maximum(self.r0, r) ** -self.alpha
        return float(out) if out.ndim == 0 else out

    def of_squared(self, q):
        """``l(sqrt(q))`` for squared distances ``q``."""
        q = np.asarray(q, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.maximum(self.r0 * self.r0, q) ** (-0.5 * self.alpha)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class InterferenceMoments:
    """Mean, variance and the truncation diagnostics of the variance series.

    ``mean`` is ``inf`` when ``alpha <= 2`` (the mean diverges while the
    variance stays finite).
    """

    mean: float
    variance: float
    truncation_terms: int
    truncation_bound: float


def _require_bounded(pl, min_alpha):
    if pl.r0 <= 0:
        raise DomainError("this formula needs r0 > 0; use the unbounded variants for r0 = 0")
    if pl.alpha <= min_alpha:
        raise DomainError(f"alpha must exceed {min_alpha} here, got {pl.alpha}")


def mean_interference(model, pl):
    """Closed-form mean interference; requires ``alpha > 2`` and ``r0 > 0``."""
    _require_bounded(pl, 2.0)
    beta, c, alpha, r0 = model.beta, model.c, pl.alpha, pl.r0
    x = model.ratio * r0 * r0
    return (
        c * r0 ** (2.0 - alpha) * alpha / (alpha - 2.0)
        + beta * r0**-alpha * math.expm1(-x)
        - c ** (alpha / 2.0) * beta ** (1.0 - alpha / 2.0) * upper_gamma(1.0 - alpha / 2.0, x)
    )


def mean_interference_unbounded(model, alpha):
    """Mean interference for ``l(r) = r^(-alpha)``, finite for ``2 < alpha < 4``."""
    alpha = float(alpha)
    if not 2.0 < alpha < 4.0:
        raise DomainError(f"unbounded mean interference needs 2 < alpha < 4, got {alpha}")
    return -(model.c ** (alpha / 2.0)) * model.beta ** (1.0 - alpha / 2.0) * math.gamma(1.0 - alpha / 2.0)


def mean_interference_alpha4(model, r0):
    """Mean interference at ``alpha = 4`` written with the exponential integral."""
    r0 = float(r0)
    if not r0 > 0:
        raise DomainError("r0 must be positive")
    beta, c = model.beta, model.c
    x = model.ratio * r0 * r0
    return (
        2.0 * c / r0**2
        + beta / r0**4 * math.expm1(-x)
        - c * c / beta * expint_ei(-x)
        - c / r0**2 * math.exp(-x)
    )


def _gamma_ratio(k, a, x):
    """``Gamma(k - a, x) / Gamma(k)`` without overflowing for large ``k``."""
    s = k - a
    if s > 0:
        return math.exp(math.lgamma(s) - math.lgamma(k)) * reg_upper_gamma(s, x)
    return upper_gamma(s, x) / math.gamma(k)


def _series_terms(model, pl, kmax, order):
    """Terms ``k = 2..kmax`` of ``r0^-alpha P(k,x) + (c/beta)^(alpha/2) Gamma(k - alpha/2, x)/Gamma(k)``."""
    x = model.ratio * pl.r0**2
    a = pl.alpha / 2.0
    lower = reg_lower_gamma_seq(kmax, x)[1:]
    if order == "incomplete":
        ratios = np.array([_gamma_ratio(k, a, x) for k in range(2, kmax + 1)])
    elif order == "complete":
        if any(k - a <= 0 and k - a == math.floor(k - a) for k in range(2, kmax + 1)):
            raise DomainError("the complete-gamma series has a pole at this alpha")
        ratios = np.array([math.exp(math.lgamma(k - a) - math.lgamma(k)) if k > a
                           else math.gamma(k - a) / math.gamma(k) for k in range(2, kmax + 1)])
    else:
        raise DomainError(f"unknown series variant {order!r}")
    return pl.r0**-pl.alpha * lower + model.ratio**a * ratios


def variance_tail_bound(model, pl, kmax):
    """Rigorous bound on the series mass dropped beyond ``kmax``.

    Uses ``(u + v)^2 <= 2u^2 + 2v^2``, ``P(k,x)^2 <= P(k,x)`` with the
    Poisson-tail bound for the first part, and
    ``Gamma(k-a)/Gamma(k) <= (k - a - 1/2)^(-a)`` for the second.
    """
    kmax = int(kmax)
    a = pl.alpha / 2.0
    x = model.ratio * pl.r0**2
    if kmax - a - 0.5 <= 0 or x >= kmax + 2:
        return math.inf
    lead = math.exp(-x + (kmax + 1) * math.log(x) - math.lgamma(kmax + 2)) if x > 0 else 0.0
    first = 2.0 * pl.r0 ** (-2.0 * pl.alpha) * lead / (1.0 - x / (kmax + 2)) ** 2
    second = 2.0 * model.ratio**pl.alpha * (kmax - a - 0.5) ** (1.0 - 2.0 * a) / (2.0 * a - 1.0)
    return model.beta**2 * (first + second)


def second_moment_first_term(model, pl):
    """``2 lambda int l(r)^2 K'(r) dr`` in closed form (fading second moment 2)."""
    _require_bounded(pl, 1.0)
    beta, c, alpha, r0 = model.beta, model.c, pl.alpha, pl.r0
    x = model.ratio * r0 * r0
    return (
        2.0 * c * alpha * r0 ** (2.0 - 2.0 * alpha) / (alpha - 1.0)
        + 2.0 * beta * r0 ** (-2.0 * alpha) * math.expm1(-x)
        - 2.0 * c**alpha * beta ** (1.0 - alpha) * upper_gamma(1.0 - alpha, x)
    )


def variance_interference(model, pl, kmax=DEFAULT_KMAX, gamma_form="incomplete"):
    """Closed-form variance with the series truncated at ``kmax``.

    ``gamma_form="complete"`` evaluates the variant of the series that uses
    ``Gamma(k - alpha/2)`` instead of the incomplete ``Gamma(k - alpha/2, x)``;
    it exists only so the two can be compared against simulation.
    """
    _require_bounded(pl, 1.0)
    kmax = int(kmax)
    if kmax < 2:
        raise DomainError("kmax must be at least 2")
    terms = _series_terms(model, pl, kmax, gamma_form)
    var = second_moment_first_term(model, pl) - model.beta**2 * float(np.sum(terms**2))
    mean = mean_interference(model, pl) if pl.alpha > 2 else math.inf
    return InterferenceMoments(mean, var, kmax, variance_tail_bound(model, pl, kmax))


def variance_interference_alpha4(model, r0, kmax=DEFAULT_KMAX):
    """Variance at ``alpha = 4`` in exponential-integral form, series to ``kmax``."""
    r0 = float(r0)
    if not r0 > 0:
        raise DomainError("r0 must be positive")
    beta, c = model.beta, model.c
    b = model.ratio
    x = b * r0 * r0
    xi = r0**-6 - b / 3.0 * r0**-4 + b * b / 6.0 * r0**-2 - b**3 / 6.0
    lower = reg_lower_gamma_seq(kmax, x)[1:]
    ratios = np.array([_gamma_ratio(k, 2.0, x) for k in range(2, int(kmax) + 1)])
    eta = float(np.sum((lower / r0**4 + b * b * ratios) ** 2))
    return (
        2.0 * beta / r0**2 * (math.exp(-x) * xi + 4.0 * c / (3.0 * beta) * r0**-4 - r0**-6)
        - c**4 / (3.0 * beta**3) * expint_ei(-x)
        - beta**2 * eta
    )


def variance_bound_unbounded(model, alpha):
    """Upper bound on the variance for ``l(r) = r^(-alpha)``, ``1 < alpha < 2``."""
    alpha = float(alpha)
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"the unbounded variance bound needs 1 < alpha < 2, got {alpha}")
    c, beta = model.c, model.beta
    return -(c**alpha) * beta ** (1.0 - alpha) * (
        2.0 * math.gamma(1.0 - alpha) + beta * (float(zeta(alpha)) - 1.0)
    )


def _radial_integral(model, pl, power, ppp=False):
    """``c int_0^inf l(sqrt q)^power (1 - exp(-(c/beta) q)) dq`` by adaptive quadrature.

    Past ``Q*`` where ``exp(-(c/beta) q) < e^-50`` the integrand is a pure
    power and its tail is added analytically.
    """
    b = model.ratio
    r02 = pl.r0**2
    a = 0.5 * pl.alpha * power
    if a <= 1:
        raise DomainError("integral diverges: alpha * power must exceed 2")

    def weight(q):
        return 1.0 if ppp else -math.expm1(-b * q)

    def f(q):
        return max(r02, q) ** -a * weight(q)

    opts = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    total = 0.0
    if r02 > 0:
        total += integrate.quad(f, 0.0, r02, **opts)[0]
    qstar = max(r02, 50.0 / b)
    edges = [r02]
    while edges[-1] < qstar:
        edges.append(min(qstar, max(2.0 * edges[-1], edges[-1] + 1.0 / b)))
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate.quad(f, lo, hi, **opts)[0]
    # tail of q^-a (1 - e^{-bq}); the e^{-bq} part is below e^-50 relative
    total += qstar ** (1.0 - a) / (a - 1.0)
    return model.c * total


def mean_interference_quadrature(model, pl, ppp=False):
    """Mean interference as ``lambda int l(r) K'(r) dr`` by numerical quadrature.

    ``ppp=True`` replaces ``K`` by ``pi r^2``, the Poisson limit.
    """
    _require_bounded(pl, 2.0)
    return _radial_integral(model, pl, 1, ppp=ppp)


def second_moment_first_term_quadrature(model, pl):
    """Quadrature counterpart of :func:`second_moment_first_term`."""
    _require_bounded(pl, 1.0)
    return 2.0 * _radial_integral(model, pl, 2)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panels(edges):
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def _graded(lo, hi, start, toward):
    """Edges on ``[lo, hi]`` refined geometrically toward the end ``toward``."""
    span = hi - lo
    steps = [0.0]
    h = min(start, span)
    while steps[-1] + h < span:
        steps.append(steps[-1] + h)
        h *= 2.0
    steps.append(span)
    steps = np.array(steps)
    return lo + steps if toward == "lo" else (hi - steps)[::-1]


def _centered_kernel(b, r1, r2, phi):
    """``(rho3 - rho2 rho2 / lambda) / (c/pi)^3`` at ``0, r1, r2 e^{i phi}``."""
    s = b * (r1 * r1 + r2 * r2)
    p = b * r1 * r2
    # |w1 - w2|^2 written as (r1 - r2)^2 + 4 r1 r2 sin^2(phi/2) to avoid overflow
    near = -b * (r1 - r2) ** 2 - 4.0 * p * np.sin(0.5 * phi) ** 2
    return (2.0 * np.exp(-s + p * np.cos(phi)) * np.cos(p * np.sin(phi))
            - np.exp(near) - np.exp(-s))


def pair_term_quadrature(model, pl, rtol=1e-10, max_panels=200):
    """Centered pair contribution to the second moment by 3-D quadrature.

    Computes ``(1/lambda) int int l(x) l(y) (rho3(0,x,y) - rho2(x) rho2(y) /
    lambda) dx dy`` over ``(r1, r2, theta)``, ``theta = theta1 - theta2``,
    with angular weight ``2 (2 pi - theta)``.  Subtracting the product of
    second moment densities leaves an integrand that decays like ``r^(1 -
    2 alpha)``, which converges for every ``alpha > 1``; the subtracted part
    equals the squared mean.  By symmetry only ``r2 <= r1`` is integrated
    (``r2 = u r1``) and the result doubled.  Each axis uses composite
    16-point Gauss-Legendre panels graded toward the kernel's ridges
    (``r2 = r1`` and ``theta = 0, 2 pi``) and split at the path-loss kink.
    The radial range doubles panel by panel until the extrapolated tail
    falls below ``rtol`` of the running value; that tail estimate is added.
    """
    _require_bounded(pl, 1.0)
    b = model.ratio
    scale = 1.0 / math.sqrt(b)
    r0 = pl.r0
    # radial edges: fine near the origin, kink at r0, geometric outward
    base = [0.0, 0.125 * scale, 0.25 * scale, 0.5 * scale, scale]
    edges = sorted(set([e for e in base if e < r0] + [r0] + [e for e in base if e > r0]))
    def panel(lo, hi):
        r1s, w1s = _panels([lo, hi])
        return sum(w1 * _inner(b, pl, r1, scale) for r1, w1 in zip(r1s, w1s))

    total = sum(panel(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))
    decay = 2.0 ** (2.0 * pl.alpha - 2.0)
    tail = 0.0
    for _ in range(max_panels):
        lo = edges[-1]
        hi = 2.0 * lo
        part = panel(lo, hi)
        total += part
        edges.append(hi)
        # far panels scale like r^(2 - 2 alpha): geometric tail estimate
        tail = part / (decay - 1.0)
        if hi > max(8.0 * scale, 4.0 * r0) and abs(tail) < rtol * abs(total):
            break
    else:
        raise ConvergenceError("pair-term quadrature did not reach its radial tolerance")
    return 2.0 * model.intensity**2 * (total + tail)


def _inner(b, pl, r1, scale):
    """``int_0^1 du int_0^{2pi} dphi`` of the pair integrand at fixed ``r1``."""
    width = min(1.0, scale / r1)
    u_edges = _graded(0.0, 1.0, 0.125 * width, "hi")
    if pl.r0 < r1:
        u_edges = np.union1d(u_edges, [pl.r0 / r1])
    u, wu = _panels(u_edges)
    r2 = u * r1
    w_phi = min(1.0, scale / r1)
    half = _graded(0.0, math.pi, 0.125 * w_phi, "lo")
    phi_edges = np.concatenate([half, 2.0 * math.pi - half[::-1][1:]])
    phi, wphi = _panels(phi_edges)
    kern = _centered_kernel(b, r1, r2[:, None], phi[None, :])
    ang = kern @ (wphi * 2.0 * (2.0 * math.pi - phi))
    radial = pl(r1) * pl(r2) * r1 * r2 * r1
    return float(np.dot(wu, radial * ang))


def variance_interference_quadrature(model, pl):
    """Variance from the second and third moment densities by quadrature."""
    _require_bounded(pl, 1.0)
    return second_moment_first_term_quadrature(model, pl) + pair_term_quadrature(model, pl)


def ppp_mean_interference(intensity_c, pl):
    """Mean interference of a PPP of intensity ``c/pi``: ``alpha r0^(2-alpha) c/(alpha-2)``."""
    _require_bounded(pl, 2.0)
    return pl.alpha * pl.r0 ** (2.0 - pl.alpha) * float(intensity_c) / (pl.alpha - 2.0)


def ppp_gap(model, pl):
    """Difference between the PPP and the 1-GPP mean interference at equal ``c``."""
    if model.beta != 1.0:
        raise DomainError("ppp_gap is defined for beta = 1")
    _require_bounded(pl, 2.0)
    x = model.c * pl.r0**2
    a = pl.alpha / 2.0
    return -pl.r0**-pl.alpha * math.expm1(-x) + model.c**a * upper_gamma(1.0 - a, x)


def _power_tail(pl, start):
    """``int_start^inf l(r) r dr`` for ``alpha > 2``."""
    r0, alpha = pl.r0, pl.alpha
    if start >= r0:
        return start ** (2.0 - alpha) / (alpha - 2.0)
    return r0**-alpha * (r0 * r0 - start * start) / 2.0 + r0 ** (2.0 - alpha) / (alpha - 2.0)


def mhcp_mean_interference(model, pl, lower=None):
    """Mean interference of a Matern hard-core process at a typical point.

    ``2 pi (lambda_p^2 / lambda) int l(r) k(r) r dr`` with ``k`` the joint
    retention probability.  ``lower`` sets the start of the integration
    (default ``delta``); any value below ``delta`` gives the same result.
    """
    if not isinstance(model, MhcpModel):
        raise DomainError("mhcp_mean_interference expects an MhcpModel")
    if pl.alpha <= 2:
        raise DomainError("mean interference diverges for alpha <= 2")
    d = model.delta
    lo = d if lower is None else float(lower)
    if lo < 0:
        raise DomainError("lower limit must be nonnegative")
    pts = [p for p in (d, pl.r0) if lo < p < 2.0 * d]
    total = 0.0
    if lo < 2.0 * d:
        total = integrate.quad(lambda r: pl(r) * mhcp_retention(model, r) * r, lo, 2.0 * d,
                               points=pts or None, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    k_far = float(mhcp_retention(model, 3.0 * d))
    total += k_far * _power_tail(pl, max(lo, 2.0 * d))
    return 2.0 * math.pi * model.lambda_p**2 / model.intensity * total


def gpp_model_check(model):
    if not isinstance(model, GppModel):
        raise DomainError("expected a GppModel")
    return model
