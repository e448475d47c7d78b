"""Coverage probability of the typical user under nearest-point association.

The user sits at the origin, base stations form a scaled beta-GPP, fading is
exponential with rate ``mu`` and path loss is ``r^(-alpha)``.  Writing
``s = (c/beta) r^2`` for the normalized squared distance of the serving
station, the coverage probability is

    p = beta int_0^inf e^(-s) e^(-mu theta sigma2 (s/b)^(alpha/2))
            sum_i s^(i-1)/Gamma(i) prod_{k != i} F_k(s) ds,   b = c/beta,

with the per-index factor

    F_k(s) = 1 - beta + beta U_k(s),
    U_k(s) = (1/Gamma(k)) int_s^inf v^(k-1) e^(-v) / (1 + theta (s/v)^(alpha/2)) dv.

``F_k`` is the probability that point ``k`` is either not retained (``1 -
beta``) or retained, farther than the serving station and not strong enough
to push the SINR below ``theta``.  Following the factor-out trick the sum
of products is evaluated as ``M * S`` with ``M = prod_k F_k`` and
``S = sum_i s^(i-1) / (Gamma(i) F_i)``, both in log space.

Index ranges: ``F_k`` is integrated numerically for ``k <= K1(s)``.  Past
``K1`` the incomplete gamma part is below ``e^-50`` and ``1 - F_k = beta
J_k`` with ``J_k = E[y/(1+y)]``, ``y = theta s^a V^-a``, ``V ~ gamma(k)``,
which is expanded in the moments ``E V^-ma = Gamma(k-ma)/Gamma(k)``.  The
logarithms are summed term by term up to ``K2(s)``; beyond it the first
order uses the exact telescoping sum of gamma ratios and higher orders an
integral approximation.

``form="near_dropped"`` evaluates the alternative inner factor
``(1 - beta) Q(k, s) + beta U_k(s)``, which drops the non-retained points
located closer than the serving station; it agrees with the default only
when ``beta = 1`` and is kept for comparison.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from .errors import DomainError, TruncationError
from .pointproc import GppModel
from .specfun import reg_lower_gamma_seq, reg_upper_gamma_seq

__all__ = [
    "SinrConfig",
    "CoverageResult",
    "inner_factors",
    "log_product_and_series",
    "ms_product",
    "direct_sum_product",
    "coverage_integrand",
    "coverage_probability",
    "coverage_curve",
    "db_to_linear",
    "ppp_coverage_probability",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_LOG_PANELS = 8
_LIN_PANELS = 8
Y_EXPLICIT = 0.05      # expansion parameter where the explicit range ends
Y_TAIL = 1e-3          # expansion parameter where term-by-term summation ends
SERIES_ORDER = 12
LOG_TOL = 1e-12


@dataclass(frozen=True)
class SinrConfig:
    theta: float
    sigma2: float = 0.0
    mu: float = 1.0
    alpha: float = 4.0

    def __post_init__(self):
        for name in ("theta", "sigma2", "mu", "alpha"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.theta <= 0:
            raise DomainError("theta must be positive")
        if self.sigma2 < 0:
            raise DomainError("sigma2 must be nonnegative")
        if self.mu <= 0:
            raise DomainError("mu must be positive")
        if self.alpha <= 2:
            raise DomainError("alpha must exceed 2")

    def with_theta(self, theta):
        return SinrConfig(theta, self.sigma2, self.mu, self.alpha)


@dataclass(frozen=True)
class CoverageResult:
    probability: float
    series_terms: int
    product_terms: int
    quadrature_error_estimate: float


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def _explicit_range(cfg, s, kmax):
    a = cfg.alpha / 2.0
    k1 = max(int(kmax), int(math.ceil(s + 12.0 * math.sqrt(s) + 40.0)),
             int(math.ceil(SERIES_ORDER * a)) + 2)
    if s > 0:
        k1 = max(k1, int(math.ceil(s * (cfg.theta / Y_EXPLICIT) ** (1.0 / a))))
    return k1


def _panel_nodes(lo, hi, panels, log_scale):
    """Gauss-Legendre nodes and log weights on ``panels`` equal pieces of
    ``[lo, hi]`` per row, equal in ``v`` or in ``log v``."""
    if log_scale:
        lo, hi = np.log(lo), np.log(hi)
    edges = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, panels + 1)[None, :]
    half = 0.5 * np.diff(edges, axis=1)
    mid = 0.5 * (edges[:, 1:] + edges[:, :-1])
    x = (mid[:, :, None] + half[:, :, None] * _GL_X[None, None, :]).reshape(len(lo), -1)
    with np.errstate(divide="ignore"):
        logw = np.log((half[:, :, None] * _GL_W[None, None, :]).reshape(len(lo), -1))
    if log_scale:
        return np.exp(x), logw + x
    return x, logw


def inner_factors(model, cfg, s, kmax, form="exact"):
    """``log F_k(s)`` for ``k = 1..kmax`` by Gauss-Legendre panels.

    Each ``k`` gets its own interval covering the bulk of the gamma(k)
    density above ``s``.  The part below ``max(64 s, 16)`` is split into panels equal
    in ``log v`` (the keep factor varies on the scale of ``s`` and decays
    only like a power), the
    rest into panels equal in ``v``.  Where ``Q(k, s) > 1/2`` the factor is
    formed as ``1 - beta (P(k, s) + J_k)`` so the quadrature error scales
    with the small quantity ``J_k``; elsewhere ``U_k`` is summed in log
    space so tiny factors keep their relative accuracy.
    """
    kmax = int(kmax)
    if s == 0.0:
        return np.zeros(kmax)
    if form not in ("exact", "near_dropped"):
        raise DomainError(f"unknown form {form!r}")
    k = np.arange(1, kmax + 1, dtype=float)
    beta = model.beta
    spread = 14.0 * np.sqrt(k)
    lo = np.maximum(s, k - 1.0 - spread)
    hi = np.maximum(s, k - 1.0) + spread + 50.0
    cut = np.clip(max(64.0 * s, 16.0), lo, hi)
    v1, w1 = _panel_nodes(lo, cut, _LOG_PANELS, True)
    v2, w2 = _panel_nodes(cut, hi, _LIN_PANELS, False)
    v = np.concatenate((v1, v2), axis=1)
    logw = np.concatenate((w1, w2), axis=1)
    logpdf = (k[:, None] - 1.0) * np.log(v) - v + logw
    # one exponential per node: scale each row by its largest term
    top = np.max(logpdf, axis=1)
    pdf = np.exp(logpdf - top[:, None])
    y = cfg.theta * (s / v) ** (cfg.alpha / 2.0)
    keep = 1.0 / (1.0 + y)
    scale = top - gammaln(k)
    with np.errstate(divide="ignore"):
        log_u = np.minimum(np.log(np.sum(pdf * keep, axis=1)) + scale, 0.0)
        jk = np.exp(np.log(np.sum(pdf * (y * keep), axis=1)) + scale)
        log_q = np.minimum(np.log(np.sum(pdf, axis=1)) + scale, 0.0)
    p_low = reg_lower_gamma_seq(kmax, s)
    q_up = reg_upper_gamma_seq(kmax, s)
    upper = q_up > 0.5
    with np.errstate(divide="ignore"):
        if form == "exact":
            comp = np.log1p(-beta * np.minimum(p_low + jk, 1.0))
            direct = log_u if beta == 1.0 else np.logaddexp(math.log1p(-beta),
                                                            math.log(beta) + log_u)
        else:
            comp = np.log(np.maximum(q_up - beta * jk, 0.0))
            direct = log_u if beta == 1.0 else np.logaddexp(math.log1p(-beta) + log_q,
                                                            math.log(beta) + log_u)
    return np.where(upper, comp, direct)


def _gamma_ratio_sum_from(start, p):
    """``sum_{k >= start} Gamma(k - p) / Gamma(k)`` for ``p > 1`` (telescoping)."""
    return math.exp(gammaln(start - p) - gammaln(start - 1.0)) / (p - 1.0)


def _tail_log_product(model, cfg, s, k1):
    """``sum_{k > k1} log F_k(s)`` and the index where explicit summation stopped."""
    if s == 0.0:
        return 0.0, k1
    a = cfg.alpha / 2.0
    beta = model.beta
    ys = cfg.theta * s**a
    k2 = max(k1 + 1, int(math.ceil(s * (cfg.theta / Y_TAIL) ** (1.0 / a))))
    ks = np.arange(k1 + 1, k2 + 1, dtype=float)
    m = np.arange(1, SERIES_ORDER + 1, dtype=float)
    signs = np.where(m % 2 == 1, 1.0, -1.0)
    # J_k = sum_m (-1)^(m+1) (theta s^a)^m Gamma(k - m a) / Gamma(k)
    logs = m[:, None] * math.log(ys) + gammaln(ks[None, :] - m[:, None] * a) - gammaln(ks)[None, :]
    jk = np.sum(signs[:, None] * np.exp(logs), axis=0)
    total = float(np.sum(np.log1p(-beta * jk)))
    # beyond k2: first order exactly, orders 2..4 by integral approximation
    first = sum(sg * math.exp(mm * math.log(ys)) * _gamma_ratio_sum_from(k2 + 1, mm * a)
                for sg, mm in zip(signs, m))
    total -= beta * first
    base = k2 + 0.5 - 0.5 * (a + 1.0)
    for n in range(2, 5):
        p = n * a
        total -= beta**n / n * ys**n * base ** (1.0 - p) / (p - 1.0)
    return total, k2


def log_product_and_series(model, cfg, s, kmax=256, imax=128, form="exact", tail=True):
    """``(log M, log S, product_terms, series_terms)`` at the point ``s``.

    With ``tail=False`` the product and series stop at ``kmax`` and
    ``imax`` exactly, and a :class:`TruncationError` is raised if the last
    log-product increment or the last series term is not negligible.
    """
    if tail:
        k1 = _explicit_range(cfg, s, kmax)
        i_top = max(int(imax), min(k1, int(math.ceil(s + 12.0 * math.sqrt(s) + 40.0))))
    else:
        k1 = int(kmax)
        i_top = int(imax)
        if i_top > k1:
            raise DomainError("imax must not exceed kmax")
    logf = inner_factors(model, cfg, s, k1, form)
    if np.any(logf > 1e-12) or (model.beta < 1 and np.any(logf < math.log1p(-model.beta) - 1e-9)
                                and form == "exact"):
        raise ArithmeticError("inner factor left the interval (1 - beta, 1]")
    log_m = float(np.sum(logf))
    k_used = k1
    if tail:
        extra, k_used = _tail_log_product(model, cfg, s, k1)
        log_m += extra
    i = np.arange(1, i_top + 1, dtype=float)
    with np.errstate(divide="ignore"):
        log_terms = (i - 1.0) * math.log(s) - gammaln(i) - logf[:i_top] if s > 0 else \
            np.where(i == 1, -logf[:i_top], -np.inf)
    log_s = float(logsumexp(log_terms))
    if not tail:
        diag = {"s": s, "kmax": k1, "imax": i_top, "last_log_increment": float(logf[-1]),
                "last_series_ratio": float(math.exp(log_terms[-1] - log_s))}
        if abs(logf[-1]) > LOG_TOL or diag["last_series_ratio"] > LOG_TOL:
            raise TruncationError("product or series truncated too early", diag)
    return log_m, log_s, k_used, i_top


def ms_product(model, cfg, s, kmax, imax, form="exact"):
    """``M * S`` with both truncated at the given orders (no tail)."""
    logf = inner_factors(model, cfg, s, kmax, form)
    i = np.arange(1, imax + 1, dtype=float)
    terms = np.exp((i - 1.0) * math.log(s) - gammaln(i) - logf[:imax])
    return math.exp(float(np.sum(logf))) * float(np.sum(terms))


def direct_sum_product(model, cfg, s, kmax, imax, form="exact"):
    """``sum_i s^(i-1)/Gamma(i) prod_{k != i} F_k`` evaluated literally."""
    f = np.exp(inner_factors(model, cfg, s, kmax, form))
    total = 0.0
    for i in range(1, imax + 1):
        others = np.prod(np.delete(f, i - 1))
        total += s ** (i - 1) / math.gamma(i) * others
    return total


def coverage_integrand(model, cfg, s, kmax=256, imax=128, form="exact", tail=True):
    """Integrand of the outer integral at ``s`` (including the factor ``beta``)."""
    log_m, log_s, _, _ = log_product_and_series(model, cfg, s, kmax, imax, form, tail)
    noise = cfg.mu * cfg.theta * cfg.sigma2 * (s / model.ratio) ** (cfg.alpha / 2.0)
    return model.beta * math.exp(-s - noise + log_m + log_s)


def coverage_probability(model, cfg, imax=128, kmax=256, form="exact", tail=True):
    """Coverage probability ``P(SINR > theta)``.

    The outer integral is split into panels ``[0, L], [L, 2L], ...`` with
    ``L = 4 / beta`` and evaluated by adaptive Gauss-Kronrod quadrature,
    stopping once a panel adds less than ``1e-13`` of the running total.
    The first panel is integrated in ``u = sqrt(s)``.
    """
    if not isinstance(model, GppModel):
        raise DomainError("expected a GppModel")
    if not isinstance(cfg, SinrConfig):
        raise DomainError("expected a SinrConfig")
    imax, kmax = int(imax), int(kmax)
    if imax < 1 or kmax < 1 or kmax < imax:
        raise DomainError("need 1 <= imax <= kmax")
    used = {"k": 0, "i": 0}

    def f(s):
        log_m, log_s, k_used, i_used = log_product_and_series(model, cfg, s, kmax, imax, form, tail)
        used["k"] = max(used["k"], k_used)
        used["i"] = max(used["i"], i_used)
        noise = cfg.mu * cfg.theta * cfg.sigma2 * (s / model.ratio) ** (cfg.alpha / 2.0)
        return model.beta * math.exp(-s - noise + log_m + log_s)

    # the integrand has a weak singularity at s = 0, removed by s = u^2
    width = 4.0 / model.beta
    total, err = integrate.quad(lambda u: 2.0 * u * f(u * u), 0.0, math.sqrt(width),
                                epsabs=1e-11, epsrel=1e-8, limit=100)
    lo = width
    for _ in range(200):
        hi = lo + width
        val, e = integrate.quad(f, lo, hi, epsabs=1e-11, epsrel=1e-8, limit=100)
        total += val
        err += e
        lo = hi
        if val <= 1e-13 * max(total, 1e-300) and f(hi) <= 1e-13 * max(total, 1e-300) / width:
            break
    prob = min(max(total, 0.0), 1.0)
    return CoverageResult(prob, used["i"], used["k"], err)


def coverage_curve(model, cfg, theta_grid_db, imax=128, kmax=256, form="exact"):
    """``[(theta_db, probability), ...]`` for a strictly increasing dB grid."""
    grid = [float(t) for t in theta_grid_db]
    if not grid:
        raise DomainError("theta grid must be nonempty")
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise DomainError("theta grid must be strictly increasing")
    out = []
    for t in grid:
        res = coverage_probability(model, cfg.with_theta(float(db_to_linear(t))), imax, kmax, form)
        out.append((t, res.probability))
    return out


def ppp_coverage_probability(theta, alpha):
    """Interference-limited coverage for Poisson base stations.

    ``1 / (1 + rho)`` with ``rho = theta^(2/alpha) int_{theta^(-2/alpha)}^inf
    du / (1 + u^(alpha/2))``.
    """
    theta, alpha = float(theta), float(alpha)
    if theta <= 0 or alpha <= 2:
        raise DomainError("need theta > 0 and alpha > 2")
    t = theta ** (2.0 / alpha)
    val = integrate.quad(lambda u: 1.0 / (1.0 + u ** (alpha / 2.0)), 1.0 / t, np.inf,
                         epsabs=1e-14, epsrel=1e-12)[0]
    return 1.0 / (1.0 + t * val)
