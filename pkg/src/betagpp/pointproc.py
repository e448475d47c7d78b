"""Model parameters and closed-form spatial statistics of the beta-Ginibre process.

The scaled beta-GPP has parameters ``beta`` in (0, 1] and ``c > 0`` and
intensity ``c / pi``.  Most statistics depend on distance only through
``(c / beta) r^2``; the helper :meth:`GppModel.ratio` returns ``c / beta``.
Matern hard-core processes of type I and II are included as comparison
models.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError
from .specfun import reg_lower_gamma_seq, reg_upper_gamma_seq

__all__ = [
    "GppModel",
    "MhcpModel",
    "second_moment_density",
    "pair_correlation",
    "third_moment_density",
    "kernel_determinant",
    "k_function",
    "l_function",
    "l_tilde",
    "default_kmax",
    "empty_space_f",
    "nearest_neighbor_g",
    "product_truncation_bound",
    "j_function",
    "mhcp_union_area",
    "mhcp_retention",
    "mhcp_k_function",
]


@dataclass(frozen=True)
class GppModel:
    """Scaled beta-GPP with retention probability ``beta`` and scale ``c``."""

    beta: float
    c: float

    def __post_init__(self):
        b, c = float(self.beta), float(self.c)
        if not (math.isfinite(b) and 0.0 < b <= 1.0):
            raise DomainError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not (math.isfinite(c) and c > 0.0):
            raise DomainError(f"c must be positive and finite, got {self.c!r}")
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "c", c)

    @property
    def intensity(self):
        return self.c / math.pi

    @property
    def ratio(self):
        """``c / beta``, the rate of the gamma-distributed squared moduli."""
        return self.c / self.beta

    @classmethod
    def from_intensity(cls, beta, intensity):
        return cls(beta, math.pi * intensity)


@dataclass(frozen=True)
class MhcpModel:
    """Matern hard-core process built from a PPP of intensity ``lambda_p``."""

    lambda_p: float
    delta: float
    variant: str = "I"

    def __post_init__(self):
        if not (math.isfinite(self.lambda_p) and self.lambda_p > 0):
            raise DomainError(f"lambda_p must be positive, got {self.lambda_p!r}")
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise DomainError(f"delta must be positive, got {self.delta!r}")
        variant = str(self.variant).upper()
        if variant not in ("I", "II"):
            raise DomainError(f"variant must be 'I' or 'II', got {self.variant!r}")
        object.__setattr__(self, "lambda_p", float(self.lambda_p))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "variant", variant)

    @property
    def core_area(self):
        return math.pi * self.delta**2

    @property
    def intensity(self):
        a = self.core_area
        if self.variant == "I":
            return self.lambda_p * math.exp(-self.lambda_p * a)
        return -math.expm1(-self.lambda_p * a) / a

    @classmethod
    def matched(cls, intensity, delta, variant="I"):
        """Model whose retained intensity equals ``intensity``.

        Type I uses the branch with ``lambda_p pi delta^2 < 1``, where the
        retained intensity is increasing in ``lambda_p``.
        """
        a = math.pi * delta**2
        variant = str(variant).upper()
        if variant == "I":
            top = 1.0 / (math.e * a)
            if not 0 < intensity <= top:
                raise DomainError(f"type I intensity must lie in (0, {top:.6g}] for delta={delta}")
            if intensity == top:
                return cls(1.0 / a, delta, "I")
            lp = optimize.brentq(lambda x: x * math.exp(-x * a) - intensity, 0.0, 1.0 / a,
                                 xtol=1e-15, rtol=1e-15)
            return cls(lp, delta, "I")
        if not 0 < intensity * a < 1:
            raise DomainError(f"type II intensity must lie in (0, {1 / a:.6g}) for delta={delta}")
        return cls(-math.log1p(-intensity * a) / a, delta, "II")


def _nonneg(name, r):
    arr = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be finite and nonnegative")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def second_moment_density(model, u):
    """``rho2(u) = (c/pi)^2 (1 - exp(-(c/beta) u^2))``."""
    u = _nonneg("u", u)
    return _out(model.intensity**2 * -np.expm1(-model.ratio * u * u))


def pair_correlation(model, u):
    """``g(u) = 1 - exp(-(c/beta) u^2)``."""
    u = _nonneg("u", u)
    return _out(-np.expm1(-model.ratio * u * u))


def third_moment_density(model, w1, w2):
    """Third moment density at the points ``0, w1, w2`` of the complex plane.

    The expression is assembled with complex exponentials.  Its imaginary
    part must cancel; a residue above ``1e-12`` of the term magnitudes
    signals a transcription error and raises.
    """
    w1 = complex(w1)
    w2 = complex(w2)
    b = model.ratio
    e1 = math.exp(-b * abs(w1) ** 2)
    e2 = math.exp(-b * abs(w2) ** 2)
    d12 = -b * abs(w1 - w2) ** 2
    # exponents combined before exponentiation to avoid overflow/underflow pairs
    t1 = cmath.exp(d12 - b * w1 * w2.conjugate())
    t2 = cmath.exp(d12 - b * w2 * w1.conjugate())
    total = 1.0 - e1 - e2 - (math.exp(d12) - t1 - t2)
    scale = 1.0 + e1 + e2 + math.exp(d12) + abs(t1) + abs(t2)
    if abs(total.imag) > 1e-12 * scale:
        raise ArithmeticError(f"third moment density has imaginary residue {total.imag:.3e}")
    return model.intensity**3 * total.real


def kernel_determinant(model, points):
    """Product density of order ``len(points)`` as a kernel determinant.

    Uses the Lebesgue-measure kernel
    ``(c/pi) exp(-(c/2beta)(|x|^2+|y|^2) + (c/beta) x conj(y))``.
    """
    z = np.asarray(points, dtype=complex)
    b = model.ratio
    mod2 = np.abs(z) ** 2
    expo = -0.5 * b * (mod2[:, None] + mod2[None, :]) + b * z[:, None] * np.conj(z)[None, :]
    kern = model.intensity * np.exp(expo)
    return float(np.linalg.det(kern).real)


def k_function(model, r):
    """Ripley K function ``pi r^2 - (beta pi / c)(1 - exp(-(c/beta) r^2))``."""
    r = _nonneg("r", r)
    return _out(math.pi * r * r + math.pi / model.ratio * np.expm1(-model.ratio * r * r))


def l_function(model, r):
    """``L(r) = sqrt(K(r) / pi)``."""
    return _out(np.sqrt(np.asarray(k_function(model, r)) / math.pi))


def l_tilde(model, r):
    """Modified L function ``L(r)/r - 1``, in (-1, 0)."""
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise DomainError("r must be positive for l_tilde")
    x = model.ratio * r * r
    # -expm1(-x)/x is (1 - e^-x)/x without cancellation
    return _out(np.sqrt(1.0 + np.expm1(-x) / x) - 1.0)


def default_kmax(model, r):
    """Default product truncation ``max(64, ceil(4 (c/beta) r^2))``."""
    return max(64, int(math.ceil(4.0 * model.ratio * float(r) ** 2)))


def _log_factors(model, x, kmax):
    """``log(1 - beta P(k, x))`` for ``k = 1 .. kmax``."""
    p = reg_lower_gamma_seq(kmax, x)
    q = reg_upper_gamma_seq(kmax, x)
    beta = model.beta
    # pick the representation of 1 - beta P that avoids cancellation
    comp = np.where(p > 0.5, (1.0 - beta) + beta * q, 1.0 - beta * p)
    with np.errstate(divide="ignore"):
        return np.log(comp)


def _product_complement(model, r, kmax, start):
    r = float(_nonneg("r", r))
    if kmax is None:
        kmax = default_kmax(model, r)
    kmax = int(kmax)
    if kmax < start:
        raise DomainError(f"kmax must be at least {start}")
    x = model.ratio * r * r
    if x == 0.0:
        return 1.0
    logs = _log_factors(model, x, kmax)[start - 1:]
    return math.exp(float(np.sum(logs)))


def empty_space_f(model, r, kmax=None):
    """Contact distribution ``F(r) = 1 - prod_{k>=1} (1 - beta P(k, (c/beta) r^2))``."""
    return 1.0 - _product_complement(model, r, kmax, 1)


def nearest_neighbor_g(model, r, kmax=None):
    """Nearest-neighbour distribution; the product of ``F`` without ``k = 1``."""
    return 1.0 - _product_complement(model, r, kmax, 2)


def product_truncation_bound(model, r, kmax=None):
    """Upper bound on the absolute error of ``F`` or ``G`` truncated at ``kmax``.

    The dropped factors satisfy ``prod_{k>K} (1 - beta P(k,x)) >= 1 - beta
    sum_{k>K} P(k,x)`` and ``sum_{k>K} P(k,x) <= e^-x x^(K+1)/(K+1)! /
    (1 - x/(K+2))^2`` when ``x < K + 2``.  Returns ``inf`` otherwise.
    """
    r = float(_nonneg("r", r))
    if kmax is None:
        kmax = default_kmax(model, r)
    x = model.ratio * r * r
    if x == 0.0:
        return 0.0
    big_k = int(kmax)
    if x >= big_k + 2:
        return math.inf
    log_lead = -x + (big_k + 1) * math.log(x) - math.lgamma(big_k + 2)
    return model.beta * math.exp(log_lead) / (1.0 - x / (big_k + 2)) ** 2


def j_function(model, r):
    """``J(r) = 1 / (1 - beta + beta exp(-(c/beta) r^2))``."""
    r = _nonneg("r", r)
    return _out(1.0 / (1.0 + model.beta * np.expm1(-model.ratio * r * r)))


def mhcp_union_area(delta, u):
    """Area of the union of two disks of radius ``delta`` at distance ``u``."""
    u = _nonneg("u", u)
    d2 = delta * delta
    uc = np.minimum(u, 2.0 * delta)
    area = (2.0 * math.pi * d2 - 2.0 * d2 * np.arccos(uc / (2.0 * delta))
            + uc * np.sqrt(np.maximum(d2 - uc * uc / 4.0, 0.0)))
    return _out(np.where(u > 2.0 * delta, 2.0 * math.pi * d2, area))


def mhcp_retention(model, u):
    """Probability that two parent points at distance ``u`` are both retained."""
    u = _nonneg("u", u)
    lp = model.lambda_p
    a = model.core_area
    v = np.asarray(mhcp_union_area(model.delta, u))
    if model.variant == "I":
        k = np.exp(-lp * v)
    else:
        num = 2.0 * v * -math.expm1(-lp * a) - 2.0 * a * -np.expm1(-lp * v)
        k = num / (lp * lp * a * v * (v - a))
        k = np.where(u > 2.0 * model.delta, (model.intensity / lp) ** 2, k)
    return _out(np.where(u < model.delta, 0.0, k))


def mhcp_k_function(model, r):
    """``K(r) = 2 pi (lambda_p / lambda)^2 int_0^r u k(u) du`` by quadrature.

    The retention kernel is constant beyond ``2 delta`` so that part is
    integrated exactly.
    """
    r = float(_nonneg("r", r))
    d = model.delta
    if r <= d:
        return 0.0
    scale = 2.0 * math.pi * (model.lambda_p / model.intensity) ** 2
    upper = min(r, 2.0 * d)
    val, _ = integrate.quad(lambda u: u * mhcp_retention(model, u), d, upper,
                            epsabs=1e-13, epsrel=1e-13, limit=200)
    if r > 2.0 * d:
        k_far = float(mhcp_retention(model, 3.0 * d))
        val += k_far * (r * r - 4.0 * d * d) / 2.0
    return scale * val
