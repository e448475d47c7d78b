"""Moment-matched approximations of the interference distribution.

Three two-parameter families are matched to a mean ``m`` and variance ``v``:

* gamma, shape ``k`` and scale ``a``: mean ``k a``, variance ``k a^2``;
* inverse Gaussian, mean ``nu`` and shape ``kappa``: variance ``nu^3/kappa``;
* inverse gamma, shape ``a`` and scale ``nu``: mean ``nu/(a-1)``, variance
  ``nu^2/((a-1)^2 (a-2))``.

The inverse Gaussian density vanishes faster than any power at the origin;
the inverse gamma density has a power tail ``x^-(a+1)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import log_gamma

__all__ = ["FAMILIES", "FittedDensity", "fit_by_moments", "moments", "pdf", "fit_score",
           "rank_families"]

FAMILIES = ("Gamma", "InverseGaussian", "InverseGamma")
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class FittedDensity:
    """A family name with its parameters and the moments it was matched to.

    ``params`` maps ``k, a`` (gamma), ``nu, kappa`` (inverse Gaussian) or
    ``a, nu`` (inverse gamma) to positive values.
    """

    family: str
    params: dict
    source_mean: float
    source_variance: float

    def to_dict(self):
        return {"family": self.family, "params": dict(self.params),
                "source_mean": self.source_mean, "source_variance": self.source_variance}


def _positive(name, x):
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise DomainError(f"{name} must be positive and finite")
    return x


def fit_by_moments(mean, variance, family):
    mean = _positive("mean", mean)
    variance = _positive("variance", variance)
    if family == "Gamma":
        params = {"k": mean * mean / variance, "a": variance / mean}
    elif family == "InverseGaussian":
        params = {"nu": mean, "kappa": mean**3 / variance}
    elif family == "InverseGamma":
        a = mean * mean / variance + 2.0
        params = {"a": a, "nu": mean * (a - 1.0)}
    else:
        raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")
    return FittedDensity(family, params, mean, variance)


def moments(density):
    """Analytic ``(mean, variance)`` implied by the parameters."""
    p = density.params
    if density.family == "Gamma":
        return p["k"] * p["a"], p["k"] * p["a"] ** 2
    if density.family == "InverseGaussian":
        return p["nu"], p["nu"] ** 3 / p["kappa"]
    if density.family == "InverseGamma":
        a, nu = p["a"], p["nu"]
        return nu / (a - 1.0), nu * nu / ((a - 1.0) ** 2 * (a - 2.0))
    raise DomainError(f"unknown family {density.family!r}")


def _log_pdf(density, x):
    p = density.params
    if density.family == "Gamma":
        k, a = p["k"], p["a"]
        return (k - 1.0) * np.log(x) - x / a - k * math.log(a) - log_gamma(k)
    if density.family == "InverseGaussian":
        nu, kappa = p["nu"], p["kappa"]
        return (0.5 * (math.log(kappa) - math.log(2.0 * math.pi) - 3.0 * np.log(x))
                - kappa * (x - nu) ** 2 / (2.0 * nu * nu * x))
    if density.family == "InverseGamma":
        a, nu = p["a"], p["nu"]
        return a * math.log(nu) - log_gamma(a) - (a + 1.0) * np.log(x) - nu / x
    raise DomainError(f"unknown family {density.family!r}")


def pdf(density, x):
    """Density at ``x > 0`` (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)) or np.any(~np.isfinite(arr)):
        raise DomainError("x must be positive and finite")
    out = np.exp(_log_pdf(density, arr))
    return float(out) if out.ndim == 0 else out


def _pdf_nonneg(density, x):
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(_log_pdf(density, x[pos]))
    return out


def fit_score(density, histogram):
    """Integrated squared error between ``density`` and a normalized histogram.

    The histogram's bin edges are read from ``histogram.meta["edges"]``;
    without them, edges halfway between the bin centres are assumed.  Each
    bin contributes ``int_bin (pdf - h)^2``, computed with 8-point
    Gauss-Legendre on the bin.
    """
    centres = histogram.grid
    heights = histogram.values
    if "edges" in histogram.meta:
        edges = np.asarray(histogram.meta["edges"], dtype=float)
    else:
        mids = 0.5 * (centres[1:] + centres[:-1])
        first = centres[0] - (mids[0] - centres[0]) if len(mids) else centres[0] - 0.5
        last = centres[-1] + (centres[-1] - mids[-1]) if len(mids) else centres[0] + 0.5
        edges = np.concatenate(([max(first, 0.0)], mids, [last]))
    if len(edges) != len(heights) + 1:
        raise DomainError("histogram edges do not match its bins")
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = mid[:, None] + half[:, None] * _GL_X[None, :]
    f = _pdf_nonneg(density, x)
    err = (f - heights[:, None]) ** 2
    return float(np.sum(half * (err @ _GL_W)))


def rank_families(mean, variance, histogram, families=FAMILIES):
    """``[(family, score), ...]`` sorted from best (lowest score) to worst."""
    scores = [(fam, fit_score(fit_by_moments(mean, variance, fam), histogram))
              for fam in families]
    return sorted(scores, key=lambda t: t[1])
