"""Monte Carlo estimators for interference, coverage and spatial statistics.

Interference and coverage are simulated with the radial representation:
each replication draws ``Q_k ~ gamma(k, beta/c)`` for ``k <= K``, keeps each
with probability ``beta`` and attaches exponential fading.  Points with
index ``k > K`` are independent of the simulated ones.  Their contribution
is added analytically: the far-field mean and variance are one-dimensional
integrals against ``c P(K, (c/beta) q)``, the summed density of the dropped
squared moduli.  With ``far_field=False`` the far field is ignored instead,
and the call fails if it could matter at the ``1e-6`` level.

Spatial estimators use minus sampling: centres (or test locations) come
from the central half-window while neighbours are searched in the full
window.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from .errors import DomainError
from .interference import PathLoss
from .pointproc import GppModel
from .rng import check_seed, map_chunks, stream
from .samplers import radial_batch
from .specfun import reg_lower_gamma, reg_lower_gamma_seq, reg_upper_gamma

__all__ = [
    "EstimatorReport",
    "EmpiricalCurve",
    "default_interference_kmax",
    "default_coverage_kmax",
    "far_field_mean",
    "far_field_variance",
    "interference_samples",
    "mc_interference",
    "sinr_samples",
    "mc_coverage",
    "density_histogram",
    "empirical_k",
    "empirical_fgj",
]

CHUNK = 50_000
CHUNK_CELLS = 8_000_000
FAR_FIELD_TOL = 1e-6


@dataclass(frozen=True)
class EstimatorReport:
    estimate: float
    std_error: float
    replications: int
    seed: int

    def __post_init__(self):
        if self.replications < 2:
            raise DomainError("an estimator needs at least 2 replications")
        if not self.std_error >= 0:
            raise DomainError("std_error must be nonnegative")

    def to_dict(self):
        return {"estimate": self.estimate, "std_error": self.std_error,
                "replications": self.replications, "seed": self.seed}


@dataclass(frozen=True)
class EmpiricalCurve:
    grid: np.ndarray
    values: np.ndarray
    std_errors: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        errs = np.asarray(self.std_errors, dtype=float)
        if not (grid.shape == values.shape == errs.shape) or grid.ndim != 1:
            raise DomainError("grid, values and std_errors must be 1-D and equally long")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly ascending")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "std_errors", errs)

    def to_csv(self, dest=None):
        lines = ["r,value,std_error"]
        lines += [f"{r:.10g},{v:.10g},{e:.10g}" for r, v, e in
                  zip(self.grid, self.values, self.std_errors)]
        text = "\n".join(lines) + "\n"
        if dest is not None:
            with open(dest, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
        return text


def _chunk_rows(kmax):
    """Replications per chunk: at most ``CHUNK`` and about ``CHUNK_CELLS`` matrix cells."""
    return max(1000, min(CHUNK, CHUNK_CELLS // int(kmax)))


def default_interference_kmax(model, pl):
    """``max(64, ceil(2 x0 + 8 sqrt(x0) + 16))`` with ``x0 = (c/beta) r0^2``."""
    x0 = model.ratio * pl.r0**2
    return max(64, int(math.ceil(2.0 * x0 + 8.0 * math.sqrt(x0) + 16.0)))


def default_coverage_kmax(model):
    """``max(256, ceil(20 / beta))``: the nearest kept point is almost surely simulated."""
    return max(256, int(math.ceil(20.0 / model.beta)))


def _far_integral(model, pl, kmax, power):
    """``c int_0^inf l(sqrt q)^power P(K, (c/beta) q) dq``."""
    b = model.ratio
    a = 0.5 * pl.alpha * power
    if a <= 1:
        raise DomainError("far-field integral diverges for alpha * power <= 2")
    if pl.r0 == 0 and kmax <= a - 1:
        raise DomainError("kmax too small for an unbounded path loss")
    v0 = b * pl.r0**2
    vstar = max(kmax + 12.0 * math.sqrt(kmax) + 50.0, v0)

    def f(v):
        return max(v0, v) ** -a * reg_lower_gamma(kmax, v)

    pts = sorted({p for p in (v0, float(kmax)) if 0 < p < vstar})
    val = integrate.quad(f, 0.0, vstar, points=pts or None, epsabs=0.0, epsrel=1e-11,
                         limit=400)[0]
    val += vstar ** (1.0 - a) / (a - 1.0)
    # c dq = beta dv and l(sqrt q)^power = b^a max(v0, v)^-a
    return model.beta * b**a * val


def far_field_mean(model, pl, kmax):
    """Mean interference from the points with index ``k > kmax``."""
    return _far_integral(model, pl, int(kmax), 1)


def _mean_term(model, pl, k):
    """``E l(sqrt Q_k)`` for ``Q_k ~ gamma(k, beta/c)``."""
    a = pl.alpha / 2.0
    x = model.ratio * pl.r0**2
    if k <= a:
        raise DomainError("mean term undefined for k <= alpha/2")
    near = pl.r0**-pl.alpha * reg_lower_gamma(k, x) if x > 0 else 0.0
    ratio = math.exp(math.lgamma(k - a) - math.lgamma(k))
    far = ratio * (reg_upper_gamma(k - a, x) if x > 0 else 1.0)
    return near + model.ratio**a * far


def far_field_variance(model, pl, kmax, extra=4000):
    """Variance of the interference from the points with index ``k > kmax``.

    ``2 c int l^2 P(K, (c/beta) q) dq - beta^2 sum_{k>K} (E l(sqrt Q_k))^2``;
    the sum is evaluated exactly for ``extra`` terms and its remainder with
    the asymptotic ``Gamma(k-a)/Gamma(k) ~ (k - (a+1)/2)^(-a)``.
    """
    kmax = int(kmax)
    first = 2.0 * _far_integral(model, pl, kmax, 2)
    a = pl.alpha / 2.0
    ks = range(kmax + 1, kmax + extra + 1)
    s = sum(_mean_term(model, pl, k) ** 2 for k in ks)
    edge = kmax + extra + 0.5 - 0.5 * (a + 1.0)
    s += model.ratio ** (2 * a) * edge ** (1.0 - 2.0 * a) / (2.0 * a - 1.0)
    return first - model.beta**2 * s


def _check_reps(reps, minimum):
    reps = int(reps)
    if reps < minimum:
        raise DomainError(f"at least {minimum} replications are required, got {reps}")
    return reps


def interference_samples(model, pl, reps, seed, palm=True, kmax=None, threads=1, mu=1.0):
    """Simulated interference from the points ``k <= kmax`` (no far field)."""
    if kmax is None:
        kmax = default_interference_kmax(model, pl)
    kmax = int(kmax)
    r02 = pl.r0**2
    half_alpha = pl.alpha / 2.0

    def chunk(rng, size, _index):
        q, kept = radial_batch(rng, model, kmax, size)
        if palm:
            kept[:, 0] = False
        if model.beta == 1.0:
            gain = np.maximum(q, r02) ** -half_alpha
            gain[:, 0] *= kept[:, 0]
            h = rng.standard_exponential(size=q.shape) / mu
            return np.einsum("ij,ij->i", h, gain)
        rows = np.nonzero(kept)[0]
        h = rng.standard_exponential(size=len(rows)) / mu
        gain = np.maximum(q[kept], r02) ** -half_alpha
        return np.bincount(rows, weights=h * gain, minlength=size)

    parts = map_chunks(chunk, reps, _chunk_rows(kmax), seed, key=(1,), threads=threads)
    return np.concatenate(parts)


def density_histogram(samples, bins="fd", value_range=None):
    """Normalized histogram as an :class:`EmpiricalCurve` of bin centres.

    Default bins follow the Freedman-Diaconis rule over ``[0, max]``; the
    density integrates to one over that range.
    """
    samples = np.asarray(samples, dtype=float)
    if value_range is None:
        value_range = (0.0, float(samples.max()))
    edges = np.histogram_bin_edges(samples, bins=bins, range=value_range)
    counts, edges = np.histogram(samples, bins=edges)
    width = np.diff(edges)
    total = counts.sum()
    dens = counts / (total * width)
    errs = np.sqrt(counts) / (total * width)
    centres = 0.5 * (edges[:-1] + edges[1:])
    meta = {"bins": bins if isinstance(bins, str) else int(len(width)),
            "bin_rule": "freedman-diaconis" if bins == "fd" else str(bins),
            "edges": edges.tolist(), "samples": int(total)}
    return EmpiricalCurve(centres, dens, errs, meta)


def mc_interference(model, pl, palm=True, reps=10**6, seed=0, kmax=None, far_field=True,
                    threads=1, bins="fd", hist_range=None):
    """Monte Carlo mean, variance and histogram of the interference.

    Returns ``(mean_report, variance_report, histogram)``.  The standard
    error of the variance uses the sample fourth central moment.  The
    histogram is that of the simulated near field shifted by the far-field
    mean (the far field has negligible spread).
    """
    if not isinstance(model, GppModel) or not isinstance(pl, PathLoss):
        raise DomainError("expected a GppModel and a PathLoss")
    if pl.alpha <= 2 or pl.r0 <= 0:
        raise DomainError("interference simulation needs alpha > 2 and r0 > 0")
    reps = _check_reps(reps, 100)
    seed = check_seed(seed)
    if kmax is None:
        kmax = default_interference_kmax(model, pl)
    far_mean = far_field_mean(model, pl, kmax)
    samples = interference_samples(model, pl, reps, seed, palm, kmax, threads)
    near_mean = float(np.mean(samples))
    if far_field:
        far_var = far_field_variance(model, pl, kmax)
    else:
        if far_mean > FAR_FIELD_TOL * near_mean:
            raise DomainError(
                f"kmax={kmax} leaves a far-field mean of {far_mean:.3e}, above "
                f"{FAR_FIELD_TOL:g} of the mean; raise kmax or enable far_field")
        far_mean = far_var = 0.0
    centred = samples - near_mean
    m2 = float(np.mean(centred**2))
    m4 = float(np.mean(centred**4))
    n = len(samples)
    var_near = m2 * n / (n - 1)
    mean_rep = EstimatorReport(near_mean + far_mean, math.sqrt(var_near / n), n, seed)
    var_rep = EstimatorReport(var_near + far_var, math.sqrt(max(m4 - m2 * m2, 0.0) / n), n, seed)
    hist = density_histogram(samples + far_mean, bins=bins, value_range=hist_range)
    hist.meta.update({"kmax": kmax, "far_field_mean": far_mean, "palm": palm})
    return mean_rep, var_rep, hist


def sinr_samples(model, cfg, reps, seed, kmax=None, far_field=True, threads=1):
    """SINR of the typical user served by its nearest point (unbounded path loss)."""
    if kmax is None:
        kmax = default_coverage_kmax(model)
    kmax = int(kmax)
    pl = PathLoss(0.0, cfg.alpha)
    far = far_field_mean(model, pl, kmax) / cfg.mu if far_field else 0.0
    half_alpha = cfg.alpha / 2.0

    def chunk(rng, size, _index):
        q, kept = radial_batch(rng, model, kmax, size)
        serving = np.argmin(q, axis=1)
        rows = np.arange(size)
        q_serv = q[rows, serving]
        power = np.zeros(q.shape)
        power[kept] = rng.exponential(1.0 / cfg.mu, size=int(kept.sum())) * q[kept] ** -half_alpha
        signal = power[rows, serving]
        interf = power.sum(axis=1) - signal
        with np.errstate(divide="ignore", invalid="ignore"):
            sinr = signal / (cfg.sigma2 + interf + far)
        # no kept point among the simulated ones: no service
        return np.where(np.isfinite(q_serv), sinr, 0.0)

    return np.concatenate(map_chunks(chunk, reps, _chunk_rows(kmax), seed, key=(2,), threads=threads))


def mc_coverage(model, cfg, reps=10**5, seed=0, thetas=None, kmax=None, far_field=True,
                threads=1):
    """Fraction of replications with SINR above the threshold.

    ``thetas`` (linear) evaluates several thresholds on the same draws;
    the result is then a list of reports, otherwise a single report.
    """
    if not isinstance(model, GppModel):
        raise DomainError("expected a GppModel")
    reps = _check_reps(reps, 1000)
    seed = check_seed(seed)
    sinr = sinr_samples(model, cfg, reps, seed, kmax, far_field, threads)
    grid = [cfg.theta] if thetas is None else [float(t) for t in np.atleast_1d(thetas)]
    out = []
    for theta in grid:
        p = float(np.mean(sinr > theta))
        out.append(EstimatorReport(p, math.sqrt(p * (1.0 - p) / reps), reps, seed))
    return out[0] if thetas is None else out


def _grid(r_grid):
    r = np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or len(r) == 0 or np.any(r < 0) or np.any(np.diff(r) <= 0):
        raise DomainError("r_grid must be nonempty, nonnegative and strictly ascending")
    return r


def _central(sample):
    if len(sample.points) < 2:
        raise DomainError("at least 2 points are required")
    inner = sample.window.central()
    mask = inner.contains(sample.points)
    if not np.any(mask):
        raise DomainError("no points in the central half-window")
    return inner, mask


def empirical_k(sample, r_grid):
    """Minus-sampling estimate of Ripley's K.

    ``K(r) = mean over central points of #{neighbours within r} / lambda``
    with ``lambda = N / |W|``.
    """
    r = _grid(r_grid)
    _inner, mask = _central(sample)
    pts = sample.points
    lam = len(pts) / sample.window.area
    tree = cKDTree(pts)
    centres = pts[mask]
    counts = np.empty((len(centres), len(r)))
    for j, rr in enumerate(r):
        counts[:, j] = tree.query_ball_point(centres, rr, return_length=True) - 1
    values = counts.mean(axis=0) / lam
    if len(centres) > 1:
        errs = counts.std(axis=0, ddof=1) / math.sqrt(len(centres)) / lam
    else:
        errs = np.zeros_like(values)
    return EmpiricalCurve(r, values, errs, {"centres": int(len(centres)), "intensity": lam})


def empirical_fgj(sample, r_grid, seed=0, locations=100_000):
    """Empirical ``F``, ``G`` and ``J = (1 - G)/(1 - F)``.

    ``F`` uses ``locations`` uniform test points in the central half-window;
    ``G`` the nearest-neighbour distances of points in the central
    half-window.  ``J`` is reported only where ``F < 0.9`` (``nan``
    elsewhere).
    """
    r = _grid(r_grid)
    inner, mask = _central(sample)
    pts = sample.points
    tree = cKDTree(pts)
    test = inner.sample_uniform(stream(seed, 3), locations)
    d_empty, _ = tree.query(test, k=1)
    d_nn, _ = tree.query(pts[mask], k=2)
    d_nn = d_nn[:, 1]
    f = np.searchsorted(np.sort(d_empty), r, side="right") / len(d_empty)
    g = np.searchsorted(np.sort(d_nn), r, side="right") / len(d_nn)
    f_se = np.sqrt(f * (1 - f) / len(d_empty))
    g_se = np.sqrt(g * (1 - g) / len(d_nn))
    valid = f < 0.9
    with np.errstate(divide="ignore", invalid="ignore"):
        j = np.where(valid, (1 - g) / (1 - f), np.nan)
        j_se = np.where(valid, np.sqrt((g_se / (1 - f)) ** 2 + ((1 - g) * f_se / (1 - f) ** 2) ** 2),
                        np.nan)
    meta = {"locations": int(locations), "centres": int(mask.sum())}
    return (EmpiricalCurve(r, f, f_se, dict(meta)), EmpiricalCurve(r, g, g_se, dict(meta)),
            EmpiricalCurve(r, j, j_se, dict(meta)))
