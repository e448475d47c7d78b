"""Fitting the retention parameter beta to a deployment of base stations.

A metric curve ``M_e`` (empirical J or L function, or empirical coverage)
is computed from the data and compared with the model curve ``M_beta`` of a
beta-GPP with the same intensity.  The fitted value minimizes

    E(beta) = int_a^b (M_e(t) - M_beta(t))^2 dt

over a grid of beta values; the integral is a trapezoid sum on the shared
grid of ``t`` values.  Spatial estimators use only centres or test
locations in the central half-window.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .coverage import SinrConfig, db_to_linear
from .errors import DomainError, FitError, LoadError
from .montecarlo import empirical_fgj, empirical_k, mc_coverage
from .pointproc import GppModel, j_function, l_function
from .rng import check_seed, map_chunks
from .samplers import PlanarSample
from .windows import DiskWindow, RectWindow, window_from_dict

__all__ = [
    "METRICS",
    "Deployment",
    "FitConfig",
    "FitResult",
    "load_region",
    "load_deployment",
    "estimate_density",
    "default_beta_grid",
    "empirical_metric",
    "model_metric",
    "exit_distance_integral",
    "empirical_coverage",
    "fit_beta",
]

METRICS = ("L", "J", "Coverage")
LOCATION_CHUNK = 2000


@dataclass(frozen=True)
class Deployment:
    """Base-station coordinates (metres) in an observation region.

    Data files come with rectangular regions; synthetic deployments may use
    a disk.  ``rejected`` counts input rows that fell outside the region.
    """

    points: np.ndarray
    region: object
    operator_label: str = ""
    rejected: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if not isinstance(self.region, (RectWindow, DiskWindow)):
            raise DomainError("region must be a RectWindow or DiskWindow")
        if len(pts) and not np.all(self.region.contains(pts)):
            raise DomainError("all points must lie inside the region")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def as_sample(self):
        return PlanarSample(self.points, self.region, "DATA", {"label": self.operator_label})


@dataclass
class FitConfig:
    """Settings of :func:`fit_beta`.

    ``t_range`` overrides the integration range ``(a, b)``: metres for J
    and L, dB for coverage.  By default J uses ``[0, r_0.9]`` where the
    empirical empty-space function reaches 0.9, L uses ``[0, 3/sqrt(lambda)]``
    clipped to half of :func:`_inner_size`, and
    coverage uses ``theta_db``.
    """

    t_range: tuple = None
    points: int = 64
    locations: int = 100_000
    alpha: float = 4.0
    sigma2: float = 0.0
    mu: float = 1.0
    theta_db: tuple = tuple(range(-10, 21))
    mc_reps: int = 100_000
    far_field: bool = True
    threads: int = 1


@dataclass
class FitResult:
    beta_hat: float
    metric: str
    error: float
    beta_grid: list
    error_curve: list
    estimated_intensity: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.beta_grid) != len(self.error_curve):
            raise DomainError("error_curve must match beta_grid")

    def to_dict(self):
        return {
            "beta_hat": self.beta_hat,
            "metric": self.metric,
            "error": self.error,
            "error_curve": [[b, e] for b, e in zip(self.beta_grid, self.error_curve)],
            "estimated_intensity": self.estimated_intensity,
            "meta": self.meta,
        }

    def to_json(self, dest=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if dest is not None:
            with open(dest, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
        return text

    def curve_csv(self, dest=None):
        lines = ["beta,error"] + [f"{b:.10g},{e:.10g}" for b, e in
                                  zip(self.beta_grid, self.error_curve)]
        text = "\n".join(lines) + "\n"
        if dest is not None:
            with open(dest, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
        return text


def _region_from_mapping(d, source):
    try:
        region = window_from_dict({**d, "shape": "rect"})
    except KeyError as exc:
        raise LoadError(f"{source}: region is missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError, DomainError) as exc:
        raise LoadError(f"{source}: invalid region ({exc})") from None
    return region, str(d.get("label", ""))


def load_region(path):
    """``(RectWindow, label)`` from a JSON file with xmin, ymin, xmax, ymax, label."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise LoadError(f"cannot read region file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise LoadError(f"{path}: region must be a JSON object")
    return _region_from_mapping(data, path)


def load_deployment(path, region, label=None):
    """Read ``x,y`` rows (metres) and keep those inside ``region``.

    ``region`` is a :class:`RectWindow`, a mapping with the region keys or
    the path of a region JSON file.  A header row is recognised when its
    first field is not a number.  Malformed rows raise :class:`LoadError`
    naming the line.
    """
    region_label = ""
    if isinstance(region, RectWindow):
        window = region
    elif isinstance(region, dict):
        window, region_label = _region_from_mapping(region, "region")
    else:
        window, region_label = load_region(region)
    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, rec in enumerate(csv.reader(fh), start=1):
                if not rec or all(not f.strip() for f in rec):
                    continue
                if lineno == 1 and not _is_number(rec[0]):
                    continue
                if len(rec) != 2:
                    raise LoadError(f"{path}: line {lineno}: expected 2 fields, got {len(rec)}")
                try:
                    x, y = float(rec[0]), float(rec[1])
                except ValueError:
                    raise LoadError(f"{path}: line {lineno}: cannot parse {','.join(rec)!r}") from None
                if not (math.isfinite(x) and math.isfinite(y)):
                    raise LoadError(f"{path}: line {lineno}: coordinates must be finite")
                rows.append((x, y))
    except LoadError:
        raise
    except OSError as exc:
        raise LoadError(f"cannot read deployment file {path}: {exc.strerror}") from None
    if not rows:
        raise LoadError(f"{path}: no coordinates found")
    pts = np.array(rows, dtype=float)
    inside = window.contains(pts)
    if not np.any(inside):
        raise LoadError(f"{path}: all {len(pts)} points lie outside the region")
    return Deployment(pts[inside], window, label if label is not None else region_label,
                      int(np.sum(~inside)))


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def estimate_density(dep):
    """Points per unit area; the matching GPP has ``c = pi * density``."""
    if len(dep) < 1:
        raise DomainError("at least one point is required")
    return len(dep) / dep.region.area


def default_beta_grid(step=0.025):
    """``step, 2 step, ..., 1``."""
    n = int(round(1.0 / step))
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise DomainError("step must divide 1")
    return [round((i + 1) * step, 12) for i in range(n)]


def exit_distance_integral(window, locations, alpha, angles=512):
    """``int_{R^2 minus W} |y - x|^-alpha dy`` for each location ``x`` in ``W``.

    In polar coordinates about ``x`` the integral is
    ``int_0^{2 pi} rho(phi)^(2-alpha) / (alpha - 2) dphi``, where
    ``rho(phi)`` is the distance to the boundary along direction ``phi``;
    the angle integral uses the midpoint rule.
    """
    if alpha <= 2:
        raise DomainError("alpha must exceed 2")
    x = np.atleast_2d(np.asarray(locations, dtype=float))
    phi = (np.arange(angles) + 0.5) * (2.0 * math.pi / angles)
    cx, sy = np.cos(phi), np.sin(phi)
    with np.errstate(divide="ignore"):
        tx = np.where(cx > 0, (window.xmax - x[:, :1]) / cx, (window.xmin - x[:, :1]) / cx)
        ty = np.where(sy > 0, (window.ymax - x[:, 1:]) / sy, (window.ymin - x[:, 1:]) / sy)
    rho = np.minimum(np.abs(tx), np.abs(ty))
    return np.sum(rho ** (2.0 - alpha), axis=1) * (2.0 * math.pi / angles) / (alpha - 2.0)


def empirical_coverage(dep, thetas, cfg, seed=0, threads=1):
    """Coverage of users placed uniformly in the central half-window.

    Each user is served by its nearest base station; every other station in
    the region interferes with unit-mean exponential fading scaled by
    ``1/mu``.  With ``cfg.far_field`` the mean interference of Poisson
    stations outside the region, at the deployment's intensity, is added to
    the denominator.
    """
    pts = dep.points
    if not isinstance(dep.region, RectWindow):
        raise DomainError("the coverage metric needs a rectangular region")
    if len(pts) < 2:
        raise FitError("coverage needs at least 2 base stations")
    inner = dep.region.central()
    lam = estimate_density(dep)
    thetas = np.asarray(thetas, dtype=float)
    half = cfg.alpha / 2.0

    def chunk(rng, size, _index):
        users = inner.sample_uniform(rng, size)
        d2 = ((users[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        power = rng.exponential(1.0 / cfg.mu, size=d2.shape) * d2 ** -half
        serving = np.argmin(d2, axis=1)
        rows = np.arange(size)
        signal = power[rows, serving]
        interf = power.sum(axis=1) - signal
        if cfg.far_field:
            interf = interf + lam / cfg.mu * exit_distance_integral(dep.region, users, cfg.alpha)
        sinr = signal / (cfg.sigma2 + interf)
        return (sinr[:, None] > thetas[None, :]).sum(axis=0)

    counts = np.sum(map_chunks(chunk, cfg.locations, LOCATION_CHUNK, seed, key=(4,),
                               threads=threads), axis=0)
    return counts / cfg.locations


def _inner_size(region):
    """Half the shorter side (or the radius) of the central window."""
    inner = region.central()
    if isinstance(inner, DiskWindow):
        return inner.radius
    return 0.5 * min(inner.width, inner.height)


def _j_grid(dep, cfg, seed):
    if cfg.t_range is not None:
        return np.linspace(cfg.t_range[0], cfg.t_range[1], cfg.points)
    rmax = _inner_size(dep.region)
    probe = np.linspace(0.0, rmax, 400)
    f, _, _ = empirical_fgj(dep.as_sample(), probe, seed=seed, locations=cfg.locations)
    above = np.nonzero(f.values >= 0.9)[0]
    r09 = probe[above[0]] if len(above) else rmax
    return np.linspace(0.0, r09, cfg.points)


def _l_grid(dep, cfg):
    if cfg.t_range is not None:
        return np.linspace(cfg.t_range[0], cfg.t_range[1], cfg.points)
    top = min(3.0 / math.sqrt(estimate_density(dep)), 0.5 * _inner_size(dep.region))
    return np.linspace(0.0, top, cfg.points)


def empirical_metric(dep, metric, cfg, seed=0):
    """``(t_grid, values)`` of the empirical curve; ``nan`` marks unusable points."""
    if metric == "J":
        grid = _j_grid(dep, cfg, seed)
        _, _, j = empirical_fgj(dep.as_sample(), grid, seed=seed, locations=cfg.locations)
        return grid, j.values
    if metric == "L":
        grid = _l_grid(dep, cfg)
        k = empirical_k(dep.as_sample(), grid)
        return grid, np.sqrt(k.values / math.pi)
    if metric == "Coverage":
        grid = np.asarray(cfg.theta_db, dtype=float)
        return grid, empirical_coverage(dep, db_to_linear(grid), cfg, seed, cfg.threads)
    raise DomainError(f"unknown metric {metric!r}; expected one of {METRICS}")


def model_metric(model, metric, grid, cfg, seed=0):
    """Model curve on ``grid``: closed forms for J and L, radial Monte Carlo for coverage."""
    grid = np.asarray(grid, dtype=float)
    if metric == "J":
        return np.asarray(j_function(model, grid), dtype=float)
    if metric == "L":
        return np.asarray(l_function(model, grid), dtype=float)
    if metric == "Coverage":
        sinr = SinrConfig(1.0, cfg.sigma2, cfg.mu, cfg.alpha)
        reps = mc_coverage(model, sinr, reps=cfg.mc_reps, seed=seed, thetas=db_to_linear(grid),
                           far_field=cfg.far_field, threads=cfg.threads)
        return np.array([r.estimate for r in reps])
    raise DomainError(f"unknown metric {metric!r}; expected one of {METRICS}")


def fit_beta(dep, metric="J", beta_grid=None, config=None, seed=0):
    """Grid search for the beta minimizing the squared error between curves.

    Model curves for coverage share one seed across grid values (common
    random numbers).  Ties go to the smaller beta.
    """
    if metric not in METRICS:
        raise DomainError(f"unknown metric {metric!r}; expected one of {METRICS}")
    seed = check_seed(seed)
    cfg = config or FitConfig()
    grid_b = sorted(float(b) for b in (beta_grid if beta_grid is not None else default_beta_grid()))
    if not grid_b or any(not 0.0 < b <= 1.0 for b in grid_b):
        raise DomainError("beta_grid must be nonempty and inside (0, 1]")
    lam = estimate_density(dep)
    t, emp = empirical_metric(dep, metric, cfg, seed)
    valid = np.isfinite(emp)
    if np.count_nonzero(valid) < 3:
        raise FitError(f"the empirical {metric} curve has fewer than 3 usable points")
    t_ok = t[valid]
    errors = []
    for b in grid_b:
        model = GppModel.from_intensity(b, lam)
        diff = emp[valid] - model_metric(model, metric, t_ok, cfg, seed)
        errors.append(float(trapezoid(diff * diff, t_ok)))
    best = int(np.argmin(errors))
    meta = {"t_grid": t_ok.tolist(), "empirical": emp[valid].tolist(), "points": len(dep),
            "rejected": dep.rejected, "label": dep.operator_label, "seed": seed}
    return FitResult(grid_b[best], metric, errors[best], grid_b, errors, lam, meta)
