"""Random generation of beta-GPP configurations and comparison processes.

Two exact constructions of the beta-GPP are provided.

* Radial: the squared moduli of the points are independent
  ``gamma(k, beta/c)`` variables ``Q_k``, each kept with probability
  ``beta``.  Conditioning on a point at the origin (reduced Palm version)
  amounts to dropping ``Q_1``.
* Planar: eigenvalues of an ``n x n`` matrix with independent standard
  complex Gaussian entries form the first ``n`` points of the GPP.  They are
  thinned with probability ``beta`` and scaled by ``sqrt(beta / c)``.  Only
  the bulk of the cloud is reliable, so samples carry a window that stays a
  fraction ``margin`` away from the edge of radius ``sqrt(beta n / c)``.

All functions are pure functions of their parameters and seed.
"""

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .eigen import eigenvalues_complex
from .errors import DomainError
from .pointproc import GppModel, MhcpModel
from .rng import check_seed, stream
from .specfun import reg_lower_gamma_seq
from .windows import DiskWindow, RectWindow

__all__ = [
    "RadialSample",
    "PlanarSample",
    "required_kmax",
    "radial_batch",
    "sample_radial",
    "sample_radial_palm",
    "ginibre_eigenvalues",
    "thin_and_scale",
    "sample_planar_gpp",
    "sample_ppp",
    "sample_mhcp",
    "sample_fading",
]

DEFAULT_MARGIN = 0.15
PROCESS_TAGS = ("GPP", "PPP", "MHCP_I", "MHCP_II", "DATA")


@dataclass(frozen=True)
class RadialSample:
    """Ascending squared moduli of one realization (origin point excluded if Palm)."""

    squared_moduli: np.ndarray
    palm_conditioned: bool
    rng_seed: int
    kmax: int

    def within(self, radius):
        """Squared moduli not exceeding ``radius**2``."""
        return self.squared_moduli[self.squared_moduli <= radius * radius]


@dataclass
class PlanarSample:
    """Finite point set in an observation window."""

    points: np.ndarray
    window: object
    process_tag: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if self.process_tag not in PROCESS_TAGS:
            raise DomainError(f"unknown process tag {self.process_tag!r}")
        if len(pts) and not np.all(self.window.contains(pts)):
            raise DomainError("all points must lie inside the window")
        self.points = pts

    def __len__(self):
        return len(self.points)

    @property
    def intensity(self):
        return len(self.points) / self.window.area

    def to_csv(self, dest=None):
        """Write ``x,y`` rows with 9 significant digits; returns the text."""
        buf = io.StringIO()
        buf.write("x,y\n")
        for x, y in self.points:
            buf.write(f"{x:.9g},{y:.9g}\n")
        text = buf.getvalue()
        if dest is not None:
            with open(dest, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
        return text


def required_kmax(model, radius, tol=1e-9):
    """Smallest ``K`` such that points ``k > K`` fall inside ``radius`` with
    total expected count below ``tol``.

    The expected number of dropped points within the disk is
    ``beta sum_{k>K} P(k, (c/beta) radius^2)``.
    """
    radius = float(radius)
    if not (math.isfinite(radius) and radius >= 0):
        raise DomainError("radius must be finite and nonnegative")
    x = model.ratio * radius * radius
    if x == 0.0:
        return 1
    top = int(math.ceil(x + 20.0 * math.sqrt(x) + 80.0))
    tail = np.cumsum(reg_lower_gamma_seq(top, x)[::-1])[::-1]
    # tail[K] is the sum over k >= K + 1
    ok = np.nonzero(model.beta * np.append(tail[1:], 0.0) < tol)[0]
    return int(ok[0]) + 1


def radial_batch(rng, model, kmax, size):
    """``size`` realizations of ``(Q_1..Q_kmax)`` with their retention mask.

    Returns the squared moduli (``size x kmax``, column ``k-1`` holding
    ``Q_k``, ``inf`` where the point was not retained) and the boolean
    retention mask.  The mask is drawn first (skipped when ``beta = 1``) and
    gamma variables only for retained entries, in row-major order.
    """
    kmax = int(kmax)
    size = int(size)
    scale = model.beta / model.c
    shapes = np.broadcast_to(np.arange(1, kmax + 1, dtype=float), (size, kmax))
    if model.beta == 1.0:
        kept = np.ones((size, kmax), dtype=bool)
        return rng.standard_gamma(shapes) * scale, kept
    kept = rng.random((size, kmax)) < model.beta
    q = np.full((size, kmax), np.inf)
    q[kept] = rng.standard_gamma(shapes[kept]) * scale
    return q, kept


def _radial(model, kmax, seed, radius, palm):
    if not isinstance(model, GppModel):
        raise DomainError("expected a GppModel")
    kmax = int(kmax)
    if kmax < 1:
        raise DomainError("kmax must be >= 1")
    if radius is not None:
        need = required_kmax(model, radius)
        if kmax < need:
            raise DomainError(f"kmax={kmax} is too small for radius {radius}; need kmax >= {need}")
    seed = check_seed(seed)
    q, kept = radial_batch(stream(seed), model, kmax, 1)
    q, kept = q[0], kept[0]
    if palm:
        kept[0] = False
    return RadialSample(np.sort(q[kept]), palm, seed, kmax)


def sample_radial(model, kmax, seed, radius=None):
    """Squared moduli of a beta-GPP realization.

    If ``radius`` is given the call fails unless ``kmax`` covers that disk
    (see :func:`required_kmax`).
    """
    return _radial(model, kmax, seed, radius, palm=False)


def sample_radial_palm(model, kmax, seed, radius=None):
    """Reduced Palm version: same draws as :func:`sample_radial` without ``Q_1``."""
    return _radial(model, kmax, seed, radius, palm=True)


def ginibre_eigenvalues(n, seed, backend="lapack"):
    """Eigenvalues of an ``n x n`` matrix with iid standard complex Gaussian entries.

    ``backend="lapack"`` uses :func:`numpy.linalg.eigvals`; ``"qr"`` uses the
    package's own Hessenberg QR solver.
    """
    n = int(n)
    if n < 1:
        raise DomainError("matrix order n must be >= 1")
    rng = stream(seed, 0)
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    if backend == "lapack":
        return np.linalg.eigvals(g)
    if backend == "qr":
        return eigenvalues_complex(g)
    raise DomainError(f"unknown eigen backend {backend!r}")


def thin_and_scale(eigs, model, n, seed, margin=DEFAULT_MARGIN, shape="disk"):
    """Turn GPP eigenvalues into a beta-GPP sample in its reliable window.

    ``shape="square"`` returns the square inscribed in the reliable disk,
    which suits estimators written for rectangles.
    """
    if not 0.0 <= margin < 1.0:
        raise DomainError("margin must lie in [0, 1)")
    keep = stream(seed, 1).random(len(eigs)) < model.beta
    z = np.asarray(eigs)[keep] * math.sqrt(model.beta / model.c)
    radius = math.sqrt(model.beta * n / model.c) * (1.0 - margin)
    if shape == "disk":
        window = DiskWindow(0.0, 0.0, radius)
    elif shape == "square":
        h = radius / math.sqrt(2.0)
        window = RectWindow(-h, -h, h, h)
    else:
        raise DomainError(f"unknown window shape {shape!r}")
    pts = np.column_stack((z.real, z.imag))
    pts = pts[window.contains(pts)] if len(pts) else pts.reshape(0, 2)
    meta = {"beta": model.beta, "c": model.c, "n": n, "margin": margin, "seed": int(seed)}
    return PlanarSample(pts, window, "GPP", meta)


def sample_planar_gpp(model, n, seed, margin=DEFAULT_MARGIN, shape="disk", backend="lapack"):
    """Planar beta-GPP sample from a Ginibre eigenvalue cloud of order ``n``."""
    if not isinstance(model, GppModel):
        raise DomainError("expected a GppModel")
    eigs = ginibre_eigenvalues(n, seed, backend)
    return thin_and_scale(eigs, model, int(n), seed, margin, shape)


def sample_ppp(intensity, window, seed):
    """Homogeneous Poisson process in ``window``."""
    intensity = float(intensity)
    if not (math.isfinite(intensity) and intensity >= 0):
        raise DomainError("intensity must be finite and nonnegative")
    rng = stream(seed)
    count = rng.poisson(intensity * window.area)
    return PlanarSample(window.sample_uniform(rng, count), window, "PPP",
                        {"intensity": intensity, "seed": int(seed)})


def _bounding_box(window):
    if isinstance(window, RectWindow):
        return window
    r = window.radius
    return RectWindow(window.cx - r, window.cy - r, window.cx + r, window.cy + r)


def sample_mhcp(model, window, seed):
    """Matern hard-core sample; the thinning is done on a torus.

    The parent PPP lives on the bounding rectangle of ``window`` with
    periodic boundary, so every point sees a full neighbourhood and the
    retained intensity has no edge bias.  Type I deletes every point with a
    neighbour closer than ``delta``.  Type II gives each point a uniform mark
    and deletes it when a closer-than-``delta`` neighbour has a smaller mark.
    """
    if not isinstance(model, MhcpModel):
        raise DomainError("expected an MhcpModel")
    box = _bounding_box(window)
    rng = stream(seed)
    count = rng.poisson(model.lambda_p * box.area)
    pts = box.sample_uniform(rng, count)
    marks = rng.random(count)
    alive = np.ones(count, dtype=bool)
    if count > 1:
        shifted = pts - [box.xmin, box.ymin]
        size = [box.width, box.height]
        shifted = np.mod(shifted, size)
        tree = cKDTree(shifted, boxsize=size)
        pairs = tree.query_pairs(model.delta, output_type="ndarray")
        if len(pairs):
            i, j = pairs[:, 0], pairs[:, 1]
            if model.variant == "I":
                alive[i] = False
                alive[j] = False
            else:
                loser = np.where(marks[i] > marks[j], i, j)
                alive[loser] = False
    kept = pts[alive]
    kept = kept[window.contains(kept)] if len(kept) else kept.reshape(0, 2)
    tag = "MHCP_I" if model.variant == "I" else "MHCP_II"
    meta = {"lambda_p": model.lambda_p, "delta": model.delta, "seed": int(seed)}
    return PlanarSample(kept, window, tag, meta)


def sample_fading(count, mu, seed):
    """Independent exponential fading gains with mean ``1/mu``."""
    mu = float(mu)
    if not (math.isfinite(mu) and mu > 0):
        raise DomainError("mu must be positive")
    count = int(count)
    if count < 0:
        raise DomainError("count must be nonnegative")
    return stream(seed).exponential(1.0 / mu, count)
