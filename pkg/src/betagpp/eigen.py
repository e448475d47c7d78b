"""Eigenvalues of general complex matrices.

Householder reduction to upper Hessenberg form followed by implicitly
shifted single-shift QR iteration with Wilkinson shifts and deflation.  This
is the textbook algorithm behind LAPACK's ``zlahqr``; it is written here so
the planar sampler does not depend on a particular backend, and it serves
as a cross-check of ``numpy.linalg.eigvals``.
"""

import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import ConvergenceError, DomainError

__all__ = ["hessenberg", "eigenvalues_complex", "backward_error", "backward_error_bound"]

ULP = np.finfo(float).eps
MAX_ITER_PER_EIG = 60


def hessenberg(a):
    """Unitarily similar upper Hessenberg matrix (Householder reflections)."""
    h = np.array(a, dtype=complex, copy=True)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError("matrix must be square")
    if not np.all(np.isfinite(h)):
        raise DomainError("matrix entries must be finite")
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * norm
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _givens(x, y):
    """Return ``(c, s)`` with ``[[c, s], [-conj(s), c]] @ [x, y] = [r, 0]``."""
    ay = abs(y)
    if ay == 0.0:
        return 1.0, 0.0
    ax = abs(x)
    if ax == 0.0:
        return 0.0, y.conjugate() / ay
    r = math.hypot(ax, ay)
    return ax / r, (x / ax) * y.conjugate() / r


def _rotate(h, k, c, s, col_lo, col_hi, row_lo, row_hi):
    rows = h[k:k + 2, col_lo:col_hi]
    top = c * rows[0] + s * rows[1]
    bottom = -s.conjugate() * rows[0] + c * rows[1]
    rows[0] = top
    rows[1] = bottom
    cols = h[row_lo:row_hi, k:k + 2]
    left = c * cols[:, 0] + s.conjugate() * cols[:, 1]
    right = -s * cols[:, 0] + c * cols[:, 1]
    cols[:, 0] = left
    cols[:, 1] = right


def _wilkinson(h, hi):
    a, b = h[hi - 1, hi - 1], h[hi - 1, hi]
    c, d = h[hi, hi - 1], h[hi, hi]
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    # eigenvalues are 0.5(a+d) +- disc; pick the one closer to d
    e1 = 0.5 * (a + d) + disc
    e2 = 0.5 * (a + d) - disc
    return e1 if abs(e1 - d) <= abs(e2 - d) else e2


def eigenvalues_complex(a):
    """All eigenvalues of the square matrix ``a`` as a complex array."""
    h = hessenberg(a)
    n = h.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    scale = max(np.max(np.abs(h)), np.finfo(float).tiny)
    hi = n - 1
    its = 0
    total_its = 0
    while hi >= 0:
        if hi == 0:
            break
        # look for a negligible subdiagonal entry in the active block
        lo = 0
        for i in range(hi, 0, -1):
            tst = abs(h[i - 1, i - 1]) + abs(h[i, i])
            if tst == 0.0:
                tst = scale
            if abs(h[i, i - 1]) <= ULP * tst:
                h[i, i - 1] = 0.0
                lo = i
                break
        if lo == hi:
            hi -= 1
            its = 0
            continue
        if its >= MAX_ITER_PER_EIG:
            raise ConvergenceError(f"QR iteration stalled at row {hi} after {its} sweeps")
        if its in (10, 20, 30, 40, 50):
            # exceptional shift to break cycles
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1].real) + 0.75j * abs(h[hi, hi - 1].imag)
        else:
            mu = _wilkinson(h, hi)
        its += 1
        total_its += 1
        end = hi + 1
        c, s = _givens(h[lo, lo] - mu, h[lo + 1, lo])
        _rotate(h, lo, c, s, lo, end, lo, min(lo + 3, end))
        for k in range(lo + 1, hi):
            c, s = _givens(h[k, k - 1], h[k + 1, k - 1])
            _rotate(h, k, c, s, k - 1, end, lo, min(k + 3, end))
            h[k + 1, k - 1] = 0.0
    return np.diag(h).copy()


def backward_error(a, lam):
    """Smallest singular value of ``a - lam I`` relative to ``||a||_2``.

    This equals ``min ||a v - lam v||`` over unit vectors ``v`` divided by
    the norm of ``a``, i.e. the relative residual of the best eigenvector
    for ``lam``.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    norm = np.linalg.norm(a, 2)
    if norm == 0.0:
        return 0.0 if lam == 0 else math.inf
    sv = np.linalg.svd(a - lam * np.eye(n), compute_uv=False)
    return float(sv[-1] / norm)


def backward_error_bound(a, lams, steps=2, seed=0):
    """Upper bounds on :func:`backward_error` for several eigenvalues.

    For any vector ``v``, ``||(a - lam I) v|| / ||v||`` is at least the
    smallest singular value of ``a - lam I``.  A few steps of inverse
    iteration from a random start make this bound nearly tight at the cost
    of one LU factorization per eigenvalue.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    norm = np.linalg.norm(a, 2)
    rng = np.random.default_rng(seed)
    start = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    eye = np.eye(n)
    out = np.empty(len(lams))
    for i, lam in enumerate(lams):
        shifted = a - lam * eye
        v = start / np.linalg.norm(start)
        best = np.linalg.norm(shifted @ v)
        try:
            with np.errstate(all="ignore"):
                lu = lu_factor(shifted, check_finite=False)
                for _ in range(int(steps)):
                    w = lu_solve(lu, v, check_finite=False)
                    size = np.linalg.norm(w)
                    if not np.isfinite(size) or size == 0.0:
                        break
                    v = w / size
                    best = min(best, np.linalg.norm(shifted @ v))
        except (ValueError, np.linalg.LinAlgError):
            pass
        out[i] = best / norm if norm > 0 else 0.0
    return out
