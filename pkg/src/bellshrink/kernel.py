"""Deterministic numerical primitives shared by the whole package.

Hot loops (random streams, discrete samplers, Jacobi eigensolver, Cholesky)
live in the selected kernel backend; this module adds input validation and
the primitives that are not performance critical: the Lambert W function,
correlated-normal design sampling and bracketed scalar minimization.

All sampling is a pure function of ``(seed, call sequence)``. Parallel users
must hold independent :class:`Rng` instances, e.g. via :func:`derive_seed`.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from bellshrink.backend import BACKEND, impl as _impl
from bellshrink.errors import (
    DomainError,
    InvalidInputError,
    NumericFailureError,
)

__all__ = [
    "BACKEND",
    "Rng",
    "derive_seed",
    "symmetric_eigen",
    "cholesky_spd",
    "solve_spd",
    "lambert_w0",
    "lambert_w0_vec",
    "mvn_ar1_sample",
    "minimize_scalar",
]

Rng = _impl.Rng
derive_seed = _impl.derive_seed
cholesky_spd = _impl.cholesky_spd


def _as_square(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix has non-finite entries")
    return m


def symmetric_eigen(a):
    """Eigendecomposition of a symmetric matrix.

    Returns ``(w, q)`` with eigenvalues ``w`` sorted descending and
    orthonormal eigenvectors in the columns of ``q`` so that
    ``a = q @ diag(w) @ q.T``.
    """
    m = _as_square(a)
    scale = np.max(np.abs(m))
    tol = 1e-10 * max(scale, 1e-300)
    if np.max(np.abs(m - m.T)) > tol:
        raise InvalidInputError("matrix is not symmetric within tolerance 1e-10")
    return _impl.jacobi_eigh(m)


def solve_spd(a, b):
    """Solve ``a @ x = b`` for symmetric positive-definite ``a``."""
    m = _as_square(a)
    v = np.asarray(b, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != m.shape[0]:
        raise InvalidInputError(f"right-hand side shape {v.shape} does not match matrix {m.shape}")
    return _impl.solve_spd(m, v)


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for ``x >= 0``.

    Solves ``w * exp(w) = x`` by Halley iteration to a relative residual of
    about machine precision (well inside 1e-12).
    """
    x = float(x)
    if x < 0.0:
        raise DomainError(f"lambert_w0 requires a nonnegative argument, got {x}")
    if x == 0.0:
        return 0.0
    # Series start near zero, logarithmic start elsewhere.
    w = x * (1.0 - x) if x < 0.5 else math.log1p(x)
    for _ in range(100):
        e = math.exp(w)
        f = w * e - x
        w1 = w + 1.0
        dw = f / (e * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= dw
        if abs(dw) <= 5e-16 * (1.0 + abs(w)):
            return w
    raise NumericFailureError(f"lambert_w0 failed to converge for x={x}")


def lambert_w0_vec(x) -> np.ndarray:
    """Vectorized :func:`lambert_w0` for nonnegative arrays."""
    xs = np.asarray(x, dtype=np.float64)
    if xs.size and float(np.min(xs)) < 0.0:
        raise DomainError("lambert_w0 requires nonnegative arguments")
    w = np.where(xs < 0.5, xs * (1.0 - xs), np.log1p(xs))
    for _ in range(100):
        e = np.exp(w)
        f = w * e - xs
        w1 = w + 1.0
        dw = f / (e * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= dw
        if np.max(np.abs(dw) - 5e-16 * (1.0 + np.abs(w)), initial=-1.0) <= 0.0:
            break
    return w


def ar1_covariance(p: int, rho: float) -> np.ndarray:
    """Covariance matrix with entries ``rho ** |i - j|``."""
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(np.float64)


def mvn_ar1_sample(rng, n: int, p: int, rho: float) -> np.ndarray:
    """``n`` rows from a zero-mean normal with AR(1) correlation ``rho ** |i-j|``.

    Rows are generated in order from ``rng`` and transformed by the Cholesky
    factor of the target covariance, so output is reproducible per seed.
    """
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    if n < 1 or p < 1:
        raise DomainError(f"need n >= 1 and p >= 1, got n={n}, p={p}")
    z = rng.normals(n * p).reshape(n, p)
    if rho == 0.0:
        return z
    low = cholesky_spd(ar1_covariance(p, rho))
    return z @ low.T


_GOLDEN_RATIO = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_scalar(
    f: Callable[[float], float],
    init: float,
    lower: float,
    upper: float,
    tol: float = 1e-8,
    probes: int = 65,
) -> float:
    """Minimize a scalar function on ``[lower, upper]``.

    Probes an even grid (plus ``init``) to locate the best bracket, refines
    it by golden-section search to width ``tol`` and finishes with one
    parabolic fit through the final triplet. The returned point never has a
    larger value than ``init``.
    """
    if not lower < upper:
        raise DomainError(f"need lower < upper, got [{lower}, {upper}]")
    init = min(max(float(init), lower), upper)

    evaluated: dict[float, float] = {}

    def ev(x: float) -> float:
        if x in evaluated:
            return evaluated[x]
        y = float(f(x))
        if not math.isfinite(y):
            raise NumericFailureError(f"objective is not finite at {x}")
        evaluated[x] = y
        return y

    pts = [init]
    if probes >= 2:
        span = upper - lower
        pts += [lower + span * i / (probes - 1) for i in range(probes)]
    else:
        pts += [lower, upper]
    best = min(pts, key=ev)
    h = (upper - lower) / max(probes - 1, 1)
    a = max(lower, best - h)
    b = min(upper, best + h)

    # Golden-section on [a, b], tracking the best point seen. The iteration
    # cap and the resolution floor keep the loop finite when tol is below
    # the float spacing of a wide bracket.
    x1 = b - _GOLDEN_RATIO * (b - a)
    x2 = a + _GOLDEN_RATIO * (b - a)
    f1, f2 = ev(x1), ev(x2)
    for _ in range(200):
        if b - a <= tol or b - a <= 8.0 * np.finfo(float).eps * max(abs(a), abs(b), 1.0):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN_RATIO * (b - a)
            f1 = ev(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN_RATIO * (b - a)
            f2 = ev(x2)
    # Parabolic polish: vertex of the fit through (a, mid, b).
    xm = 0.5 * (a + b)
    fa, fb, fm = ev(a), ev(b), ev(xm)
    d1 = xm - a
    d2 = xm - b
    den = d1 * (fm - fb) - d2 * (fm - fa)
    if den != 0.0:
        cand = xm - 0.5 * (d1 * d1 * (fm - fb) - d2 * d2 * (fm - fa)) / den
        if lower <= cand <= upper:
            ev(cand)
    return min(evaluated, key=evaluated.get)
