"""Shrinkage estimators for Bell regression and their closed-form risks.

Everything is evaluated in the canonical coordinates of the spectral model:
with ``V = X'WX = Q diag(lam) Q'`` and ``alpha = Q' beta``, each estimator
multiplies the j-th canonical coefficient by

* Liu-type (LTE):            ``(lam_j - d) / (lam_j + k)``
* almost-unbiased (AULTE):   ``1 - (k + d)^2 / (lam_j + k)^2``
* modified (MAULTE):         ``(1 - (k+d)^2/(lam_j+k)^2) * (1 - (k+d)/(lam_j+k))``

with biasing parameters ``k > 0`` and unrestricted finite ``d``. At
``d = -k`` every estimator collapses to maximum likelihood.

Two deliberately independent risk routes are kept: :func:`scalar_mse`
implements the displayed closed-form polynomials, while :func:`mmse_matrix`
assembles covariance plus bias outer product from the multiplier and bias
functions. Their agreement (trace identity) is part of the test suite; do
not merge the code paths.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from bellshrink.errors import DegenerateInputError, DomainError
from bellshrink.kernel import minimize_scalar
from bellshrink.glm import SpectralModel


class EstimatorKind(enum.Enum):
    MLE = "mle"
    LTE = "lte"
    AULTE = "aulte"
    MAULTE = "maulte"

    @classmethod
    def parse(cls, token: str) -> "EstimatorKind":
        try:
            return cls(token.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise DomainError(f"unknown estimator {token!r} (expected one of: {valid})") from None


SHRINKAGE_KINDS = (EstimatorKind.LTE, EstimatorKind.AULTE, EstimatorKind.MAULTE)


@dataclass(frozen=True)
class BiasingParams:
    k: float
    d: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0.0):
            raise DomainError(f"k must be positive and finite, got {self.k}")
        if not math.isfinite(self.d):
            raise DomainError(f"d must be finite, got {self.d}")


@dataclass(frozen=True)
class ShrinkageEstimate:
    """One evaluated estimator: coefficients plus its plug-in analytic risks."""

    kind: EstimatorKind
    params: BiasingParams | None
    beta: np.ndarray
    scalar_mse: float
    squared_bias: float


def _lam(spec: SpectralModel) -> np.ndarray:
    lam = np.asarray(spec.lam, dtype=np.float64)
    if not np.all(lam > 0.0):
        raise DomainError("all eigenvalues must be positive")
    return lam


def canonical_multipliers(kind: EstimatorKind, lam: np.ndarray, params: BiasingParams) -> np.ndarray:
    """Per-component factor applied to the canonical MLE coefficients."""
    k, d = params.k, params.d
    if kind is EstimatorKind.MLE:
        return np.ones_like(lam)
    if kind is EstimatorKind.LTE:
        return (lam - d) / (lam + k)
    r = (k + d) / (lam + k)
    if kind is EstimatorKind.AULTE:
        return 1.0 - r * r
    if kind is EstimatorKind.MAULTE:
        return (1.0 - r * r) * (1.0 - r)
    raise DomainError(f"unsupported estimator kind {kind}")


def estimate(kind: EstimatorKind, spec: SpectralModel, beta_mle, params: BiasingParams) -> np.ndarray:
    """Apply the estimator to ``beta_mle`` and return original coordinates."""
    lam = _lam(spec)
    alpha = spec.q.T @ np.asarray(beta_mle, dtype=np.float64)
    return spec.q @ (canonical_multipliers(kind, lam, params) * alpha)


def bias_vector(kind: EstimatorKind, spec: SpectralModel, params: BiasingParams, alpha) -> np.ndarray:
    """Bias in canonical coordinates, treating ``alpha`` as the true value."""
    lam = _lam(spec)
    alpha = np.asarray(alpha, dtype=np.float64)
    k, d = params.k, params.d
    if kind is EstimatorKind.MLE:
        return np.zeros_like(lam)
    if kind is EstimatorKind.LTE:
        return -(d + k) * alpha / (lam + k)
    if kind is EstimatorKind.AULTE:
        return -((d + k) ** 2) * alpha / (lam + k) ** 2
    if kind is EstimatorKind.MAULTE:
        return -(d + k) * alpha * ((lam + k) ** 2 + (k + d) * (lam - d)) / (lam + k) ** 3
    raise DomainError(f"unsupported estimator kind {kind}")


def variance_components(kind: EstimatorKind, lam: np.ndarray, params: BiasingParams) -> np.ndarray:
    """Diagonal of the canonical covariance: multiplier squared over lambda."""
    m = canonical_multipliers(kind, lam, params)
    return m * m / lam


def scalar_mse(kind: EstimatorKind, spec: SpectralModel, params: BiasingParams, alpha) -> float:
    """Scalar risk from the displayed closed forms (variance plus squared bias).

    Kept textually independent of :func:`mmse_matrix`; the test suite checks
    the two routes agree to 1e-12.
    """
    lam = _lam(spec)
    a2 = np.asarray(alpha, dtype=np.float64) ** 2
    k, d = params.k, params.d
    if kind is EstimatorKind.MLE:
        return float(np.sum(1.0 / lam))
    if kind is EstimatorKind.LTE:
        return float(
            np.sum((lam - d) ** 2 / (lam * (lam + k) ** 2))
            + (d + k) ** 2 * np.sum(a2 / (lam + k) ** 2)
        )
    if kind is EstimatorKind.AULTE:
        return float(
            np.sum((lam - d) ** 2 * (lam + d + 2.0 * k) ** 2 / (lam * (lam + k) ** 4))
            + (k + d) ** 4 * np.sum(a2 / (lam + k) ** 4)
        )
    if kind is EstimatorKind.MAULTE:
        return float(
            np.sum((lam - d) ** 4 * (lam + d + 2.0 * k) ** 2 / (lam * (lam + k) ** 6))
            + (k + d) ** 2
            * np.sum(a2 * ((lam + k) ** 2 + (k + d) * (lam - d)) ** 2 / (lam + k) ** 6)
        )
    raise DomainError(f"unsupported estimator kind {kind}")


def mmse_matrix(kind: EstimatorKind, spec: SpectralModel, params: BiasingParams, alpha) -> np.ndarray:
    """Matrix risk in canonical coordinates: diagonal covariance plus bias outer product."""
    lam = _lam(spec)
    b = bias_vector(kind, spec, params, alpha)
    return np.diag(variance_components(kind, lam, params)) + np.outer(b, b)


def squared_bias(kind: EstimatorKind, spec: SpectralModel, params: BiasingParams, alpha) -> float:
    b = bias_vector(kind, spec, params, alpha)
    return float(b @ b)


def select_k(kind: EstimatorKind, alpha_hat) -> float:
    """Biasing parameter k: ``1 / (alpha' alpha)`` for LTE, ``1 / min(alpha_j^2)`` otherwise."""
    alpha = np.asarray(alpha_hat, dtype=np.float64)
    if kind is EstimatorKind.MLE:
        raise DomainError("maximum likelihood has no biasing parameter")
    if kind is EstimatorKind.LTE:
        denom = float(alpha @ alpha)
    else:
        denom = float(np.min(alpha * alpha))
    if denom <= 0.0:
        raise DegenerateInputError("cannot select k from (near-)zero canonical coefficients")
    return 1.0 / denom


def d_lte(spec: SpectralModel, alpha_hat, k: float) -> float:
    """Closed-form d for the Liu-type estimator."""
    if not k > 0.0:
        raise DomainError(f"k must be positive, got {k}")
    lam = _lam(spec)
    a2 = np.asarray(alpha_hat, dtype=np.float64) ** 2
    num = np.sum((1.0 - k * a2) / (lam + k) ** 2)
    den = np.sum((1.0 + lam * a2) / (lam * (lam + k) ** 2))
    return float(num / den)


def d_opt_seed(spec: SpectralModel, alpha_hat, k: float) -> float:
    """Stationary-point seed for the d search: median of the per-component roots."""
    if not k > 0.0:
        raise DomainError(f"k must be positive, got {k}")
    lam = _lam(spec)
    a2 = np.asarray(alpha_hat, dtype=np.float64) ** 2
    return float(np.median(-k + (lam + k) / np.sqrt(1.0 + lam * a2)))


# Lower edge of the d search sits just above the exact MLE-reduction point -k.
D_BRACKET_EPS = 1e-6
_D_GRID = 2048


def select_d(kind: EstimatorKind, spec: SpectralModel, alpha_hat, k: float, tol: float = 1e-9) -> float:
    """Risk-minimizing d on ``[-k + eps, lam_max + k]``, seeded at :func:`d_opt_seed`.

    A dense vectorized pre-scan locates the global basin (the risk can have
    several stationary points in d); golden-section then refines inside it.
    The result never has a larger plug-in risk than the seed.
    """
    if kind not in (EstimatorKind.AULTE, EstimatorKind.MAULTE):
        raise DomainError("d search applies to the almost-unbiased estimators only")
    if not k > 0.0:
        raise DomainError(f"k must be positive, got {k}")
    lam = _lam(spec)
    alpha = np.asarray(alpha_hat, dtype=np.float64)
    params = lambda d: BiasingParams(k=k, d=d)
    lo = -k + D_BRACKET_EPS
    hi = float(lam[0]) + k
    seed = min(max(d_opt_seed(spec, alpha, k), lo), hi)

    def f(d: float) -> float:
        return scalar_mse(kind, spec, params(d), alpha)

    # Vectorized pre-scan over the bracket (one numpy broadcast).
    a2 = alpha * alpha
    ds = np.linspace(lo, hi, _D_GRID + 1)
    dg = ds[None, :]
    lamg = lam[:, None]
    a2g = a2[:, None]
    if kind is EstimatorKind.AULTE:
        vals = np.sum((lamg - dg) ** 2 * (lamg + dg + 2.0 * k) ** 2 / (lamg * (lamg + k) ** 4), axis=0)
        vals += (k + dg[0]) ** 4 * np.sum(a2g / (lamg + k) ** 4, axis=0)
    else:
        vals = np.sum((lamg - dg) ** 4 * (lamg + dg + 2.0 * k) ** 2 / (lamg * (lamg + k) ** 6), axis=0)
        vals += (k + dg[0]) ** 2 * np.sum(
            a2g * ((lamg + k) ** 2 + (k + dg) * (lamg - dg)) ** 2 / (lamg + k) ** 6, axis=0
        )
    best = int(np.argmin(vals))
    cell_lo = ds[max(best - 1, 0)]
    cell_hi = ds[min(best + 1, _D_GRID)]
    d_star = minimize_scalar(f, seed if cell_lo <= seed <= cell_hi else ds[best], cell_lo, cell_hi, tol, probes=9)
    if f(d_star) > f(seed):
        d_star = seed
    return float(d_star)


def evaluate(kind: EstimatorKind, spec: SpectralModel, beta_mle, params: BiasingParams | None) -> ShrinkageEstimate:
    """Bundle coefficients and plug-in risks for one estimator."""
    alpha = spec.alpha_hat
    if kind is EstimatorKind.MLE:
        beta = np.asarray(beta_mle, dtype=np.float64).copy()
        return ShrinkageEstimate(
            kind=kind,
            params=None,
            beta=beta,
            scalar_mse=float(np.sum(1.0 / _lam(spec))),
            squared_bias=0.0,
        )
    if params is None:
        raise DomainError(f"{kind.value} requires biasing parameters")
    return ShrinkageEstimate(
        kind=kind,
        params=params,
        beta=estimate(kind, spec, beta_mle, params),
        scalar_mse=scalar_mse(kind, spec, params, alpha),
        squared_bias=squared_bias(kind, spec, params, alpha),
    )
