"""Bell regression with a log link: IRLS fitting and spectral diagnostics.

The model is ``y_i ~ Bell(mu_i)`` with ``mu_i = exp(x_i' beta)``. Writing
``theta_i`` for the Lambert W value of ``mu_i``, the working quantities are

* score contribution per row: ``(y_i - mu_i) / (1 + theta_i)``,
* IRLS weight: ``w_i = mu_i / (1 + theta_i)``,
* working response: ``z_i = eta_i + (y_i - mu_i) / mu_i``,

and each iteration solves the weighted least-squares system
``(X' W X) beta = X' W z``. After convergence the weights and working
response are re-evaluated once at the final coefficients, so the stored
``weights``/``working_response`` fields are consistent with ``beta_mle``.

The spectral form diagonalizes ``X' W X = Q diag(lambda) Q'`` (eigenvalues
descending); all shrinkage risk formulas operate on ``alpha = Q' beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from bellshrink.errors import (
    CollinearityError,
    DomainError,
    NumericFailureError,
    NotPositiveDefiniteError,
    ValidationError,
)
from bellshrink.kernel import lambert_w0_vec, solve_spd, symmetric_eigen

# |eta| cap applied while iterating; a converged fit must sit strictly inside.
ETA_CAP = 30.0
_RANK_RTOL = 1e-10


def _check_rank(x: np.ndarray, context: str = "design matrix") -> None:
    """Reject rank-deficient designs via the spectrum of X'X."""
    w, _ = symmetric_eigen(x.T @ x)
    smax = math.sqrt(max(w[0], 0.0))
    smin = math.sqrt(max(w[-1], 0.0))
    if smax == 0.0 or smin / smax < _RANK_RTOL:
        raise CollinearityError(
            f"{context} is rank deficient (singular-value ratio {0.0 if smax == 0.0 else smin / smax:.2e})"
        )


@dataclass
class Dataset:
    """Counts ``y`` regressed on the columns of ``X``.

    ``X`` is used exactly as given (include a ones column yourself, or let
    ``irls_fit`` add one via ``FitConfig.intercept``).
    """

    X: np.ndarray
    y: np.ndarray
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.asarray(self.y)
        if self.X.ndim != 2:
            raise ValidationError(f"X must be 2-D, got shape {self.X.shape}")
        n, p = self.X.shape
        if y.ndim != 1 or y.shape[0] != n:
            raise ValidationError(f"y has shape {y.shape}, expected ({n},)")
        if not np.all(np.isfinite(self.X)):
            raise ValidationError("X has non-finite entries")
        yf = y.astype(np.float64)
        if np.any(yf < 0) or np.any(yf != np.floor(yf)):
            raise ValidationError("y must contain nonnegative integers")
        self.y = yf.astype(np.int64)
        if not self.names:
            self.names = [f"x{j + 1}" for j in range(p)]
        if len(self.names) != p:
            raise ValidationError(f"{len(self.names)} names for {p} columns")
        if n <= p:
            raise ValidationError(f"need more rows than columns, got n={n}, p={p}")
        _check_rank(self.X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class FitConfig:
    tol: float = 1e-8
    max_iter: int = 100
    intercept: bool = True
    init: str = "log-moment"  # or "zeros"

    def __post_init__(self):
        if not self.tol > 0.0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.init not in ("log-moment", "zeros"):
            raise DomainError(f"unknown init {self.init!r}")


@dataclass
class FitResult:
    """Converged IRLS state: coefficients plus the final weighted system."""

    beta_mle: np.ndarray
    weights: np.ndarray
    working_response: np.ndarray
    mu_hat: np.ndarray
    iterations: int
    converged: bool
    loglik: float
    design: np.ndarray
    names: list[str]
    eta_clamped: bool = False


@dataclass
class SpectralModel:
    """Eigensystem of X'WX and the rotated coefficients.

    ``lam`` descending, ``q`` orthonormal columns, ``alpha_hat = q' beta``.
    """

    lam: np.ndarray
    q: np.ndarray
    alpha_hat: np.ndarray

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=np.float64)
        self.q = np.asarray(self.q, dtype=np.float64)
        self.alpha_hat = np.asarray(self.alpha_hat, dtype=np.float64)
        if np.any(np.diff(self.lam) > 0):
            raise DomainError("eigenvalues must be sorted descending")
        if not self.lam[-1] > 0.0:
            raise CollinearityError(
                f"weighted cross-product is not positive definite (smallest eigenvalue {self.lam[-1]})"
            )

    @property
    def p(self) -> int:
        return self.lam.shape[0]


def _mu_theta(eta: np.ndarray):
    if np.any(np.abs(eta) > 700.0) or not np.all(np.isfinite(eta)):
        bad = int(np.argmax(~(np.abs(eta) <= 700.0)))
        raise NumericFailureError(f"linear predictor overflows at row {bad} (eta={eta[bad]!r})")
    mu = np.exp(eta)
    return mu, lambert_w0_vec(mu)


def log_likelihood(beta, data: Dataset) -> float:
    """Log likelihood without the beta-free terms: sum of y log(theta) - exp(theta)."""
    beta = np.asarray(beta, dtype=np.float64)
    eta = data.X @ beta
    mu, theta = _mu_theta(eta)
    y = data.y.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(y > 0, y * np.log(theta), 0.0)
    return float(np.sum(terms - np.exp(theta)))


def score(beta, data: Dataset) -> np.ndarray:
    """Gradient of the log likelihood: ``X' [(y - mu) / (1 + theta)]``."""
    beta = np.asarray(beta, dtype=np.float64)
    eta = data.X @ beta
    mu, theta = _mu_theta(eta)
    return data.X.T @ ((data.y - mu) / (1.0 + theta))


def _effective_design(data: Dataset, config: FitConfig):
    """Prepend a ones column when requested and not already present."""
    x, names = data.X, list(data.names)
    if config.intercept:
        constant = [
            j
            for j in range(x.shape[1])
            if x[0, j] != 0.0 and np.all(x[:, j] == x[0, j])
        ]
        if not constant:
            x = np.column_stack([np.ones(x.shape[0]), x])
            names = ["(intercept)"] + names
            if x.shape[0] <= x.shape[1]:
                raise ValidationError("too few rows once the intercept column is added")
            _check_rank(x, "design matrix with intercept")
    return x, names


def irls_fit(data: Dataset, config: FitConfig = FitConfig()) -> FitResult:
    """Fit the Bell regression by iteratively reweighted least squares.

    Stops when the relative L2 change of the coefficients drops to
    ``config.tol`` or after ``config.max_iter`` steps (then
    ``converged=False``). Raises :class:`CollinearityError` if the weighted
    cross-product becomes singular and :class:`NumericFailureError` on
    divergence (non-finite log likelihood) or a fit stuck at the linear
    predictor cap.
    """
    x, names = _effective_design(data, config)
    n, p = x.shape
    y = data.y.astype(np.float64)

    if config.init == "zeros":
        beta = np.zeros(p)
    else:
        target = np.log(y + 0.5)
        try:
            beta = solve_spd(x.T @ x, x.T @ target)
        except NotPositiveDefiniteError as exc:
            raise CollinearityError(f"initialization failed: {exc}") from None

    converged = False
    clamped_ever = False
    iterations = 0
    for _ in range(config.max_iter):
        iterations += 1
        eta = x @ beta
        clip = np.abs(eta) > ETA_CAP
        if np.any(clip):
            clamped_ever = True
            eta = np.clip(eta, -ETA_CAP, ETA_CAP)
        mu = np.exp(eta)
        theta = lambert_w0_vec(mu)
        w = mu / (1.0 + theta)
        z = eta + (y - mu) / mu
        try:
            beta_new = solve_spd(x.T @ (w[:, None] * x), x.T @ (w * z))
        except NotPositiveDefiniteError as exc:
            raise CollinearityError(f"singular weighted cross-product at iteration {iterations}: {exc}") from None
        if not np.all(np.isfinite(beta_new)):
            raise NumericFailureError(f"coefficients diverged at iteration {iterations}")
        rel = float(np.linalg.norm(beta_new - beta)) / max(float(np.linalg.norm(beta)), 1e-12)
        beta = beta_new
        if rel <= config.tol:
            converged = True
            break

    eta = x @ beta
    if converged and np.any(np.abs(eta) >= ETA_CAP):
        raise NumericFailureError("fit converged on the linear-predictor clamp; model is unstable")
    mu, theta = _mu_theta(eta)
    w = mu / (1.0 + theta)
    z = eta + (y - mu) / mu
    ll = float(np.sum(np.where(y > 0, y * np.log(theta), 0.0) - np.exp(theta)))
    if not math.isfinite(ll):
        raise NumericFailureError("log likelihood is not finite at the final coefficients")
    return FitResult(
        beta_mle=beta,
        weights=w,
        working_response=z,
        mu_hat=mu,
        iterations=iterations,
        converged=converged,
        loglik=ll,
        design=x,
        names=names,
        eta_clamped=clamped_ever,
    )


def spectral(data: Dataset, fit: FitResult) -> SpectralModel:
    """Diagonalize the weighted cross-product of the fitted design."""
    if not fit.converged:
        raise ValidationError("spectral form requires a converged fit")
    v = fit.design.T @ (fit.weights[:, None] * fit.design)
    lam, q = symmetric_eigen(v)
    return SpectralModel(lam=lam, q=q, alpha_hat=q.T @ fit.beta_mle)


def mse_mle(spec: SpectralModel) -> float:
    """Scalar risk of the maximum-likelihood estimator: sum of 1/lambda_j."""
    if not spec.lam[-1] > 0.0:
        raise DomainError("all eigenvalues must be positive")
    return float(np.sum(1.0 / spec.lam))


def collinearity_diagnostics(spec_or_eigenvalues):
    """Condition number and per-eigenvalue condition indices.

    Accepts a :class:`SpectralModel` or a bare eigenvalue sequence. Returns
    ``(sqrt(lam_max / lam_min), sqrt(lam_j / lam_min))`` with the indices in
    the order given (so the smallest eigenvalue's index is 1).
    """
    lam = spec_or_eigenvalues.lam if isinstance(spec_or_eigenvalues, SpectralModel) else spec_or_eigenvalues
    lam = np.asarray(lam, dtype=np.float64)
    if lam.ndim != 1 or lam.size < 1:
        raise DomainError("expected a vector of eigenvalues")
    if not np.all(lam > 0.0):
        raise DomainError("all eigenvalues must be positive")
    lam_min = float(np.min(lam))
    lam_max = float(np.max(lam))
    return math.sqrt(lam_max / lam_min), np.sqrt(lam / lam_min)
