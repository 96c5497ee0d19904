"""Monte Carlo study harness: design/response generation and cell aggregation.

Each repetition draws a fresh correlated design, generates Bell counts at
``mu_i = exp(x_i' beta)``, fits the model, selects the biasing parameters per
estimator and records the squared estimation error. Cells aggregate to the
simulated risk (mean squared error over repetitions), its spread (sample
standard deviation of the per-repetition squared errors) and the empirical
squared bias (squared norm of the mean coefficient error).

Reproducibility: repetition ``r`` uses the child stream
``derive_seed(config.seed, r)``, so results are independent of execution
order and identical runs are bit-identical. Repetitions may be evaluated in
parallel processes; aggregation always proceeds in repetition order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from bellshrink.errors import (
    CellFailureError,
    CollinearityError,
    DegenerateInputError,
    DomainError,
    NumericFailureError,
)
from bellshrink.glm import Dataset, FitConfig, _mu_theta, irls_fit, spectral
from bellshrink.kernel import Rng, derive_seed, mvn_ar1_sample
from bellshrink.shrinkage import (
    BiasingParams,
    EstimatorKind,
    d_lte,
    estimate,
    select_d,
    select_k,
)

DEFAULT_ESTIMATORS = (
    EstimatorKind.MLE,
    EstimatorKind.LTE,
    EstimatorKind.AULTE,
    EstimatorKind.MAULTE,
)


def beta_for(p: int, convention: str) -> np.ndarray:
    """Named true-coefficient conventions: "unit" (norm 1) or "ones" (norm sqrt(p))."""
    if convention == "unit":
        return np.full(p, 1.0 / math.sqrt(p))
    if convention == "ones":
        return np.ones(p)
    raise DomainError(f"unknown beta convention {convention!r} (expected 'unit' or 'ones')")


@dataclass(frozen=True)
class SimConfig:
    n: int
    p: int
    rho: float
    beta_true: np.ndarray
    seed: int
    n_reps: int = 1000
    estimators: tuple[EstimatorKind, ...] = DEFAULT_ESTIMATORS
    intercept: bool = False
    standardize: bool = False
    fit_tol: float = 1e-8
    fit_max_iter: int = 100
    # Optional fixed biasing parameters applied to every shrinkage estimator
    # (bypasses the per-repetition selection rules).
    k_override: float | None = None
    d_override: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "beta_true", np.asarray(self.beta_true, dtype=np.float64))
        if self.n <= self.p:
            raise DomainError(f"need n > p, got n={self.n}, p={self.p}")
        if not 0.0 <= self.rho < 1.0:
            raise DomainError(f"rho must lie in [0, 1), got {self.rho}")
        if self.n_reps < 1:
            raise DomainError(f"n_reps must be at least 1, got {self.n_reps}")
        if self.beta_true.shape != (self.p,):
            raise DomainError(f"beta_true has shape {self.beta_true.shape}, expected ({self.p},)")
        if not self.estimators:
            raise DomainError("at least one estimator is required")

    @property
    def effective_beta(self) -> np.ndarray:
        """True coefficients including the zero intercept when one is fitted."""
        if self.intercept:
            return np.concatenate([[0.0], self.beta_true])
        return self.beta_true


@dataclass(frozen=True)
class EstimatorCellStats:
    sim_mse: float
    mse_spread: float
    sim_sb: float
    n_failed: int


@dataclass
class SimCellResult:
    config: SimConfig
    n_ok: int
    n_failed: int
    stats: dict[EstimatorKind, EstimatorCellStats]
    per_rep_sq_err: dict[EstimatorKind, np.ndarray] | None = None
    per_rep_mle_risk: np.ndarray | None = None


def gen_design(rng, n: int, p: int, rho: float, standardize: bool = False) -> np.ndarray:
    """Design matrix with AR(1)-correlated standard-normal rows."""
    x = mvn_ar1_sample(rng, n, p, rho)
    if standardize:
        x = x / np.linalg.norm(x, axis=0)
    return x


def gen_response(rng, x: np.ndarray, beta_true) -> np.ndarray:
    """Bell counts at ``mu_i = exp(x_i' beta)``, one ordered draw per row."""
    beta_true = np.asarray(beta_true, dtype=np.float64)
    eta = x @ beta_true
    _, theta = _mu_theta(eta)
    return rng.bell_fill(theta)


_REP_FAILURES = (CollinearityError, NumericFailureError, DegenerateInputError)


def _run_rep(config: SimConfig, r: int):
    """One repetition: returns an (estimators, p) coefficient array or None on failure."""
    rng = Rng(derive_seed(config.seed, r))
    try:
        x = gen_design(rng, config.n, config.p, config.rho, config.standardize)
        y = gen_response(rng, x, config.beta_true)
        data = Dataset(X=x, y=y)
        fit = irls_fit(
            data,
            FitConfig(
                tol=config.fit_tol,
                max_iter=config.fit_max_iter,
                intercept=config.intercept,
            ),
        )
        if not fit.converged:
            return None
        spec = spectral(data, fit)
        alpha_hat = spec.alpha_hat
        betas = np.empty((len(config.estimators), fit.beta_mle.shape[0]))
        for i, kind in enumerate(config.estimators):
            if kind is EstimatorKind.MLE:
                betas[i] = fit.beta_mle
                continue
            k = config.k_override if config.k_override is not None else select_k(kind, alpha_hat)
            if config.d_override is not None:
                d = config.d_override
            elif kind is EstimatorKind.LTE:
                d = d_lte(spec, alpha_hat, k)
            else:
                d = select_d(kind, spec, alpha_hat, k)
            betas[i] = estimate(kind, spec, fit.beta_mle, BiasingParams(k=k, d=d))
        return betas, float(np.sum(1.0 / spec.lam))
    except _REP_FAILURES:
        return None


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("BELLSHRINK_THREADS", "").strip()
        threads = int(env) if env else 1
    return max(1, threads)


def run_cell(config: SimConfig, threads: int | None = None, collect_per_rep: bool = False) -> SimCellResult:
    """Run all repetitions of one cell and aggregate.

    ``threads`` (default: the ``BELLSHRINK_THREADS`` environment variable,
    else 1) caps the worker processes. Results do not depend on it.
    """
    threads = _resolve_threads(threads)
    if threads > 1 and config.n_reps >= 2 * threads:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, config.n_reps // (threads * 8))
            results = list(
                pool.map(_run_rep, [config] * config.n_reps, range(config.n_reps), chunksize=chunk)
            )
    else:
        results = [_run_rep(config, r) for r in range(config.n_reps)]

    beta_eff = config.effective_beta
    kinds = config.estimators
    sq = {kind: [] for kind in kinds}
    beta_sum = {kind: np.zeros_like(beta_eff) for kind in kinds}
    mle_risks = []
    n_failed = 0
    for res in results:
        if res is None:
            n_failed += 1
            continue
        betas, mle_risk = res
        mle_risks.append(mle_risk)
        for i, kind in enumerate(kinds):
            err = betas[i] - beta_eff
            sq[kind].append(float(err @ err))
            beta_sum[kind] += betas[i]
    n_ok = config.n_reps - n_failed
    if n_ok == 0:
        raise CellFailureError(
            f"all {config.n_reps} repetitions failed for cell (rho={config.rho}, n={config.n}, p={config.p})"
        )
    stats = {}
    for kind in kinds:
        vals = np.asarray(sq[kind])
        spread = float(np.std(vals, ddof=1)) if n_ok > 1 else 0.0
        mean_beta = beta_sum[kind] / n_ok
        dev = mean_beta - beta_eff
        stats[kind] = EstimatorCellStats(
            sim_mse=float(np.mean(vals)),
            mse_spread=spread,
            sim_sb=float(dev @ dev),
            n_failed=n_failed,
        )
    return SimCellResult(
        config=config,
        n_ok=n_ok,
        n_failed=n_failed,
        stats=stats,
        per_rep_sq_err={k: np.asarray(v) for k, v in sq.items()} if collect_per_rep else None,
        per_rep_mle_risk=np.asarray(mle_risks) if collect_per_rep else None,
    )


@dataclass
class GridRow:
    config: SimConfig
    status: str  # "ok" or "failed"
    error: str | None
    result: SimCellResult | None


def run_grid(configs: list[SimConfig], threads: int | None = None) -> list[GridRow]:
    """Run every cell, continuing past failed ones with a marker row."""
    if not configs:
        raise DomainError("empty simulation grid")
    rows = []
    for config in configs:
        try:
            rows.append(GridRow(config=config, status="ok", error=None, result=run_cell(config, threads)))
        except CellFailureError as exc:
            rows.append(GridRow(config=config, status="failed", error=str(exc), result=None))
    return rows


def grid_configs(
    rhos,
    ns,
    ps,
    seed: int,
    n_reps: int = 1000,
    beta: str | np.ndarray = "unit",
    estimators: tuple[EstimatorKind, ...] = DEFAULT_ESTIMATORS,
    **kwargs,
) -> list[SimConfig]:
    """Cross product of (rho, n, p) cells with per-cell child seeds.

    Cell ``i`` (in rho-major order) uses ``derive_seed(seed, i)`` so the grid
    is reproducible as a whole while cells stay independent.
    """
    configs = []
    index = 0
    for rho in rhos:
        for n in ns:
            for p in ps:
                beta_true = beta_for(p, beta) if isinstance(beta, str) else np.asarray(beta, dtype=np.float64)
                configs.append(
                    SimConfig(
                        n=int(n),
                        p=int(p),
                        rho=float(rho),
                        beta_true=beta_true,
                        seed=derive_seed(seed, index),
                        n_reps=n_reps,
                        estimators=estimators,
                        **kwargs,
                    )
                )
                index += 1
    return configs
