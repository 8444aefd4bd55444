"""Data-driven choice of the robustification and penalty levels: plug-in
rules driven by a crude scale estimate, k-fold cross-validation over constant
grids, and a Lepski-type adaptive selection over a geometric scale grid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import (
    Dataset,
    DegenerateSampleError,
    HuberParams,
    RankDeficientError,
    predict,
)
from .irls import FitResult, SolverConfig, fit_huber, fit_ols
from .lamm import fit_l1_huber


class TuningError(RuntimeError):
    """Every candidate in a tuning grid failed to produce a fit."""


@dataclass(frozen=True)
class TuningGrid:
    """Cross-validation grid: candidate constants for tau and lam, fold
    count, and the confidence parameter t (None means log n at use time)."""

    c_tau_candidates: tuple = (0.5, 1.0, 1.5)
    c_lambda_candidates: tuple = (0.5, 1.0, 1.5)
    folds: int = 3
    t: float | None = None

    def __post_init__(self):
        if len(self.c_tau_candidates) == 0 or len(self.c_lambda_candidates) == 0:
            raise ValueError("candidate lists must be nonempty")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if self.t is not None and not self.t > 0:
            raise ValueError("t must be positive")


def effective_sample_size(n: int, d: int, high_dim: bool) -> float:
    """n in low dimensions, n / log d in high dimensions."""
    if high_dim and d >= 2:
        return n / math.log(d)
    return float(n)


def estimate_sigma_crude(y) -> float:
    """Crude scale estimate: sqrt of the mean squared deviation of y."""
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] < 2:
        raise DegenerateSampleError("need at least two observations")
    var = float(np.mean((y - y.mean()) ** 2))
    if var == 0.0:
        raise DegenerateSampleError("response is constant; scale is zero")
    return math.sqrt(var)


def default_params(
    sigma_hat: float,
    n_eff: float,
    t: float,
    c_tau: float = 1.0,
    c_lambda: float = 1.0,
) -> HuberParams:
    """Plug-in rules assuming finite variance:

    tau = c_tau * sigma_hat * sqrt(n_eff / t)
    lam = c_lambda * sigma_hat * sqrt(t / n_eff)

    The penalty shrinks with the effective sample size, matching the rate
    theory; see the README note on the orientation of this formula.
    """
    if sigma_hat <= 0 or n_eff <= 0 or t <= 0:
        raise ValueError("sigma_hat, n_eff and t must all be positive")
    if c_tau <= 0 or c_lambda <= 0:
        raise ValueError("c_tau and c_lambda must be positive")
    root = math.sqrt(n_eff / t)
    return HuberParams(tau=c_tau * sigma_hat * root, lam=c_lambda * sigma_hat / root)


def moment_estimate(residuals, delta: float) -> float:
    """(1+delta)-th absolute central sample moment of the residuals."""
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    r = np.asarray(residuals, dtype=float).ravel()
    if r.shape[0] < 2:
        raise DegenerateSampleError("need at least two residuals")
    return float(np.mean(np.abs(r - r.mean()) ** (1.0 + delta)))


def cross_validate(
    data: Dataset,
    grid: TuningGrid | None = None,
    high_dim: bool = False,
    seed=0,
    cfg: SolverConfig | None = None,
):
    """Pick (c_tau, c_lambda) by k-fold cross-validation on held-out MAE.

    Rows are shuffled once with the given seed and split into contiguous
    blocks.  Ties are broken toward the larger c_tau, then the larger
    c_lambda, so the result does not depend on grid ordering.  Failed cells
    are recorded and skipped; if every cell fails a TuningError is raised.

    Returns (c_tau, c_lambda, refit-on-full-data FitResult, cv_table).
    """
    grid = grid or TuningGrid()
    n = data.n
    if grid.folds > n:
        raise ValueError(f"folds ({grid.folds}) exceeds sample size ({n})")
    t = grid.t if grid.t is not None else math.log(n)
    sigma = estimate_sigma_crude(data.y)
    n_eff = effective_sample_size(n, data.d, high_dim)

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    blocks = np.array_split(order, grid.folds)
    splits = []
    for k in range(grid.folds):
        test = blocks[k]
        train = np.concatenate([blocks[j] for j in range(grid.folds) if j != k])
        splits.append((train, test))

    # In the unpenalized (low-dimensional) branch the fit depends only on
    # c_tau, so fold fits are cached across the c_lambda axis.
    fold_cache: dict = {}

    def fold_mae(c_tau, c_lambda, k):
        key = (c_tau, k) if not high_dim else (c_tau, c_lambda, k)
        if key in fold_cache:
            return fold_cache[key]
        train, test = splits[k]
        params = default_params(sigma, n_eff, t, c_tau, c_lambda)
        sub = data.subset(train)
        if high_dim:
            fit = fit_l1_huber(sub, params, cfg)
        else:
            fit = fit_huber(sub, params.tau, cfg)
        pred = predict(fit.beta, data.x[test], data.intercept)
        value = float(np.mean(np.abs(data.y[test] - pred)))
        fold_cache[key] = value
        return value

    table = []
    for c_tau in grid.c_tau_candidates:
        for c_lambda in grid.c_lambda_candidates:
            maes, failed = [], False
            for k in range(grid.folds):
                try:
                    maes.append(fold_mae(c_tau, c_lambda, k))
                except (RankDeficientError, ValueError, RuntimeError):
                    failed = True
                    break
            table.append(
                {
                    "c_tau": c_tau,
                    "c_lambda": c_lambda,
                    "mean_mae": float(np.mean(maes)) if not failed else math.nan,
                    "fold_maes": tuple(maes) if not failed else (),
                    "failed": failed,
                }
            )

    viable = [row for row in table if not row["failed"]]
    if not viable:
        raise TuningError("every cross-validation cell failed")
    best = min(viable, key=lambda r: (r["mean_mae"], -r["c_tau"], -r["c_lambda"]))
    params = default_params(sigma, n_eff, t, best["c_tau"], best["c_lambda"])
    if high_dim:
        fit = fit_l1_huber(data, params, cfg)
    else:
        fit = fit_huber(data, params.tau, cfg)
    return best["c_tau"], best["c_lambda"], fit, table


@dataclass(frozen=True)
class LepskiGrid:
    """Geometric scale grid sigma_j = sigma_min * a**j, kept while
    sigma_j < a * sigma_max."""

    sigma_min: float
    sigma_max: float
    t: float
    a: float = 1.5

    def __post_init__(self):
        if not 0 < self.sigma_min <= self.sigma_max:
            raise ValueError("need 0 < sigma_min <= sigma_max")
        if not self.a > 1:
            raise ValueError("grid ratio a must exceed 1")
        if not self.t > 0:
            raise ValueError("t must be positive")

    @cached_property
    def grid(self) -> tuple:
        out, j = [], 0
        while True:
            sigma = self.sigma_min * self.a**j
            if sigma >= self.a * self.sigma_max:
                break
            out.append(sigma)
            j += 1
        return tuple(out)


def choose_lepski_index(distances: np.ndarray, thresholds) -> tuple[int, bool]:
    """Selection rule on precomputed pairwise distances.

    Returns the smallest index j whose distance to every later grid point
    stays below that j's threshold; falls back to the last index (with a
    warning flag) when no index qualifies.
    """
    m = len(thresholds)
    for j in range(m):
        if all(distances[j, k] <= thresholds[j] for k in range(j + 1, m)):
            return j, False
    return m - 1, True


def lepski_select(
    data: Dataset,
    grid: LepskiGrid | None = None,
    K: float = 3.0,
    a: float = 1.5,
    t: float | None = None,
    cfg: SolverConfig | None = None,
):
    """Adaptive choice of the robustification level over a geometric grid.

    Fits one unpenalized Huber regression per grid point with
    tau_j = sigma_j * sqrt(n / t), then selects the smallest j whose
    rescaled distances to all later fits stay within
    8 * L * sigma_j * sqrt(d) * sqrt(t / n), where L is the largest
    sup-norm of the whitened covariate rows.  When ``grid`` is omitted it is
    built from the OLS residual scale: sigma_min = sigma / K,
    sigma_max = K * sigma.

    Returns (selected FitResult, selected index, diagnostics dict).
    """
    design, y, n = data.design, data.y, data.n
    p = data.p
    if n <= p:
        raise RankDeficientError(
            f"need more rows ({n}) than coefficients ({p})"
        )
    gram = design.T @ design / n
    evals, vecs = np.linalg.eigh(gram)
    lo, hi = float(evals[0]), float(evals[-1])
    if hi <= 0 or lo <= 1e-12 * hi:
        cond = np.inf if lo <= 0 else hi / lo
        raise RankDeficientError(
            f"gram matrix is numerically singular (condition number {cond:.3e})"
        )
    root = (vecs * np.sqrt(evals)) @ vecs.T
    inv_root = (vecs / np.sqrt(evals)) @ vecs.T
    l_tilde = float(np.max(np.abs(design @ inv_root)))

    if t is None:
        t = grid.t if grid is not None else math.log(n)
    if grid is None:
        ols = fit_ols(data)
        rss = float(np.sum((y - design @ ols.beta) ** 2))
        sigma_hat = math.sqrt(rss / (n - p))
        grid = LepskiGrid(sigma_hat / K, K * sigma_hat, t=t, a=a)

    sigmas = np.asarray(grid.grid)
    taus = sigmas * math.sqrt(n / t)
    fits = [fit_huber(data, tau, cfg) for tau in taus]

    m = len(fits)
    distances = np.zeros((m, m))
    for j in range(m):
        for k in range(j + 1, m):
            diff = root @ (fits[k].beta - fits[j].beta)
            distances[j, k] = distances[k, j] = float(np.linalg.norm(diff))
    thresholds = 8.0 * l_tilde * sigmas * math.sqrt(p) * math.sqrt(t / n)

    j_hat, fallback = choose_lepski_index(distances, thresholds)
    diagnostics = {
        "sigmas": tuple(float(s) for s in sigmas),
        "taus": tuple(float(v) for v in taus),
        "thresholds": tuple(float(v) for v in thresholds),
        "distances": distances,
        "l_tilde": l_tilde,
        "t": float(t),
        "fallback": fallback,
    }
    return fits[j_hat], j_hat, diagnostics
