"""Unpenalized Huber regression via iteratively reweighted least squares,
plus an ordinary least squares baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Dataset,
    RankDeficientError,
    _check_tau,
    empirical_loss,
    gradient,
    irls_weight,
)

# Relative eigenvalue floor below which a Gram matrix is treated as singular.
_RANK_EPS = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Iteration knobs shared by the solvers.

    tol       stopping threshold on the coefficient change ||b_new - b_old||_2
    max_iter  outer-iteration cap; exceeding it is a soft failure
    phi0      initial isotropic quadratic parameter (majorization solver only)
    gamma_u   inflation factor applied when the quadratic surrogate fails
    """

    tol: float = 1e-4
    max_iter: int = 5000
    phi0: float = 1e-4
    gamma_u: float = 2.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.phi0 > 0:
            raise ValueError("phi0 must be positive")
        if not self.gamma_u > 1:
            raise ValueError("gamma_u must exceed 1")


# Tighter coefficient tolerance for IRLS: each sweep is a full least-squares
# solve, and the dimension is small in the unpenalized regime.
IRLS_DEFAULTS = SolverConfig(tol=1e-8, max_iter=500)
LAMM_DEFAULTS = SolverConfig(tol=1e-4, max_iter=5000)


@dataclass(frozen=True)
class FitResult:
    """Outcome of a regression fit.

    beta        fitted coefficients (working-design order; intercept last)
    iterations  number of outer iterations performed
    converged   whether the stopping criterion fired before max_iter
    objective   final (penalized, where applicable) objective value
    grad_norm   l2 norm of the smooth-loss gradient at ``beta``
    trajectory  objective value per iteration, when recorded
    max_inner   largest inner-majorization retry count (LAMM only)
    """

    beta: np.ndarray
    iterations: int
    converged: bool
    objective: float
    grad_norm: float
    trajectory: tuple | None = None
    max_inner: int | None = None


def solve_spd(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a symmetric positive-definite system, rejecting singular input."""
    evals = np.linalg.eigvalsh(gram)
    lo, hi = float(evals[0]), float(evals[-1])
    if hi <= 0 or lo <= _RANK_EPS * hi:
        cond = np.inf if lo <= 0 else hi / lo
        raise RankDeficientError(
            f"gram matrix is numerically singular (condition number {cond:.3e})"
        )
    return np.linalg.solve(gram, rhs)


def fit_ols(data: Dataset) -> FitResult:
    """Ordinary least squares via the normal equations."""
    design, y, n = data.design, data.y, data.n
    gram = design.T @ design / n
    beta = solve_spd(gram, design.T @ y / n)
    resid = y - design @ beta
    grad = -(design.T @ resid) / n
    return FitResult(
        beta=beta,
        iterations=1,
        converged=True,
        objective=0.5 * float(np.mean(resid**2)),
        grad_norm=float(np.linalg.norm(grad)),
    )


def fit_huber(data: Dataset, tau, cfg: SolverConfig | None = None) -> FitResult:
    """Huber regression solved by iteratively reweighted least squares.

    Each sweep solves the weighted normal equations with weights
    ``irls_weight(residual, tau)``; this majorizes the Huber objective, so the
    recorded loss trajectory is nonincreasing.  Warm-started at the OLS
    solution (zero vector if OLS is rank-deficient).  Stops once the
    coefficient change drops below ``cfg.tol`` and the gradient is small.
    """
    cfg = cfg or IRLS_DEFAULTS
    tau = _check_tau(tau)
    design, y, n = data.design, data.y, data.n

    try:
        beta = fit_ols(data).beta
    except RankDeficientError:
        beta = np.zeros(data.p)

    grad_tol = 1e-6 * (1.0 + float(np.linalg.norm(y)))
    traj = [empirical_loss(beta, data, tau)]
    converged = False
    iterations = 0

    for _ in range(cfg.max_iter):
        resid = y - design @ beta
        w = irls_weight(resid, tau)
        gram = (design * w[:, None]).T @ design / n
        beta_new = solve_spd(gram, design.T @ (w * y) / n)
        step = float(np.linalg.norm(beta_new - beta))
        beta = beta_new
        iterations += 1
        traj.append(empirical_loss(beta, data, tau))
        if step <= cfg.tol:
            grad_norm = float(np.linalg.norm(gradient(beta, data, tau)))
            if grad_norm <= grad_tol:
                converged = True
                break

    grad_norm = float(np.linalg.norm(gradient(beta, data, tau)))
    return FitResult(
        beta=beta,
        iterations=iterations,
        converged=converged,
        objective=traj[-1],
        grad_norm=grad_norm,
        trajectory=tuple(traj),
    )
