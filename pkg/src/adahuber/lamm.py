"""l1-regularized Huber regression via local adaptive majorize-minimization:
isotropic quadratic surrogate, soft-threshold update, and adaptive inflation
of the quadratic parameter until the surrogate locally majorizes the loss."""

from __future__ import annotations

import numpy as np

from .core import (
    Dataset,
    HuberParams,
    NumericalFailureError,
    _check_tau,
    empirical_loss,
    gradient,
    soft_threshold,
)
from .irls import LAMM_DEFAULTS, FitResult, SolverConfig

# Absolute slack absorbing float noise in the surrogate-vs-loss comparison.
_MAJORIZE_SLACK = 1e-12
_PHI_OVERFLOW = 1e300

# Stationarity tolerance guaranteed for returned solutions.
KKT_TOL = 1e-4


def lamm_step(beta, data: Dataset, tau, lam, phi) -> np.ndarray:
    """One proximal update: soft-threshold the gradient step at lam/phi.

    The intercept coordinate, when present, takes the plain gradient step
    without thresholding.
    """
    tau = _check_tau(tau)
    if not phi > 0:
        raise ValueError(f"phi must be positive, got {phi!r}")
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam!r}")
    beta = np.asarray(beta, dtype=float).ravel()
    v = beta - gradient(beta, data, tau) / phi
    out = soft_threshold(v, lam / phi)
    if data.intercept:
        out[-1] = v[-1]
    return out


def majorization_holds(beta_new, beta_old, data: Dataset, tau, phi) -> bool:
    """Whether the isotropic quadratic surrogate at beta_old sits above the
    empirical loss at beta_new (up to float slack)."""
    tau = _check_tau(tau)
    if not phi > 0:
        raise ValueError(f"phi must be positive, got {phi!r}")
    beta_new = np.asarray(beta_new, dtype=float).ravel()
    beta_old = np.asarray(beta_old, dtype=float).ravel()
    diff = beta_new - beta_old
    surrogate = (
        empirical_loss(beta_old, data, tau)
        + float(gradient(beta_old, data, tau) @ diff)
        + 0.5 * phi * float(diff @ diff)
    )
    return surrogate >= empirical_loss(beta_new, data, tau) - _MAJORIZE_SLACK


def _kkt_ok(grad, beta, mask, lam, tol) -> bool:
    zero = mask & (beta == 0.0)
    active = mask & (beta != 0.0)
    free = ~mask
    if np.any(np.abs(grad[zero]) > lam + tol):
        return False
    if np.any(np.abs(grad[active] + lam * np.sign(beta[active])) > tol * (1.0 + lam)):
        return False
    return not np.any(np.abs(grad[free]) > tol * (1.0 + lam))


def kkt_satisfied(beta, data: Dataset, tau, lam, tol: float = KKT_TOL) -> bool:
    """Check l1 subgradient optimality of ``beta``.

    Zero coordinates need |grad_j| <= lam + tol; active coordinates need
    |grad_j + lam*sign(beta_j)| <= tol*(1+lam); the unpenalized intercept
    needs |grad_j| <= tol*(1+lam).
    """
    beta = np.asarray(beta, dtype=float).ravel()
    grad = gradient(beta, data, tau)
    return _kkt_ok(grad, beta, data.penalty_mask, float(lam), float(tol))


# validation-free kernels for the inner loop
def _hub(r, tau):
    a = np.abs(r)
    m = np.minimum(a, tau)
    return 0.5 * m * m + tau * (a - m)


def _psi(r, tau):
    return np.sign(r) * np.minimum(np.abs(r), tau)


def fit_l1_huber(
    data: Dataset, params: HuberParams, cfg: SolverConfig | None = None
) -> FitResult:
    """Solve the l1-penalized Huber problem by majorize-minimization.

    Starts from the zero vector.  Each outer iteration warms the quadratic
    parameter phi down by one gamma_u factor (never below phi0), then inflates
    it until the surrogate majorizes the loss at the candidate; the accepted
    step therefore never increases the penalized objective.  Iterates until
    the coefficient change is below ``cfg.tol`` and the returned point passes
    the stationarity check at ``min(KKT_TOL, cfg.tol)``.
    """
    cfg = cfg or LAMM_DEFAULTS
    tau, lam = params.tau, params.lam
    design, y, n = data.design, data.y, data.n
    mask = data.penalty_mask

    beta = np.zeros(data.p)
    phi_prev = cfg.phi0
    kkt_tol = min(KKT_TOL, cfg.tol)

    loss = empirical_loss(beta, data, tau)
    traj = [loss]
    step = np.inf
    converged = False
    iterations = 0
    max_inner = 0
    grad = gradient(beta, data, tau)

    for _ in range(cfg.max_iter):
        if step <= cfg.tol and _kkt_ok(grad, beta, mask, lam, kkt_tol):
            converged = True
            break

        phi = max(cfg.phi0, phi_prev / cfg.gamma_u)
        inner = 1
        while True:
            v = beta - grad / phi
            cand = soft_threshold(v, lam / phi)
            if data.intercept:
                cand[-1] = v[-1]
            diff = cand - beta
            loss_new = float(np.mean(_hub(y - design @ cand, tau)))
            surrogate = loss + float(grad @ diff) + 0.5 * phi * float(diff @ diff)
            if surrogate >= loss_new - _MAJORIZE_SLACK:
                break
            phi *= cfg.gamma_u
            inner += 1
            if phi > _PHI_OVERFLOW:
                raise NumericalFailureError(
                    "quadratic parameter overflow during majorization"
                )
        max_inner = max(max_inner, inner)
        phi_prev = phi

        step = float(np.linalg.norm(diff))
        beta = cand
        loss = loss_new
        traj.append(loss + lam * float(np.sum(np.abs(beta[mask]))))
        iterations += 1
        grad = -(design.T @ _psi(y - design @ beta, tau)) / n

    penalized = loss + lam * float(np.sum(np.abs(beta[mask])))
    return FitResult(
        beta=beta,
        iterations=iterations,
        converged=converged,
        objective=penalized,
        grad_norm=float(np.linalg.norm(grad)),
        trajectory=tuple(traj),
        max_inner=max_inner,
    )
