"""Numerical kernel for adaptive Huber regression.

Huber loss and its derivative, IRLS weights, the empirical objective and
gradient, soft-thresholding, and elementwise covariate clamping.  All
functions are pure; scalar inputs give scalar outputs, arrays give arrays.
Non-finite inputs are rejected eagerly instead of being propagated.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class RankDeficientError(ValueError):
    """A (weighted) Gram matrix is numerically singular."""


class DegenerateSampleError(ValueError):
    """A sample carries no usable variation (e.g. constant response)."""


class NumericalFailureError(RuntimeError):
    """An iterative scheme lost numerical viability."""


def _check_tau(tau):
    tau = float(tau)
    if not np.isfinite(tau) or tau <= 0:
        raise ValueError(f"tau must be positive and finite, got {tau!r}")
    return tau


def _check_finite(a, name):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must contain only finite values")


@dataclass(frozen=True)
class Dataset:
    """Regression sample: n-by-d design matrix ``x`` and response ``y``.

    With ``intercept=True`` a constant-1 column is appended to the working
    design; the corresponding coefficient is never penalized and never
    truncated.
    """

    x: np.ndarray
    y: np.ndarray
    intercept: bool = False

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        y = np.asarray(self.y, dtype=float).ravel()
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("x must be a nonempty 2-d matrix")
        if y.shape[0] != x.shape[0]:
            raise ValueError(
                f"y has length {y.shape[0]} but x has {x.shape[0]} rows"
            )
        _check_finite(x, "x")
        _check_finite(y, "y")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def p(self) -> int:
        """Number of fitted coefficients (d, plus one when intercept is on)."""
        return self.d + int(self.intercept)

    @cached_property
    def design(self) -> np.ndarray:
        """Working design matrix; includes the trailing 1s column if any."""
        if self.intercept:
            return np.column_stack([self.x, np.ones(self.n)])
        return self.x

    @cached_property
    def penalty_mask(self) -> np.ndarray:
        """Boolean mask over coefficients; False for the intercept slot."""
        mask = np.ones(self.p, dtype=bool)
        if self.intercept:
            mask[-1] = False
        return mask

    def subset(self, idx) -> "Dataset":
        """Row-subset copy (used by cross-validation folds)."""
        return Dataset(self.x[idx], self.y[idx], self.intercept)


@dataclass(frozen=True)
class HuberParams:
    """Robustification level ``tau``, l1 penalty ``lam`` (0 = unpenalized),
    and optional covariate clamp level ``varpi``."""

    tau: float
    lam: float = 0.0
    varpi: float | None = None

    def __post_init__(self):
        _check_tau(self.tau)
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam!r}")
        if self.varpi is not None and (
            not np.isfinite(self.varpi) or self.varpi <= 0
        ):
            raise ValueError(f"varpi must be positive, got {self.varpi!r}")


def _as_float_array(x, name):
    a = np.asarray(x, dtype=float)
    _check_finite(a, name)
    return a


def _maybe_scalar(out, like):
    if np.isscalar(like) or np.ndim(like) == 0:
        return float(out)
    return out


def _hloss(r, tau):
    # overflow-safe form: quadratic on min(|r|, tau), linear on the excess
    a = np.abs(r)
    m = np.minimum(a, tau)
    return 0.5 * m * m + tau * (a - m)


def huber_loss(x, tau):
    """Huber loss: x^2/2 for |x| <= tau, tau*|x| - tau^2/2 beyond."""
    tau = _check_tau(tau)
    a = _as_float_array(x, "x")
    return _maybe_scalar(_hloss(a, tau), x)


def huber_score(x, tau):
    """Derivative of the Huber loss: sign(x) * min(|x|, tau)."""
    tau = _check_tau(tau)
    a = _as_float_array(x, "x")
    return _maybe_scalar(np.sign(a) * np.minimum(np.abs(a), tau), x)


def irls_weight(r, tau):
    """Reweighting factor psi(r)/r: 1 on [-tau, tau] (and at 0), tau/|r| beyond."""
    tau = _check_tau(tau)
    a = np.abs(_as_float_array(r, "r"))
    out = np.where(a <= tau, 1.0, tau / np.where(a > tau, a, 1.0))
    return _maybe_scalar(out, r)


def residuals(beta, data: Dataset) -> np.ndarray:
    beta = _as_float_array(beta, "beta").ravel()
    if beta.shape[0] != data.p:
        raise ValueError(
            f"beta has length {beta.shape[0]}, expected {data.p}"
        )
    return data.y - data.design @ beta


def empirical_loss(beta, data: Dataset, tau) -> float:
    """Average Huber loss of the residuals (no penalty term)."""
    tau = _check_tau(tau)
    return float(np.mean(_hloss(residuals(beta, data), tau)))


def objective(beta, data: Dataset, params: HuberParams) -> float:
    """Penalized empirical objective; the intercept is never penalized."""
    value = empirical_loss(beta, data, params.tau)
    if params.lam > 0:
        beta = np.asarray(beta, dtype=float).ravel()
        value += params.lam * float(np.sum(np.abs(beta[data.penalty_mask])))
    return value


def gradient(beta, data: Dataset, tau) -> np.ndarray:
    """Gradient of the empirical loss: -mean of psi_tau(residual) * x_i."""
    tau = _check_tau(tau)
    r = residuals(beta, data)
    psi = np.sign(r) * np.minimum(np.abs(r), tau)
    return -(data.design.T @ psi) / data.n


def soft_threshold(v, kappa):
    """Elementwise shrink toward zero: sign(v) * max(|v| - kappa, 0)."""
    kappa = float(kappa)
    if not np.isfinite(kappa) or kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa!r}")
    a = _as_float_array(v, "v")
    # the trailing +0.0 normalizes -0.0 entries produced by sign()
    return _maybe_scalar(np.sign(a) * np.maximum(np.abs(a) - kappa, 0.0) + 0.0, v)


def truncate_matrix(x, varpi):
    """Clamp every entry of x to [-varpi, varpi]."""
    varpi = float(varpi)
    if not np.isfinite(varpi) or varpi <= 0:
        raise ValueError(f"varpi must be positive, got {varpi!r}")
    return np.clip(_as_float_array(x, "x"), -varpi, varpi)


def predict(beta, x, intercept: bool = False) -> np.ndarray:
    """Fitted values for new covariate rows under a fitted coefficient vector."""
    beta = np.asarray(beta, dtype=float).ravel()
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    d = x.shape[1]
    if beta.shape[0] != d + int(intercept):
        raise ValueError(
            f"beta has length {beta.shape[0]}, expected {d + int(intercept)}"
        )
    out = x @ beta[:d]
    if intercept:
        out = out + beta[-1]
    return out
