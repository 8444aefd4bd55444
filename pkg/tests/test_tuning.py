import math

import numpy as np
import pytest

from adahuber.core import Dataset, DegenerateSampleError, RankDeficientError
from adahuber.lamm import fit_l1_huber
from adahuber.core import HuberParams
from adahuber.tuning import (
    LepskiGrid,
    TuningGrid,
    choose_lepski_index,
    cross_validate,
    default_params,
    effective_sample_size,
    estimate_sigma_crude,
    lepski_select,
    moment_estimate,
)


# ------------------------------------------------------------- scale estimate

def test_sigma_crude_degenerate():
    with pytest.raises(DegenerateSampleError):
        estimate_sigma_crude([1.0, 1.0, 1.0, 1.0])
    with pytest.raises(DegenerateSampleError):
        estimate_sigma_crude([2.0])


def test_sigma_crude_hand_values():
    assert estimate_sigma_crude([-1.0, 1.0]) == pytest.approx(1.0)
    assert estimate_sigma_crude([0.0, 0.0, 3.0, 3.0]) == pytest.approx(1.5)


# -------------------------------------------------------------- plug-in rules

def test_default_params_tau_arithmetic():
    assert default_params(1.0, 100, 4.0, c_tau=1.0).tau == pytest.approx(5.0)
    assert default_params(2.0, 400, 4.0, c_tau=0.5).tau == pytest.approx(10.0)


def test_default_params_lambda_shrinks_with_n():
    # penalty follows the (t / n_eff)^(1/2) orientation
    assert default_params(1.0, 100, 4.0, c_lambda=1.0).lam == pytest.approx(0.2)
    big = default_params(1.0, 100, 4.0).lam
    small = default_params(1.0, 10_000, 4.0).lam
    assert small < big


@pytest.mark.parametrize("scale", [0.5, 2.0, 7.5])
def test_default_params_homogeneous_in_sigma(scale):
    base = default_params(1.0, 64.0, 2.0, c_tau=1.3, c_lambda=0.7)
    scaled = default_params(scale, 64.0, 2.0, c_tau=1.3, c_lambda=0.7)
    assert scaled.tau == pytest.approx(scale * base.tau, rel=1e-12)
    assert scaled.lam == pytest.approx(scale * base.lam, rel=1e-12)


def test_effective_sample_size():
    assert effective_sample_size(100, 5, high_dim=False) == 100.0
    assert effective_sample_size(100, 5, high_dim=True) == pytest.approx(
        100 / math.log(5)
    )


# ------------------------------------------------------------ moment estimate

def test_moment_estimate_hand_values():
    assert moment_estimate([-1.0, 1.0], 1.0) == pytest.approx(1.0)
    assert moment_estimate([0.0, 0.0, 0.0, 4.0], 1.0) == pytest.approx(3.0)


def test_moment_estimate_equals_biased_variance(rng):
    v = rng.standard_normal(200) * 2.5
    assert moment_estimate(v, 1.0) == pytest.approx(np.var(v), rel=1e-12)


def test_moment_estimate_validation():
    with pytest.raises(ValueError):
        moment_estimate([1.0, 2.0], 1.5)
    with pytest.raises(DegenerateSampleError):
        moment_estimate([1.0], 0.5)


# ------------------------------------------------------------ cross-validation

def make_sparse_instance(rng, n=100, d=20, noise=0.0):
    x = rng.standard_normal((n, d))
    beta = np.zeros(d)
    beta[:5] = [5.0, -2.0, 0.0, 0.0, 3.0]
    y = x @ beta + noise * rng.standard_normal(n)
    return Dataset(x, y), beta


def test_cv_singleton_grid_is_forced(rng):
    data, _ = make_sparse_instance(rng, noise=1.0)
    grid = TuningGrid((1.0,), (1.0,), folds=3)
    c_tau, c_lambda, fit, table = cross_validate(data, grid, high_dim=False, seed=1)
    assert (c_tau, c_lambda) == (1.0, 1.0)
    assert len(table) == 1
    assert fit.converged


def test_cv_noiseless_recovery(rng):
    data, beta = make_sparse_instance(rng, noise=0.0)
    grid = TuningGrid((0.5, 1.0, 1.5), (0.5, 1.0, 1.5), folds=3)
    _, _, fit, table = cross_validate(data, grid, high_dim=False, seed=7)
    support = np.flatnonzero(np.abs(fit.beta) > 1e-6)
    assert set(support) == {0, 1, 4}
    assert np.linalg.norm(fit.beta - beta) <= 1e-2
    # independent check: a direct l1 run at a small penalty finds the same support
    direct = fit_l1_huber(data, HuberParams(tau=50.0, lam=1e-4))
    assert set(np.flatnonzero(np.abs(direct.beta) > 1e-3)) == {0, 1, 4}


def test_cv_table_shape(rng):
    data, _ = make_sparse_instance(rng, noise=1.0)
    grid = TuningGrid((0.5, 1.0, 1.5), (0.5, 1.0, 1.5), folds=3)
    out = cross_validate(data, grid, high_dim=False, seed=3)
    assert len(out[3]) == 9


def test_cv_deterministic_and_order_invariant(rng):
    data, _ = make_sparse_instance(rng, n=60, d=8, noise=2.0)
    g1 = TuningGrid((0.5, 1.0, 1.5), (1.0,), folds=3)
    g2 = TuningGrid((1.5, 0.5, 1.0), (1.0,), folds=3)
    r1 = cross_validate(data, g1, high_dim=False, seed=11)
    r1b = cross_validate(data, g1, high_dim=False, seed=11)
    r2 = cross_validate(data, g2, high_dim=False, seed=11)
    assert r1[0] == r1b[0] == r2[0]
    assert np.array_equal(r1[2].beta, r2[2].beta)


def test_cv_high_dim_branch(rng):
    data, beta = make_sparse_instance(rng, n=80, d=120, noise=1.0)
    grid = TuningGrid((1.0,), (0.5, 1.0), folds=3)
    c_tau, c_lambda, fit, table = cross_validate(data, grid, high_dim=True, seed=5)
    assert len(table) == 2
    assert np.linalg.norm(fit.beta - beta) < np.linalg.norm(beta)


def test_cv_folds_exceeding_n(rng):
    x = rng.standard_normal((10, 2))
    data = Dataset(x, x @ np.array([1.0, -1.0]) + rng.standard_normal(10))
    grid = TuningGrid((1.0,), (1.0,), folds=11)
    with pytest.raises(ValueError):
        cross_validate(data, grid)


def test_tuning_grid_validation():
    with pytest.raises(ValueError):
        TuningGrid((), (1.0,))
    with pytest.raises(ValueError):
        TuningGrid((1.0,), (1.0,), folds=1)
    with pytest.raises(ValueError):
        TuningGrid((1.0,), (1.0,), t=0.0)


# --------------------------------------------------------------------- lepski

def test_lepski_grid_contents():
    grid = LepskiGrid(1.0, 5.0, t=2.0, a=1.5)
    sigmas = np.asarray(grid.grid)
    assert sigmas[0] == 1.0
    assert np.all(sigmas < 1.5 * 5.0)
    assert len(sigmas) <= 1 + math.log(5.0, 1.5) + 1


def test_lepski_grid_validation():
    with pytest.raises(ValueError):
        LepskiGrid(2.0, 1.0, t=1.0)
    with pytest.raises(ValueError):
        LepskiGrid(1.0, 2.0, t=1.0, a=1.0)
    with pytest.raises(ValueError):
        LepskiGrid(1.0, 2.0, t=0.0)


def test_lepski_singleton_grid(rng):
    x = rng.standard_normal((100, 3))
    y = x @ np.array([1.0, 2.0, -1.0]) + rng.standard_normal(100)
    data = Dataset(x, y)
    fit, j_hat, diag = lepski_select(data, grid=LepskiGrid(1.0, 1.0, t=math.log(100)))
    assert j_hat == 0
    assert not diag["fallback"]


def test_lepski_noiseless_selects_first(rng):
    x = rng.standard_normal((80, 4))
    beta = np.array([1.0, -1.0, 2.0, 0.5])
    data = Dataset(x, x @ beta)
    fit, j_hat, diag = lepski_select(data, grid=LepskiGrid(0.5, 4.0, t=math.log(80)))
    assert j_hat == 0
    assert np.allclose(fit.beta, beta, atol=1e-6)


def test_lepski_selection_replay_monotone(rng):
    m = 6
    for _ in range(20):
        dist = np.abs(rng.standard_normal((m, m)))
        dist = (dist + dist.T) / 2
        np.fill_diagonal(dist, 0.0)
        sigmas = np.geomspace(0.5, 4.0, m)
        base_thresholds = 0.8 * sigmas
        j0, _ = choose_lepski_index(dist, base_thresholds)
        for c in (1.5, 3.0, 10.0):
            j_scaled, _ = choose_lepski_index(dist, c * base_thresholds)
            assert j_scaled <= j0


def test_lepski_requires_overdetermined(rng):
    data = Dataset(rng.standard_normal((4, 6)), rng.standard_normal(4))
    with pytest.raises(RankDeficientError):
        lepski_select(data)


def test_lepski_defaults_from_data(rng):
    x = rng.standard_normal((200, 4))
    y = x @ np.array([2.0, -1.0, 0.5, 1.0]) + rng.standard_normal(200)
    fit, j_hat, diag = lepski_select(Dataset(x, y))
    sigmas = diag["sigmas"]
    # default grid spans sigma_hat / 3 up to (but below) 1.5 * 3 * sigma_hat
    span = sigmas[-1] / sigmas[0]
    assert 6.0 <= span < 13.5
    assert len(sigmas) >= 5
    assert fit.converged
    assert diag["t"] == pytest.approx(math.log(200))
