import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_design
from rlpci.model import Dataset, standardize
from rlpci.solver import (
    ConvergenceError,
    LambdaGrid,
    SingularSystemError,
    cyclic_descent,
    fit_lasso,
    fit_lasso_path,
    fit_ridge,
    kkt_violation,
    lambda_max,
    lasso_objective,
    soft_threshold,
)


def test_soft_threshold():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    assert soft_threshold(0.5, 1.0) == 0.0


def test_grid_is_log_spaced_from_lambda_max(small_design):
    g = LambdaGrid.for_design(small_design, 30, 0.01)
    assert len(g) == 30
    assert g.values[0] == pytest.approx(lambda_max(small_design))
    assert g.values[-1] == pytest.approx(0.01 * g.values[0])
    np.testing.assert_allclose(np.diff(np.log(g.values)), np.log(0.01) / 29)
    with pytest.raises(ValueError):
        LambdaGrid.log_spaced(0.0)


def test_lambda_max_is_smallest_all_zero_penalty(small_design):
    lm = lambda_max(small_design)
    assert not fit_lasso(small_design, lm).coef.any()
    assert np.count_nonzero(fit_lasso(small_design, lm * 0.99).coef) == 1


def test_orthogonal_design_reduces_to_soft_thresholding():
    n, p = 50, 5
    g = np.random.default_rng(3)
    Z = g.standard_normal((n, p))
    Q, _ = np.linalg.qr(Z - Z.mean(axis=0))  # centered columns stay centered
    Xs = Q * np.sqrt(n)
    assert np.allclose(Xs.T @ Xs / n, np.eye(p), atol=1e-10)
    y = Xs @ np.array([1.0, -0.5, 0.2, 0.0, 0.05]) + 0.3 * g.standard_normal(n)
    sd = standardize(Dataset(Xs, y))
    z = sd.Xs.T @ sd.ys / n
    for lam in (0.01, 0.1, 0.3):
        expected = np.sign(z) * np.maximum(np.abs(z) - lam, 0)
        np.testing.assert_allclose(fit_lasso(sd, lam).coef, expected, atol=1e-10)


def test_zero_penalty_matches_least_squares(small_design):
    sd = small_design
    ols = np.linalg.lstsq(sd.Xs, sd.ys, rcond=None)[0]
    np.testing.assert_allclose(fit_lasso(sd, 0.0).coef, ols, atol=1e-8)
    path = fit_lasso_path(sd, np.concatenate([LambdaGrid.for_design(sd, 20, 0.01).values, [0.0]]))
    np.testing.assert_allclose(path.coef, ols, atol=1e-8)


def test_path_certificates_and_reference_agreement(wide_design):
    sd = wide_design
    grid = LambdaGrid.for_design(sd, 40, 0.05)
    path = fit_lasso_path(sd, grid)
    assert path.beta.shape == (40, sd.p)
    assert path.kkt_max_violation.max() <= 1e-6
    for k in (5, 20, 39):
        ref, hist = cyclic_descent(sd.Xs, sd.ys, grid.values[k], tol=1e-13)
        np.testing.assert_allclose(path.beta[k], ref, atol=1e-8)
        assert np.all(np.diff(hist) <= 1e-12)  # objective never increases
        assert lasso_objective(sd.Xs, sd.ys, path.beta[k], grid.values[k]) <= hist[-1] + 1e-12
        assert kkt_violation(sd.Xs, sd.ys, path.beta[k], grid.values[k]) <= 1e-6


def test_selected_sets_grow_roughly_along_path(wide_design):
    path = fit_lasso_path(wide_design, LambdaGrid.for_design(wide_design, 30, 0.05))
    sizes = [s.size for s in path.selected_sets]
    assert sizes[0] == 0 and sizes[-1] > 3
    assert path.at(10).lam == path.lambdas[10]


def test_non_convergence_is_reported(wide_design):
    with pytest.raises(ConvergenceError) as err:
        fit_lasso_path(wide_design, np.array([0.01]), max_iter=1, polish=False)
    assert err.value.grid_index == 0


def test_warm_start_does_not_change_solution(small_design):
    lam = 0.05
    cold = fit_lasso(small_design, lam).coef
    warm = fit_lasso(small_design, lam, beta0=np.ones(small_design.p)).coef
    np.testing.assert_allclose(cold, warm, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(10, 40),
    p=st.integers(1, 50),
    seed=st.integers(0, 10_000),
    ratio=st.floats(0.001, 1.0),
)
def test_kkt_holds_on_random_problems(n, p, seed, ratio):
    sd = make_design(n, p, seed=seed)
    lam = ratio * lambda_max(sd)
    fit = fit_lasso(sd, lam)
    assert fit.kkt_max_violation.max() <= 1e-6


def test_ridge_solution_and_singularity():
    sd = make_design(30, 5, seed=2)
    lam = 0.3
    expected = np.linalg.solve(sd.Xs.T @ sd.Xs + sd.n * lam * np.eye(5), sd.Xs.T @ sd.ys)
    np.testing.assert_allclose(fit_ridge(sd, lam).beta, expected, atol=1e-12)
    with pytest.raises(SingularSystemError):
        fit_ridge(make_design(10, 20, seed=1), 0.0)
    with pytest.raises(ValueError):
        fit_ridge(sd, -1.0)
