import numpy as np
import pytest

from rlpci.model import Dataset, RngStream, standardize
from rlpci.resampling import (
    DecompositionError,
    decompose_bias,
    pairs_bootstrap,
    scalar_bootstrap_gap,
    stability_selection,
)
from rlpci.sim import stability_spec
from rlpci.solver import fit_lasso, fit_ridge


def test_pairs_bootstrap_is_seeded_and_ordered(small_design):
    a = pairs_bootstrap(small_design, "lasso", 0.1, 30, 0.8, RngStream(5))
    b = pairs_bootstrap(small_design, "lasso", 0.1, 30, 0.8, RngStream(5))
    np.testing.assert_array_equal(a.estimates, b.estimates)
    assert a.estimates.shape == (30, small_design.p) and a.dropped == 0
    assert np.all(a.lower <= a.upper)
    np.testing.assert_allclose(a.lower, np.quantile(a.estimates, 0.1, axis=0))


def test_ridge_bootstrap_centers_near_estimate(small_design):
    run = pairs_bootstrap(small_design, "ridge", 0.05, 200, 0.8, RngStream(1))
    est = fit_ridge(small_design, 0.05).beta
    assert np.abs(run.estimates.mean(axis=0) - est).max() < 0.1
    iv = run.intervals(est)
    np.testing.assert_array_equal(iv.estimate, est)


def test_bootstrap_argument_checks(small_design):
    with pytest.raises(ValueError):
        pairs_bootstrap(small_design, "lasso", 0.1, 1)
    with pytest.raises(ValueError):
        pairs_bootstrap(small_design, "elastic", 0.1, 5)


def test_bias_components_sum_to_realized_bias():
    g = np.random.default_rng(2)
    n, p = 80, 20
    X = g.standard_normal((n, p))
    X[:, 1] = 0.5 * X[:, 0] + np.sqrt(0.75) * X[:, 1]
    beta = np.zeros(p)
    beta[0] = 2.0
    eps = g.standard_normal(n)
    sd = standardize(Dataset(X, X @ beta + eps))
    for lam in (0.05, 0.2):
        bhat = fit_lasso(sd, lam).coef
        d = decompose_bias(sd, bhat, beta * sd.col_scale, eps, 0, 1, np.arange(2, p), lam)
        assert abs(d.residual) < 1e-10
        assert d.total == pytest.approx(2.0 * sd.col_scale[0] - bhat[0])
        assert d.penalty == lam
    with pytest.raises(DecompositionError):
        decompose_bias(sd, -np.ones(p), beta, eps, 0, 1, np.arange(2, p), 0.1)


def test_scalar_bootstrap_gap_is_positive_on_average():
    gap = scalar_bootstrap_gap("ridge", 30, 1.0, 0.5, datasets=40, B=200, seed=3)
    assert gap.shape == (40,) and gap.mean() > 0
    with pytest.raises(ValueError):
        scalar_bootstrap_gap("other", 10, 1.0, 0.1, datasets=1, B=2)


def test_stability_selection_shapes_and_thread_invariance():
    spec = stability_spec(3, seed=4, n=30, p=40)
    a = stability_selection(spec, 3, 8, RngStream(4), threads=1)
    b = stability_selection(spec, 3, 8, RngStream(4), threads=3)
    np.testing.assert_array_equal(a.A_star, b.A_star)
    assert a.A.shape == (3, 40) and set(np.unique(a.A)) <= {0, 1}
    assert np.all((0 <= a.A_star) & (a.A_star <= 1))
