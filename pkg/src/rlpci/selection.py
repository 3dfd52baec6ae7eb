"""K-fold cross-validation for the lasso penalty and the residual variance estimate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Dataset, RngStream, StandardizedDesign, standardize
from .solver import LambdaGrid, LassoFit, fit_lasso_path


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class CvResult:
    lambdas: np.ndarray
    cve: np.ndarray
    cve_se: np.ndarray
    lambda_cv: float
    lambda_1se: float
    index_cv: int
    fold_assignment: np.ndarray

    def to_dict(self) -> dict:
        return {
            "lambda_cv": self.lambda_cv,
            "lambda_1se": self.lambda_1se,
            "index_cv": self.index_cv,
            "lambdas": self.lambdas.tolist(),
            "cve": self.cve.tolist(),
            "cve_se": self.cve_se.tolist(),
        }


def make_folds(n: int, k: int, rng: RngStream) -> np.ndarray:
    """Random partition of ``range(n)`` into ``k`` folds whose sizes differ by at most one."""
    if not 2 <= k <= n:
        raise SelectionError(f"need 2 <= k <= n, got k={k}, n={n}")
    return rng.generator().permutation(np.arange(n) % k)


def _refit_design(X: np.ndarray, y: np.ndarray, names=None) -> StandardizedDesign:
    return standardize(Dataset(X, y, names))


def cross_validate(
    sd: StandardizedDesign,
    grid: LambdaGrid,
    k: int = 10,
    rng: RngStream | None = None,
    folds: np.ndarray | None = None,
    tol: float = 1e-7,
) -> CvResult:
    """K-fold CV error for each grid value.

    The training split of each fold is re-standardized on its own, fitted on
    the full-data grid, and scored on the held-out rows in the original
    units.  Ties in the minimum go to the larger penalty.
    """
    n = sd.n
    if folds is None:
        if rng is None:
            raise SelectionError("either rng or folds must be supplied")
        folds = make_folds(n, k, rng)
    else:
        folds = np.asarray(folds)
        k = int(folds.max()) + 1
    # recover the raw-scale data so each training split is standardized afresh
    X = sd.Xs * sd.col_scale + sd.col_center
    y = sd.ys + sd.y_center
    lambdas = grid.values
    resid2 = np.empty((n, len(lambdas)))
    for f in range(k):
        test = folds == f
        train = ~test
        try:
            tr = _refit_design(X[train], y[train])
        except ValueError as exc:
            raise SelectionError(f"fold {f}: {exc}") from exc
        fit = fit_lasso_path(tr, lambdas, tol=tol)
        pred = tr.y_center + tr.transform(X[test]) @ fit.beta.T
        resid2[test] = (y[test, None] - pred) ** 2
    cve = resid2.mean(axis=0)
    cve_se = resid2.std(axis=0, ddof=1) / np.sqrt(n)
    i_min = int(np.argmin(cve))  # first index == largest lambda on ties
    thresh = cve[i_min] + cve_se[i_min]
    i_1se = int(np.flatnonzero(cve <= thresh)[0])
    return CvResult(lambdas, cve, cve_se, float(lambdas[i_min]), float(lambdas[i_1se]), i_min, folds)


@dataclass(frozen=True)
class SigmaEstimate:
    sigma2_hat: float
    df_used: int


def estimate_sigma2(sd: StandardizedDesign, fit_at_cv: LassoFit | np.ndarray, cv: CvResult | None = None) -> SigmaEstimate:
    """Residual variance ``||y - X b||^2 / (n - |S|)`` at the CV-chosen fit."""
    beta = fit_at_cv.coef if isinstance(fit_at_cv, LassoFit) else np.asarray(fit_at_cv, dtype=float)
    if cv is not None and isinstance(fit_at_cv, LassoFit) and not np.isclose(fit_at_cv.lam, cv.lambda_cv):
        raise SelectionError("fit is not at lambda_cv")
    s = int(np.count_nonzero(beta))
    df = sd.n - s
    if df < 1:
        raise SelectionError(
            f"{s} selected variables leave no residual degrees of freedom (n={sd.n}); choose a larger lambda"
        )
    r = sd.ys - sd.Xs @ beta
    return SigmaEstimate(float(r @ r / df), df)


def select_lambda(
    sd: StandardizedDesign,
    k: int = 10,
    rng: RngStream | None = None,
    nlambda: int = 100,
    ratio_min: float = 0.05,
    folds: np.ndarray | None = None,
) -> tuple[LambdaGrid, CvResult, LassoFit]:
    """Cross-validate on the default grid and return the fit at ``lambda_cv``.

    The returned fit is the warm-started path truncated at ``lambda_cv``, so
    its last point is the chosen solution.
    """
    grid = LambdaGrid.for_design(sd, nlambda, ratio_min)
    cv = cross_validate(sd, grid, k, rng, folds=folds)
    path = fit_lasso_path(sd, grid.values[: cv.index_cv + 1])
    return grid, cv, path
