"""Conjugate Bayesian ridge posterior intervals.

With prior ``beta ~ N(0, tau2 I)`` and known noise variance ``sigma2`` the
posterior is normal with mean ``(X'X + n lam I)^{-1} X'y`` and covariance
``sigma2 (X'X + n lam I)^{-1}``, where ``lam = sigma2 / (n tau2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.stats import norm

from .model import IntervalSet, StandardizedDesign


@dataclass(frozen=True)
class RidgePosterior:
    mean: np.ndarray
    covariance: np.ndarray
    lam: float
    sigma2: float
    n: int

    @property
    def prior_variance(self) -> float:
        """Prior variance implied by the penalty, ``sigma2 / (n lam)``."""
        return self.sigma2 / (self.n * self.lam)


def ridge_posterior(sd: StandardizedDesign, lam: float, sigma2: float) -> RidgePosterior:
    if not lam > 0:
        raise ValueError("ridge posterior needs lambda > 0")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    X, y, n = sd.Xs, sd.ys, sd.n
    A = X.T @ X + n * lam * np.eye(sd.p)
    cf = linalg.cho_factor(A)
    mean = linalg.cho_solve(cf, X.T @ y)
    cov = sigma2 * linalg.cho_solve(cf, np.eye(sd.p))
    return RidgePosterior(mean, (cov + cov.T) / 2, float(lam), float(sigma2), n)


def ridge_posterior_intervals(sd: StandardizedDesign, lam: float, sigma2: float, level: float = 0.8) -> IntervalSet:
    """Equal-tailed posterior intervals ``mean_j -/+ z * sqrt(cov_jj)`` on the standardized scale."""
    post = ridge_posterior(sd, lam, sigma2)
    z = norm.ppf(0.5 + level / 2)
    half = z * np.sqrt(np.diag(post.covariance))
    return IntervalSet(
        lower=post.mean - half,
        upper=post.mean + half,
        estimate=post.mean,
        level=level,
        names=sd.names,
    )


def ridge_sigma2(sd: StandardizedDesign, lam: float) -> float:
    """Residual variance with the effective degrees of freedom ``tr(H)`` subtracted."""
    X, y, n = sd.Xs, sd.ys, sd.n
    A = X.T @ X + n * lam * np.eye(sd.p)
    cf = linalg.cho_factor(A)
    beta = linalg.cho_solve(cf, X.T @ y)
    df = float(np.trace(linalg.cho_solve(cf, X.T @ X)))
    r = y - X @ beta
    return float(r @ r / max(n - df, 1.0))


def ridge_path(sd: StandardizedDesign, lambdas) -> np.ndarray:
    """Ridge coefficients for several penalties from one SVD; shape ``(len(lambdas), p)``."""
    U, d, Vt = np.linalg.svd(sd.Xs, full_matrices=False)
    uty = U.T @ sd.ys
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    shrink = d / (d * d + sd.n * lambdas[:, None])
    return (shrink * uty) @ Vt


def ridge_cross_validate(sd: StandardizedDesign, lambdas, folds: np.ndarray) -> tuple[float, np.ndarray]:
    """K-fold CV for the ridge penalty; returns ``(lambda_cv, cve)``."""
    from .model import Dataset, standardize

    lambdas = np.asarray(lambdas, dtype=float)
    X = sd.Xs * sd.col_scale + sd.col_center
    y = sd.ys + sd.y_center
    err = np.zeros(len(lambdas))
    for f in range(int(folds.max()) + 1):
        test = folds == f
        tr = standardize(Dataset(X[~test], y[~test]))
        B = ridge_path(tr, lambdas)
        pred = tr.y_center + tr.transform(X[test]) @ B.T
        err += ((y[test, None] - pred) ** 2).sum(axis=0)
    cve = err / sd.n
    return float(lambdas[int(np.argmin(cve))]), cve
