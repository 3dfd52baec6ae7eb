"""Pairs bootstrap, bootstrap-bias accounting and bootstrap stability selection."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model import ConstantColumnError, Dataset, IntervalSet, RngStream, StandardizedDesign, standardize
from .solver import fit_lasso, fit_ridge

log = logging.getLogger(__name__)


def raw_data(sd: StandardizedDesign) -> tuple[np.ndarray, np.ndarray]:
    return sd.Xs * sd.col_scale + sd.col_center, sd.ys + sd.y_center


def resample_indices(n: int, rng: RngStream) -> np.ndarray:
    return rng.generator().integers(0, n, size=n)


@dataclass(frozen=True)
class BootstrapRun:
    B: int
    estimates: np.ndarray  # (kept, p), original standardized scale
    lower: np.ndarray
    upper: np.ndarray
    level: float
    resample_indices: np.ndarray
    dropped: int

    def intervals(self, estimate: np.ndarray | None = None, names=None) -> IntervalSet:
        est = self.estimates.mean(axis=0) if estimate is None else estimate
        return IntervalSet(self.lower, self.upper, est, self.level, names=names)


def _fit(sd: StandardizedDesign, estimator: str, lam: float, beta0=None) -> np.ndarray:
    if estimator == "lasso":
        return fit_lasso(sd, lam, beta0=beta0).coef
    if estimator == "ridge":
        return fit_ridge(sd, lam).beta
    raise ValueError(f"unknown estimator {estimator!r}")


def bootstrap_fit(X, y, idx, estimator, lam, beta0=None) -> tuple[StandardizedDesign, np.ndarray]:
    """Re-standardize the resampled rows and refit; returns (design, standardized coefficients)."""
    sdb = standardize(Dataset(X[idx], y[idx]))
    return sdb, _fit(sdb, estimator, lam, beta0)


def pairs_bootstrap(
    sd: StandardizedDesign,
    estimator: str,
    lam: float,
    B: int,
    level: float = 0.8,
    rng: RngStream | None = None,
    beta_start: np.ndarray | None = None,
) -> BootstrapRun:
    """Percentile intervals from ``B`` row-resampled refits at a fixed penalty.

    Each resample is standardized afresh; its coefficients are mapped back
    through the raw scale onto the original standardized scale.  Resamples
    that produce a constant column are dropped and counted.
    """
    if B < 2:
        raise ValueError("need at least two bootstrap replications")
    rng = rng or RngStream(0)
    X, y = raw_data(sd)
    n, p = X.shape
    est = []
    all_idx = np.empty((B, n), dtype=np.int64)
    dropped = 0
    for b in range(B):
        idx = resample_indices(n, rng.child(b))
        all_idx[b] = idx
        try:
            sdb, bb = bootstrap_fit(X, y, idx, estimator, lam, beta_start)
        except ConstantColumnError:
            dropped += 1
            continue
        est.append(bb / sdb.col_scale * sd.col_scale)
    if dropped:
        log.warning("%d of %d bootstrap replications dropped (constant column)", dropped, B)
    if len(est) < 2:
        raise RuntimeError("fewer than two usable bootstrap replications")
    E = np.array(est)
    alpha = 1.0 - level
    lo, up = np.quantile(E, [alpha / 2, 1 - alpha / 2], axis=0)
    return BootstrapRun(B, E, lo, up, level, all_idx, dropped)


class DecompositionError(ValueError):
    """Target variable is not selected with a positive estimate."""


@dataclass(frozen=True)
class BiasDecomposition:
    """Bias of a selected, positive coefficient split into four additive parts.

    Positive values mean bias toward zero, so
    ``irreducible + from_B + from_N + penalty == total == truth_A - estimate_A``.
    """

    irreducible: float
    from_B: float
    from_N: float
    penalty: float
    total: float

    @property
    def residual(self) -> float:
        return self.irreducible + self.from_B + self.from_N + self.penalty - self.total

    def as_row(self) -> dict:
        return {
            "irreducible": self.irreducible,
            "from_B": self.from_B,
            "from_N": self.from_N,
            "penalty": self.penalty,
            "total": self.total,
        }


def decompose_bias(
    sd: StandardizedDesign,
    beta_hat: np.ndarray,
    truth: np.ndarray,
    eps: np.ndarray,
    A: int,
    B_idx,
    N_idx,
    lam: float,
) -> BiasDecomposition:
    """Split ``truth[A] - beta_hat[A]`` using the active stationarity condition for ``A``.

    ``beta_hat`` and ``truth`` are on the standardized scale of ``sd``;
    ``eps`` is the noise vector of the generating model (it is centered
    here, matching the centered response).
    """
    beta_hat = np.asarray(beta_hat, dtype=float)
    if not beta_hat[A] > 0:
        raise DecompositionError(f"variable {A} is not selected with a positive estimate")
    X, n = sd.Xs, sd.n
    xa = X[:, A]
    e = np.asarray(eps, dtype=float)
    e = e - e.mean()
    B_idx = np.atleast_1d(np.asarray(B_idx, dtype=int))
    N_idx = np.atleast_1d(np.asarray(N_idx, dtype=int))
    d = np.asarray(truth, dtype=float) - beta_hat
    return BiasDecomposition(
        irreducible=float(-(xa @ e) / n),
        from_B=float(-(xa @ (X[:, B_idx] @ d[B_idx])) / n),
        from_N=float(-(xa @ (X[:, N_idx] @ d[N_idx])) / n),
        penalty=float(lam),
        total=float(d[A]),
    )


@dataclass(frozen=True)
class StabilityResult:
    A: np.ndarray  # (R, p) in {0, 1}
    A_star: np.ndarray  # (R, p) in [0, 1]
    lambda_cv: np.ndarray
    failed: tuple[int, ...] = ()

    @property
    def A_bar(self) -> np.ndarray:
        return self.A.mean(axis=0)

    @property
    def A_star_bar(self) -> np.ndarray:
        return self.A_star.mean(axis=0)


def stability_replication(X, y, B: int, rng: RngStream, k: int = 10, nlambda: int = 100, ratio_min: float = 0.05):
    """One pass of bootstrap stability selection at a single CV-chosen penalty."""
    from .selection import cross_validate
    from .solver import LambdaGrid, fit_lasso_path

    sd = standardize(Dataset(X, y))
    grid = LambdaGrid.for_design(sd, nlambda, ratio_min)
    cv = cross_validate(sd, grid, k, rng.child(0))
    fit = fit_lasso_path(sd, grid.values[: cv.index_cv + 1])
    beta = fit.coef
    sel = (beta != 0).astype(np.int8)
    freq = np.zeros(sd.p)
    used = 0
    for b in range(B):
        idx = resample_indices(sd.n, rng.child(1, b))
        try:
            _, bb = bootstrap_fit(X, y, idx, "lasso", cv.lambda_cv, beta)
        except ConstantColumnError:
            continue
        freq += bb != 0
        used += 1
    return sel, freq / max(used, 1), cv.lambda_cv


def stability_selection(scenario, R: int, B: int, rng: RngStream | None = None, threads: int | None = None) -> StabilityResult:
    """Bootstrap stability selection over ``R`` generated datasets with ``B`` resamples each."""
    from .parallel import parallel_map
    from .sim import generate_dataset

    if R < 1 or B < 1:
        raise ValueError("R and B must be positive")
    master = rng.master_seed if rng is not None else scenario.seed
    spec = scenario.with_(seed=master)

    def one(i):
        data, _, _ = generate_dataset(spec, i)
        return stability_replication(
            data.X, data.y, B, RngStream(master, (i, 1)), spec.cv_folds, spec.nlambda, spec.ratio_min
        )

    results = parallel_map(one, range(R), threads, tolerate=True)
    failed = tuple(i for i, r in enumerate(results) if isinstance(r, Exception))
    for i in failed:
        log.error("stability replication %d failed: %s", i, results[i])
    ok = [r for r in results if not isinstance(r, Exception)]
    return StabilityResult(
        np.array([r[0] for r in ok]),
        np.array([r[1] for r in ok]),
        np.array([r[2] for r in ok]),
        failed,
    )


def scalar_bootstrap_gap(
    estimator: str,
    n: int,
    beta1: float,
    lam: float,
    sigma2: float = 1.0,
    datasets: int = 200,
    B: int = 500,
    seed: int = 0,
) -> np.ndarray:
    """Original estimate minus bootstrap mean, per dataset, for a single raw predictor.

    The predictor is neither centered nor rescaled so that ``s11 = x'x/n``
    varies across resamples, which is the source of the gap.  Estimators:
    ridge ``(x'y/n)/(s11 + lam)``; lasso ``soft(x'y/n, lam)/s11``.
    """

    def est(x, y):
        s11 = (x * x).sum(axis=-1) / n
        a = (x * y).sum(axis=-1) / n
        if estimator == "ridge":
            return a / (s11 + lam)
        if estimator == "lasso":
            return np.sign(a) * np.maximum(np.abs(a) - lam, 0.0) / s11
        raise ValueError(f"unknown estimator {estimator!r}")

    out = np.empty(datasets)
    for d in range(datasets):
        g = RngStream(seed, (d, 0)).generator()
        x = g.standard_normal(n)
        y = beta1 * x + np.sqrt(sigma2) * g.standard_normal(n)
        idx = RngStream(seed, (d, 1)).generator().integers(0, n, size=(B, n))
        out[d] = est(x, y) - est(x[idx], y[idx]).mean()
    return out
