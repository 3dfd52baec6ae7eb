"""Relaxed lasso posterior (RL-P) intervals.

For each variable ``j`` the likelihood of ``beta_j`` given the other
selected columns is normal with mean ``beta_tilde`` and precision
``n_tilde / sigma2``; combined with the Laplace prior implied by the lasso
penalty the posterior is a left-truncated and a right-truncated normal
glued at zero.  Quantiles are obtained in closed form by first deciding
which side of zero the requested probability falls on and then inverting
the matching normal CDF, all in log space so that the astronomically large
side weights never have to be formed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import log_ndtr, ndtri_exp

from .model import IntervalSet, StandardizedDesign
from .selection import SigmaEstimate
from .solver import LassoFit

DEGENERATE_RTOL = 1e-8


@dataclass(frozen=True)
class ConditionalStats:
    beta_tilde: float
    n_tilde: float
    j: int
    S_j: tuple[int, ...]
    degenerate: bool = False


@dataclass(frozen=True)
class ConditionalPosterior:
    beta_tilde: float
    n_tilde: float
    lam: float
    sigma2: float
    degenerate: bool = False

    @property
    def mu_minus(self) -> float:
        return self.beta_tilde + self.lam

    @property
    def mu_plus(self) -> float:
        return self.beta_tilde - self.lam

    @property
    def v(self) -> float:
        return self.sigma2 / self.n_tilde

    @property
    def log_w_minus(self) -> float:
        return self.beta_tilde * self.lam * self.n_tilde / self.sigma2

    @property
    def log_w_plus(self) -> float:
        return -self.log_w_minus

    def log_density(self, b):
        """Unnormalized log density (the two branches agree at zero)."""
        b = np.asarray(b, dtype=float)
        mu = np.where(b < 0, self.mu_minus, self.mu_plus)
        lw = np.where(b < 0, self.log_w_minus, self.log_w_plus)
        return lw - (b - mu) ** 2 / (2 * self.v)


def _side_log_probs(bt, nt, lam, s2):
    """log Pr-, log Pr+, log Post-, log Post+ (broadcasting)."""
    sd = np.sqrt(s2 / nt)
    log_pr_m = log_ndtr(-(bt + lam) / sd)  # P(N(bt+lam, v) < 0)
    log_pr_p = log_ndtr((bt - lam) / sd)  # P(N(bt-lam, v) >= 0)
    cw = bt * lam * nt / s2
    delta = (cw + log_pr_m) - (-cw + log_pr_p)
    # Delta - log(1 + e^Delta), rearranged for Delta > 0 so e^Delta cannot overflow
    with np.errstate(over="ignore"):
        log_post_m = np.where(delta > 0, -np.log1p(np.exp(-np.abs(delta))), delta - np.log1p(np.exp(np.minimum(delta, 0))))
        log_post_p = np.where(delta > 0, -delta - np.log1p(np.exp(-np.abs(delta))), -np.log1p(np.exp(np.minimum(delta, 0))))
    return log_pr_m, log_pr_p, log_post_m, log_post_p


def posterior_log_weights(cp: ConditionalPosterior) -> tuple[float, float]:
    """Return ``(log Post-, log Post+)``, the log posterior mass on each side of zero."""
    _, _, lm, lp = _side_log_probs(cp.beta_tilde, cp.n_tilde, cp.lam, cp.sigma2)
    return float(lm), float(lp)


def quantiles(beta_tilde, n_tilde, lam, sigma2, prob):
    """Vectorized posterior quantile; all arguments broadcast together."""
    bt, nt, lam, s2, p = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (beta_tilde, n_tilde, lam, sigma2, prob))
    )
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    sd = np.sqrt(s2 / nt)
    log_pr_m, log_pr_p, log_post_m, log_post_p = _side_log_probs(bt, nt, lam, s2)
    lower_side = p <= np.exp(log_post_m)
    with np.errstate(divide="ignore"):
        # mass between -inf and q, mapped onto the left normal
        lp_m = np.minimum(np.log(p) + log_pr_m - log_post_m, log_pr_m)
        # mass between q and +inf, mapped onto the right normal
        lp_p = np.minimum(np.log1p(-p) + log_pr_p - log_post_p, log_pr_p)
    q_m = np.minimum(bt + lam + sd * ndtri_exp(np.where(lower_side, lp_m, -1.0)), 0.0)
    q_p = np.maximum(bt - lam - sd * ndtri_exp(np.where(lower_side, -1.0, lp_p)), 0.0)
    return np.where(lower_side, q_m, q_p)


def posterior_quantile(cp: ConditionalPosterior, p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if cp.degenerate:
        return -np.inf if p < 0.5 else np.inf
    return float(quantiles(cp.beta_tilde, cp.n_tilde, cp.lam, cp.sigma2, p))


def _complement(p: int, S: np.ndarray) -> np.ndarray:
    mask = np.ones(p, dtype=bool)
    mask[S] = False
    return np.flatnonzero(mask)


def _dense_stats(X, y, j, S_j, rank_rtol=1e-10):
    """Residualize ``x_j`` and ``y`` on ``X[:, S_j]`` via pivoted QR, dropping dependent columns."""
    xj = X[:, j]
    if len(S_j) == 0:
        return float(xj @ y / (xj @ xj)), float(xj @ xj), 0
    Q, R, piv = linalg.qr(X[:, S_j], mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > rank_rtol * d[0])) if d.size and d[0] > 0 else 0
    Q = Q[:, :rank]
    rx = xj - Q @ (Q.T @ xj)
    nt = float(rx @ rx)
    bt = float(rx @ y / nt) if nt > 0 else 0.0
    return bt, nt, len(S_j) - rank


def conditional_stats_all(sd: StandardizedDesign, S_hat) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(beta_tilde, n_tilde, degenerate)`` for every variable given selected set ``S_hat``.

    One thin QR of ``X_S`` serves all variables: unselected columns are
    residualized against it, and for selected columns the leave-one-out
    quantities come from the diagonal of ``(X_S'X_S)^{-1}`` (so
    ``n_tilde = 1/G_jj`` and ``beta_tilde`` is the OLS coefficient on
    ``X_S``).  Rank-deficient selections fall back to per-variable dense
    projections.
    """
    X, y = sd.Xs, sd.ys
    n, p = X.shape
    S = np.unique(np.asarray(S_hat, dtype=int))
    bt = np.empty(p)
    nt = np.empty(p)
    if S.size == 0:
        nt[:] = (X * X).sum(axis=0)
        bt[:] = X.T @ y / nt
    else:
        Q, R = np.linalg.qr(X[:, S])
        d = np.abs(np.diag(R))
        full_rank = S.size < n and d.min() > 1e-8 * d.max()
        if full_rank:
            N = _complement(p, S)
            if N.size:
                RN = X[:, N] - Q @ (Q.T @ X[:, N])
                nt[N] = (RN * RN).sum(axis=0)
                bt[N] = RN.T @ y / nt[N]
            Rinv = linalg.solve_triangular(R, np.eye(S.size))
            nt[S] = 1.0 / (Rinv * Rinv).sum(axis=1)
            bt[S] = Rinv @ (Q.T @ y)
        else:
            warnings.warn(
                f"selected design of size {S.size} is rank deficient; dependent columns are dropped",
                stacklevel=2,
            )
            Sset = set(S.tolist())
            for j in range(p):
                S_j = np.array(sorted(Sset - {j}), dtype=int)
                bt[j], nt[j], _ = _dense_stats(X, y, j, S_j)
    degenerate = ~(nt >= DEGENERATE_RTOL * n)
    bt[degenerate] = 0.0
    return bt, nt, degenerate


def conditional_stats(sd: StandardizedDesign, S_hat, j: int) -> ConditionalStats:
    S = set(int(k) for k in np.asarray(S_hat).ravel())
    S_j = tuple(sorted(S - {j}))
    bt_all, nt_all, deg = conditional_stats_all(sd, sorted(S))
    return ConditionalStats(float(bt_all[j]), float(nt_all[j]), j, S_j, bool(deg[j]))


def rlp_intervals(
    sd: StandardizedDesign,
    fit: LassoFit,
    sigma2: SigmaEstimate | float,
    level: float = 0.8,
    lam: float | None = None,
) -> IntervalSet:
    """RL-P intervals on the standardized scale for every variable.

    ``fit`` supplies the selected set and penalty (its last grid point is
    used).  Degenerate variables, whose column lies in the span of the other
    selected columns, get unbounded intervals.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    s2 = sigma2.sigma2_hat if isinstance(sigma2, SigmaEstimate) else float(sigma2)
    if not s2 > 0:
        raise ValueError("sigma2 must be positive")
    beta = fit.coef
    lam = fit.lam if lam is None else float(lam)
    S = np.flatnonzero(beta != 0.0)
    bt, nt, deg = conditional_stats_all(sd, S)
    alpha = 1.0 - level
    ok = ~deg
    lower = np.full(sd.p, -np.inf)
    upper = np.full(sd.p, np.inf)
    if ok.any():
        q = quantiles(bt[ok, None], nt[ok, None], lam, s2, np.array([alpha / 2, 1 - alpha / 2]))
        lower[ok], upper[ok] = q[:, 0], q[:, 1]
    if deg.any():
        warnings.warn(
            f"variables {np.flatnonzero(deg).tolist()} have no information orthogonal to the selected set; "
            "their intervals are unbounded",
            stacklevel=2,
        )
    return IntervalSet(
        lower=lower,
        upper=upper,
        estimate=beta.copy(),
        level=level,
        beta_tilde=bt,
        n_tilde=nt,
        selected=beta != 0.0,
        names=sd.names,
    )
