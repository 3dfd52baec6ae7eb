"""Scenario generation and coverage accounting for the simulation experiments."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import integrate, stats

from .model import Dataset, RngStream, destandardize_interval, standardize
from .parallel import parallel_map
from .posterior import rlp_intervals
from .resampling import (
    DecompositionError,
    bootstrap_fit,
    decompose_bias,
    pairs_bootstrap,
    raw_data,
    resample_indices,
)
from .ridge import ridge_cross_validate, ridge_posterior_intervals, ridge_sigma2
from .selection import estimate_sigma2, select_lambda
from .solver import LambdaGrid, fit_lasso_path

log = logging.getLogger(__name__)

LAWS = ("laplace", "t3", "normal", "uniform", "beta01", "sparse1", "sparse2", "sparse3", "custom")
DESIGNS = ("ar1", "banded", "pair")
METHODS = ("rlp", "ridge_posterior", "bootstrap", "ridge_bootstrap")


class ScenarioError(ValueError):
    pass


class SimulationError(RuntimeError):
    pass


def law_coefficients(law: str, p: int) -> np.ndarray:
    """Unscaled coefficients: ``j/(p+1)`` quantiles of the law, or the fixed sparse supports."""
    u = np.arange(1, p + 1) / (p + 1)
    if law == "laplace":
        return stats.laplace.ppf(u)
    if law == "t3":
        return stats.t.ppf(u, 3)
    if law == "normal":
        return stats.norm.ppf(u)
    if law == "uniform":
        return 2 * u - 1
    if law == "beta01":
        return stats.beta.ppf(u, 0.1, 0.1) - 0.5
    if law in ("sparse1", "sparse2", "sparse3"):
        head = {
            "sparse1": np.array([0.5, 0.5, 0.5, 1, 2, -0.5, -0.5, -0.5, -1, -2]),
            "sparse2": stats.norm.ppf(np.arange(1, 32) / 32),
            "sparse3": stats.norm.ppf(np.arange(1, 52) / 52),
        }[law]
        if p < head.size:
            raise ScenarioError(f"{law} needs p >= {head.size}")
        b = np.zeros(p)
        b[: head.size] = head
        return b
    raise ScenarioError(f"unknown coefficient law {law!r}; choose from {', '.join(LAWS)}")


@dataclass(frozen=True)
class ScenarioSpec:
    n: int = 100
    p: int = 101
    beta_law: str = "laplace"
    rho: float = 0.0
    snr: float = 1.0
    sigma2: float = 1.0
    reps: int = 1000
    seed: int = 1
    design: str = "ar1"
    pair: tuple[int, int] = (0, 1)
    beta: tuple[float, ...] | None = None
    scale_beta: bool = True
    nlambda: int = 100
    lambda_min_ratio: float | None = None
    cv_folds: int = 10

    def __post_init__(self):
        if self.beta_law not in LAWS:
            raise ScenarioError(f"unknown coefficient law {self.beta_law!r}; choose from {', '.join(LAWS)}")
        if self.design not in DESIGNS:
            raise ScenarioError(f"unknown design {self.design!r}; choose from {', '.join(DESIGNS)}")
        if not 0.0 <= self.rho < 1.0:
            raise ScenarioError("rho must lie in [0, 1)")
        if self.n < 2 or self.p < 1 or self.reps < 1:
            raise ScenarioError("need n >= 2, p >= 1, reps >= 1")
        if self.sigma2 <= 0 or self.snr < 0:
            raise ScenarioError("sigma2 must be positive and snr non-negative")
        if self.beta_law == "custom":
            if self.beta is None or len(self.beta) != self.p:
                raise ScenarioError("custom law needs a beta vector of length p")
        object.__setattr__(self, "pair", tuple(int(i) for i in self.pair))
        if self.beta is not None:
            object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))

    @property
    def ratio_min(self) -> float:
        if self.lambda_min_ratio is not None:
            return self.lambda_min_ratio
        return 0.05 if self.n <= self.p else 0.001

    def with_(self, **kw) -> "ScenarioSpec":
        return replace(self, **kw)

    def true_beta(self) -> np.ndarray:
        b = np.array(self.beta, dtype=float) if self.beta_law == "custom" else law_coefficients(self.beta_law, self.p)
        if self.scale_beta:
            ss = b @ b
            if ss > 0:
                b = b * np.sqrt(self.snr * self.sigma2 / ss)
        return b

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pair"] = list(self.pair)
        d["beta"] = None if self.beta is None else list(self.beta)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ScenarioError(f"unknown scenario fields: {', '.join(sorted(unknown))}")
        d = dict(d)
        if d.get("pair") is not None:
            d["pair"] = tuple(d["pair"])
        if d.get("beta") is not None:
            d["beta"] = tuple(d["beta"])
        return cls(**d)


def _design_matrix(spec: ScenarioSpec, g: np.random.Generator) -> np.ndarray:
    n, p, rho = spec.n, spec.p, spec.rho
    Z = g.standard_normal((n, p))
    if rho == 0.0:
        return Z
    if spec.design == "ar1":
        X = np.empty_like(Z)
        X[:, 0] = Z[:, 0]
        c = np.sqrt(1 - rho * rho)
        for j in range(1, p):
            X[:, j] = rho * X[:, j - 1] + c * Z[:, j]
        return X
    if spec.design == "pair":
        a, b = spec.pair
        X = Z.copy()
        X[:, b] = rho * Z[:, a] + np.sqrt(1 - rho * rho) * Z[:, b]
        return X
    S = np.eye(p) + rho * (np.eye(p, k=1) + np.eye(p, k=-1))
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise ScenarioError(f"banded correlation {rho} is not positive definite for p={p}") from None
    return Z @ L.T


def generate_dataset(spec: ScenarioSpec, rep: int) -> tuple[Dataset, np.ndarray, np.ndarray]:
    """Draw replication ``rep``: returns ``(data, beta, eps)`` with ``y = X beta + eps``."""
    g = RngStream(spec.seed, (int(rep), 0)).generator()
    X = _design_matrix(spec, g)
    eps = np.sqrt(spec.sigma2) * g.standard_normal(spec.n)
    beta = spec.true_beta()
    return Dataset(X, X @ beta + eps), beta, eps


def rank_bins(abs_beta: np.ndarray, nbins: int) -> list[np.ndarray]:
    """Split variables into ``nbins`` near-equal groups by rank of ``|beta|``."""
    order = np.argsort(abs_beta, kind="stable")
    return [b for b in np.array_split(order, min(nbins, abs_beta.size)) if b.size]


@dataclass
class CoverageReport:
    method: str
    level: float
    beta: np.ndarray
    lower: np.ndarray  # (reps, p), raw scale
    upper: np.ndarray
    selected: np.ndarray
    lambda_used: np.ndarray
    sigma2: np.ndarray
    reps: np.ndarray  # replication ids that succeeded
    failures: tuple[int, ...] = ()
    nbins: int = 10
    spec: dict = field(default_factory=dict)

    @property
    def covered(self) -> np.ndarray:
        return (self.lower <= self.beta) & (self.beta <= self.upper)

    @property
    def average_coverage(self) -> float:
        return float(self.covered.mean())

    @property
    def mc_se(self) -> float:
        c = self.average_coverage
        return float(np.sqrt(c * (1 - c) / len(self.reps)))

    @property
    def rep_coverage(self) -> np.ndarray:
        return self.covered.mean(axis=1)

    @property
    def rep_se(self) -> float:
        """Standard error from the spread of per-replication average coverage."""
        rc = self.rep_coverage
        return float(rc.std(ddof=1) / np.sqrt(rc.size)) if rc.size > 1 else float("nan")

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def bins(self) -> list[dict]:
        ab = np.abs(self.beta)
        cov = self.covered
        out = []
        for i, idx in enumerate(rank_bins(ab, self.nbins)):
            c = cov[:, idx]
            m = float(c.mean())
            out.append(
                {
                    "bin": i,
                    "abs_beta_min": float(ab[idx].min()),
                    "abs_beta_max": float(ab[idx].max()),
                    "variables": int(idx.size),
                    "count": int(c.size),
                    "coverage": m,
                    "se": float(np.sqrt(m * (1 - m) / c.size)),
                    "median_width": float(np.median(self.width[:, idx])),
                }
            )
        return out

    def summary(self) -> dict:
        return {
            "method": self.method,
            "level": self.level,
            "reps": int(len(self.reps)),
            "failures": len(self.failures),
            "average_coverage": self.average_coverage,
            "mc_se": self.mc_se,
            "rep_se": self.rep_se,
            "median_width": float(np.median(self.width)),
            "mean_selected": float(self.selected.sum(axis=1).mean()),
            "lambda_median": float(np.median(self.lambda_used)),
            "sigma2_mean": float(np.mean(self.sigma2)),
            "bins": self.bins(),
        }

    def rows(self):
        """One record per (replication, variable)."""
        cov = self.covered
        for r, rep in enumerate(self.reps):
            for j in range(self.beta.size):
                yield {
                    "rep": int(rep),
                    "variable": j + 1,
                    "beta": self.beta[j],
                    "lower": self.lower[r, j],
                    "upper": self.upper[r, j],
                    "covered": int(cov[r, j]),
                    "selected": int(self.selected[r, j]),
                }


def rlp_replication(data: Dataset, spec: ScenarioSpec, rng: RngStream, level: float):
    """Standardize, cross-validate, estimate sigma^2 and build RL-P intervals on the raw scale."""
    sd = standardize(data)
    _, cv, fit = select_lambda(sd, spec.cv_folds, rng, spec.nlambda, spec.ratio_min)
    s2 = estimate_sigma2(sd, fit)
    iv = rlp_intervals(sd, fit, s2, level)
    return sd, cv, fit, s2, destandardize_interval(iv, sd)


def _replicate(spec: ScenarioSpec, rep: int, method: str, level: float, opts: dict):
    data, beta, _ = generate_dataset(spec, rep)
    rng = RngStream(spec.seed, (rep, 1))
    if method == "rlp":
        sd, cv, fit, s2, iv = rlp_replication(data, spec, rng, level)
        return iv.lower, iv.upper, iv.selected, cv.lambda_cv, s2.sigma2_hat
    sd = standardize(data)
    if method in ("ridge_posterior", "ridge_bootstrap"):
        lam = opts.get("ridge_lambda")
        if lam is None:
            raise ScenarioError(f"method {method} needs ridge_lambda")
        s2 = spec.sigma2 if opts.get("sigma2_rule", "known") == "known" else ridge_sigma2(sd, lam)
        if method == "ridge_posterior":
            iv = ridge_posterior_intervals(sd, lam, s2, level)
        else:
            run = pairs_bootstrap(sd, "ridge", lam, opts.get("B", 200), level, rng.child(2))
            iv = run.intervals()
        iv = destandardize_interval(iv, sd)
        return iv.lower, iv.upper, np.ones(sd.p, bool), lam, s2
    if method == "bootstrap":
        _, cv, fit = select_lambda(sd, spec.cv_folds, rng, spec.nlambda, spec.ratio_min)
        run = pairs_bootstrap(sd, "lasso", cv.lambda_cv, opts.get("B", 200), level, rng.child(2), fit.coef)
        iv = destandardize_interval(run.intervals(fit.coef), sd)
        return iv.lower, iv.upper, fit.coef != 0, cv.lambda_cv, np.nan
    raise ScenarioError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def _collect(results, reps, what="replication"):
    failed = tuple(r for r, res in zip(reps, results) if isinstance(res, Exception))
    for r, res in zip(reps, results):
        if isinstance(res, Exception):
            log.warning("%s %d failed: %s", what, r, res)
    if len(failed) > 0.01 * len(reps):
        first = next(res for res in results if isinstance(res, Exception))
        raise SimulationError(f"{len(failed)} of {len(reps)} {what}s failed (first error: {first})")
    ok = [(r, res) for r, res in zip(reps, results) if not isinstance(res, Exception)]
    return failed, ok


def run_coverage_experiment(
    spec: ScenarioSpec,
    method: str = "rlp",
    level: float = 0.8,
    threads: int | None = None,
    nbins: int = 10,
    **opts,
) -> CoverageReport:
    """Per-variable coverage of ``method`` over ``spec.reps`` independent datasets.

    ``opts``: ``B`` (bootstrap draws), ``ridge_lambda``, ``sigma2_rule``
    (``"known"`` or ``"estimate"``) for the ridge methods.
    """
    if method not in METHODS:
        raise ScenarioError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method.startswith("ridge") and opts.get("ridge_lambda") is None:
        raise ScenarioError(f"method {method} needs ridge_lambda")
    reps = list(range(spec.reps))
    results = parallel_map(lambda r: _replicate(spec, r, method, level, opts), reps, threads, tolerate=True)
    failed, ok = _collect(results, reps)
    return CoverageReport(
        method=method,
        level=level,
        beta=spec.true_beta(),
        lower=np.array([o[1][0] for o in ok]),
        upper=np.array([o[1][1] for o in ok]),
        selected=np.array([o[1][2] for o in ok]),
        lambda_used=np.array([o[1][3] for o in ok]),
        sigma2=np.array([o[1][4] for o in ok]),
        reps=np.array([o[0] for o in ok]),
        failures=failed,
        nbins=nbins,
        spec=spec.to_dict(),
    )


@dataclass
class HeatmapReport:
    level: float
    lambda_ratio: np.ndarray  # grid values relative to lambda_max
    bin_edges: list[tuple[float, float]]
    coverage: np.ndarray  # (nbins, n_lambda)
    average: np.ndarray  # (n_lambda,) average coverage over all variables
    lambda_cv_ratio: np.ndarray  # (reps,)
    failures: tuple[int, ...] = ()

    @property
    def relative(self) -> np.ndarray:
        return self.coverage - self.level

    @property
    def average_relative(self) -> np.ndarray:
        return self.average - self.level

    @property
    def balance_index(self) -> int:
        return int(np.argmin(np.abs(self.average_relative)))

    def lambda_cv_summary(self) -> dict:
        q = np.quantile(self.lambda_cv_ratio, [0.125, 0.5, 0.875])
        return {"lower_75": float(q[0]), "median": float(q[1]), "upper_75": float(q[2])}

    def rows(self):
        for b, (lo, hi) in enumerate(self.bin_edges):
            for k, lr in enumerate(self.lambda_ratio):
                yield {
                    "bin": b,
                    "abs_beta_min": lo,
                    "abs_beta_max": hi,
                    "lambda_ratio": lr,
                    "coverage": self.coverage[b, k],
                    "relative_coverage": self.coverage[b, k] - self.level,
                }


def run_lambda_heatmap(
    spec: ScenarioSpec,
    level: float = 0.8,
    count: int = 25,
    ratio_min: float = 0.05,
    threads: int | None = None,
    nbins: int = 10,
) -> HeatmapReport:
    """RL-P coverage over a fixed log grid of penalties, with sigma^2 anchored at lambda_cv."""
    beta = spec.true_beta()

    def one(rep):
        data, _, _ = generate_dataset(spec, rep)
        sd = standardize(data)
        _, cv, fit_cv = select_lambda(sd, spec.cv_folds, RngStream(spec.seed, (rep, 1)), spec.nlambda, spec.ratio_min)
        s2 = estimate_sigma2(sd, fit_cv)
        grid = LambdaGrid.for_design(sd, count, ratio_min)
        path = fit_lasso_path(sd, grid)
        cov = np.empty((count, sd.p), dtype=bool)
        for k in range(count):
            iv = destandardize_interval(rlp_intervals(sd, path.at(k), s2, level), sd)
            cov[k] = iv.covers(beta)
        return cov, cv.lambda_cv / grid.lambda_max

    reps = list(range(spec.reps))
    failed, ok = _collect(parallel_map(one, reps, threads, tolerate=True), reps)
    C = np.array([o[1][0] for o in ok])  # (reps, L, p)
    ab = np.abs(beta)
    bins = rank_bins(ab, nbins)
    cov = np.array([C[:, :, idx].mean(axis=(0, 2)) for idx in bins])
    ratio = np.exp(np.linspace(0.0, np.log(ratio_min), count))
    return HeatmapReport(
        level=level,
        lambda_ratio=ratio,
        bin_edges=[(float(ab[i].min()), float(ab[i].max())) for i in bins],
        coverage=cov,
        average=C.mean(axis=(0, 2)),
        lambda_cv_ratio=np.array([o[1][1] for o in ok]),
        failures=failed,
    )


CORR_PAIR_VARIABLES = {"A": 0, "B": 1, "N1": 2}


def corr_pair_spec(reps: int = 1000, seed: int = 1, n: int = 100, p: int = 100, rho: float = 0.99) -> ScenarioSpec:
    beta = np.zeros(p)
    beta[0] = 1.0
    return ScenarioSpec(
        n=n, p=p, beta_law="custom", beta=tuple(beta), scale_beta=False, sigma2=1.0,
        design="pair", pair=(0, 1), rho=rho, reps=reps, seed=seed,
    )


def run_corr_pair_experiment(
    level: float = 0.8,
    reps: int = 1000,
    seed: int = 1,
    threads: int | None = None,
    ridge_grid: np.ndarray | None = None,
) -> list[dict]:
    """Ridge-posterior and RL-P intervals for a signal variable A, its 0.99-correlated partner B and noise N1.

    The ridge penalty is chosen by K-fold CV on ``ridge_grid`` (same folds
    as the lasso) and sigma^2 by the ridge residual formula.
    """
    spec = corr_pair_spec(reps, seed)
    grid = np.exp(np.linspace(np.log(1e-3), np.log(10.0), 40)) if ridge_grid is None else ridge_grid

    def one(rep):
        data, beta, _ = generate_dataset(spec, rep)
        sd, cv, fit, s2, rl = rlp_replication(data, spec, RngStream(spec.seed, (rep, 1)), level)
        lam_r, _ = ridge_cross_validate(sd, grid, cv.fold_assignment)
        rg = destandardize_interval(ridge_posterior_intervals(sd, lam_r, ridge_sigma2(sd, lam_r), level), sd)
        rows = []
        for method, iv in (("ridge", rg), ("rlp", rl)):
            for name, j in CORR_PAIR_VARIABLES.items():
                rows.append(
                    {
                        "rep": rep,
                        "method": method,
                        "variable": name,
                        "lower": iv.lower[j],
                        "upper": iv.upper[j],
                        "midpoint": 0.5 * (iv.lower[j] + iv.upper[j]),
                        "width": iv.upper[j] - iv.lower[j],
                        "covered": int(iv.lower[j] <= beta[j] <= iv.upper[j]),
                        "selected": int(fit.coef[j] != 0),
                    }
                )
        return rows

    reps_ = list(range(reps))
    _, ok = _collect(parallel_map(one, reps_, threads, tolerate=True), reps_)
    return [row for _, rows in ok for row in rows]


def ridge_compare_spec(p: int, n: int = 200, sigma2: float = 100.0, tau2: float = 1.25, reps: int = 1000, seed: int = 1):
    beta = np.sqrt(tau2) * stats.norm.ppf(np.arange(1, p + 1) / (p + 1))
    return ScenarioSpec(
        n=n, p=p, beta_law="custom", beta=tuple(beta), scale_beta=False, sigma2=sigma2, reps=reps, seed=seed
    )


def run_ridge_compare(
    ps=(20, 100, 200),
    n: int = 200,
    lam: float = 0.4,
    sigma2: float = 100.0,
    tau2: float = 1.25,
    reps: int = 1000,
    B: int = 200,
    level: float = 0.8,
    seed: int = 1,
    threads: int | None = None,
) -> dict[int, dict[str, CoverageReport]]:
    """Ridge posterior (known sigma^2) against ridge pairs bootstrap, for each dimension in ``ps``."""
    out = {}
    for p in ps:
        spec = ridge_compare_spec(p, n, sigma2, tau2, reps, seed)
        out[p] = {
            m: run_coverage_experiment(spec, m, level, threads, ridge_lambda=lam, B=B, sigma2_rule="known")
            for m in ("ridge_posterior", "ridge_bootstrap")
        }
    return out


def bias_spec(reps: int = 1000, seed: int = 1, n: int = 100, p: int = 100, beta_a: float = 2.0, rho: float = 0.5):
    beta = np.zeros(p)
    beta[0] = beta_a
    return ScenarioSpec(
        n=n, p=p, beta_law="custom", beta=tuple(beta), scale_beta=False, sigma2=1.0,
        design="pair", pair=(0, 1), rho=rho, reps=reps, seed=seed,
    )


COMPONENTS = ("irreducible", "from_B", "from_N", "penalty", "total")


def bias_replication(spec: ScenarioSpec, rep: int, B: int):
    """Decompose the bias of variable A on the original data and averaged over bootstraps.

    Both use the stored simulation truth: a pairs resample keeps each row's
    true noise, so bootstrap replication ``b`` is decomposed against the
    true coefficients with noise ``eps[idx_b]``.
    """
    A, Bv = spec.pair
    N = np.setdiff1d(np.arange(spec.p), [A, Bv])
    data, beta, eps = generate_dataset(spec, rep)
    sd = standardize(data)
    rng = RngStream(spec.seed, (rep, 1))
    _, cv, fit = select_lambda(sd, spec.cv_folds, rng, spec.nlambda, spec.ratio_min)
    lam = cv.lambda_cv
    bhat = fit.coef
    orig = decompose_bias(sd, bhat, beta * sd.col_scale, eps, A, Bv, N, lam)
    X, y = raw_data(sd)
    boot = []
    excluded = 0
    worst = abs(orig.residual)
    for b in range(B):
        idx = resample_indices(sd.n, rng.child(2, b))
        sdb, bb = bootstrap_fit(X, y, idx, "lasso", lam, bhat)
        try:
            d = decompose_bias(sdb, bb, beta * sdb.col_scale, eps[idx], A, Bv, N, lam)
        except DecompositionError:
            excluded += 1
            continue
        worst = max(worst, abs(d.residual))
        boot.append([getattr(d, c) for c in COMPONENTS])
    boot_mean = np.mean(boot, axis=0) if boot else np.full(len(COMPONENTS), np.nan)
    return orig, dict(zip(COMPONENTS, boot_mean)), excluded, worst, lam


def run_bootstrap_bias(reps: int = 1000, B: int = 1000, seed: int = 1, threads: int | None = None, **design) -> dict:
    """Original and mean-bootstrap bias components for variable A over ``reps`` datasets.

    Replications where A is not selected with a positive estimate are
    excluded and counted.
    """
    spec = bias_spec(reps, seed, **design)

    def one(rep):
        try:
            return bias_replication(spec, rep, B)
        except DecompositionError:
            return None

    reps_ = list(range(reps))
    failed, ok = _collect(parallel_map(one, reps_, threads, tolerate=True), reps_)
    rows = []
    excluded_reps = 0
    excluded_boot = 0
    worst = 0.0
    for rep, res in ok:
        if res is None:
            excluded_reps += 1
            continue
        orig, boot, exc, w, lam = res
        excluded_boot += exc
        worst = max(worst, w)
        rows.append({"rep": rep, "kind": "original", "lambda": lam, **orig.as_row()})
        rows.append({"rep": rep, "kind": "bootstrap_mean", "lambda": lam, **boot})
    return {
        "rows": rows,
        "excluded_replications": excluded_reps,
        "excluded_bootstraps": excluded_boot,
        "failures": list(failed),
        "max_identity_residual": worst,
    }


def exact_conjugate_coverage(theta_grid, tau2: float = 1.0, sigma2: float = 1.0, level: float = 0.8) -> dict:
    """Exact frequentist coverage of the normal-normal credible interval and its prior average.

    One observation ``y ~ N(theta, sigma2)``, prior ``theta ~ N(0, tau2)``.
    """
    k = tau2 / (tau2 + sigma2)
    half = stats.norm.ppf(0.5 + level / 2) * np.sqrt(k * sigma2)
    s = k * np.sqrt(sigma2)  # sd of the posterior mean given theta

    def cvr(theta):
        shift = (1 - k) * theta
        return stats.norm.cdf((half + shift) / s) - stats.norm.cdf((-half + shift) / s)

    theta_grid = np.asarray(theta_grid, dtype=float)
    sd0 = np.sqrt(tau2)
    avg, err = integrate.quad(
        lambda t: cvr(t) * stats.norm.pdf(t, scale=sd0), -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13, limit=200
    )
    return {"theta": theta_grid, "coverage": cvr(theta_grid), "average_coverage": avg, "quad_error": err}


STABILITY_BETA = (0.25, 0.5, 1.0, 2.0)


def stability_spec(R: int = 1000, seed: int = 1, n: int = 50, p: int = 500) -> ScenarioSpec:
    beta = np.zeros(p)
    beta[: len(STABILITY_BETA)] = STABILITY_BETA
    return ScenarioSpec(n=n, p=p, beta_law="custom", beta=tuple(beta), scale_beta=False, sigma2=1.0, reps=R, seed=seed)
