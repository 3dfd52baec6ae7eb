"""Data containers, standardization and seeded random streams."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for invalid input data (non-finite values, constant columns...)."""


class ConstantColumnError(DataError):
    def __init__(self, column: int):
        super().__init__(f"column {column} has zero variance and cannot be standardized")
        self.column = column


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise DataError("X must be a 2-d array")
        n, p = X.shape
        if n < 2 or p < 1:
            raise DataError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if y.shape[0] != n:
            raise DataError(f"X has {n} rows but y has {y.shape[0]} entries")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise DataError("data contain non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.names is None:
            object.__setattr__(self, "names", tuple(f"x{j + 1}" for j in range(p)))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class StandardizedDesign:
    """Centered design scaled so that every column has ``x_j'x_j = n``.

    ``Xs[:, j] = (X[:, j] - col_center[j]) / col_scale[j]`` and
    ``ys = y - y_center``.
    """

    Xs: np.ndarray
    ys: np.ndarray
    col_center: np.ndarray
    col_scale: np.ndarray
    y_center: float
    names: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return self.Xs.shape[0]

    @property
    def p(self) -> int:
        return self.Xs.shape[1]

    def to_raw(self, beta: np.ndarray) -> tuple[np.ndarray, float]:
        """Map standardized coefficients to raw-scale slopes and intercept."""
        slopes = np.asarray(beta, dtype=float) / self.col_scale
        intercept = self.y_center - float(slopes @ self.col_center)
        return slopes, intercept

    def transform(self, X: np.ndarray) -> np.ndarray:
        """Apply this design's centering and scaling to new rows."""
        return (np.asarray(X, dtype=float) - self.col_center) / self.col_scale


def standardize(data: Dataset) -> StandardizedDesign:
    X, y = data.X, data.y
    n = X.shape[0]
    center = X.mean(axis=0)
    Xc = X - center
    scale = np.sqrt((Xc * Xc).sum(axis=0) / n)
    # relative test so tiny-but-real spreads survive
    ref = np.maximum(np.abs(center), 1.0)
    bad = np.flatnonzero(~(scale > 1e-12 * ref))
    if bad.size:
        raise ConstantColumnError(int(bad[0]))
    Xs = Xc / scale
    y_center = float(y.mean())
    return StandardizedDesign(Xs, y - y_center, center, scale, y_center, data.names)


@dataclass(frozen=True)
class IntervalSet:
    """Per-variable intervals at a common confidence level."""

    lower: np.ndarray
    upper: np.ndarray
    estimate: np.ndarray
    level: float
    beta_tilde: np.ndarray | None = None
    n_tilde: np.ndarray | None = None
    selected: np.ndarray | None = None
    scale: str = "standardized"
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")
        lo, up = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if np.any(lo > up):
            raise ValueError("interval with lower > upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def covers(self, truth: np.ndarray) -> np.ndarray:
        truth = np.asarray(truth, dtype=float)
        return (self.lower <= truth) & (truth <= self.upper)


def destandardize_interval(interval: IntervalSet, sd: StandardizedDesign) -> IntervalSet:
    s = sd.col_scale
    bt = None if interval.beta_tilde is None else interval.beta_tilde / s
    return replace(
        interval,
        lower=interval.lower / s,
        upper=interval.upper / s,
        estimate=interval.estimate / s,
        beta_tilde=bt,
        scale="raw",
    )


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed on ``(master_seed, key)``.

    The key is a tuple of non-negative ints (one entry per nesting level,
    e.g. ``(replication, purpose, bootstrap_draw)``), so any stream can be
    reconstructed without replaying earlier ones.
    """

    master_seed: int
    key: tuple[int, ...] = field(default=())

    @property
    def stream_index(self) -> tuple[int, ...]:
        return self.key

    def child(self, *idx: int) -> "RngStream":
        return RngStream(self.master_seed, self.key + tuple(int(i) for i in idx))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.master_seed) & (2**64 - 1), spawn_key=self.key)
        return np.random.Generator(np.random.Philox(ss))


def read_csv(path: str | Path, response: str) -> Dataset:
    """Load a dataset from a headed CSV; every non-response column is a covariate."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if response not in header:
            raise DataError(f"{path}: response column {response!r} not found in header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) if v.strip() not in ("", "NA", "NaN", "nan") else np.nan for v in row])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    arr = np.array(rows, dtype=float).reshape(len(rows), len(header))
    if np.isnan(arr).any():
        r, c = np.argwhere(np.isnan(arr))[0]
        raise DataError(f"{path}: missing value in row {r + 2}, column {header[c]!r}")
    k = header.index(response)
    names = tuple(h for i, h in enumerate(header) if i != k)
    return Dataset(np.delete(arr, k, axis=1), arr[:, k], names)
