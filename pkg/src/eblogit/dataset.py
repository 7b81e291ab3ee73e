"""Data containers, CSV ingestion, and the synthetic designs used by the
simulation scenarios."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import toeplitz

from .glm import Configuration


def default_names(p: int) -> tuple[str, ...]:
    return tuple(f"v{j + 1}" for j in range(p))


@dataclass(frozen=True)
class Dataset:
    """Fixed design matrix with a binary response.

    Parameters
    ----------
    x : (n, p) array
        Covariate matrix; row i is the covariate vector of observation i.
    y : (n,) array
        Binary response, entries in {0, 1}.
    names : sequence of str, optional
        One identifier per column; defaults to v1..vp.
    intercept : bool
        Include an always-on intercept column in likelihood fits.  The
        intercept is never part of the selection indices.

    Instances are immutable (arrays are copied and marked read-only) and
    safe to share across parallel workers.
    """

    x: np.ndarray
    y: np.ndarray
    names: tuple[str, ...] = ()
    intercept: bool = False

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64, order="C", copy=True)
        y = np.array(self.y, dtype=np.float64, copy=True).ravel()
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("design matrix must be 2-d with n >= 1 and p >= 1")
        if not np.all(np.isfinite(x)):
            raise ValueError("design matrix contains non-finite entries")
        if y.shape[0] != x.shape[0]:
            raise ValueError(
                f"response length {y.shape[0]} does not match {x.shape[0]} design rows"
            )
        if not np.all((y == 0.0) | (y == 1.0)):
            bad = y[(y != 0.0) & (y != 1.0)][0]
            raise ValueError(f"response must be binary 0/1; found {bad!r}")
        names = tuple(self.names) if self.names else default_names(x.shape[1])
        if len(names) != x.shape[1]:
            raise ValueError(f"got {len(names)} column names for p={x.shape[1]} columns")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class SimScenario:
    """Synthetic-data scenario.

    signal is either a fixed amplitude or a (lo, hi) pair for uniform draws;
    design is "iid" (entries N(0, sigma^2)) or "ar1" (rows from a unit-variance
    Gaussian with column correlation r^|i-j|).  The true support is always the
    leading s coordinates.
    """

    n: int
    p: int
    s: int
    signal: float | tuple[float, float]
    design: str = "iid"
    sigma: float = 1.0
    r: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if not 0 <= self.s <= self.p:
            raise ValueError(f"number of signals s={self.s} must satisfy 0 <= s <= p={self.p}")
        if self.design not in ("iid", "ar1"):
            raise ValueError(f"unknown design {self.design!r}; use 'iid' or 'ar1'")
        if self.design == "iid" and not self.sigma > 0:
            raise ValueError("iid design requires sigma > 0")
        if self.design == "ar1" and not 0.0 <= self.r < 1.0:
            raise ValueError("ar1 design requires 0 <= r < 1")
        if isinstance(self.signal, (tuple, list)):
            lo, hi = self.signal
            if not lo < hi:
                raise ValueError(f"uniform signal range must satisfy lo < hi, got {self.signal}")
            object.__setattr__(self, "signal", (float(lo), float(hi)))
        else:
            object.__setattr__(self, "signal", float(self.signal))


def load_csv(path, response_column: str) -> Dataset:
    """Read a rectangular CSV with a header row into a Dataset.

    The named response column must contain only 0/1 values; the remaining
    columns become the design matrix with their order preserved.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [row for row in rows if row]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if response_column not in header:
        raise ValueError(f"{path}: response column {response_column!r} not in header {header}")
    width = len(header)
    resp_idx = header.index(response_column)
    y = []
    xrows = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ValueError(f"{path}: ragged row at line {lineno} ({len(row)} fields, expected {width})")
        try:
            vals = [float(v) for v in row]
        except ValueError as exc:
            raise ValueError(f"{path}: parse failure at line {lineno}: {exc}") from None
        yv = vals.pop(resp_idx)
        if yv not in (0.0, 1.0):
            raise ValueError(
                f"{path}: non-binary response {row[resp_idx]!r} at line {lineno} in column {response_column!r}"
            )
        y.append(yv)
        xrows.append(vals)
    if not xrows:
        raise ValueError(f"{path}: no data rows")
    names = tuple(c for i, c in enumerate(header) if i != resp_idx)
    return Dataset(x=np.asarray(xrows), y=np.asarray(y), names=names)


def generate_design(scenario: SimScenario, rng: np.random.Generator):
    """Draw a design matrix and the true coefficient vector.

    Returns (x, beta_star, s_star).  The iid design has independent
    N(0, sigma^2) entries; the ar1 design draws rows from a mean-zero
    Gaussian with covariance r^|i-j| realized through its Cholesky factor.
    Nonzero signals occupy the leading s coordinates.
    """
    n, p, s = scenario.n, scenario.p, scenario.s
    if scenario.design == "iid":
        x = rng.normal(0.0, scenario.sigma, size=(n, p))
    else:
        cov = toeplitz(scenario.r ** np.arange(p))
        chol = np.linalg.cholesky(cov)
        x = rng.standard_normal((n, p)) @ chol.T
    beta_star = np.zeros(p)
    if isinstance(scenario.signal, tuple):
        lo, hi = scenario.signal
        beta_star[:s] = rng.uniform(lo, hi, size=s)
    else:
        beta_star[:s] = scenario.signal
    return x, beta_star, Configuration(tuple(range(s)))


def sample_response(x, beta_star, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli responses with success 1/(1 + exp(-x_i beta))."""
    x = np.asarray(x, dtype=np.float64)
    beta_star = np.asarray(beta_star, dtype=np.float64).ravel()
    if x.shape[1] != beta_star.shape[0]:
        raise ValueError(f"beta length {beta_star.shape[0]} does not match p={x.shape[1]}")
    t = x @ beta_star
    prob = np.empty_like(t)
    pos = t >= 0
    prob[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    prob[~pos] = e / (1.0 + e)
    return (rng.random(x.shape[0]) < prob).astype(np.float64)


def simulate_dataset(scenario: SimScenario, rng: np.random.Generator):
    """generate_design plus sample_response, packaged as a Dataset."""
    x, beta_star, s_star = generate_design(scenario, rng)
    y = sample_response(x, beta_star, rng)
    return Dataset(x=x, y=y), beta_star, s_star


def standardize(d: Dataset) -> Dataset:
    """Rescale columns to unit sample variance (no centering).

    Centering is deliberately skipped: the model carries no implicit
    intercept, so shifting columns would change it.  Constant columns are
    left untouched with a warning.
    """
    sd = d.x.std(axis=0, ddof=1) if d.n > 1 else np.ones(d.p)
    scale = np.where(sd > 0, sd, 1.0)
    if np.any(sd == 0):
        warnings.warn(f"{int(np.sum(sd == 0))} constant column(s) left unscaled")
    return Dataset(x=d.x / scale, y=d.y, names=d.names, intercept=d.intercept)
