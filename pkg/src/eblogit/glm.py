"""Logistic-model likelihood machinery.

Stable log-likelihood, score, IRLS weights, per-configuration maximum
likelihood by damped Newton iteration, and the observed information matrix
evaluated at the fit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .dataset import Dataset


class ModelTooLargeError(ValueError):
    """Configuration has at least as many coordinates as observations."""


class NumericalError(RuntimeError):
    """A fit produced non-finite iterates."""


@dataclass(frozen=True)
class Configuration:
    """A model: the subset of active columns, as 0-based sorted indices.

    Interchangeable with a binary p-vector via mask()/from_mask().
    """

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(j) for j in self.indices)
        if any(j < 0 for j in idx):
            raise ValueError("configuration indices must be nonnegative")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError("configuration indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_mask(cls, mask) -> "Configuration":
        mask = np.asarray(mask)
        return cls(tuple(int(j) for j in np.flatnonzero(mask)))

    def mask(self, p: int) -> np.ndarray:
        out = np.zeros(p, dtype=np.int8)
        if self.indices:
            out[list(self.indices)] = 1
        return out

    def flip(self, j: int) -> "Configuration":
        """Configuration with coordinate j toggled."""
        s = set(self.indices)
        if j in s:
            s.remove(j)
        else:
            s.add(j)
        return Configuration(tuple(sorted(s)))

    @property
    def size(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, j) -> bool:
        return j in self.indices


EMPTY = Configuration(())


@dataclass(frozen=True)
class NewtonControls:
    tol: float = 1e-8          # max-norm of the score at convergence
    max_iter: int = 50
    ridge: float = 1e-6        # stabilizer added to the Newton system only
    pred_clamp: float = 30.0   # |linear predictor| beyond which weights saturate
    cond_limit: float = 1e10   # Hessian condition estimate triggering the ridge


@dataclass(frozen=True)
class FitResult:
    """Newton fit of one configuration.

    beta_hat includes a trailing intercept coefficient when the dataset
    carries one; fisher_info is the observed information at beta_hat,
    without any ridge stabilization.
    """

    beta_hat: np.ndarray
    loglik: float
    fisher_info: np.ndarray
    converged: bool
    newton_iters: int
    separation: bool = False


def log1pexp(t):
    """log(1 + exp(t)), elementwise, safe for large |t|."""
    t = np.asarray(t, dtype=np.float64)
    return np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))


def design_submatrix(d: "Dataset", s: Configuration) -> np.ndarray:
    """Columns of d.x selected by s, plus a ones column when d.intercept."""
    if s.indices and s.indices[-1] >= d.p:
        raise ValueError(f"configuration index {s.indices[-1]} out of range for p={d.p}")
    xs = d.x[:, list(s.indices)] if s.indices else np.empty((d.n, 0))
    if d.intercept:
        xs = np.column_stack([xs, np.ones(d.n)])
    return xs


def n_coefficients(d: "Dataset", s: Configuration) -> int:
    return s.size + (1 if d.intercept else 0)


def _check_beta(d, s, beta_s):
    beta_s = np.asarray(beta_s, dtype=np.float64).ravel()
    k = n_coefficients(d, s)
    if beta_s.shape[0] != k:
        raise ValueError(f"expected {k} coefficients, got {beta_s.shape[0]}")
    if not np.all(np.isfinite(beta_s)):
        raise ValueError("coefficients must be finite")
    return beta_s


def log_likelihood(d: "Dataset", s: Configuration, beta_s) -> float:
    """sum_i [y_i t_i - log(1 + exp(t_i))] with t = X_S beta_S.

    The empty configuration of an intercept-free dataset scores -n log 2.
    """
    beta_s = _check_beta(d, s, beta_s)
    if beta_s.shape[0] == 0:
        return -d.n * np.log(2.0)
    t = design_submatrix(d, s) @ beta_s
    return float(np.sum(d.y * t - log1pexp(t)))


def score(d: "Dataset", s: Configuration, beta_s) -> np.ndarray:
    """Gradient of log_likelihood: X_S^T (y - sigmoid(X_S beta_S))."""
    beta_s = _check_beta(d, s, beta_s)
    xs = design_submatrix(d, s)
    t = xs @ beta_s
    mu = _expit(t)
    return xs.T @ (d.y - mu)


def _expit(t):
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def logistic_weights(d: "Dataset", s: Configuration, beta_s, pred_clamp: float = 30.0) -> np.ndarray:
    """IRLS weights exp(t)/(1+exp(t))^2, clamped at |t| <= pred_clamp."""
    beta_s = _check_beta(d, s, beta_s)
    if beta_s.shape[0] == 0:
        return np.full(d.n, 0.25)
    t = design_submatrix(d, s) @ beta_s
    t = np.clip(t, -pred_clamp, pred_clamp)
    mu = _expit(t)
    return mu * (1.0 - mu)


def fisher_information(d: "Dataset", s: Configuration, beta_s, pred_clamp: float = 30.0) -> np.ndarray:
    """Observed information X_S^T W X_S at beta_s."""
    xs = design_submatrix(d, s)
    w = logistic_weights(d, s, beta_s, pred_clamp)
    return (xs * w[:, None]).T @ xs


def fit_mle(d: "Dataset", s: Configuration, ctl: NewtonControls = NewtonControls()) -> FitResult:
    """Damped Newton fit of configuration s, starting from zero.

    Step halving keeps the log-likelihood nondecreasing, which is globally
    convergent for this concave objective unless the data are separated.
    Near-separation (a linear predictor beyond ctl.pred_clamp, or an
    ill-conditioned Hessian) switches the Newton system to a ridge-stabilized
    one and marks the result; the reported fisher_info never includes the
    ridge.
    """
    if s.size < 1:
        raise ValueError("fit_mle requires a nonempty configuration")
    if s.size >= d.n:
        raise ModelTooLargeError(f"configuration size {s.size} >= n={d.n}")
    xs = design_submatrix(d, s)
    k = xs.shape[1]
    y = d.y

    def loglik(beta):
        t = xs @ beta
        return float(np.sum(y * t - log1pexp(t)))

    beta = np.zeros(k)
    ll = loglik(beta)
    separation = False
    converged = False
    iters = 0
    for _ in range(ctl.max_iter):
        t = xs @ beta
        mu = _expit(t)
        g = xs.T @ (y - mu)
        if np.max(np.abs(g)) < ctl.tol:
            converged = True
            break
        iters += 1
        tc = np.clip(t, -ctl.pred_clamp, ctl.pred_clamp)
        muc = _expit(tc)
        w = muc * (1.0 - muc)
        hess = (xs * w[:, None]).T @ xs
        if np.max(np.abs(t)) > ctl.pred_clamp or np.linalg.cond(hess) > ctl.cond_limit:
            separation = True
        system = hess + ctl.ridge * np.eye(k) if separation else hess
        try:
            delta = np.linalg.solve(system, g)
        except np.linalg.LinAlgError:
            separation = True
            delta = np.linalg.solve(hess + ctl.ridge * np.eye(k), g)
        step = 1.0
        while True:
            cand = beta + step * delta
            ll_cand = loglik(cand)
            if np.isfinite(ll_cand) and ll_cand >= ll:
                beta = cand
                ll = ll_cand
                break
            step *= 0.5
            if step < 2.0 ** -40:
                break
        if not np.all(np.isfinite(beta)):
            raise NumericalError(f"non-finite Newton iterate for configuration {s.indices}")

    if not converged:
        converged = np.max(np.abs(score(d, s, beta))) < ctl.tol
    info = fisher_information(d, s, beta, ctl.pred_clamp)
    return FitResult(
        beta_hat=beta,
        loglik=ll,
        fisher_info=info,
        converged=bool(converged),
        newton_iters=iters,
        separation=separation,
    )
