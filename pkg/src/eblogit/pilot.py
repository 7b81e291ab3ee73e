"""Plug-in coefficient estimator for the variational sweep.

L1-penalized logistic regression fit by proximal Newton: an outer
quadratic approximation (IRLS) whose subproblem is solved by cyclic
coordinate descent with soft-thresholding, with warm starts down a
decreasing penalty grid and K-fold cross-validated deviance for the
penalty choice.  Exact zeros in the chosen fit are jittered afterwards,
since the coordinate updates downstream cannot move a coordinate whose
plug-in coefficient is exactly zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import kernels
from .glm import log1pexp

if TYPE_CHECKING:
    from .dataset import Dataset

# glmnet-style saturation guard for the IRLS weights
_PROB_EPS = 1e-5
_CD_TOL = 1e-12
_CD_MAX_SWEEPS = 2000


@dataclass(frozen=True)
class PilotEstimate:
    beta_tilde: np.ndarray
    lambda_used: float
    jitter_applied: bool = False


def soft_threshold(z: float, t: float) -> float:
    """sign(z) * max(|z| - t, 0)."""
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def coordinate_newton_update(g: float, h: float, lam: float, beta_old: float) -> float:
    """One penalized coordinate step: soft-threshold the Newton target.

    With gradient g and curvature h > 0 at beta_old, the unpenalized target
    is z = beta_old - g/h and the update is sign(z) max(|z| - lam/h, 0).
    """
    if not h > 0:
        raise ValueError("curvature must be positive")
    z = beta_old - g / h
    return soft_threshold(z, lam / h)


def lambda_max(x, y) -> float:
    """Smallest penalty that zeroes every coordinate: |x^T (y - 1/2)|_inf / n."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.max(np.abs(x.T @ (y - 0.5))) / x.shape[0])


def default_lambda_grid(x, y, num: int = 50, ratio: float = 0.01) -> np.ndarray:
    lmax = lambda_max(x, y)
    if lmax <= 0:
        lmax = 1.0
    return np.geomspace(lmax, ratio * lmax, num)


def penalized_objective(x, y, beta, lam: float) -> float:
    """Mean negative log-likelihood plus lam * ||beta||_1."""
    t = x @ beta
    nll = float(np.mean(log1pexp(t) - y * t))
    return nll + lam * float(np.sum(np.abs(beta)))


def _irls_weights(t, y):
    mu = np.empty_like(t)
    pos = t >= 0
    mu[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    mu[~pos] = e / (1.0 + e)
    # saturate: treat near-certain observations as exactly certain with a
    # floor weight, keeping the working response finite
    lo = mu < _PROB_EPS
    hi = mu > 1.0 - _PROB_EPS
    w = mu * (1.0 - mu)
    mu[lo] = 0.0
    mu[hi] = 1.0
    w[lo | hi] = _PROB_EPS
    return mu, w


def _fit_one(xf, y, lam, beta, pf, skip, max_outer=50, tol=1e-7):
    """Proximal Newton at one penalty, warm-started from beta (updated in place).

    A halved step toward the subproblem solution is taken whenever the full
    step would increase the penalized objective, which keeps the objective
    nonincreasing across outer iterations.
    """
    n = xf.shape[0]
    obj = penalized_objective(xf, y, beta, lam)
    for _ in range(max_outer):
        t = xf @ beta
        mu, w = _irls_weights(t, y)
        wn = w / n
        hjj = wn @ (xf * xf)
        r = np.where(w > 0, (y - mu) / w, 0.0)  # z - x beta with z the working response
        cand = beta.copy()
        kernels.lasso_cd(xf, wn, r, cand, hjj, lam, pf, skip, _CD_TOL, _CD_MAX_SWEEPS)
        step = 1.0
        while True:
            trial = beta + step * (cand - beta)
            obj_trial = penalized_objective(xf, y, trial, lam)
            if np.isfinite(obj_trial) and obj_trial <= obj + 1e-12:
                break
            step *= 0.5
            if step < 2.0 ** -30:
                trial = beta
                obj_trial = obj
                break
        delta = float(np.max(np.abs(trial - beta))) if beta.size else 0.0
        beta[:] = trial
        moved = obj - obj_trial
        obj = obj_trial
        if delta < tol and moved < 1e-10:
            break
    return beta


def l1_logistic_path(x, y, lambdas, skip=None, pf=None):
    """Coefficient path over a decreasing penalty grid with warm starts.

    Accepts lam >= 0 (a trailing zero gives the unpenalized fit, feasible
    only when it exists).  Returns an array of shape (len(lambdas), p).
    """
    xf = np.asfortranarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    p = xf.shape[1]
    lambdas = np.asarray(lambdas, dtype=np.float64)
    if lambdas.ndim != 1 or lambdas.size == 0:
        raise ValueError("penalty grid must be a nonempty 1-d sequence")
    if np.any(np.diff(lambdas) >= 0):
        raise ValueError("penalty grid must be strictly decreasing")
    if np.any(lambdas < 0):
        raise ValueError("penalties must be nonnegative")
    if skip is None:
        skip = np.zeros(p, dtype=np.int8)
    if pf is None:
        pf = np.ones(p)
    beta = np.zeros(p)
    path = np.empty((lambdas.size, p))
    for i, lam in enumerate(lambdas):
        _fit_one(xf, y, float(lam), beta, pf, skip)
        path[i] = beta
    return path


def _held_out_deviance(x, y, beta) -> float:
    t = x @ beta
    return float(2.0 * np.sum(log1pexp(t) - y * t))


def fit_l1_logistic(d: "Dataset", lambda_grid=None, folds: int = 5,
                    rng: np.random.Generator | None = None) -> PilotEstimate:
    """Cross-validated L1-penalized logistic fit of the full design.

    The fold assignment is the only randomness; the grid defaults to 50
    log-spaced penalties from lambda_max down to 0.01 * lambda_max.  Ties in
    the cross-validated deviance resolve to the larger penalty.  Constant
    columns are excluded from the penalized updates with a warning.
    """
    if folds < 2:
        raise ValueError("cross-validation needs at least 2 folds")
    if rng is None:
        rng = np.random.default_rng(0)
    x, y = d.x, d.y
    n, p = x.shape
    if folds > n:
        raise ValueError(f"cannot split n={n} observations into {folds} folds")
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(x, y)
    lambda_grid = np.asarray(lambda_grid, dtype=np.float64)
    if np.any(lambda_grid <= 0):
        raise ValueError("cross-validation grid must be strictly positive")

    skip = (np.ptp(x, axis=0) == 0).astype(np.int8)
    if d.intercept:
        x = np.column_stack([x, np.ones(n)])
        skip = np.append(skip, np.int8(0))
    if skip[:p].any():
        warnings.warn(f"{int(skip[:p].sum())} constant column(s) excluded from the penalized fit")
    pf = np.ones(x.shape[1])
    if d.intercept:
        pf[-1] = 0.0  # intercept never penalized

    perm = rng.permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    for k in range(folds):
        fold_of[perm[k::folds]] = k

    cv_dev = np.zeros(lambda_grid.size)
    for k in range(folds):
        test = fold_of == k
        train = ~test
        path = l1_logistic_path(x[train], y[train], lambda_grid, skip=skip, pf=pf)
        for i in range(lambda_grid.size):
            cv_dev[i] += _held_out_deviance(x[test], y[test], path[i])

    best = int(np.argmin(cv_dev))  # first minimum = largest penalty on ties
    full_path = l1_logistic_path(x, y, lambda_grid, skip=skip, pf=pf)
    beta = full_path[best][:p]  # drop the intercept coefficient if present
    return PilotEstimate(beta_tilde=beta, lambda_used=float(lambda_grid[best]))


def jitter_zeros(est: PilotEstimate, scale: float = 0.01,
                 rng: np.random.Generator | None = None) -> PilotEstimate:
    """Replace exact zeros with Unif(-scale, scale) draws, excluding zero."""
    if not scale > 0:
        raise ValueError("jitter scale must be positive")
    if rng is None:
        rng = np.random.default_rng(0)
    beta = np.array(est.beta_tilde, copy=True)
    zeros = beta == 0.0
    k = int(zeros.sum())
    if k:
        draws = rng.uniform(-scale, scale, size=k)
        while np.any(draws == 0.0):
            redo = draws == 0.0
            draws[redo] = rng.uniform(-scale, scale, size=int(redo.sum()))
        beta[zeros] = draws
    return PilotEstimate(beta_tilde=beta, lambda_used=est.lambda_used, jitter_applied=True)
