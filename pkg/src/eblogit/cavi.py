"""Coordinate-ascent variational approximation of the model-space posterior.

The approximating family is a product of independent Bernoullis with
parameter vector phi.  The intractable expected log mass is replaced by a
closed-form surrogate built from a quadratic lower bound on the logistic
log-likelihood (free parameters eta, one per observation, tight at
eta_i = |linear predictor_i|) and a linear bound on the log binomial
coefficient.  Coordinate updates on the log-odds omega_j maximize the
surrogate exactly one coordinate at a time; eta is refreshed once per sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from . import kernels
from .glm import (
    Configuration,
    NumericalError,
    design_submatrix,
    fit_mle,
    log1pexp,
)
from .posterior import HyperParams

if TYPE_CHECKING:
    from .dataset import Dataset

PHI_CLAMP = 1e-12       # for entropy/log evaluation only; stored phi may hit 0/1
ETA_SMALL = 1e-8        # below this the curvature weight uses its 1/8 limit


@dataclass(frozen=True)
class CaviConfig:
    """Loop controls: entropy stopping threshold, sweep cap, initial phi
    (defaults to all 0.5), and the selection cutoff."""

    epsilon: float = 1e-5
    max_iter: int = 100
    phi_init: np.ndarray | None = None
    threshold: float = 0.5

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.phi_init is not None:
            init = np.asarray(self.phi_init, dtype=np.float64)
            if np.any(init < 0) or np.any(init > 1):
                raise ValueError("phi_init entries must lie in [0, 1]")
            object.__setattr__(self, "phi_init", init)


@dataclass
class VariationalState:
    """Current variational parameters: inclusion probabilities phi, their
    log-odds omega, bound parameters eta >= 0, and the sweep counter."""

    phi: np.ndarray
    omega: np.ndarray
    eta: np.ndarray
    sweep: int = 0


@dataclass
class CaviResult:
    phi: np.ndarray
    omega: np.ndarray
    eta: np.ndarray
    objective_trace: list[float]
    sweeps: int
    stopped_reason: str

    def selected(self, threshold: float = 0.5) -> Configuration:
        return Configuration.from_mask(self.phi >= threshold)

    def to_json_dict(self, threshold: float = 0.5) -> dict:
        return {
            "phi": [float(v) for v in self.phi],
            "omega": [float(v) for v in self.omega],
            "selected": list(self.selected(threshold).indices),
            "objective_trace": [float(v) for v in self.objective_trace],
            "sweeps": self.sweeps,
            "stopped_reason": self.stopped_reason,
        }


@dataclass
class SelectionResult:
    support: Configuration
    beta_refit: np.ndarray | None
    status: str  # ok | empty | too-large | separation | failed


def _clamp(phi):
    return np.clip(phi, PHI_CLAMP, 1.0 - PHI_CLAMP)


def binary_entropy(phi) -> np.ndarray:
    """Elementwise binary entropy in bits, with phi clamped away from 0/1."""
    z = _clamp(np.asarray(phi, dtype=np.float64))
    return -(z * np.log2(z) + (1.0 - z) * np.log2(1.0 - z))


def curvature_weights(eta) -> np.ndarray:
    """tanh(eta/2) / (4 eta), with the analytic limit 1/8 near zero."""
    eta = np.asarray(eta, dtype=np.float64)
    out = np.full_like(eta, 0.125)
    big = eta >= ETA_SMALL
    out[big] = np.tanh(eta[big] / 2.0) / (4.0 * eta[big])
    return out


def log_q(phi, s: Configuration) -> float:
    """Log mass of configuration s under the independent-Bernoulli family,
    with the 0 log 0 = 0 convention."""
    phi = np.asarray(phi, dtype=np.float64)
    if np.any(phi < 0) or np.any(phi > 1):
        raise ValueError("phi entries must lie in [0, 1]")
    mask = s.mask(phi.shape[0]).astype(bool)
    total = 0.0
    with np.errstate(divide="ignore"):
        lp = np.log(phi[mask])
        lq = np.log1p(-phi[~mask])
    total += float(np.sum(lp)) if lp.size else 0.0
    total += float(np.sum(lq)) if lq.size else 0.0
    return total


def logistic_lower_bound(d: "Dataset", s: Configuration, beta, eta) -> float:
    """Quadratic lower bound on the log-likelihood at (s, beta) with bound
    parameters eta >= 0; equals the log-likelihood when eta_i = |predictor_i|.
    """
    beta = np.asarray(beta, dtype=np.float64).ravel()
    if beta.shape[0] != d.p:
        raise ValueError(f"beta must have length p={d.p}")
    eta = np.asarray(eta, dtype=np.float64).ravel()
    if eta.shape[0] != d.n:
        raise ValueError(f"eta must have length n={d.n}")
    if np.any(eta < 0):
        raise ValueError("eta entries must be nonnegative")
    if s.size:
        m = d.x[:, list(s.indices)] @ beta[list(s.indices)]
    else:
        m = np.zeros(d.n)
    u = curvature_weights(eta)
    terms = -log1pexp(-eta) - eta / 2.0 + (d.y - 0.5) * m - u * (m * m - eta * eta)
    return float(np.sum(terms))


def update_eta(phi, d: "Dataset", beta_tilde) -> np.ndarray:
    """Optimal bound parameters: eta_i = sqrt(E_q M_i^2) under phi."""
    phi = np.asarray(phi, dtype=np.float64)
    bt = np.asarray(beta_tilde, dtype=np.float64)
    m = d.x @ (phi * bt)
    v = (d.x * d.x) @ (phi * (1.0 - phi) * bt * bt)
    return np.sqrt(v + m * m)


def _penalty_constant(p: int, h: HyperParams) -> float:
    """Constant part of the coordinate update: prior-size cost, spread
    credit, and the linear binomial bound."""
    return 0.5 * np.log1p(h.alpha * h.gamma) - (h.a + 1.0) * np.log(p) - 1.0


def _surrogate(phi, eta, x, y, bt, h: HyperParams) -> float:
    p = phi.shape[0]
    m = x @ (phi * bt)
    v = (x * x) @ (phi * (1.0 - phi) * bt * bt)
    u = curvature_weights(eta)
    c0 = 1.0 + (1.0 + h.a) * np.log(p) - 0.5 * np.log1p(h.alpha * h.gamma)
    data_terms = (-log1pexp(-eta) - eta / 2.0 + (y - 0.5) * m
                  - u * (v + m * m - eta * eta))
    z = _clamp(phi)
    entropy_nats = -(phi * np.log(z) + (1.0 - phi) * np.log1p(-z))
    return float(-c0 * np.sum(phi) + h.alpha * np.sum(data_terms) + np.sum(entropy_nats))


def surrogate_objective(state: VariationalState, d: "Dataset", beta_tilde,
                        h: HyperParams) -> float:
    """Closed-form lower bound on the negated KL objective at the given state."""
    bt = np.asarray(beta_tilde, dtype=np.float64)
    return _surrogate(np.asarray(state.phi, dtype=np.float64), np.asarray(state.eta, dtype=np.float64),
                      d.x, d.y, bt, h)


def update_coordinate(j: int, state: VariationalState, d: "Dataset", beta_tilde,
                      h: HyperParams) -> tuple[float, float]:
    """Exact coordinate maximizer of the surrogate in phi_j.

    Returns the new (omega_j, phi_j) without mutating the state; the sweep
    kernel applies the same arithmetic with an incrementally maintained mean
    predictor instead of the fresh one computed here.
    """
    phi = np.asarray(state.phi, dtype=np.float64)
    bt = np.asarray(beta_tilde, dtype=np.float64)
    u = curvature_weights(state.eta)
    xj = d.x[:, j]
    m_others = d.x @ (phi * bt) - phi[j] * bt[j] * xj
    w = (h.alpha * bt[j] * float((d.y - 0.5) @ xj)
         - h.alpha * bt[j] * float(u @ (xj * xj * bt[j] + 2.0 * xj * m_others))
         + _penalty_constant(d.p, h))
    if w >= 0:
        new_phi = 1.0 / (1.0 + np.exp(-w))
    else:
        e = np.exp(w)
        new_phi = e / (1.0 + e)
    return float(w), float(new_phi)


def run_cavi(d: "Dataset", beta_tilde, cfg: CaviConfig = CaviConfig(),
             h: HyperParams = HyperParams()) -> CaviResult:
    """Full coordinate-ascent loop.

    Each sweep updates omega/phi coordinate-by-coordinate in ascending
    order, then refreshes eta; the loop stops when the largest change in
    per-coordinate binary entropy falls to epsilon, or at max_iter sweeps.
    Deterministic: no randomness is involved.
    """
    if d.intercept:
        raise ValueError("the variational sweep is defined for intercept-free datasets")
    bt = np.asarray(beta_tilde, dtype=np.float64).ravel()
    if bt.shape[0] != d.p:
        raise ValueError(f"beta_tilde must have length p={d.p}")
    if not np.all(np.isfinite(bt)):
        raise ValueError("beta_tilde must be finite")
    if np.any(bt == 0.0):
        raise ValueError("beta_tilde must have no exact zeros (jitter the plug-in fit first)")

    n, p = d.n, d.p
    xf = np.asfortranarray(d.x)
    xsq = xf * xf
    yc_x = xf.T @ (d.y - 0.5)
    pen = _penalty_constant(p, h)
    bt2 = bt * bt

    if cfg.phi_init is not None:
        if cfg.phi_init.shape != (p,):
            raise ValueError(f"phi_init must have shape ({p},)")
        phi = cfg.phi_init.astype(np.float64).copy()
    else:
        phi = np.full(p, 0.5)
    z = _clamp(phi)
    omega = np.log(z) - np.log1p(-z)
    m = xf @ (phi * bt)
    eta = np.sqrt(xsq @ (phi * (1.0 - phi) * bt2) + m * m)

    trace: list[float] = []
    stopped = "max_iter"
    sweeps = 0
    for t in range(1, cfg.max_iter + 1):
        u = curvature_weights(eta)
        ent_prev = binary_entropy(phi)
        kernels.cavi_sweep(xf, yc_x, bt, u, m, phi, omega, h.alpha, pen)
        sweeps = t
        m = xf @ (phi * bt)  # refresh the running predictor at the sweep boundary
        eta = np.sqrt(xsq @ (phi * (1.0 - phi) * bt2) + m * m)
        obj = _surrogate(phi, eta, xf, d.y, bt, h)
        trace.append(obj)
        if not np.isfinite(obj):
            raise NumericalError(
                f"non-finite surrogate objective at sweep {t}; trace so far: {trace}"
            )
        if float(np.max(np.abs(binary_entropy(phi) - ent_prev))) <= cfg.epsilon:
            stopped = "entropy"
            break

    return CaviResult(
        phi=phi,
        omega=omega,
        eta=eta,
        objective_trace=trace,
        sweeps=sweeps,
        stopped_reason=stopped,
    )


def select_and_refit(phi_hat, d: "Dataset", threshold: float = 0.5) -> SelectionResult:
    """Threshold phi into a support and refit it by maximum likelihood.

    The refit is marked unavailable (beta_refit None) for the empty support,
    supports with at least n coordinates, separation-flagged fits, and
    numerical failures; these are signaled in the status, never raised.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    phi_hat = np.asarray(phi_hat, dtype=np.float64)
    support = Configuration.from_mask(phi_hat >= threshold)
    if support.size == 0:
        return SelectionResult(support, None, "empty")
    if support.size >= d.n:
        return SelectionResult(support, None, "too-large")
    try:
        fit = fit_mle(d, support)
    except NumericalError:
        return SelectionResult(support, None, "failed")
    if fit.separation:
        return SelectionResult(support, None, "separation")
    return SelectionResult(support, fit.beta_hat, "ok")
