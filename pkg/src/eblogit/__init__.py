"""Empirical-Bayes variable selection for high-dimensional logistic
regression.

A data-centered Gaussian prior on the active coefficients combined with a
complexity prior on the model yields, after a Laplace step, a closed-form
unnormalized posterior over configurations.  This package approximates that
posterior three ways: an independent-Bernoulli variational fit by coordinate
ascent (the fast path), a Metropolis-Hastings chain over configurations (the
baseline), and exact truncated enumeration (the oracle for small p).
"""

__version__ = "0.1.0"

from .cavi import (
    CaviConfig,
    CaviResult,
    SelectionResult,
    VariationalState,
    run_cavi,
    select_and_refit,
)
from .dataset import Dataset, SimScenario, load_csv, sample_response, simulate_dataset
from .glm import Configuration, FitResult, NewtonControls, fit_mle
from .mcmc import ChainConfig, ChainResult, mh_run
from .metrics import ConfusionCounts, confusion, d_distance, fdr, mcc, tnr, tpr
from .pilot import PilotEstimate, fit_l1_logistic, jitter_zeros
from .posterior import (
    FitCache,
    HyperParams,
    PosteriorTable,
    enumerate_posterior,
    log_marginal_unnorm,
)

__all__ = [
    "CaviConfig",
    "CaviResult",
    "ChainConfig",
    "ChainResult",
    "Configuration",
    "ConfusionCounts",
    "Dataset",
    "FitCache",
    "FitResult",
    "HyperParams",
    "NewtonControls",
    "PilotEstimate",
    "PosteriorTable",
    "SelectionResult",
    "SimScenario",
    "VariationalState",
    "confusion",
    "d_distance",
    "enumerate_posterior",
    "fdr",
    "fit_l1_logistic",
    "fit_mle",
    "jitter_zeros",
    "load_csv",
    "log_marginal_unnorm",
    "mcc",
    "mh_run",
    "run_cavi",
    "sample_response",
    "select_and_refit",
    "simulate_dataset",
    "tnr",
    "tpr",
]
