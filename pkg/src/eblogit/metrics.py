"""Support-recovery metrics and the variational-vs-MCMC distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .glm import Configuration


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(s_hat: Configuration, s_star: Configuration, p: int) -> ConfusionCounts:
    hat = set(s_hat.indices)
    star = set(s_star.indices)
    if (hat | star) and max(hat | star) >= p:
        raise ValueError(f"configuration index out of range for p={p}")
    tp = len(hat & star)
    fp = len(hat - star)
    fn = len(star - hat)
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=p - tp - fp - fn)


def tpr(c: ConfusionCounts) -> float:
    """TP / (TP + FN); nan when there are no true signals."""
    den = c.tp + c.fn
    return c.tp / den if den else float("nan")


def fdr(c: ConfusionCounts) -> float:
    """FP / (TP + FP); 0 when nothing was discovered."""
    den = c.tp + c.fp
    return c.fp / den if den else 0.0


def tnr(c: ConfusionCounts) -> float:
    """TN / (TN + FP); nan when there are no true noise coordinates."""
    den = c.tn + c.fp
    return c.tn / den if den else float("nan")


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation coefficient; 0 when any factor vanishes."""
    factors = [(c.tp + c.fp), (c.tp + c.fn), (c.tn + c.fp), (c.tn + c.fn)]
    if any(f == 0 for f in factors):
        return 0.0
    num = float(c.tp) * c.tn - float(c.fp) * c.fn
    return num / float(np.sqrt(np.prod([float(f) for f in factors])))


def d_distance(phi_runs, pi_runs) -> float:
    """Root-mean-square per-coordinate gap between two R x p probability
    matrices, with the expectation over data taken as the mean over runs."""
    phi_runs = np.atleast_2d(np.asarray(phi_runs, dtype=np.float64))
    pi_runs = np.atleast_2d(np.asarray(pi_runs, dtype=np.float64))
    if phi_runs.shape != pi_runs.shape:
        raise ValueError(f"shape mismatch: {phi_runs.shape} vs {pi_runs.shape}")
    if phi_runs.shape[0] < 1:
        raise ValueError("need at least one run")
    p = phi_runs.shape[1]
    sq = np.sum((pi_runs - phi_runs) ** 2, axis=1)
    return float(np.sqrt(np.mean(sq) / p))
