"""Metropolis-Hastings over configurations with single-coordinate flips.

The baseline sampler: symmetric proposals that toggle one uniformly chosen
coordinate, a hard cap on model size (proposals beyond the cap are rejected,
which redefines the target as zero out there and preserves reversibility on
the truncated space), and inclusion probabilities as post-burn-in indicator
averages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .glm import Configuration, ModelTooLargeError, NumericalError
from .posterior import FitCache, HyperParams, log_marginal_unnorm

if TYPE_CHECKING:
    from .dataset import Dataset


@dataclass(frozen=True)
class ChainConfig:
    """samples is the number of post-burn-in states averaged; the chain runs
    burn_in + samples steps in total.  smax defaults to min(n // 2, 50)."""

    samples: int = 10_000
    burn_in: int | None = None
    smax: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.burn_in is not None and not 0 <= self.burn_in < self.samples:
            raise ValueError("burn_in must satisfy 0 <= burn_in < samples")

    def resolved_burn_in(self) -> int:
        return self.samples // 5 if self.burn_in is None else self.burn_in

    def resolved_smax(self, n: int) -> int:
        smax = min(n // 2, 50) if self.smax is None else self.smax
        if not 0 < smax < n:
            raise ValueError(f"smax={smax} must satisfy 0 < smax < n={n}")
        return smax


@dataclass
class ChainResult:
    inclusion: np.ndarray
    visited: int
    accept_rate: float
    map_config: Configuration
    map_log_post: float

    def to_json_dict(self) -> dict:
        return {
            "inclusion": [float(v) for v in self.inclusion],
            "accept_rate": float(self.accept_rate),
            "visited": int(self.visited),
            "map_config": list(self.map_config.indices),
        }


def mh_run(d: "Dataset", h: HyperParams, cfg: ChainConfig,
           rng: np.random.Generator | None = None,
           cache: FitCache | None = None,
           log_target=None) -> ChainResult:
    """Run one chain from the empty configuration.

    log_target overrides the posterior log mass (used by tests); numerical
    failures in a proposal score as log mass -inf, i.e. rejection.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if cache is None:
        cache = FitCache()
    p = d.p
    burn_in = cfg.resolved_burn_in()
    smax = cfg.resolved_smax(d.n)
    total = burn_in + cfg.samples

    if log_target is None:
        def log_target(s):
            return log_marginal_unnorm(d, s, h, cache)

    current = Configuration(())
    cur_lp = float(log_target(current))
    mask = np.zeros(p)
    counts = np.zeros(p)
    visited = {current.indices}
    best = (cur_lp, current)
    accepted = 0

    for step in range(total):
        j = int(rng.integers(p))
        adding = mask[j] == 0.0
        if not (adding and current.size + 1 > smax):
            proposal = current.flip(j)
            try:
                prop_lp = float(log_target(proposal))
            except (NumericalError, ModelTooLargeError):
                prop_lp = -np.inf
            u = rng.random()
            if np.isfinite(prop_lp) and u < np.exp(min(0.0, prop_lp - cur_lp)):
                current = proposal
                cur_lp = prop_lp
                mask[j] = 1.0 - mask[j]
                accepted += 1
                visited.add(current.indices)
                if cur_lp > best[0]:
                    best = (cur_lp, current)
        if step >= burn_in:
            counts += mask

    return ChainResult(
        inclusion=counts / cfg.samples,
        visited=len(visited),
        accept_rate=accepted / total,
        map_config=best[1],
        map_log_post=best[0],
    )


def inclusion_from_chain(states, p: int) -> np.ndarray:
    """Coordinate-wise mean of the binary state vectors."""
    states = list(states)
    if not states:
        raise ValueError("chain must be nonempty")
    counts = np.zeros(p)
    for s in states:
        counts += s.mask(p)
    return counts / len(states)
