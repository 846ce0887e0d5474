"""Outcome distributions of POVMs and Renyi-family entropies, in bits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import DensityState
from .operators import as_matrix

NEGATIVE_TOL = 1e-12
SUM_TOL = 1e-10


@dataclass(frozen=True)
class OutcomeDistribution:
    """Classical distribution over labelled POVM outcomes.

    Entries in ``[-1e-12, 0)`` are roundoff and clamp to zero; anything more
    negative, or a total off by more than ``1e-10``, is an error.
    """

    labels: tuple
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float, copy=True).ravel()
        if len(self.labels) != len(p):
            raise ValueError("one label per probability required")
        if p.size and p.min() < -NEGATIVE_TOL:
            raise ValueError(f"probability {p.min():.3g} is negative beyond roundoff")
        p[p < 0] = 0.0
        total = p.sum()
        if abs(total - 1) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return len(self.probs)

    @classmethod
    def from_probs(cls, probs) -> "OutcomeDistribution":
        probs = np.asarray(probs, dtype=float).ravel()
        return cls(tuple(range(len(probs))), probs)


def outcome_distribution(povm, rho, completeness_tol: float = 1e-9) -> OutcomeDistribution:
    """Outcome probabilities ``Tr(K^dag K rho)`` of a Kraus set."""
    r = rho.matrix if isinstance(rho, DensityState) else as_matrix(rho)
    if r.shape != (povm.dim, povm.dim):
        raise ValueError(f"state shape {r.shape} does not match POVM dimension {povm.dim}")
    err = povm.completeness_error()
    if err > completeness_tol:
        raise ValueError(f"POVM completeness violated by {err:.3g}")
    return OutcomeDistribution(tuple(povm.labels), povm.probabilities(r))


def _probs(dist) -> np.ndarray:
    p = dist.probs if isinstance(dist, OutcomeDistribution) else np.asarray(dist, dtype=float)
    return p[p > 0]


def renyi_entropy(dist, alpha: float) -> float:
    """Order-``alpha`` Renyi entropy; ``alpha = inf`` is the min entropy."""
    if alpha <= 0:
        raise ValueError("Renyi order must be positive")
    if alpha == 1:
        raise ValueError("alpha = 1 is the von Neumann entropy; call von_neumann_entropy")
    p = _probs(dist)
    if math.isinf(alpha):
        return float(-np.log2(p.max()))
    return float(np.log2(np.sum(p**alpha)) / (1 - alpha))


def von_neumann_entropy(dist) -> float:
    p = _probs(dist)
    return float(-np.sum(p * np.log2(p)))


def entropy(dist, alpha: float) -> float:
    """Renyi entropy with ``alpha = 1`` routed to the von Neumann entropy."""
    return von_neumann_entropy(dist) if alpha == 1 else renyi_entropy(dist, alpha)


def min_entropy(dist) -> float:
    return renyi_entropy(dist, math.inf)


def max_entropy(dist) -> float:
    return renyi_entropy(dist, 0.5)


def entropy_pair_beta(alpha: float) -> float:
    """Conjugate order with ``1/alpha + 1/beta = 2``."""
    if alpha <= 0.5:
        raise ValueError("the conjugate order exists only for alpha > 1/2")
    if math.isinf(alpha):
        return 0.5
    return alpha / (2 * alpha - 1)


__all__ = [
    "OutcomeDistribution",
    "entropy",
    "entropy_pair_beta",
    "max_entropy",
    "min_entropy",
    "outcome_distribution",
    "renyi_entropy",
    "von_neumann_entropy",
]
