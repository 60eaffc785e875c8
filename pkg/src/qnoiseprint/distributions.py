"""Outcome distributions, smoothing, error-state restriction and divergences.

All logarithms are natural, so divergences are in nats.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceUndefined, InvalidArgument, NoErrorMass

SUM_TOL = 1e-9


def _validated_probs(probs, size: int, what: str) -> np.ndarray:
    arr = np.array(probs, dtype=np.float64)
    if arr.shape != (size,):
        raise InvalidArgument(f"{what} needs {size} entries, got shape {arr.shape}")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{what} entries must be finite and nonnegative")
    total = float(arr.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise InvalidArgument(f"{what} must sum to 1, sums to {total!r}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities over all ``2**n`` basis states, indexed by basis-state index."""

    n: int
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _validated_probs(self.probs, 2**self.n, "outcome distribution"))

    def indices(self) -> np.ndarray:
        return np.arange(2**self.n)


@dataclass(frozen=True)
class ErrorStateDistribution:
    """Probabilities over the ``2**n - 2`` basis states other than 0...0 and 1...1.

    ``probs[i]`` belongs to basis index ``i + 1``.
    """

    n: int
    probs: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgument("error states need at least 2 qubits")
        object.__setattr__(self, "probs", _validated_probs(self.probs, 2**self.n - 2, "error-state distribution"))

    def indices(self) -> np.ndarray:
        return np.arange(1, 2**self.n - 1)


@dataclass(frozen=True)
class SmoothingPolicy:
    alpha: float = 0.5

    def __post_init__(self):
        if not self.alpha >= 0:
            raise InvalidArgument(f"alpha must be >= 0, got {self.alpha}")


def _probs(dist) -> np.ndarray:
    return np.asarray(getattr(dist, "probs", dist), dtype=np.float64)


def empirical_from_counts(counts) -> OutcomeDistribution:
    if counts.shots < 1:
        raise InvalidArgument("cannot form a distribution from zero shots")
    return OutcomeDistribution(counts.n, counts.histogram / counts.shots)


def smooth(counts, policy: SmoothingPolicy | float = SmoothingPolicy()) -> OutcomeDistribution:
    """Add ``alpha`` pseudocounts to every bin and normalize."""
    alpha = policy.alpha if isinstance(policy, SmoothingPolicy) else SmoothingPolicy(policy).alpha
    if counts.shots < 1:
        raise InvalidArgument("cannot smooth zero shots")
    if alpha == 0:
        return empirical_from_counts(counts)
    dim = 2**counts.n
    return OutcomeDistribution(counts.n, (counts.histogram + alpha) / (counts.shots + alpha * dim))


def restrict_to_error_states(dist: OutcomeDistribution) -> ErrorStateDistribution:
    probs = _probs(dist)
    inner = probs[1:-1]
    mass = float(inner.sum())
    if dist.n < 2 or mass <= 0:
        raise NoErrorMass("no probability mass on error states; smooth the counts first")
    return ErrorStateDistribution(dist.n, inner / mass)


def kl_divergence(p, q) -> float:
    """D(p || q) = sum_x p(x) ln(p(x) / q(x)), with 0 ln 0 = 0."""
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise InvalidArgument(f"length mismatch: {p.shape} vs {q.shape}")
    support = p > 0
    if np.any(q[support] <= 0):
        raise DivergenceUndefined("q vanishes where p has mass")
    ps, qs = p[support], q[support]
    # Rounding can push the sum a hair below zero for near-identical inputs.
    return max(float(np.sum(ps * np.log(ps / qs))), 0.0)


def total_variation(p, q) -> float:
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise InvalidArgument(f"length mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.sum(np.abs(p - q)))


def kl_matrix(dists) -> np.ndarray:
    """Entry (i, j) is D(dists[i] || dists[j])."""
    dists = list(dists)
    size = len(dists)
    out = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            if i != j:
                out[i, j] = kl_divergence(dists[i], dists[j])
    return out
