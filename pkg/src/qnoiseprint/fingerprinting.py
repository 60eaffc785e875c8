"""Noise fingerprints and the open-set transmitter classifier.

A fingerprint is the smoothed measurement distribution of one transmitter,
optionally restricted to the error states.  Classification either picks the
reference with the smallest KL divergence from the observed distribution, or
the reference under which the observed counts are most likely as a
multinomial sample.  Both modes can reject: the observation is then not
attributed to any enrolled transmitter.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .distributions import (
    ErrorStateDistribution,
    OutcomeDistribution,
    SmoothingPolicy,
    kl_divergence,
    restrict_to_error_states,
    smooth,
)
from .errors import DivergenceUndefined, InvalidArgument
from .quantum_sim import Counts


class Mode(str, enum.Enum):
    MIN_KL = "min-kl"
    MULTINOMIAL = "multinomial"


class Domain(str, enum.Enum):
    ERROR_ONLY = "error-only"
    FULL = "full"


class KLDirection(str, enum.Enum):
    OBSERVED_REFERENCE = "observed-reference"
    REFERENCE_OBSERVED = "reference-observed"


@dataclass(frozen=True)
class ClassifierConfig:
    mode: Mode = Mode.MIN_KL
    domain: Domain = Domain.ERROR_ONLY
    rejection_threshold: float = 0.0
    margin: float = 3.0
    alpha: float = 0.5
    kl_direction: KLDirection = KLDirection.OBSERVED_REFERENCE

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "domain", Domain(self.domain))
        object.__setattr__(self, "kl_direction", KLDirection(self.kl_direction))
        if not self.rejection_threshold >= 0:
            raise InvalidArgument(f"rejection threshold must be >= 0, got {self.rejection_threshold}")
        if not self.margin >= 1:
            raise InvalidArgument(f"margin must be >= 1, got {self.margin}")
        SmoothingPolicy(self.alpha)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "domain": self.domain.value,
            "rejection_threshold": self.rejection_threshold,
            "margin": self.margin,
            "alpha": self.alpha,
            "kl_direction": self.kl_direction.value,
        }


@dataclass(frozen=True)
class NoiseFingerprint:
    node_id: int
    n: int
    domain: Domain
    reference: ErrorStateDistribution | OutcomeDistribution
    training_shots: int
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        expected = ErrorStateDistribution if self.domain is Domain.ERROR_ONLY else OutcomeDistribution
        if not isinstance(self.reference, expected) or self.reference.n != self.n:
            raise InvalidArgument(f"reference does not match domain {self.domain.value} at n={self.n}")
        if self.training_shots < 1:
            raise InvalidArgument("training_shots must be >= 1")


@dataclass(frozen=True)
class AuthDecision:
    """Outcome of one classification.

    ``accepted_id`` is the accepted identity or ``None`` for Reject.
    ``candidate_id`` is the best-scoring profile whether or not it passed.
    """

    accepted_id: int | None
    candidate_id: int
    scores: Mapping[int, float] = field(default_factory=dict)
    best_score: float = 0.0
    threshold: float = 0.0

    @property
    def accepted(self) -> bool:
        return self.accepted_id is not None

    @property
    def verdict(self) -> str:
        return "accept" if self.accepted else "reject"


def domain_counts(counts: Counts, domain: Domain) -> np.ndarray:
    hist = counts.histogram
    return hist[1:-1] if Domain(domain) is Domain.ERROR_ONLY else hist


def observed_distribution(counts: Counts, domain: Domain, alpha: float):
    """Smoothed distribution of ``counts`` over the scoring domain."""
    dist = smooth(counts, SmoothingPolicy(alpha))
    if Domain(domain) is Domain.ERROR_ONLY:
        return restrict_to_error_states(dist)
    return dist


def train_fingerprint(node_id: int, counts: Counts, config: ClassifierConfig = ClassifierConfig()) -> NoiseFingerprint:
    if counts.shots < 1:
        raise InvalidArgument("training needs at least one shot")
    reference = observed_distribution(counts, config.domain, config.alpha)
    return NoiseFingerprint(node_id, counts.n, config.domain, reference, counts.shots, config.alpha)


def _score_kl(observed, reference, direction: KLDirection) -> float:
    if direction is KLDirection.OBSERVED_REFERENCE:
        return kl_divergence(observed, reference)
    return kl_divergence(reference, observed)


def threshold_from_divergences(divergences: Sequence[float], margin: float) -> float:
    if len(divergences) == 0:
        raise InvalidArgument("need at least one validation divergence")
    if not margin >= 1:
        raise InvalidArgument(f"margin must be >= 1, got {margin}")
    return margin * max(divergences)


def calibrate_threshold(profile: NoiseFingerprint, validation_counts: Sequence[Counts], margin: float = 3.0,
                        direction: KLDirection = KLDirection.OBSERVED_REFERENCE) -> float:
    """Margin times the worst KL between held-out batches and the profile itself."""
    if not validation_counts:
        raise InvalidArgument("validation list is empty")
    divergences = [
        _score_kl(observed_distribution(c, profile.domain, profile.alpha), profile.reference, KLDirection(direction))
        for c in validation_counts
    ]
    return threshold_from_divergences(divergences, margin)


def multinomial_loglik(counts: Counts, profile: NoiseFingerprint) -> float:
    """sum_x c_x ln p_x over the profile's domain; the multinomial coefficient is dropped."""
    if counts.n != profile.n:
        raise InvalidArgument(f"counts have {counts.n} qubits, profile has {profile.n}")
    c = domain_counts(counts, profile.domain)
    p = profile.reference.probs
    hit = c > 0
    if np.any(p[hit] <= 0):
        raise DivergenceUndefined(f"profile {profile.node_id} has zero mass on an observed outcome")
    return float(np.sum(c[hit] * np.log(p[hit])))


def _check_profiles(observed: Counts, profiles: Sequence[NoiseFingerprint], config: ClassifierConfig):
    if not profiles:
        raise InvalidArgument("no profiles to classify against")
    if any(p.n != observed.n for p in profiles):
        raise InvalidArgument("profiles and observation must share the qubit count")
    if any(p.domain is not config.domain for p in profiles):
        raise InvalidArgument(f"all profiles must use domain {config.domain.value}")
    ids = [p.node_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise InvalidArgument("duplicate node ids in profile set")
    return sorted(profiles, key=lambda p: p.node_id)


def classify(observed: Counts, profiles: Sequence[NoiseFingerprint], config: ClassifierConfig = ClassifierConfig(),
             thresholds: Mapping[int, float] | None = None) -> AuthDecision:
    """Attribute ``observed`` to one enrolled profile or reject it.

    ``thresholds`` maps node id to a per-profile threshold; profiles missing
    from it use ``config.rejection_threshold``.  Ties go to the smallest id.
    """
    ordered = _check_profiles(observed, profiles, config)
    thresholds = thresholds or {}

    if config.mode is Mode.MIN_KL:
        obs = observed_distribution(observed, config.domain, config.alpha)
        scores = {p.node_id: _score_kl(obs, p.reference, config.kl_direction) for p in ordered}
        best_id = min(scores, key=lambda j: (scores[j], j))
        best = scores[best_id]
        theta = thresholds.get(best_id, config.rejection_threshold)
        return AuthDecision(best_id if best <= theta else None, best_id, scores, best, theta)

    total = int(domain_counts(observed, config.domain).sum())
    raw = {p.node_id: multinomial_loglik(observed, p) for p in ordered}
    best_id = max(raw, key=lambda j: (raw[j], -j))
    theta = thresholds.get(best_id, config.rejection_threshold)
    if total == 0:
        return AuthDecision(None, best_id, {j: 0.0 for j in raw}, 0.0, theta)
    scores = {j: s / total for j, s in raw.items()}
    if len(raw) == 1:
        passed = scores[best_id] >= -theta
    else:
        second = max(s for j, s in raw.items() if j != best_id)
        passed = (raw[best_id] - second) / total >= theta
    return AuthDecision(best_id if passed else None, best_id, scores, scores[best_id], theta)
