"""Simulated constellation: training exercises, online authentication, MITM trials.

Noise parameters belong to the transmitting device only, and the channel is
ideal, so every verifier observes the same fingerprint for a given claimant.
All randomness is derived from ``master_seed`` through stream keys naming the
purpose and indices of each draw.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import rng
from .distributions import kl_matrix
from .errors import ConfigError, InvalidArgument, ProtocolStateError
from .fingerprinting import (
    AuthDecision,
    ClassifierConfig,
    Mode,
    NoiseFingerprint,
    calibrate_threshold,
    classify,
    train_fingerprint,
)
from .quantum_sim import (
    DeviceNoiseParams,
    DeviceRanges,
    build_ghz_circuit,
    draw_device,
    sample_shots,
)


@dataclass(frozen=True)
class AdversaryConfig:
    """Regenerating man-in-the-middle.

    Uses ``device`` if given; otherwise the impersonated node's device with
    every readout error raised by ``readout_offset`` (``identical=True`` copies
    the genuine device bit for bit).
    """

    claimed_id: int
    verifier_id: int
    device: DeviceNoiseParams | None = None
    readout_offset: float = 0.05
    identical: bool = False
    trials: int | None = None

    def to_dict(self) -> dict:
        return {
            "claimed_id": self.claimed_id,
            "verifier_id": self.verifier_id,
            "device": None if self.device is None else self.device.to_dict(),
            "readout_offset": self.readout_offset,
            "identical": self.identical,
            "trials": self.trials,
        }


@dataclass(frozen=True)
class ConstellationConfig:
    m: int
    n: int = 5
    k: int = 1000
    k_train: int = 10_000
    master_seed: int = 0
    device_ranges: DeviceRanges = DeviceRanges()
    classifier: ClassifierConfig = ClassifierConfig()
    trials_per_pair: int = 100
    holdout_fraction: float = 0.2
    adversary: AdversaryConfig | None = None
    neighbors: Mapping[int, tuple] | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name, lo in (("m", 2), ("n", 1), ("k", 1), ("k_train", 1), ("trials_per_pair", 0)):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(name, f"expected an integer, got {value!r}")
            if value < lo:
                raise ConfigError(name, f"must be >= {lo}, got {value}")
        if self.n > 12:
            raise ConfigError("n", f"must be <= 12, got {self.n}")
        if self.n < 2 and self.classifier.domain.value == "error-only":
            raise ConfigError("n", "error-state fingerprints need n >= 2")
        try:
            rng.check_seed(self.master_seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError("master_seed", str(exc)) from None
        if self.k_train < 5 * self.k:
            raise ConfigError("k_train", f"must be at least 5*k = {5 * self.k}, got {self.k_train}")
        if self.k_train < 10 * self.k:
            warnings.warn(f"k_train={self.k_train} is below 10*k; thresholds will be calibrated on few batches",
                          stacklevel=3)
        if not 0 < self.holdout_fraction < 1:
            raise ConfigError("holdout_fraction", f"must be in (0, 1), got {self.holdout_fraction}")
        if int(self.k_train * self.holdout_fraction) < self.k:
            raise ConfigError("holdout_fraction", "held-out shots must cover at least one batch of k shots")
        if self.neighbors is not None:
            for node, peers in self.neighbors.items():
                for peer in peers:
                    if peer == node or not (1 <= peer <= self.m and 1 <= node <= self.m):
                        raise ConfigError(f"neighbors.{node}", f"invalid peer {peer}")
        adv = self.adversary
        if adv is not None:
            for name in ("claimed_id", "verifier_id"):
                if not 1 <= getattr(adv, name) <= self.m:
                    raise ConfigError(f"adversary.{name}", f"must be a node id in 1..{self.m}")
            if adv.claimed_id == adv.verifier_id:
                raise ConfigError("adversary.claimed_id", "must differ from verifier_id")
            if not 0 <= adv.readout_offset < 0.5:
                raise ConfigError("adversary.readout_offset", "must be in [0, 0.5)")
            if adv.device is not None and adv.device.n != self.n:
                raise ConfigError("adversary.device", f"device must have {self.n} qubits")
            if adv.trials is not None and adv.trials < 0:
                raise ConfigError("adversary.trials", "must be >= 0")

    def peers_of(self, node_id: int) -> tuple[int, ...]:
        if self.neighbors is None:
            return tuple(j for j in range(1, self.m + 1) if j != node_id)
        return tuple(sorted(self.neighbors.get(node_id, ())))

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "k_train": self.k_train,
            "master_seed": self.master_seed,
            "trials_per_pair": self.trials_per_pair,
            "holdout_fraction": self.holdout_fraction,
            "device_ranges": self.device_ranges.to_dict(),
            "classifier": self.classifier.to_dict(),
            "adversary": None if self.adversary is None else self.adversary.to_dict(),
            "neighbors": None if self.neighbors is None
            else {str(k): list(v) for k, v in sorted(self.neighbors.items())},
        }


@dataclass(frozen=True)
class SatelliteNode:
    node_id: int
    device: DeviceNoiseParams
    classifier: ClassifierConfig = ClassifierConfig()
    profiles: Mapping[int, NoiseFingerprint] = field(default_factory=dict)
    thresholds: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.node_id in self.profiles:
            raise InvalidArgument(f"node {self.node_id} cannot hold its own profile")

    @property
    def trained(self) -> bool:
        return bool(self.profiles)


@dataclass
class ExperimentMetrics:
    genuine_trials: int
    genuine_accepts: int
    impostor_trials: int
    impostor_accepts: int
    # confusion[verifier][claimant][decided], decided is a node id or "reject"
    confusion: dict
    decisions: list

    @property
    def genuine_accept_rate(self) -> float:
        return self.genuine_accepts / self.genuine_trials if self.genuine_trials else 0.0

    @property
    def false_reject_rate(self) -> float:
        return 1.0 - self.genuine_accept_rate if self.genuine_trials else 0.0

    @property
    def false_accept_rate(self) -> float | None:
        return self.impostor_accepts / self.impostor_trials if self.impostor_trials else None

    def summary(self) -> dict:
        return {
            "genuine_trials": self.genuine_trials,
            "genuine_accepts": self.genuine_accepts,
            "genuine_accept_rate": self.genuine_accept_rate,
            "false_reject_rate": self.false_reject_rate,
            "impostor_trials": self.impostor_trials,
            "impostor_accepts": self.impostor_accepts,
            "false_accept_rate": self.false_accept_rate,
            "confusion": self.confusion,
        }


@dataclass
class ExperimentResult:
    config: ConstellationConfig
    nodes: list
    device_counts: dict
    device_profiles: list
    kl: np.ndarray
    metrics: ExperimentMetrics


def draw_devices(config: ConstellationConfig) -> dict[int, DeviceNoiseParams]:
    return {
        j: draw_device(config.n, rng.derive_seed(config.master_seed, "device", j), config.device_ranges)
        for j in range(1, config.m + 1)
    }


def offset_readout(device: DeviceNoiseParams, delta: float, device_seed: int | None = None) -> DeviceNoiseParams:
    """Copy of ``device`` with every readout error raised by ``delta`` (capped below 0.5)."""
    cap = np.nextafter(0.5, 0)
    readout = tuple((min(e01 + delta, cap), min(e10 + delta, cap)) for e01, e10 in device.readout)
    seed = device.device_seed if device_seed is None else device_seed
    return replace(device, readout=readout, device_seed=seed)


def run_training_phase(config: ConstellationConfig, devices: Mapping[int, DeviceNoiseParams] | None = None) -> list:
    """Every node samples each neighbor's transmitter and learns its fingerprint.

    Of the ``k_train`` shots per neighbor, ``holdout_fraction`` is held out in
    batches of ``k`` to calibrate that neighbor's rejection threshold.
    """
    devices = dict(devices) if devices is not None else draw_devices(config)
    circuit = build_ghz_circuit(config.n)
    clf = config.classifier
    holdout = int(config.k_train * config.holdout_fraction)
    n_batches = holdout // config.k
    fit_shots = config.k_train - holdout
    nodes = []
    for i in range(1, config.m + 1):
        profiles, thresholds = {}, {}
        for j in config.peers_of(i):
            seed = rng.derive_seed(config.master_seed, "train", i, j)
            counts = sample_shots(devices[j], circuit, fit_shots, seed)
            profile = train_fingerprint(j, counts, clf)
            if clf.mode is Mode.MIN_KL:
                batches = [
                    sample_shots(devices[j], circuit, config.k, rng.derive_seed(config.master_seed, "holdout", i, j, b))
                    for b in range(n_batches)
                ]
                thresholds[j] = calibrate_threshold(profile, batches, clf.margin, clf.kl_direction)
            else:
                thresholds[j] = clf.rejection_threshold
            profiles[j] = profile
        nodes.append(SatelliteNode(i, devices[i], clf, profiles, thresholds))
    return nodes


def _claim(raw: AuthDecision, claimed_id: int) -> AuthDecision:
    # The claim holds only if the classifier identifies exactly the claimed node.
    return replace(raw, accepted_id=claimed_id if raw.accepted_id == claimed_id else None)


def _decide(verifier: SatelliteNode, counts, claimed_id: int) -> AuthDecision:
    return _claim(identify(verifier, counts), claimed_id)


def identify(verifier: SatelliteNode, counts) -> AuthDecision:
    """Open-set identification without a claimed identity."""
    if not verifier.trained:
        raise ProtocolStateError(f"node {verifier.node_id} has not been trained")
    return classify(counts, list(verifier.profiles.values()), verifier.classifier, verifier.thresholds)


def authenticate_peer(verifier: SatelliteNode, claimant: SatelliteNode, k: int, seed: int,
                      claimed_id: int | None = None) -> AuthDecision:
    """Claimant transmits ``k`` GHZ shots; verifier accepts iff it identifies the claimed id."""
    if not verifier.trained:
        raise ProtocolStateError(f"node {verifier.node_id} has not been trained")
    counts = sample_shots(claimant.device, build_ghz_circuit(claimant.device.n), k, seed)
    return _decide(verifier, counts, claimant.node_id if claimed_id is None else claimed_id)


def run_mitm_attack(verifier: SatelliteNode, adversary: AdversaryConfig, k: int, seed: int) -> AuthDecision:
    if adversary.device is None:
        raise InvalidArgument("adversary device must be resolved before the attack")
    if adversary.verifier_id != verifier.node_id:
        raise InvalidArgument(f"adversary targets node {adversary.verifier_id}, not {verifier.node_id}")
    if not verifier.trained:
        raise ProtocolStateError(f"node {verifier.node_id} has not been trained")
    counts = sample_shots(adversary.device, build_ghz_circuit(adversary.device.n), k, seed)
    return _decide(verifier, counts, adversary.claimed_id)


def resolve_adversary(config: ConstellationConfig, devices: Mapping[int, DeviceNoiseParams]) -> AdversaryConfig:
    adv = config.adversary
    if adv.device is not None:
        return adv
    genuine = devices[adv.claimed_id]
    if adv.identical:
        return replace(adv, device=genuine)
    seed = rng.derive_seed(config.master_seed, "adversary")
    return replace(adv, device=offset_readout(genuine, adv.readout_offset, seed))


def run_experiment(config: ConstellationConfig, out_dir=None) -> ExperimentResult:
    """Training, all-pairs genuine trials and optional MITM trials.

    With ``out_dir`` the artifacts are written there as well.
    """
    devices = draw_devices(config)
    nodes = run_training_phase(config, devices)
    by_id = {node.node_id: node for node in nodes}
    circuit = build_ghz_circuit(config.n)

    device_counts = {
        j: sample_shots(dev, circuit, config.k_train, rng.derive_seed(config.master_seed, "profile", j))
        for j, dev in devices.items()
    }
    device_profiles = [train_fingerprint(j, c, config.classifier) for j, c in device_counts.items()]
    kl = kl_matrix([p.reference for p in device_profiles])

    decisions = []
    confusion = {}
    genuine = genuine_ok = 0
    for verifier in nodes:
        rows = {}
        for j in config.peers_of(verifier.node_id):
            row = {str(p): 0 for p in config.peers_of(verifier.node_id)}
            row["reject"] = 0
            for t in range(config.trials_per_pair):
                seed = rng.derive_seed(config.master_seed, "auth", verifier.node_id, j, t)
                counts = sample_shots(devices[j], circuit, config.k, seed)
                raw = identify(verifier, counts)
                decision = _claim(raw, j)
                row["reject" if raw.accepted_id is None else str(raw.accepted_id)] += 1
                genuine += 1
                genuine_ok += decision.accepted
                decisions.append(_log_entry(decision, raw, verifier.node_id, j, "genuine", t, seed))
            rows[str(j)] = row
        confusion[str(verifier.node_id)] = rows

    impostor = impostor_ok = 0
    if config.adversary is not None:
        adv = resolve_adversary(config, devices)
        verifier = by_id[adv.verifier_id]
        trials = config.trials_per_pair if adv.trials is None else adv.trials
        for t in range(trials):
            seed = rng.derive_seed(config.master_seed, "mitm", t)
            counts = sample_shots(adv.device, circuit, config.k, seed)
            raw = identify(verifier, counts)
            decision = _claim(raw, adv.claimed_id)
            impostor += 1
            impostor_ok += decision.accepted
            decisions.append(_log_entry(decision, raw, verifier.node_id, adv.claimed_id, "impostor", t, seed))

    metrics = ExperimentMetrics(genuine, genuine_ok, impostor, impostor_ok, confusion, decisions)
    result = ExperimentResult(config, nodes, device_counts, device_profiles, kl, metrics)
    if out_dir is not None:
        from .formats import write_experiment
        write_experiment(result, out_dir)
    return result


def _log_entry(decision: AuthDecision, raw: AuthDecision, verifier: int, claimed: int, source: str,
               trial: int, seed: int) -> dict:
    return {
        "verifier": verifier,
        "claimed_id": claimed,
        "source": source,
        "trial": trial,
        "verdict": decision.verdict,
        "identified_id": raw.accepted_id,
        "candidate_id": raw.candidate_id,
        "best_score": raw.best_score,
        "threshold": raw.threshold,
        "seed": seed,
    }


def metrics_from_log(decisions) -> dict:
    """Recompute the headline rates from raw decision records."""
    gen = [d for d in decisions if d["source"] == "genuine"]
    imp = [d for d in decisions if d["source"] == "impostor"]
    gar = sum(d["verdict"] == "accept" for d in gen) / len(gen) if gen else 0.0
    return {
        "genuine_accept_rate": gar,
        "false_reject_rate": 1.0 - gar if gen else 0.0,
        "false_accept_rate": sum(d["verdict"] == "accept" for d in imp) / len(imp) if imp else None,
    }
