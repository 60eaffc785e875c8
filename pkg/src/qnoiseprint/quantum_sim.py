"""Noisy GHZ preparation and measurement on a small statevector simulator.

Basis-state index bit ``b`` (0 = least significant) is qubit ``b``.  Noise is
injected as Monte-Carlo Pauli trajectories: after each gate, with the gate's
depolarizing probability, a uniformly random non-identity Pauli acts on the
gate's qubit(s).  Every measured bit then passes through its own binary
readout channel.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence, Union

import numpy as np

from .distributions import OutcomeDistribution
from .errors import InvalidArgument
from .rng import check_seed, generator

MAX_QUBITS = 12
NORM_TOL = 1e-10

# Shots are drawn in fixed-size blocks; block b uses stream (seed, "shots", b)
# so any shot's randomness depends only on (seed, shot index).
SHOT_BLOCK = 256

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def _check_n(n) -> int:
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= MAX_QUBITS:
        raise InvalidArgument(f"qubit count must be in [1, {MAX_QUBITS}], got {n!r}")
    return int(n)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Hadamard:
    target: int


@dataclass(frozen=True)
class ControlledNot:
    control: int
    target: int


Gate = Union[Hadamard, ControlledNot]


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple = ()

    def __post_init__(self):
        n = _check_n(self.n)
        gates = tuple(self.gates)
        for gate in gates:
            if isinstance(gate, Hadamard):
                qubits = (gate.target,)
            elif isinstance(gate, ControlledNot):
                qubits = (gate.control, gate.target)
                if gate.control == gate.target:
                    raise InvalidArgument(f"control equals target in {gate}")
            else:
                raise InvalidArgument(f"unsupported gate {gate!r}")
            if any(not 0 <= q < n for q in qubits):
                raise InvalidArgument(f"{gate} addresses a qubit outside [0, {n})")
        object.__setattr__(self, "gates", gates)

    def __len__(self):
        return len(self.gates)


@dataclass(frozen=True)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        n = _check_n(self.n)
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**n,):
            raise InvalidArgument(f"expected {2**n} amplitudes, got shape {amps.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidArgument(f"state is not normalized (|psi|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def zeros(cls, n: int) -> "StateVector":
        amps = np.zeros(2 ** _check_n(n), dtype=np.complex128)
        amps[0] = 1.0
        return cls(n, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DeviceNoiseParams:
    """Frozen noise realization of one transmitter.

    ``readout[q] = (eps01, eps10)``: probability of reading 1 when qubit ``q``
    is 0, and of reading 0 when it is 1.
    """

    readout: tuple
    p1: float = 0.0
    p2: float = 0.0
    device_seed: int = 0

    def __post_init__(self):
        pairs = tuple((float(e01), float(e10)) for e01, e10 in self.readout)
        _check_n(len(pairs))
        for q, pair in enumerate(pairs):
            for eps in pair:
                if not 0.0 <= eps < 0.5:
                    raise InvalidArgument(f"readout error on qubit {q} must be in [0, 0.5), got {eps}")
        for name in ("p1", "p2"):
            p = float(getattr(self, name))
            if not 0.0 <= p <= 0.2:
                raise InvalidArgument(f"{name} must be in [0, 0.2], got {p}")
            object.__setattr__(self, name, p)
        object.__setattr__(self, "readout", pairs)
        object.__setattr__(self, "device_seed", check_seed(self.device_seed))

    @property
    def n(self) -> int:
        return len(self.readout)

    @classmethod
    def noiseless(cls, n: int, device_seed: int = 0) -> "DeviceNoiseParams":
        return cls(((0.0, 0.0),) * _check_n(n), 0.0, 0.0, device_seed)

    @classmethod
    def readout_only(cls, readout: Sequence, device_seed: int = 0) -> "DeviceNoiseParams":
        return cls(tuple(readout), 0.0, 0.0, device_seed)

    def to_dict(self) -> dict:
        return {
            "readout": [list(pair) for pair in self.readout],
            "p1": self.p1,
            "p2": self.p2,
            "device_seed": self.device_seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "DeviceNoiseParams":
        return cls(tuple(tuple(p) for p in data["readout"]), data.get("p1", 0.0),
                   data.get("p2", 0.0), data.get("device_seed", 0))


@dataclass(frozen=True)
class DeviceRanges:
    """Uniform ranges from which per-device noise parameters are drawn."""

    eps01: tuple = (0.005, 0.04)
    eps10: tuple = (0.01, 0.08)
    p1: tuple = (0.0005, 0.004)
    p2: tuple = (0.005, 0.03)

    def __post_init__(self):
        for name in ("eps01", "eps10", "p1", "p2"):
            lo, hi = (float(v) for v in getattr(self, name))
            upper_ok = hi < 0.5 if name.startswith("eps") else hi <= 0.2
            if not (0.0 <= lo <= hi and upper_ok):
                raise InvalidArgument(f"invalid range for {name}: ({lo}, {hi})")
            object.__setattr__(self, name, (lo, hi))

    def to_dict(self) -> dict:
        return {name: list(getattr(self, name)) for name in ("eps01", "eps10", "p1", "p2")}


def draw_device(n: int, device_seed: int, ranges: DeviceRanges = DeviceRanges()) -> DeviceNoiseParams:
    """Draw one device's parameters from ``ranges``; same seed, same device."""
    n = _check_n(n)
    rng = generator(device_seed, "device")
    e01 = rng.uniform(*ranges.eps01, size=n)
    e10 = rng.uniform(*ranges.eps10, size=n)
    p1 = rng.uniform(*ranges.p1)
    p2 = rng.uniform(*ranges.p2)
    return DeviceNoiseParams(tuple(zip(e01.tolist(), e10.tolist())), p1, p2, device_seed)


@dataclass(frozen=True)
class Counts:
    n: int
    histogram: np.ndarray
    shots: int = field(init=False)

    def __post_init__(self):
        n = _check_n(self.n)
        hist = np.array(self.histogram, dtype=np.int64)
        if hist.shape != (2**n,):
            raise InvalidArgument(f"histogram must have {2**n} bins, got shape {hist.shape}")
        if np.any(hist < 0):
            raise InvalidArgument("histogram counts must be nonnegative")
        object.__setattr__(self, "histogram", _frozen(hist))
        object.__setattr__(self, "shots", int(hist.sum()))

    @classmethod
    def from_dict(cls, n: int, mapping: Mapping[int, int]) -> "Counts":
        hist = np.zeros(2 ** _check_n(n), dtype=np.int64)
        for index, count in mapping.items():
            if not 0 <= int(index) < hist.size:
                raise InvalidArgument(f"basis index {index} outside [0, {hist.size})")
            hist[int(index)] += int(count)
        return cls(n, hist)

    def as_dict(self) -> dict[int, int]:
        return {int(i): int(c) for i, c in enumerate(self.histogram) if c}

    def __add__(self, other: "Counts") -> "Counts":
        if self.n != other.n:
            raise InvalidArgument("cannot add counts over different qubit counts")
        return Counts(self.n, self.histogram + other.histogram)


def build_ghz_circuit(n: int) -> Circuit:
    n = _check_n(n)
    gates = [Hadamard(0)] + [ControlledNot(i, i + 1) for i in range(n - 1)]
    return Circuit(n, gates)


# -- batched kernels --------------------------------------------------------
# states has shape (batch, 2**n); every kernel returns a new array.

@lru_cache(maxsize=None)
def _half_indices(n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(2**n)
    lo = idx[((idx >> q) & 1) == 0]
    return lo, lo | (1 << q)


@lru_cache(maxsize=None)
def _flip_perm(n: int, mask: int) -> np.ndarray:
    return np.arange(2**n) ^ mask


@lru_cache(maxsize=None)
def _cnot_perm(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n)
    return idx ^ (((idx >> control) & 1) << target)


@lru_cache(maxsize=None)
def _z_sign(n: int, q: int) -> np.ndarray:
    return 1.0 - 2.0 * ((np.arange(2**n) >> q) & 1)


def _apply_gate(states: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    if isinstance(gate, Hadamard):
        lo, hi = _half_indices(n, gate.target)
        a, b = states[:, lo], states[:, hi]
        out = np.empty_like(states)
        out[:, lo] = (a + b) * _INV_SQRT2
        out[:, hi] = (a - b) * _INV_SQRT2
        return out
    return states[:, _cnot_perm(n, gate.control, gate.target)]


def _apply_pauli(states: np.ndarray, n: int, q: int, codes: np.ndarray) -> np.ndarray:
    """Apply Pauli ``codes[r]`` (0=I, 1=X, 2=Y, 3=Z) on qubit ``q`` of row ``r``."""
    out = states.copy()
    zrows = (codes == 2) | (codes == 3)
    xrows = (codes == 1) | (codes == 2)
    if zrows.any():
        out[zrows] *= _z_sign(n, q)
    if xrows.any():
        out[xrows] = out[xrows][:, _flip_perm(n, 1 << q)]
    yrows = codes == 2
    if yrows.any():
        out[yrows] *= 1j  # Y = iXZ
    return out


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if state.n != circuit.n:
        raise InvalidArgument(f"state has {state.n} qubits, circuit has {circuit.n}")
    amps = state.amplitudes[None, :].copy()
    for gate in circuit.gates:
        amps = _apply_gate(amps, gate, circuit.n)
    return StateVector(circuit.n, amps[0])


def _sample_index(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Rowwise inverse-CDF sampling that never lands on a zero-mass index."""
    v = u * cdf[..., -1]
    if cdf.ndim == 1:
        return np.searchsorted(cdf, v, side="right")
    return np.sum(cdf <= v[:, None], axis=1)


def _sample_block(device: DeviceNoiseParams, circuit: Circuit, rng: np.random.Generator,
                  size: int, ideal_cdf: np.ndarray) -> np.ndarray:
    n, gates = circuit.n, circuit.gates
    ngates = len(gates)
    # Row layout per shot: (event, pauli choice) per gate, measurement, n readout draws.
    u = rng.random((size, 2 * ngates + 1 + n))
    gate_p = np.array([device.p1 if isinstance(g, Hadamard) else device.p2 for g in gates])
    events = u[:, 0:2 * ngates:2] < gate_p
    choice = u[:, 1:2 * ngates:2]
    u_meas = u[:, 2 * ngates]
    u_read = u[:, 2 * ngates + 1:]

    outcomes = np.empty(size, dtype=np.int64)
    noisy = events.any(axis=1)
    clean = ~noisy
    if clean.any():
        outcomes[clean] = _sample_index(ideal_cdf, u_meas[clean])
    if noisy.any():
        rows = np.flatnonzero(noisy)
        states = np.zeros((rows.size, 2**n), dtype=np.complex128)
        states[:, 0] = 1.0
        for g, gate in enumerate(gates):
            states = _apply_gate(states, gate, n)
            hit = events[rows, g]
            if not hit.any():
                continue
            c = choice[rows, g]
            if isinstance(gate, Hadamard):
                codes = np.where(hit, np.minimum((c * 3).astype(np.int64), 2) + 1, 0)
                states = _apply_pauli(states, n, gate.target, codes)
            else:
                pair = np.where(hit, np.minimum((c * 15).astype(np.int64), 14) + 1, 0)
                states = _apply_pauli(states, n, gate.control, pair // 4)
                states = _apply_pauli(states, n, gate.target, pair % 4)
        cdf = np.cumsum(np.abs(states) ** 2, axis=1)
        outcomes[rows] = _sample_index(cdf, u_meas[rows])

    bit_pos = np.arange(n)
    bits = (outcomes[:, None] >> bit_pos) & 1
    eps = np.array(device.readout)
    flip_p = np.where(bits == 1, eps[:, 1], eps[:, 0])
    flips = (u_read < flip_p).astype(np.int64)
    return outcomes ^ np.sum(flips << bit_pos, axis=1)


def sample_shots(device: DeviceNoiseParams, circuit: Circuit, shots: int, seed: int) -> Counts:
    """Monte-Carlo measurement histogram of ``circuit`` run ``shots`` times on ``device``.

    Deterministic in its arguments: shot ``s`` draws from block ``s // SHOT_BLOCK``
    of the stream keyed by ``seed``, independent of evaluation order.
    """
    if isinstance(shots, bool) or int(shots) != shots or shots < 1:
        raise InvalidArgument(f"shots must be a positive integer, got {shots!r}")
    if device.n != circuit.n:
        raise InvalidArgument(f"device has {device.n} qubits, circuit has {circuit.n}")
    seed = check_seed(seed)
    shots = int(shots)
    ideal = apply_circuit(StateVector.zeros(circuit.n), circuit)
    ideal_cdf = np.cumsum(ideal.probabilities())
    hist = np.zeros(2**circuit.n, dtype=np.int64)
    for block, start in enumerate(range(0, shots, SHOT_BLOCK)):
        size = min(SHOT_BLOCK, shots - start)
        rng = generator(seed, "shots", block)
        outcomes = _sample_block(device, circuit, rng, size, ideal_cdf)
        hist += np.bincount(outcomes, minlength=2**circuit.n)
    return Counts(circuit.n, hist)


def readout_oracle_distribution(n: int, readout: Sequence) -> OutcomeDistribution:
    """Exact outcome distribution of a noiseless GHZ state seen through readout error.

    P(x) = 1/2 prod_b Pr(read x_b | 0) + 1/2 prod_b Pr(read x_b | 1).
    """
    n = _check_n(n)
    eps = np.array(readout, dtype=float).reshape(-1, 2)
    if eps.shape[0] != n:
        raise InvalidArgument(f"need {n} readout pairs, got {eps.shape[0]}")
    if np.any((eps < 0) | (eps >= 0.5)):
        raise InvalidArgument("readout errors must be in [0, 0.5)")
    bits = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    from_zero = np.where(bits == 1, eps[:, 0], 1.0 - eps[:, 0]).prod(axis=1)
    from_one = np.where(bits == 1, 1.0 - eps[:, 1], eps[:, 1]).prod(axis=1)
    return OutcomeDistribution(n, 0.5 * from_zero + 0.5 * from_one)
