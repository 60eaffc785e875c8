"""JSON experiment configuration and named presets.

Example::

    {"m": 4, "master_seed": 42}

expands to n=5, k=1000, k_train=10000, alpha=0.5, margin=3, min-KL over the
error states.  Errors name the offending field path, e.g. ``classifier.mode``.
"""
from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path
from typing import Any, Mapping

from .constellation import AdversaryConfig, ConstellationConfig
from .errors import ConfigError, InvalidArgument
from .fingerprinting import ClassifierConfig, Domain, KLDirection, Mode
from .quantum_sim import DeviceNoiseParams, DeviceRanges

_TOP = {"m", "n", "k", "k_train", "master_seed", "trials_per_pair", "holdout_fraction",
        "device_ranges", "classifier", "adversary", "neighbors"}
_CLASSIFIER = {"mode", "domain", "alpha", "margin", "rejection_threshold", "kl_direction"}
_RANGES = {"eps01", "eps10", "p1", "p2"}
_ADVERSARY = {"claimed_id", "verifier_id", "device", "readout_offset", "identical", "trials"}

PRESETS: dict[str, dict] = {
    # Four devices, 5 qubits, 10,000 training shots, 1,000-shot authentications.
    # Scores over the full outcome spectrum, as in the pairwise KL table.
    "table1-analog": {
        "m": 4, "n": 5, "k": 1000, "k_train": 10_000, "master_seed": 42, "trials_per_pair": 100,
        "classifier": {"domain": "full"},
        "adversary": {"claimed_id": 2, "verifier_id": 1, "readout_offset": 0.05},
    },
    # Per-device histograms at 10,000 shots; few authentication trials.
    "fig4-analog": {
        "m": 4, "n": 5, "k": 1000, "k_train": 10_000, "master_seed": 42, "trials_per_pair": 10,
    },
}


def _section(data: Any, path: str, allowed: set) -> Mapping:
    if not isinstance(data, Mapping):
        raise ConfigError(path, "expected an object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        prefix = f"{path}." if path else ""
        raise ConfigError(prefix + unknown[0], "unknown field")
    return data


def _int(data: Mapping, key: str, path: str, default=None):
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _num(data: Mapping, key: str, path: str, default=None) -> float:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _pair(value, path: str) -> tuple[float, float]:
    if not (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ConfigError(path, f"expected [low, high], got {value!r}")
    return float(value[0]), float(value[1])


def _classifier(data) -> ClassifierConfig:
    data = _section(data, "classifier", _CLASSIFIER)
    base = ClassifierConfig()
    kwargs = {}
    for key, enum in (("mode", Mode), ("domain", Domain), ("kl_direction", KLDirection)):
        if key in data:
            try:
                kwargs[key] = enum(data[key])
            except ValueError:
                choices = ", ".join(e.value for e in enum)
                raise ConfigError(f"classifier.{key}", f"expected one of {choices}, got {data[key]!r}") from None
    for key in ("alpha", "margin", "rejection_threshold"):
        if key in data:
            kwargs[key] = _num(data, key, f"classifier.{key}")
    try:
        return replace(base, **kwargs)
    except InvalidArgument as exc:
        raise ConfigError("classifier", str(exc)) from None


def _ranges(data) -> DeviceRanges:
    data = _section(data, "device_ranges", _RANGES)
    kwargs = {key: _pair(data[key], f"device_ranges.{key}") for key in data}
    try:
        return DeviceRanges(**kwargs)
    except InvalidArgument as exc:
        raise ConfigError("device_ranges", str(exc)) from None


def _adversary(data) -> AdversaryConfig | None:
    if data is None:
        return None
    data = _section(data, "adversary", _ADVERSARY)
    for key in ("claimed_id", "verifier_id"):
        if key not in data:
            raise ConfigError(f"adversary.{key}", "missing required field")
    device = None
    if data.get("device") is not None:
        try:
            device = DeviceNoiseParams.from_dict(data["device"])
        except (InvalidArgument, KeyError, TypeError) as exc:
            raise ConfigError("adversary.device", str(exc)) from None
    identical = data.get("identical", False)
    if not isinstance(identical, bool):
        raise ConfigError("adversary.identical", "expected true or false")
    trials = data.get("trials")
    if trials is not None:
        trials = _int(data, "trials", "adversary.trials")
    return AdversaryConfig(
        claimed_id=_int(data, "claimed_id", "adversary.claimed_id"),
        verifier_id=_int(data, "verifier_id", "adversary.verifier_id"),
        device=device,
        readout_offset=_num(data, "readout_offset", "adversary.readout_offset", 0.05),
        identical=identical,
        trials=trials,
    )


def _neighbors(data) -> dict[int, tuple] | None:
    if data is None:
        return None
    if not isinstance(data, Mapping):
        raise ConfigError("neighbors", "expected an object mapping node id to a list of peers")
    out = {}
    for key, peers in data.items():
        path = f"neighbors.{key}"
        try:
            node = int(key)
        except ValueError:
            raise ConfigError(path, "node ids must be integers") from None
        if not isinstance(peers, list) or not all(isinstance(p, int) and not isinstance(p, bool) for p in peers):
            raise ConfigError(path, "expected a list of integer node ids")
        out[node] = tuple(peers)
    return out


def config_from_dict(data: Mapping) -> ConstellationConfig:
    data = _section(data, "", _TOP)
    if "m" not in data:
        raise ConfigError("m", "missing required field")
    defaults = ConstellationConfig.__dataclass_fields__
    kwargs = {key: _int(data, key, key, defaults[key].default)
              for key in ("m", "n", "k", "k_train", "master_seed", "trials_per_pair")}
    kwargs["holdout_fraction"] = _num(data, "holdout_fraction", "holdout_fraction", 0.2)
    kwargs["classifier"] = _classifier(data.get("classifier", {}))
    kwargs["device_ranges"] = _ranges(data.get("device_ranges", {}))
    kwargs["adversary"] = _adversary(data.get("adversary"))
    kwargs["neighbors"] = _neighbors(data.get("neighbors"))
    return ConstellationConfig(**kwargs)


def parse_config(path) -> ConstellationConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(str(path), "file not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from None
    return config_from_dict(data)


def preset(name: str) -> ConstellationConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return config_from_dict(PRESETS[name])
