"""On-disk formats: histogram/distribution/KL CSVs, fingerprint JSON, run artifacts.

Bitstrings are printed most-significant qubit first.  Reals are written with
12 significant digits; divergences are in nats.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from . import __version__, rng
from .distributions import ErrorStateDistribution, OutcomeDistribution
from .errors import InvalidArgument
from .fingerprinting import Domain, NoiseFingerprint
from .quantum_sim import Counts

FINGERPRINT_FORMAT = "qnoiseprint-fingerprint/1"


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


def bitstring(index: int, n: int) -> str:
    return format(int(index), f"0{n}b")


def _rounded(obj):
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_rounded(obj), indent=2) + "\n"


# -- CSV ---------------------------------------------------------------------

def _rows(text: str, header: tuple[str, str]) -> list[tuple[str, str]]:
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or tuple(h.strip() for h in rows[0]) != header:
        raise InvalidArgument(f"expected CSV header {','.join(header)}")
    out = []
    for row in rows[1:]:
        if len(row) != 2:
            raise InvalidArgument(f"malformed CSV row {row!r}")
        out.append((row[0].strip(), row[1].strip()))
    return out


def _index_rows(rows) -> tuple[int, list[int], list[str]]:
    if not rows:
        raise InvalidArgument("CSV has no data rows")
    n = len(rows[0][0])
    indices = []
    for bits, _ in rows:
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise InvalidArgument(f"bad bitstring {bits!r}")
        indices.append(int(bits, 2))
    if indices != sorted(set(indices)):
        raise InvalidArgument("rows must be in strictly ascending bitstring order")
    return n, indices, [value for _, value in rows]


def histogram_csv(counts: Counts) -> str:
    lines = ["bitstring,count"]
    lines += [f"{bitstring(i, counts.n)},{int(c)}" for i, c in enumerate(counts.histogram)]
    return "\n".join(lines) + "\n"


def parse_histogram_csv(text: str) -> Counts:
    n, indices, values = _index_rows(_rows(text, ("bitstring", "count")))
    return Counts.from_dict(n, dict(zip(indices, (int(v) for v in values))))


def distribution_csv(dist) -> str:
    lines = ["bitstring,probability"]
    lines += [f"{bitstring(i, dist.n)},{fmt(p)}" for i, p in zip(dist.indices(), dist.probs)]
    return "\n".join(lines) + "\n"


def parse_distribution_csv(text: str):
    """Back to an outcome or error-state distribution, decided by which rows are present.

    Values are renormalized to absorb the 12-digit rounding.
    """
    n, indices, values = _index_rows(_rows(text, ("bitstring", "probability")))
    probs = np.array([float(v) for v in values])
    probs = probs / probs.sum()
    if indices == list(range(2**n)):
        return OutcomeDistribution(n, probs)
    if n >= 2 and indices == list(range(1, 2**n - 1)):
        return ErrorStateDistribution(n, probs)
    raise InvalidArgument("rows cover neither all basis states nor exactly the error states")


def kl_matrix_csv(ids, matrix) -> str:
    ids = [str(i) for i in ids]
    lines = ["node," + ",".join(ids)]
    for label, row in zip(ids, np.asarray(matrix)):
        lines.append(label + "," + ",".join(fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def parse_kl_matrix_csv(text: str) -> tuple[list[int], np.ndarray]:
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    ids = [int(x) for x in rows[0][1:]]
    matrix = np.array([[float(x) for x in row[1:]] for row in rows[1:]])
    return ids, matrix


# -- fingerprints --------------------------------------------------------------

def fingerprint_to_dict(profile: NoiseFingerprint, threshold: float | None = None) -> dict:
    return {
        "format": FINGERPRINT_FORMAT,
        "node_id": profile.node_id,
        "n": profile.n,
        "domain": profile.domain.value,
        "alpha": profile.alpha,
        "training_shots": profile.training_shots,
        "threshold": threshold,
        "distribution_csv": distribution_csv(profile.reference),
    }


def fingerprint_from_dict(data: dict) -> tuple[NoiseFingerprint, float | None]:
    if data.get("format") != FINGERPRINT_FORMAT:
        raise InvalidArgument(f"not a {FINGERPRINT_FORMAT} envelope")
    reference = parse_distribution_csv(data["distribution_csv"])
    profile = NoiseFingerprint(int(data["node_id"]), int(data["n"]), Domain(data["domain"]), reference,
                               int(data["training_shots"]), float(data["alpha"]))
    threshold = data.get("threshold")
    return profile, None if threshold is None else float(threshold)


def write_fingerprint(path, profile: NoiseFingerprint, threshold: float | None = None) -> Path:
    path = Path(path)
    path.write_text(dumps_json(fingerprint_to_dict(profile, threshold)))
    return path


def read_fingerprint(path) -> tuple[NoiseFingerprint, float | None]:
    return fingerprint_from_dict(json.loads(Path(path).read_text()))


# -- experiment artifacts ------------------------------------------------------

def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, config: dict, master_seed: int, paths) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "tool": "qnoiseprint",
        "version": __version__,
        "rng": rng.ALGORITHM,
        "units": {"kl": "nats"},
        "master_seed": master_seed,
        "config": config,
        "artifacts": [
            {"path": Path(p).relative_to(out_dir).as_posix(), "sha256": sha256(p)} for p in paths
        ],
    }
    path = out_dir / "manifest.json"
    path.write_text(dumps_json(manifest))
    return path


def verify_manifest(out_dir) -> bool:
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / "manifest.json").read_text())
    return all(
        (out_dir / a["path"]).is_file() and sha256(out_dir / a["path"]) == a["sha256"]
        for a in manifest["artifacts"]
    )


def write_experiment(result, out_dir) -> list[Path]:
    """Write every artifact of a constellation run plus ``manifest.json``."""
    out_dir = Path(out_dir)
    (out_dir / "histograms").mkdir(parents=True, exist_ok=True)
    (out_dir / "fingerprints").mkdir(exist_ok=True)
    written = []

    def put(rel: str, text: str):
        path = out_dir / rel
        path.write_text(text)
        written.append(path)

    config = result.config.to_dict()
    put("config.json", dumps_json(config))
    put("devices.json", dumps_json({str(node.node_id): node.device.to_dict() for node in result.nodes}))
    for j, counts in result.device_counts.items():
        put(f"histograms/device_{j}.csv", histogram_csv(counts))
    for profile in result.device_profiles:
        put(f"fingerprints/device_{profile.node_id}.json", dumps_json(fingerprint_to_dict(profile)))
    put("kl_matrix.csv", kl_matrix_csv([p.node_id for p in result.device_profiles], result.kl))
    put("metrics.json", dumps_json(result.metrics.summary()))
    put("decisions.jsonl", "".join(json.dumps(_rounded(d)) + "\n" for d in result.metrics.decisions))
    write_manifest(out_dir, config, result.config.master_seed, written)
    return written
