"""Command-line entry point.

Exit status: 0 on success (and on Accept for ``authenticate``), 1 on Reject,
2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import rng
from .config import PRESETS, parse_config, preset
from .constellation import run_experiment
from .distributions import kl_matrix
from .errors import ConfigError, InvalidArgument, NoErrorMass
from .fingerprinting import ClassifierConfig, Domain, Mode, classify, train_fingerprint
from .formats import (
    dumps_json,
    fingerprint_to_dict,
    histogram_csv,
    kl_matrix_csv,
    parse_histogram_csv,
    read_fingerprint,
)
from .quantum_sim import DeviceNoiseParams, build_ghz_circuit, draw_device, sample_shots

# Default acceptance threshold when neither --threshold nor the fingerprint
# file gives one: absorbs the 12-digit rounding of stored references.
ROUNDTRIP_THRESHOLD = 1e-9


def _u64(text: str) -> int:
    try:
        return rng.check_seed(int(text, 0))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit integer, got {text!r}") from None


def _emit(text: str, out: str | None, name: str):
    if out is None:
        sys.stdout.write(text)
        return
    directory = Path(out)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / name).write_text(text)
    print(directory / name)


def cmd_simulate(args) -> int:
    if args.device:
        device = DeviceNoiseParams.from_dict(json.loads(Path(args.device).read_text()))
    else:
        device_seed = args.device_seed if args.device_seed is not None else rng.derive_seed(args.seed, "device")
        device = draw_device(args.n, device_seed)
    counts = sample_shots(device, build_ghz_circuit(device.n), args.shots, args.seed)
    _emit(histogram_csv(counts), args.out, "histogram.csv")
    return 0


def cmd_fingerprint(args) -> int:
    counts = parse_histogram_csv(Path(args.counts).read_text())
    config = ClassifierConfig(domain=Domain(args.domain), alpha=args.alpha)
    profile = train_fingerprint(args.node_id, counts, config)
    _emit(dumps_json(fingerprint_to_dict(profile, args.threshold)), args.out, f"fingerprint_{args.node_id}.json")
    return 0


def _load_fingerprints(paths):
    loaded = [read_fingerprint(p) for p in paths]
    return [p for p, _ in loaded], {p.node_id: t for p, t in loaded if t is not None}


def cmd_authenticate(args) -> int:
    profiles, stored = _load_fingerprints(args.fingerprints)
    counts = parse_histogram_csv(Path(args.counts).read_text())
    domain = Domain(args.domain) if args.domain else profiles[0].domain
    alpha = args.alpha if args.alpha is not None else profiles[0].alpha
    if args.threshold is not None:
        thresholds, default = {}, args.threshold
    else:
        thresholds, default = stored, ROUNDTRIP_THRESHOLD
    config = ClassifierConfig(mode=Mode(args.mode), domain=domain, alpha=alpha, rejection_threshold=default)
    decision = classify(counts, profiles, config, thresholds)
    accepted = decision.accepted_id
    if args.claimed_id is not None and accepted != args.claimed_id:
        accepted = None
    print(dumps_json({
        "verdict": "accept" if accepted is not None else "reject",
        "accepted_id": accepted,
        "candidate_id": decision.candidate_id,
        "best_score": decision.best_score,
        "threshold": decision.threshold,
        "scores": {str(k): v for k, v in decision.scores.items()},
        "units": "nats" if config.mode is Mode.MIN_KL else "mean log-likelihood per shot (nats)",
    }), end="")
    return 0 if accepted is not None else 1


def cmd_matrix(args) -> int:
    profiles, _ = _load_fingerprints(args.fingerprints)
    if len({(p.n, p.domain) for p in profiles}) != 1:
        raise InvalidArgument("fingerprints must share qubit count and domain")
    matrix = kl_matrix([p.reference for p in profiles])
    _emit(kl_matrix_csv([p.node_id for p in profiles], matrix), args.out, "kl_matrix.csv")
    return 0


def cmd_experiment(args) -> int:
    if args.config and args.preset:
        raise ConfigError("--config", "give either --config or --preset, not both")
    config = parse_config(args.config) if args.config else preset(args.preset or "table1-analog")
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    overrides = {}
    if args.mode:
        overrides["mode"] = Mode(args.mode)
    if args.domain:
        overrides["domain"] = Domain(args.domain)
    if overrides:
        config = replace(config, classifier=replace(config.classifier, **overrides))
    result = run_experiment(config, args.out)
    summary = result.metrics.summary()
    print(f"genuine-accept {summary['genuine_accept_rate']:.4f}  FRR {summary['false_reject_rate']:.4f}  "
          f"FAR {summary['false_accept_rate'] if summary['false_accept_rate'] is not None else 'n/a'}  -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qnoiseprint", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample one device's GHZ histogram")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--device", help="device parameters JSON")
    p.add_argument("--device-seed", type=_u64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fingerprint", help="train a fingerprint from a histogram CSV")
    p.add_argument("--counts", required=True)
    p.add_argument("--node-id", type=int, required=True)
    p.add_argument("--domain", choices=[d.value for d in Domain], default=Domain.ERROR_ONLY.value)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--threshold", type=float, help="rejection threshold stored with the fingerprint")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("authenticate", help="classify observed counts against fingerprints")
    p.add_argument("--fingerprints", nargs="+", required=True)
    p.add_argument("--counts", required=True)
    p.add_argument("--claimed-id", type=int)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.MIN_KL.value)
    p.add_argument("--domain", choices=[d.value for d in Domain])
    p.add_argument("--alpha", type=float)
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_authenticate)

    p = sub.add_parser("matrix", help="pairwise KL matrix of fingerprints")
    p.add_argument("--fingerprints", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("experiment", help="full constellation run")
    p.add_argument("--config")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--seed", type=_u64)
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--domain", choices=[d.value for d in Domain])
    p.add_argument("--out", default="experiment-out")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidArgument, NoErrorMass, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"qnoiseprint {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
