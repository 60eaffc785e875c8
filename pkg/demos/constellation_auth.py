"""Train a four-node constellation, then run genuine authentications.

Each node learns a fingerprint for every peer from 10,000 shots, calibrates
a rejection threshold, and later checks 1,000-shot transmissions.

    python demos/constellation_auth.py
"""
from dataclasses import replace

from qnoiseprint.config import preset
from qnoiseprint.constellation import run_experiment

config = replace(preset("table1-analog"), trials_per_pair=20, adversary=None)
result = run_experiment(config)

for node in result.nodes:
    thetas = ", ".join(f"{j}: {t:.4f}" for j, t in sorted(node.thresholds.items()))
    print(f"node {node.node_id} thresholds (nats) {thetas}")

m = result.metrics
print(f"genuine accepts {m.genuine_accepts}/{m.genuine_trials} ({m.genuine_accept_rate:.3f})")
for verifier, rows in sorted(m.confusion.items()):
    for claimed, row in sorted(rows.items()):
        print(f"  verifier {verifier} <- {claimed}: {dict(row)}")
