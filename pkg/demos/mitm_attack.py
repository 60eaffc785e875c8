"""A man-in-the-middle regenerates the entangled state on its own hardware.

The adversary's readout error is 0.05 higher on every qubit than the node it
impersonates.  An adversary holding an exact copy of the genuine device is
shown alongside; no fingerprint can tell those apart.

    python demos/mitm_attack.py
"""
from dataclasses import replace

from qnoiseprint.config import preset
from qnoiseprint.constellation import AdversaryConfig, run_experiment

base = replace(preset("table1-analog"), trials_per_pair=0)

for label, adversary in [
    ("readout +0.05", AdversaryConfig(claimed_id=2, verifier_id=1, readout_offset=0.05, trials=100)),
    ("identical device", AdversaryConfig(claimed_id=2, verifier_id=1, identical=True, trials=100)),
]:
    m = run_experiment(replace(base, adversary=adversary)).metrics
    print(f"{label:>17}: accepted {m.impostor_accepts}/{m.impostor_trials}")
