"""Pairwise KL divergences between four device fingerprints.

Prints the matrix in nats.  The diagonal is zero and the matrix is not
symmetric.

    python demos/kl_matrix.py
"""
import numpy as np

from qnoiseprint.distributions import kl_matrix
from qnoiseprint.fingerprinting import ClassifierConfig, Domain, train_fingerprint
from qnoiseprint.quantum_sim import build_ghz_circuit, draw_device, sample_shots

config = ClassifierConfig(domain=Domain.FULL)
circuit = build_ghz_circuit(5)
profiles = [
    train_fingerprint(j, sample_shots(draw_device(5, 40 + j), circuit, 10_000, seed=j), config)
    for j in range(1, 5)
]
matrix = kl_matrix([p.reference for p in profiles])

print("       " + "".join(f"{p.node_id:>10}" for p in profiles))
for p, row in zip(profiles, matrix):
    print(f"{p.node_id:>7}" + "".join(f"{x:10.5f}" for x in row))
print(f"largest asymmetry |D_ij - D_ji| = {np.max(np.abs(matrix - matrix.T)):.5f}")
