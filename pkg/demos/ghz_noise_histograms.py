"""Sample a noisy 5-qubit GHZ circuit on four simulated devices.

Most shots land on 00000 or 11111.  The rest, the error states, form the
part of the histogram that differs from device to device.

    python demos/ghz_noise_histograms.py
"""
import numpy as np

from qnoiseprint.distributions import restrict_to_error_states, smooth
from qnoiseprint.formats import bitstring
from qnoiseprint.quantum_sim import build_ghz_circuit, draw_device, sample_shots

N, SHOTS = 5, 10_000
circuit = build_ghz_circuit(N)

for device_seed in (1, 2, 3, 4):
    device = draw_device(N, device_seed)
    counts = sample_shots(device, circuit, SHOTS, seed=device_seed)
    valid = counts.histogram[0] + counts.histogram[-1]
    errors = restrict_to_error_states(smooth(counts))
    top = np.argsort(errors.probs)[::-1][:3]
    print(f"device {device_seed}: p1={device.p1:.4f} p2={device.p2:.4f}")
    print(f"  valid outcomes {valid / SHOTS:.3f}, error mass {1 - valid / SHOTS:.3f}")
    for i in top:
        print(f"  {bitstring(errors.indices()[i], N)}  {errors.probs[i]:.3f} of error mass")
