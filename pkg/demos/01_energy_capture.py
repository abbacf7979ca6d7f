"""How much of a single path survives a small beamspace window?

Sweeps the fractional DFT offset of one path at N=128 and compares the
captured energy with the sinc lower bound, for W=2..5 and both DFT sizes.
The worst case for W=4 sits at a half-bin offset.
"""

import math

import numpy as np

from beamspace_lab import ArrayConfig, capture_lower_bound, energy_capture, locate_on_grid

N = 128
deltas = np.linspace(0.0, 0.5, 11)

for zp in (1, 2):
    cfg = ArrayConfig(N, zp)
    print(f"\nzero-padding factor {zp}")
    print("delta  " + "  ".join(f"W={w} (bound)      " for w in range(2, 6)))
    for d in deltas:
        omega = 2 * np.pi * (10 + d) / N
        pos = locate_on_grid(omega, cfg)
        cells = [f"{energy_capture(omega, cfg, w):.4f} ({capture_lower_bound(w, pos.n0, pos.delta, pos.sign, zp):.4f})"
                 for w in range(2, 6)]
        print(f"{d:4.2f}   " + "   ".join(cells))

print(f"\nW=4 worst case 80/(9 pi^2) = {80 / (9 * math.pi**2):.4f}")
