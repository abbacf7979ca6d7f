"""A fixed two-bin correlator whose interference shrinks like 1/N.

The desired user sits halfway between DFT bins 0 and 1; interferers are
uniform outside a guard around those bins. The signal term stays put while
N times the mean interference energy stays roughly constant.
"""

import numpy as np

from beamspace_lab.stochastic import mf_scaling

print("   N  signal  E[Z^2]     N E[Z^2]")
for n, sig, z2, nz2 in mf_scaling([32, 64, 128, 256, 512], np.random.default_rng(0), 1_000_000):
    print(f"{n:4d}  {sig:6.3f}  {z2:.3e}  {nz2:.3f}")
