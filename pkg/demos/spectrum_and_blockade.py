"""Walk through one working point: mean field, Bogoliubov branches, squeezing and
the best antibunching reachable by interfering a k pair with a coherent field.

    python demos/spectrum_and_blockade.py [mu] [Delta]
"""
import sys

import numpy as np

from qfc.bogoliubov import classify, diffusive_radii, omega
from qfc.correlations import steady_moments
from qfc.params import steady_state
from qfc.upb import upb_scan

mu = float(sys.argv[1]) if len(sys.argv) > 1 else 0.4
Delta = float(sys.argv[2]) if len(sys.argv) > 2 else 3.0

mf = steady_state(mu, Delta)
print(f"mu = {mu}, Delta = {Delta}: n0 = {mf.n0:.4g}, pump = {mf.params.pump:.4g}, stable = {mf.stable}")
print("diffusive radii:", diffusive_radii(mf))

# 2.3 sits between the diffusive radii
ks = np.sort(np.append(np.linspace(0.0, 4.0, 9), 2.3))
w = omega(ks, mf)
for k, wk, cls in zip(ks, np.atleast_1d(w), classify(ks, mf)):
    print(f"  k = {k:4.1f}  omega = {complex(wk):.4f}  {cls.value}")

mom = steady_moments(ks, mf)
print("\nk      n_k        |c_k|      g2_opt")
for row, n, c in zip(upb_scan(mf, ks), mom.n, mom.c):
    g = row["g2_opt"]
    print(f"{row['k']:4.1f}  {n:9.4f}  {abs(c):9.4f}  {'-' if g is None else f'{g:.4f}'}")
