"""g2(tau) of the optimally displaced output for one momentum, plus the fitted
oscillation frequency against the Bogoliubov frequency.

    python demos/delayed_antibunching.py [mu] [Delta] [k]
"""
import sys

import numpy as np

from qfc.bogoliubov import omega
from qfc.params import steady_state
from qfc.upb import fit_damped_oscillation, g2_delay, optimal_config

mu, Delta, k = (float(a) for a in (sys.argv[1:4] if len(sys.argv) > 3 else (5.0, -1.0, 1.0)))
mf = steady_state(mu, Delta)
cfg = optimal_config(mf, k)
tau = np.linspace(0.0, 12.0, 1201)
g = g2_delay(mf, cfg, tau)

print(f"alpha_opt = {cfg.alpha_bar:.4f}, g2(0) = {g[0]:.5f}")
for t in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
    print(f"  tau = {t:4.1f}  g2 = {g[np.searchsorted(tau, t)]:.5f}")

w_fit, kappa = fit_damped_oscillation(tau, g)
print(f"fitted w = {w_fit:.4f} (omega_k = {complex(omega(k, mf)).real:.4f}), kappa = {kappa:.4f}")
