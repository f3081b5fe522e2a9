"""Filtered g2(x, tau) in the ring regime: where the deepest antibunching sits
and how the equal-time profile oscillates with x.

    python demos/spatial_map.py [fraction]
"""
import sys

import numpy as np

from qfc.params import steady_state
from qfc.spatial import FilterConfig, RadialGrid, g2_map, spatial_period, temporal_band_metric

fraction = float(sys.argv[1]) if len(sys.argv) > 1 else 0.008
mf = steady_state(0.4, 3.0)
grid = RadialGrid(np.linspace(0.0, 12.0, 121), np.linspace(0.0, 5.0, 51))
gm = g2_map(mf, FilterConfig(fraction), grid)

best = temporal_band_metric(gm)
print(f"deepest antibunching: g2 = {best['g2_min']:.5f} at x = {best['x_min']:.3f}, tau = {best['tau_at_min']:.2f}")
k_c = np.sqrt(2.0 * (mf.Delta - mf.mu))
print(f"equal-time period {spatial_period(gm.x[1:], gm.g2[1:, 0]):.3f} vs 2 pi / k_c = {2 * np.pi / k_c:.3f}")
print("x      g2(x, 0)")
for i in range(0, gm.x.size, 10):
    print(f"{gm.x[i]:5.1f}  {gm.g2[i, 0]:.6f}")
