"""
Sum rate against SNR
====================

At high SNR the averaged sum rate grows by ``MN/(M+N-1)`` bits per channel
use for every doubling of the transmit power.
"""

import numpy as np

from xrelay import make_config, sweep
from xrelay.analysis import fit_dof

grid = [0, 10, 20, 30, 40, 50, 60]
for m, n, antennas in [(2, 2, [1]), (2, 3, [2]), (3, 3, [2])]:
    cfg = make_config(m, n, len(antennas), antennas)
    points, _ = sweep(cfg, grid, trials=200, seed=1)
    print(f"\n{m}x{n}, relays {antennas}")
    for p in points:
        print(f"  {p.snr_db:5.1f} dB  {p.sum_rate:7.3f} +- {p.std_err:.3f} bits/use")
    est = fit_dof(points, cfg)
    print(f"  slope {est.slope:.4f} over the top {est.fit_points} points, "
          f"expected {est.theoretical:.4f}")

# %%
# Per-step increments show the slope settling as the SNR grows.
cfg = make_config(2, 2, 1, [1])
points, _ = sweep(cfg, grid, trials=200, seed=1)
rates = np.array([p.sum_rate for p in points])
print("\nincrement per 10 dB / (10 dB in log2 units):",
      np.round(np.diff(rates) / (10 * np.log2(10) / 10), 3))
