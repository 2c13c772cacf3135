"""
One realisation, step by step
=============================

Draw channels for a 3x3 network with one 2-antenna relay, solve the relay
precoders, run the five slots and decode at every receiver.
"""

import numpy as np

from xrelay import (assemble_extended_channel, build_U, build_system, decode, draw_channels,
                    draw_symbols, effective_channel, make_config, rx_signal_slotwise,
                    solve_precoders, verify_alignment_condition)
from xrelay.linalg import numerical_rank

cfg = make_config(3, 3, 1, [2], seed=2024, constellation="qpsk")
ch = draw_channels(cfg)
d = draw_symbols(cfg)
print(f"{cfg.num_tx} transmitters, {cfg.num_rx} receivers, {cfg.num_slots} slots")

# %%
# Each (relay slot, broadcast slot) pair gives a square 4x4 system here.
sys_ = build_system(3, 0, ch, cfg)
print("rows (receiver, transmitter):", sys_.rows)
print("system rank:", numerical_rank(sys_.V))

pre = solve_precoders(ch, cfg)
print(f"largest alignment violation: {verify_alignment_condition(ch, pre, cfg):.2e}")

# %%
# The receive vectors, and the per-receiver effective channels. Interference
# from the two other broadcast slots collapses to two dimensions, leaving
# three clean ones for the desired symbols.
y = rx_signal_slotwise(ch, pre, d, cfg)
ext = assemble_extended_channel(ch, pre, cfg)
U = build_U(cfg)
for n in range(cfg.num_rx):
    eff = effective_channel(n, ext, U, cfg)
    d_hat = decode(n, y[n], eff)
    print(f"receiver {n}: interference rank {numerical_rank(eff.interference)}, "
          f"total rank {numerical_rank(eff.H_hat)}, "
          f"decode error {np.linalg.norm(d_hat - d[n]):.1e}")
    print("   sent   ", np.round(d[n], 3))
    print("   decoded", np.round(d_hat, 3))
