"""
Which relay antenna layouts can align interference?
===================================================

Every relay slot needs ``(N-1)(M-1)`` alignment equations per broadcast
slot, and a relay with ``L`` antennas contributes ``L**2`` unknowns. So
what counts is the sum of squared antenna counts, not the total number of
antennas.
"""

from xrelay import check_feasibility, make_config

# %%
# A few layouts for a 3x3 network: one 2-antenna relay is enough, four
# single-antenna relays are exactly enough, two single-antenna relays are not.
for antennas in ([1], [1, 1], [2], [1, 1, 1, 1], [3]):
    cfg = make_config(3, 3, len(antennas), antennas)
    verdict = check_feasibility(cfg)
    print(f"relays {antennas!s:<14} unknowns {cfg.num_unknowns:>2}  "
          f"equations {cfg.num_equations}  margin {verdict.margin:>3}  "
          f"{'feasible' if verdict else 'infeasible'}")

# %%
# Smallest single relay that works, and the DoF it buys, for a grid of sizes.
print()
print(" M  N  antennas  slots  DoF")
for m in range(2, 6):
    for n in range(2, 6):
        need = (m - 1) * (n - 1)
        antennas = next(l for l in range(1, need + 1) if l * l >= need)
        cfg = make_config(m, n, 1, [antennas])
        print(f"{m:>2} {n:>2} {antennas:>9} {cfg.num_slots:>6}  {m * n / cfg.num_slots:.3f}")
