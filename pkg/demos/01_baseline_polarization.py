"""
Feedback loops polarize creators
================================

Start from random users and creators on the 10-dimensional sphere, recommend
with softmax at beta = 1 and watch the tendency to polarization climb to 1
while creator diversity collapses.
"""

import numpy as np

from dualrec import RunConfig, detect_bipolarization, detect_consensus, run

config = RunConfig(record_every=100)

# %% one repetition, printed every 100 steps
traj = run(config, rep=0)
print(f"{'t':>5} {'CD':>7} {'RD':>7} {'RR':>7} {'TP':>7}")
for r in traj.records:
    print(f"{r.time:>5} {r.cd:7.4f} {r.rd:7.4f} {r.rr:7.4f} {r.tp:7.4f}")

# %% what kind of state did we end in?
final = traj.final_state
for R in (0.5, 0.2, 0.1):
    cons = detect_consensus(final, R)
    bip = detect_bipolarization(final, R)
    print(f"R={R}: consensus={bool(cons)} bipolar={bool(bip)} residual={bip.max_residual:.4f}")

# %% the two poles
c = detect_bipolarization(final, 0.5).centers[0]
side = np.sign(final.creators @ c)
print("creators per pole:", int((side > 0).sum()), int((side < 0).sum()))
