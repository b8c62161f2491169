"""
Starting from your own embeddings
=================================

Any pair of user and creator embedding matrices can seed the dynamics.
The file format is a header ``m n d`` followed by m user rows and n
creator rows; rows are normalized on load.
"""

from pathlib import Path

import numpy as np

from dualrec import RunConfig, SystemState, dump_state, load_embeddings, measure, policy_rows, run
from dualrec.policy import PolicySpec

out = Path("demo_output")
out.mkdir(exist_ok=True)

# %% fake "two-tower" embeddings: users and creators share a few taste directions
rng = np.random.default_rng(1)
tastes = rng.normal(size=(4, 16))
users = tastes[rng.integers(0, 4, 200)] + 0.8 * rng.normal(size=(200, 16))
creators = tastes[rng.integers(0, 4, 60)] + 0.8 * rng.normal(size=(60, 16))
path = out / "embeddings.txt"
with open(path, "w") as fh:
    fh.write("200 60 16\n")
    np.savetxt(fh, np.vstack([users, creators]))

# %% load and measure the starting point
U, V = load_embeddings(path)
start = SystemState(U, V)
print("start:", measure(start, policy_rows(start, PolicySpec())))

# %% run the dynamics from the file, with and without top-k
for policy in (PolicySpec(), PolicySpec("topk", k=5)):
    config = RunConfig(d=16, n=60, m=200, horizon=500, record_every=500, init=str(path), policy=policy)
    traj = run(config)
    print(policy.label(), traj.records[-1])

# %% the final state round-trips through the same format
dump_state(traj.final_state, out / "final_state.txt")
U2, V2 = load_embeddings(out / "final_state.txt")
print("round-trip max error:", float(np.abs(V2 - traj.final_state.creators).max()))
