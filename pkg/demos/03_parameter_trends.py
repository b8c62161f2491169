"""
How fast does polarization set in?
==================================

Time series of the tendency to polarization for several sensitivities,
learning rates and frozen user dimensions.  Each series is written as
CSV (t, mean, std) for any plotting tool.
"""

from dataclasses import replace
from pathlib import Path

from dualrec import PolicySpec, RateSpec, RunConfig, emit_plot_data, run

out = Path("demo_output/trends")
base = RunConfig(horizon=600, record_every=50)
reps = 8


def series(name, config):
    trajs = [run(config, r) for r in range(reps)]
    emit_plot_data(trajs, out / name)
    tp = [sum(t.records[i].tp for t in trajs) / reps for i in range(len(trajs[0].records))]
    print(f"{name:<14}" + " ".join(f"{v:.3f}" for v in tp))


# %% sensitivity
print("TP every 50 steps")
for beta in (0.0, 1.0, 5.0):
    series(f"beta_{beta:g}", replace(base, policy=PolicySpec(beta=beta)))

# %% learning rates
for eta in (0.03, 0.3):
    series(f"eta_c_{eta:g}", replace(base, rates=RateSpec(0.1, eta)))
    series(f"eta_u_{eta:g}", replace(base, rates=RateSpec(eta, 0.1)))

# %% users that cannot move in their first five coordinates
series("fixed_dims_5", replace(base, rates=RateSpec(0.1, 0.1, 5)))
print("CSV files under", out)
