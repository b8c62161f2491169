"""
Checking the inequalities numerically
=====================================

Each oracle samples random instances that satisfy a lemma's hypotheses
and records how far the conclusion is from failing.  Every instance
passed if the worst margin is below the 1e-9 rounding slack.
"""

import numpy as np

from dualrec import convergence as cv

rng = np.random.default_rng(0)

# %% projection of a nonnegative combination stays inside the cone
r = cv.oracle_convex_cone(5000, rng)
print(r.name, r.violations, f"{r.worst_margin:.2e}")

# %% one projected gradient-like step
r = cv.oracle_update_bounds(5000, rng)
print(r.name, r.violations, f"{r.worst_margin:.2e}")

# %% one creator shown to twenty users
print("guaranteed steps:", cv.single_creator_steps(0.4, 0.5, 20, 0.1))
r = cv.oracle_single_creator_bound(10, 20, 0.1, rng)
print(r.name, r.violations, f"{r.worst_margin:.2e}")

# %% bi-polarized and clustered states are absorbing
r = cv.check_absorbing_bipolar(50, 100, 10, 0.1, 200, rng, constructions=5)
print(r.name, r.violations, f"{r.worst_margin:.2e}")
r = cv.check_absorbing_clusters(50, 100, 10, 10, 0.05, 200, rng, constructions=3)
print(r.name, r.violations, r.details)

# %% a single instance, by hand
z = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
y = np.ones(3) / np.sqrt(3)
print(cv.convex_cone_instance(z, [0.3, 0.7], y))
