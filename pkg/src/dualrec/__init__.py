"""Simulation and verification of user-creator feature dynamics under recommendation."""

from .convergence import (
    PolarizationReport,
    detect_bipolarization,
    detect_clusters,
    detect_consensus,
)
from .dynamics import NO_REC, RateSpec, SystemState, creator_update, step, user_update, user_update_fixed
from .engine import RunConfig, Trajectory, init_state, run
from .harness import SweepSpec, emit_plot_data, load_config, parse_config, run_sweep, write_sweep
from .impact import CreatorImpact, UserImpact, eval_f, eval_g
from .io import dump_state, load_embeddings
from .measures import (
    MeasureRecord,
    creator_diversity,
    measure,
    recommendation_diversity,
    recommendation_relevance,
    tendency_to_polarization,
)
from .policy import PolicySpec, RecentLists, policy_rows, sample_assignment
from .sphere import inner, project

__version__ = "0.1.0"
