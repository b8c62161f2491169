"""Seeded simulation loop: policy rows -> sampling -> step -> measures."""

from dataclasses import dataclass, field

import numpy as np

from .dynamics import RateSpec, SystemState, step
from .errors import DimensionMismatch, DualRecError
from .impact import CreatorImpact, UserImpact
from .io import load_embeddings
from .measures import measure
from .policy import PolicySpec, RecentLists, policy_rows, sample_rows
from .sphere import random_unit

# stream tags for SeedSequence spawn keys
_INIT = 0
_STEP = 1


@dataclass(frozen=True)
class RunConfig:
    d: int = 10
    n: int = 50
    m: int = 100
    horizon: int = 1000
    reps: int = 1
    master_seed: int = 0
    rates: RateSpec = field(default_factory=RateSpec)
    f: UserImpact = field(default_factory=UserImpact)
    g: CreatorImpact = field(default_factory=CreatorImpact)
    policy: PolicySpec = field(default_factory=PolicySpec)
    init: str = "random_sphere"  # or a path to an embedding file
    record_every: int = 1
    snapshot_every: int = 0
    stop_tp: float | None = None

    def __post_init__(self):
        if self.d < 2 or self.n < 1 or self.m < 1:
            raise ValueError("need d >= 2, n >= 1, m >= 1")
        if self.horizon < 0 or self.reps < 1:
            raise ValueError("need horizon >= 0 and reps >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.record_every < 1 or (self.horizon and self.record_every > self.horizon):
            raise ValueError("record_every must lie in [1, horizon]")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be >= 0")
        if self.rates.fixed_dims >= self.d:
            raise ValueError("fixed_dims must be < d")
        if self.policy.kind == "topk" and self.policy.k > self.n:
            raise ValueError("top-k needs k <= n")
        if self.stop_tp is not None and not 0 < self.stop_tp <= 1:
            raise ValueError("stop_tp must lie in (0, 1]")


@dataclass
class Trajectory:
    records: list
    final_state: SystemState
    snapshots: list
    termination: str  # "horizon" or "stop"
    stop_step: int | None = None
    rep: int = 0


def stream(master_seed, *key):
    """Independent generator for a spawn key such as ``(rep, tag, step)``."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def init_state(config, rep):
    if config.init == "random_sphere":
        rng = stream(config.master_seed, rep, _INIT)
        users = random_unit(rng, config.m, config.d)
        creators = random_unit(rng, config.n, config.d)
    else:
        users, creators = load_embeddings(config.init)
        got = (users.shape[0], creators.shape[0], users.shape[1])
        want = (config.m, config.n, config.d)
        if got != want:
            raise DimensionMismatch(f"{config.init}: file has (m, n, d) = {got}, config {want}")
    return SystemState(users, creators, 0)


def run(config, rep=0):
    """Simulate one repetition.  Identical ``(config, rep)`` give identical output."""
    state = init_state(config, rep)
    policy = config.policy
    recents = RecentLists(config.m, policy.list_len) if policy.kind == "diversity" else None
    records, snapshots = [], []

    def observe(state):
        rows = policy_rows(state, policy, recents)
        if state.time % config.record_every == 0 or state.time == config.horizon:
            records.append(measure(state, rows))
        if config.snapshot_every and state.time % config.snapshot_every == 0:
            snapshots.append(state)
        return rows

    t = 0
    try:
        while True:
            rows = observe(state)
            stopped = (config.stop_tp is not None and records
                       and records[-1].time == t and records[-1].tp >= config.stop_tp)
            if stopped:
                return Trajectory(records, state, snapshots, "stop", t, rep)
            if t == config.horizon:
                return Trajectory(records, state, snapshots, "horizon", None, rep)
            uniforms = stream(config.master_seed, rep, _STEP, t).random(config.m)
            assignment = sample_rows(rows, uniforms)
            if recents is not None:
                recents.push(assignment)
            state = step(state, assignment, config.f, config.g, config.rates)
            t += 1
    except DualRecError as err:
        err.step = t
        if err.args:
            err.args = (f"step {t}: {err.args[0]}",) + err.args[1:]
        raise
