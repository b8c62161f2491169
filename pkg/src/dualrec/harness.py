"""Experiment configuration, parameter sweeps and result files.

Configuration is TOML with the sections ``system``, ``rates``, ``impact``,
``policy``, ``run`` and (for sweeps) ``sweep``.  Every key is optional and
falls back to the synthetic-data defaults (d=10, n=50, m=100, T=1000,
beta=1, eta_u=eta_c=0.1, inner-product f, sign g)::

    [policy]
    kind = "topk"
    beta = 1.0
    k = 5

    [run]
    reps = 30
    seed = 7

    [sweep]
    "policy.k" = [50, 25, 20, 10, 5, 1]

Sweep keys are ``section.key`` paths; cells are the cartesian product of
the axis lists in the order written.
"""

import csv
import io
import itertools
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dynamics import RateSpec
from .engine import RunConfig, run
from .errors import DualRecError, ParseError, ValidationError
from .impact import CreatorImpact, UserImpact
from .io import dump_state, load_embeddings  # noqa: F401  (re-exported)
from .policy import PolicySpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MEASURES = ("cd", "rd", "rr", "tp")
POLICY_COLUMNS = ("beta", "k", "tau", "rho", "eps")
RAW_COLUMNS = ("run_id",) + POLICY_COLUMNS + ("rep", "t") + MEASURES

_SCHEMA = {
    "system": {"d": int, "n": int, "m": int, "init": str},
    "rates": {"eta_u": float, "eta_c": float, "fixed_dims": int},
    "impact": {"f": str, "a": float, "b": float, "g": str},
    "policy": {"kind": str, "beta": float, "k": int, "tau": float, "rho": float,
               "list_len": int, "eps": float},
    "run": {"horizon": int, "reps": int, "seed": int, "record_every": int,
            "snapshot_every": int, "stop_tp": float},
}


@dataclass(frozen=True)
class SweepSpec:
    base: RunConfig
    axes: dict
    raw: dict = field(repr=False, default_factory=dict)

    def cells(self):
        """``[(params, RunConfig), ...]`` over the cartesian product of the axes."""
        if not self.axes:
            return [({}, self.base)]
        paths = list(self.axes)
        out = []
        for values in itertools.product(*(self.axes[p] for p in paths)):
            params = dict(zip(paths, values))
            raw = {sec: dict(body) for sec, body in self.raw.items()}
            for path, value in params.items():
                sec, key = path.split(".")
                raw.setdefault(sec, {})[key] = value
            out.append((params, build_config(raw)))
        return out


@dataclass
class AggregateCell:
    index: int
    params: dict
    config: RunConfig
    reps: int
    mean: dict
    std: dict


@dataclass
class SweepResult:
    cells: list
    raw_csv: str
    aggregate_csv: str
    trajectories: list  # per cell, list of Trajectory in rep order


def _line_of(text, key):
    pattern = re.compile(rf'^[ \t]*(?:"{re.escape(key)}"|{re.escape(key)})[ \t]*=', re.M)
    match = pattern.search(text)
    if match is None:
        match = re.search(rf"^[ \t]*\[{re.escape(key)}\]", text, re.M)
    return text.count("\n", 0, match.start()) + 1 if match else None


def _typed(value, kind, field_name, line):
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, bool) or not isinstance(value, kind):
        raise ParseError(f"expected {kind.__name__}, got {value!r}", line, field_name)
    return value


def _check_raw(raw, text, allow_sweep=True):
    for sec, body in raw.items():
        if sec == "sweep" and allow_sweep:
            continue
        if sec not in _SCHEMA or not isinstance(body, dict):
            raise ParseError("unknown section", _line_of(text, sec), sec)
        for key, value in body.items():
            if key not in _SCHEMA[sec]:
                raise ParseError("unknown key", _line_of(text, key), f"{sec}.{key}")
            body[key] = _typed(value, _SCHEMA[sec][key], f"{sec}.{key}", _line_of(text, key))


def build_config(raw):
    """RunConfig from a checked ``{section: {key: value}}`` mapping."""
    sys_ = raw.get("system", {})
    rates = raw.get("rates", {})
    imp = raw.get("impact", {})
    pol = raw.get("policy", {})
    run_ = raw.get("run", {})

    def make(constraint, factory, **kwargs):
        try:
            return factory(**kwargs)
        except (ValueError, TypeError) as err:
            raise ValidationError(str(err), constraint) from None

    rate_spec = make("rates", RateSpec, eta_u=rates.get("eta_u", 0.1),
                     eta_c=rates.get("eta_c", 0.1), fixed_dims=rates.get("fixed_dims", 0))
    f_kind = imp.get("f", "inner_product")
    f_args = {}
    if f_kind != "inner_product":
        f_args = {"a": imp.get("a", 0.5), "b": imp.get("b", 0.0 if f_kind == "sign_only" else 0.5)}
    elif "a" in imp or "b" in imp:
        raise ValidationError("inner_product f takes no parameters", "impact")
    f = make("impact.f", UserImpact, kind=f_kind, **f_args)
    g = make("impact.g", CreatorImpact, kind=imp.get("g", "sign"))
    policy = make("policy", PolicySpec, kind=pol.get("kind", "softmax"), beta=pol.get("beta", 1.0),
                  k=pol.get("k"), tau=pol.get("tau"), rho=pol.get("rho"),
                  list_len=pol.get("list_len"), eps=pol.get("eps"))
    horizon = run_.get("horizon", 1000)
    return make("run", RunConfig, d=sys_.get("d", 10), n=sys_.get("n", 50), m=sys_.get("m", 100),
                horizon=horizon, reps=run_.get("reps", 1), master_seed=run_.get("seed", 0),
                rates=rate_spec, f=f, g=g, policy=policy, init=sys_.get("init", "random_sphere"),
                record_every=run_.get("record_every", 1),
                snapshot_every=run_.get("snapshot_every", 0), stop_tp=run_.get("stop_tp"))


def parse_config(text):
    """Parse configuration text into a :class:`RunConfig` or, with a ``[sweep]`` section, a :class:`SweepSpec`."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        line = getattr(err, "lineno", None)
        if line is None:
            found = re.search(r"line (\d+)", str(err))
            line = int(found.group(1)) if found else None
        raise ParseError(f"malformed configuration: {err}", line) from None
    _check_raw(raw, text)
    sweep = raw.pop("sweep", None)
    base = build_config(raw)
    if sweep is None:
        return base
    axes = {}
    for path, values in sweep.items():
        line = _line_of(text, path)
        sec, _, key = path.partition(".")
        if sec not in _SCHEMA or key not in _SCHEMA[sec]:
            raise ParseError("unknown sweep parameter", line, path)
        if not isinstance(values, list) or not values:
            raise ParseError("sweep axis must be a non-empty list", line, path)
        axes[path] = [_typed(v, _SCHEMA[sec][key], path, line) for v in values]
    spec = SweepSpec(base, axes, raw)
    spec.cells()  # validate every cell up front
    return spec


def load_config(path):
    return parse_config(Path(path).read_text())


def with_seed(spec, seed):
    """Copy of a RunConfig or SweepSpec with ``master_seed`` replaced."""
    if isinstance(spec, RunConfig):
        return replace(spec, master_seed=seed)
    raw = {sec: dict(body) for sec, body in spec.raw.items()}
    raw.setdefault("run", {})["seed"] = seed
    return SweepSpec(build_config(raw), spec.axes, raw)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _policy_values(config):
    p = config.policy
    return [p.beta, p.k, p.tau, p.rho, p.eps]


def _run_task(task):
    cell, config, rep = task
    try:
        return run(config, rep)
    except DualRecError as err:
        err.cell, err.rep = cell, rep
        if err.args:
            err.args = (f"cell {cell} rep {rep}: {err.args[0]}",) + err.args[1:]
        raise


def run_sweep(spec, parallelism=1):
    """Run every (cell, rep) and aggregate the final-step measures.

    Results are identical for any ``parallelism``: each repetition draws
    only from its own seed streams and results are collected in task order.
    """
    if isinstance(spec, RunConfig):
        spec = SweepSpec(spec, {}, {})
    cells = spec.cells()
    tasks = [(i, config, rep) for i, (_, config) in enumerate(cells) for rep in range(config.reps)]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        results = [_run_task(t) for t in tasks]

    raw = io.StringIO()
    writer = csv.writer(raw, lineterminator="\n")
    writer.writerow(RAW_COLUMNS)
    trajectories, aggregates = [], []
    pos = 0
    for index, (params, config) in enumerate(cells):
        trajs = results[pos:pos + config.reps]
        pos += config.reps
        trajectories.append(trajs)
        policy = _policy_values(config)
        for traj in trajs:
            run_id = f"c{index}-r{traj.rep}"
            for rec in traj.records:
                writer.writerow([run_id] + [_fmt(v) for v in policy]
                                + [traj.rep, rec.time] + [_fmt(getattr(rec, k)) for k in MEASURES])
        finals = np.array([[getattr(t.records[-1], k) for k in MEASURES] for t in trajs])
        aggregates.append(AggregateCell(index, params, config, len(trajs),
                                        *summarize(finals)))
    return SweepResult(aggregates, raw.getvalue(), aggregate_csv(aggregates), trajectories)


def summarize(finals):
    """Per-measure mean and sample std (0.0 for a single rep) of a ``(reps, 4)`` array."""
    finals = np.asarray(finals, dtype=float)
    mean = finals.mean(axis=0)
    std = finals.std(axis=0, ddof=1) if len(finals) > 1 else np.zeros(finals.shape[1])
    return (dict(zip(MEASURES, map(float, mean))), dict(zip(MEASURES, map(float, std))))


def aggregate_csv(cells):
    extra = []
    for cell in cells:
        for path in cell.params:
            if not path.startswith("policy.") and path not in extra:
                extra.append(path)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["cell"] + list(POLICY_COLUMNS) + extra + ["reps"]
                    + [f"{k}_{s}" for k in MEASURES for s in ("mean", "std")])
    for cell in cells:
        writer.writerow([cell.index] + [_fmt(v) for v in _policy_values(cell.config)]
                        + [_fmt(cell.params.get(p)) for p in extra] + [cell.reps]
                        + [_fmt(stats[k]) for k in MEASURES for stats in (cell.mean, cell.std)])
    return out.getvalue()


def aggregates_from_raw(raw_csv):
    """Recompute ``{run_id prefix (cell): (mean, std)}`` from a raw CSV's final rows."""
    finals = {}
    for row in csv.DictReader(io.StringIO(raw_csv)):
        finals[row["run_id"]] = row  # rows are time ordered; the last one wins
    by_cell = {}
    for run_id, row in finals.items():
        cell = int(run_id.split("-")[0][1:])
        by_cell.setdefault(cell, []).append((int(row["rep"]), [float(row[k]) for k in MEASURES]))
    return {cell: summarize([v for _, v in sorted(rows)]) for cell, rows in sorted(by_cell.items())}


def emit_plot_data(trajectories, out_dir, prefix=""):
    """Write per-measure time series (t, mean, std across reps) and snapshot dumps.

    Files: ``<prefix><measure>.csv`` for each measure and, for every
    snapshot, ``<prefix>snapshot_rep<r>_t<t>.csv`` with columns
    ``role, index, x0 .. x<d-1>``.  Returns the written paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = [r.time for r in trajectories[0].records]
    for traj in trajectories[1:]:
        if [r.time for r in traj.records] != grid:
            raise ValueError("trajectories do not share a record grid")
    written = []
    for name in MEASURES:
        values = np.array([[getattr(r, name) for r in t.records] for t in trajectories])
        mean = values.mean(axis=0)
        std = values.std(axis=0, ddof=1) if len(values) > 1 else np.zeros(len(grid))
        path = out_dir / f"{prefix}{name}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "mean", "std"])
            for row in zip(grid, mean, std):
                writer.writerow([row[0], repr(float(row[1])), repr(float(row[2]))])
        written.append(path)
    for traj in trajectories:
        for state in traj.snapshots:
            path = out_dir / f"{prefix}snapshot_rep{traj.rep}_t{state.time}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["role", "index"] + [f"x{i}" for i in range(state.d)])
                for role, X in (("user", state.users), ("creator", state.creators)):
                    for i, row in enumerate(X):
                        writer.writerow([role, i] + [repr(float(x)) for x in row])
            written.append(path)
    return written


def write_sweep(result, out_dir):
    """Write ``raw.csv``, ``aggregate.csv`` and per-cell time series under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "raw.csv").write_text(result.raw_csv)
    (out_dir / "aggregate.csv").write_text(result.aggregate_csv)
    for cell, trajs in zip(result.cells, result.trajectories):
        prefix = f"cell{cell.index}_" if len(result.cells) > 1 else ""
        if len({tuple(r.time for r in t.records) for t in trajs}) == 1:
            emit_plot_data(trajs, out_dir / "timeseries", prefix)
        for traj in trajs:
            dump_state(traj.final_state, out_dir / f"{prefix}final_state_rep{traj.rep}.txt")
