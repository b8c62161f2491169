"""Command line entry point: ``dualrec {run,sweep,verify,measure}``.

Exit codes: 0 success, 1 parse/validation/input error, 2 runtime error or
oracle violation.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import convergence as cv
from .dynamics import SystemState
from .engine import RunConfig
from .errors import DualRecError, FileFormat, ParseError, ValidationError, ZeroVector
from .harness import MEASURES, SweepSpec, load_config, run_sweep, with_seed, write_sweep
from .io import load_embeddings
from .measures import measure
from .policy import PolicySpec, policy_rows

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


def _say(args, *parts):
    if not args.quiet:
        print(*parts)


def _print_cells(args, result):
    header = "cell  " + "  ".join(f"{k:>16}" for k in MEASURES) + "  reps  params"
    _say(args, header)
    for cell in result.cells:
        stats = "  ".join(f"{cell.mean[k]:8.4f}±{cell.std[k]:<7.4f}" for k in MEASURES)
        params = ", ".join(f"{k}={v}" for k, v in cell.params.items()) or cell.config.policy.label()
        _say(args, f"{cell.index:>4}  {stats}  {cell.reps:>4}  {params}")


def _load(args, want_sweep):
    spec = load_config(args.config)
    if want_sweep and not isinstance(spec, SweepSpec):
        raise ValidationError("config has no [sweep] section", "sweep")
    if not want_sweep and isinstance(spec, SweepSpec):
        raise ValidationError("config has a [sweep] section; use the sweep command", "sweep")
    if args.seed is not None:
        spec = with_seed(spec, args.seed)
    return spec


def cmd_run(args):
    config = _load(args, want_sweep=False)
    result = run_sweep(config, args.parallelism)
    if args.out:
        write_sweep(result, args.out)
        _say(args, f"wrote results to {args.out}")
    _print_cells(args, result)
    return EXIT_OK


def cmd_sweep(args):
    spec = _load(args, want_sweep=True)
    result = run_sweep(spec, args.parallelism)
    if args.out:
        write_sweep(result, args.out)
        _say(args, f"wrote results to {args.out}")
    _print_cells(args, result)
    return EXIT_OK


def verification_suite(seed=0, quick=False):
    """All oracles at the acceptance parameters (``quick`` shrinks the trial counts)."""
    rng = np.random.default_rng(seed)
    scale = 100 if quick else 1
    return [
        cv.oracle_convex_cone(100_000 // scale, rng),
        cv.oracle_update_bounds(100_000 // scale, rng),
        cv.oracle_single_creator_bound(max(1, 100 // scale), 20, 0.1, rng),
        cv.oracle_single_creator_bound(max(1, 100 // scale), 20, 0.1, rng, bipolar=True),
        cv.check_absorbing_bipolar(50, 100, 10, 0.1, 200, rng, constructions=max(1, 100 // scale)),
        cv.check_absorbing_bipolar(50, 100, 10, 0.1, 200, rng, constructions=max(1, 20 // scale),
                                   consensus=True),
        cv.check_absorbing_clusters(50, 100, 10, 10, 0.05, 200, rng,
                                    constructions=max(1, 50 // scale)),
    ]


def cmd_verify(args):
    reports = verification_suite(args.seed or 0, args.quick)
    _say(args, f"{'oracle':<24} {'trials':>7} {'violations':>10} {'worst margin':>14}  result")
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        _say(args, f"{rep.name:<24} {rep.trials:>7} {rep.violations:>10} {rep.worst_margin:>14.3e}  {status}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_RUNTIME


def cmd_measure(args):
    users, creators = load_embeddings(args.state)
    state = SystemState(users, creators)
    policy = PolicySpec("softmax", beta=1.0)
    if args.config:
        spec = load_config(args.config)
        policy = (spec.base if isinstance(spec, SweepSpec) else spec).policy
    if policy.kind == "diversity":
        policy = PolicySpec("softmax", beta=policy.beta)  # no recommendation history in a state file
    rec = measure(state, policy_rows(state, policy))
    _say(args, f"policy {policy.label()}  m={state.m} n={state.n} d={state.d}")
    for k in MEASURES:
        print(f"{k} {getattr(rec, k)!r}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="dualrec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", type=Path, required=config_required)
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--parallelism", type=int, default=1)
        p.add_argument("--quiet", action="store_true")

    common(sub.add_parser("run", help="run one configuration"))
    common(sub.add_parser("sweep", help="run a parameter sweep"))
    p = sub.add_parser("verify", help="run the numerical oracles")
    common(p, config_required=False)
    p.add_argument("--quick", action="store_true", help="reduced trial counts")
    p = sub.add_parser("measure", help="measures of a dumped state file")
    common(p, config_required=False)
    p.add_argument("--state", type=Path, required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "sweep": cmd_sweep, "verify": cmd_verify,
               "measure": cmd_measure}[args.command]
    try:
        return handler(args)
    except (ParseError, ValidationError, FileFormat, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except DualRecError as err:
        print(f"error: {err}", file=sys.stderr)
        # a zero row in an input file is bad input; during a run it is a numerical failure
        if isinstance(err, ZeroVector) and getattr(err, "step", None) is None:
            return EXIT_INPUT
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
