"""Command-line interface.

Subcommands cover the whole package: exact convergents, certified orbit
traces, balanced-time sets, occupancy histograms, renormalized peak
histograms, schedule generation, convergence bounds, the density/summation
proposition, seeded experiments and the randomized verification suites.

Exit codes: 0 success, 1 usage or domain error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .balanced import (
    balanced_times,
    level_occupancy,
    reciprocal_sum,
    write_balanced_csv,
    write_occupancy_csv,
)
from .cf import (
    ConstructedSource,
    ExplicitSource,
    PartialQuotientSource,
    PeriodicSource,
    SampledSource,
    convergents,
    expand_real,
)
from .certified import CertifiedReal
from .dynamics import ALPHA_POINT, iterate_levels
from .errors import CylinderLabError
from .experiments import (
    ExperimentManifest,
    run_convergence_experiment,
    run_divergence_experiment,
    run_quotient_statistics,
)
from .fileio import atomic_write_json, atomic_write_text
from .renorm import (
    CSequence,
    PeakSchedule,
    convergence_bound,
    generate_schedule,
    peak_histogram,
)
from .seqtools import (
    build_counterexample,
    divergence_floor,
    get_rule,
    subset_sum,
    upper_density,
)
from .verify import run_suite

__all__ = ["main", "cli_dispatch"]


class _Parser(argparse.ArgumentParser):
    # Usage problems are exit code 1 (argparse defaults to 2, which this
    # tool reserves for verification failures).
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r} ({exc})")


def _parse_alpha(descriptor: str, seed: int, precision_bits: int) -> PartialQuotientSource:
    """Rotation-number descriptors:

    - ``periodic:a1,a2,...``       eventually periodic expansion (pure period)
    - ``rational:p/q``             exact rational, expanded by Euclid
    - ``explicit:a1,a2,...``       finite expansion (exact rational)
    - ``sampled``                  seeded uniform sample at --precision-bits
    - ``schedule:PATH``            constructed number from a schedule JSON
    """
    kind, _, rest = descriptor.partition(":")
    if kind == "periodic":
        return PeriodicSource([], [int(a) for a in rest.split(",") if a])
    if kind == "rational":
        return expand_real(_fraction(rest))
    if kind == "explicit":
        return ExplicitSource([int(a) for a in rest.split(",") if a])
    if kind == "sampled":
        return SampledSource(int(rest) if rest else seed, precision_bits)
    if kind == "schedule":
        return _load_schedule(rest).source()
    raise CylinderLabError(f"unknown alpha descriptor kind {kind!r}")


def _load_schedule(path: str) -> PeakSchedule:
    with open(path) as fh:
        return PeakSchedule.from_json(json.load(fh))


def _canonical_schedule(args) -> PeakSchedule:
    if getattr(args, "schedule", None):
        return _load_schedule(args.schedule)
    c = CSequence.geometric(getattr(args, "ratio", Fraction(1, 2)))
    delta_rule = getattr(args, "delta_rule", None)
    if delta_rule is not None:
        return generate_schedule(c, bound=args.bound, delta=delta_rule)
    return generate_schedule(c, bound=args.bound, r=args.growth_exponent)


def _parse_x(text: str):
    return ALPHA_POINT if text == "alpha" else _fraction(text)


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _emit(args, name: str, rows: list[dict], header: list[str]) -> str:
    """Write rows as CSV or JSON per --format; returns the path written."""
    if args.format == "json":
        path = _out_path(args, f"{name}.json")
        atomic_write_json(path, rows)
    else:
        path = _out_path(args, f"{name}.csv")
        lines = [",".join(header)]
        lines += [",".join(str(row[h]) for h in header) for row in rows]
        atomic_write_text(path, "\n".join(lines) + "\n")
    return path


# -- subcommands ------------------------------------------------------------


def _cmd_convergents(args) -> int:
    source = _parse_alpha(args.alpha, args.seed, args.precision_bits)
    rows = [
        {"n": c.n, "p": str(c.p), "q": str(c.q)}
        for c in convergents(source, args.n)[1:]
    ]
    path = _emit(args, "convergents", rows, ["n", "p", "q"])
    print(f"wrote {len(rows)} convergents to {path}")
    return 0


def _cmd_orbit(args) -> int:
    source = _parse_alpha(args.alpha, args.seed, args.precision_bits)
    alpha = CertifiedReal(source)
    trace = iterate_levels(alpha, _parse_x(args.x), args.steps, store=True)
    if args.trace_format == "rle":
        path = _out_path(args, "orbit.rle")
        trace.write_rle(path)
    else:
        path = _out_path(args, "orbit.csv")
        trace.write_csv(path)
    print(
        f"orbit of x={args.x}: {args.steps} steps, final level {trace.final_level}, "
        f"max |level| {trace.max_abs}; wrote {path}"
    )
    return 0


def _cmd_balanced(args) -> int:
    source = _parse_alpha(args.alpha, args.seed, args.precision_bits)
    alpha = CertifiedReal(source)
    horizon = min(args.horizon, args.budget_steps)
    bset = balanced_times(alpha, _parse_x(args.x), horizon, store=True)
    path = _out_path(args, "balanced.csv")
    write_balanced_csv(path, bset)
    enc = reciprocal_sum(bset, args.delta)
    sums_path = _out_path(args, "sums.csv")
    atomic_write_text(
        sums_path,
        "N,lower,upper,delta\n" f"{horizon},{enc.lower},{enc.upper},{args.delta}\n",
    )
    print(
        f"{bset.count} balanced times up to {horizon}; "
        f"sum n^-{args.delta} in [{enc.lower}, {enc.upper}]"
    )
    return 0


def _cmd_occupancy(args) -> int:
    source = _parse_alpha(args.alpha, args.seed, args.precision_bits)
    alpha = CertifiedReal(source)
    horizon = min(args.horizon, args.budget_steps)
    occ = level_occupancy(alpha, _parse_x(args.x), horizon)
    path = _out_path(args, "occupancy.csv")
    write_occupancy_csv(path, occ)
    lo, hi = occ.support()
    print(f"levels {lo}..{hi} over {horizon} steps; wrote {path}")
    return 0


def _cmd_peaks(args) -> int:
    schedule = _canonical_schedule(args)
    hist = peak_histogram(schedule, args.depth)
    if args.format == "json":
        path = _out_path(args, "peaks.json")
        atomic_write_json(
            path,
            {
                "depth": hist.depth,
                "block_length": str(hist.block_length),
                "counts": [str(c) for c in hist.counts],
            },
        )
    else:
        path = _out_path(args, "peaks.csv")
        hist.write_csv(path)
    print(
        f"depth {args.depth}: {hist.support_size()} levels, "
        f"block length {hist.block_length}, max count {hist.max_count()}; wrote {path}"
    )
    return 0


def _cmd_schedule(args) -> int:
    schedule = _canonical_schedule(args)
    schedule.ensure(args.depth)
    path = _out_path(args, "schedule.json")
    schedule.write_json(path)
    entries = ",".join(str(a) for a in schedule._a[: min(args.depth, 8)])
    print(f"generated {args.depth} pairs (a: {entries}...); wrote {path}")
    return 0


def _cmd_bound(args) -> int:
    schedule = _canonical_schedule(args)
    result = convergence_bound(schedule, args.depth, args.delta, refined=args.refined)
    rows = [
        {"k": k, "lower": str(b.lower), "upper": str(b.upper)}
        for k, b in enumerate(result.blocks)
    ]
    path = _emit(args, "bound_blocks", rows, ["k", "lower", "upper"])
    print(
        f"sup-sum bound (delta={args.delta}, depth {args.depth}): "
        f"[{result.total.lower}, {result.total.upper}]; blocks in {path}"
    )
    return 0


def _cmd_prop1(args) -> int:
    rule = get_rule(args.rule)
    spec = build_counterexample(rule, args.epsilon, k_count=args.blocks)
    spec_path = _out_path(args, "sparse_set.json")
    spec.write_json(spec_path)
    realized = subset_sum(rule, spec.blocks, spec.horizon())
    density = upper_density(spec.blocks, spec.horizon())
    evens = [(2 * i, 1) for i in range(1, args.horizon // 2 + 1)]
    div_sum = subset_sum(get_rule("reciprocal"), evens, args.horizon)
    floor = divergence_floor(get_rule("reciprocal"), evens, args.horizon, Fraction(1, 2))
    print(
        f"convergence direction: sum over blocks in [{realized.lower}, {realized.upper}] "
        f"< epsilon {args.epsilon}: {bool(realized.upper < args.epsilon)}; "
        f"density proxy {density} >= epsilon/2: {bool(density >= args.epsilon / 2)}"
    )
    print(
        f"divergence direction (b_n=1/n, evens, N={args.horizon}): "
        f"sum >= {div_sum.lower}, floor {floor}; wrote {spec_path}"
    )
    return 0


def _cmd_experiment(args) -> int:
    if args.which == "diverge":
        manifest = ExperimentManifest(
            name="diverge",
            seed=args.seed,
            trials=args.trials,
            horizon_low=args.n1,
            horizon_high=args.n2,
            delta=args.delta,
            precision_bits=args.precision_bits,
        )
        result = run_divergence_experiment(manifest)
        result.write_csv(_out_path(args, "diverge_trials.csv"))
        atomic_write_json(_out_path(args, "diverge_summary.json"), result.summary())
        print(json.dumps(result.summary(), indent=2, sort_keys=True))
        return 0
    if args.which == "converge":
        schedule = _canonical_schedule(args)
        manifest = ExperimentManifest(
            name="converge",
            seed=args.seed,
            trials=0,
            grid_size=args.grid,
            depth=args.depth,
            delta=args.delta,
            precision_bits=args.precision_bits,
            schedule=schedule.to_json(),
        )
        result = run_convergence_experiment(
            schedule, manifest, horizon_cap=args.budget_steps
        )
        result.write_csv(_out_path(args, "converge_grid.csv"))
        atomic_write_json(_out_path(args, "converge_summary.json"), result.summary())
        print(json.dumps(result.summary(), indent=2, sort_keys=True))
        return 0 if result.summary()["sup_within_bound"] else 2
    manifest = ExperimentManifest(
        name="quotients",
        seed=args.seed,
        trials=args.trials,
        horizon_low=args.n1,
        horizon_high=args.n2,
        precision_bits=args.precision_bits,
    )
    result = run_quotient_statistics(manifest)
    result.write_csv(_out_path(args, "quotients_trials.csv"))
    atomic_write_json(_out_path(args, "quotients_summary.json"), result.summary())
    print(json.dumps(result.summary(), indent=2, sort_keys=True))
    return 0


def _cmd_verify(args) -> int:
    reports = run_suite(
        args.suite, args.trials, args.seed, budget=args.budget_steps, bits=args.precision_bits
    )
    ok = True
    for report in reports:
        for line in report.lines():
            print(line)
        ok = ok and report.ok
    return 0 if ok else 2


# -- parser -----------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--precision-bits", type=int, default=512)
    p.add_argument("--budget-steps", type=int, default=10_000_000)


def _add_schedule_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--schedule", help="schedule JSON file (overrides generation)")
    p.add_argument("--ratio", type=_fraction, default=Fraction(1, 2),
                   help="geometric target ratio for generated schedules")
    p.add_argument("--bound", type=int, default=1, help="upper bound M for the b entries")
    p.add_argument("--growth-exponent", type=int, default=2,
                   help="polynomial cap exponent r for the log rule")
    p.add_argument("--delta-rule", type=_fraction, default=None,
                   help="generate with the delta rule at this exponent")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cylinder-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("convergents", parents=[], help="exact convergents of a rotation number")
    _add_common(p)
    p.add_argument("--alpha", required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=_cmd_convergents)

    p = sub.add_parser("orbit", help="certified level trace of an orbit")
    _add_common(p)
    p.add_argument("--alpha", required=True)
    p.add_argument("--x", default="0", help="base point (rational or 'alpha')")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--trace-format", choices=["csv", "rle"], default="csv")
    p.set_defaults(fn=_cmd_orbit)

    p = sub.add_parser("balanced", help="balanced-time set and reciprocal sum")
    _add_common(p)
    p.add_argument("--alpha", required=True)
    p.add_argument("--x", default="0")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--delta", type=_fraction, default=Fraction(1))
    p.set_defaults(fn=_cmd_balanced)

    p = sub.add_parser("occupancy", help="exact level histogram of an orbit")
    _add_common(p)
    p.add_argument("--alpha", required=True)
    p.add_argument("--x", default="0")
    p.add_argument("--horizon", type=int, required=True)
    p.set_defaults(fn=_cmd_occupancy)

    p = sub.add_parser("peaks", help="renormalized peak histogram")
    _add_common(p)
    _add_schedule_opts(p)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(fn=_cmd_peaks)

    p = sub.add_parser("schedule", help="generate and save a schedule")
    _add_common(p)
    _add_schedule_opts(p)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(fn=_cmd_schedule)

    p = sub.add_parser("bound", help="analytic convergence bound")
    _add_common(p)
    _add_schedule_opts(p)
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--delta", type=_fraction, default=Fraction(1))
    p.add_argument("--refined", action="store_true")
    p.set_defaults(fn=_cmd_bound)

    p = sub.add_parser("prop1", help="density/summation proposition, both directions")
    _add_common(p)
    p.add_argument("--epsilon", type=_fraction, default=Fraction(1, 4))
    p.add_argument("--rule", default="reciprocal-log-squared")
    p.add_argument("--blocks", type=int, default=6)
    p.add_argument("--horizon", type=int, default=10_000)
    p.set_defaults(fn=_cmd_prop1)

    p = sub.add_parser("experiment", help="seeded Monte-Carlo experiments")
    ex = p.add_subparsers(dest="which")
    d = ex.add_parser("diverge")
    _add_common(d)
    d.add_argument("--trials", type=int, default=100)
    d.add_argument("--n1", type=int, default=10_000)
    d.add_argument("--n2", type=int, default=1_000_000)
    d.add_argument("--delta", type=_fraction, default=Fraction(1))
    d.set_defaults(fn=_cmd_experiment)
    c = ex.add_parser("converge")
    _add_common(c)
    _add_schedule_opts(c)
    c.add_argument("--grid", type=int, default=512)
    c.add_argument("--depth", type=int, default=6)
    c.add_argument("--delta", type=_fraction, default=Fraction(1))
    c.set_defaults(fn=_cmd_experiment)
    q = ex.add_parser("quotients")
    _add_common(q)
    q.add_argument("--trials", type=int, default=1_000)
    q.add_argument("--n1", type=int, default=100)
    q.add_argument("--n2", type=int, default=10_000)
    q.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("verify", help="randomized structural-invariant suites")
    _add_common(p)
    p.add_argument("--suite", default="all")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(fn=_cmd_verify)

    return parser


def cli_dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "fn", None):
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.fn(args)
    except CylinderLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(cli_dispatch())


if __name__ == "__main__":
    main()
