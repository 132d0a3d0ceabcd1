"""boundary, chart and simulate subcommands."""

import argparse
import logging
from pathlib import Path

from delaystab.archive import open_archive, record_boundary, record_chart
from delaystab.boundary import chart, trace_boundary
from delaystab.charfun import MAX_ABS_A, leading_root
from delaystab.commands import (
    add_archive_argument,
    add_dist_arguments,
    grid_range,
    output,
    print_json,
    require_distribution,
    spec_text,
    unit_shape,
)
from delaystab.config import Settings
from delaystab.criteria import normalize
from delaystab.distributions import scale_to_mean
from delaystab.errors import DelayStabError, UsageError
from delaystab.export import write_boundary, write_chart, write_trace
from delaystab.models import DecayOut, complex_pair
from delaystab.simulator import (
    SimulationCase,
    SimulationTrace,
    decay_rate,
    load_history,
    simulate,
    simulate_many,
)

log = logging.getLogger(__name__)


def register(sub) -> None:
    boundary = sub.add_parser("boundary", help="trace the stability boundary in the (a, E) plane")
    add_dist_arguments(boundary, required=True)
    boundary.add_argument("--u-max", type=float, help="largest scaled frequency u = omega E")
    boundary.add_argument("--points", type=int, help="base grid size in u")
    boundary.add_argument("--out", type=Path)
    boundary.add_argument("--format", choices=("csv", "dat"), default="csv")
    add_archive_argument(boundary)
    boundary.set_defaults(handler=run_boundary)

    grid = sub.add_parser("chart", help="root-count stability chart over an (a, E) grid")
    add_dist_arguments(grid, required=True)
    grid.add_argument("--a-range", type=grid_range, required=True, metavar="LO:HI:N")
    grid.add_argument("--E-range", type=grid_range, required=True, metavar="LO:HI:N")
    grid.add_argument("--out", type=Path)
    grid.add_argument("--format", choices=("csv", "dat"), default="csv")
    add_archive_argument(grid)
    grid.set_defaults(handler=run_chart)

    sim = sub.add_parser("simulate", help="integrate the equation and estimate the decay rate")
    sim.add_argument("--a", type=float, required=True)
    sim.add_argument("--b", type=float, default=1.0)
    means = sim.add_mutually_exclusive_group()
    means.add_argument("--E", type=float, help="rescale the distribution to this mean")
    means.add_argument(
        "--E-range", type=grid_range, metavar="LO:HI:N", help="simulate a batch of means, one JSON line each"
    )
    add_dist_arguments(sim, required=True)
    sim.add_argument("--T", type=float, help="horizon (default 40 x mean delay)")
    sim.add_argument("--dt", type=float, help="step (default min(mean/200, smallest delay/8))")
    sim.add_argument("--history", type=Path, help="CSV with columns t,x sampled on [-max delay, 0]")
    sim.add_argument("--out", type=Path, help="write the trace as CSV")
    sim.set_defaults(handler=run_simulate)


def run_boundary(args: argparse.Namespace, settings: Settings) -> int:
    dist = require_distribution(args)
    shape = dist if dist.mean() == 0 else unit_shape(dist)
    branches = trace_boundary(shape, args.u_max, args.points, settings=settings)
    with output(args.out) as out:
        write_boundary(branches, out, args.format)

    if settings.archive_path:
        with open_archive(settings.archive_path) as con:
            run_id = record_boundary(
                con, branches, spec_text(shape),
                {"u_max": args.u_max or settings.u_max, "points": args.points or settings.boundary_points},
            )
        log.info("archived boundary as run %d", run_id)
    return 0


def run_chart(args: argparse.Namespace, settings: Settings) -> int:
    dist = require_distribution(args)
    shape = dist if dist.mean() == 0 else unit_shape(dist)
    grid = chart(shape, args.a_range, args.E_range, settings=settings)
    with output(args.out) as out:
        write_chart(grid, out, args.format)

    failed = int((grid.counts < 0).sum())
    if failed:
        log.warning("%d chart cells failed and are marked Error", failed)
    if settings.archive_path:
        with open_archive(settings.archive_path) as con:
            run_id = record_chart(
                con, grid, spec_text(shape),
                {"a": grid.a_axis.tolist(), "E": grid.e_axis.tolist()},
            )
        log.info("archived chart as run %d", run_id)
    return 0


def _decay_out(trace: SimulationTrace, settings: Settings) -> DecayOut:
    root = None
    if trace.b > 0:
        a_n, dist_n = normalize(trace.a, trace.b, trace.dist)
        if abs(a_n) <= MAX_ABS_A:
            try:
                root = leading_root(a_n, dist_n, settings=settings) * trace.b
            except DelayStabError as exc:
                log.warning("leading root unavailable: %s", exc)
    return DecayOut(
        mean=trace.dist.mean(),
        decay_rate=decay_rate(trace),
        method=trace.method,
        dt=trace.dt,
        T=trace.horizon,
        leading_root=complex_pair(root),
    )


def run_simulate(args: argparse.Namespace, settings: Settings) -> int:
    dist = require_distribution(args)
    history = load_history(args.history) if args.history is not None else None

    if args.E_range is not None:
        if args.out is not None or args.T is not None:
            raise UsageError("--E-range takes neither --out nor --T; each mean uses its own horizon")
        cases = [
            SimulationCase(args.a, args.b, scale_to_mean(dist, float(E)), history, dt=args.dt)
            for E in args.E_range
        ]
        for trace in simulate_many(cases, settings=settings):
            print_json(_decay_out(trace, settings))
        return 0

    if args.E is not None:
        dist = scale_to_mean(dist, args.E)
    trace = simulate(args.a, args.b, dist, history, args.T, args.dt, settings=settings)
    if args.out is not None:
        with output(args.out) as out:
            write_trace(trace, out)
    print_json(_decay_out(trace, settings))
    return 0
