"""Subcommand handlers. Each module exposes register(subparsers)."""

import argparse
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional, TextIO

import numpy as np

from delaystab.distributions import DelayDistribution, scale_to_mean
from delaystab.errors import UsageError
from delaystab.specfiles import dump_spec, load_spec, write_spec


def grid_range(text: str) -> np.ndarray:
    """argparse type for lo:hi:n."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}")
    if n < 1 or (n > 1 and hi <= lo):
        raise argparse.ArgumentTypeError(f"need n >= 1 and hi > lo, got {text!r}")
    return np.linspace(lo, hi, n)


def add_dist_arguments(parser: argparse.ArgumentParser, required: bool) -> None:
    parser.add_argument("--dist", type=Path, required=required, help="distribution spec (.json or .toml)")
    parser.add_argument("--emit-spec", type=Path, help="write the parsed distribution back as JSON")


def add_archive_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--archive", help="DuckDB file to append this run to")


def load_distribution(args: argparse.Namespace) -> Optional[DelayDistribution]:
    if args.dist is None:
        return None
    dist = load_spec(args.dist)
    if args.emit_spec is not None:
        write_spec(dist, args.emit_spec)
    return dist


def require_distribution(args: argparse.Namespace) -> DelayDistribution:
    dist = load_distribution(args)
    if dist is None:
        raise UsageError("--dist is required")
    return dist


def unit_shape(dist: DelayDistribution) -> DelayDistribution:
    """Mean-1 member of the distribution's scaled family."""
    return scale_to_mean(dist, 1.0)


def spec_text(dist: Optional[DelayDistribution]) -> Optional[str]:
    return None if dist is None else dump_spec(dist)


@contextmanager
def output(path: Optional[Path]) -> Iterator[TextIO]:
    """Text stream for --out, stdout when omitted."""
    if path is None:
        yield sys.stdout
        return
    # newline="" keeps the bytes identical across platforms
    with open(path, "w", newline="") as fh:
        yield fh


def print_json(model) -> None:
    print(model.model_dump_json())
