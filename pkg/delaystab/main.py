import argparse
import logging
import sys
from typing import Optional, Sequence

from delaystab.commands import maintenance, stability, sweeps
from delaystab.config import Settings, get_settings
from delaystab.errors import DelayStabError, SpecFileError, UsageError

log = logging.getLogger("delaystab")

EXIT_USAGE = 64
EXIT_SOFTWARE = 70


class CliParser(argparse.ArgumentParser):
    """argparse with usage errors on exit code 64; 2 is a verdict code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> CliParser:
    parser = CliParser(
        prog="delaystab",
        description="Stability of x' = -a x - b int x(t - tau) d eta(tau) for distributed delays",
    )
    parser.add_argument("--log", help="log level (default from DELAYSTAB_LOG)")
    parser.add_argument("--jobs", type=int, help="worker threads (default: available CPUs)")
    parser.add_argument("--seed", type=int, help="seed for randomised suites")
    parser.add_argument("--tol-root", type=float, help="Newton residual tolerance")
    parser.add_argument("--tol-marginal", type=float, help="|Re lambda| reported as marginal")
    parser.add_argument("--tol-boundary", type=float, help="S(u) below which a boundary branch ends")

    sub = parser.add_subparsers(dest="command", required=True)
    stability.register(sub)
    sweeps.register(sub)
    maintenance.register(sub)
    return parser


def settings_from_args(args: argparse.Namespace) -> Settings:
    overrides = {
        "log": args.log,
        "jobs": args.jobs,
        "seed": args.seed,
        "root_tol": args.tol_root,
        "marginal_tol": args.tol_marginal,
        "boundary_s_tol": args.tol_boundary,
        "archive_path": getattr(args, "archive", None),
    }
    return get_settings().model_copy(update={k: v for k, v in overrides.items() if v is not None})


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = settings_from_args(args)
    logging.basicConfig(
        level=settings.log.upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        return args.handler(args, settings)
    except (SpecFileError, UsageError) as exc:
        print(f"delaystab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DelayStabError as exc:
        log.debug("command failed", exc_info=True)
        print(f"delaystab {args.command}: {exc}", file=sys.stderr)
        return EXIT_SOFTWARE
