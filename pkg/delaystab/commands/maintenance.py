"""selftest and runs subcommands."""

import argparse

from delaystab.archive import list_runs, open_archive
from delaystab.commands import add_archive_argument, print_json
from delaystab.config import Settings
from delaystab.errors import UsageError
from delaystab.models import RunSummary
from delaystab.selftest import CASES, run_selftest

EXIT_FAILED = 70


def register(sub) -> None:
    selftest = sub.add_parser("selftest", help="run the fast acceptance checks")
    selftest.add_argument(
        "--case", action="append", dest="cases", choices=[name for name, _ in CASES],
        help="run only this case (repeatable)",
    )
    selftest.set_defaults(handler=run_selftest_command)

    runs = sub.add_parser("runs", help="list runs stored in an archive")
    add_archive_argument(runs)
    runs.add_argument("--command", dest="only", choices=("boundary", "chart", "check"))
    runs.set_defaults(handler=run_list)


def run_selftest_command(args: argparse.Namespace, settings: Settings) -> int:
    report = run_selftest(settings, args.cases)
    print_json(report)
    return 0 if report.passed else EXIT_FAILED


def run_list(args: argparse.Namespace, settings: Settings) -> int:
    if not settings.archive_path:
        raise UsageError("runs needs --archive")
    with open_archive(settings.archive_path) as con:
        for row in list_runs(con, args.only):
            print_json(RunSummary(**row))
    return 0
