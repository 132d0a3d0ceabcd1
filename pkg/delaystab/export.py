"""CSV and gnuplot .dat writers with byte-stable number formatting."""

import csv
from typing import Iterable, TextIO

from delaystab.boundary import BoundaryBranch, ChartGrid
from delaystab.simulator import SimulationTrace

BOUNDARY_COLUMNS = ("u", "a", "E", "branch_id", "kind")
CHART_COLUMNS = ("a", "E", "status", "unstable_count")
TRACE_COLUMNS = ("t", "x")


def fmt(value: float) -> str:
    return "%.12g" % value


def _write(out: TextIO, columns: Iterable[str], rows: Iterable[tuple], dat: bool) -> None:
    writer = csv.writer(out, delimiter=" " if dat else ",", lineterminator="\n")
    if dat:
        out.write("# " + " ".join(columns) + "\n")
    else:
        writer.writerow(columns)
    for row in rows:
        if row is None:
            # blank line separates gnuplot data blocks
            writer.writerow(())
            continue
        writer.writerow(fmt(v) if isinstance(v, float) else v for v in row)


def boundary_rows(branches: list[BoundaryBranch], separate: bool = False):
    for branch_id, branch in enumerate(branches):
        if separate and branch_id > 0:
            yield None
        for u, a, E in zip(branch.u.tolist(), branch.a.tolist(), branch.E.tolist()):
            yield float(u), float(a), float(E), branch_id, branch.kind.value


def write_boundary(branches: list[BoundaryBranch], out: TextIO, fmt_name: str = "csv") -> None:
    _write(out, BOUNDARY_COLUMNS, boundary_rows(branches, separate=fmt_name == "dat"), fmt_name == "dat")


def write_chart(grid: ChartGrid, out: TextIO, fmt_name: str = "csv") -> None:
    rows = ((a, E, status.value, count) for a, E, status, count in grid.rows())
    _write(out, CHART_COLUMNS, rows, fmt_name == "dat")


def write_trace(trace: SimulationTrace, out: TextIO) -> None:
    _write(out, TRACE_COLUMNS, zip(trace.times.tolist(), trace.values.tolist()), False)
