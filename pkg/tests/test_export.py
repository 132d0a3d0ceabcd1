import csv
import io

import numpy as np

from delaystab.boundary import BoundaryBranch, BranchKind, ChartGrid, chart, trace_boundary
from delaystab.criteria import StabilityStatus
from delaystab.distributions import DiracMass, Exponential
from delaystab.export import fmt, write_boundary, write_chart, write_trace
from delaystab.simulator import simulate

BRANCHES = [
    BoundaryBranch(np.array([0.5, 1.0]), np.array([-0.8, -0.5]), np.array([1.25, 2.0])),
    BoundaryBranch(np.zeros(2), np.array([-1.0, -1.0]), np.array([0.0, 1e4]), BranchKind.ZERO_ROOT_LINE),
]


def test_number_format():
    assert fmt(0.1) == "0.1"
    assert fmt(1.0 / 3.0) == "0.333333333333"
    assert fmt(1e4) == "10000"


def test_boundary_csv():
    out = io.StringIO()
    write_boundary(BRANCHES, out)
    assert out.getvalue().splitlines() == [
        "u,a,E,branch_id,kind",
        "0.5,-0.8,1.25,0,HopfCurve",
        "1,-0.5,2,0,HopfCurve",
        "0,-1,0,1,ZeroRootLine",
        "0,-1,10000,1,ZeroRootLine",
    ]


def test_boundary_dat_separates_blocks():
    out = io.StringIO()
    write_boundary(BRANCHES, out, "dat")
    lines = out.getvalue().splitlines()
    assert lines[0] == "# u a E branch_id kind"
    assert lines[3] == ""
    assert lines[4] == "0 -1 0 1 ZeroRootLine"


def test_chart_csv():
    grid = ChartGrid(
        np.array([0.0]), np.array([1.0, 2.0]),
        np.array([[StabilityStatus.STABLE, StabilityStatus.UNSTABLE]], dtype=object),
        np.array([[0, 2]]),
    )
    out = io.StringIO()
    write_chart(grid, out)
    assert out.getvalue() == "a,E,status,unstable_count\n0,1,Stable,0\n0,2,Unstable,2\n"


def test_outputs_are_deterministic(cfg):
    def render():
        out = io.StringIO()
        write_boundary(trace_boundary(Exponential(1.0), n_points=200, settings=cfg), out)
        write_chart(chart(DiracMass(1.0), [0.0, 0.5], [1.0, 2.0, 3.0], settings=cfg), out)
        return out.getvalue()

    assert render() == render()


def test_trace_csv(cfg):
    out = io.StringIO()
    write_trace(simulate(0.0, 1.0, DiracMass(1.0), T=11.0, settings=cfg), out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "t,x"
    assert lines[1] == "0,1"
    assert len(lines) == 2 + 2200


def test_csv_reads_back(cfg):
    branches = trace_boundary(Exponential(1.0), n_points=200, settings=cfg)
    out = io.StringIO()
    write_boundary(branches, out)
    rows = list(csv.DictReader(io.StringIO(out.getvalue())))
    assert len(rows) == sum(len(branch) for branch in branches)
    first = [row for row in rows if row["branch_id"] == "0"]
    np.testing.assert_allclose([float(row["E"]) for row in first], branches[0].E, rtol=1e-11)
    assert {row["kind"] for row in rows} == {"HopfCurve", "ZeroRootLine"}


def test_chart_dat_is_space_separated():
    grid = ChartGrid(
        np.array([0.0]), np.array([1.0]),
        np.array([[StabilityStatus.DISTRIBUTION_DEPENDENT]], dtype=object),
        np.array([[0]]),
    )
    out = io.StringIO()
    write_chart(grid, out, "dat")
    assert out.getvalue() == "# a E status unstable_count\n0 1 DistributionDependent 0\n"
