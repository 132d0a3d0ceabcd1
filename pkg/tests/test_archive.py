import json

import numpy as np
import pytest

from delaystab.archive import (
    connect,
    list_runs,
    load_boundary,
    load_chart,
    open_archive,
    record_boundary,
    record_chart,
    record_verdict,
)
from delaystab.boundary import chart, trace_boundary
from delaystab.distributions import DiracMass, Exponential
from delaystab.errors import DelayStabError
from delaystab.specfiles import dump_spec


@pytest.fixture
def con(tmp_path):
    con = connect(str(tmp_path / "runs.duckdb"))
    yield con
    con.close()


def test_boundary_round_trip(con, cfg):
    branches = trace_boundary(Exponential(1.0), n_points=100, settings=cfg)
    run_id = record_boundary(con, branches, dump_spec(Exponential(1.0)), {"points": 100})
    loaded = load_boundary(con, run_id)
    assert [br.kind for br in loaded] == [br.kind for br in branches]
    for got, want in zip(loaded, branches):
        np.testing.assert_array_equal(got.E, want.E)
        np.testing.assert_array_equal(got.a, want.a)


def test_chart_round_trip(con, cfg):
    grid = chart(DiracMass(1.0), [0.0, 0.5], [1.0, 2.0], settings=cfg)
    run_id = record_chart(con, grid, dump_spec(DiracMass(1.0)), {})
    loaded = load_chart(con, run_id)
    np.testing.assert_array_equal(loaded.a_axis, grid.a_axis)
    assert list(loaded.rows()) == list(grid.rows())
    assert load_chart(con, run_id + 100) is None


def test_runs_are_listed_in_order(con, cfg):
    record_verdict(con, "Stable", json.dumps({"verdict": "Stable"}), None, {"a": 0.0, "b": 1.0, "E": 1.0})
    grid = chart(DiracMass(1.0), [0.0], [1.0, 2.0], settings=cfg)
    record_chart(con, grid, dump_spec(DiracMass(1.0)), {"a": [0.0]})

    runs = list_runs(con)
    assert [r["command"] for r in runs] == ["check", "chart"]
    assert [r["rows"] for r in runs] == [1, 2]
    assert json.loads(runs[0]["parameters"]) == {"E": 1.0, "a": 0.0, "b": 1.0}
    assert [r["command"] for r in list_runs(con, "chart")] == ["chart"]


def test_schema_is_reopened_without_loss(tmp_path):
    path = str(tmp_path / "runs.duckdb")
    with open_archive(path) as con:
        record_verdict(con, "Unstable", "{}", None, {})
    with open_archive(path) as con:
        assert len(list_runs(con)) == 1


def test_archive_path_required():
    with pytest.raises(DelayStabError):
        with open_archive():
            pass
