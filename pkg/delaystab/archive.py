"""DuckDB archive of boundary, chart and verdict runs."""

import json
from contextlib import contextmanager
from typing import Iterator, Optional

import duckdb
import numpy as np

from delaystab.boundary import BoundaryBranch, BranchKind, ChartGrid
from delaystab.config import get_settings
from delaystab.criteria import StabilityStatus
from delaystab.errors import DelayStabError

SCHEMA = [
    "CREATE SEQUENCE IF NOT EXISTS run_ids START 1",
    """CREATE TABLE IF NOT EXISTS runs (
        run_id BIGINT PRIMARY KEY DEFAULT nextval('run_ids'),
        command VARCHAR NOT NULL,
        created_at TIMESTAMP DEFAULT current_timestamp,
        distribution VARCHAR,
        parameters VARCHAR NOT NULL
    )""",
    """CREATE TABLE IF NOT EXISTS boundary_points (
        run_id BIGINT, branch_id INTEGER, kind VARCHAR, u DOUBLE, a DOUBLE, e DOUBLE
    )""",
    """CREATE TABLE IF NOT EXISTS chart_cells (
        run_id BIGINT, a DOUBLE, e DOUBLE, status VARCHAR, unstable_count INTEGER
    )""",
    "CREATE TABLE IF NOT EXISTS verdicts (run_id BIGINT, status VARCHAR, payload VARCHAR)",
]


def connect(path: str) -> duckdb.DuckDBPyConnection:
    try:
        con = duckdb.connect(path)
    except duckdb.Error as exc:
        raise DelayStabError(f"cannot open archive {path}: {exc}") from exc
    init_schema(con)
    return con


def init_schema(con: duckdb.DuckDBPyConnection) -> None:
    for statement in SCHEMA:
        con.execute(statement)


@contextmanager
def open_archive(path: Optional[str] = None) -> Iterator[duckdb.DuckDBPyConnection]:
    path = path or get_settings().archive_path
    if not path:
        raise DelayStabError("no archive path given (use --archive or DELAYSTAB_ARCHIVE_PATH)")
    con = connect(path)
    try:
        yield con
    finally:
        con.close()


def _new_run(con, command: str, distribution: Optional[str], parameters: dict) -> int:
    return con.execute(
        "INSERT INTO runs (command, distribution, parameters) VALUES (?, ?, ?) RETURNING run_id",
        [command, distribution, json.dumps(parameters, sort_keys=True)],
    ).fetchone()[0]


def record_boundary(con, branches: list[BoundaryBranch], distribution: str, parameters: dict) -> int:
    run_id = _new_run(con, "boundary", distribution, parameters)
    rows = [
        [run_id, branch_id, branch.kind.value, float(u), float(a), float(E)]
        for branch_id, branch in enumerate(branches)
        for u, a, E in zip(branch.u, branch.a, branch.E)
    ]
    if rows:
        con.executemany("INSERT INTO boundary_points VALUES (?, ?, ?, ?, ?, ?)", rows)
    return run_id


def record_chart(con, grid: ChartGrid, distribution: str, parameters: dict) -> int:
    run_id = _new_run(con, "chart", distribution, parameters)
    rows = [[run_id, a, E, status.value, count] for a, E, status, count in grid.rows()]
    con.executemany("INSERT INTO chart_cells VALUES (?, ?, ?, ?, ?)", rows)
    return run_id


def record_verdict(con, status: str, payload: str, distribution: Optional[str], parameters: dict) -> int:
    run_id = _new_run(con, "check", distribution, parameters)
    con.execute("INSERT INTO verdicts VALUES (?, ?, ?)", [run_id, status, payload])
    return run_id


def list_runs(con, command: Optional[str] = None) -> list[dict]:
    where, params = "", []
    if command:
        where, params = "WHERE r.command = ?", [command]
    rows = con.execute(
        f"""SELECT r.run_id, r.command, CAST(r.created_at AS VARCHAR), r.distribution, r.parameters,
                   (SELECT COUNT(*) FROM boundary_points b WHERE b.run_id = r.run_id)
                 + (SELECT COUNT(*) FROM chart_cells c WHERE c.run_id = r.run_id)
                 + (SELECT COUNT(*) FROM verdicts v WHERE v.run_id = r.run_id)
            FROM runs r {where}
            ORDER BY r.run_id""",
        params,
    ).fetchall()
    return [
        {
            "run_id": r[0], "command": r[1], "created_at": r[2],
            "distribution": r[3], "parameters": r[4], "rows": r[5],
        }
        for r in rows
    ]


def load_chart(con, run_id: int) -> Optional[ChartGrid]:
    rows = con.execute(
        "SELECT a, e, status, unstable_count FROM chart_cells WHERE run_id = ? ORDER BY a, e",
        [run_id],
    ).fetchall()
    if not rows:
        return None
    a_axis = np.unique([r[0] for r in rows])
    e_axis = np.unique([r[1] for r in rows])
    statuses = np.empty((a_axis.size, e_axis.size), dtype=object)
    counts = np.empty((a_axis.size, e_axis.size), dtype=int)
    for a, E, status, count in rows:
        i, j = np.searchsorted(a_axis, a), np.searchsorted(e_axis, E)
        statuses[i, j] = StabilityStatus(status)
        counts[i, j] = count
    return ChartGrid(a_axis, e_axis, statuses, counts)


def load_boundary(con, run_id: int) -> list[BoundaryBranch]:
    rows = con.execute(
        """SELECT branch_id, kind, u, a, e FROM boundary_points
           WHERE run_id = ? ORDER BY branch_id, rowid""",
        [run_id],
    ).fetchall()
    branches = []
    for branch_id in sorted({r[0] for r in rows}):
        part = [r for r in rows if r[0] == branch_id]
        branches.append(
            BoundaryBranch(
                np.array([r[2] for r in part]),
                np.array([r[3] for r in part]),
                np.array([r[4] for r in part]),
                BranchKind(part[0][1]),
            )
        )
    return branches
