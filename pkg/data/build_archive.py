#!/usr/bin/env python3
"""Rebuild data/reference.duckdb with the boundaries and charts of the bundled spec files."""

import os
import sys

# Add parent dir for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from delaystab.archive import connect, record_boundary, record_chart
from delaystab.boundary import chart, trace_boundary
from delaystab.commands import unit_shape
from delaystab.specfiles import dump_spec, load_spec

DATA_DIR = os.path.dirname(os.path.abspath(__file__))
SPEC_DIR = os.path.join(DATA_DIR, "specs")
OUTPUT_DB = os.environ.get("REFERENCE_DB", os.path.join(DATA_DIR, "reference.duckdb"))

BOUNDARIES = ["exponential.json", "two_delay_p06.json", "gamma2.toml", "three_delay.json", "dirac1.json"]
CHARTS = {
    "gamma2.toml": (np.linspace(-1.2, 0.2, 57), np.geomspace(0.1, 1000.0, 81)),
    "three_delay.json": (np.linspace(-1.2, 1.0, 45), np.linspace(0.05, 6.0, 120)),
}


def main():
    if os.path.exists(OUTPUT_DB):
        os.remove(OUTPUT_DB)
    con = connect(OUTPUT_DB)

    for name in BOUNDARIES:
        shape = unit_shape(load_spec(os.path.join(SPEC_DIR, name)))
        print(f"Tracing boundary for {name}...")
        branches = trace_boundary(shape)
        run_id = record_boundary(con, branches, dump_spec(shape), {"spec": name})
        print(f"  run {run_id}: {len(branches)} branches, {sum(len(b) for b in branches)} points")

    for name, (a_grid, e_grid) in CHARTS.items():
        shape = unit_shape(load_spec(os.path.join(SPEC_DIR, name)))
        print(f"Charting {name} on {a_grid.size} x {e_grid.size} cells...")
        grid = chart(shape, a_grid, e_grid)
        run_id = record_chart(con, grid, dump_spec(shape), {"spec": name})
        unstable = int((grid.counts > 0).sum())
        print(f"  run {run_id}: {unstable} unstable cells, {int((grid.counts < 0).sum())} failed")

    con.close()
    print(f"\nDone: {OUTPUT_DB}")


if __name__ == "__main__":
    main()
