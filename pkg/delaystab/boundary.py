"""Stability boundaries in the (a, E) plane and rasterised stability charts.

On a Hopf boundary lam = i u / E is a root, which for a mean-1 shape eta
gives the parametrisation

    a(u) = -C(u),   E(u) = u / S(u),   u > 0,

valid wherever S(u) > 0.  The zero-root line a = -1 is added separately.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional

import numpy as np
from scipy import optimize

from delaystab.charfun import count_unstable_roots
from delaystab.config import Settings, get_settings
from delaystab.criteria import StabilityStatus, universal_bound
from delaystab.distributions import UNIT_MEAN_TOL, DelayDistribution, moment_arrays, scale_to_mean
from delaystab.errors import DelayStabError, DomainError

log = logging.getLogger(__name__)


class BranchKind(str, Enum):
    HOPF_CURVE = "HopfCurve"
    ZERO_ROOT_LINE = "ZeroRootLine"


@dataclass(frozen=True)
class BoundaryBranch:
    u: np.ndarray
    a: np.ndarray
    E: np.ndarray
    kind: BranchKind = BranchKind.HOPF_CURVE

    def __len__(self) -> int:
        return len(self.u)

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.a.tolist(), self.E.tolist(), self.u.tolist()))


@dataclass(frozen=True)
class ChartGrid:
    a_axis: np.ndarray
    e_axis: np.ndarray
    statuses: np.ndarray   # shape (len(a_axis), len(e_axis)) of StabilityStatus
    counts: np.ndarray     # unstable root counts, -1 for failed cells

    def rows(self) -> Iterator[tuple[float, float, StabilityStatus, int]]:
        for i, a in enumerate(self.a_axis):
            for j, E in enumerate(self.e_axis):
                yield float(a), float(E), self.statuses[i, j], int(self.counts[i, j])

    def column(self, a_index: int) -> list[StabilityStatus]:
        return list(self.statuses[a_index])


def _refined_grid(dist: DelayDistribution, cfg: Settings, u_max: float, n_points: int) -> np.ndarray:
    u = np.geomspace(cfg.u_min, u_max, n_points)
    for _ in range(cfg.boundary_refine_passes):
        c_values, _ = moment_arrays(dist, u)
        steep = np.abs(np.diff(c_values)) > cfg.boundary_max_da
        if not steep.any():
            break
        mids = np.sqrt(u[:-1] * u[1:])[steep]
        u = np.sort(np.concatenate([u, mids]))
    return u


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive (start, end) index pairs of the True runs in mask."""
    padded = np.concatenate([[False], mask, [False]]).astype(int)
    edges = np.flatnonzero(np.diff(padded))
    return [(int(s), int(e) - 1) for s, e in zip(edges[::2], edges[1::2])]


def _cap_point(dist: DelayDistribution, lo: float, hi: float, e_max: float) -> tuple[float, float, float]:
    """Point between lo and hi where E(u) = u / S(u) reaches e_max."""

    def excess(u):
        return u - e_max * float(moment_arrays(dist, [u])[1][0])

    u = optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=1e-14)
    c_value = float(moment_arrays(dist, [u])[0][0])
    return u, -c_value, e_max


def trace_boundary(
    dist: DelayDistribution,
    u_max: Optional[float] = None,
    n_points: Optional[int] = None,
    *,
    settings: Optional[Settings] = None,
) -> list[BoundaryBranch]:
    """Hopf branches of a mean-1 shape, ordered by u, followed by the zero-root line."""
    cfg = settings or get_settings()
    u_max = cfg.u_max if u_max is None else u_max
    n_points = cfg.boundary_points if n_points is None else n_points
    if u_max <= cfg.u_min:
        raise DomainError(f"u_max must exceed {cfg.u_min:g}, got {u_max}")
    if n_points < 2:
        raise DomainError(f"need at least 2 grid points, got {n_points}")
    if dist.mean() > 0 and abs(dist.mean() - 1.0) > UNIT_MEAN_TOL:
        raise DomainError(f"boundary tracing needs a mean-1 shape, got mean {dist.mean():.6g}")

    u = _refined_grid(dist, cfg, u_max, n_points)
    c_values, s_values = moment_arrays(dist, u)
    positive = s_values > cfg.boundary_s_tol
    if not positive.any():
        log.warning("S(u) vanishes on the whole grid for %r; no Hopf boundary traced", dist)
        return []

    e_values = np.full_like(u, np.inf)
    e_values[positive] = u[positive] / s_values[positive]
    inside = positive & (e_values <= cfg.boundary_e_max)

    branches = []
    for start, end in _runs(inside):
        points = list(zip(u[start:end + 1], -c_values[start:end + 1], e_values[start:end + 1]))
        if start > 0:
            points.insert(0, _cap_point(dist, u[start - 1], u[start], cfg.boundary_e_max))
        if end < len(u) - 1:
            points.append(_cap_point(dist, u[end], u[end + 1], cfg.boundary_e_max))
        if len(points) < 2:
            continue
        bu, ba, be = (np.array(col, dtype=float) for col in zip(*points))
        branches.append(BoundaryBranch(bu, ba, be))

    log.debug("traced %d Hopf branches over %d grid points", len(branches), len(u))
    branches.append(
        BoundaryBranch(
            np.zeros(2), np.array([-1.0, -1.0]), np.array([0.0, cfg.boundary_e_max]),
            BranchKind.ZERO_ROOT_LINE,
        )
    )
    return branches


def boundary_means_at(branches: list[BoundaryBranch], a: float) -> list[float]:
    """Means E at which the Hopf branches cross the vertical line through a.

    Crossings are interpolated linearly in log E between neighbouring points.
    """
    means = []
    for branch in branches:
        if branch.kind is not BranchKind.HOPF_CURVE:
            continue
        gap = branch.a - a
        for i in np.flatnonzero(gap[:-1] * gap[1:] <= 0):
            if gap[i] == gap[i + 1]:
                continue
            frac = gap[i] / (gap[i] - gap[i + 1])
            log_e = np.log(branch.E[i]) + frac * (np.log(branch.E[i + 1]) - np.log(branch.E[i]))
            means.append(float(np.exp(log_e)))
    return sorted(set(means))


def _check_axis(axis, name: str) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size == 0:
        raise DomainError(f"{name} grid must be a non-empty 1-d sequence")
    if axis.size > 1 and np.any(np.diff(axis) <= 0):
        raise DomainError(f"{name} grid must be strictly increasing")
    return axis


def chart(
    dist: DelayDistribution,
    a_grid,
    e_grid,
    *,
    settings: Optional[Settings] = None,
) -> ChartGrid:
    """Exact root-count verdict for every (a, E) cell of the grid."""
    cfg = settings or get_settings()
    a_axis = _check_axis(a_grid, "a")
    e_axis = _check_axis(e_grid, "E")
    if e_axis[0] < 0:
        raise DomainError("E grid must be >= 0")

    def cell(args):
        a, E = args
        try:
            report = count_unstable_roots(a, scale_to_mean(dist, E), locate=False, settings=cfg)
        except DelayStabError as exc:
            log.warning("chart cell a=%.6g E=%.6g failed: %s", a, E, exc)
            return StabilityStatus.ERROR, -1
        status = StabilityStatus.UNSTABLE if report.unstable_count > 0 else StabilityStatus.STABLE
        return status, report.unstable_count

    cells = [(float(a), float(E)) for a in a_axis for E in e_axis]
    with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
        results = list(executor.map(cell, cells))

    shape = (a_axis.size, e_axis.size)
    statuses = np.empty(shape, dtype=object)
    counts = np.empty(shape, dtype=int)
    for k, (status, count) in enumerate(results):
        statuses.flat[k] = status
        counts.flat[k] = count
    return ChartGrid(a_axis, e_axis, statuses, counts)


def status_transitions(grid: ChartGrid, a_index: int) -> list[tuple[float, float, StabilityStatus, StabilityStatus]]:
    """(E_before, E_after, old, new) for every status change along one a-column."""
    column = grid.column(a_index)
    return [
        (float(grid.e_axis[j]), float(grid.e_axis[j + 1]), column[j], column[j + 1])
        for j in range(len(column) - 1)
        if column[j] != column[j + 1]
    ]


def asymptote_two_delay(p: float) -> float:
    """Vertical asymptote a = 2p - 1 of the boundary for (1 - p) delta(0) + p delta(tau - r)."""
    if not 0 < p <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    return 2.0 * p - 1.0


def two_delay_boundary(p: float, a: float) -> float:
    """Critical mean of (1 - p) delta(0) + p delta(tau - r) at coefficient a.

    The zero-delay atom folds into the instantaneous term, leaving a single
    delay with coefficients (a + 1 - p, p).
    """
    if not 0 < p <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    shifted = a + 1.0 - p
    if not (a > -1.0 and a < asymptote_two_delay(p)):
        raise DomainError(f"a={a} lies outside (-1, {asymptote_two_delay(p):g}); no finite boundary")
    return p * universal_bound(shifted, p)
