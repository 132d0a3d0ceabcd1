"""Time-domain integration of x' = -a x - b int x(t - tau) d eta(tau).

Finite mixtures are integrated by the method of steps: classical RK4 on a
uniform grid, with delayed values read from the stored trace through cubic
Hermite interpolation.  Gamma kernels use the linear chain trick (an order-k
kernel is k extra linear ODE states); any other kind is discretised first.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import integrate, interpolate, signal, stats

from delaystab.config import Settings, get_settings
from delaystab.distributions import (
    DelayDistribution,
    DiracMass,
    DiscreteMixture,
    GammaKernel,
    discretize,
)
from delaystab.errors import SimulationError

log = logging.getLogger(__name__)

DEFAULT_STEPS_PER_MEAN = 200
DEFAULT_STEPS_PER_ATOM = 8
MAX_STEP_FRACTION = 0.25     # dt may not exceed this share of the smallest delay
DEFAULT_HORIZON = 40.0       # T in units of the mean delay
MIN_HORIZON = 10.0
MIN_EXTREMA = 4
RK4_STAGES = (0.0, 0.5, 1.0)
HISTORY_SLACK = 1e-9         # relative shortfall tolerated at the start of a sampled history


# --- initial functions -----------------------------------------------------


@dataclass(frozen=True)
class ConstantHistory:
    value: float = 1.0

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class SampledHistory:
    """Cubic spline through (t, x) samples with t <= 0.

    Held constant before the first sample; simulate() rejects histories that
    do not reach back to the largest delay of a finite mixture.
    """

    times: tuple[float, ...]
    values: tuple[float, ...]
    _spline: interpolate.CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.values, dtype=float)
        if t.size < 2 or t.size != x.size:
            raise SimulationError("a sampled history needs at least two (t, x) pairs")
        if np.any(t > 0) or np.any(np.diff(t) <= 0):
            raise SimulationError("history times must be increasing and <= 0")
        object.__setattr__(self, "_spline", interpolate.CubicSpline(t, x))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        clipped = np.clip(t, self.times[0], self.times[-1])
        return self._spline(clipped)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.times[0]) & (t <= self.times[-1])
        return np.where(inside, self._spline(t, 1), 0.0)


History = Union[ConstantHistory, SampledHistory]


def load_history(path) -> SampledHistory:
    """Read a "t,x" CSV history file."""
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise SimulationError(f"cannot read history file {path}: {exc}") from exc
    if data.dtype.names is None or not {"t", "x"} <= set(data.dtype.names):
        raise SimulationError(f"history file {path} needs a 't,x' header")
    data = np.atleast_1d(data)
    return SampledHistory(tuple(data["t"].tolist()), tuple(data["x"].tolist()))


# --- traces ----------------------------------------------------------------


@dataclass(frozen=True)
class SimulationTrace:
    times: np.ndarray
    values: np.ndarray
    a: float
    b: float
    dist: DelayDistribution
    history: History
    method: str = "steps"

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True)
class SimulationCase:
    a: float
    b: float
    dist: DelayDistribution
    history: Optional[History] = None
    T: Optional[float] = None
    dt: Optional[float] = None


def _hermite_weights(theta: np.ndarray) -> tuple[np.ndarray, ...]:
    t2, t3 = theta * theta, theta * theta * theta
    return 2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + theta, -2 * t3 + 3 * t2, t3 - t2


def _method_of_steps(
    a: float,
    b: float,
    mix: DiscreteMixture,
    history: History,
    T: float,
    dt: float,
) -> tuple[np.ndarray, np.ndarray]:
    delays = np.asarray(mix.delays)
    weights = np.asarray(mix.weights)

    # zero-delay atoms act instantaneously
    instant = delays == 0
    a_eff = a + b * float(weights[instant].sum())
    delays, weights = delays[~instant], weights[~instant]

    n_steps = int(round(T / dt))
    times = dt * np.arange(n_steps + 1)
    if delays.size == 0:
        lookback = 0
    else:
        lookback = int(math.ceil(delays.max() / dt)) + 2

    # x and one-sided derivatives on the grid, index k <-> t = (k - lookback) dt
    size = lookback + n_steps + 1
    x = np.zeros(size)
    d_left = np.zeros(size)
    d_right = np.zeros(size)
    past = dt * np.arange(-lookback, 1)
    x[: lookback + 1] = history(past)
    d_left[: lookback + 1] = history.derivative(past)
    d_right[:lookback] = d_left[:lookback]

    # per stage: integer offset of the left grid node and Hermite weights
    stages = []
    for c in RK4_STAGES:
        shift = c - delays / dt
        base = np.floor(shift).astype(int)
        theta = shift - base
        stages.append((base, [w * weights for w in _hermite_weights(theta)]))

    def delayed(k: int, stage) -> float:
        if delays.size == 0:
            return 0.0
        base, (h00, h10, h01, h11) = stage
        j = k + base
        return float(h00 @ x[j] + dt * (h10 @ d_right[j]) + h01 @ x[j + 1] + dt * (h11 @ d_left[j + 1]))

    first, middle, last = stages
    for n in range(n_steps):
        k = lookback + n
        xn = x[k]
        k1 = -a_eff * xn - b * delayed(k, first)
        d_right[k] = k1
        if n > 0:
            d_left[k] = k1
        lag_mid = b * delayed(k, middle)
        k2 = -a_eff * (xn + 0.5 * dt * k1) - lag_mid
        k3 = -a_eff * (xn + 0.5 * dt * k2) - lag_mid
        k4 = -a_eff * (xn + dt * k3) - b * delayed(k, last)
        x[k + 1] = xn + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    return times, x[lookback:]


def _linear_chain(
    a: float,
    b: float,
    kernel: GammaKernel,
    history: History,
    T: float,
    dt: float,
    cfg: Settings,
) -> tuple[np.ndarray, np.ndarray]:
    order, rate = kernel.order, kernel.rate

    def chain_start(j: int) -> float:
        if isinstance(history, ConstantHistory):
            return history.value
        value, _ = integrate.quad(
            lambda s: float(history(-s)) * stats.gamma.pdf(s, a=j, scale=1.0 / rate),
            0.0, np.inf, epsabs=cfg.quad_abs_tol,
        )
        return value

    y0 = np.array([float(history(0.0))] + [chain_start(j) for j in range(1, order + 1)])

    def rhs(t, y):
        dy = np.empty_like(y)
        dy[0] = -a * y[0] - b * y[-1]
        dy[1:] = rate * (y[:-1] - y[1:])
        return dy

    n_steps = int(round(T / dt))
    times = dt * np.arange(n_steps + 1)
    sol = integrate.solve_ivp(
        rhs, (0.0, times[-1]), y0, method="DOP853", t_eval=times,
        rtol=1e-10, atol=1e-12,
    )
    if not sol.success:
        raise SimulationError(f"chain integration failed: {sol.message}")
    return times, sol.y[0]


def simulate(
    a: float,
    b: float,
    dist: DelayDistribution,
    history: Optional[History] = None,
    T: Optional[float] = None,
    dt: Optional[float] = None,
    *,
    settings: Optional[Settings] = None,
) -> SimulationTrace:
    """Integrate from the initial function `history` (default x = 1) up to time T."""
    cfg = settings or get_settings()
    history = history or ConstantHistory(1.0)
    mean = dist.mean()

    if T is None:
        T = DEFAULT_HORIZON * mean if mean > 0 else DEFAULT_HORIZON
    if T <= MIN_HORIZON * mean or T <= 0:
        raise SimulationError(f"T={T:g} must exceed {MIN_HORIZON:g} x mean delay ({mean:g})")
    if dt is not None and dt <= 0:
        raise SimulationError(f"dt must be > 0, got {dt}")

    if isinstance(dist, GammaKernel):
        if isinstance(history, SampledHistory):
            log.warning(
                "gamma kernels reach back indefinitely; the history is held at x(%g) before t=%g",
                history.times[0], history.times[0],
            )
        dt = dt if dt is not None else mean / DEFAULT_STEPS_PER_MEAN
        times, values = _linear_chain(a, b, dist, history, T, dt, cfg)
        method = "chain"
    else:
        if isinstance(dist, DiracMass):
            mix = DiscreteMixture((dist.location,), (1.0,))
        elif isinstance(dist, DiscreteMixture):
            mix = dist
        else:
            mix = discretize(dist, cfg.simulation_atoms)
            log.debug("simulating %s through %d atoms", dist.kind, cfg.simulation_atoms)

        reach = mix.delays[-1]
        if isinstance(history, SampledHistory) and history.times[0] > -reach + HISTORY_SLACK * max(1.0, reach):
            raise SimulationError(
                f"history starts at t={history.times[0]:g} but the largest delay needs it back to t={-reach:g}"
            )

        smallest = mix.smallest_positive_delay
        if dt is None:
            candidates = [mean / DEFAULT_STEPS_PER_MEAN if mean > 0 else T / 1000.0]
            if smallest is not None:
                candidates.append(smallest / DEFAULT_STEPS_PER_ATOM)
            dt = min(candidates)
        elif smallest is not None and dt > MAX_STEP_FRACTION * smallest:
            raise SimulationError(
                f"dt={dt:g} exceeds a quarter of the smallest positive delay {smallest:g}"
            )
        times, values = _method_of_steps(a, b, mix, history, T, dt)
        method = "steps"

    if not np.all(np.isfinite(values)):
        raise SimulationError("trace overflowed; shorten T")
    return SimulationTrace(times, values, a, b, dist, history, method)


def simulate_many(
    cases: Sequence[SimulationCase],
    *,
    settings: Optional[Settings] = None,
) -> list[SimulationTrace]:
    """Independent simulations on a worker pool, returned in input order."""
    cfg = settings or get_settings()

    def run(case: SimulationCase) -> SimulationTrace:
        return simulate(case.a, case.b, case.dist, case.history, case.T, case.dt, settings=cfg)

    with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
        return list(executor.map(run, cases))


def decay_rate(trace: SimulationTrace) -> float:
    """Exponential rate of the envelope of |x| over the last third of the trace."""
    window = trace.times >= trace.times[-1] * 2.0 / 3.0
    t = trace.times[window]
    x = trace.values[window]
    magnitude = np.abs(x)

    peaks = signal.argrelextrema(magnitude, np.greater)[0]
    peaks = peaks[magnitude[peaks] > 0]
    if peaks.size >= MIN_EXTREMA:
        slope, _ = np.polyfit(t[peaks], np.log(magnitude[peaks]), 1)
        return float(slope)

    if np.all(x > 0) or np.all(x < 0):
        slope, _ = np.polyfit(t, np.log(magnitude), 1)
        return float(slope)

    raise SimulationError(
        f"only {peaks.size} extrema in the last third of the trace; increase T"
    )
