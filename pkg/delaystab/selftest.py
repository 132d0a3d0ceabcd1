"""Fast acceptance checks run by `delaystab selftest`.

Each case returns a one-line detail string or raises AssertionError.  The
full-size suites live under tests/ and are marked slow.
"""

import logging
import math
import time
from typing import Callable, Optional

import numpy as np

from delaystab.boundary import BranchKind, boundary_means_at, chart, status_transitions, trace_boundary
from delaystab.charfun import char_value, count_unstable_roots, leading_root
from delaystab.config import Settings, get_settings
from delaystab.criteria import StabilityStatus, universal_bound
from delaystab.distributions import (
    DelayDistribution,
    DiracMass,
    DiscreteMixture,
    Exponential,
    GammaKernel,
    Uniform,
    scale_to_mean,
)
from delaystab.errors import DelayStabError
from delaystab.extremal import chord_constant, level_curve_margin, reduce_to_extremal
from delaystab.models import SelftestCase, SelftestReport
from delaystab.simulator import decay_rate, simulate

log = logging.getLogger(__name__)

CASES: list[tuple[str, Callable[[Settings], str]]] = []

HAYES_COEFFICIENTS = (-0.9, -0.5, 0.0, 0.5, 0.9)
REFERENCE_MIXTURE = DiscreteMixture((0.2, 2.0), (0.37, 0.63))


def case(name: str):
    def register(fn):
        CASES.append((name, fn))
        return fn
    return register


def random_distribution(rng: np.random.Generator) -> DelayDistribution:
    """Random shape from one of the supported families; the mean is arbitrary."""
    family = rng.integers(4)
    if family == 0:
        n = int(rng.integers(1, 11))
        delays = rng.uniform(0.0, 5.0, size=n)
        weights = rng.dirichlet(np.ones(n))
        return DiscreteMixture(tuple(delays.tolist()), tuple(weights.tolist()))
    if family == 1:
        return Exponential(float(rng.uniform(0.2, 5.0)))
    if family == 2:
        return GammaKernel(int(rng.integers(1, 6)), float(rng.uniform(0.2, 5.0)))
    lower = float(rng.uniform(0.0, 2.0))
    return Uniform(lower, lower + float(rng.uniform(0.1, 3.0)))


def below_bound_cases(seed: int, n: int) -> list[tuple[float, DelayDistribution]]:
    """(a, dist) pairs with the mean at 0.99 of the distribution-independent bound."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n):
        a = float(rng.uniform(-0.95, 0.95))
        dist = random_distribution(rng)
        cases.append((a, scale_to_mean(dist, 0.99 * universal_bound(a, 1.0))))
    return cases


@case("gamma strong kernel boundary")
def _gamma_boundary(cfg: Settings) -> str:
    branches = trace_boundary(GammaKernel(2, 1.0), settings=cfg)
    hopf = [br for br in branches if br.kind is BranchKind.HOPF_CURVE]
    a_max = max(float(br.a.max()) for br in hopf)
    assert abs(a_max - 0.125) < 1e-3, f"max a on the boundary {a_max:.6f}"
    return f"max a = {a_max:.6f}"


@case("exponential boundary E = -1/a")
def _exponential_boundary(cfg: Settings) -> str:
    branches = trace_boundary(Exponential(1.0), settings=cfg)
    br = branches[0]
    window = (br.a >= -0.9) & (br.a <= -0.1)
    err = float(np.max(np.abs(br.E[window] * -br.a[window] - 1.0)))
    assert window.any() and err < 1e-6, f"relative error {err:.3g}"
    return f"max relative error {err:.2e}"


@case("two-atom extremal reduction")
def _reference_extremal(cfg: Settings) -> str:
    pair = reduce_to_extremal(REFERENCE_MIXTURE, 1.0, settings=cfg)
    assert abs(pair.tau2 - 1.76) < 0.01, f"tau2* = {pair.tau2:.4f}"
    assert abs(pair.p1 - 0.24) < 0.01 and abs(pair.p2 - 0.76) < 0.01, f"p* = ({pair.p1:.4f}, {pair.p2:.4f})"
    assert abs(pair.preserved_mean - 1.334) < 1e-10, f"mean {pair.preserved_mean!r}"
    return f"tau2* = {pair.tau2:.4f}, p2* = {pair.p2:.4f}"


@case("single-delay boundary sharpness")
def _hayes_sharpness(cfg: Settings) -> str:
    worst = 0.0
    for a in HAYES_COEFFICIENTS:
        bound = universal_bound(a, 1.0)
        for factor, sign in ((0.999, -1), (1.001, 1)):
            dist = DiracMass(factor * bound)
            root = leading_root(a, dist, settings=cfg)
            residual = abs(char_value(a, dist, root).value)
            assert sign * root.real > 0, f"a={a}, E={factor} x bound: Re = {root.real:.3g}"
            assert residual < 1e-10, f"residual {residual:.3g}"
            worst = max(worst, residual)
    return f"{2 * len(HAYES_COEFFICIENTS)} roots, worst residual {worst:.1e}"


@case("stable below the universal bound")
def _universal_bound(cfg: Settings) -> str:
    cases = below_bound_cases(cfg.seed, 25)
    for a, dist in cases:
        report = count_unstable_roots(a, dist, locate=False, settings=cfg)
        assert report.unstable_count == 0, f"a={a:.4f}, {dist!r}: {report.unstable_count} roots"
    return f"{len(cases)} random distributions, seed {cfg.seed}"


@case("two-delay asymptote a = 2p - 1")
def _two_delay_asymptote(cfg: Settings) -> str:
    p = 0.6
    branches = trace_boundary(DiscreteMixture((0.0, 1.0 / p), (1.0 - p, p)), settings=cfg)
    first = branches[0]
    far = first.E > 1e3
    gap = float(np.max(np.abs(first.a[far] - (2 * p - 1))))
    assert far.any() and gap < 0.01, f"|a - 0.2| = {gap:.4f}"
    return f"|a - 0.2| <= {gap:.2e} beyond E = 1000"


@case("leading root of the unit delay")
def _leading_root_oracle(cfg: Settings) -> str:
    root = leading_root(0.0, DiracMass(1.0), settings=cfg)
    assert abs(root - complex(-0.3181, 1.3372)) < 1e-4, f"root {root:.6f}"
    return f"root {root.real:.6f}{root.imag:+.6f}i"


@case("simulated decay matches the leading root")
def _simulator(cfg: Settings) -> str:
    runs = [
        (0.0, DiracMass(1.0), None),
        (0.0, Uniform(0.5, 1.5), None),
        (0.0, GammaKernel(2, 1.0), 48.0),
    ]
    worst = 0.0
    for a, dist, T in runs:
        expected = leading_root(a, dist, settings=cfg).real
        measured = decay_rate(simulate(a, 1.0, dist, T=T, settings=cfg))
        rel = abs(measured - expected) / abs(expected)
        assert rel < 0.05, f"{dist!r}: decay {measured:.4f} vs Re root {expected:.4f}"
        worst = max(worst, rel)
    return f"{len(runs)} runs, worst relative error {worst:.2%}"


@case("reversion to stability")
def _reversion(cfg: Settings) -> str:
    a = 0.05
    shape = GammaKernel(2, 1.0)
    grid = chart(shape, [a], np.geomspace(1.0, 1000.0, 60), settings=cfg)
    changes = status_transitions(grid, 0)
    statuses = [changes[0][2]] + [new for _, _, _, new in changes] if changes else []
    assert statuses == [StabilityStatus.STABLE, StabilityStatus.UNSTABLE, StabilityStatus.STABLE], \
        f"status sequence {[s.value for s in statuses]}"
    traced = boundary_means_at(trace_boundary(shape, settings=cfg), a)
    assert len(traced) == 2, f"traced crossings {traced}"
    for (lo, hi, _, _), E in zip(changes, traced):
        assert lo <= E <= hi, f"traced E={E:.4f} outside the cell [{lo:.4f}, {hi:.4f}]"
    return "Stable -> Unstable -> Stable at E = " + ", ".join(f"{E:.2f}" for E in traced)


@case("proof inequalities")
def _inequalities(cfg: Settings) -> str:
    rng = np.random.default_rng(cfg.seed)
    z = rng.uniform(0.0, math.pi, size=100_000)
    z = z[z > 0]
    assert np.all(level_curve_margin(z) > 0), "z (2 - 2 cos z - z sin z) <= 0 on (0, pi]"
    c = chord_constant()
    assert abs(c - 0.725) < 1e-3, f"chord constant {c:.6f}"
    theta = np.linspace(0.0, 20.0, 20_001)
    assert np.all(np.cos(theta) >= 1 - c * theta - 1e-12), "cos(theta) < 1 - c theta"
    return f"chord constant {c:.6f}"


def run_selftest(settings: Optional[Settings] = None, names: Optional[list[str]] = None) -> SelftestReport:
    cfg = settings or get_settings()
    results = []
    for name, fn in CASES:
        if names and name not in names:
            continue
        start = time.perf_counter()
        try:
            detail, passed = fn(cfg), True
        except (AssertionError, DelayStabError) as exc:
            detail, passed = str(exc), False
            log.error("selftest %r failed: %s", name, exc)
        seconds = time.perf_counter() - start
        log.info("selftest %r: %s (%.2fs)", name, "ok" if passed else "FAILED", seconds)
        results.append(SelftestCase(name=name, passed=passed, detail=detail, seconds=seconds))
    return SelftestReport(passed=all(r.passed for r in results), cases=results)
