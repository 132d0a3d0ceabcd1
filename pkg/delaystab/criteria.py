"""Closed-form and semi-analytic stability verdicts.

- hayes_verdict:    exact answer for a single discrete delay
- universal_bound:  mean delay below which every distribution is stable
- classify_region:  verdict from (a, b, E) alone
- sufficient_test:  frequency-domain test using C(w), S(w) on [0, w_c]
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import optimize, special

from delaystab.charfun import RootReport, omega_cap
from delaystab.config import Settings, get_settings
from delaystab.distributions import DelayDistribution, moment_arrays
from delaystab.errors import DomainError

log = logging.getLogger(__name__)

EQUALITY_RTOL = 1e-12


class StabilityStatus(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"
    DISTRIBUTION_DEPENDENT = "DistributionDependent"
    ERROR = "Error"  # chart cells whose computation failed

    @property
    def exit_code(self) -> int:
        return {StabilityStatus.STABLE: 0, StabilityStatus.UNSTABLE: 1}.get(self, 2)


@dataclass(frozen=True)
class StabilityVerdict:
    status: StabilityStatus
    leading_root: Optional[complex] = None
    omega_s: Optional[float] = None
    bound_used: Optional[float] = None
    note: str = ""

    @property
    def has_witness(self) -> bool:
        return self.leading_root is not None or self.omega_s is not None or bool(self.note)


def _dirac_root(a: float, b: float, E: float) -> Optional[complex]:
    """Rightmost root of lam + a + b exp(-lam E) via the principal Lambert W branch."""
    if E == 0:
        return complex(-(a + b))
    try:
        arg = -b * E * math.exp(a * E)
    except OverflowError:
        return None
    root = complex(special.lambertw(arg, 0)) / E - a
    return root.conjugate() if root.imag < 0 else root


def universal_bound(a: float, b: float) -> float:
    if b <= abs(a):
        raise DomainError(f"the distribution-independent bound needs b > |a|, got a={a}, b={b}")
    return math.acos(-a / b) / math.sqrt(b * b - a * a)


def hayes_verdict(a: float, b: float, E: float) -> StabilityVerdict:
    """Exact verdict for the single discrete delay eta = delta(tau - E)."""
    if E < 0:
        raise DomainError(f"mean delay must be >= 0, got {E}")

    if b == 0:
        if a > 0:
            return StabilityVerdict(StabilityStatus.STABLE, leading_root=complex(-a))
        status = StabilityStatus.MARGINAL if a == 0 else StabilityStatus.UNSTABLE
        return StabilityVerdict(status, leading_root=complex(-a))

    if a == -b:
        # zero root on the line a = -b; double at bE = 1
        if b * E <= 1:
            return StabilityVerdict(StabilityStatus.MARGINAL, leading_root=0j, note="zero root")
        return StabilityVerdict(StabilityStatus.UNSTABLE, leading_root=_dirac_root(a, b, E))

    if a >= abs(b):
        return StabilityVerdict(StabilityStatus.STABLE)

    if b > abs(a):
        bound = universal_bound(a, b)
        if math.isclose(E, bound, rel_tol=EQUALITY_RTOL):
            omega = math.sqrt(b * b - a * a)
            return StabilityVerdict(
                StabilityStatus.MARGINAL,
                leading_root=complex(0.0, omega),
                omega_s=omega,
                bound_used=bound,
            )
        if E < bound:
            return StabilityVerdict(StabilityStatus.STABLE, bound_used=bound)
        return StabilityVerdict(StabilityStatus.UNSTABLE, leading_root=_dirac_root(a, b, E), bound_used=bound)

    return StabilityVerdict(StabilityStatus.UNSTABLE, leading_root=_dirac_root(a, b, E))


def classify_region(a: float, b: float, E: float) -> StabilityVerdict:
    """Verdict valid for every distribution with mean E."""
    if E < 0:
        raise DomainError(f"mean delay must be >= 0, got {E}")

    if b == 0:
        return hayes_verdict(a, 0.0, E)
    if a <= -b:
        if a == -b:
            return StabilityVerdict(StabilityStatus.UNSTABLE, leading_root=0j, note="zero root on a = -b")
        return StabilityVerdict(StabilityStatus.UNSTABLE, note="positive real root for every distribution")
    if a >= abs(b):
        return StabilityVerdict(StabilityStatus.STABLE)

    bound = universal_bound(a, b)
    if E < bound:
        return StabilityVerdict(StabilityStatus.STABLE, bound_used=bound)
    return StabilityVerdict(StabilityStatus.DISTRIBUTION_DEPENDENT, bound_used=bound)


def normalize(a: float, b: float, dist: DelayDistribution) -> tuple[float, DelayDistribution]:
    """Change of timescale t -> b t: returns (a / b, eta(b tau))."""
    if b <= 0:
        raise DomainError(f"normalisation needs b > 0, got {b}")
    if b == 1:
        return a, dist
    return a / b, dist.rescaled(b)


def cosine_crossings(a: float, dist: DelayDistribution, settings: Optional[Settings] = None) -> list[float]:
    """Zeros of C(w) + a on [0, w_c]."""
    cfg = settings or get_settings()
    w_c = omega_cap(a)
    grid = np.linspace(0.0, w_c, cfg.crossing_grid)
    c_values, _ = moment_arrays(dist, grid)
    g = c_values + a

    def fun(w):
        return float(moment_arrays(dist, [w])[0][0]) + a

    zeros = [float(w) for w in grid[g == 0]]
    for i in np.flatnonzero(g[:-1] * g[1:] < 0):
        zeros.append(optimize.brentq(fun, grid[i], grid[i + 1], xtol=cfg.crossing_xtol))
    return sorted(zeros)


def hopf_crossings(
    a: float,
    dist: DelayDistribution,
    *,
    settings: Optional[Settings] = None,
) -> list[float]:
    """Frequencies in [0, w_c] with C(w) + a = 0 and S(w) >= w."""
    if abs(a) >= 1:
        raise DomainError(f"crossing search needs |a| < 1, got {a}")
    cfg = settings or get_settings()
    zeros = cosine_crossings(a, dist, cfg)
    if not zeros:
        return []
    _, s_values = moment_arrays(dist, zeros)
    return [w for w, s in zip(zeros, s_values) if s >= w]


def sufficient_test(
    a: float,
    dist: DelayDistribution,
    *,
    settings: Optional[Settings] = None,
) -> Optional[StabilityVerdict]:
    """Stable if C + a has no zero on [0, w_c], or S(w) < w at every zero; None otherwise."""
    if abs(a) >= 1:
        raise DomainError(f"sufficient test needs |a| < 1, got {a}")
    cfg = settings or get_settings()
    zeros = cosine_crossings(a, dist, cfg)
    if not zeros:
        return StabilityVerdict(StabilityStatus.STABLE, note="C(omega) > -a on [0, omega_c]")

    _, s_values = moment_arrays(dist, zeros)
    if np.all(s_values < np.asarray(zeros)):
        return StabilityVerdict(StabilityStatus.STABLE, note="S(omega) < omega at every zero of C + a")

    log.debug("sufficient test inconclusive at a=%.6g: crossings %s", a, zeros)
    return None


def root_verdict(report: RootReport) -> StabilityVerdict:
    if report.unstable_count > 0:
        return StabilityVerdict(StabilityStatus.UNSTABLE, leading_root=report.leading_root,
                                note=f"{report.unstable_count} roots with Re > 0")
    if report.marginal:
        omega = abs(report.leading_root.imag) if report.leading_root is not None else None
        return StabilityVerdict(StabilityStatus.MARGINAL, leading_root=report.leading_root, omega_s=omega)
    return StabilityVerdict(StabilityStatus.STABLE, leading_root=report.leading_root)
