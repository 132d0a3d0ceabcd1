"""Delay distributions and their transforms.

Every other module sees a distribution only through three quantities:

- its mean E,
- its Laplace transform  L(lam) = int exp(-lam tau) d eta(tau)  on Re(lam) > -nu,
- its cosine/sine moments  C(w) = Re L(i w),  S(w) = -Im L(i w).

Supported kinds: DiracMass, DiscreteMixture, Exponential, GammaKernel, Uniform.
All of them have closed-form transforms; the continuous kinds can also be
integrated by adaptive quadrature (QUADPACK) as a cross-check.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import ClassVar, Iterable, Optional

import numpy as np
from scipy import integrate, special, stats

from delaystab.config import Settings, get_settings
from delaystab.errors import DistributionError, DomainError

log = logging.getLogger(__name__)

MERGE_TOL = 1e-12        # atoms closer than this are merged
NORMALISED_TOL = 1e-14   # weight sums this close to 1 are left untouched
UNIT_MEAN_TOL = 1e-9     # "mean 1" tolerance for normalised families
SERIES_CUTOFF = 1e-3     # |z| below which (1 - e^-z)/z uses its Taylor series


@dataclass(frozen=True)
class TrigMoments:
    omega: float
    c_value: float
    s_value: float

    @property
    def modulus(self) -> float:
        return math.hypot(self.c_value, self.s_value)


class DelayDistribution(ABC):
    """A cumulative delay distribution eta with finite exponential moment."""

    kind: ClassVar[str]

    @abstractmethod
    def mean(self) -> float: ...

    @abstractmethod
    def with_mean(self, E: float) -> "DelayDistribution":
        """Same shape family, mean exactly E (E > 0)."""

    @abstractmethod
    def rescaled(self, factor: float) -> "DelayDistribution":
        """Delays multiplied by factor > 0."""

    @abstractmethod
    def transform(self, lam: np.ndarray) -> np.ndarray:
        """Vectorised Laplace transform, no domain check."""

    @abstractmethod
    def transform_derivative(self, lam: np.ndarray) -> np.ndarray:
        """Vectorised d/dlam of the transform: -int tau exp(-lam tau) d eta."""

    @property
    def nu(self) -> float:
        """Exponential-moment rate; the transform converges for Re(lam) > -nu."""
        return math.inf

    @property
    def phase_scale(self) -> float:
        """Rate at which the transform rotates along the imaginary axis."""
        return self.mean()

    @property
    def is_discrete(self) -> bool:
        return False


# --- discrete kinds --------------------------------------------------------


@dataclass(frozen=True)
class DiracMass(DelayDistribution):
    location: float
    kind: ClassVar[str] = "dirac"

    def __post_init__(self):
        if not math.isfinite(self.location) or self.location < 0:
            raise DistributionError(f"Dirac location must be finite and >= 0, got {self.location}")
        object.__setattr__(self, "location", float(self.location))

    def mean(self) -> float:
        return self.location

    def with_mean(self, E: float) -> "DiracMass":
        return DiracMass(E)

    def rescaled(self, factor: float) -> "DiracMass":
        return DiracMass(self.location * factor)

    def transform(self, lam):
        return np.exp(-np.asarray(lam, dtype=complex) * self.location)

    def transform_derivative(self, lam):
        return -self.location * self.transform(lam)

    @property
    def is_discrete(self) -> bool:
        return True

    @property
    def delays(self) -> tuple[float, ...]:
        return (self.location,)

    @property
    def weights(self) -> tuple[float, ...]:
        return (1.0,)


@dataclass(frozen=True)
class DiscreteMixture(DelayDistribution):
    """Finite mixture of point masses; sorted, merged and renormalised on construction."""

    delays: tuple[float, ...]
    weights: tuple[float, ...]
    kind: ClassVar[str] = "discrete"

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if d.size == 0 or d.size != w.size:
            raise DistributionError("a mixture needs the same positive number of delays and weights")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(w))):
            raise DistributionError("mixture delays and weights must be finite")
        if np.any(d < 0):
            raise DistributionError("mixture delays must be >= 0")
        if np.any(w <= 0):
            raise DistributionError("mixture weights must be strictly positive")

        order = np.argsort(d, kind="stable")
        d, w = d[order], w[order]
        merged_d, merged_w = [d[0]], [w[0]]
        for delay, weight in zip(d[1:], w[1:]):
            if delay - merged_d[-1] < MERGE_TOL:
                total = merged_w[-1] + weight
                merged_d[-1] = (merged_d[-1] * merged_w[-1] + delay * weight) / total
                merged_w[-1] = total
            else:
                merged_d.append(delay)
                merged_w.append(weight)
        total = math.fsum(merged_w)
        if abs(total - 1.0) <= NORMALISED_TOL:
            total = 1.0
        object.__setattr__(self, "delays", tuple(float(x) for x in merged_d))
        object.__setattr__(self, "weights", tuple(float(x / total) for x in merged_w))

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[float, float]]) -> "DiscreteMixture":
        pairs = list(atoms)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.delays, self.weights))

    @property
    def is_discrete(self) -> bool:
        return True

    def mean(self) -> float:
        return math.fsum(d * w for d, w in zip(self.delays, self.weights))

    def with_mean(self, E: float) -> "DiscreteMixture":
        current = self.mean()
        if current <= 0:
            raise DistributionError("cannot rescale a mixture concentrated at zero")
        return self.rescaled(E / current)

    def rescaled(self, factor: float) -> "DiscreteMixture":
        return DiscreteMixture(tuple(d * factor for d in self.delays), self.weights)

    def transform(self, lam):
        lam = np.asarray(lam, dtype=complex)
        d = np.asarray(self.delays)
        return np.exp(-np.multiply.outer(lam, d)) @ np.asarray(self.weights)

    def transform_derivative(self, lam):
        lam = np.asarray(lam, dtype=complex)
        d = np.asarray(self.delays)
        return -(np.exp(-np.multiply.outer(lam, d)) @ (d * np.asarray(self.weights)))

    @property
    def phase_scale(self) -> float:
        return self.delays[-1]

    @property
    def smallest_positive_delay(self) -> Optional[float]:
        positive = [d for d in self.delays if d > 0]
        return positive[0] if positive else None


# --- continuous kinds ------------------------------------------------------


def _gamma_transform(lam, order: int, mean: float):
    return (1.0 + np.asarray(lam, dtype=complex) * (mean / order)) ** (-order)


def _gamma_transform_derivative(lam, order: int, mean: float):
    return -mean * (1.0 + np.asarray(lam, dtype=complex) * (mean / order)) ** (-order - 1)


@dataclass(frozen=True)
class GammaKernel(DelayDistribution):
    """Gamma density of integer order with the given mean (order 2 is the strong kernel)."""

    order: int
    mean_delay: float
    kind: ClassVar[str] = "gamma"

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise DistributionError(f"gamma order must be an integer >= 1, got {self.order}")
        if not math.isfinite(self.mean_delay) or self.mean_delay <= 0:
            raise DistributionError(f"gamma mean must be > 0, got {self.mean_delay}")
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "mean_delay", float(self.mean_delay))

    @property
    def rate(self) -> float:
        return self.order / self.mean_delay

    def mean(self) -> float:
        return self.mean_delay

    def with_mean(self, E: float) -> "GammaKernel":
        return GammaKernel(self.order, E)

    def rescaled(self, factor: float) -> "GammaKernel":
        return GammaKernel(self.order, self.mean_delay * factor)

    def transform(self, lam):
        return _gamma_transform(lam, self.order, self.mean_delay)

    def transform_derivative(self, lam):
        return _gamma_transform_derivative(lam, self.order, self.mean_delay)

    @property
    def nu(self) -> float:
        return self.rate

    @property
    def phase_scale(self) -> float:
        # a rational transform turns by at most order * pi / 2 on a half-line
        return min(self.mean_delay, float(self.order))

    def density(self, tau):
        return stats.gamma.pdf(tau, a=self.order, scale=1.0 / self.rate)

    def tail_cutoff(self, mass: float) -> float:
        return float(stats.gamma.isf(mass, a=self.order, scale=1.0 / self.rate))

    @property
    def lower(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Exponential(GammaKernel):
    """Exponential density with the given mean; the order-1 gamma kernel."""

    kind: ClassVar[str] = "exponential"

    def __init__(self, mean_delay: float):
        super().__init__(1, mean_delay)

    def with_mean(self, E: float) -> "Exponential":
        return Exponential(E)

    def rescaled(self, factor: float) -> "Exponential":
        return Exponential(self.mean_delay * factor)


def _phi(z):
    """(1 - exp(-z)) / z with phi(0) = 1."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SERIES_CUTOFF
    safe = np.where(small, 1.0, z)
    series = 1 - z / 2 + z**2 / 6 - z**3 / 24 + z**4 / 120
    return np.where(small, series, (1 - np.exp(-safe)) / safe)


def _phi_prime(z):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SERIES_CUTOFF
    safe = np.where(small, 1.0, z)
    series = -0.5 + z / 3 - z**2 / 8 + z**3 / 30
    return np.where(small, series, (np.exp(-safe) * (safe + 1) - 1) / safe**2)


@dataclass(frozen=True)
class Uniform(DelayDistribution):
    lower: float
    upper: float
    kind: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise DistributionError("uniform bounds must be finite")
        if self.lower < 0 or self.upper <= self.lower:
            raise DistributionError(f"uniform needs 0 <= lower < upper, got [{self.lower}, {self.upper}]")
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def mean(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def with_mean(self, E: float) -> "Uniform":
        return self.rescaled(E / self.mean())

    def rescaled(self, factor: float) -> "Uniform":
        return Uniform(self.lower * factor, self.upper * factor)

    def transform(self, lam):
        lam = np.asarray(lam, dtype=complex)
        return np.exp(-lam * self.lower) * _phi(lam * self.width)

    def transform_derivative(self, lam):
        lam = np.asarray(lam, dtype=complex)
        shift = np.exp(-lam * self.lower)
        return shift * (self.width * _phi_prime(lam * self.width) - self.lower * _phi(lam * self.width))

    @property
    def phase_scale(self) -> float:
        return self.upper

    def density(self, tau):
        tau = np.asarray(tau, dtype=float)
        return np.where((tau >= self.lower) & (tau <= self.upper), 1.0 / self.width, 0.0)

    def tail_cutoff(self, mass: float) -> float:
        return self.upper


# --- operations ------------------------------------------------------------


def mean(dist: DelayDistribution) -> float:
    return dist.mean()


def scale_to_mean(dist: DelayDistribution, E: float) -> DelayDistribution:
    """Member eta_E(tau) = eta(tau / E) of the scaled family; E = 0 is the step at 0."""
    if not math.isfinite(E) or E < 0:
        raise DomainError(f"target mean must be finite and >= 0, got {E}")
    if E == 0:
        return DiracMass(0.0)
    current = dist.mean()
    if current <= 0:
        raise DistributionError("cannot rescale a distribution concentrated at zero")
    if abs(current - 1.0) > UNIT_MEAN_TOL:
        log.debug("rescaling a distribution of mean %.6g proportionally to mean %.6g", current, E)
    return dist.with_mean(E)


def laplace(dist: DelayDistribution, lam: complex) -> complex:
    lam = complex(lam)
    if lam.real <= -dist.nu:
        raise DomainError(f"Laplace transform diverges at Re(lambda) = {lam.real:.6g} <= {-dist.nu:.6g}")
    return complex(dist.transform(lam))


def laplace_derivative(dist: DelayDistribution, lam: complex) -> complex:
    lam = complex(lam)
    if lam.real <= -dist.nu:
        raise DomainError(f"Laplace transform diverges at Re(lambda) = {lam.real:.6g} <= {-dist.nu:.6g}")
    return complex(dist.transform_derivative(lam))


def moment_arrays(dist: DelayDistribution, omegas) -> tuple[np.ndarray, np.ndarray]:
    """C(omega), S(omega) evaluated on an array of frequencies."""
    values = dist.transform(1j * np.asarray(omegas, dtype=float))
    return values.real, -values.imag


def _quad_moments(dist: DelayDistribution, omega: float, cfg: Settings) -> tuple[float, float]:
    lo, hi = dist.lower, dist.tail_cutoff(cfg.tail_mass)
    opts = dict(epsabs=cfg.quad_abs_tol, limit=400)
    c, _ = integrate.quad(dist.density, lo, hi, weight="cos", wvar=omega, **opts)
    s, _ = integrate.quad(dist.density, lo, hi, weight="sin", wvar=omega, **opts)
    return c, s


def trig_moments(
    dist: DelayDistribution,
    omega: float,
    method: str = "closed",
    settings: Optional[Settings] = None,
) -> TrigMoments:
    if omega < 0:
        raise DomainError(f"omega must be >= 0, got {omega}")
    if omega == 0:
        return TrigMoments(0.0, 1.0, 0.0)
    if method == "quad" and not dist.is_discrete:
        c, s = _quad_moments(dist, omega, settings or get_settings())
    elif method in ("closed", "quad"):
        value = complex(dist.transform(1j * omega))
        c, s = value.real, -value.imag
    else:
        raise ValueError(f"unknown moment method {method!r}")
    return TrigMoments(float(omega), float(c), float(s))


def discretize(dist: DelayDistribution, n: int) -> DiscreteMixture:
    """n equal-probability atoms at the conditional means of the quantile cells."""
    if int(n) != n or n < 1:
        raise DomainError(f"number of atoms must be an integer >= 1, got {n}")
    n = int(n)
    if isinstance(dist, DiscreteMixture):
        return dist
    if isinstance(dist, DiracMass):
        return DiscreteMixture((dist.location,), (1.0,))

    if isinstance(dist, GammaKernel):
        theta = 1.0 / dist.rate
        edges = special.gammaincinv(dist.order, np.linspace(0.0, 1.0, n + 1)) / dist.rate
        edges[-1] = np.inf
        partial = special.gammainc(dist.order + 1, edges / theta)
        atoms = n * dist.order * theta * np.diff(partial)
    elif isinstance(dist, Uniform):
        atoms = dist.lower + (np.arange(n) + 0.5) * (dist.width / n)
    else:
        raise DistributionError(f"cannot discretize distribution kind {dist.kind!r}")

    # restore the mean exactly after rounding in the incomplete gamma differences
    atoms = atoms * (dist.mean() / atoms.mean())
    return DiscreteMixture(tuple(atoms), tuple(np.full(n, 1.0 / n)))
