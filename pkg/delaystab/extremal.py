"""Most unstable two-delay distributions.

For a fixed frequency w and fixed constraints (mean E, cosine moment C(w)),
the sine moment S(w) is maximised by a two-atom distribution with one atom
at zero.  Any finite mixture can be reduced to that pair without lowering
S(w), which is how the distribution-independent bound is established for
every mixture and, through discretisation, every distribution.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy import optimize

from delaystab.config import Settings, get_settings
from delaystab.criteria import universal_bound
from delaystab.distributions import DiracMass, DiscreteMixture, trig_moments
from delaystab.errors import DomainError, ExtremalError

log = logging.getLogger(__name__)

CONSTRAINT_TOL = 1e-12
CROSSING_MATCH_TOL = 1e-8
MEAN_DRIFT_TOL = 1e-12
C_DRIFT_TOL = 1e-10
ROOT_SCAN_POINTS = 4096
WEIGHT_FLOOR = 1e-15


@lru_cache(maxsize=None)
def chord_angle() -> float:
    """Tangency angle theta in (pi/2, pi) with 1 - theta sin(theta) = cos(theta)."""
    return optimize.bisect(
        lambda t: 1.0 - t * math.sin(t) - math.cos(t), math.pi / 2, math.pi, xtol=1e-14
    )


def chord_constant() -> float:
    """Smallest c with cos(theta) >= 1 - c theta for all theta >= 0."""
    return math.sin(chord_angle())


def level_curve_margin(z):
    """z (2 - 2 cos z - z sin z); positive on (0, pi]."""
    z = np.asarray(z, dtype=float)
    direct = 2.0 - 2.0 * np.cos(z) - z * np.sin(z)
    # the direct form cancels to rounding noise near zero
    z2 = z * z
    series = z2 * z2 * (1.0 / 12.0 - z2 / 180.0 + z2 * z2 / 6720.0)
    return z * np.where(np.abs(z) < 0.1, series, direct)


@dataclass(frozen=True)
class ExtremalPair:
    tau2: float
    p1: float
    p2: float
    omega_s: float
    preserved_mean: float
    preserved_c: float
    tau1: float = 0.0
    flagged: bool = False
    steps: tuple[DiscreteMixture, ...] = field(default=(), repr=False)

    @property
    def s_star(self) -> float:
        return self.p2 * math.sin(self.omega_s * self.tau2)

    def as_mixture(self) -> DiscreteMixture:
        atoms = [(self.tau1, self.p1), (self.tau2, self.p2)]
        return DiscreteMixture.from_atoms((d, w) for d, w in atoms if w > WEIGHT_FLOOR)


def _single_dirac(omega_s: float, E: float, flagged: bool = False) -> ExtremalPair:
    return ExtremalPair(
        tau2=E, p1=0.0, p2=1.0, omega_s=omega_s,
        preserved_mean=E, preserved_c=math.cos(omega_s * E), flagged=flagged,
    )


def _smallest_chord_root(d: float) -> float:
    """Smallest theta in (0, pi] with 1 - d theta = cos(theta)."""

    def g(t):
        return 1.0 - d * t - np.cos(t)

    grid = np.linspace(0.0, math.pi, ROOT_SCAN_POINTS + 1)[1:]
    values = g(grid)
    hits = np.flatnonzero(values >= 0)
    if hits.size == 0:
        raise ExtremalError(f"no extremal delay below pi/omega for chord slope d={d:.6g}")
    i = hits[0]
    hi = grid[i]
    lo = grid[i - 1] if i > 0 else d / 4.0
    if values[i] == 0:
        return float(hi)
    if g(lo) >= 0:
        raise ExtremalError(f"cannot bracket the extremal delay for chord slope d={d:.6g}")

    theta = optimize.brentq(g, lo, hi, xtol=1e-15)
    polished = optimize.newton(g, theta, fprime=lambda t: -d + math.sin(t), tol=1e-15, maxiter=20, disp=False)
    if abs(g(polished)) < abs(g(theta)) and lo <= polished <= hi:
        theta = float(polished)
    return float(theta)


def extremal_two_delay(c_target: float, omega_s: float, E: float) -> ExtremalPair:
    """Two-atom distribution {0, tau2} with mean E and C(omega_s) = c_target maximising S(omega_s)."""
    if omega_s <= 0 or E <= 0:
        raise ExtremalError(f"need omega_s * E > 0, got omega_s={omega_s}, E={E}")
    x = omega_s * E
    if c_target > math.cos(x) + CONSTRAINT_TOL:
        raise ExtremalError(
            f"C(omega_s) = {c_target:.6g} must not exceed cos(omega_s E) = {math.cos(x):.6g}"
        )
    if abs(c_target - math.cos(x)) <= CONSTRAINT_TOL:
        return _single_dirac(omega_s, E)

    d = (1.0 - c_target) / x
    if d > chord_constant() + CONSTRAINT_TOL:
        raise ExtremalError(f"chord slope {d:.6g} exceeds the chord constant {chord_constant():.6g}")

    theta = _smallest_chord_root(d)
    tau2 = theta / omega_s
    p2 = E / tau2
    p1 = 1.0 - p2
    if p1 < -CONSTRAINT_TOL:
        log.warning("extremal weight p1=%.3g < 0 at omega_s=%.6g, E=%.6g; using the single delay", p1, omega_s, E)
        return _single_dirac(omega_s, E, flagged=True)
    p1 = max(p1, 0.0)
    return ExtremalPair(
        tau2=tau2, p1=p1, p2=1.0 - p1, omega_s=omega_s,
        preserved_mean=E, preserved_c=p1 + (1.0 - p1) * math.cos(theta),
    )


def pair_condition(atoms: list[tuple[float, float]], omega_s: float) -> bool:
    """Whether the normalised pair satisfies C_pair(omega_s) < cos(omega_s E_pair)."""
    (t_i, p_i), (t_j, p_j) = atoms
    total = p_i + p_j
    w_i, w_j = p_i / total, p_j / total
    mean_pair = w_i * t_i + w_j * t_j
    c_pair = w_i * math.cos(omega_s * t_i) + w_j * math.cos(omega_s * t_j)
    return c_pair < math.cos(omega_s * mean_pair) - CONSTRAINT_TOL


def _replace_pair(atoms, i, j, omega_s):
    (t_i, p_i), (t_j, p_j) = atoms[i], atoms[j]
    total = p_i + p_j
    mean_pair = (p_i * t_i + p_j * t_j) / total
    c_pair = (p_i * math.cos(omega_s * t_i) + p_j * math.cos(omega_s * t_j)) / total
    pair = extremal_two_delay(c_pair, omega_s, mean_pair)
    if pair.flagged:
        return None
    rest = [atom for k, atom in enumerate(atoms) if k not in (i, j)]
    new = rest + [(0.0, total * pair.p1), (pair.tau2, total * pair.p2)]
    return [(t, p) for t, p in new if p > WEIGHT_FLOOR]


def _merge_and_shrink(reduced: DiscreteMixture, omega_s: float, c_target: float) -> ExtremalPair:
    """Merge the positive delays into their weighted mean, then shrink it back onto C = c_target.

    The merged pair {0, tau_bar} and the result share the mean, so both lie on
    the family p2 = E / tau; the shrink moves tau along it to the extremal delay.
    """
    positive = [(t, p) for t, p in reduced.atoms if t > 0]
    if not positive:
        raise ExtremalError("all mass sits at zero delay; there is no delay to shrink")
    weight = math.fsum(p for _, p in positive)
    tau_bar = math.fsum(t * p for t, p in positive) / weight
    E = weight * tau_bar
    pair = extremal_two_delay(c_target, omega_s, E)
    log.debug("merged %d positive delays into tau_bar=%.9g, shrunk to tau2*=%.9g",
              len(positive), tau_bar, pair.tau2)
    if pair.tau2 > tau_bar * (1 + CONSTRAINT_TOL):
        log.warning("extremal delay %.9g exceeds the merged delay %.9g", pair.tau2, tau_bar)
    return pair


def reduce_to_extremal(
    mix: Union[DiscreteMixture, DiracMass],
    omega_s: float,
    a: Optional[float] = None,
    *,
    settings: Optional[Settings] = None,
) -> ExtremalPair:
    """Reduce a finite mixture to its extremal {0, tau2} pair at frequency omega_s.

    When `a` is given it must satisfy C_mix(omega_s) + a = 0; a mean at or above
    the distribution-independent bound flags the result.  Without `a` the
    constraint is read off the mixture itself.
    """
    cfg = settings or get_settings()
    if isinstance(mix, DiracMass):
        mix = DiscreteMixture((mix.location,), (1.0,))
    if omega_s <= 0:
        raise DomainError(f"omega_s must be > 0, got {omega_s}")

    E = mix.mean()
    above_bound = False
    moments = trig_moments(mix, omega_s, settings=cfg)
    c_mix, s_mix = moments.c_value, moments.s_value
    if a is not None:
        if abs(c_mix + a) > CROSSING_MATCH_TOL:
            raise ExtremalError(f"C(omega_s) + a = {c_mix + a:.3g}; omega_s is not a crossing frequency")
        if abs(a) < 1 and E >= universal_bound(a, 1.0):
            log.warning("mean %.6g is not below the bound %.6g; S* < omega_s is not guaranteed",
                        E, universal_bound(a, 1.0))
            above_bound = True

    atoms = mix.atoms
    steps = [mix]
    limit = 10 * len(atoms) ** 2
    for _ in range(limit):
        positive = sorted(
            (k for k, (t, _) in enumerate(atoms) if t > 0),
            key=lambda k: atoms[k][0],
            reverse=True,
        )
        replaced = None
        for pos_j, j in enumerate(positive):
            for i in positive[pos_j + 1:]:
                if not pair_condition([atoms[i], atoms[j]], omega_s):
                    continue
                try:
                    replaced = _replace_pair(atoms, i, j, omega_s)
                except ExtremalError:
                    continue
                if replaced is not None:
                    break
            if replaced is not None:
                break
        if replaced is None:
            break
        current = DiscreteMixture.from_atoms(replaced)
        atoms = current.atoms
        steps.append(current)
        log.debug("pair reduction step %d: %s", len(steps) - 1, atoms)
    else:
        raise ExtremalError(f"pair reduction did not settle within {limit} iterations")

    reduced = steps[-1]
    e_reduced = reduced.mean()
    c_reduced = trig_moments(reduced, omega_s, settings=cfg).c_value
    drifted = abs(e_reduced - E) > MEAN_DRIFT_TOL * max(1.0, E) or abs(c_reduced - c_mix) > C_DRIFT_TOL
    if drifted:
        log.warning("pair reduction moved the constraints: mean %.12g -> %.12g, C %.12g -> %.12g",
                    E, e_reduced, c_mix, c_reduced)

    pair = _merge_and_shrink(reduced, omega_s, c_reduced)
    final = ExtremalPair(
        tau2=pair.tau2, p1=pair.p1, p2=pair.p2, omega_s=omega_s,
        preserved_mean=e_reduced, preserved_c=c_reduced,
        flagged=pair.flagged or above_bound or drifted,
        steps=tuple(steps) + (pair.as_mixture(),),
    )
    if final.s_star < s_mix - CONSTRAINT_TOL:
        log.warning("extremal S*=%.9g below the input S=%.9g", final.s_star, s_mix)
        final = replace(final, flagged=True)
    return final


def s_star_bound_check(a: float, p: float, r: float) -> bool:
    """S < omega_s for f = (1 - p) delta(tau) + p delta(tau - r) at its crossing frequency."""
    if abs(a) >= 1:
        raise DomainError(f"need |a| < 1, got {a}")
    if not 0 < p <= 1 or r <= 0:
        raise DomainError(f"need p in (0, 1] and r > 0, got p={p}, r={r}")
    if p * r >= universal_bound(a, 1.0):
        raise DomainError(f"mean p*r = {p * r:.6g} must lie below the bound {universal_bound(a, 1.0):.6g}")

    cosine = -(a + 1.0 - p) / p
    if abs(cosine) > 1:
        return True
    omega_s = math.acos(cosine) / r
    s_value = math.sqrt(max(0.0, p * p - (a + 1.0 - p) ** 2))
    return s_value < omega_s
