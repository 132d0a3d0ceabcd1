"""Characteristic function h(lam) = lam + a + L(lam) and its right-half-plane roots.

Stability of x' = -a x - int x(t - tau) d eta(tau) (b normalised to 1) is
decided by the roots of h: asymptotically stable iff every root has
negative real part.  Roots with Re(lam) >= 0 satisfy |lam| <= |a| + 1,
so a finite rectangle always encloses them and the argument principle
counts them exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize, special

from delaystab.config import Settings, get_settings
from delaystab.distributions import (
    DelayDistribution,
    DiracMass,
    GammaKernel,
    laplace,
)
from delaystab.errors import ContourError, DomainError, NumericalError

log = logging.getLogger(__name__)

MAX_ABS_A = 10.0
QUARTER_TURN = math.pi / 4
LEFT_START = 0.125           # first leftward step of the rightmost-root search
MAX_SEARCH_HEIGHT = 1e4      # |Im| bound above which the leftward search gives up
LINE_SAMPLES = 4096


@dataclass(frozen=True)
class CharacteristicSample:
    lam: complex
    value: complex
    a: float


@dataclass(frozen=True)
class RootReport:
    unstable_count: int
    leading_root: Optional[complex]
    contour_bound: float
    marginal: bool = False

    @property
    def is_stable(self) -> bool:
        return self.unstable_count == 0 and not self.marginal


def char_value(a: float, dist: DelayDistribution, lam: complex) -> CharacteristicSample:
    lam = complex(lam)
    return CharacteristicSample(lam, lam + a + laplace(dist, lam), a)


def omega_cap(a: float) -> float:
    """Largest frequency at which h can vanish on the imaginary axis."""
    if abs(a) > 1:
        raise DomainError(f"no imaginary-axis crossing exists for |a| = {abs(a):.6g} > 1")
    return math.sqrt(max(0.0, 1.0 - a * a))


def _h(a: float, dist: DelayDistribution):
    def fun(lam):
        lam = np.asarray(lam, dtype=complex)
        return lam + a + dist.transform(lam)

    return fun


def _h_prime(dist: DelayDistribution):
    def fun(lam):
        return 1.0 + dist.transform_derivative(np.asarray(lam, dtype=complex))

    return fun


# --- argument principle ----------------------------------------------------


def _edge_phase(fun, z0: complex, z1: complex, n: int, cfg: Settings) -> float:
    """Continuous change of arg(fun) along the segment z0 -> z1."""
    z = z0 + (z1 - z0) * np.linspace(0.0, 1.0, n + 1)
    w = fun(z)
    if np.min(np.abs(w)) < cfg.contour_residual:
        raise ContourError(f"|h| = {np.min(np.abs(w)):.3g} on the contour")

    za, zb, wa, wb = z[:-1], z[1:], w[:-1], w[1:]
    total = 0.0
    for _ in range(cfg.contour_max_depth):
        if za.size == 0:
            return total
        zm = 0.5 * (za + zb)
        wm = fun(zm)
        if np.min(np.abs(wm)) < cfg.contour_residual:
            raise ContourError(f"|h| = {np.min(np.abs(wm)):.3g} on the contour")
        first = np.angle(wm / wa)
        second = np.angle(wb / wm)
        ok = (np.abs(first) < QUARTER_TURN) & (np.abs(second) < QUARTER_TURN)
        total += float(np.sum(first[ok]) + np.sum(second[ok]))

        bad = ~ok
        za, zb, wa, wb = (
            np.concatenate([za[bad], zm[bad]]),
            np.concatenate([zm[bad], zb[bad]]),
            np.concatenate([wa[bad], wm[bad]]),
            np.concatenate([wm[bad], wb[bad]]),
        )
    raise ContourError("argument tracking did not resolve the phase within the depth limit")


def _count_in_box(
    a: float,
    dist: DelayDistribution,
    x_lo: float,
    x_hi: float,
    y_hi: float,
    cfg: Settings,
) -> int:
    """Zeros of h inside [x_lo, x_hi] x [-y_hi, y_hi], counter-clockwise boundary."""
    fun = _h(a, dist)
    corners = [
        complex(x_lo, -y_hi),
        complex(x_hi, -y_hi),
        complex(x_hi, y_hi),
        complex(x_lo, y_hi),
    ]
    total = 0.0
    for z0, z1 in zip(corners, corners[1:] + corners[:1]):
        length = abs(z1 - z0)
        n = max(cfg.contour_min_points, int(length * (1.0 + dist.phase_scale) * cfg.contour_density))
        total += _edge_phase(fun, z0, z1, n, cfg)

    turns = total / (2 * math.pi)
    count = round(turns)
    if abs(turns - count) > 0.25 or count < 0:
        raise ContourError(f"non-integer winding number {turns:.4f}")
    return int(count)


def _check_coefficient(a: float) -> None:
    if not math.isfinite(a) or abs(a) > MAX_ABS_A:
        raise DomainError(f"|a| must be <= {MAX_ABS_A:g} for contour sizing, got {a}")


def count_unstable_roots(
    a: float,
    dist: DelayDistribution,
    *,
    locate: bool = True,
    settings: Optional[Settings] = None,
) -> RootReport:
    """Number of roots with Re(lam) > marginal_tol, plus the rightmost root when locate is set."""
    cfg = settings or get_settings()
    _check_coefficient(a)

    x0 = cfg.marginal_tol
    bound = abs(a) + 1.0 + cfg.contour_margin
    for attempt in range(cfg.contour_retries + 1):
        try:
            count = _count_in_box(a, dist, x0, bound, bound, cfg)
            break
        except ContourError as exc:
            log.debug("contour attempt %d failed (%s); perturbing", attempt + 1, exc)
            x0 *= 10.0
            bound *= 1.01
    else:
        raise NumericalError(
            f"root count failed after {cfg.contour_retries} retries for a={a:.6g}, {dist!r}"
        )

    if not locate:
        return RootReport(count, None, bound)

    root = leading_root(a, dist, settings=cfg)
    marginal = abs(root.real) <= max(cfg.marginal_tol, x0)
    if count == 0 and root.real > x0:
        log.warning("rightmost root %s lies right of an empty contour for a=%.6g", root, a)
    return RootReport(count, root, bound, marginal)


# --- rightmost root --------------------------------------------------------


def _polish(a: float, dist: DelayDistribution, z: complex, cfg: Settings) -> complex:
    fun = _h(a, dist)
    start = abs(complex(fun(z)))
    if start < cfg.root_tol:
        return z
    polished = optimize.newton(
        fun, z, fprime=_h_prime(dist), tol=1e-15, maxiter=cfg.newton_maxiter, disp=False
    )
    polished = complex(polished)
    if not np.isfinite(polished) or abs(complex(fun(polished))) > start:
        return z
    return polished


def _upper(z: complex) -> complex:
    return z.conjugate() if z.imag < 0 else z


def _dirac_root(a: float, dist: DiracMass) -> Optional[complex]:
    E = dist.location
    if E == 0:
        return complex(-(a + 1.0))
    try:
        arg = -E * math.exp(a * E)
    except OverflowError:
        return None
    return complex(special.lambertw(arg, 0)) / E - a


def _gamma_root(a: float, dist: GammaKernel) -> complex:
    # (lam + a)(1 + c lam)^k + 1 has exactly the zeros of h
    c = dist.mean_delay / dist.order
    poly = np.polynomial.Polynomial([a, 1.0]) * np.polynomial.Polynomial([1.0, c]) ** dist.order + 1.0
    roots = poly.roots()
    top = np.max(roots.real)
    candidates = roots[np.abs(roots.real - top) <= 1e-9 * max(1.0, abs(top))]
    return complex(candidates[np.argmax(candidates.imag)])


def _bisect_root(a: float, dist: DelayDistribution, cfg: Settings) -> complex:
    """Rightmost root by bisecting the real part with winding-number counts."""
    scale = max(1.0, dist.phase_scale)
    lo = -LEFT_START / scale
    while True:
        if lo <= -dist.nu:
            raise NumericalError("rightmost-root search reached the transform's divergence line")
        height = abs(a) + float(dist.transform(lo).real) + cfg.contour_margin
        if height > MAX_SEARCH_HEIGHT:
            raise NumericalError(f"no characteristic root found right of Re = {lo:.6g}")
        try:
            if _count_in_box(a, dist, lo, height, height, cfg) > 0:
                break
        except ContourError:
            pass
        lo *= 2.0

    hi = height
    while hi - lo > cfg.bisection_width:
        mid = 0.5 * (lo + hi)
        try:
            found = _count_in_box(a, dist, mid, height, height, cfg) > 0
        except ContourError:
            # the left edge passes through a root
            found = True
        if found:
            lo = mid
        else:
            hi = mid

    fun = _h(a, dist)
    ys = np.linspace(0.0, height, LINE_SAMPLES)
    mags = np.abs(fun(hi + 1j * ys))
    interior = np.flatnonzero((mags[1:-1] <= mags[:-2]) & (mags[1:-1] <= mags[2:])) + 1
    starts = [ys[0]] + list(ys[interior]) + [ys[-1]]

    best = None
    for y in starts:
        z = _polish(a, dist, complex(hi, y), cfg)
        if abs(complex(fun(z))) > 1e-10 or z.real < lo - 1e-6:
            continue
        if best is None or z.real > best.real + 1e-12:
            best = z
    if best is None:
        raise NumericalError(f"Newton refinement failed near Re = {hi:.6g}")
    return best


def leading_root(
    a: float,
    dist: DelayDistribution,
    *,
    settings: Optional[Settings] = None,
) -> complex:
    """Rightmost root of h, the member of the conjugate pair with Im >= 0."""
    cfg = settings or get_settings()
    _check_coefficient(a)

    root = None
    if isinstance(dist, DiracMass):
        root = _dirac_root(a, dist)
    elif isinstance(dist, GammaKernel):
        root = _gamma_root(a, dist)
    if root is None:
        root = _bisect_root(a, dist, cfg)

    root = _upper(_polish(a, dist, root, cfg))
    residual = abs(complex(_h(a, dist)(root)))
    if residual > 1e-10:
        raise NumericalError(f"leading root residual {residual:.3g} above tolerance")
    return root
