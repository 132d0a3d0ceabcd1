import math

import numpy as np
import pytest

from delaystab.charfun import char_value, count_unstable_roots, leading_root, omega_cap
from delaystab.criteria import StabilityStatus, root_verdict
from delaystab.distributions import DiracMass, DiscreteMixture, Exponential, GammaKernel, Uniform
from delaystab.errors import DomainError
from delaystab.selftest import random_distribution


def test_omega_cap():
    assert omega_cap(0.6) == pytest.approx(0.8)
    assert omega_cap(1.0) == 0.0
    with pytest.raises(DomainError):
        omega_cap(1.2)


def test_char_value_at_zero_delay():
    sample = char_value(0.5, DiracMass(0.0), -1.5)
    assert sample.value == pytest.approx(0.0)


class TestLeadingRoot:
    def test_unit_delay_oracle(self, cfg):
        root = leading_root(0.0, DiracMass(1.0), settings=cfg)
        assert abs(root - complex(-0.3181, 1.3372)) < 1e-4

    def test_exponential_matches_quadratic(self, cfg):
        # lam^2 + 1.5 lam + 1.5 = 0
        root = leading_root(0.5, Exponential(1.0), settings=cfg)
        assert root == pytest.approx(complex(-0.75, math.sqrt(3.75) / 2), abs=1e-10)

    def test_strong_kernel_matches_cubic(self, cfg):
        # 4 lam (1 + lam / 2)^2 + 4 = lam^3 + 4 lam^2 + 4 lam + 4
        roots = np.roots([1.0, 4.0, 4.0, 4.0])
        expected = roots[np.argmax(roots.real)]
        root = leading_root(0.0, GammaKernel(2, 1.0), settings=cfg)
        assert root.real == pytest.approx(expected.real, abs=1e-9)
        assert root.imag == pytest.approx(abs(expected.imag), abs=1e-9)

    @pytest.mark.parametrize(
        "a, dist",
        [
            (0.0, Uniform(0.0, 2.0)),
            (0.3, Uniform(1.0, 3.0)),
            (-0.5, DiscreteMixture((0.5, 1.5), (0.5, 0.5))),
            (0.2, DiscreteMixture((0.0, 1.0, 4.0), (0.2, 0.5, 0.3))),
        ],
    )
    def test_generic_kinds_have_small_residual(self, cfg, a, dist):
        root = leading_root(a, dist, settings=cfg)
        assert abs(char_value(a, dist, root).value) < 1e-10
        assert root.imag >= 0

    def test_rightmost_against_discretised_uniform(self, cfg):
        uniform = Uniform(0.5, 1.5)
        atoms = 0.5 + (np.arange(400) + 0.5) / 400
        mix = DiscreteMixture(tuple(atoms), (1.0 / 400,) * 400)
        assert leading_root(0.0, uniform, settings=cfg) == pytest.approx(
            leading_root(0.0, mix, settings=cfg), abs=1e-4
        )

    def test_coefficient_range(self, cfg):
        with pytest.raises(DomainError):
            leading_root(11.0, DiracMass(1.0), settings=cfg)


class TestRootCount:
    def test_stable_unit_delay(self, cfg):
        report = count_unstable_roots(0.0, DiracMass(1.0), settings=cfg)
        assert report.unstable_count == 0
        assert report.is_stable

    def test_past_the_first_crossing(self, cfg):
        report = count_unstable_roots(0.0, DiracMass(2.0), settings=cfg)
        assert report.unstable_count == 2
        assert report.leading_root.real > 0

    def test_without_locating(self, cfg):
        report = count_unstable_roots(0.0, DiracMass(2.0), locate=False, settings=cfg)
        assert report.unstable_count == 2
        assert report.leading_root is None

    @pytest.mark.parametrize("E, expected", [(3.0, 0), (5.0, 2)])
    def test_strong_kernel_either_side_of_boundary(self, cfg, E, expected):
        # the a = 0 crossing of the strong kernel sits at E = 4
        assert count_unstable_roots(0.0, GammaKernel(2, E), locate=False, settings=cfg).unstable_count == expected

    def test_positive_real_root(self, cfg):
        report = count_unstable_roots(-1.5, Exponential(1.0), settings=cfg)
        assert report.unstable_count == 1
        assert report.leading_root.imag == pytest.approx(0.0, abs=1e-12)

    def test_marginal_on_the_boundary(self, cfg):
        report = count_unstable_roots(0.0, DiracMass(math.pi / 2), settings=cfg)
        assert report.unstable_count == 0
        assert report.marginal
        verdict = root_verdict(report)
        assert verdict.status is StabilityStatus.MARGINAL
        assert verdict.omega_s == pytest.approx(1.0, abs=1e-9)

    def test_wide_mixture(self, cfg):
        mix = DiscreteMixture((0.1, 3.0, 9.0), (0.3, 0.4, 0.3))
        report = count_unstable_roots(0.0, mix, settings=cfg)
        assert (report.unstable_count > 0) == (report.leading_root.real > 0)


def _winding_count(a: float, mix: DiscreteMixture, step: float = 2e-5) -> tuple[int, float]:
    """Zeros right of the imaginary axis from a dense unwrapped phase scan."""
    half = abs(a) + 2.0
    corners = [complex(0.0, -half), complex(half, -half), complex(half, half), complex(0.0, half), complex(0.0, -half)]
    path = np.concatenate([
        z0 + (z1 - z0) * np.linspace(0.0, 1.0, int(abs(z1 - z0) / step) + 1)[:-1]
        for z0, z1 in zip(corners, corners[1:])
    ] + [np.array([corners[0]])])
    tau, p = np.asarray(mix.delays), np.asarray(mix.weights)
    values = path + a + np.exp(-np.outer(path, tau)) @ p
    phase = np.unwrap(np.angle(values))
    axis = path.real == 0.0
    return int(round((phase[-1] - phase[0]) / (2 * math.pi))), float(np.min(np.abs(values[axis])))


def test_conjugate_symmetry(cfg):
    rng = np.random.default_rng(cfg.seed)
    for _ in range(50):
        dist = random_distribution(rng)
        a = float(rng.uniform(-1.0, 1.0))
        lam = complex(rng.uniform(0.0, 2.0), rng.uniform(-5.0, 5.0))
        upper = char_value(a, dist, lam).value
        lower = char_value(a, dist, lam.conjugate()).value
        assert lower == pytest.approx(upper.conjugate(), abs=1e-12)


def test_conjugate_of_a_root_is_a_root(cfg):
    mix = DiscreteMixture((0.5, 2.5), (0.4, 0.6))
    root = leading_root(0.1, mix, settings=cfg)
    assert abs(char_value(0.1, mix, root.conjugate()).value) < 1e-10


@pytest.mark.slow
def test_count_matches_phase_scan_on_small_mixtures(cfg):
    rng = np.random.default_rng(cfg.seed + 3)
    checked = 0
    while checked < 50:
        n = int(rng.integers(1, 4))
        mix = DiscreteMixture(tuple(rng.uniform(0.0, 3.0, n).tolist()), tuple(rng.dirichlet(np.ones(n)).tolist()))
        a = float(rng.uniform(-0.9, 0.9))
        expected, gap = _winding_count(a, mix)
        if gap < 1e-3:
            continue
        report = count_unstable_roots(a, mix, settings=cfg)
        assert report.unstable_count == expected, (a, mix)
        if not report.marginal:
            assert (report.unstable_count == 0) == (report.leading_root.real < 0), (a, mix)
        checked += 1
