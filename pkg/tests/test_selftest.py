import pytest

from delaystab.charfun import count_unstable_roots
from delaystab.selftest import CASES, below_bound_cases, run_selftest


def test_case_names_are_unique():
    names = [name for name, _ in CASES]
    assert len(names) == len(set(names))


def test_selected_case(cfg):
    report = run_selftest(cfg, ["proof inequalities"])
    assert report.passed
    assert len(report.cases) == 1


def test_seeded_cases_are_reproducible():
    first = below_bound_cases(3, 5)
    assert first == below_bound_cases(3, 5)
    assert first != below_bound_cases(4, 5)


@pytest.mark.slow
def test_full_selftest(cfg):
    report = run_selftest(cfg)
    assert report.passed, [c.detail for c in report.cases if not c.passed]


@pytest.mark.slow
def test_no_unstable_roots_below_the_universal_bound(cfg):
    for a, dist in below_bound_cases(cfg.seed, 1000):
        report = count_unstable_roots(a, dist, locate=False, settings=cfg)
        assert report.unstable_count == 0, (a, dist)
