import json

import pytest

from delaystab.distributions import DiracMass, DiscreteMixture, Exponential, GammaKernel, Uniform
from delaystab.errors import SpecFileError
from delaystab.specfiles import dump_spec, load_spec, parse_spec, write_spec


def test_fixtures_load(spec_dir):
    assert load_spec(spec_dir / "two_atom.json") == DiscreteMixture((0.2, 2.0), (0.37, 0.63))
    assert load_spec(spec_dir / "dirac1.json") == DiracMass(1.0)
    assert load_spec(spec_dir / "exponential.json") == Exponential(1.0)
    assert load_spec(spec_dir / "gamma2.toml") == GammaKernel(2, 1.0)
    assert load_spec(spec_dir / "uniform.json") == Uniform(0.5, 1.5)
    assert load_spec(spec_dir / "two_delay_p06.json").mean() == pytest.approx(1.0)


def test_exponential_is_not_written_as_gamma():
    assert json.loads(dump_spec(Exponential(2.0))) == {"kind": "exponential", "mean": 2.0}


def test_round_trip_through_files(spec_dir, tmp_path):
    for path in sorted(spec_dir.iterdir()):
        dist = load_spec(path)
        out = tmp_path / (path.stem + ".json")
        write_spec(dist, out)
        assert load_spec(out) == dist
        assert out.read_text().count("\n") == 1


@pytest.mark.parametrize(
    "data",
    [
        {"kind": "pareto", "alpha": 2},
        {"kind": "dirac", "delay": -1.0},
        {"kind": "dirac", "delay": 1.0, "weight": 1.0},
        {"kind": "discrete", "atoms": []},
        {"kind": "discrete", "atoms": [{"delay": 1.0, "weight": 0.0}]},
        {"kind": "gamma", "order": 1.5, "mean": 1.0},
        {"kind": "uniform", "lower": 2.0, "upper": 1.0},
        {"mean": 1.0},
    ],
)
def test_malformed_specs(data):
    with pytest.raises(SpecFileError):
        parse_spec(data)


def test_unreadable_files(tmp_path):
    with pytest.raises(SpecFileError):
        load_spec(tmp_path / "missing.json")
    bad = tmp_path / "spec.yaml"
    bad.write_text("kind: dirac\n")
    with pytest.raises(SpecFileError):
        load_spec(bad)
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(SpecFileError):
        load_spec(broken)
    listed = tmp_path / "listed.json"
    listed.write_text("[1, 2]")
    with pytest.raises(SpecFileError):
        load_spec(listed)
