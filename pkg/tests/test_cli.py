import json

import pytest

from delaystab.main import EXIT_SOFTWARE, EXIT_USAGE, main


def run(capsys, *argv):
    code = main([str(arg) for arg in argv])
    out = capsys.readouterr().out
    return code, out


def last_json(out):
    return json.loads(out.strip().splitlines()[-1])


class TestCheck:
    def test_below_the_bound(self, capsys):
        code, out = run(capsys, "check", "--a", 0, "--b", 1, "--E", 1.5)
        assert code == 0
        assert last_json(out)["verdict"]["status"] == "Stable"

    def test_single_delay_past_the_bound(self, capsys, spec_dir):
        code, out = run(capsys, "check", "--a", 0, "--b", 1, "--E", 2, "--dist", spec_dir / "dirac1.json")
        response = last_json(out)
        assert code == 1
        assert response["verdict"]["status"] == "Unstable"
        assert response["roots"]["unstable_count"] == 2
        assert response["verdict"]["witness"]["leading_root"][0] > 0

    def test_below_minus_b(self, capsys):
        code, out = run(capsys, "check", "--a", -2, "--b", 1, "--E", 0.1)
        assert code == 1
        assert last_json(out)["verdict"]["witness"]["note"]

    def test_distribution_dependent_without_a_distribution(self, capsys):
        code, out = run(capsys, "check", "--a", 0, "--E", 2)
        assert code == 2
        assert last_json(out)["verdict"]["status"] == "DistributionDependent"

    def test_distribution_decides(self, capsys, spec_dir):
        # uniform on [1, 3]: the a = 0 crossing of this shape sits at E = 1.745
        code, out = run(capsys, "check", "--a", 0, "--E", 2, "--dist", spec_dir / "uniform.json")
        response = last_json(out)
        assert response["region"]["status"] == "DistributionDependent"
        assert code == 1
        assert response["verdict"]["status"] == "Unstable"
        assert response["sufficient"] is None

    def test_roots_are_mapped_back_through_b(self, capsys, spec_dir):
        _, out = run(capsys, "check", "--a", 0, "--b", 2, "--E", 0.5, "--dist", spec_dir / "dirac1.json")
        root = last_json(out)["roots"]["leading_root"]
        # b = 2, E = 0.5 is the unit delay on a timescale halved
        assert root[0] == pytest.approx(2 * -0.3181, abs=1e-3)

    def test_needs_a_mean(self, capsys):
        code, _ = run(capsys, "check", "--a", 0)
        assert code == EXIT_USAGE

    def test_malformed_spec(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"kind": "dirac", "delay": -1}')
        code, _ = run(capsys, "check", "--a", 0, "--dist", bad)
        assert code == EXIT_USAGE

    def test_emit_spec_round_trip(self, capsys, spec_dir, tmp_path):
        out = tmp_path / "echo.json"
        run(capsys, "check", "--a", 0, "--dist", spec_dir / "two_atom.json", "--emit-spec", out)
        assert json.loads(out.read_text()) == json.loads((spec_dir / "two_atom.json").read_text())


class TestExtremal:
    def test_reference_mixture(self, capsys, spec_dir):
        code, out = run(capsys, "extremal", "--dist", spec_dir / "two_atom.json", "--omega-s", 1)
        pair = last_json(out)
        assert code == 0
        assert pair["tau2_star"] == pytest.approx(1.76, abs=0.01)
        assert pair["p2_star"] == pytest.approx(0.76, abs=0.01)
        assert pair["mean"] == pytest.approx(1.334, abs=1e-10)

    def test_no_crossing(self, capsys, spec_dir):
        code, out = run(capsys, "extremal", "--dist", spec_dir / "dirac1.json", "--a", 0)
        assert code == 0
        assert last_json(out)["status"] == "Stable"

    def test_smallest_crossing(self, capsys, spec_dir):
        code, out = run(capsys, "extremal", "--dist", spec_dir / "dirac1.json", "--a", 0, "--E", 2)
        pair = last_json(out)
        assert code == 0
        assert pair["omega_s"] == pytest.approx(0.7853981634, abs=1e-9)
        assert pair["flagged"]

    def test_continuous_distribution_rejected(self, capsys, spec_dir):
        code, _ = run(capsys, "extremal", "--dist", spec_dir / "exponential.json", "--omega-s", 1)
        assert code == EXIT_USAGE


class TestSweeps:
    def test_boundary_csv_is_reproducible(self, capsys, spec_dir, tmp_path):
        first, second = tmp_path / "one.csv", tmp_path / "two.csv"
        for out in (first, second):
            code, _ = run(capsys, "boundary", "--dist", spec_dir / "exponential.json", "--points", 300, "--out", out)
            assert code == 0
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text().startswith("u,a,E,branch_id,kind\n")

    def test_boundary_rescales_to_unit_mean(self, capsys, tmp_path):
        spec = tmp_path / "exp3.json"
        spec.write_text('{"kind": "exponential", "mean": 3.0}')
        code, out = run(capsys, "boundary", "--dist", spec, "--points", 100, "--format", "dat")
        assert code == 0
        assert out.startswith("# u a E branch_id kind\n")

    def test_chart_above_one_is_stable(self, capsys, spec_dir):
        code, out = run(
            capsys, "chart", "--dist", spec_dir / "gamma2.toml", "--a-range", "1.1:2:3", "--E-range", "0.5:20:4",
        )
        lines = out.strip().splitlines()
        assert code == 0
        assert lines[0] == "a,E,status,unstable_count"
        assert len(lines) == 1 + 12
        assert all(line.split(",")[2] == "Stable" for line in lines[1:])

    def test_bad_range(self, capsys, spec_dir):
        with pytest.raises(SystemExit) as exc:
            main(["chart", "--dist", str(spec_dir / "gamma2.toml"), "--a-range", "1:0:3", "--E-range", "1:2:2"])
        assert exc.value.code == EXIT_USAGE

    def test_simulate(self, capsys, spec_dir, tmp_path):
        trace = tmp_path / "trace.csv"
        code, out = run(capsys, "simulate", "--a", 0, "--dist", spec_dir / "dirac1.json", "--out", trace)
        result = last_json(out)
        assert code == 0
        assert result["decay_rate"] == pytest.approx(-0.3181, rel=0.05)
        assert result["leading_root"][0] == pytest.approx(-0.3181, abs=1e-4)
        assert trace.read_text().startswith("t,x\n0,1\n")

    def test_simulate_rejects_coarse_step(self, capsys, spec_dir):
        code, _ = run(capsys, "simulate", "--a", 0, "--dist", spec_dir / "dirac1.json", "--dt", 0.5)
        assert code == EXIT_SOFTWARE

    def test_simulate_a_batch_of_means(self, capsys, spec_dir):
        code, out = run(capsys, "simulate", "--a", 0, "--dist", spec_dir / "dirac1.json", "--E-range", "1:1.5:2")
        results = [json.loads(line) for line in out.strip().splitlines()]
        assert code == 0
        assert [r["mean"] for r in results] == pytest.approx([1.0, 1.5])
        assert results[0]["leading_root"][0] == pytest.approx(-0.3181, abs=1e-4)
        assert all(r["decay_rate"] < 0 for r in results)

    def test_batch_takes_no_trace_file(self, capsys, spec_dir, tmp_path):
        code, _ = run(
            capsys, "simulate", "--a", 0, "--dist", spec_dir / "dirac1.json",
            "--E-range", "1:1.5:2", "--out", tmp_path / "trace.csv",
        )
        assert code == EXIT_USAGE

    def test_single_mean_and_batch_are_exclusive(self, spec_dir):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--a", "0", "--dist", str(spec_dir / "dirac1.json"), "--E", "1", "--E-range", "1:2:2"])
        assert exc.value.code == EXIT_USAGE


class TestMaintenance:
    def test_archive_and_list(self, capsys, tmp_path):
        archive = tmp_path / "runs.duckdb"
        run(capsys, "check", "--a", 0, "--E", 1.5, "--archive", archive)
        run(capsys, "check", "--a", 0, "--E", 2, "--archive", archive)
        code, out = run(capsys, "runs", "--archive", archive)
        rows = [json.loads(line) for line in out.strip().splitlines()]
        assert code == 0
        assert [r["command"] for r in rows] == ["check", "check"]
        assert [r["run_id"] for r in rows] == [1, 2]

    def test_runs_needs_archive(self, capsys):
        code, _ = run(capsys, "runs")
        assert code == EXIT_USAGE

    def test_selftest_single_case(self, capsys):
        code, out = run(capsys, "selftest", "--case", "leading root of the unit delay")
        report = last_json(out)
        assert code == 0
        assert report["passed"]
        assert [c["name"] for c in report["cases"]] == ["leading root of the unit delay"]

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            main(["plot"])
        assert exc.value.code == EXIT_USAGE
