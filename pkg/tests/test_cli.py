import json

import numpy as np
import pytest

from capot import io as cio
from capot.cli import main
from capot.errors import InputError
from helpers import product_3x3, random_problem, tiny_saturated


@pytest.fixture
def problem_file(tmp_path):
    path = tmp_path / "problem.json"
    cio.save_problem(product_3x3(), path)
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


class TestProblemJson:
    def test_round_trip_identity(self, tmp_path):
        prob = random_problem(5, 4, seed=7)
        path = tmp_path / "p.json"
        cio.save_problem(prob, path)
        back = cio.load_problem(path)
        np.testing.assert_array_equal(back.f, prob.f)
        np.testing.assert_array_equal(back.g, prob.g)
        np.testing.assert_array_equal(back.hbar.values, prob.hbar.values)
        np.testing.assert_array_equal(back.s.values, prob.s.values)
        np.testing.assert_array_equal(back.wx, prob.wx)
        assert back.eta == prob.eta

    def test_non_uniform_weights_round_trip(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({
            "version": 1, "m": 2, "n": 3,
            "weights_x": [0.25, 0.75],
            "weights_y": [0.5, 0.25, 0.25],
            "f": [2.0, 2 / 3], "g": [1.0, 1.0, 1.0],
            "hbar": 3.0, "s": {"builtin": "neg_sq_dist"},
        }))
        prob = cio.load_problem(path)
        np.testing.assert_allclose(prob.wx, [0.25, 0.75])
        # midpoints are the cumulative-weight cell centers
        np.testing.assert_allclose(prob.x.axis.midpoints, [0.125, 0.625])
        out = tmp_path / "q.json"
        cio.save_problem(prob, out)
        back = cio.load_problem(out)
        np.testing.assert_array_equal(back.wy, prob.wy)
        np.testing.assert_array_equal(back.s.values, prob.s.values)

    def test_scalar_capacity_and_builtin_surplus(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({
            "version": 1, "m": 2, "n": 2,
            "f": [1.0, 1.0], "g": [1.0, 1.0],
            "hbar": 1.0, "s": {"builtin": "product"},
        }))
        prob = cio.load_problem(path)
        assert prob.eta == 2.0
        np.testing.assert_allclose(prob.hbar.values, 1.0)
        np.testing.assert_allclose(prob.s.values[1, 1], 9 / 16)

    def test_missing_field_diagnostic(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"version": 1, "m": 2, "n": 2, "f": [1, 1]}))
        with pytest.raises(InputError, match="'g'"):
            cio.load_problem(path)

    def test_bad_json_line_diagnostic(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text('{"m": 2,\n  broken\n}')
        with pytest.raises(InputError, match="line 2"):
            cio.load_problem(path)

    def test_matrix_csv_round_trip(self, tmp_path):
        mat = np.random.default_rng(0).normal(0, 1, (3, 4))
        path = tmp_path / "m.csv"
        cio.save_matrix_csv(mat, path)
        np.testing.assert_array_equal(cio.load_matrix_csv(path), mat)


class TestFeasibleCommand:
    def test_feasible_exit_zero(self, capsys, problem_file):
        code, report = run_cli(capsys, "feasible", "--input", problem_file)
        assert code == 0
        assert report["feasible"] is True

    def test_infeasible_exit_two_with_rectangle(self, capsys, tmp_path):
        path = tmp_path / "zero.json"
        path.write_text(json.dumps({
            "version": 1, "m": 2, "n": 2,
            "f": [1.0, 1.0], "g": [1.0, 1.0], "hbar": 0.0,
            "s": {"builtin": "product"},
        }))
        code, report = run_cli(capsys, "feasible", "--input", str(path))
        assert code == 2
        assert report["rectangle"] == {"A": [0, 1], "B": [0, 1]}
        assert report["deficit"] == pytest.approx(1.0)

    def test_oracle_flag(self, capsys, problem_file):
        code, report = run_cli(capsys, "feasible", "--input", problem_file, "--oracle")
        assert code == 0 and report["feasible"] is True

    def test_scale_flag(self, capsys, tmp_path):
        path = tmp_path / "p.json"
        cio.save_problem(tiny_saturated(), path)
        code, report = run_cli(capsys, "feasible", "--input", str(path), "--scale", "0.5")
        assert code == 2
        assert report["deficit"] == pytest.approx(0.5, abs=1e-9)


class TestSolveCommand:
    def test_solve_with_oracle(self, capsys, problem_file, tmp_path):
        report_path = tmp_path / "report.json"
        code, report = run_cli(
            capsys, "solve", "--input", problem_file, "--oracle",
            "--report", str(report_path),
        )
        assert code == 0
        assert report["oracle_abs_diff"] <= 1e-9 * (1 + abs(report["value"]))
        assert json.loads(report_path.read_text())["value"] == report["value"]

    def test_solve_infeasible(self, capsys, tmp_path):
        path = tmp_path / "zero.json"
        path.write_text(json.dumps({
            "version": 1, "m": 2, "n": 2, "f": [1.0, 1.0], "g": [1.0, 1.0],
            "hbar": 0.0, "s": {"builtin": "product"},
        }))
        code, report = run_cli(capsys, "solve", "--input", str(path))
        assert code == 2

    def test_solve_then_verify_round_trip(self, capsys, problem_file, tmp_path):
        plan_path = tmp_path / "plan.csv"
        report_path = tmp_path / "solve.json"
        code, report = run_cli(
            capsys, "solve", "--input", problem_file,
            "--plan", str(plan_path), "--report", str(report_path),
        )
        assert code == 0
        pots_path = tmp_path / "uv.json"
        pots_path.write_text(json.dumps(report["potentials"]))
        code, vrep = run_cli(
            capsys, "verify", "--input", problem_file,
            "--plan", str(plan_path), "--potentials", str(pots_path),
        )
        assert code == 0
        assert vrep["optimal"] is True

    def test_verify_rejects_suboptimal(self, capsys, problem_file, tmp_path):
        plan_path = tmp_path / "plan.csv"
        code, report = run_cli(capsys, "solve", "--input", problem_file,
                               "--plan", str(plan_path))
        pots_path = tmp_path / "uv.json"
        bad = {"u": [1.0, -2.0, 0.5], "v": [0.0, 3.0, -1.0]}
        pots_path.write_text(json.dumps(bad))
        code, vrep = run_cli(
            capsys, "verify", "--input", problem_file,
            "--plan", str(plan_path), "--potentials", str(pots_path),
        )
        assert code == 3
        assert vrep["optimal"] is False


class TestDualCommand:
    def test_dual_with_primal_target(self, capsys, problem_file):
        code, report = run_cli(
            capsys, "dual", "--input", problem_file,
            "--target-from-primal", "--tol", "1e-5",
        )
        assert code == 0
        assert report["converged"] is True
        assert report["gap"] <= 1e-5
        assert "coercivity" in report
        assert report["coercivity"]["mean_lower"] <= report["coercivity"]["mean_sum"]

    def test_dual_without_target_not_converged(self, capsys, problem_file):
        code, report = run_cli(
            capsys, "dual", "--input", problem_file, "--max-iter", "50",
        )
        assert code == 3
        assert report["gap"] is None


class TestSweepCommand:
    def test_sweep_report(self, capsys, tmp_path):
        path = tmp_path / "p.json"
        cio.save_problem(product_3x3(), path)
        code, report = run_cli(
            capsys, "sweep", "--input", str(path), "--ks", "2,4,8",
        )
        assert code == 0
        assert [p["k"] for p in report["points"]] == [2.0, 4.0, 8.0]
        vals = [p["primal_value"] for p in report["points"]]
        assert vals == sorted(vals)

    def test_sweep_below_floor_is_input_error(self, capsys, tmp_path):
        path = tmp_path / "p.json"
        cio.save_problem(product_3x3(), path)
        code = main(["sweep", "--input", str(path), "--ks", "0.5"])
        assert code == 1


class TestGenerateCommand:
    def test_generate_and_consume(self, capsys, tmp_path):
        out = tmp_path / "gen.json"
        code = main(["generate", "--kind", "random_feasible", "-m", "5", "-n", "3",
                     "--seed", "11", "--out", str(out)])
        capsys.readouterr()
        assert code == 0
        code, report = run_cli(capsys, "feasible", "--input", str(out))
        assert code == 0 and report["feasible"] is True

    def test_generated_instances_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["generate", "-m", "4", "-n", "4", "--seed", "3", "--out", str(a)])
        main(["generate", "-m", "4", "-n", "4", "--seed", "3", "--out", str(b)])
        assert a.read_text() == b.read_text()


class TestDeterminism:
    def test_identical_reports_for_identical_runs(self, capsys, problem_file):
        main(["solve", "--input", problem_file])
        first = capsys.readouterr().out
        main(["solve", "--input", problem_file])
        second = capsys.readouterr().out
        assert first == second


class TestErrorPaths:
    def test_missing_file(self, capsys):
        assert main(["feasible", "--input", "/nonexistent/x.json"]) == 1

    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["feasible", "--input", str(path)]) == 1
        err = capsys.readouterr().err
        assert "line" in err

    def test_bad_tol(self, capsys, problem_file):
        assert main(["solve", "--input", problem_file, "--tol", "-1"]) == 1
