"""End-to-end tests of the command-line interface: output schemas,
provenance headers, determinism, and exit codes."""
import json

import pytest

from sdiqrac.cli import main


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBounds:
    def test_unbiased_pair(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", "--eps1", "0", "--eps2", "0")
        assert code == 0
        payload = json.loads(out)
        assert payload["E_c"] == 0.75
        assert payload["E_q"] == pytest.approx(0.853553390593, abs=1e-10)
        assert payload["H_at_Eq"] == pytest.approx(0.228446696836, abs=1e-10)
        assert payload["feasible"] is True
        assert payload["branch"] == "t<=1"
        assert set(payload["provenance"]) == {"version", "seed",
                                              "config_hash"}

    def test_infeasible_pair(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", "--eps1", "0.2",
                               "--eps2", "0.2")
        assert code == 0
        payload = json.loads(out)
        assert payload["feasible"] is False

    def test_aligned_branch_nulls(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", "--eps1", "0.4",
                               "--eps2", "0.4")
        payload = json.loads(out)
        assert code == 0
        assert payload["branch"] == "t>1"
        assert payload["p_min"] is None and payload["H_at_Eq"] is None

    def test_out_of_range_bias_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "bounds", "--eps1", "0.6",
                               "--eps2", "0")
        assert code == 2
        assert "eps1" in err


class TestRegion:
    def test_scan_structure(self, capsys, tmp_path):
        out_file = tmp_path / "region.csv"
        code, _, _ = run_cli(capsys, "region", "--grid", "12",
                             "--eps-max", "0.3", "-o", str(out_file))
        assert code == 0
        lines = out_file.read_text().strip().split("\n")
        assert lines[0].startswith("# sdiqrac ")
        assert lines[1] == "eps1,eps2,feasible,E_c,E_q,H_at_Eq"
        assert len(lines) == 2 + 144
        first = dict(zip(lines[1].split(","), lines[2].split(",")))
        assert first["feasible"] == "true"

    def test_boundary_shows_in_the_scan(self, capsys):
        code, out, _ = run_cli(capsys, "region", "--grid", "41",
                               "--eps-max", "0.28")
        rows = [line.split(",") for line in out.strip().split("\n")[2:]]
        diag = {float(r[0]): r[2] for r in rows if r[0] == r[1]}
        assert diag[0.133] == "true" and diag[0.14] == "false"
        axis = {float(r[0]): r[2] for r in rows if float(r[1]) == 0.0}
        assert axis[0.217] == "true" and axis[0.224] == "false"

    def test_byte_identical_reruns(self, capsys):
        _, out_a, _ = run_cli(capsys, "region", "--grid", "6",
                              "--eps-max", "0.4")
        _, out_b, _ = run_cli(capsys, "region", "--grid", "6",
                              "--eps-max", "0.4")
        assert out_a == out_b


class TestTradeoff:
    def test_curve_output(self, capsys):
        code, out, _ = run_cli(capsys, "tradeoff", "--eps1", "0",
                               "--eps2", "0", "--points", "17")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("# sdiqrac ")
        header = json.loads(lines[1][2:])
        assert header["E_q"] == pytest.approx(0.853553390593, abs=1e-9)
        assert header["convexified"] is False
        assert lines[2] == "E,p,H,case,alpha_star"
        rows = [line.split(",") for line in lines[3:]]
        assert len(rows) == 17
        assert float(rows[0][2]) == 0.0
        assert float(rows[-1][0]) == pytest.approx(0.853553, abs=1e-5)
        assert float(rows[-1][2]) == pytest.approx(0.228443, abs=1e-5)

    def test_infeasible_pair_exits_4(self, capsys):
        code, _, err = run_cli(capsys, "tradeoff", "--eps1", "0.3",
                               "--eps2", "0.3")
        assert code == 4
        assert "infeasible" in err

    def test_byte_identical_reruns(self, capsys):
        _, out_a, _ = run_cli(capsys, "tradeoff", "--eps1", "0.05",
                              "--eps2", "0.05", "--points", "9")
        _, out_b, _ = run_cli(capsys, "tradeoff", "--eps1", "0.05",
                              "--eps2", "0.05", "--points", "9")
        assert out_a == out_b


class TestSimulate:
    def test_summary_schema(self, capsys, tmp_path):
        log_file = tmp_path / "rounds.csv"
        code, out, _ = run_cli(
            capsys, "simulate", "--eps1", "0", "--eps2", "0",
            "--trials", "20000", "--seed", "7",
            "--log-trials", str(log_file),
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["trials"] == 20000
        assert abs(payload["E_hat"] - 0.853553) <= 4 * payload["std_err"]
        assert payload["empirical_min_entropy"] is not None
        assert len(payload["lambda_weights"]) == 8
        log_lines = log_file.read_text().strip().split("\n")
        assert log_lines[0] == "lambda,a0,a1,y,b"
        assert len(log_lines) == 20001

    def test_deterministic_given_seed(self, capsys):
        args = ("simulate", "--eps1", "0.05", "--eps2", "0.05",
                "--trials", "5000", "--seed", "3")
        _, out_a, _ = run_cli(capsys, *args)
        _, out_b, _ = run_cli(capsys, *args)
        assert out_a == out_b

    def test_observer_view(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--eps1", "0", "--eps2", "0",
            "--trials", "1000", "--seed", "1", "--observer-view",
        )
        assert code == 0
        payload = json.loads(out)
        assert "counts" not in payload and "lambda_counts" not in payload

    def test_parametrized_mixture(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--eps1", "0.05", "--eps2", "0.05",
            "--trials", "5000", "--seed", "2",
            "--dist", "parametrized", "--dist-seed", "6",
        )
        assert code == 0
        weights = json.loads(out)["lambda_weights"]
        assert weights != [0.125] * 8
        assert sum(weights) == pytest.approx(1.0, abs=1e-9)


class TestVerify:
    def test_classical_suite_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "classical",
                               "--grid", "3", "--eps-cap", "0.1")
        assert code == 0
        report = json.loads(out)
        assert report["ok"] is True
        assert len(report["suites"]["classical"]["points"]) == 9

    def test_quantum_suite_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "quantum",
                               "--grid", "2", "--eps-cap", "0.1",
                               "--budget", "100000")
        assert code == 0
        assert json.loads(out)["suites"]["quantum"]["ok"] is True

    def test_impossible_tolerance_exits_3(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "classical",
                               "--grid", "2", "--eps-cap", "0.1",
                               "--tol", "-1")
        assert code == 3
        assert json.loads(out)["ok"] is False

    def test_thread_env_var(self, capsys, monkeypatch):
        monkeypatch.setenv("SDIQRAC_THREADS", "2")
        code, out, _ = run_cli(capsys, "verify", "--suite", "classical",
                               "--grid", "2", "--eps-cap", "0.1")
        assert code == 0
        assert json.loads(out)["ok"] is True
