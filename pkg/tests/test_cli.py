import json
import math
from pathlib import Path

import pytest

from flopcap import EquilibriumSolution, ValidationError
from flopcap.cli import (
    EXIT_CLEARING,
    EXIT_IO,
    EXIT_OK,
    EXIT_VALIDATION,
    EXIT_VERIFY,
    cmd_verify,
    main,
    parse_scenario,
    verify_solvers,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def minimal_doc(**policy_overrides):
    policy = {"mode": "cap_and_trade", "benchmark": 0.5, "price_mode": "exogenous", "horizon": 1}
    policy.update(policy_overrides)
    return {
        "policy": policy,
        "companies": [
            {"id": "solo", "output": 10.0, "efficiency": 0.5, "cost_per_flop": 0.01}
        ],
    }


def read_rows(path):
    lines = path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    data = [l for l in lines if not l.startswith("#")]
    header = data[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in data[1:]]
    return comments, header, rows


class TestParseScenario:
    def test_minimal_scenario_with_default_echoes(self, tmp_path):
        path = write_scenario(tmp_path, minimal_doc())
        scenario, diagnostics = parse_scenario(path)
        assert scenario.companies[0].loss_exponent == 1.0
        assert scenario.policy.penalty_rate == pytest.approx(0.1)
        assert "default applied: k=1 (company solo)" in diagnostics
        assert any(d.startswith("default applied: penalty_rate=") for d in diagnostics)

    def test_invalid_gamma_rejected(self, tmp_path):
        path = write_scenario(tmp_path, minimal_doc(gamma=1.2))
        with pytest.raises(ValidationError, match=r"gamma must be in open interval \(0,1\)"):
            parse_scenario(path)

    def test_explicit_k_suppresses_diagnostic(self, tmp_path):
        doc = minimal_doc()
        doc["companies"][0]["loss_exponent"] = 2.0
        path = write_scenario(tmp_path, doc)
        scenario, diagnostics = parse_scenario(path)
        assert scenario.companies[0].loss_exponent == 2.0
        assert not any("k=" in d for d in diagnostics)

    def test_parse_error_reports_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"policy": ', encoding="utf-8")
        with pytest.raises(ValidationError, match="line 1"):
            parse_scenario(path)

    def test_unknown_keys_rejected(self, tmp_path):
        doc = minimal_doc()
        doc["companies"][0]["velocity"] = 3.0
        path = write_scenario(tmp_path, doc)
        with pytest.raises(ValidationError, match="velocity"):
            parse_scenario(path)

    def test_shipped_scenarios_parse(self):
        for scenario_file in sorted(SCENARIOS.glob("*.json")):
            scenario, _ = parse_scenario(scenario_file)
            assert scenario.companies


class TestCmdRun:
    def test_two_firm_endogenous_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["run", "--scenario", str(SCENARIOS / "two_firm_endogenous.json"), "--out", str(out)])
        assert code == EXIT_OK
        comments, header, rows = read_rows(out / "years.csv")
        assert header == [
            "year", "company", "allocated", "banked_in", "flops_allowed", "x_star",
            "y_star", "banked_out", "penalty", "utility", "energy", "co2_kg", "clearing_price",
        ]
        assert len(rows) == 2
        for row in rows:
            assert float(row["clearing_price"]) == pytest.approx(0.005625, abs=1e-8)
        assert comments and comments[0].startswith("# flopcap 0.1.0 config=")
        _, _, trade_rows = read_rows(out / "trades.csv")
        assert len(trade_rows) == 1
        assert trade_rows[0]["seller"] == "one" and trade_rows[0]["buyer"] == "two"
        assert float(trade_rows[0]["quantity"]) == pytest.approx(4.0, abs=1e-6)

    def test_no_governance_reports_closed_form(self, tmp_path):
        out = tmp_path / "out"
        code = main(["run", "--scenario", str(SCENARIOS / "no_governance.json"), "--out", str(out)])
        assert code == EXIT_OK
        _, _, rows = read_rows(out / "years.csv")
        for row in rows:
            assert float(row["x_star"]) == pytest.approx(10.0)
            assert row["flops_allowed"] == "inf"
            assert row["clearing_price"] == ""

    def test_unreadable_scenario_is_io_error(self, tmp_path, capsys):
        code = main(["run", "--scenario", str(tmp_path / "missing.json"), "--out", str(tmp_path)])
        assert code == EXIT_IO
        err = capsys.readouterr().err.strip().splitlines()[-1]
        payload = json.loads(err)
        assert payload["error"] == "io" and payload["exit"] == 1

    def test_validation_failure_exit_code(self, tmp_path, capsys):
        path = write_scenario(tmp_path, minimal_doc(gamma=1.2))
        code = main(["run", "--scenario", str(path), "--out", str(tmp_path / "out")])
        assert code == EXIT_VALIDATION
        payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert payload["field"] == "gamma"

    def test_clearing_failure_exit_code(self, tmp_path, capsys):
        doc = {
            "policy": {
                "mode": "cap_and_trade", "benchmark": 0.5,
                "price_mode": "endogenous_clearing", "horizon": 1,
            },
            "companies": [
                {"id": "fat", "output": 100.0, "efficiency": 0.5, "cost_per_flop": 0.01},
                {"id": "cat", "output": 100.0, "efficiency": 0.5, "cost_per_flop": 0.01},
            ],
        }
        path = write_scenario(tmp_path, doc)
        code = main(["run", "--scenario", str(path), "--out", str(tmp_path / "out")])
        assert code == EXIT_CLEARING

    def test_byte_identical_reruns(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        scenario = str(SCENARIOS / "five_year_banking.json")
        assert main(["run", "--scenario", scenario, "--out", str(out1)]) == EXIT_OK
        assert main(["run", "--scenario", scenario, "--out", str(out2)]) == EXIT_OK
        for name in ("years.csv", "trades.csv", "summary.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_diagnostics_echoed_to_stderr(self, tmp_path, capsys):
        path = write_scenario(tmp_path, minimal_doc())
        main(["run", "--scenario", str(path), "--out", str(tmp_path / "out")])
        err = capsys.readouterr().err
        assert "default applied: k=1 (company solo)" in err


class TestCmdSweep:
    def test_fig1a_dataset(self, tmp_path):
        code = main(["sweep", "--figure", "fig1a", "--out", str(tmp_path)])
        assert code == EXIT_OK
        _, header, rows = read_rows(tmp_path / "fig1a.csv")
        assert header == ["axis_value", "x_base", "x_ct", "u_base", "u_ct", "b"]
        assert len(rows) >= 50
        for row in rows:
            assert float(row["x_ct"]) < float(row["x_base"])
        anchor = [r for r in rows if float(r["axis_value"]) == pytest.approx(0.01, abs=1e-15)]
        assert anchor
        assert float(anchor[0]["x_base"]) == pytest.approx(10.0, abs=1e-6)
        assert float(anchor[0]["x_ct"]) == pytest.approx(7.0710678, abs=1e-6)

    def test_fig1b_price_column_tracks_sqrt_axis(self, tmp_path):
        main(["sweep", "--figure", "fig1b", "--out", str(tmp_path)])
        _, _, rows = read_rows(tmp_path / "fig1b.csv")
        for row in rows:
            assert float(row["b"]) == pytest.approx(math.sqrt(float(row["axis_value"])), rel=1e-9)

    def test_fig2a_crossover_marker(self, tmp_path):
        main(["sweep", "--figure", "fig2a", "--out", str(tmp_path)])
        comments, _, rows = read_rows(tmp_path / "fig2a.csv")
        markers = [c for c in comments if c.startswith("# crossover axis_value=")]
        assert len(markers) == 1
        crossover = float(markers[0].split("=")[1])
        assert crossover == pytest.approx(8.2842712, abs=1e-6)
        assert any(float(r["axis_value"]) == pytest.approx(crossover, rel=1e-9) for r in rows)

    def test_fig2b_reference_row(self, tmp_path):
        main(["sweep", "--figure", "fig2b", "--out", str(tmp_path)])
        _, _, rows = read_rows(tmp_path / "fig2b.csv")
        anchor = [r for r in rows if float(r["axis_value"]) == pytest.approx(0.01, abs=1e-15)]
        assert float(anchor[0]["u_ct"]) == pytest.approx(-0.1828427, abs=1e-6)
        assert float(anchor[0]["u_base"]) == pytest.approx(-0.2, abs=1e-9)

    def test_invalid_grid_is_validation_error(self, tmp_path, capsys):
        code = main([
            "sweep", "--figure", "fig1a", "--out", str(tmp_path),
            "--grid-min", "0.1", "--grid-max", "0.01",
        ])
        assert code == EXIT_VALIDATION

    def test_sweep_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["sweep", "--figure", "fig2a", "--out", str(out1)])
        main(["sweep", "--figure", "fig2a", "--out", str(out2)])
        assert (out1 / "fig2a.csv").read_bytes() == (out2 / "fig2a.csv").read_bytes()


class TestCmdVerify:
    def test_small_sample_passes(self, capsys):
        assert cmd_verify(25, seed=3) == EXIT_OK
        out = capsys.readouterr().out
        assert "verify: PASS" in out
        assert "worst oracle relative" in out

    def test_zero_sample_is_validation_error(self, capsys):
        assert main(["verify", "--sample", "0"]) == EXIT_VALIDATION

    def test_corrupted_solver_detected(self, capsys):
        def corrupt(k, a, b, flops_allowed):
            x = (k / (a + b)) ** (1.0 / (k + 1.0)) * 1.001
            return EquilibriumSolution(
                x_star=x, y_star=flops_allowed - x, utility=0.0, mu1=b, mu2=0.0
            )

        assert cmd_verify(10, seed=3, _cap_solver=corrupt) == EXIT_VERIFY
        assert "verify: FAIL" in capsys.readouterr().out

    def test_report_fields(self):
        report = verify_solvers(10, seed=11)
        assert report.ok
        assert report.worst_oracle_rel < 1e-5
        assert report.worst_kkt < 1e-9
        assert report.worst_gradient_rel < 1e-4
