import csv
import json
import math

import pytest

from cptinvest.cli import main, run_sweep, solve_once, sweep_grid, write_sweep_csv
from cptinvest.config import DEFAULT_CONFIG, ConfigError, RunConfig

BULL = {
    "market": {"r": 0.05, "lambda": 0.01,
               "returns": {"kind": "lognormal", "mu": 0.13, "sigma": 0.20}},
    "preference": {"utility": "power", "alpha": 0.88, "beta": 0.88,
                   "loss_aversion": 2.25, "weighting": "tk",
                   "gamma": 0.61, "delta": 0.69},
    "portfolio": {"x0": 1.0, "y0": 1.0},
    "solve": {"mode": "continuous", "oracle": False},
}

BINOM = {
    "market": {"r": 0.0, "lambda": 0.02,
               "returns": {"kind": "binomial", "u": 1.5, "d": 0.95, "p": 0.55}},
    "preference": {"utility": "exponential", "eta_gain": 1.5, "eta_loss": 1.5,
                   "loss_aversion": 1.2, "weighting": "tk",
                   "gamma": 0.61, "delta": 0.69},
    "portfolio": {"x0": 1.0, "y0": 0.0},
    "solve": {"mode": "binomial", "oracle": False},
}


class TestConfig:
    def test_defaults_fill_in(self):
        config = RunConfig.from_dict({})
        assert config.mode == "continuous"
        assert config.market.lam == DEFAULT_CONFIG["market"]["lambda"]

    def test_round_trip_reproduces_results(self):
        config = RunConfig.from_dict(BULL)
        text = config.to_json()
        reloaded = RunConfig.from_json(text)
        assert reloaded.to_dict() == config.to_dict()
        assert solve_once(reloaded) == solve_once(config)

    def test_all_violations_reported(self):
        bad = {
            "market": {"r": -0.1, "lambda": 1.5,
                       "returns": {"kind": "binomial", "u": 0.9, "d": 1.2, "p": 0.5}},
            "preference": {"utility": "power", "alpha": 0.9, "beta": 0.8,
                           "loss_aversion": 0.5},
            "solve": {"mode": "sideways"},
            "output": {"format": "yaml"},
        }
        with pytest.raises(ConfigError) as err:
            RunConfig.from_dict(bad)
        text = str(err.value)
        assert "u > d" in text or "market.returns" in text
        assert "alpha" in text
        assert "solve.mode" in text
        assert "output.format" in text

    def test_mode_preconditions_checked(self):
        bad = json.loads(json.dumps(BULL))
        bad["portfolio"]["y0"] = 0.0
        with pytest.raises(ConfigError, match="y0 > 0"):
            RunConfig.from_dict(bad)
        bad = json.loads(json.dumps(BINOM))
        bad["preference"] = BULL["preference"]
        with pytest.raises(ConfigError, match="exponential"):
            RunConfig.from_dict(bad)

    def test_arbitrage_checked_at_validation(self):
        bad = json.loads(json.dumps(BINOM))
        bad["market"]["returns"] = {"kind": "binomial", "u": 1.04, "d": 1.02, "p": 0.5}
        bad["market"]["r"] = 0.05
        bad["market"]["lambda"] = 0.0
        with pytest.raises(ConfigError, match="no-arbitrage"):
            RunConfig.from_dict(bad)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            RunConfig.from_dict({"market": {"mu": 0.1}})


class TestSweep:
    def test_grid_is_left_open_right_closed(self):
        grid = sweep_grid(0.0, 0.05, 5)
        assert grid[0] == pytest.approx(0.01)
        assert grid[-1] == pytest.approx(0.05)
        assert len(grid) == 5

    def test_rows_match_independent_solves(self):
        config = RunConfig.from_dict(BULL)
        grid = sweep_grid(0.0, 0.02, 4)
        rows = run_sweep(config, "lambda", grid)
        for value, row in zip(grid, rows):
            point = config.replace_values(market__lambda=value)
            summary = solve_once(point)
            assert row.case_id == summary["case_id"]
            assert row.theta_star == summary["theta_star"]
            assert row.prospect_star == summary["prospect_star"]

    def test_row_errors_recorded_not_raised(self):
        config = RunConfig.from_dict(BULL)
        # alpha sweeping above beta must fail per-row, not abort
        rows = run_sweep(config, "alpha", [0.5, 0.95])
        assert rows[0].error is None
        assert rows[1].error is not None and "alpha" in rows[1].error

    def test_axis_validated_per_mode(self):
        config = RunConfig.from_dict(BINOM)
        with pytest.raises(ValueError, match="axis"):
            run_sweep(config, "alpha", [0.5])
        rows = run_sweep(config, "zeta", [1.1, 1.3])
        assert all(row.error is None for row in rows)

    def test_csv_round_trip_and_tokens(self, tmp_path):
        config = RunConfig.from_dict(BULL)
        rows = run_sweep(config, "lambda", sweep_grid(0.0, 0.02, 4))
        out = tmp_path / "sweep.csv"
        write_sweep_csv(str(out), config.mode, "lambda", rows)
        with open(out, newline="") as handle:
            records = list(csv.DictReader(handle))
        assert len(records) == 4
        assert records[0]["case_id"].startswith("T3.1-")
        # the bull market is ill-posed at small costs: literal tokens
        assert records[0]["theta_star"] == "+inf"
        assert records[0]["prospect_star"] == "inf"
        # numeric columns parse back and the buy ratio declines with costs
        ratios = [float(r["ratio_buy"]) for r in records]
        assert all(b <= a + 1e-9 for a, b in zip(ratios, ratios[1:]))


class TestCommandLine:
    def _write(self, tmp_path, payload, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    def test_solve_command(self, tmp_path, capsys):
        code = main(["solve", "--config", self._write(tmp_path, BINOM)])
        out = capsys.readouterr().out
        assert code == 0
        assert "case:" in out and "T4.3" in out

    def test_solve_writes_csv(self, tmp_path):
        out = tmp_path / "run.csv"
        code = main(["solve", "--config", self._write(tmp_path, BINOM),
                     "--out", str(out)])
        assert code == 0
        with open(out, newline="") as handle:
            records = {row["key"]: row["value"] for row in csv.DictReader(handle)}
        assert records["mode"] == "binomial"
        assert records["case_id"].startswith("T4.3-")

    def test_verify_command_matches(self, tmp_path, capsys):
        code = main(["verify", "--config", self._write(tmp_path, BINOM)])
        out = capsys.readouterr().out
        assert code == 0
        assert "match" in out

    def test_check_arb_command(self, tmp_path, capsys):
        code = main(["check-arb", "--config", self._write(tmp_path, BINOM)])
        assert code == 0
        bad = json.loads(json.dumps(BINOM))
        bad["market"]["returns"] = {"kind": "binomial", "u": 1.04, "d": 1.02, "p": 0.5}
        bad["market"]["r"] = 0.05
        bad["market"]["lambda"] = 0.0
        code = main(["check-arb", "--config", self._write(tmp_path, bad, "bad.json")])
        assert code == 2

    def test_sweep_command(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--config", self._write(tmp_path, BINOM),
                     "--sweep", "lambda=0:0.2:8", "--out", str(out)])
        assert code == 0
        with open(out, newline="") as handle:
            records = list(csv.DictReader(handle))
        assert len(records) == 8
        assert list(records[0])[0] == "lambda"

    def test_invalid_config_exits_nonzero(self, tmp_path, capsys):
        code = main(["solve", "--config",
                     self._write(tmp_path, {"solve": {"mode": "nope"}})])
        assert code == 2
        assert "solve.mode" in capsys.readouterr().err

    def test_estimate_command(self, tmp_path, capsys):
        prices = tmp_path / "px.csv"
        prices.write_text(
            "date,close\n2024-01-01,100\n2024-01-03,101\n2024-01-08,102\n"
            "2024-01-12,103\n2024-01-17,104\n"
        )
        code = main(["estimate", "--prices", str(prices), "--weekly"])
        out = capsys.readouterr().out
        assert code == 0
        assert "mu:" in out and "n_obs:  2" in out
