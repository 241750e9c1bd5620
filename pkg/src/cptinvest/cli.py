"""Command-line front end: single solves, sensitivity sweeps, estimation.

Sweep grids are half-open on the left, ``start:stop:count`` producing count
evenly spaced points in (start, stop].  Sweep CSVs carry one row per grid
point; ill-posed rows encode the trade as ``+inf``/``-inf`` and the prospect
as ``inf`` so downstream plotting can filter them.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass

from . import binomial as bin_solver
from . import continuous as cont_solver
from .choquet import ProspectDivergenceError
from .config import ConfigError, RunConfig
from .estimate import estimate_lognormal, read_price_csv, weekly_closes
from .market import check_no_arbitrage
from .oracle import GridSpec, verify
from .solution import Solution, SolutionKind

__all__ = ["main", "run_sweep", "solve_once", "sweep_grid", "SweepRow"]

_CONTINUOUS_AXES = ("lambda", "alpha", "beta")
_BINOMIAL_AXES = ("lambda", "eta", "zeta")


@dataclass(frozen=True)
class SweepRow:
    """One sweep grid point; candidate fields are None where undefined."""

    value: float
    ratio_buy: float | None = None
    ratio_sell: float | None = None
    theta_buy: float | None = None
    theta_sell: float | None = None
    theta_star: str = ""
    case_id: str = ""
    prospect_star: str = ""
    boundary: bool = False
    error: str | None = None


def sweep_grid(start: float, stop: float, count: int) -> list[float]:
    """count points evenly spaced over the half-open interval (start, stop]."""
    if count < 1:
        raise ValueError(f"sweep count must be >= 1, got {count}")
    if not stop > start:
        raise ValueError(f"sweep needs stop > start, got {start}:{stop}")
    step = (stop - start) / count
    return [start + step * (i + 1) for i in range(count)]


def _encode_theta(sol: Solution) -> str:
    if sol.kind is SolutionKind.PLUS_INFINITY:
        return "+inf"
    if sol.kind is SolutionKind.MINUS_INFINITY:
        return "-inf"
    return repr(float(sol.representative_theta))


def _encode_prospect(value: float) -> str:
    if value == math.inf:
        return "inf"
    if value == -math.inf:
        return "-inf"
    return repr(float(value))


def _axis_override(config: RunConfig, axis: str, value: float) -> RunConfig:
    if axis == "lambda":
        return config.replace_values(market__lambda=value)
    if axis == "alpha":
        return config.replace_values(preference__alpha=value)
    if axis == "beta":
        return config.replace_values(preference__beta=value)
    if axis == "eta":
        return config.replace_values(preference__eta_gain=value,
                                     preference__eta_loss=value)
    if axis == "zeta":
        return config.replace_values(preference__loss_aversion=value)
    raise ValueError(f"unknown sweep axis {axis!r}")


def _solve_for_mode(config: RunConfig) -> Solution:
    if config.mode == "continuous":
        return cont_solver.solve(config.portfolio, config.market, config.preference)
    if config.mode == "zero-initial":
        return cont_solver.solve_zero_initial(config.portfolio.x0, config.market,
                                              config.preference)
    return bin_solver.solve_binomial(config.portfolio.x0, config.market,
                                     config.preference)


def _continuous_row(config: RunConfig, value: float) -> SweepRow:
    if config.mode == "continuous":
        inputs = cont_solver.prepare_inputs(config.portfolio, config.market,
                                            config.preference)
        sol = cont_solver.classify(inputs)
    else:
        inputs = cont_solver.prepare_zero_initial_inputs(config.portfolio.x0,
                                                         config.market, config.preference)
        sol = cont_solver.classify_zero_initial(inputs)
    theta_buy = theta_sell = None
    if inputs.alpha < inputs.beta and inputs.ratio_sell is not None:
        theta_buy, theta_sell = cont_solver.interior_candidates(inputs)
    return SweepRow(
        value=value,
        ratio_buy=inputs.ratio_buy,
        ratio_sell=inputs.ratio_sell,
        theta_buy=theta_buy,
        theta_sell=theta_sell,
        theta_star=_encode_theta(sol),
        case_id=sol.case_id,
        prospect_star=_encode_prospect(sol.prospect),
        boundary=sol.boundary,
    )


def _binomial_row(config: RunConfig, value: float) -> SweepRow:
    inputs = bin_solver.prepare_binomial_inputs(config.portfolio.x0, config.market,
                                                config.preference)
    sol = bin_solver.solve_binomial(config.portfolio.x0, config.market,
                                    config.preference)
    theta_buy = (bin_solver.candidate_buy_trade(inputs)
                 if bin_solver.buy_candidate_applies(inputs) else None)
    theta_sell = (bin_solver.candidate_sell_trade(inputs)
                  if bin_solver.sell_candidate_applies(inputs) else None)
    return SweepRow(
        value=value,
        theta_buy=theta_buy,
        theta_sell=theta_sell,
        theta_star=_encode_theta(sol),
        case_id=sol.case_id,
        prospect_star=_encode_prospect(sol.prospect),
        boundary=sol.boundary,
    )


def run_sweep(config: RunConfig, axis: str, grid: list[float]) -> list[SweepRow]:
    """Independent solves along one parameter axis; row errors do not abort."""
    axes = _BINOMIAL_AXES if config.mode == "binomial" else _CONTINUOUS_AXES
    if axis not in axes:
        raise ValueError(f"axis {axis!r} not available in {config.mode} mode "
                         f"(choose from {axes})")
    rows = []
    for value in grid:
        try:
            point = _axis_override(config, axis, value)
            if config.mode == "binomial":
                rows.append(_binomial_row(point, value))
            else:
                rows.append(_continuous_row(point, value))
        except (ConfigError, ValueError, TypeError, ProspectDivergenceError) as exc:
            rows.append(SweepRow(value=value, error=str(exc).replace("\n", "; ")))
    return rows


def _sweep_columns(mode: str, axis: str) -> list[str]:
    if mode == "binomial":
        return [axis, "theta_buy", "theta_sell", "theta_star", "case_id",
                "prospect_star", "boundary", "error"]
    return [axis, "ratio_buy", "ratio_sell", "theta_buy", "theta_sell",
            "theta_star", "case_id", "prospect_star", "boundary", "error"]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_sweep_csv(path: str, mode: str, axis: str, rows: list[SweepRow]) -> None:
    columns = _sweep_columns(mode, axis)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            record = {
                axis: row.value,
                "ratio_buy": row.ratio_buy,
                "ratio_sell": row.ratio_sell,
                "theta_buy": row.theta_buy,
                "theta_sell": row.theta_sell,
                "theta_star": row.theta_star,
                "case_id": row.case_id,
                "prospect_star": row.prospect_star,
                "boundary": row.boundary,
                "error": row.error,
            }
            writer.writerow([_cell(record[c]) for c in columns])


def _auto_grid(config: RunConfig, sol: Solution) -> GridSpec:
    if config.grid is not None:
        return config.grid
    rep = sol.representative_theta
    reach = 10.0 if rep is None or not math.isfinite(rep) else max(10.0, 10.0 * abs(rep))
    if config.mode == "continuous":
        return GridSpec(-config.portfolio.y0, reach, 4001, 2)
    return GridSpec(-reach, reach, 4001, 2)


def solve_once(config: RunConfig) -> dict:
    """Solve one configuration; returns the printable run summary as a dict."""
    sol = _solve_for_mode(config)
    summary: dict = {
        "mode": config.mode,
        "case_id": sol.case_id,
        "kind": sol.kind.value,
        "theta_star": _encode_theta(sol),
        "prospect_star": _encode_prospect(sol.prospect),
        "boundary": sol.boundary,
    }
    if sol.kind is SolutionKind.INTERVAL:
        summary["interval"] = [_encode_prospect(sol.lo), _encode_prospect(sol.hi)]

    if config.mode == "binomial":
        inputs = bin_solver.prepare_binomial_inputs(config.portfolio.x0, config.market,
                                                    config.preference)
        pp, thr = inputs.pseudo, inputs.thresholds
        summary["diagnostics"] = {
            "pseudo_buy_up": pp.buy_up, "pseudo_buy_down": pp.buy_down,
            "pseudo_sell_up": pp.sell_up, "pseudo_sell_down": pp.sell_down,
            "threshold_buy_unbounded": thr.buy_unbounded,
            "threshold_buy_interior": thr.buy_interior,
            "threshold_sell_unbounded": thr.sell_unbounded,
            "threshold_sell_interior": thr.sell_interior,
            "no_trade_cost_level": bin_solver.lambda_bar(config.market),
        }
    else:
        if config.mode == "continuous":
            inputs = cont_solver.prepare_inputs(config.portfolio, config.market,
                                                config.preference)
        else:
            inputs = cont_solver.prepare_zero_initial_inputs(
                config.portfolio.x0, config.market, config.preference)
        diag = {
            "p_loss_buy": inputs.p_loss_buy,
            "p_loss_sell": inputs.p_loss_sell,
            "gain_buy": inputs.gain_buy, "loss_buy": inputs.loss_buy,
            "gain_sell": inputs.gain_sell, "loss_sell": inputs.loss_sell,
            "ratio_buy": inputs.ratio_buy, "ratio_sell": inputs.ratio_sell,
        }
        if inputs.alpha < inputs.beta and inputs.ratio_sell is not None:
            theta_buy, theta_sell = cont_solver.interior_candidates(inputs)
            diag["theta_buy"] = theta_buy
            diag["theta_sell"] = theta_sell
        summary["diagnostics"] = diag

    if config.oracle:
        report = verify(sol, config.portfolio, config.market, config.preference,
                        _auto_grid(config, sol))
        summary["oracle"] = {
            "agreement": report.agreement,
            "detail": report.detail,
            "argmax_theta": report.argmax_theta,
            "max_value": report.max_value,
        }
    return summary


def _print_summary(summary: dict) -> None:
    print(f"mode:        {summary['mode']}")
    print(f"case:        {summary['case_id']}{'  [boundary]' if summary['boundary'] else ''}")
    print(f"theta*:      {summary['theta_star']}")
    print(f"prospect*:   {summary['prospect_star']}")
    for key, value in summary.get("diagnostics", {}).items():
        print(f"  {key}: {value}")
    if "oracle" in summary:
        print(f"oracle:      {summary['oracle']['agreement']} "
              f"({summary['oracle']['detail']})")


def _write_solve_csv(path: str, summary: dict) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["key", "value"])
        writer.writerow(["mode", summary["mode"]])
        writer.writerow(["case_id", summary["case_id"]])
        writer.writerow(["theta_star", summary["theta_star"]])
        writer.writerow(["prospect_star", summary["prospect_star"]])
        writer.writerow(["boundary", _cell(summary["boundary"])])
        for key, value in summary.get("diagnostics", {}).items():
            writer.writerow([key, _cell(value)])
        if "oracle" in summary:
            writer.writerow(["oracle_agreement", summary["oracle"]["agreement"]])


def _parse_sweep_axis(text: str) -> tuple[str, float, float, int]:
    try:
        axis, rest = text.split("=", 1)
        start, stop, count = rest.split(":")
        return axis.strip(), float(start), float(stop), int(count)
    except ValueError as exc:
        raise ValueError(
            f"sweep must look like axis=start:stop:count, got {text!r}") from exc


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cptinvest",
        description="Optimal single-period investment under transaction costs "
                    "for prospect-theory preferences",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one configuration")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--out", help="write the run CSV here")
    p_solve.add_argument("--format", choices=["csv", "summary"], default=None)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter axis")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--sweep", required=True,
                         help="axis=start:stop:count, count points in (start, stop]")
    p_sweep.add_argument("--out", help="write the sweep CSV here")
    p_sweep.add_argument("--format", choices=["csv", "summary"], default=None)

    p_est = sub.add_parser("estimate", help="estimate log-return parameters from prices")
    p_est.add_argument("--prices", required=True, help="CSV file with header date,close")
    p_est.add_argument("--weekly", action="store_true",
                       help="aggregate to the last close of each calendar week first")
    p_est.add_argument("--out", help="write the estimate CSV here")

    p_verify = sub.add_parser("verify", help="solve and certify with the grid oracle")
    p_verify.add_argument("--config", required=True)

    p_arb = sub.add_parser("check-arb", help="check the no-arbitrage condition")
    p_arb.add_argument("--config", required=True)

    args = parser.parse_args(argv)

    try:
        if args.command == "estimate":
            rows = read_price_csv(args.prices)
            if args.weekly:
                rows = weekly_closes(rows)
            est = estimate_lognormal(rows)
            print(f"mu:     {est.mu!r}")
            print(f"sigma:  {est.sigma!r}")
            print(f"n_obs:  {est.n_observations}")
            if args.out:
                with open(args.out, "w", newline="") as handle:
                    writer = csv.writer(handle)
                    writer.writerow(["mu", "sigma", "n_obs"])
                    writer.writerow([repr(est.mu), repr(est.sigma), est.n_observations])
            return 0

        config = RunConfig.from_file(args.config)

        if args.command == "check-arb":
            arb = check_no_arbitrage(config.market)
            print("pass" if arb.passed else f"fail: {arb.reason}")
            return 0 if arb.passed else 2

        if args.command == "verify":
            config = RunConfig.from_dict({**config.to_dict(),
                                          "solve": {**config.data["solve"], "oracle": True}})
            summary = solve_once(config)
            _print_summary(summary)
            return 0 if summary["oracle"]["agreement"] == "match" else 3

        if args.command == "solve":
            summary = solve_once(config)
            _print_summary(summary)
            out = args.out or config.data["output"]["csv"]
            if out:
                _write_solve_csv(out, summary)
            if config.oracle and summary["oracle"]["agreement"] != "match":
                return 3
            return 0

        # sweep
        axis, start, stop, count = _parse_sweep_axis(args.sweep)
        grid = sweep_grid(start, stop, count)
        rows = run_sweep(config, axis, grid)
        failures = sum(1 for r in rows if r.error)
        out = args.out or config.data["output"]["csv"]
        if out:
            write_sweep_csv(out, config.mode, axis, rows)
            print(f"wrote {len(rows)} rows to {out} ({failures} row errors)")
        else:
            for row in rows:
                print(f"{axis}={row.value!r} case={row.case_id} theta*={row.theta_star} "
                      f"prospect*={row.prospect_star}"
                      + (f" ERROR: {row.error}" if row.error else ""))
        return 0 if failures == 0 else 2

    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
