"""Command-line front end: solve, equilibrium, sweep, check, simulate.

Exit codes: 0 on success, 2 on configuration errors, 3 when a solver fails to
converge (solve and equilibrium only; sweeps record per-point failures in the
CSV instead of aborting).  All CSV output uses a fixed column order, 9
significant digits, and LF line terminators, so a run is byte-reproducible
from its configuration and seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import conditions, duopoly
from .config import (
    ConfigError,
    RunConfig,
    canonical_sweep_param,
    parse_config,
    resolve_params,
    substitute_param,
)
from .duopoly import DuopolyParams
from .market import ConvergenceError, solve_optimal_barrier

SWEEP_HEADER = (
    "param,param_value,theta1_star,theta2_star,diff,barrier,J1,J2,"
    "iterations,converged,thm42_i,thm42_ii,thm42_iii,prop41"
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3


def _fmt(value) -> str:
    """Fixed CSV field formatting: 9 significant digits, lowercase booleans."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def _write_rows(rows: list[list], header: str, out: str | None) -> None:
    text = header + "\n" + "".join(",".join(_fmt(v) for v in row) + "\n" for row in rows)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_bytes(text.encode("ascii"))


@dataclass(frozen=True)
class SweepRow:
    param: str | None
    param_value: float | None
    theta1_star: float
    theta2_star: float
    diff: float
    barrier: float
    j1: float
    j2: float
    iterations: int
    converged: bool
    thm42_i: bool
    thm42_ii: bool
    thm42_iii: bool
    prop41: bool

    def as_list(self) -> list:
        return [
            self.param, self.param_value, self.theta1_star, self.theta2_star,
            self.diff, self.barrier, self.j1, self.j2, self.iterations,
            self.converged, self.thm42_i, self.thm42_ii, self.thm42_iii, self.prop41,
        ]


def _equilibrium_row(config: RunConfig, param: str | None = None,
                     value: float | None = None) -> SweepRow:
    params = resolve_params(config)
    result = duopoly.nash_equilibrium(
        params, tol=config.eq_tol, damping=config.damping, max_iter=config.eq_max_iter
    )
    thm42 = conditions.check_theorem42(params)
    prop41 = conditions.check_prop41(params)
    return SweepRow(
        param=param,
        param_value=value,
        theta1_star=result.theta1_star,
        theta2_star=result.theta2_star,
        diff=result.theta1_star - result.theta2_star,
        barrier=result.barrier,
        j1=result.profits[0],
        j2=result.profits[1],
        iterations=result.iterations,
        converged=result.converged,
        thm42_i=thm42.verdicts["i"],
        thm42_ii=thm42.verdicts["ii"],
        thm42_iii=thm42.verdicts["iii"],
        prop41=prop41.overall,
    )


def _sweep_grid(config: RunConfig) -> np.ndarray:
    if config.sweep_param is None or config.sweep_from is None \
            or config.sweep_to is None or config.sweep_steps is None:
        raise ConfigError(
            "sweep needs sweep_param, sweep_from, sweep_to and sweep_steps "
            "(or the matching command-line overrides)"
        )
    if config.sweep_steps < 2:
        raise ConfigError(f"sweep_steps must be at least 2, got {config.sweep_steps}")
    if not config.sweep_from < config.sweep_to:
        raise ConfigError(
            f"sweep_from must be below sweep_to, got {config.sweep_from} "
            f"and {config.sweep_to}"
        )
    if config.sweep_scale == "log":
        if config.sweep_from <= 0:
            raise ConfigError("log-scale sweeps need a positive sweep_from")
        return np.geomspace(config.sweep_from, config.sweep_to, config.sweep_steps)
    return np.linspace(config.sweep_from, config.sweep_to, config.sweep_steps)


def _sweep_point(task: tuple[RunConfig, str, float]) -> SweepRow:
    config, name, value = task
    return _equilibrium_row(substitute_param(config, name, value), name, value)


def run_sweep(config: RunConfig, jobs: int = 1) -> list[SweepRow]:
    """Evaluate the configured sweep grid in order; parallelism never reorders."""
    grid = _sweep_grid(config)
    name = config.sweep_param
    assert name is not None
    for value in grid:  # fail fast on any out-of-domain grid point
        resolve_params(substitute_param(config, name, float(value)))
    tasks = [(config, name, float(value)) for value in grid]
    if jobs <= 1:
        return [_sweep_point(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_point, tasks, chunksize=1))


def _condition_lines(label: str, report: conditions.ConditionReport) -> list[str]:
    lines = [f"{label}:"]
    lines.append(
        f"  I_L = [{report.interval[0]:.9g}, {report.interval[1]:.9g}]  "
        f"A1 = {report.a1:.9g}  A2 = {report.a2:.9g}  "
        f"m1 = {report.m1:.9g}  m2 = {report.m2:.9g}"
    )
    for quantity, value in (
        ("sup log-slope", report.sup_logslope),
        ("sup density", report.sup_density),
        ("sup x*density", report.sup_ell_density),
    ):
        if value is not None:
            lines.append(f"  {quantity} over I_L = {value:.9g}")
    for check in report.checks:
        status = "holds" if check.holds else "FAILS"
        lines.append(
            f"  ({check.name}) {check.lhs:.9g} {check.relation} {check.rhs:.9g}: {status}"
        )
    if report.premise_m_le_3mean is not None:
        lines.append(
            f"  premise m <= 3 E[L]: {'holds' if report.premise_m_le_3mean else 'FAILS'}"
        )
    lines.append(f"  overall: {'holds' if report.overall else 'FAILS'}")
    return lines


def _print_condition_banner(params: DuopolyParams) -> None:
    thm42 = conditions.check_theorem42(params)
    if not thm42.overall:
        failed = [name for name, ok in thm42.verdicts.items() if not ok]
        print(
            f"note: sufficient existence conditions ({', '.join(failed)}) fail; "
            "they are not necessary, result reported regardless"
        )


def cmd_solve(config: RunConfig, out: str | None) -> int:
    params = resolve_params(config, require_thetas=True)
    closed = duopoly.closed_form_barrier(params)
    solution = solve_optimal_barrier(
        duopoly.duopoly_market(params), tol=config.vi_tol, max_iter=config.vi_max_iter
    )
    iterated = solution.policy.barriers
    discrepancy = float(np.max(np.abs(iterated - closed)))
    print(f"closed-form barrier:      {closed:.9g}")
    print(f"value-iteration barriers: {np.array2string(iterated, precision=9)}")
    print(f"max discrepancy:          {discrepancy:.3e}")
    print(f"iterations:               {solution.iterations}")
    print("value table (rows = class, cols = company):")
    print(np.array2string(solution.values.values, precision=9))
    if out is not None:
        rows = [
            ["theta1", params.theta1],
            ["theta2", params.theta2],
            ["closed_form_barrier", closed],
            ["vi_barrier_class1_co1", float(iterated[0, 0])],
            ["vi_barrier_class2_co1", float(iterated[1, 0])],
            ["vi_barrier_class1_co2", float(iterated[0, 1])],
            ["vi_barrier_class2_co2", float(iterated[1, 1])],
            ["max_discrepancy", discrepancy],
            ["iterations", solution.iterations],
        ]
        _write_rows(rows, "quantity,value", out)
    return EXIT_OK


def cmd_equilibrium(config: RunConfig, out: str | None) -> int:
    params = resolve_params(config)
    row = _equilibrium_row(config)
    _print_condition_banner(params)
    print(f"theta1* = {row.theta1_star:.9g}")
    print(f"theta2* = {row.theta2_star:.9g}")
    print(f"difference = {row.diff:.9g}")
    print(f"barrier = {row.barrier:.9g}")
    print(f"profits: J1 = {row.j1:.9g}, J2 = {row.j2:.9g}")
    print(f"iterations = {row.iterations}, converged = {row.converged}")
    if row.diff == 0.0:
        ordering = "symmetric (theta1* = theta2*)"
    elif row.diff > 0.0:
        ordering = "theta1* > theta2*"
    else:
        ordering = "theta1* < theta2*"
    print(f"ordering: {ordering} at k2 = {params.k2:g}")
    _write_rows([row.as_list()], SWEEP_HEADER, out)
    if not row.converged:
        print(
            f"error: best-response iteration stopped after {row.iterations} "
            "iterations without reaching tolerance",
            file=sys.stderr,
        )
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_sweep(config: RunConfig, out: str | None, jobs: int) -> int:
    rows = run_sweep(config, jobs=jobs)
    _write_rows([row.as_list() for row in rows], SWEEP_HEADER, out)
    return EXIT_OK


def cmd_check(config: RunConfig, out: str | None) -> int:
    params = resolve_params(config)
    thm42 = conditions.check_theorem42(params)
    prop41 = conditions.check_prop41(params)
    cor_b1 = conditions.check_corollary_b1(params)
    for label, report in (
        ("existence conditions (three-part)", thm42),
        ("ordering condition", prop41),
        ("Gamma sufficient conditions", cor_b1),
    ):
        for line in _condition_lines(label, report):
            print(line)
    if out is not None:
        rows: list[list] = []
        for group, report in (("thm42", thm42), ("prop41", prop41), ("cor_b1", cor_b1)):
            rows.append([group, "interval_low", report.interval[0], "", None])
            rows.append([group, "interval_high", report.interval[1], "", None])
            for name, value in (
                ("a1", report.a1), ("a2", report.a2),
                ("m1", report.m1), ("m2", report.m2),
                ("sup_logslope", report.sup_logslope),
                ("sup_density", report.sup_density),
                ("sup_ell_density", report.sup_ell_density),
            ):
                if value is not None:
                    rows.append([group, name, value, "", None])
            for check in report.checks:
                rows.append(
                    [group, check.name, check.lhs,
                     f"{check.relation} {_fmt(check.rhs)}", check.holds]
                )
            if report.premise_m_le_3mean is not None:
                rows.append([group, "premise_m_le_3mean", None, "", report.premise_m_le_3mean])
        _write_rows(rows, "report,item,value,bound,holds", out)
    return EXIT_OK


def cmd_simulate(config: RunConfig, out: str | None) -> int:
    if config.seed is None or config.horizon is None:
        raise ConfigError("simulate needs both seed and horizon in the config")
    params = resolve_params(config, require_thetas=True)
    barrier = duopoly.closed_form_barrier(params)
    sim = duopoly.simulate_chain(params, barrier, config.horizon, config.seed)
    analytic_p = duopoly.stationary_distribution(params).p
    analytic_j = (duopoly.expected_profit(1, params), duopoly.expected_profit(2, params))

    labels = ["freq_1_1", "freq_2_1", "freq_1_2", "freq_2_2", "profit_1", "profit_2"]
    empirical = list(sim.frequencies) + list(sim.profits)
    analytic = list(analytic_p) + list(analytic_j)
    errors = list(sim.frequency_se) + list(sim.profit_se)
    rows = []
    print(f"barrier = {barrier:.9g}, horizon = {config.horizon}, seed = {config.seed}")
    for label, emp, ana, se in zip(labels, empirical, analytic, errors):
        z = (emp - ana) / se if se > 0.0 else 0.0
        print(f"{label}: empirical {emp:.9g}  analytic {ana:.9g}  se {se:.3g}  z {z:+.2f}")
        rows.append([label, emp, ana, se, z])
    _write_rows(rows, "metric,empirical,analytic,std_error,z", out)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmsgame",
        description="Reporting barriers and premium equilibria in a two-insurer bonus-malus market",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "equilibrium", "sweep", "check", "simulate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the key=value config file")
        p.add_argument("--out", default=None, help="CSV output path (default: stdout)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=int, default=None,
                       help="sweep parallelism (default: all cores)")
        p.add_argument("--theta-bound", choices=["m", "m-over-kappa"], default=None)
        p.add_argument("--param", default=None, help="sweep parameter override")
        p.add_argument("--from", dest="sweep_from", type=float, default=None)
        p.add_argument("--to", dest="sweep_to", type=float, default=None)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--scale", choices=["linear", "log"], default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = parse_config(args.config)
        overrides: dict[str, object] = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.theta_bound is not None:
            overrides["theta_bound"] = args.theta_bound
        if args.param is not None:
            overrides["sweep_param"] = canonical_sweep_param(args.param)
        if args.sweep_from is not None:
            overrides["sweep_from"] = args.sweep_from
        if args.sweep_to is not None:
            overrides["sweep_to"] = args.sweep_to
        if args.steps is not None:
            overrides["sweep_steps"] = args.steps
        if args.scale is not None:
            overrides["sweep_scale"] = args.scale
        if overrides:
            config = replace(config, **overrides)  # type: ignore[arg-type]
        out = args.out if args.out is not None else config.out
        jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)

        if args.command == "solve":
            return cmd_solve(config, out)
        if args.command == "equilibrium":
            return cmd_equilibrium(config, out)
        if args.command == "sweep":
            return cmd_sweep(config, out, jobs)
        if args.command == "check":
            return cmd_check(config, out)
        return cmd_simulate(config, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


def console_main() -> None:
    raise SystemExit(main())
