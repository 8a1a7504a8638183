"""Command-line harness: presets, sweeps, audits, and machine-readable output.

Subcommands cover the full pipeline: reservation points, both solvers,
reward assignment, menu audits, welfare accounting, the two-type sweep,
packaged scenario presets, the equilibrium check, the expectation
non-equivalence demo, and plot-data export.  All CSV output uses a fixed
10-significant-digit format so identical configs produce byte-identical
files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .audit import AuditReport, check_full
from .complete_info import solve_complete
from .config import (
    PRESET_NAMES,
    ScenarioConfig,
    load_config_file,
    load_preset,
)
from .equilibrium import check_pbe
from .errors import (
    ConfigError,
    ContractForgeError,
    DomainError,
    EnumerationCapError,
)
from .model import ModelEconomy, clamp_threshold, model_value
from .population import Population
from .reservation import reservations
from .rewards import assign, expected_bound
from .solver import ContractMenu, SolveReport, solve_incomplete
from .welfare import WelfareReport, information_rent, welfare_report

__all__ = ["main", "run_demo_nonequivalence"]


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    return f"{float(x):.10g}"


def _emit(text: str, out_dir: str | None, filename: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, filename)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _parse_counts(text: str, expected: int) -> tuple[int, ...]:
    try:
        counts = tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"realization must be comma-separated integers: {text!r}") from exc
    if len(counts) != expected:
        raise ConfigError(f"realization needs {expected} entries, got {len(counts)}")
    return counts


def _parse_floats(text: str, expected: int, what: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"{what} must be comma-separated numbers: {text!r}") from exc
    if len(values) != expected:
        raise ConfigError(f"{what} needs {expected} entries, got {len(values)}")
    return values


def _load_menu_file(path: str, expected: int) -> ContractMenu:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read menu file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"menu file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {"rewards", "contributions"}:
        raise ConfigError(
            "menu file must be an object with exactly the fields "
            "'rewards' and 'contributions'"
        )
    rewards = doc["rewards"]
    contributions = doc["contributions"]
    if (
        not isinstance(rewards, list)
        or not isinstance(contributions, list)
        or len(rewards) != expected
        or len(contributions) != expected
    ):
        raise ConfigError(f"menu file must hold two arrays of length {expected}")
    return ContractMenu(
        rewards=tuple(float(x) for x in rewards),
        contributions=tuple(float(x) for x in contributions),
    )


def _menu_csv(pop: Population, menu: ContractMenu) -> str:
    res = reservations(pop)
    lines = ["type,cost,prob,m,t,m_bar,f,rent"]
    for i in range(pop.I):
        rent = information_rent(pop, menu, i)
        lines.append(
            ",".join(
                [
                    str(i + 1),
                    _fmt(pop.costs[i]),
                    _fmt(pop.probs[i]),
                    _fmt(menu.contributions[i]),
                    _fmt(menu.rewards[i]),
                    _fmt(res[i].m_bar),
                    _fmt(res[i].f),
                    _fmt(rent),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _audit_dict(report: AuditReport) -> dict:
    return {
        "ir_residuals": list(report.ir_residuals),
        "ic_matrix": [list(row) for row in report.ic_matrix],
        "bc_residuals": list(report.bc_residuals),
        "dac_binding": list(report.dac_binding),
        "ordering_ok": report.ordering_ok,
        "efficiency_gap": report.efficiency_gap,
        "break_even_gap": report.break_even_gap,
        "verdict": report.verdict,
    }


def _report_json(
    solve: SolveReport, audit: AuditReport, welfare: WelfareReport
) -> str:
    return _json_text(
        {
            "objective": solve.objective,
            "iterations": solve.iterations,
            "max_constraint_violation": solve.max_constraint_violation,
            "stationarity_residual": solve.stationarity_residual,
            "status": solve.status,
            "residuals": _audit_dict(audit),
            "welfare": {
                "information_cost": welfare.information_cost,
                "information_rent": list(welfare.information_rent),
            },
        }
    )


def _solve_pipeline(cfg: ScenarioConfig, tol: float, prefix: str,
                    out_dir: str | None) -> int:
    pop = cfg.population
    menu, report = solve_incomplete(pop, cfg.enumeration_cap, cfg.outer_cap)
    audit = check_full(pop, menu, tol=tol, cap=cfg.enumeration_cap)
    welfare = welfare_report(pop, menu, cap=cfg.enumeration_cap)
    _emit(_menu_csv(pop, menu), out_dir, f"{prefix}menu.csv")
    _emit(_report_json(report, audit, welfare), out_dir, f"{prefix}report.json")
    return 0 if report.status == "optimal" else 1


def cmd_reservation(cfg: ScenarioConfig, args) -> int:
    pop = cfg.population
    res = reservations(pop)
    lines = ["type,cost,m_bar,f"]
    for i in range(pop.I):
        lines.append(
            ",".join(
                [str(i + 1), _fmt(pop.costs[i]), _fmt(res[i].m_bar), _fmt(res[i].f)]
            )
        )
    _emit("\n".join(lines) + "\n", args.out, "reservation.csv")
    return 0


def cmd_solve(cfg: ScenarioConfig, args) -> int:
    pop = cfg.population
    if args.mode == "complete":
        if args.realization is None:
            raise ConfigError("solve --mode complete requires --realization")
        counts = _parse_counts(args.realization, pop.I)
        contract = solve_complete(pop, counts, cfg.surpluses)
        doc = {
            "contributions": {
                str(i + 1): contract.contributions[i]
                for i in sorted(contract.contributions)
            },
            "reward_accuracy": contract.reward_accuracy,
            "reward_value": contract.reward_value,
        }
        _emit(_json_text(doc), args.out, "complete.json")
        return 0
    return _solve_pipeline(cfg, args.tol, "", args.out)


def cmd_assign(cfg: ScenarioConfig, args) -> int:
    pop = cfg.population
    if args.menu is None:
        raise ConfigError("assign requires --menu")
    if args.realization is None:
        raise ConfigError("assign requires --realization")
    menu = _load_menu_file(args.menu, pop.I)
    counts = _parse_counts(args.realization, pop.I)
    realized = assign(pop, menu, counts, cap=cfg.enumeration_cap)
    slope = pop.economy.valuation.slope
    doc = {
        "counts": list(realized.counts),
        "rewards": list(realized.rewards),
        "reward_values": [slope * r for r in realized.rewards],
        "collective_accuracy": realized.collective_accuracy,
    }
    _emit(_json_text(doc), args.out, "assigned.json")
    return 0


def cmd_audit(cfg: ScenarioConfig, args) -> int:
    pop = cfg.population
    if args.menu is None:
        raise ConfigError("audit requires --menu")
    menu = _load_menu_file(args.menu, pop.I)
    report = check_full(pop, menu, tol=args.tol, cap=cfg.enumeration_cap)
    _emit(_json_text(_audit_dict(report)), args.out, "audit.json")
    return 0 if report.verdict != "infeasible" else 1


def cmd_welfare(cfg: ScenarioConfig, args) -> int:
    pop = cfg.population
    code = 0
    if args.menu is not None:
        menu = _load_menu_file(args.menu, pop.I)
    else:
        menu, report = solve_incomplete(pop, cfg.enumeration_cap, cfg.outer_cap)
        code = 0 if report.status == "optimal" else 1
    welfare = welfare_report(pop, menu, cap=cfg.enumeration_cap)
    doc = {
        "information_cost": welfare.information_cost,
        "information_rent": list(welfare.information_rent),
    }
    _emit(_json_text(doc), args.out, "welfare.json")
    return code


def _sweep_cell(base: Population, p1: float, n: int, cap: int, outer_cap: int,
                cache: dict) -> tuple:
    pop = Population(
        costs=base.costs,
        probs=(p1, 1.0 - p1),
        N=n,
        economy=base.economy,
    )
    menu, report = solve_incomplete(pop, cap, outer_cap)
    welfare = welfare_report(pop, menu, cap=cap, cache=cache)
    m1, m2 = menu.contributions
    t1, t2 = menu.rewards
    pooling = abs(m2 - m1) <= 1e-6 * max(1.0, m2)
    return (
        p1,
        n,
        m1,
        m2,
        t1,
        t2,
        pooling,
        welfare.information_cost,
        welfare.information_rent[0],
        welfare.information_rent[1],
        report.status,
    )


def cmd_sweep(cfg: ScenarioConfig, args) -> int:
    pop = cfg.population
    if pop.I != 2:
        raise ConfigError("sweep requires a two-type population")
    grids = cfg.sweep
    if grids is None:
        base = load_preset("sweep")
        grids = base.sweep
    cells = [(p1, n) for p1 in grids.p1_grid for n in grids.n_grid]
    cache: dict = {}
    env = os.environ.get("CONTRACT_FORGE_THREADS")
    workers = 1
    if env:
        try:
            workers = max(1, min(len(cells), int(env)))
        except ValueError as exc:
            raise ConfigError(
                f"CONTRACT_FORGE_THREADS must be an integer, got {env!r}"
            ) from exc
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(
                pool.map(
                    lambda cell: _sweep_cell(
                        pop, cell[0], cell[1], cfg.enumeration_cap,
                        cfg.outer_cap, cache
                    ),
                    cells,
                )
            )
    else:
        rows = [
            _sweep_cell(pop, p1, n, cfg.enumeration_cap, cfg.outer_cap, cache)
            for p1, n in cells
        ]
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = ["p1,N,m1,m2,t1,t2,pooling,information_cost,rent1,rent2"]
    all_optimal = True
    for row in rows:
        *data, status = row
        if status != "optimal":
            all_optimal = False
        p1, n, m1, m2, t1, t2, pooling, cost, r1, r2 = data
        lines.append(
            ",".join(
                [
                    _fmt(p1),
                    str(n),
                    _fmt(m1),
                    _fmt(m2),
                    _fmt(t1),
                    _fmt(t2),
                    _fmt(pooling),
                    _fmt(cost),
                    _fmt(r1),
                    _fmt(r2),
                ]
            )
        )
    _emit("\n".join(lines) + "\n", args.out, "sweep.csv")
    return 0 if all_optimal else 1


def cmd_scenario(args) -> int:
    cfg = load_preset(args.name)
    cfg = _apply_overrides(cfg, args)
    out_dir = args.out if args.out is not None else cfg.output_dir
    if out_dir is None:
        out_dir = "."
    return _solve_pipeline(cfg, args.tol, f"{args.name}_", out_dir)


def cmd_pbe_check(cfg: ScenarioConfig, args) -> int:
    pop = cfg.population
    if args.profile is None:
        profile = (0.0,) * pop.I
    else:
        profile = _parse_floats(args.profile, pop.I, "profile")
    report = check_pbe(pop, profile, cap=cfg.enumeration_cap)
    verdict = report.classification
    if verdict == "not_equilibrium" and all(x == 0.0 for x in profile):
        # no positive-contribution profile can be an equilibrium either,
        # so a failed zero profile rules out equilibria altogether
        verdict = "no_equilibrium"
    doc = {
        "profile": list(profile),
        "best_response": list(report.best_response),
        "gain": list(report.gain),
        "classification": report.classification,
        "verdict": verdict,
    }
    _emit(_json_text(doc), args.out, "pbe.json")
    return 0


def run_demo_nonequivalence() -> dict:
    """Maximize an expected quantity and its expected square root; they differ.

    Two participants, two types with probabilities 0.6 and 0.4; the group
    output is n1*m1 + n2*(5 - m1).  The expected output is linear in m1 and
    peaks at the boundary, while the expected square root peaks strictly
    inside the interval.
    """
    weights = {(2, 0): 0.36, (1, 1): 0.48, (0, 2): 0.16}

    def group_output(m1: float, counts: tuple[int, int]) -> float:
        return counts[0] * m1 + counts[1] * (5.0 - m1)

    def expected_linear(m1: float) -> float:
        return sum(w * group_output(m1, c) for c, w in weights.items())

    def expected_sqrt(m1: float) -> float:
        return sum(w * math.sqrt(group_output(m1, c)) for c, w in weights.items())

    grid = np.linspace(0.0, 5.0, 5001)
    linear_vals = [expected_linear(m) for m in grid]
    linear_argmax = float(grid[int(np.argmax(linear_vals))])

    from .numerics import golden_max

    sqrt_argmax = golden_max(expected_sqrt, 0.0, 5.0, rel_tol=1e-12)
    return {
        "linear_argmax": linear_argmax,
        "linear_value": expected_linear(linear_argmax),
        "sqrt_argmax": sqrt_argmax,
        "sqrt_value": expected_sqrt(sqrt_argmax),
        "argmaxes_differ": abs(linear_argmax - sqrt_argmax) > 1e-6,
    }


def cmd_demo(args) -> int:
    result = run_demo_nonequivalence()
    print(
        "expected group output is maximized at m1 = "
        f"{_fmt(result['linear_argmax'])} (value {_fmt(result['linear_value'])})"
    )
    print(
        "expected sqrt of group output is maximized at m1 = "
        f"{_fmt(result['sqrt_argmax'])} (value {_fmt(result['sqrt_value'])})"
    )
    print(f"maximizers differ: {_fmt(result['argmaxes_differ'])}")
    return 0


def cmd_plotdata(cfg: ScenarioConfig, args) -> int:
    pop = cfg.population
    menu, report = solve_incomplete(pop, cfg.enumeration_cap, cfg.outer_cap)
    res = reservations(pop)
    econ = pop.economy
    m0 = clamp_threshold(econ.accuracy)
    m_max = 1.2 * max(
        max(menu.contributions), max(r.m_bar for r in res), 2.0 * m0
    )
    lines = ["series,x,y"]

    def add(series: str, x: float, y: float) -> None:
        lines.append(f"{series},{_fmt(x)},{_fmt(y)}")

    for x in np.linspace(0.0, m_max, 200):
        add("value_curve", float(x), model_value(econ, float(x)))
    for i in range(pop.I):
        series = f"reservation_line_{i + 1}"
        for x in (0.0, res[i].m_bar, m_max):
            add(series, x, res[i].f + pop.costs[i] * x)
        series = f"isoprofit_line_{i + 1}"
        utility = menu.rewards[i] - pop.costs[i] * menu.contributions[i]
        for x in (0.0, menu.contributions[i], m_max):
            add(series, x, utility + pop.costs[i] * x)
    top_bound = expected_bound(pop, menu, pop.I - 1, cap=cfg.enumeration_cap)
    for x in (0.0, menu.contributions[pop.I - 1], m_max):
        add("max_award_level", x, top_bound)
    _emit("\n".join(lines) + "\n", args.out, "plotdata.csv")
    return 0 if report.status == "optimal" else 1


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    updates = {}
    if getattr(args, "enum_cap", None) is not None:
        if args.enum_cap < 1:
            raise ConfigError("--enum-cap must be at least 1")
        updates["enumeration_cap"] = args.enum_cap
    if updates:
        from dataclasses import replace

        cfg = replace(cfg, **updates)
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contract-forge",
        description=(
            "Design, audit, and evaluate data-contribution contracts "
            "with model-accuracy rewards."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", help="path to a JSON instance config")
        p.add_argument("--out", help="directory for output files (default: stdout)")
        p.add_argument(
            "--tol",
            type=float,
            default=1e-6,
            help="audit tolerance on scaled residuals (default 1e-6)",
        )
        p.add_argument(
            "--enum-cap",
            type=int,
            default=None,
            help="override the realization enumeration cap",
        )
        p.set_defaults(config_required=config_required)

    common(sub.add_parser("reservation", help="per-type solo-training optima"))
    p = sub.add_parser("solve", help="solve for a contract")
    common(p)
    p.add_argument(
        "--mode",
        choices=("complete", "incomplete"),
        default="incomplete",
        help="observable-cost benchmark or private-cost menu",
    )
    p.add_argument("--realization", help="comma-separated counts, complete mode")
    p = sub.add_parser("assign", help="per-realization rewards from a menu")
    common(p)
    p.add_argument("--menu", help="menu JSON file (rewards, contributions)")
    p.add_argument("--realization", help="comma-separated counts")
    p = sub.add_parser("audit", help="verify a menu against all constraints")
    common(p)
    p.add_argument("--menu", help="menu JSON file (rewards, contributions)")
    p = sub.add_parser("welfare", help="information cost and rents")
    common(p)
    p.add_argument("--menu", help="menu JSON file; solved fresh if omitted")
    common(sub.add_parser("sweep", help="two-type sweep over p1 and N grids"))
    p = sub.add_parser("scenario", help="run a packaged preset end to end")
    common(p, config_required=False)
    p.add_argument("name", choices=PRESET_NAMES[:3], help="preset name")
    p = sub.add_parser("pbe-check", help="equilibrium check for a profile")
    common(p)
    p.add_argument("--profile", help="comma-separated contributions")
    p = sub.add_parser(
        "demo-nonequivalence",
        help="expected value vs expected concave value maximizers",
    )
    common(p, config_required=False)
    common(sub.add_parser("plotdata", help="long-format CSV for plotting"))
    return parser


_HANDLERS = {
    "reservation": cmd_reservation,
    "solve": cmd_solve,
    "assign": cmd_assign,
    "audit": cmd_audit,
    "welfare": cmd_welfare,
    "sweep": cmd_sweep,
    "pbe-check": cmd_pbe_check,
    "plotdata": cmd_plotdata,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "scenario":
            return cmd_scenario(args)
        if args.command == "demo-nonequivalence":
            return cmd_demo(args)
        if args.config is None:
            if args.command == "sweep":
                cfg = load_preset("sweep")
            else:
                raise ConfigError(f"{args.command} requires --config")
        else:
            cfg = load_config_file(args.config)
        cfg = _apply_overrides(cfg, args)
        return _HANDLERS[args.command](cfg, args)
    except (ConfigError, EnumerationCapError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ContractForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
