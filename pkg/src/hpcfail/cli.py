"""``hpcfail`` command line.

Exit codes: 0 success, 2 infeasible model, 3 configuration or usage error,
4 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Sequence, TextIO

from hpcfail import budget, efficiency, refined_model, simulator
from hpcfail.config import ModelConfig, bundled_fixtures, load_config
from hpcfail.errors import ConfigError, FailureModelError
from hpcfail.rate_algebra import (
    FailureRate,
    NodeComponentRates,
    NodeRateModel,
    fit_to_mttf,
    hard_rate,
    mttf_to_fit,
    node_rate,
    soft_rate,
)
from hpcfail.tabular import Grid, format_decimal, write_csv
from hpcfail.topology import aggregate_levels, totals


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> Grid:
    try:
        return Grid.parse(text)
    except FailureModelError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _fit(value: float | FailureRate) -> str:
    return format_decimal(float(value))


@contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        yield fh


def _sys_cap(cfg: ModelConfig) -> FailureRate:
    if "sys_cap" not in cfg.caps:
        raise ConfigError("caps.sys_cap is required")
    return cfg.caps["sys_cap"]


def _refined_rates(cfg: ModelConfig) -> refined_model.RefinedRates:
    return refined_model.RefinedRates(
        node=cfg.rates.get("node", FailureRate(0)),
        chassis_off_node=cfg.rates.get("chassis_offnode", FailureRate(0)),
        cabinet_off_node=cfg.rates.get("cabinet_offnode", FailureRate(0)),
    )


def _node_rate(cfg: ModelConfig) -> FailureRate:
    if "node" in cfg.rates:
        return cfg.rates["node"]
    cfg.require("si")
    rates = cfg.rates
    for aggregate, parts in (("soft", budget.SOFT_COMPONENTS), ("hard", budget.HARD_COMPONENTS)):
        if aggregate not in rates and not all(p in rates for p in parts):
            raise ConfigError(f"rates needs 'node', '{aggregate}', or all of {', '.join(parts)}")
    zero = FailureRate(0)
    components = NodeComponentRates(*(rates.get(k, zero) for k in budget.SOFT_COMPONENTS + budget.HARD_COMPONENTS))
    soft = rates["soft"] if "soft" in rates else soft_rate(components)
    hard = rates["hard"] if "hard" in rates else hard_rate(components)
    return node_rate(NodeRateModel(soft, hard, *cfg.si))


def cmd_convert(args: argparse.Namespace) -> int:
    if args.fit is not None:
        print(f"mttf_hours={format_decimal(fit_to_mttf(args.fit).hours)}")
    else:
        print(f"fit={_fit(mttf_to_fit(args.mttf))}")
    return 0


def cmd_aggregate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    cfg.require("topology")
    rate = _node_rate(cfg)
    levels = aggregate_levels(rate, cfg.topology)
    n_node, n_chassis, n_cabinet = totals(cfg.topology)
    print(f"total_nodes={n_node}")
    print(f"total_chassis={n_chassis}")
    print(f"total_cabinets={n_cabinet}")
    print(f"node_fit={_fit(rate)}")
    print(f"chassis_fit={_fit(levels.chassis)}")
    print(f"cabinet_fit={_fit(levels.cabinet)}")
    print(f"system_fit={_fit(levels.system)}")
    return 0


def _cap_problem(cfg: ModelConfig) -> budget.CapProblem:
    cfg.require("topology", "si")
    knowns = {k: v for k, v in cfg.caps.items() if k != "sys_cap"}
    return budget.CapProblem(cfg.topology, cfg.si[0], cfg.si[1], _sys_cap(cfg), knowns)


def cmd_cap_solve(args: argparse.Namespace) -> int:
    problem = _cap_problem(load_config(args.config))
    print(f"{_fit(budget.solve_single_unknown(problem, args.unknown))} FIT")
    return 0


def _print_constraint(constraint: budget.LinearConstraint, as_json: bool) -> None:
    if as_json:
        print(json.dumps(constraint.to_dict()))
    else:
        print(constraint)


def cmd_cap_constraint(args: argparse.Namespace) -> int:
    problem = _cap_problem(load_config(args.config))
    _print_constraint(budget.derive_constraint(problem), args.json)
    return 0


def _refined_inputs(cfg: ModelConfig):
    cfg.require("topology", "refined_si")
    return cfg.refined_si, cfg.topology


def cmd_refined_rate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    si, topo = _refined_inputs(cfg)
    print(f"{_fit(refined_model.refined_system_rate(_refined_rates(cfg), si, topo))} FIT")
    return 0


def cmd_refined_constraint(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    si, topo = _refined_inputs(cfg)
    _print_constraint(refined_model.refined_constraint(si, topo, _sys_cap(cfg)), args.json)
    return 0


def cmd_refined_solve(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    si, topo = _refined_inputs(cfg)
    rates = _refined_rates(cfg)
    chassis = rates.chassis_off_node if args.chassis is None else args.chassis
    cabinet = rates.cabinet_off_node if args.cabinet is None else args.cabinet
    print(f"{_fit(refined_model.solve_node_rate(si, topo, _sys_cap(cfg), chassis, cabinet))} FIT")
    return 0


def cmd_sweep_type(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    cfg.require("topology", "si")
    rows = budget.sweep_system_rate(cfg.topology, cfg.si[0], cfg.si[1], args.soft_range, args.hard_range)
    with _output(args.out) as out:
        write_csv(budget.SWEEP_HEADER, rows, out)
    return 0


def cmd_sweep_refined(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    si, topo = _refined_inputs(cfg)
    rows = refined_model.sweep_node_rate(si, topo, _sys_cap(cfg), args.chassis_range, args.cabinet_range)
    with _output(args.out) as out:
        write_csv(refined_model.SWEEP_HEADER, rows, out)
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    cfg = load_config(args.config) if args.config else ModelConfig()
    source = cfg.categories
    table = Path(args.table) if args.table else (source.table_path if source else None)
    if table is None:
        raise ConfigError("no category table: pass --table or set categories.table")
    try:
        records = refined_model.read_category_csv(table)
    except OSError as exc:
        raise ConfigError(f"{table}: {exc}") from exc
    grouping = refined_model.ingest_category_table(
        records,
        source.mapping if source else None,
        source.default_level if source else None,
    )
    result: dict[str, float] = grouping.to_dict()
    observed = args.observed_rate
    if observed is None and source is not None:
        observed = source.observed_sys_rate
    if observed is not None:
        cfg.require("topology")
        rates = refined_model.apportion_rates(grouping, observed, cfg.topology)
        result.update(
            node_fit=rates.node.fit,
            chassis_offnode_fit=rates.chassis_off_node.fit,
            cabinet_offnode_fit=rates.cabinet_off_node.fit,
        )
    if args.json:
        print(json.dumps(result))
    else:
        for key, value in result.items():
            print(f"{key}={format_decimal(value)}")
    return 0


def _case_efficiency(case) -> float:
    if isinstance(case, efficiency.TimeUsage):
        return efficiency.resilience_efficiency(case)
    return efficiency.project_cr_efficiency(case)


def cmd_efficiency(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    cfg.require("efficiency")
    results = {name: _case_efficiency(case) for name, case in cfg.efficiency.items()}
    for name, value in results.items():
        text = f"{value * 100:.2f}%" if args.percent else f"{value:.4f}"
        print(text if len(results) == 1 else f"{name}: {text}")
    return 0


def cmd_simulate_rates(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    si, topo = _refined_inputs(cfg)
    rates = _refined_rates(cfg)
    config = simulator.SimConfig(rates, si, topo, args.horizon, args.trials, args.seed)
    result = simulator.simulate_failure_counts(config, workers=args.workers)
    analytic = refined_model.refined_system_rate(rates, si, topo)
    print(json.dumps(result.report(analytic), indent=2))
    return 0


def cmd_simulate_cr(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    cfg.require("efficiency")
    scenarios = {k: v for k, v in cfg.efficiency.items() if isinstance(v, efficiency.CrScenario)}
    if args.case is not None:
        if args.case not in scenarios:
            raise ConfigError(f"no C/R scenario named {args.case!r}")
        scenario = scenarios[args.case]
    elif len(scenarios) == 1:
        scenario = next(iter(scenarios.values()))
    else:
        raise ConfigError("config must hold exactly one C/R scenario, or pick one with --case")
    result = simulator.simulate_cr_timeline(scenario, args.arrivals, args.trials, args.seed, workers=args.workers)
    print(json.dumps(result.report(efficiency.project_cr_efficiency(scenario)), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hpcfail", description="Hierarchical failure-rate model for HPC systems.")
    parser.add_argument("--list-fixtures", action="store_true", help="list bundled example configs and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def with_config(p: argparse.ArgumentParser, required: bool = True) -> argparse.ArgumentParser:
        p.add_argument("--config", required=required, help="JSON config path or bundled fixture name")
        return p

    p = sub.add_parser("convert", help="FIT <-> MTTF hours")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--fit", type=float)
    group.add_argument("--mttf", type=float, help="hours")
    p.set_defaults(func=cmd_convert)

    p = with_config(sub.add_parser("aggregate", help="node, chassis, cabinet and system rates"))
    p.set_defaults(func=cmd_aggregate)

    cap = sub.add_parser("cap", help="failure-rate caps under a system cap")
    cap_sub = cap.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = with_config(cap_sub.add_parser("solve", help="solve for a single unknown cap"))
    p.add_argument("--unknown", required=True, choices=budget.VARIABLES)
    p.set_defaults(func=cmd_cap_solve)
    p = with_config(cap_sub.add_parser("constraint", help="linear constraint over the unknown caps"))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_cap_constraint)

    refined = sub.add_parser("refined", help="hierarchy-aware model")
    refined_sub = refined.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = with_config(refined_sub.add_parser("rate", help="system rate from per-level rates"))
    p.set_defaults(func=cmd_refined_rate)
    p = with_config(refined_sub.add_parser("constraint", help="constraint over node/chassis/cabinet rates"))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_refined_constraint)
    p = with_config(refined_sub.add_parser("solve", help="node rate left under the cap"))
    p.add_argument("--chassis", type=float, help="chassis off-node FIT (default: rates.chassis_offnode)")
    p.add_argument("--cabinet", type=float, help="cabinet off-node FIT (default: rates.cabinet_offnode)")
    p.set_defaults(func=cmd_refined_solve)

    sweep = sub.add_parser("sweep", help="CSV sweep surfaces")
    sweep_sub = sweep.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = with_config(sweep_sub.add_parser("type", help="system rate over soft x hard caps"))
    p.add_argument("--soft-range", type=_grid, default=budget.default_grid(), metavar="A:B:STEP")
    p.add_argument("--hard-range", type=_grid, default=budget.default_grid(), metavar="A:B:STEP")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_type)
    p = with_config(sweep_sub.add_parser("refined", help="node rate over chassis x cabinet off-node rates"))
    p.add_argument("--chassis-range", type=_grid, default=budget.default_grid(), metavar="A:B:STEP")
    p.add_argument("--cabinet-range", type=_grid, default=budget.default_grid(), metavar="A:B:STEP")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_refined)

    p = with_config(sub.add_parser("ingest", help="group a failure-category table by level"), required=False)
    p.add_argument("--table", help="CSV with header component,share,location")
    p.add_argument("--observed-rate", type=float, help="observed system FIT to apportion across levels")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = with_config(sub.add_parser("efficiency", help="resilience efficiency"))
    p.add_argument("--percent", action="store_true", help="print percentages instead of fractions")
    p.set_defaults(func=cmd_efficiency)

    simulate = sub.add_parser("simulate", help="Monte Carlo checks")
    sim_sub = simulate.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, func, help_text in (
        ("rates", cmd_simulate_rates, "Poisson failure counts vs the refined system rate"),
        ("cr", cmd_simulate_cr, "checkpoint/restart timeline vs projected efficiency"),
    ):
        p = with_config(sim_sub.add_parser(name, help=help_text))
        p.add_argument("--trials", type=int, required=True)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--workers", type=int, default=1)
        if name == "rates":
            p.add_argument("--horizon", type=float, default=1000.0, help="hours per trial")
        else:
            p.add_argument("--arrivals", choices=simulator.ARRIVAL_MODELS, default="exponential")
            p.add_argument("--case", help="efficiency case name when the config holds several")
        p.set_defaults(func=func)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else ConfigError.exit_code
    if args.list_fixtures:
        print("\n".join(bundled_fixtures()))
        return 0
    if args.command is None:
        parser.print_help(sys.stderr)
        return ConfigError.exit_code
    try:
        return args.func(args)
    except FailureModelError as exc:
        print(f"hpcfail: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
