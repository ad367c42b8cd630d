"""Command-line interface.

Subcommands:

* solve        - run one solver on a concrete scenario JSON.
* sweep        - run a convergence / size / lambda sweep, write CSV (+PNG).
* compare      - run all methods side by side, write CSV (+PNG).
* gen-scenario - draw a concrete scenario from a scenario-spec JSON.

stdout carries results only; diagnostics and timings go to stderr. Exit
codes: 0 success, 2 invalid input, 1 internal error. Identical inputs and
seeds produce byte-identical stdout and output files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from .ce_solver import SolverConfig, config_from_json, solve, write_trace_csv
from .harness import (
    SweepSpec,
    compare_methods,
    compare_table,
    generate_scenario,
    run_convergence,
    run_lambda_sweep,
    run_size_sweep,
    scenario_spec_from_dict,
    sweep_spec_from_json,
    write_csv,
)
from .model import ScenarioEvaluator, scenario_from_json, scenario_to_json
from .oracles import bnb_solve, exhaustive_solve, full_mec, lpr_solve, no_mec


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_sweep_spec(args) -> SweepSpec:
    spec = sweep_spec_from_json(_read(args.spec))
    if args.seed is not None:
        spec = replace(
            spec,
            scenario=replace(spec.scenario, seed=args.seed),
            solver=replace(spec.solver, seed=args.seed),
            configs=tuple(replace(c, seed=args.seed) for c in spec.configs),
        )
    return spec


def _tag(args) -> str:
    return args.tag if args.tag else time.strftime("%Y%m%d-%H%M%S")


def cmd_solve(args) -> int:
    scenario = scenario_from_json(_read(args.scenario))
    config = config_from_json(_read(args.config)) if args.config else SolverConfig()
    if args.seed is not None:
        config = replace(config, seed=args.seed)

    if args.method == "asce":
        result = solve(scenario, config)
        assignment = result.best_assignment
        print(f"asce: {result.iterations_run} iterations, "
              f"converged={result.converged}", file=sys.stderr)
        if args.trace:
            write_trace_csv(result.trace, args.trace)
            print(f"trace written to {args.trace}", file=sys.stderr)
    else:
        if args.trace:
            print("note: --trace applies to the asce method only, ignoring",
                  file=sys.stderr)
        runner = {
            "bnb": bnb_solve,
            "exhaustive": exhaustive_solve,
            "lpr": lpr_solve,
            "nomec": no_mec,
            "fullmec": lambda s: full_mec(s, args.cap),
        }[args.method]
        assignment = runner(scenario).assignment

    objective, latency, energy = ScenarioEvaluator(scenario).evaluate(assignment.procs)
    print(f"objective {objective!r}")
    print(f"latency {latency!r}")
    print(f"energy {energy!r}")
    print("assignment " + " ".join(str(p) for p in assignment.procs))
    return 0


def _render(kind: str, table, png_path) -> None:
    from . import plots  # matplotlib import deferred until a figure is needed

    plots.PLOTTERS[kind](table, png_path)


def cmd_sweep(args) -> int:
    spec = _load_sweep_spec(args)
    if args.kind == "convergence":
        table = run_convergence(spec.scenario, spec.convergence_configs())
    elif args.kind == "size":
        table = run_size_sweep(spec.scenario, spec.methods, spec.scales, spec.solver)
    else:
        table = run_lambda_sweep(spec.scenario, spec.m_values, spec.solver)

    out = Path(args.out)
    os.makedirs(out, exist_ok=True)
    tag = _tag(args)
    csv_path = out / f"{args.kind}_{tag}.csv"
    write_csv(table, csv_path)
    print(csv_path)
    if args.plot:
        png_path = out / f"{args.kind}_{tag}.png"
        _render(args.kind, table, png_path)
        print(png_path)
    return 0


def cmd_compare(args) -> int:
    spec = _load_sweep_spec(args)
    stats = compare_methods(spec.scenario, spec.methods, spec.solver)
    table = compare_table(stats)

    widths = [max(len(str(table.header[i])),
                  max((len(_fmt(row[i])) for row in table.rows), default=0))
              for i in range(len(table.header))]
    print("  ".join(h.ljust(w) for h, w in zip(table.header, widths)))
    for row in table.rows:
        print("  ".join(_fmt(c).ljust(w) for c, w in zip(row, widths)))
    for s in stats:
        print(f"{s.method}: mean wall-time {s.mean_seconds:.4f}s", file=sys.stderr)

    out = Path(args.out)
    os.makedirs(out, exist_ok=True)
    tag = _tag(args)
    csv_path = out / f"compare_{tag}.csv"
    write_csv(table, csv_path)
    print(csv_path)
    if args.plot:
        png_path = out / f"compare_{tag}.png"
        _render("compare", table, png_path)
        print(png_path)
    return 0


def _fmt(cell) -> str:
    return repr(float(cell)) if isinstance(cell, float) else str(cell)


def cmd_gen_scenario(args) -> int:
    doc = json.loads(_read(args.spec))
    spec = scenario_spec_from_dict(doc)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    scenario = generate_scenario(spec, trial_index=0)
    Path(args.out).write_text(scenario_to_json(scenario), encoding="utf-8")
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ce-offload",
        description="Latency/energy task-offloading solver and benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one scenario")
    p_solve.add_argument("--scenario", required=True, help="scenario JSON file")
    p_solve.add_argument("--config", help="solver config JSON file (asce; defaults used if omitted)")
    p_solve.add_argument("--trace", help="write the asce iteration trace CSV here")
    p_solve.add_argument("--method", required=True,
                         choices=["asce", "bnb", "exhaustive", "lpr", "nomec", "fullmec"])
    p_solve.add_argument("--cap", type=int, default=1,
                         help="CAP index for --method fullmec (default 1)")
    p_solve.add_argument("--seed", type=int, help="override the config seed")
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="run an experiment sweep")
    p_sweep.add_argument("--spec", required=True, help="sweep spec JSON file")
    p_sweep.add_argument("--kind", required=True, choices=["convergence", "size", "lambda"])
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--tag", help="filename tag (default: timestamp)")
    p_sweep.add_argument("--seed", type=int, help="override file-level seeds")
    p_sweep.add_argument("--no-plot", dest="plot", action="store_false",
                         help="skip the PNG figure next to the CSV")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="compare all methods on one spec")
    p_cmp.add_argument("--spec", required=True, help="sweep spec JSON file")
    p_cmp.add_argument("--out", required=True, help="output directory")
    p_cmp.add_argument("--tag", help="filename tag (default: timestamp)")
    p_cmp.add_argument("--seed", type=int, help="override file-level seeds")
    p_cmp.add_argument("--no-plot", dest="plot", action="store_false",
                       help="skip the PNG figure next to the CSV")
    p_cmp.set_defaults(func=cmd_compare)

    p_gen = sub.add_parser("gen-scenario", help="draw a concrete scenario from a spec")
    p_gen.add_argument("--spec", required=True, help="scenario spec JSON file")
    p_gen.add_argument("--seed", type=int, help="override the spec seed")
    p_gen.add_argument("--out", required=True, help="scenario JSON output file")
    p_gen.set_defaults(func=cmd_gen_scenario)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
