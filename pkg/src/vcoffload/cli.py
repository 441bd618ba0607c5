"""Command-line front end.

Four subcommands: `generate` draws a concrete instance from a scenario
spec, `solve` runs one solver on one instance file, `bench` executes an
experiment plan (file or built-in preset) and writes CSVs plus figures,
`summarize` aggregates result CSVs. Exit code 0 covers completed runs,
infeasible verdicts included; 2 flags unusable inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import harness, model, scenario, solvers

SOLVER_CHOICES = ("optimal", "crrm", "dpm", "etpm")


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _cmd_generate(args) -> int:
    try:
        spec = scenario.load_spec(args.spec)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"cannot load spec {args.spec}: {exc}")
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.regime is not None:
        spec = replace(spec, regime=scenario.TrafficRegime(args.regime))
    if args.omega_mode is not None:
        spec = replace(spec, omega_mode=model.OmegaMode(args.omega_mode))
    try:
        inst = scenario.generate(spec)
    except ValueError as exc:
        return _fail(f"generation failed: {exc}")
    problems = model.validate_instance(inst)
    if problems:
        for v in problems:
            print(f"invalid: [{v.kind}] {v.entity}: {v.detail}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "instance.json")
    model.save_instance(inst, path)
    print(
        f"wrote {path}: {len(inst.tasks)} tasks / {inst.num_components} components, "
        f"{inst.vc.num_sps} SPs / {inst.vc.num_vms} VMs"
    )
    return 0


def _cmd_solve(args) -> int:
    try:
        inst = model.load_instance(args.instance)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"cannot load instance {args.instance}: {exc}")
    problems = model.validate_instance(inst)
    if problems:
        for v in problems:
            print(f"invalid: [{v.kind}] {v.entity}: {v.detail}", file=sys.stderr)
        return 2

    if args.solver == "optimal":
        report = solvers.solve_optimal(inst, budget=args.budget_s)
    elif args.solver == "crrm":
        report = solvers.solve_crrm(inst, args.gamma, args.seed)
    elif args.solver == "dpm":
        report = solvers.solve_dpm(inst, args.seed)
    else:
        report = solvers.solve_etpm(inst, args.seed)

    print(f"status: {report.status.value}")
    print(f"evaluations: {report.evaluations}")
    print(f"wall_time_s: {report.wall_time:.6f}")
    if report.breakdown is not None:
        print(f"total: {report.breakdown.total!r}")
        print(f"completion_norm: {report.breakdown.completion_norm!r}")
        print(f"exchange_cost: {report.breakdown.exchange_cost!r}")

    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        payload = {
            "solver": args.solver,
            "gamma": args.gamma if args.solver == "crrm" else None,
            "seed": report.seed,
            "status": report.status.value,
            "evaluations": report.evaluations,
            "wall_time_s": report.wall_time,
            "total": report.breakdown.total if report.breakdown else None,
            "completion_norm": report.breakdown.completion_norm
            if report.breakdown
            else None,
            "exchange_cost": report.breakdown.exchange_cost if report.breakdown else None,
            "trace": [list(p) for p in report.trace],
            "assignment": model.assignment_to_rows(inst, report.assignment)
            if report.assignment is not None
            else None,
        }
        path = os.path.join(args.out, "solution.json")
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        print(f"wrote {path}")
    return 0


def _cmd_bench(args) -> int:
    if (args.plan is None) == (args.preset is None):
        return _fail("give either a plan file or --preset")
    if args.plan is not None:
        try:
            plan = harness.load_plan(args.plan)
        except (OSError, ValueError, KeyError) as exc:
            return _fail(f"cannot load plan {args.plan}: {exc}")
        if args.seed is not None:
            plan = replace(plan, base_seed=args.seed)
        if args.budget_s is not None:
            plan = replace(plan, budget_s=args.budget_s)
        if args.reps is not None:
            plan = replace(plan, reps=args.reps)
    else:
        try:
            plan = harness.build_preset(
                args.preset,
                base_seed=args.seed if args.seed is not None else 0,
                budget_s=args.budget_s if args.budget_s is not None else 300.0,
                reps=args.reps if args.reps is not None else 1,
            )
        except ValueError as exc:
            return _fail(str(exc))

    rows = harness.run_plan(
        plan, out_dir=args.out, workers=args.workers, figures=not args.no_figures
    )
    by_status: dict[str, int] = {}
    for row in rows:
        key = row["status"].split(":")[0]
        by_status[key] = by_status.get(key, 0) + 1
    counts = ", ".join(f"{k}={v}" for k, v in sorted(by_status.items()))
    print(f"ran {len(rows)} cells ({counts})")
    print(f"wrote {os.path.join(args.out, 'runs.csv')}")
    return 0


def _cmd_summarize(args) -> int:
    try:
        summary = harness.summarize(args.csvs)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    text = json.dumps(summary, indent=2)
    print(text)
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "summary.json")
        with open(path, "w") as fh:
            fh.write(text)
            fh.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcoffload",
        description="Multi-task offloading over vehicular clouds: generate "
        "instances, run solvers, benchmark, summarize.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="draw one instance from a scenario spec")
    p_gen.add_argument("--spec", required=True, help="scenario spec JSON file")
    p_gen.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p_gen.add_argument(
        "--regime", choices=[r.value for r in scenario.TrafficRegime], default=None,
        help="override the traffic regime",
    )
    p_gen.add_argument(
        "--omega-mode", choices=[m.value for m in model.OmegaMode], default=None,
        help="override how edge durations are obtained",
    )
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.set_defaults(func=_cmd_generate)

    p_solve = sub.add_parser("solve", help="run one solver on an instance file")
    p_solve.add_argument("instance", help="instance JSON file")
    p_solve.add_argument("--solver", required=True, choices=SOLVER_CHOICES)
    p_solve.add_argument(
        "--gamma", type=int, default=1000, help="attempts for the randomized solver"
    )
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument(
        "--budget-s", type=float, default=None,
        help="wall-clock cap for the exhaustive solver",
    )
    p_solve.add_argument("--out", default=None, help="directory for solution.json")
    p_solve.set_defaults(func=_cmd_solve)

    p_bench = sub.add_parser("bench", help="run an experiment plan")
    p_bench.add_argument("plan", nargs="?", default=None, help="plan JSON file")
    p_bench.add_argument(
        "--preset", default=None,
        help=f"built-in plan: {', '.join(sorted(harness.PRESETS))}",
    )
    p_bench.add_argument("--out", required=True, help="output directory")
    p_bench.add_argument("--seed", type=int, default=None, help="override base seed")
    p_bench.add_argument("--budget-s", type=float, default=None)
    p_bench.add_argument("--workers", type=int, default=1)
    p_bench.add_argument("--reps", type=int, default=None)
    p_bench.add_argument("--no-figures", action="store_true")
    p_bench.set_defaults(func=_cmd_bench)

    p_sum = sub.add_parser("summarize", help="aggregate result CSVs")
    p_sum.add_argument("csvs", nargs="+", help="runs.csv files")
    p_sum.add_argument("--out", default=None, help="directory for summary.json")
    p_sum.set_defaults(func=_cmd_summarize)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
