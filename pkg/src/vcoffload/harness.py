"""Experiment harness: run solver grids over generated scenarios.

A plan is a grid (scenarios x repetitions x solver settings). Each cell
generates the instance from its reseeded spec, runs one solver, and
yields one CSV row. Cells are independent, so the grid can run in worker
processes; results are identical for any worker count because every
random draw depends only on (spec, seed) and never on scheduling.
"""

from __future__ import annotations

import csv
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .scenario import (
    ScenarioSpec,
    TrafficRegime,
    generate,
    spec_from_dict,
    spec_to_dict,
)
from .solvers import (
    SolverReport,
    SolverStatus,
    solve_crrm,
    solve_dpm,
    solve_etpm,
    solve_optimal,
)

RUN_COLUMNS = [
    "scenario_id",
    "regime",
    "solver",
    "gamma",
    "seed",
    "status",
    "total",
    "completion_norm",
    "exchange_cost",
    "wall_time_s",
    "evaluations",
]

SOLVER_NAMES = ("optimal", "crrm", "dpm", "etpm")


@dataclass(frozen=True)
class SolverSetting:
    """One solver configuration in a plan; gamma applies to crrm only."""

    name: str
    gamma: int | None = None

    def label(self) -> str:
        if self.name == "crrm" and self.gamma is not None:
            return f"crrm(g={self.gamma})"
        return self.name


@dataclass(frozen=True)
class ExperimentPlan:
    scenarios: tuple[tuple[str, ScenarioSpec], ...]  # (id, spec) pairs
    solvers: tuple[SolverSetting, ...]
    reps: int = 1
    base_seed: int = 0
    budget_s: float | None = 300.0  # wall-clock cap for the exhaustive solver


def improvement_pct(baseline: float, value: float) -> float:
    """Percent reduction of `value` relative to `baseline`."""
    return 100.0 * (baseline - value) / baseline


def _dispatch(inst, setting: SolverSetting, seed: int, budget_s) -> SolverReport:
    if setting.name == "optimal":
        return solve_optimal(inst, budget=budget_s)
    if setting.name == "crrm":
        if setting.gamma is None:
            raise ValueError("crrm setting requires gamma")
        return solve_crrm(inst, setting.gamma, seed)
    if setting.name == "dpm":
        return solve_dpm(inst, seed)
    if setting.name == "etpm":
        return solve_etpm(inst, seed)
    raise ValueError(f"unknown solver {setting.name!r}")


def _run_cell(cell):
    """Execute one (scenario, rep, solver) cell; must stay module-level and
    take/return plain picklable data for process-pool workers."""
    scenario_id, spec, setting, seed, budget_s = cell
    row = {
        "scenario_id": scenario_id,
        "regime": spec.regime.value,
        "solver": setting.name,
        "gamma": setting.gamma if setting.name == "crrm" else "",
        "seed": seed,
        "status": "error",
        "total": "",
        "completion_norm": "",
        "exchange_cost": "",
        "wall_time_s": "",
        "evaluations": "",
        "_num_sps": spec.num_sps,
        "_num_tasks": len(spec.task_types),
    }
    trace = None
    try:
        inst = generate(replace(spec, seed=seed))
        report = _dispatch(inst, setting, seed, budget_s)
    except Exception as exc:  # a broken cell must not sink the grid
        row["status"] = f"error: {type(exc).__name__}"
        return row, trace
    row["status"] = report.status.value
    row["wall_time_s"] = repr(report.wall_time)
    row["evaluations"] = report.evaluations
    if report.breakdown is not None:
        row["total"] = repr(report.breakdown.total)
        row["completion_norm"] = repr(report.breakdown.completion_norm)
        row["exchange_cost"] = repr(report.breakdown.exchange_cost)
    if setting.name == "crrm" and report.trace:
        trace = {
            "name": f"{scenario_id}__crrm_g{setting.gamma}_s{seed}.csv",
            "rows": list(report.trace),
        }
    return row, trace


def plan_cells(plan: ExperimentPlan) -> list[tuple]:
    """All cells of the grid in canonical order: scenario, then repetition,
    then solver setting."""
    cells = []
    for scenario_id, spec in plan.scenarios:
        for k in range(plan.reps):
            seed = plan.base_seed + k
            for setting in plan.solvers:
                cells.append((scenario_id, spec, setting, seed, plan.budget_s))
    return cells


def run_plan(plan, out_dir=None, workers: int = 1, figures: bool = True) -> list[dict]:
    """Run every cell; returns rows in canonical cell order.

    With `out_dir` set, writes runs.csv, per-run incumbent traces for the
    randomized solver under traces/, the runtime-scaling series as
    runtime_series.csv, and (unless disabled) rendered figures under figures/.
    Returned rows carry two private extras, _num_sps and _num_tasks, that
    are not part of the CSV schema.
    """
    cells = plan_cells(plan)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]

    rows = [row for row, _ in results]
    traces = [t for _, t in results if t is not None]

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "runs.csv"), "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=RUN_COLUMNS, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)

        if traces:
            trace_dir = os.path.join(out_dir, "traces")
            os.makedirs(trace_dir, exist_ok=True)
            for t in traces:
                with open(os.path.join(trace_dir, t["name"]), "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["iteration", "best_total"])
                    for it, best in t["rows"]:
                        writer.writerow([it, repr(best)])

        series = runtime_series(rows)
        with open(os.path.join(out_dir, "runtime_series.csv"), "w", newline="") as fh:
            writer = csv.DictWriter(
                fh,
                fieldnames=[
                    "num_sps",
                    "num_tasks",
                    "solver",
                    "gamma",
                    "mean_wall_time_s",
                    "log10_mean_wall_time_s",
                ],
            )
            writer.writeheader()
            writer.writerows(series)

        if figures:
            from . import plots

            fig_dir = os.path.join(out_dir, "figures")
            os.makedirs(fig_dir, exist_ok=True)
            if series:
                plots.render_runtime_scaling(
                    series, os.path.join(fig_dir, "runtime_scaling.png")
                )
            conv = _convergence_data(rows, traces)
            if conv:
                plots.render_convergence(conv, os.path.join(fig_dir, "convergence.png"))
            bars = _objective_bar_data(rows)
            if bars:
                plots.render_objective_bars(
                    bars, os.path.join(fig_dir, "objective_totals.png")
                )

    return rows


def _float(value) -> float | None:
    if value in ("", None):
        return None
    return float(value)


def runtime_series(rows) -> list[dict]:
    """Mean solver wall time grouped by fleet size, task count, and solver
    setting; the log10 column drives runtime-scaling plots."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        wall = _float(row.get("wall_time_s"))
        if wall is None or str(row.get("status", "")).startswith("error"):
            continue
        num_sps = row.get("_num_sps", "")
        num_tasks = row.get("_num_tasks", "")
        key = (num_sps, num_tasks, row["solver"], row.get("gamma", ""))
        groups.setdefault(key, []).append(wall)
    out = []
    for (num_sps, num_tasks, solver, gamma), walls in sorted(
        groups.items(), key=lambda kv: tuple(str(p) for p in kv[0])
    ):
        mean = statistics.fmean(walls)
        out.append(
            {
                "num_sps": num_sps,
                "num_tasks": num_tasks,
                "solver": solver,
                "gamma": gamma,
                "mean_wall_time_s": repr(mean),
                "log10_mean_wall_time_s": repr(math.log10(mean)) if mean > 0 else "",
            }
        )
    return out


def _convergence_data(rows, traces):
    """Per scenario: randomized incumbent curves plus flat baselines from
    the single-shot solvers."""
    by_scenario: dict[str, dict] = {}
    for t in traces:
        stem = t["name"][: -len(".csv")]
        scenario_id, tail = stem.split("__", 1)
        entry = by_scenario.setdefault(scenario_id, {"traces": {}, "baselines": {}})
        entry["traces"][tail] = t["rows"]
    for row in rows:
        if row["solver"] in ("dpm", "etpm", "optimal") and row["status"] == "solved":
            entry = by_scenario.get(row["scenario_id"])
            if entry is not None:
                entry["baselines"].setdefault(row["solver"], float(row["total"]))
    return by_scenario


def _objective_bar_data(rows):
    """Mean solved total per (scenario, solver setting)."""
    groups: dict[tuple[str, str], list[float]] = {}
    for row in rows:
        if row["status"] != "solved":
            continue
        total = _float(row.get("total"))
        if total is None:
            continue
        label = row["solver"]
        if row["solver"] == "crrm" and row.get("gamma", "") != "":
            label = f"crrm(g={row['gamma']})"
        groups.setdefault((row["scenario_id"], label), []).append(total)
    return [
        {"scenario_id": sid, "solver": label, "mean_total": statistics.fmean(vals)}
        for (sid, label), vals in sorted(groups.items())
    ]


# ---------------------------------------------------------------------------
# Summaries over result CSVs
# ---------------------------------------------------------------------------

def read_runs_csv(path) -> list[dict]:
    """Load a results CSV, insisting on the full column schema."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        for col in RUN_COLUMNS:
            if col not in fields:
                raise ValueError(f"{path}: missing column {col!r}")
        return list(reader)


def summarize(csv_paths) -> dict:
    """Aggregate one or more result CSVs.

    Per solver setting: run counts by status, mean/median solved total,
    mean wall time, mean evaluations. Cross-solver: percent wall-time
    reduction of the randomized solver against the exhaustive one, and
    win rates (strictly lower total on the same scenario cell, both
    solved) against each greedy baseline.
    """
    rows: list[dict] = []
    for path in csv_paths:
        rows.extend(read_runs_csv(path))

    groups: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        groups.setdefault((row["solver"], row.get("gamma", "") or ""), []).append(row)

    group_stats = []
    for (solver, gamma), members in sorted(groups.items()):
        solved = [r for r in members if r["status"] == "solved"]
        totals = [float(r["total"]) for r in solved if r["total"] != ""]
        walls = [
            float(r["wall_time_s"])
            for r in members
            if r["wall_time_s"] != "" and not r["status"].startswith("error")
        ]
        evals = [
            int(r["evaluations"])
            for r in members
            if r["evaluations"] != "" and not r["status"].startswith("error")
        ]
        group_stats.append(
            {
                "solver": solver,
                "gamma": gamma,
                "runs": len(members),
                "solved": len(solved),
                "infeasible": sum(1 for r in members if r["status"] == "infeasible"),
                "aborted": sum(1 for r in members if r["status"] == "aborted"),
                "errors": sum(1 for r in members if r["status"].startswith("error")),
                "mean_total": statistics.fmean(totals) if totals else None,
                "median_total": statistics.median(totals) if totals else None,
                "mean_wall_time_s": statistics.fmean(walls) if walls else None,
                "mean_evaluations": statistics.fmean(evals) if evals else None,
            }
        )

    def cell_key(row):
        return (row["scenario_id"], row["seed"])

    opt_walls = [
        float(r["wall_time_s"])
        for r in rows
        if r["solver"] == "optimal" and r["status"] == "solved" and r["wall_time_s"] != ""
    ]
    crrm_vs_optimal = []
    crrm_gammas = sorted(
        {r["gamma"] for r in rows if r["solver"] == "crrm" and r["gamma"] != ""},
        key=lambda g: int(g),
    )
    for gamma in crrm_gammas:
        walls = [
            float(r["wall_time_s"])
            for r in rows
            if r["solver"] == "crrm" and r["gamma"] == gamma and r["status"] == "solved"
        ]
        if opt_walls and walls:
            crrm_vs_optimal.append(
                {
                    "gamma": int(gamma),
                    "walltime_reduction_pct": improvement_pct(
                        statistics.fmean(opt_walls), statistics.fmean(walls)
                    ),
                }
            )

    win_rates = []
    for gamma in crrm_gammas:
        crrm_cells = {
            cell_key(r): float(r["total"])
            for r in rows
            if r["solver"] == "crrm" and r["gamma"] == gamma and r["status"] == "solved"
        }
        for baseline in ("dpm", "etpm"):
            base_cells = {
                cell_key(r): float(r["total"])
                for r in rows
                if r["solver"] == baseline and r["status"] == "solved"
            }
            common = sorted(set(crrm_cells) & set(base_cells))
            wins = sum(1 for key in common if crrm_cells[key] < base_cells[key])
            win_rates.append(
                {
                    "gamma": int(gamma),
                    "vs": baseline,
                    "wins": wins,
                    "comparable": len(common),
                    "rate": wins / len(common) if common else None,
                }
            )

    return {
        "num_rows": len(rows),
        "groups": group_stats,
        "crrm_vs_optimal": crrm_vs_optimal,
        "crrm_win_rates": win_rates,
    }


# ---------------------------------------------------------------------------
# Plan serialization and built-in presets
# ---------------------------------------------------------------------------

def plan_to_dict(plan: ExperimentPlan) -> dict:
    return {
        "scenarios": [
            {"id": sid, "spec": spec_to_dict(spec)} for sid, spec in plan.scenarios
        ],
        "solvers": [{"name": s.name, "gamma": s.gamma} for s in plan.solvers],
        "reps": plan.reps,
        "base_seed": plan.base_seed,
        "budget_s": plan.budget_s,
    }


def plan_from_dict(data) -> ExperimentPlan:
    scenarios = tuple(
        (str(s["id"]), spec_from_dict(s["spec"])) for s in data["scenarios"]
    )
    solvers = tuple(
        SolverSetting(str(s["name"]), None if s.get("gamma") is None else int(s["gamma"]))
        for s in data["solvers"]
    )
    for s in solvers:
        if s.name not in SOLVER_NAMES:
            raise ValueError(f"unknown solver {s.name!r}")
    budget = data.get("budget_s", 300.0)
    return ExperimentPlan(
        scenarios=scenarios,
        solvers=solvers,
        reps=int(data.get("reps", 1)),
        base_seed=int(data.get("base_seed", 0)),
        budget_s=None if budget is None else float(budget),
    )


def save_plan(plan: ExperimentPlan, path) -> None:
    with open(path, "w") as fh:
        json.dump(plan_to_dict(plan), fh, indent=2)
        fh.write("\n")


def load_plan(path) -> ExperimentPlan:
    with open(path) as fh:
        return plan_from_dict(json.load(fh))


def preset_mixes(base_seed: int = 0, budget_s: float = 300.0, reps: int = 1):
    """Heuristic comparison grid over six fleet/task mixes; the randomized
    solver runs at three attempt budgets next to both greedy baselines."""
    mixes = [
        ("2xstar5-4sp", (2, 2), 4, 4),
        ("5xstar5-8sp", (2, 2, 2, 2, 2), 8, 5),
        ("2xcycle6-4sp", (3, 3), 4, (7, 6, 6, 6)),
        ("5xcycle6-8sp", (3, 3, 3, 3, 3), 8, 6),
        ("2xtree7-5sp", (4, 4), 5, 6),
        ("5xtree7-10sp", (4, 4, 4, 4, 4), 10, 5),
    ]
    scenarios = tuple(
        (
            f"mix-{name}",
            ScenarioSpec(task_types=tt, num_sps=nsp, vms_per_sp=vms),
        )
        for name, tt, nsp, vms in mixes
    )
    solvers = (
        SolverSetting("dpm"),
        SolverSetting("etpm"),
        SolverSetting("crrm", 1000),
        SolverSetting("crrm", 2000),
        SolverSetting("crrm", 3000),
    )
    return ExperimentPlan(scenarios, solvers, reps, base_seed, budget_s)


def preset_scaling(base_seed: int = 0, budget_s: float = 300.0, reps: int = 1):
    """Runtime scaling: exhaustive search against the randomized solver as
    the fleet grows, for two and three path-shaped tasks."""
    scenarios = []
    for k in (2, 3):
        for m in (4, 5, 6, 7):
            scenarios.append(
                (
                    f"scale-k{k}-m{m}",
                    ScenarioSpec(task_types=(1,) * k, num_sps=m, vms_per_sp=3),
                )
            )
    solvers = (SolverSetting("optimal"), SolverSetting("crrm", 3000))
    return ExperimentPlan(tuple(scenarios), solvers, reps, base_seed, budget_s)


def preset_convergence(base_seed: int = 0, budget_s: float = 300.0, reps: int = 1):
    """Convergence of the randomized solver against both greedy baselines
    on four growing scenarios; task shapes are drawn from the seed."""
    rng = np.random.default_rng(np.random.SeedSequence((base_seed, 1001)))

    def draw_types(n):
        return tuple(int(rng.integers(1, 5)) for _ in range(n))

    # VM counts are sized so draws stay solvable for the greedy baselines
    # too; starved fleets leave nothing to plot
    scenarios = (
        (
            "conv-a",
            ScenarioSpec(task_types=draw_types(2), num_sps=4, vms_per_sp=10),
        ),
        (
            "conv-b",
            ScenarioSpec(task_types=draw_types(3), num_sps=5, vms_per_sp=12),
        ),
        (
            "conv-c",
            ScenarioSpec(
                task_types=draw_types(4),
                num_sps=6,
                vms_per_sp=12,
                regime=TrafficRegime.RUSH_HOUR,
            ),
        ),
        (
            "conv-d",
            ScenarioSpec(
                task_types=draw_types(5),
                num_sps=7,
                vms_per_sp=18,
                regime=TrafficRegime.RUSH_HOUR,
            ),
        ),
    )
    solvers = (SolverSetting("crrm", 3000), SolverSetting("dpm"), SolverSetting("etpm"))
    return ExperimentPlan(scenarios, solvers, reps, base_seed, budget_s)


PRESETS = {
    "mixes": preset_mixes,
    "scaling": preset_scaling,
    "convergence": preset_convergence,
}


def build_preset(name: str, base_seed: int = 0, budget_s: float = 300.0, reps: int = 1):
    try:
        builder = PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None
    return builder(base_seed=base_seed, budget_s=budget_s, reps=reps)
