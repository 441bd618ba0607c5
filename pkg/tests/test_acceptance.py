"""Acceptance gate.

Eight numbered checks, each printing one `[criterion N] PASS/FAIL` line on
the terminal (bypassing capture) before asserting:

  1. exhaustive solver matches a brute-force enumeration oracle on a 500
     instance corpus, under 5 minutes;
  2. heuristic totals never beat the optimum on that corpus;
  3. randomized-search convergence beats both greedy baselines on 50
     rush-hour instances at the 4-task / 6-SP scale;
  4. randomized search lands within 5% of the optimum on >= 90% of the
     small corpus;
  5. exhaustive-search effort explodes along a fleet/task ladder while the
     randomized solver stays linear in component count and saves > 90%
     wall time at the 2-task rung;
  6. randomized per-iteration cost scales linearly when components double;
  7. 10,000-assignment fuzz per traffic regime: the fast feasibility
     predicate agrees exactly with the literal constraint re-check;
  8. all solvers and the bench harness are bit-deterministic across runs
     and worker counts.

Thresholds and corpus shapes are pinned here so this module is the single
place where pass/fail is decided.
"""

import math
import statistics
import time

import numpy as np
import pytest

from vcoffload import model, objective, oracle, scenario, solvers
from vcoffload.harness import (
    ExperimentPlan,
    SolverSetting,
    improvement_pct,
    run_plan,
)
from vcoffload.scenario import ScenarioSpec, TrafficRegime
from vcoffload.solvers import SolverStatus

from conftest import corpus_spec

CORPUS_SIZE = 500
NEAR_OPT_GAMMA = 3000
REL_TOL = 1e-12

# feasibility-rich draw ranges: every randomized attempt runs to completion,
# so wall time reflects per-iteration work rather than early abandonment
LIGHT_RANGES = dict(
    deadline_range=(0.2, 0.25),
    exec_range=(0.05, 0.2),
    epsilon_range=(0.9, 0.905),
)


def _verdict(capsys, num: int, label: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'} {label}: {detail}")
    assert ok, f"criterion {num} ({label}): {detail}"


def _linear_r2(xs, ys) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - my) ** 2 for y in ys)
    return 1.0 - ss_res / ss_tot


@pytest.fixture(scope="module")
def corpus():
    """500 seeded small instances (<= 6 components, <= 10 VMs) spanning both
    traffic regimes and both edge-duration modes, solved four ways each."""
    records = []
    core_time = 0.0
    for i in range(CORPUS_SIZE):
        inst = scenario.generate(corpus_spec(i, 1000 + i))
        t0 = time.perf_counter()
        opt = solvers.solve_optimal(inst)
        orc = oracle.oracle_enumerate(inst)
        core_time += time.perf_counter() - t0
        heur = {
            "crrm": solvers.solve_crrm(inst, NEAR_OPT_GAMMA, seed=1000 + i),
            "dpm": solvers.solve_dpm(inst),
            "etpm": solvers.solve_etpm(inst, seed=1000 + i),
        }
        records.append((inst, opt, orc, heur))
    return {"records": records, "core_time": core_time}


def test_criterion_1_oracle_equivalence(corpus, capsys):
    records = corpus["records"]
    mismatches = []
    feasible = 0
    for idx, (inst, opt, orc, _) in enumerate(records):
        assert inst.num_components <= 6 and inst.vc.num_vms <= 10
        if (opt.status is SolverStatus.SOLVED) != orc.feasible:
            mismatches.append(idx)
            continue
        if orc.feasible:
            feasible += 1
            if not math.isclose(
                opt.breakdown.total, orc.best_total, rel_tol=REL_TOL, abs_tol=0.0
            ):
                mismatches.append(idx)
    modes = {inst.omega_mode for inst, _, _, _ in records}
    regimes = {corpus_spec(i, 1000 + i).regime for i in range(CORPUS_SIZE)}
    core = corpus["core_time"]
    ok = (
        not mismatches
        and core < 300.0
        and len(modes) == 2
        and len(regimes) == 2
    )
    _verdict(
        capsys, 1, "oracle equivalence", ok,
        f"{CORPUS_SIZE} instances ({feasible} feasible, both regimes, both "
        f"duration modes), {len(mismatches)} mismatches at rel {REL_TOL:g}, "
        f"solver+oracle wall {core:.1f}s (cap 300s)",
    )


def test_criterion_2_heuristic_dominance(corpus, capsys):
    violations = 0
    solved_runs = 0
    for _, _, orc, heur in corpus["records"]:
        for rep in heur.values():
            if rep.status is not SolverStatus.SOLVED:
                continue
            solved_runs += 1
            if not orc.feasible:
                violations += 1
            elif rep.breakdown.total < orc.best_total - REL_TOL * abs(orc.best_total):
                violations += 1
    ok = violations == 0 and solved_runs > 0
    _verdict(
        capsys, 2, "heuristic dominance", ok,
        f"{solved_runs} solved heuristic runs, {violations} below the optimum",
    )


C3_COUNT = 50
C3_GAMMA = 3000
C3_WIN_FRACTION = 0.80


def test_criterion_3_crrm_convergence(capsys):
    """50 rush-hour instances at the 4-task / 6-SP scale, keeping the first
    seeds where all three inexact solvers terminate with a solution (the
    greedy baselines have no backtracking, so a slice of draws leaves them
    stuck and without a comparable total)."""
    t0 = time.perf_counter()
    kept = []
    seed = 3000
    while len(kept) < C3_COUNT:
        spec = ScenarioSpec(
            task_types=(1, 1, 2, 2), num_sps=6, vms_per_sp=12,
            regime=TrafficRegime.RUSH_HOUR, seed=seed,
        )
        inst = scenario.generate(spec)
        seed += 1
        dpm = solvers.solve_dpm(inst)
        if dpm.status is not SolverStatus.SOLVED:
            continue
        etpm = solvers.solve_etpm(inst, seed=spec.seed)
        if etpm.status is not SolverStatus.SOLVED:
            continue
        crrm = solvers.solve_crrm(inst, C3_GAMMA, seed=spec.seed)
        if crrm.status is not SolverStatus.SOLVED:
            continue
        kept.append((crrm, dpm, etpm))
    elapsed = time.perf_counter() - t0

    monotone = all(
        all(a[1] >= b[1] for a, b in zip(rep.trace, rep.trace[1:]))
        for group in kept
        for rep in group
    )
    crrm_totals = [c.breakdown.total for c, _, _ in kept]
    dpm_totals = [d.breakdown.total for _, d, _ in kept]
    etpm_totals = [e.breakdown.total for _, _, e in kept]
    mc = statistics.mean(crrm_totals)
    md = statistics.mean(dpm_totals)
    me = statistics.mean(etpm_totals)
    wins_d = sum(1 for c, d in zip(crrm_totals, dpm_totals) if c < d)
    wins_e = sum(1 for c, e in zip(crrm_totals, etpm_totals) if c < e)
    need = int(C3_WIN_FRACTION * C3_COUNT)
    ok = (
        monotone
        and mc <= md
        and mc <= me
        and wins_d >= need
        and wins_e >= need
        and elapsed < 600.0
    )
    _verdict(
        capsys, 3, "randomized-search convergence", ok,
        f"means crrm={mc:.4f} dpm={md:.4f} etpm={me:.4f}; strict wins "
        f"{wins_d}/{C3_COUNT} vs dpm, {wins_e}/{C3_COUNT} vs etpm (need "
        f">= {need}); traces monotone={monotone}; seeds 3000..{seed - 1}; "
        f"{elapsed:.1f}s (cap 600s)",
    )


def test_criterion_4_crrm_near_optimality(corpus, capsys):
    near = 0
    total = 0
    worst = 0.0
    for _, _, orc, heur in corpus["records"]:
        if not orc.feasible:
            continue
        total += 1
        rep = heur["crrm"]
        if rep.status is not SolverStatus.SOLVED:
            continue
        gap = (rep.breakdown.total - orc.best_total) / orc.best_total
        worst = max(worst, gap)
        if gap <= 0.05 + REL_TOL:
            near += 1
    rate = near / total
    ok = rate >= 0.90
    _verdict(
        capsys, 4, "randomized-search near-optimality", ok,
        f"{near}/{total} feasible instances within 5% at gamma={NEAR_OPT_GAMMA} "
        f"({rate:.1%}, need >= 90%), worst gap {worst:.2%}",
    )


LADDER_SEED = 3
TWO_TASK_RUNGS = ((2, 4), (2, 5), (2, 6), (2, 7))
JUMP_RUNG = (3, 5)


def test_criterion_5_scaling_trend(capsys):
    """Exhaustive-search effort along a ladder of 2..3 tasks (4 components
    each) over 4..7 providers at 3 VMs apiece. Super-exponential growth is
    read as: effort rises strictly with fleet size, the overall rise across
    the 2-task rungs is at least one order of magnitude, and adding one task
    multiplies effort by more than any single fleet step does (the exponent,
    not the base, dominates)."""
    evals = {}
    opt_walls = {}
    big_inst = None
    for k, m in TWO_TASK_RUNGS + (JUMP_RUNG,):
        spec = ScenarioSpec(task_types=(1,) * k, num_sps=m, vms_per_sp=3,
                            seed=LADDER_SEED)
        inst = scenario.generate(spec)
        rep = solvers.solve_optimal(inst)
        assert rep.status is SolverStatus.SOLVED, f"rung {(k, m)} infeasible"
        evals[(k, m)] = rep.evaluations
        opt_walls[(k, m)] = rep.wall_time
        if (k, m) == TWO_TASK_RUNGS[-1]:
            big_inst = inst

    two = [evals[r] for r in TWO_TASK_RUNGS]
    increasing = all(a < b for a, b in zip(two, two[1:]))
    sp_ratios = [b / a for a, b in zip(two, two[1:])]
    comp_ratio = evals[JUMP_RUNG] / evals[(2, 5)]
    growth = two[-1] / two[0]
    superexp = increasing and comp_ratio > max(sp_ratios) and growth >= 10.0

    # linear-in-components leg: fixed 7x3 fleet, 1..5 four-component tasks;
    # min wall over three runs damps scheduler noise
    xs = []
    ys = []
    completed = True
    for k in (1, 2, 3, 4, 5):
        spec = ScenarioSpec(task_types=(1,) * k, num_sps=7, vms_per_sp=3,
                            seed=11, **LIGHT_RANGES)
        inst = scenario.generate(spec)
        walls = []
        for s in (5, 6, 7):
            rep = solvers.solve_crrm(inst, gamma=2000, seed=s)
            completed = completed and rep.evaluations == 2000
            walls.append(rep.wall_time)
        xs.append(inst.num_components)
        ys.append(min(walls))
    r2 = _linear_r2(xs, ys)
    rising = ys[-1] > ys[0]

    crrm_walls = [
        solvers.solve_crrm(big_inst, gamma=1000, seed=s).wall_time
        for s in (3, 4, 5)
    ]
    imp = improvement_pct(opt_walls[TWO_TASK_RUNGS[-1]], statistics.mean(crrm_walls))

    ok = superexp and completed and r2 >= 0.9 and rising and imp > 90.0
    _verdict(
        capsys, 5, "scaling trend", ok,
        f"evaluations {two[0]}..{two[-1]} (x{growth:.0f} over 2-task rungs, "
        f"strictly rising={increasing}), one extra task x{comp_ratio:.1f} vs "
        f"largest fleet step x{max(sp_ratios):.1f}; randomized wall linear in "
        f"components R2={r2:.3f} (need >= 0.9); wall improvement "
        f"{imp:.1f}% at the 2-task rung (need > 90%)",
    )


def test_criterion_6_per_iteration_complexity(capsys):
    """Fixed 6x5 fleet; doubling components (two vs four 5-component tasks)
    should roughly double per-iteration cost."""
    per_iter = {}
    for k in (2, 4):
        spec = ScenarioSpec(task_types=(2,) * k, num_sps=6, vms_per_sp=5,
                            seed=21, **LIGHT_RANGES)
        inst = scenario.generate(spec)
        walls = []
        for s in (9, 10, 11):
            rep = solvers.solve_crrm(inst, gamma=2000, seed=s)
            assert rep.evaluations == 2000
            walls.append(rep.wall_time)
        per_iter[k] = statistics.mean(walls) / 2000
    ratio = per_iter[4] / per_iter[2]
    ok = 1.4 <= ratio <= 2.6
    _verdict(
        capsys, 6, "per-iteration complexity", ok,
        f"mean per-iteration {per_iter[2] * 1e6:.1f}us at 10 components vs "
        f"{per_iter[4] * 1e6:.1f}us at 20, ratio {ratio:.2f} (window 1.4..2.6)",
    )


FUZZ_PER_REGIME = 10000


def test_criterion_7_constraint_fuzz(capsys):
    """Uniform random total assignments (slot collisions allowed) checked
    with the fast predicate and with the literal materialized re-check of
    injectivity, contact survival, and deadline/reachability."""
    discrepancies = 0
    accepted = 0
    checked = 0
    for parity, regime in ((0, TrafficRegime.LOW_TRAFFIC), (1, TrafficRegime.RUSH_HOUR)):
        pool = []
        for j in range(20):
            idx = 2 * j + parity
            spec = corpus_spec(idx, 500 + idx)
            assert spec.regime is regime
            pool.append(scenario.generate(spec))
        rng = np.random.default_rng(np.random.SeedSequence((4242, parity)))
        per_inst = FUZZ_PER_REGIME // len(pool)
        for inst in pool:
            slots = inst.vc.slots()
            comps = list(inst.components())
            for _ in range(per_inst):
                picks = rng.integers(0, len(slots), size=len(comps))
                a = model.Assignment(
                    {c: slots[int(p)] for c, p in zip(comps, picks)}
                )
                fast = objective.assignment_feasible(inst, a)[0]
                literal = oracle.literal_feasible(inst, a)
                checked += 1
                accepted += fast
                discrepancies += fast != literal
    ok = discrepancies == 0 and checked == 2 * FUZZ_PER_REGIME
    _verdict(
        capsys, 7, "constraint fuzz", ok,
        f"{checked} random assignments ({FUZZ_PER_REGIME} per regime), "
        f"{accepted} accepted, {discrepancies} predicate disagreements",
    )


def _fingerprint(inst, rep):
    rows = (
        tuple(map(tuple, model.assignment_to_rows(inst, rep.assignment)))
        if rep.assignment is not None
        else None
    )
    return (rep.status, rep.seed, rep.evaluations, rep.trace, rows, rep.breakdown)


def test_criterion_8_determinism(capsys):
    insts = [scenario.generate(corpus_spec(i, 1000 + i)) for i in (0, 1, 2, 7, 10)]
    solver_runs = 0
    solver_diffs = 0
    for inst in insts:
        runs = (
            lambda: solvers.solve_optimal(inst),
            lambda: solvers.solve_crrm(inst, 400, seed=13),
            lambda: solvers.solve_dpm(inst),
            lambda: solvers.solve_etpm(inst, seed=13),
        )
        for run in runs:
            solver_runs += 1
            if _fingerprint(inst, run()) != _fingerprint(inst, run()):
                solver_diffs += 1

    plan = ExperimentPlan(
        scenarios=(
            ("det-a", corpus_spec(0, 1000)),
            ("det-b", corpus_spec(3, 1003)),
        ),
        solvers=(
            SolverSetting("optimal"),
            SolverSetting("crrm", 300),
            SolverSetting("dpm"),
            SolverSetting("etpm"),
        ),
        reps=2,
        base_seed=50,
        budget_s=None,
    )
    outs = [
        run_plan(plan, out_dir=None, workers=w) for w in (1, 1, 3)
    ]
    stripped = [
        [{k: v for k, v in row.items() if k != "wall_time_s"} for row in rows]
        for rows in outs
    ]
    plan_ok = stripped[0] == stripped[1] == stripped[2]
    ok = solver_diffs == 0 and plan_ok
    _verdict(
        capsys, 8, "determinism", ok,
        f"{solver_runs} solver double-runs with {solver_diffs} fingerprint "
        f"diffs; {len(stripped[0])}-cell bench plan identical across two "
        f"sequential runs and 1 vs 3 workers (timing excluded): {plan_ok}",
    )
