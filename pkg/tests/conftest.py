"""Shared builders for hand-crafted instances and small random corpora."""

from __future__ import annotations

import itertools

from vcoffload.model import (
    Assignment,
    ComponentId,
    Instance,
    OmegaMode,
    ServiceProvider,
    TaskGraph,
    VcGraph,
    VmSlot,
)
from vcoffload.scenario import (
    ScenarioSpec,
    TaskTemplate,
    TaskTypeCatalog,
    TrafficRegime,
)


def all_pairs(num_sps: int, value: float) -> dict[tuple[int, int], float]:
    """Constant-valued map over every unordered SP pair."""
    return {(a, b): value for a, b in itertools.combinations(range(num_sps), 2)}


def build_instance(
    tasks,
    sps,
    rates=0.05,
    costs=0.1,
    reach=None,
    epsilon=0.9,
    xi_t=0.5,
    xi_c=0.5,
    omega_mode=OmegaMode.STATIC,
) -> Instance:
    """Compact hand-instance builder.

    `tasks`: list of (deadlines, edges) pairs. `sps`: list of exec-time
    tuples. `rates`/`costs`: either a full pair map or one constant for
    every pair. `reach`: per-task SP index collections, default all SPs.
    """
    task_graphs = tuple(
        TaskGraph(deadlines=tuple(d), edges=tuple(e)) for d, e in tasks
    )
    sp_objs = tuple(ServiceProvider(tuple(v)) for v in sps)
    n = len(sp_objs)
    if not isinstance(rates, dict):
        rates = all_pairs(n, rates)
    if not isinstance(costs, dict):
        costs = all_pairs(n, costs)
    if reach is None:
        reachability = tuple(frozenset(range(n)) for _ in task_graphs)
    else:
        reachability = tuple(frozenset(r) for r in reach)
    return Instance(
        tasks=task_graphs,
        vc=VcGraph(sps=sp_objs, contact_rates=rates, reachability=reachability),
        exch_costs=costs,
        epsilon=epsilon,
        xi_t=xi_t,
        xi_c=xi_c,
        omega_mode=omega_mode,
    )


def assign(inst: Instance, placements) -> Assignment:
    """Assignment from [(task, comp, sp, vm), ...]."""
    slots = {}
    for x, i, y, j in placements:
        exec_time = inst.vc.sps[y].vm_exec_times[j]
        slots[ComponentId(x, i)] = VmSlot(y, j, exec_time)
    return Assignment(slots)


def mini_catalog() -> TaskTypeCatalog:
    """Small task shapes that keep brute-force enumeration cheap."""
    return TaskTypeCatalog(
        {
            1: TaskTemplate("pair", 2, ((0, 1),)),
            2: TaskTemplate("path3", 3, ((0, 1), (1, 2))),
            3: TaskTemplate("triangle", 3, ((0, 1), (1, 2), (0, 2))),
            4: TaskTemplate("star4", 4, ((0, 1), (0, 2), (0, 3))),
        }
    )


# Instance families small enough for the brute-force reference: at most
# 7 components and 12 VMs. Mixed shapes, fleets, regimes, and modes.
CORPUS_CONFIGS = (
    dict(task_types=(2,), num_sps=3, vms_per_sp=2),
    dict(task_types=(3,), num_sps=2, vms_per_sp=3),
    dict(task_types=(1, 1), num_sps=4, vms_per_sp=2),
    dict(task_types=(4,), num_sps=3, vms_per_sp=3),
    dict(task_types=(2, 3), num_sps=5, vms_per_sp=2),
)


def corpus_spec(index: int, seed: int) -> ScenarioSpec:
    """Deterministic small-instance spec family for cross-checking."""
    cfg = CORPUS_CONFIGS[index % len(CORPUS_CONFIGS)]
    variant = index % 4
    regime = TrafficRegime.LOW_TRAFFIC if index % 2 == 0 else TrafficRegime.RUSH_HOUR
    return ScenarioSpec(
        catalog=mini_catalog(),
        regime=regime,
        omega_mode=OmegaMode.STATIC if variant < 2 else OmegaMode.DERIVED_MIN,
        edge_dropout=0.3 if variant in (1, 3) else 0.0,
        reachability_policy="random-subset" if variant == 3 else "all",
        seed=seed,
        **cfg,
    )
