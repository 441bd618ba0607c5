"""Independent reference implementation used to cross-check the solvers.

Everything here is written as a direct transcription of the problem
statement: the placement indicator is materialized as a full nested
mapping, the exchange cost is the half double sum over ordered component
pairs, and enumeration walks raw slot permutations. No code is shared
with `objective` or `solvers` beyond the data model, so agreement between
the two paths is meaningful evidence of correctness.

Deliberately slow. The guards below keep enumeration inside sizes where
permutation counting stays tractable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .model import Assignment, ComponentId, Instance, OmegaMode, VmSlot

GUARD_MAX_COMPONENTS = 7
GUARD_MAX_VMS = 12


def _placement_indicator(
    inst: Instance, a: Assignment
) -> dict[ComponentId, dict[tuple[int, int], int]]:
    """nu[component][(sp, vm)] = 1 iff the component runs on that VM."""
    slots = [(s.sp_index, s.vm_index) for s in inst.vc.slots()]
    nu: dict[ComponentId, dict[tuple[int, int], int]] = {}
    for comp in inst.components():
        chosen = a.slot_of(comp)
        nu[comp] = {key: 0 for key in slots}
        nu[comp][(chosen.sp_index, chosen.vm_index)] = 1
    return nu


def literal_feasible(inst: Instance, a: Assignment) -> bool:
    """Constraint check spelled out from the formulation, one clause at a
    time, over the materialized indicator."""
    nu = _placement_indicator(inst, a)

    # Capacity: every VM hosts at most one component, every component
    # exactly one VM.
    for key in [(s.sp_index, s.vm_index) for s in inst.vc.slots()]:
        if sum(nu[comp][key] for comp in inst.components()) > 1:
            return False
    for comp in inst.components():
        if sum(nu[comp].values()) != 1:
            return False

    # Deadline and reachability, per component.
    for comp in inst.components():
        slot = a.slot_of(comp)
        if slot.exec_time > inst.tasks[comp.task_index].deadlines[comp.component_index]:
            return False
        if slot.sp_index not in inst.vc.reachability[comp.task_index]:
            return False

    # Contact persistence, per edge, both ordered directions.
    for x, task in enumerate(inst.tasks):
        for i, j, omega in task.edges:
            for a_idx, b_idx in ((i, j), (j, i)):
                sa = a.slot_of(ComponentId(x, a_idx))
                sb = a.slot_of(ComponentId(x, b_idx))
                if sa.sp_index == sb.sp_index:
                    continue
                lam = inst.vc.contact_rate(sa.sp_index, sb.sp_index)
                if lam is None:
                    return False
                if inst.omega_mode is OmegaMode.DERIVED_MIN:
                    needed = min(sa.exec_time, sb.exec_time)
                else:
                    needed = omega
                if math.exp(-lam * needed) < inst.epsilon:
                    return False

    return True


def literal_total(inst: Instance, a: Assignment) -> float:
    """Objective spelled out from the formulation.

    Completion: per task, the max over components of (indicator * exec
    time) summed over all VMs. Exchange: half the double sum over ordered
    component pairs of (cut indicator * pair cost), which counts each cut
    edge exactly once.
    """
    nu = _placement_indicator(inst, a)
    slot_list = inst.vc.slots()

    completions = []
    for x, task in enumerate(inst.tasks):
        per_comp = []
        for i in range(task.num_components):
            comp = ComponentId(x, i)
            per_comp.append(
                sum(
                    nu[comp][(s.sp_index, s.vm_index)] * s.exec_time for s in slot_list
                )
            )
        completions.append(max(per_comp))
    norm = math.sqrt(sum(t * t for t in completions))

    half_double_sum = 0.0
    for x, task in enumerate(inst.tasks):
        adjacent: dict[tuple[int, int], bool] = {}
        for i, j, _ in task.edges:
            adjacent[(i, j)] = True
            adjacent[(j, i)] = True
        n = task.num_components
        for i in range(n):
            for j in range(n):
                if i == j or not adjacent.get((i, j)):
                    continue
                yi = a.slot_of(ComponentId(x, i)).sp_index
                yj = a.slot_of(ComponentId(x, j)).sp_index
                if yi != yj:
                    half_double_sum += inst.exch_costs[
                        (yi, yj) if yi <= yj else (yj, yi)
                    ]
    exch = half_double_sum / 2.0

    return inst.xi_t * norm + inst.xi_c * exch


@dataclass(frozen=True)
class OracleResult:
    feasible: bool  # any feasible assignment exists
    best_total: float | None
    best_assignment: Assignment | None
    num_feasible: int
    num_enumerated: int


def oracle_enumerate(inst: Instance) -> OracleResult:
    """Exhaustive ground truth by brute-force permutation enumeration.

    Walks every injective component-to-slot map in lexicographic slot-index
    order and keeps the first assignment achieving the minimum total, which
    pins the same tie-break the search solver uses. Guarded to small
    instances; raises ValueError beyond the guard.
    """
    comps = list(inst.components())
    slots = inst.vc.slots()
    if len(comps) > GUARD_MAX_COMPONENTS or len(slots) > GUARD_MAX_VMS:
        raise ValueError(
            f"oracle guard: {len(comps)} components / {len(slots)} VMs exceeds "
            f"{GUARD_MAX_COMPONENTS} / {GUARD_MAX_VMS}"
        )
    if len(comps) > len(slots):
        return OracleResult(False, None, None, 0, 0)

    # Pure-value caches; each candidate is still checked clause by clause.
    deadline_ok = [
        [not s.exec_time > inst.deadline(c) and s.sp_index in inst.vc.reachability[c.task_index]
         for s in slots]
        for c in comps
    ]
    comp_pos = {c: k for k, c in enumerate(comps)}
    edge_specs = []
    for c1, c2, omega in inst.task_edges():
        edge_specs.append((comp_pos[c1], comp_pos[c2], omega))
    edge_pair_ok: list[dict[tuple[int, int], bool]] = []
    for _, _, omega in edge_specs:
        table = {}
        for si, s1 in enumerate(slots):
            for sj, s2 in enumerate(slots):
                if si == sj:
                    continue
                if s1.sp_index == s2.sp_index:
                    table[(si, sj)] = True
                    continue
                lam = inst.vc.contact_rate(s1.sp_index, s2.sp_index)
                if lam is None:
                    table[(si, sj)] = False
                    continue
                if inst.omega_mode is OmegaMode.DERIVED_MIN:
                    needed = min(s1.exec_time, s2.exec_time)
                else:
                    needed = omega
                table[(si, sj)] = math.exp(-lam * needed) >= inst.epsilon
        edge_pair_ok.append(table)

    best_total = None
    best_assignment = None
    num_feasible = 0
    num_enumerated = 0
    indices = range(len(slots))
    for perm in itertools.permutations(indices, len(comps)):
        num_enumerated += 1
        ok = True
        for k in range(len(comps)):
            if not deadline_ok[k][perm[k]]:
                ok = False
                break
        if ok:
            for e, (k1, k2, _) in enumerate(edge_specs):
                if not edge_pair_ok[e][(perm[k1], perm[k2])]:
                    ok = False
                    break
        if not ok:
            continue
        assignment = Assignment({comps[k]: slots[perm[k]] for k in range(len(comps))})
        num_feasible += 1
        total = literal_total(inst, assignment)
        if best_total is None or total < best_total:
            best_total = total
            best_assignment = assignment

    return OracleResult(
        feasible=num_feasible > 0,
        best_total=best_total,
        best_assignment=best_assignment,
        num_feasible=num_feasible,
        num_enumerated=num_enumerated,
    )
