"""Feasibility predicates and objective evaluation for component assignments.

Every solver builds its pruning/candidate logic on the predicates here
(`slot_admissible`, `edge_feasible`) so that solver decisions and final
scoring can never disagree on borderline floating-point cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (
    Assignment,
    ComponentId,
    Instance,
    OmegaMode,
    Violation,
    VmSlot,
)


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Objective value and its parts for one assignment."""

    per_task_completion: tuple[float, ...]  # max component exec time per task
    completion_norm: float  # 2-norm of the completion vector
    exchange_cost: float  # summed cost of cut task edges
    total: float  # xi_t * norm + xi_c * exchange


def contact_feasible(rate: float, omega: float, epsilon: float) -> bool:
    """Whether a contact of exponential rate `rate` lasts at least `omega`
    with probability >= epsilon. Boundary equality is admissible."""
    return math.exp(-rate * omega) >= epsilon


def slot_admissible(inst: Instance, comp: ComponentId, slot: VmSlot) -> bool:
    """Per-component admissibility: the VM finishes within the component's
    deadline and its SP is reachable from the owning TO. Equality with the
    deadline is admissible."""
    if slot.exec_time > inst.deadline(comp):
        return False
    return slot.sp_index in inst.vc.reachability[comp.task_index]


def _required_omega(inst: Instance, omega: float, s1: VmSlot, s2: VmSlot) -> float:
    if inst.omega_mode is OmegaMode.DERIVED_MIN:
        return min(s1.exec_time, s2.exec_time)
    return omega


def edge_feasible(inst: Instance, omega: float, s1: VmSlot, s2: VmSlot) -> bool:
    """Whether two endpoint placements satisfy the edge's contact demand.

    Co-located endpoints exchange data inside one SP and are always
    feasible. Across SPs, the contact between them must persist for the
    required connecting duration with probability >= epsilon; absent a
    contact link, the placement is infeasible.
    """
    if s1.sp_index == s2.sp_index:
        return True
    rate = inst.vc.contact_rate(s1.sp_index, s2.sp_index)
    if rate is None:
        return False
    return contact_feasible(rate, _required_omega(inst, omega, s1, s2), inst.epsilon)


def assignment_feasible(inst: Instance, a: Assignment) -> tuple[bool, Violation | None]:
    """Check one total assignment against all placement constraints.

    Returns (True, None) when feasible, else (False, first violation) in a
    fixed check order: VM capacity, then per-component admissibility in
    component order, then edge contact demands in task/edge order. Kinds
    are "capacity", "admissibility", "contact".
    """
    dupes = a.duplicate_slots()
    if dupes:
        y, j = dupes[0]
        return False, Violation("capacity", f"sp[{y}].vm[{j}]", "VM assigned more than once")

    for comp in inst.components():
        slot = a.slot_of(comp)
        if not slot_admissible(inst, comp, slot):
            ent = f"task[{comp.task_index}].component[{comp.component_index}]"
            if slot.exec_time > inst.deadline(comp):
                detail = f"exec_time {slot.exec_time} exceeds deadline {inst.deadline(comp)}"
            else:
                detail = f"sp[{slot.sp_index}] not reachable from TO {comp.task_index}"
            return False, Violation("admissibility", ent, detail)

    for c1, c2, omega in inst.task_edges():
        s1, s2 = a.slot_of(c1), a.slot_of(c2)
        if not edge_feasible(inst, omega, s1, s2):
            ent = (
                f"task[{c1.task_index}].edge({c1.component_index},{c2.component_index})"
            )
            return False, Violation(
                "contact", ent, f"sp[{s1.sp_index}]-sp[{s2.sp_index}] contact too brief"
            )

    return True, None


def completion_times(inst: Instance, a: Assignment) -> tuple[float, ...]:
    """Per-task completion time: the slowest assigned VM of each task.

    Components of one task run in parallel, so the task completes when its
    longest-running component does.
    """
    out = []
    for x, task in enumerate(inst.tasks):
        worst = 0.0
        for i in range(task.num_components):
            t = a.slot_of(ComponentId(x, i)).exec_time
            if t > worst:
                worst = t
        out.append(worst)
    return tuple(out)


def exchange_cost(inst: Instance, a: Assignment) -> float:
    """Total data-exchange cost: each task edge whose endpoints sit on
    different SPs contributes that SP pair's cost once."""
    total = 0.0
    for c1, c2, _ in inst.task_edges():
        y1 = a.slot_of(c1).sp_index
        y2 = a.slot_of(c2).sp_index
        if y1 != y2:
            total += inst.exch_cost(y1, y2)
    return total


def evaluate(inst: Instance, a: Assignment) -> ObjectiveBreakdown:
    """Score one total assignment; does not check feasibility.

    total = xi_t * ||completion vector||_2 + xi_c * exchange cost.
    """
    per_task = completion_times(inst, a)
    norm = math.sqrt(sum(t * t for t in per_task))
    exch = exchange_cost(inst, a)
    return ObjectiveBreakdown(
        per_task_completion=per_task,
        completion_norm=norm,
        exchange_cost=exch,
        total=inst.xi_t * norm + inst.xi_c * exch,
    )
