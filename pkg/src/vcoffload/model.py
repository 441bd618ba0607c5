"""Core domain types for multi-task offloading over a vehicular cloud.

Task owners (TOs) carry undirected weighted component graphs; service
providers (SPs) pool idle VMs behind one-hop V2V links whose contact
durations are exponentially distributed. Everything downstream (objective
evaluation, solvers, the experiment harness) works on the `Instance`
bundle defined here.

All values are immutable after construction and safe to share between
threads/processes; mappings held in frozen dataclasses must be treated as
read-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, NamedTuple

FORMAT_VERSION = 1

PairMap = Mapping[tuple[int, int], float]


class OmegaMode(Enum):
    """How the required connecting duration of a task edge is obtained.

    STATIC uses the edge weight stored in the task graph; DERIVED_MIN
    recomputes it per candidate assignment as the smaller execution time
    of the two VMs hosting the edge's endpoints.
    """

    STATIC = "static"
    DERIVED_MIN = "derived-min"


def pair_key(a: int, b: int) -> tuple[int, int]:
    """Canonical key for an unordered index pair."""
    return (a, b) if a <= b else (b, a)


class ComponentId(NamedTuple):
    task_index: int
    component_index: int


@dataclass(frozen=True)
class VmSlot:
    """One idle VM on an SP; runs exactly one component."""

    sp_index: int
    vm_index: int
    exec_time: float  # seconds to process one component


@dataclass(frozen=True)
class TaskGraph:
    """One TO's undirected weighted component graph.

    `edges` holds (i, i', omega) triples over component indices; pairs are
    unordered and a valid graph is simple (validate_instance reports
    duplicates and self-loops rather than raising).
    """

    deadlines: tuple[float, ...]  # max tolerant execution time per component
    edges: tuple[tuple[int, int, float], ...]

    @property
    def num_components(self) -> int:
        return len(self.deadlines)

    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.num_components
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return tuple(deg)

    def omega_of(self, i: int, j: int) -> float:
        """Stored connecting duration of edge {i, j}."""
        want = pair_key(i, j)
        for a, b, omega in self.edges:
            if pair_key(a, b) == want:
                return omega
        raise KeyError(f"no edge {want} in task graph")


@dataclass(frozen=True)
class ServiceProvider:
    vm_exec_times: tuple[float, ...]  # one entry per idle VM


@dataclass(frozen=True)
class VcGraph:
    """The vehicular cloud: SPs with VM inventories, contact rates, reachability.

    `contact_rates` maps unordered SP pairs to the exponential contact-rate
    parameter lambda; a missing pair means the SPs share no one-hop V2V
    link. `reachability[x]` is the set of SP indices inside TO x's
    communication range.
    """

    sps: tuple[ServiceProvider, ...]
    contact_rates: PairMap
    reachability: tuple[frozenset[int], ...]

    @property
    def num_sps(self) -> int:
        return len(self.sps)

    @property
    def num_vms(self) -> int:
        return sum(len(sp.vm_exec_times) for sp in self.sps)

    def slots(self) -> tuple[VmSlot, ...]:
        """All VM slots in (sp_index, vm_index) order."""
        out = []
        for y, sp in enumerate(self.sps):
            for j, t in enumerate(sp.vm_exec_times):
                out.append(VmSlot(y, j, t))
        return tuple(out)

    def contact_rate(self, y: int, y2: int) -> float | None:
        return self.contact_rates.get(pair_key(y, y2))

    def sp_degree(self, y: int) -> int:
        """Number of contact edges incident to SP y."""
        return sum(1 for a, b in self.contact_rates if y in (a, b) and a != b)


@dataclass(frozen=True)
class Instance:
    """A complete problem instance shared by all solvers."""

    tasks: tuple[TaskGraph, ...]
    vc: VcGraph
    exch_costs: PairMap  # unordered SP pair -> data exchange cost
    epsilon: float  # contact-probability threshold in [0, 1]
    xi_t: float  # weight on the completion-time 2-norm
    xi_c: float  # weight on the exchange cost
    omega_mode: OmegaMode = OmegaMode.STATIC

    @property
    def num_components(self) -> int:
        return sum(t.num_components for t in self.tasks)

    def components(self) -> Iterator[ComponentId]:
        for x, task in enumerate(self.tasks):
            for i in range(task.num_components):
                yield ComponentId(x, i)

    def deadline(self, comp: ComponentId) -> float:
        return self.tasks[comp.task_index].deadlines[comp.component_index]

    def exch_cost(self, y: int, y2: int) -> float:
        return self.exch_costs[pair_key(y, y2)]

    def task_edges(self) -> Iterator[tuple[ComponentId, ComponentId, float]]:
        """All task edges, tasks in order, edges in stored order."""
        for x, task in enumerate(self.tasks):
            for i, j, omega in task.edges:
                yield ComponentId(x, i), ComponentId(x, j), omega


@dataclass(frozen=True)
class Assignment:
    """Total map from every component to a VM slot (the kappa mapping).

    A valid assignment is injective: no VM slot receives two components.
    Solvers only ever return valid assignments; `duplicate_slots` exists so
    validators can report breaches on hand-built ones.
    """

    slots: Mapping[ComponentId, VmSlot]

    def slot_of(self, comp: ComponentId) -> VmSlot:
        return self.slots[comp]

    def duplicate_slots(self) -> list[tuple[int, int]]:
        """(sp_index, vm_index) pairs used by more than one component."""
        seen: dict[tuple[int, int], int] = {}
        for slot in self.slots.values():
            key = (slot.sp_index, slot.vm_index)
            seen[key] = seen.get(key, 0) + 1
        return [key for key, n in seen.items() if n > 1]

    def is_total(self, inst: Instance) -> bool:
        return all(comp in self.slots for comp in inst.components())

    def slot_vector(self, inst: Instance) -> tuple[tuple[int, int], ...]:
        """(sp_index, vm_index) per component in component order; used for
        lexicographic tie-breaking and serialization."""
        return tuple(
            (self.slots[c].sp_index, self.slots[c].vm_index) for c in inst.components()
        )


@dataclass(frozen=True)
class Violation:
    """One breached instance invariant; data, not an exception."""

    kind: str  # short machine-checkable category, e.g. "reachability-empty"
    entity: str  # offending entity, e.g. "task[1].edge(1,2)"
    detail: str = ""


def validate_instance(inst: Instance) -> list[Violation]:
    """Check every structural invariant; returns one Violation per breach.

    An empty list means the instance is well-formed. Violations are data:
    malformed instances are a normal condition for loaders and fuzzers.
    """
    out: list[Violation] = []
    num_sps = inst.vc.num_sps

    for x, task in enumerate(inst.tasks):
        n = task.num_components
        if n == 0:
            out.append(Violation("task-empty", f"task[{x}]", "task has no components"))
        for i, d in enumerate(task.deadlines):
            if not d > 0:
                out.append(
                    Violation("deadline-nonpositive", f"task[{x}].component[{i}]", f"deadline={d}")
                )
        seen_pairs: set[tuple[int, int]] = set()
        for i, j, omega in task.edges:
            ent = f"task[{x}].edge({i},{j})"
            if not (0 <= i < n and 0 <= j < n):
                out.append(Violation("edge-endpoint", ent, "endpoint out of range"))
                continue
            if i == j:
                out.append(Violation("edge-self-loop", ent, "self-loop"))
                continue
            key = pair_key(i, j)
            if key in seen_pairs:
                out.append(Violation("edge-duplicate", ent, "duplicate undirected edge"))
            seen_pairs.add(key)
            if not omega > 0:
                out.append(Violation("omega-nonpositive", ent, f"omega={omega}"))

    for y, sp in enumerate(inst.vc.sps):
        for j, t in enumerate(sp.vm_exec_times):
            if not t > 0:
                out.append(Violation("exec-nonpositive", f"sp[{y}].vm[{j}]", f"exec_time={t}"))

    for (a, b), lam in sorted(inst.vc.contact_rates.items()):
        ent = f"contact_rates({a},{b})"
        if not (0 <= a < num_sps and 0 <= b < num_sps) or a == b:
            out.append(Violation("contact-pair-invalid", ent, "bad SP pair"))
        elif not lam > 0:
            out.append(Violation("contact-rate-nonpositive", ent, f"lambda={lam}"))

    for (a, b), c in sorted(inst.exch_costs.items()):
        ent = f"exch_costs({a},{b})"
        if not (0 <= a < num_sps and 0 <= b < num_sps) or a == b:
            out.append(Violation("exch-pair-invalid", ent, "bad SP pair"))
        elif not c > 0:
            out.append(Violation("exch-cost-nonpositive", ent, f"cost={c}"))
    for a in range(num_sps):
        for b in range(a + 1, num_sps):
            if (a, b) not in inst.exch_costs:
                out.append(
                    Violation("exch-cost-missing", f"exch_costs({a},{b})", "pair has no cost")
                )

    if len(inst.vc.reachability) != len(inst.tasks):
        out.append(
            Violation(
                "reachability-count",
                "reachability",
                f"{len(inst.vc.reachability)} sets for {len(inst.tasks)} tasks",
            )
        )
    for x, reach in enumerate(inst.vc.reachability):
        if not reach:
            out.append(Violation("reachability-empty", f"task[{x}]", "TO reaches no SP"))
        for y in reach:
            if not 0 <= y < num_sps:
                out.append(Violation("reachability-index", f"task[{x}]", f"sp index {y}"))

    if not 0 <= inst.epsilon <= 1:
        out.append(Violation("epsilon-range", "epsilon", f"epsilon={inst.epsilon}"))
    if inst.xi_t < 0:
        out.append(Violation("weight-negative", "xi_t", f"xi_t={inst.xi_t}"))
    if inst.xi_c < 0:
        out.append(Violation("weight-negative", "xi_c", f"xi_c={inst.xi_c}"))

    return out


# ---------------------------------------------------------------------------
# Serialization (format_version 1)
# ---------------------------------------------------------------------------

def _pairs_to_rows(pairs: PairMap) -> list[list[float]]:
    return [[a, b, v] for (a, b), v in sorted(pairs.items())]


def _rows_to_pairs(rows) -> dict[tuple[int, int], float]:
    return {pair_key(int(a), int(b)): float(v) for a, b, v in rows}


def instance_to_dict(inst: Instance) -> dict:
    """Encode an Instance as a JSON-compatible tree."""
    return {
        "format_version": FORMAT_VERSION,
        "tasks": [
            {
                "deadlines": list(t.deadlines),
                "edges": [[i, j, omega] for i, j, omega in t.edges],
            }
            for t in inst.tasks
        ],
        "sps": [{"vm_exec_times": list(sp.vm_exec_times)} for sp in inst.vc.sps],
        "contact_rates": _pairs_to_rows(inst.vc.contact_rates),
        "exch_costs": _pairs_to_rows(inst.exch_costs),
        "reachability": [sorted(r) for r in inst.vc.reachability],
        "epsilon": inst.epsilon,
        "xi_t": inst.xi_t,
        "xi_c": inst.xi_c,
        "omega_mode": inst.omega_mode.value,
    }


def instance_from_dict(data: Mapping) -> Instance:
    """Decode an Instance; raises ValueError on unknown format versions.

    Structural invariants are not enforced here; run validate_instance on
    anything loaded from outside.
    """
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported instance format_version: {version!r}")
    tasks = tuple(
        TaskGraph(
            deadlines=tuple(float(d) for d in t["deadlines"]),
            edges=tuple((int(i), int(j), float(w)) for i, j, w in t["edges"]),
        )
        for t in data["tasks"]
    )
    vc = VcGraph(
        sps=tuple(
            ServiceProvider(tuple(float(t) for t in sp["vm_exec_times"])) for sp in data["sps"]
        ),
        contact_rates=_rows_to_pairs(data["contact_rates"]),
        reachability=tuple(frozenset(int(y) for y in r) for r in data["reachability"]),
    )
    return Instance(
        tasks=tasks,
        vc=vc,
        exch_costs=_rows_to_pairs(data["exch_costs"]),
        epsilon=float(data["epsilon"]),
        xi_t=float(data["xi_t"]),
        xi_c=float(data["xi_c"]),
        omega_mode=OmegaMode(data["omega_mode"]),
    )


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2)
        fh.write("\n")


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def assignment_to_rows(inst: Instance, a: Assignment) -> list[list[int]]:
    """[task, component, sp, vm] rows in component order."""
    return [
        [c.task_index, c.component_index, a.slots[c].sp_index, a.slots[c].vm_index]
        for c in inst.components()
    ]


def assignment_from_rows(inst: Instance, rows) -> Assignment:
    slots = {}
    for x, i, y, j in rows:
        exec_time = inst.vc.sps[int(y)].vm_exec_times[int(j)]
        slots[ComponentId(int(x), int(i))] = VmSlot(int(y), int(j), exec_time)
    return Assignment(slots)
