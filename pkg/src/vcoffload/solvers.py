"""Assignment solvers: exhaustive search plus three constructive heuristics.

All four build their candidate sets from the predicates in `objective`, so
a placement a solver considers is exactly a placement the scorer accepts.
VM slot sets are kept as Python int bitmasks; bit i stands for the slot at
index i of `VcGraph.slots()` order.

Solvers assume a structurally valid instance (see model.validate_instance);
they do not re-validate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import objective as obj
from .model import Assignment, Instance

BUDGET_CHECK_INTERVAL = 8192  # DFS nodes between wall-clock budget checks


class SolverStatus(Enum):
    SOLVED = "solved"
    INFEASIBLE = "infeasible"
    ABORTED = "aborted"  # budget hit; best-so-far reported if any


@dataclass(frozen=True)
class SolverReport:
    """Outcome of one solver run.

    `trace` holds (progress, best_total) pairs recorded at each incumbent
    improvement; progress counts DFS nodes for the exhaustive solver and
    1-based attempt numbers for the randomized one. `evaluations` counts
    DFS nodes visited (exhaustive), completed attempts (randomized), or
    placement decisions (greedy heuristics). When an assignment is present,
    `breakdown` equals `objective.evaluate(inst, assignment)` exactly.
    """

    status: SolverStatus
    assignment: Assignment | None
    breakdown: obj.ObjectiveBreakdown | None
    trace: tuple[tuple[int, float], ...]
    wall_time: float
    seed: int
    evaluations: int


class _Search:
    """Shared precomputation: slot order, admissibility masks, adjacency.

    Edge-compatibility masks (slots a neighbor may take, given one endpoint
    pinned to an anchor slot) are filled lazily since exhaustive search on
    small instances rarely touches every (edge, anchor) pair.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        self.comps = list(inst.components())
        self.slots = inst.vc.slots()
        self.num_slots = len(self.slots)
        self.slot_exec = [s.exec_time for s in self.slots]
        self.slot_sp = [s.sp_index for s in self.slots]
        self.task_of = [c.task_index for c in self.comps]

        self.adm = []
        for c in self.comps:
            m = 0
            for si, s in enumerate(self.slots):
                if obj.slot_admissible(inst, c, s):
                    m |= 1 << si
            self.adm.append(m)

        comp_pos = {c: k for k, c in enumerate(self.comps)}
        self.edges: list[tuple[int, int, float]] = []
        self.adj: list[list[tuple[int, int]]] = [[] for _ in self.comps]
        for c1, c2, omega in inst.task_edges():
            e = len(self.edges)
            k1, k2 = comp_pos[c1], comp_pos[c2]
            self.edges.append((k1, k2, omega))
            self.adj[k1].append((k2, e))
            self.adj[k2].append((k1, e))

        self._edge_masks: dict[tuple[int, int], int] = {}

        n_sp = inst.vc.num_sps
        self.exch_table = [[0.0] * n_sp for _ in range(n_sp)]
        for (y1, y2), c in inst.exch_costs.items():
            self.exch_table[y1][y2] = c
            self.exch_table[y2][y1] = c

    def edge_mask(self, e: int, anchor_si: int) -> int:
        """Bitmask of slots the other endpoint of edge e may take when one
        endpoint sits on slot anchor_si."""
        key = (e, anchor_si)
        m = self._edge_masks.get(key)
        if m is None:
            omega = self.edges[e][2]
            anchor = self.slots[anchor_si]
            m = 0
            for si, s in enumerate(self.slots):
                if si != anchor_si and obj.edge_feasible(self.inst, omega, anchor, s):
                    m |= 1 << si
            self._edge_masks[key] = m
        return m

    def candidates(self, k: int, used: int, placed: list[int]) -> int:
        """Slots component k may take: admissible, free, and contact-feasible
        against every already placed neighbor."""
        m = self.adm[k] & ~used
        if m:
            for other, e in self.adj[k]:
                po = placed[other]
                if po >= 0:
                    m &= self.edge_mask(e, po)
                    if not m:
                        break
        return m

    def assignment_of(self, placed: list[int]) -> Assignment:
        return Assignment(
            {self.comps[k]: self.slots[placed[k]] for k in range(len(self.comps))}
        )

    def obviously_infeasible(self) -> bool:
        # More components than VMs, or some component with no admissible VM;
        # either makes every completion infeasible.
        if len(self.comps) > self.num_slots:
            return True
        return any(m == 0 for m in self.adm)


def solve_optimal(inst: Instance, budget: float | None = None) -> SolverReport:
    """Exhaustive depth-first enumeration of injective assignments.

    Components are placed in component order, slots tried in ascending slot
    index, and the incumbent is replaced only on strict improvement, so the
    reported optimum is the lexicographically first minimizer. Pruning is
    constraint-only (admissibility, occupancy, contact with placed
    neighbors) and never discards a feasible completion.

    `budget` caps wall-clock seconds; on expiry the best incumbent so far
    is returned with status ABORTED.
    """
    t0 = time.perf_counter()
    s = _Search(inst)
    n = len(s.comps)
    if n == 0:
        empty = Assignment({})
        bd = obj.evaluate(inst, empty)
        return SolverReport(
            SolverStatus.SOLVED, empty, bd, ((0, bd.total),), time.perf_counter() - t0, 0, 0
        )
    if s.obviously_infeasible():
        return SolverReport(
            SolverStatus.INFEASIBLE, None, None, (), time.perf_counter() - t0, 0, 0
        )

    adm, adj, edge_masks = s.adm, s.adj, s._edge_masks
    build_edge_mask = s.edge_mask
    slot_exec, slot_sp, task_of = s.slot_exec, s.slot_sp, s.task_of
    exch_table = s.exch_table
    xi_t, xi_c = inst.xi_t, inst.xi_c
    num_tasks = len(inst.tasks)

    placed = [-1] * n
    used = 0
    task_max = [0.0] * num_tasks
    prev_max = [0.0] * n  # per-level saved task max, restored on backtrack
    level_cost = [0.0] * (n + 1)  # cumulative exchange cost snapshots
    stack = [s.candidates(0, 0, placed)]

    nodes = 0
    best_total = math.inf
    best_placed: list[int] | None = None
    trace: list[tuple[int, float]] = []
    aborted = False

    while stack:
        m = stack[-1]
        if not m:
            stack.pop()
            if not stack:
                break
            k = len(stack) - 1
            used ^= 1 << placed[k]
            task_max[task_of[k]] = prev_max[k]
            placed[k] = -1
            continue

        low = m & -m
        stack[-1] = m ^ low
        si = low.bit_length() - 1
        k = len(stack) - 1
        nodes += 1
        if budget is not None and not nodes % BUDGET_CHECK_INTERVAL:
            if time.perf_counter() - t0 > budget:
                aborted = True
                break

        x = task_of[k]
        prev_max[k] = task_max[x]
        t = slot_exec[si]
        if t > task_max[x]:
            task_max[x] = t
        sp = slot_sp[si]
        add = 0.0
        for other, _ in adj[k]:
            po = placed[other]
            if po >= 0:
                osp = slot_sp[po]
                if osp != sp:
                    add += exch_table[sp][osp]
        cost = level_cost[k] + add
        level_cost[k + 1] = cost
        placed[k] = si
        used |= low

        if k + 1 == n:
            sq = 0.0
            for v in task_max:
                sq += v * v
            total = xi_t * math.sqrt(sq) + xi_c * cost
            if total < best_total:
                best_total = total
                best_placed = placed.copy()
                trace.append((nodes, total))
            used ^= low
            task_max[x] = prev_max[k]
            placed[k] = -1
        else:
            nk = k + 1
            m2 = adm[nk] & ~used
            if m2:
                for other, e in adj[nk]:
                    po = placed[other]
                    if po >= 0:
                        em = edge_masks.get((e, po))
                        if em is None:
                            em = build_edge_mask(e, po)
                        m2 &= em
                        if not m2:
                            break
            stack.append(m2)

    wall = time.perf_counter() - t0
    if best_placed is None:
        status = SolverStatus.ABORTED if aborted else SolverStatus.INFEASIBLE
        return SolverReport(status, None, None, (), wall, 0, nodes)
    assignment = s.assignment_of(best_placed)
    breakdown = obj.evaluate(inst, assignment)
    status = SolverStatus.ABORTED if aborted else SolverStatus.SOLVED
    return SolverReport(status, assignment, breakdown, tuple(trace), wall, 0, nodes)


def _nth_set_bit(m: int, j: int) -> int:
    """Index of the j-th (0-based) set bit of m, counting from the low end."""
    for _ in range(j):
        m &= m - 1
    return (m & -m).bit_length() - 1


def solve_crrm(inst: Instance, gamma: int, seed: int) -> SolverReport:
    """Randomized constructive search over independent attempts.

    Each of the `gamma` attempts picks a still-unplaced component uniformly
    at random, collects its candidate slots (admissible, free, and
    contact-feasible against placed neighbors; a component with no placed
    neighbor faces no contact filter yet), and picks one uniformly. An
    attempt with an empty candidate set is abandoned; the incumbent is
    kept. The incumbent is replaced only on strict improvement.

    Attempt r draws from a generator seeded with the pair (seed, r), so
    results are independent of how attempts are batched or parallelized.
    Returns INFEASIBLE only if no attempt completes.
    """
    t0 = time.perf_counter()
    s = _Search(inst)
    n = len(s.comps)
    if n == 0:
        empty = Assignment({})
        bd = obj.evaluate(inst, empty)
        return SolverReport(
            SolverStatus.SOLVED, empty, bd, ((0, bd.total),), time.perf_counter() - t0, seed, 0
        )
    if s.obviously_infeasible():
        return SolverReport(
            SolverStatus.INFEASIBLE, None, None, (), time.perf_counter() - t0, seed, 0
        )

    completed = 0
    best_total = math.inf
    best_assignment: Assignment | None = None
    best_breakdown: obj.ObjectiveBreakdown | None = None
    trace: list[tuple[int, float]] = []

    for r in range(gamma):
        rng = np.random.default_rng(np.random.SeedSequence((seed, r)))
        placed = [-1] * n
        used = 0
        remaining = list(range(n))
        ok = True
        while remaining:
            idx = int(rng.integers(len(remaining)))
            k = remaining[idx]
            m = s.candidates(k, used, placed)
            if not m:
                ok = False
                break
            pick = int(rng.integers(m.bit_count()))
            si = _nth_set_bit(m, pick)
            placed[k] = si
            used |= 1 << si
            remaining[idx] = remaining[-1]
            remaining.pop()
        if not ok:
            continue
        completed += 1
        assignment = s.assignment_of(placed)
        breakdown = obj.evaluate(inst, assignment)
        if breakdown.total < best_total:
            best_total = breakdown.total
            best_assignment = assignment
            best_breakdown = breakdown
            trace.append((r + 1, best_total))

    wall = time.perf_counter() - t0
    if best_assignment is None:
        return SolverReport(SolverStatus.INFEASIBLE, None, None, (), wall, seed, completed)
    if not trace or trace[-1][0] != gamma:
        trace.append((gamma, best_total))
    return SolverReport(
        SolverStatus.SOLVED, best_assignment, best_breakdown, tuple(trace), wall, seed, completed
    )


def _construct(
    inst: Instance, s: _Search, order: list[int], pref: list[int], seed: int, t0: float
) -> SolverReport:
    """Place components in `order`, each on its first candidate slot in
    `pref` order; INFEASIBLE as soon as a component has no candidate."""
    placed = [-1] * len(s.comps)
    used = 0
    decisions = 0
    for k in order:
        decisions += 1
        m = s.candidates(k, used, placed)
        if not m:
            return SolverReport(
                SolverStatus.INFEASIBLE, None, None, (), time.perf_counter() - t0, seed, decisions
            )
        for si in pref:
            if (m >> si) & 1:
                placed[k] = si
                used |= 1 << si
                break
    assignment = s.assignment_of(placed)
    breakdown = obj.evaluate(inst, assignment)
    return SolverReport(
        SolverStatus.SOLVED,
        assignment,
        breakdown,
        ((1, breakdown.total),),
        time.perf_counter() - t0,
        seed,
        decisions,
    )


def solve_dpm(inst: Instance, seed: int = 0) -> SolverReport:
    """Degree-priority matching heuristic, fully deterministic.

    Components are placed from highest task-graph degree down (ties by
    component identity); each takes the free feasible VM on the best
    connected SP (most contact links, ties by SP index), preferring faster
    VMs within an SP. `seed` is recorded for reporting symmetry only.
    """
    t0 = time.perf_counter()
    s = _Search(inst)
    if not s.comps:
        empty = Assignment({})
        bd = obj.evaluate(inst, empty)
        return SolverReport(
            SolverStatus.SOLVED, empty, bd, ((0, bd.total),), time.perf_counter() - t0, seed, 0
        )
    if s.obviously_infeasible():
        return SolverReport(
            SolverStatus.INFEASIBLE, None, None, (), time.perf_counter() - t0, seed, 0
        )

    degree = {}
    for x, task in enumerate(inst.tasks):
        for i, d in enumerate(task.degrees()):
            degree[(x, i)] = d
    order = sorted(
        range(len(s.comps)),
        key=lambda k: (-degree[(s.comps[k].task_index, s.comps[k].component_index)], s.comps[k]),
    )
    sp_deg = [inst.vc.sp_degree(y) for y in range(inst.vc.num_sps)]
    pref = sorted(
        range(s.num_slots),
        key=lambda si: (
            -sp_deg[s.slots[si].sp_index],
            s.slots[si].sp_index,
            s.slots[si].exec_time,
            s.slots[si].vm_index,
        ),
    )
    return _construct(inst, s, order, pref, seed, t0)


def solve_etpm(inst: Instance, seed: int) -> SolverReport:
    """Execution-time-priority matching heuristic with a seeded random
    component order; each component takes the fastest feasible free VM
    (ties by SP index, then VM index)."""
    t0 = time.perf_counter()
    s = _Search(inst)
    if not s.comps:
        empty = Assignment({})
        bd = obj.evaluate(inst, empty)
        return SolverReport(
            SolverStatus.SOLVED, empty, bd, ((0, bd.total),), time.perf_counter() - t0, seed, 0
        )
    if s.obviously_infeasible():
        return SolverReport(
            SolverStatus.INFEASIBLE, None, None, (), time.perf_counter() - t0, seed, 0
        )

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    order = [int(k) for k in rng.permutation(len(s.comps))]
    pref = sorted(
        range(s.num_slots),
        key=lambda si: (s.slots[si].exec_time, s.slots[si].sp_index, s.slots[si].vm_index),
    )
    return _construct(inst, s, order, pref, seed, t0)
