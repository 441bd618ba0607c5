"""Random scenario generation for benchmark experiments.

A `ScenarioSpec` pins every knob of a random instance family: task-graph
templates, fleet size, VM counts, parameter ranges, traffic regime, and
the seed. `generate` maps a spec to one concrete `Instance`; equal specs
always produce equal instances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping

import numpy as np

from .model import Instance, OmegaMode, ServiceProvider, TaskGraph, VcGraph, pair_key


@dataclass(frozen=True)
class TaskTemplate:
    """Shape of one task graph; edge weights are drawn at generation time."""

    name: str
    num_components: int
    edges: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class TaskTypeCatalog:
    """Numbered task-graph shapes selectable from a scenario spec."""

    templates: Mapping[int, TaskTemplate]

    def get(self, type_id: int) -> TaskTemplate:
        try:
            return self.templates[type_id]
        except KeyError:
            raise KeyError(f"unknown task type {type_id}") from None

    def type_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.templates))


def default_catalog() -> TaskTypeCatalog:
    """Built-in task shapes, ordered by component count.

    1: 4-component path
    2: 5-component star with one pendant leaf
    3: 6-component cycle with one chord
    4: 7-component full binary tree of depth 2
    """
    return TaskTypeCatalog(
        {
            1: TaskTemplate("path4", 4, ((0, 1), (1, 2), (2, 3))),
            2: TaskTemplate("star5", 5, ((0, 1), (0, 2), (0, 3), (3, 4))),
            3: TaskTemplate(
                "cycle6", 6, ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3))
            ),
            4: TaskTemplate("tree7", 7, ((0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6))),
        }
    )


class TrafficRegime(Enum):
    """Traffic condition governing contact-rate draws. Congested traffic
    moves slowly, so contacts persist longer (smaller rates)."""

    LOW_TRAFFIC = "low"
    RUSH_HOUR = "rush"


REGIME_LAMBDA_RANGES = {
    TrafficRegime.LOW_TRAFFIC: (0.04, 0.05),
    TrafficRegime.RUSH_HOUR: (0.01, 0.02),
}


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to generate one random instance.

    Exactly one of `vms_per_sp` (int for uniform inventories, tuple for an
    explicit per-SP split) and `vms_per_sp_range` (inclusive bounds for
    random counts) must be set.
    """

    task_types: tuple[int, ...]  # catalog type id per task owner
    num_sps: int
    vms_per_sp: int | tuple[int, ...] | None = None
    vms_per_sp_range: tuple[int, int] | None = None
    regime: TrafficRegime = TrafficRegime.LOW_TRAFFIC
    epsilon_range: tuple[float, float] = (0.9, 1.0)
    omega_range: tuple[float, float] = (0.1, 0.3)
    deadline_range: tuple[float, float] = (0.1, 0.2)
    exec_range: tuple[float, float] = (0.05, 0.25)
    exch_cost_range: tuple[float, float] = (0.05, 0.15)
    lambda_range: tuple[float, float] | None = None  # None: regime default
    xi_t: float = 0.5
    xi_c: float = 0.5
    omega_mode: OmegaMode = OmegaMode.STATIC
    reachability_policy: str = "all"  # "all" | "random-subset"
    edge_dropout: float = 0.0  # chance an SP pair has no contact link
    require_feasible_capacity: bool = False
    seed: int = 0
    catalog: TaskTypeCatalog | None = None  # None: default_catalog()

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return replace(self, seed=seed)


def _check_range(name: str, rng: tuple[float, float], low_ok: float = 0.0) -> None:
    lo, hi = rng
    if not (lo <= hi):
        raise ValueError(f"{name}: lower bound {lo} exceeds upper bound {hi}")
    if lo < low_ok:
        raise ValueError(f"{name}: lower bound {lo} below {low_ok}")


def _vm_counts(spec: ScenarioSpec, rng: np.random.Generator) -> list[int]:
    if (spec.vms_per_sp is None) == (spec.vms_per_sp_range is None):
        raise ValueError("set exactly one of vms_per_sp and vms_per_sp_range")
    if spec.vms_per_sp_range is not None:
        lo, hi = spec.vms_per_sp_range
        if not (1 <= lo <= hi):
            raise ValueError(f"vms_per_sp_range: bad bounds ({lo}, {hi})")
        return [int(rng.integers(lo, hi + 1)) for _ in range(spec.num_sps)]
    if isinstance(spec.vms_per_sp, int):
        if spec.vms_per_sp < 1:
            raise ValueError("vms_per_sp must be at least 1")
        return [spec.vms_per_sp] * spec.num_sps
    counts = list(spec.vms_per_sp)
    if len(counts) != spec.num_sps:
        raise ValueError(
            f"vms_per_sp tuple has {len(counts)} entries for {spec.num_sps} SPs"
        )
    if any(c < 1 for c in counts):
        raise ValueError("vms_per_sp entries must be at least 1")
    return counts


def generate(spec: ScenarioSpec) -> Instance:
    """Draw one instance from the spec, deterministically in the seed.

    Draw order (fixed; changing it would silently change every seeded
    experiment): VM counts, then VM execution times SP by SP, then per
    task its deadlines followed by its edge durations, then contact links
    over SP pairs in sorted order (dropout draw first when enabled), then
    exchange costs over all pairs in sorted order, then reachability, then
    the contact-probability threshold.
    """
    if spec.num_sps < 1:
        raise ValueError("num_sps must be at least 1")
    if not spec.task_types:
        raise ValueError("task_types must name at least one task")
    if spec.reachability_policy not in ("all", "random-subset"):
        raise ValueError(f"unknown reachability_policy {spec.reachability_policy!r}")
    if not 0.0 <= spec.edge_dropout <= 1.0:
        raise ValueError(f"edge_dropout must be in [0, 1], got {spec.edge_dropout}")
    _check_range("epsilon_range", spec.epsilon_range)
    if spec.epsilon_range[1] > 1.0:
        raise ValueError("epsilon_range must stay within [0, 1]")
    _check_range("omega_range", spec.omega_range)
    _check_range("deadline_range", spec.deadline_range)
    _check_range("exec_range", spec.exec_range)
    _check_range("exch_cost_range", spec.exch_cost_range)
    lambda_range = spec.lambda_range
    if lambda_range is None:
        lambda_range = REGIME_LAMBDA_RANGES[spec.regime]
    _check_range("lambda_range", lambda_range)

    catalog = spec.catalog if spec.catalog is not None else default_catalog()
    templates = [catalog.get(t) for t in spec.task_types]

    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))

    counts = _vm_counts(spec, rng)
    if spec.require_feasible_capacity:
        need = sum(t.num_components for t in templates)
        have = sum(counts)
        if need > have:
            raise ValueError(f"capacity: {need} components exceed {have} VMs")

    sps = tuple(
        ServiceProvider(tuple(float(v) for v in rng.uniform(*spec.exec_range, size=c)))
        for c in counts
    )

    tasks = []
    for tpl in templates:
        deadlines = tuple(
            float(v) for v in rng.uniform(*spec.deadline_range, size=tpl.num_components)
        )
        edges = tuple(
            (i, j, float(rng.uniform(*spec.omega_range))) for i, j in tpl.edges
        )
        tasks.append(TaskGraph(deadlines=deadlines, edges=edges))

    contact_rates: dict[tuple[int, int], float] = {}
    for a in range(spec.num_sps):
        for b in range(a + 1, spec.num_sps):
            if spec.edge_dropout > 0.0 and rng.random() < spec.edge_dropout:
                continue
            contact_rates[(a, b)] = float(rng.uniform(*lambda_range))

    exch_costs: dict[tuple[int, int], float] = {}
    for a in range(spec.num_sps):
        for b in range(a + 1, spec.num_sps):
            exch_costs[(a, b)] = float(rng.uniform(*spec.exch_cost_range))

    if spec.reachability_policy == "all":
        reachability = tuple(frozenset(range(spec.num_sps)) for _ in tasks)
    else:
        sets = []
        for _ in tasks:
            size = int(rng.integers(1, spec.num_sps + 1))
            chosen = rng.choice(spec.num_sps, size=size, replace=False)
            sets.append(frozenset(int(y) for y in chosen))
        reachability = tuple(sets)

    epsilon = float(rng.uniform(*spec.epsilon_range))

    return Instance(
        tasks=tuple(tasks),
        vc=VcGraph(sps=sps, contact_rates=contact_rates, reachability=reachability),
        exch_costs=exch_costs,
        epsilon=epsilon,
        xi_t=spec.xi_t,
        xi_c=spec.xi_c,
        omega_mode=spec.omega_mode,
    )


# ---------------------------------------------------------------------------
# Spec serialization
# ---------------------------------------------------------------------------

def _catalog_to_dict(catalog: TaskTypeCatalog) -> dict:
    return {
        str(tid): {
            "name": tpl.name,
            "num_components": tpl.num_components,
            "edges": [[i, j] for i, j in tpl.edges],
        }
        for tid, tpl in sorted(catalog.templates.items())
    }


def _catalog_from_dict(data: Mapping) -> TaskTypeCatalog:
    return TaskTypeCatalog(
        {
            int(tid): TaskTemplate(
                name=str(t["name"]),
                num_components=int(t["num_components"]),
                edges=tuple((int(i), int(j)) for i, j in t["edges"]),
            )
            for tid, t in data.items()
        }
    )


def spec_to_dict(spec: ScenarioSpec) -> dict:
    out = {
        "task_types": list(spec.task_types),
        "num_sps": spec.num_sps,
        "vms_per_sp": list(spec.vms_per_sp)
        if isinstance(spec.vms_per_sp, tuple)
        else spec.vms_per_sp,
        "vms_per_sp_range": list(spec.vms_per_sp_range) if spec.vms_per_sp_range else None,
        "regime": spec.regime.value,
        "epsilon_range": list(spec.epsilon_range),
        "omega_range": list(spec.omega_range),
        "deadline_range": list(spec.deadline_range),
        "exec_range": list(spec.exec_range),
        "exch_cost_range": list(spec.exch_cost_range),
        "lambda_range": list(spec.lambda_range) if spec.lambda_range else None,
        "xi_t": spec.xi_t,
        "xi_c": spec.xi_c,
        "omega_mode": spec.omega_mode.value,
        "reachability_policy": spec.reachability_policy,
        "edge_dropout": spec.edge_dropout,
        "require_feasible_capacity": spec.require_feasible_capacity,
        "seed": spec.seed,
    }
    if spec.catalog is not None:
        out["catalog"] = _catalog_to_dict(spec.catalog)
    return out


def _pair_or_none(v) -> tuple | None:
    return tuple(v) if v is not None else None


def spec_from_dict(data: Mapping) -> ScenarioSpec:
    vms = data.get("vms_per_sp")
    if isinstance(vms, list):
        vms = tuple(int(v) for v in vms)
    catalog = data.get("catalog")
    return ScenarioSpec(
        task_types=tuple(int(t) for t in data["task_types"]),
        num_sps=int(data["num_sps"]),
        vms_per_sp=vms,
        vms_per_sp_range=_pair_or_none(data.get("vms_per_sp_range")),
        regime=TrafficRegime(data.get("regime", "low")),
        epsilon_range=tuple(data.get("epsilon_range", (0.9, 1.0))),
        omega_range=tuple(data.get("omega_range", (0.1, 0.3))),
        deadline_range=tuple(data.get("deadline_range", (0.1, 0.2))),
        exec_range=tuple(data.get("exec_range", (0.05, 0.25))),
        exch_cost_range=tuple(data.get("exch_cost_range", (0.05, 0.15))),
        lambda_range=_pair_or_none(data.get("lambda_range")),
        xi_t=float(data.get("xi_t", 0.5)),
        xi_c=float(data.get("xi_c", 0.5)),
        omega_mode=OmegaMode(data.get("omega_mode", "static")),
        reachability_policy=str(data.get("reachability_policy", "all")),
        edge_dropout=float(data.get("edge_dropout", 0.0)),
        require_feasible_capacity=bool(data.get("require_feasible_capacity", False)),
        seed=int(data.get("seed", 0)),
        catalog=_catalog_from_dict(catalog) if catalog is not None else None,
    )


def save_spec(spec: ScenarioSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def load_spec(path) -> ScenarioSpec:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))
