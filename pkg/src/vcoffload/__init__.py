"""Graph-based multi-task offloading over vehicular clouds.

Library layout:
  model     problem data types, validation, instance files
  objective feasibility predicates and assignment scoring
  solvers   exhaustive search and three constructive heuristics
  oracle    slow literal reference used for cross-checking
  scenario  seeded random instance generation
  harness   experiment grids, CSV output, summaries
  plots     figure rendering for harness outputs
  cli       command-line front end
"""

from .model import (
    Assignment,
    ComponentId,
    FORMAT_VERSION,
    Instance,
    OmegaMode,
    ServiceProvider,
    TaskGraph,
    VcGraph,
    Violation,
    VmSlot,
    load_instance,
    save_instance,
    validate_instance,
)
from .objective import (
    ObjectiveBreakdown,
    assignment_feasible,
    contact_feasible,
    edge_feasible,
    evaluate,
    slot_admissible,
)
from .scenario import ScenarioSpec, TrafficRegime, default_catalog, generate
from .solvers import (
    SolverReport,
    SolverStatus,
    solve_crrm,
    solve_dpm,
    solve_etpm,
    solve_optimal,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "ComponentId",
    "FORMAT_VERSION",
    "Instance",
    "ObjectiveBreakdown",
    "OmegaMode",
    "ScenarioSpec",
    "ServiceProvider",
    "SolverReport",
    "SolverStatus",
    "TaskGraph",
    "TrafficRegime",
    "VcGraph",
    "Violation",
    "VmSlot",
    "assignment_feasible",
    "contact_feasible",
    "default_catalog",
    "edge_feasible",
    "evaluate",
    "generate",
    "load_instance",
    "save_instance",
    "slot_admissible",
    "solve_crrm",
    "solve_dpm",
    "solve_etpm",
    "solve_optimal",
    "validate_instance",
    "__version__",
]
