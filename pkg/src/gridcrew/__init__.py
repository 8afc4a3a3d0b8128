"""Seeded gridworld simulator and planning library for a small aerial
vehicle sharing a workplace with human co-workers.

The package splits into a workplace grid with shortest-path search, a
task net with per-class token layers and a shared-station safety cap,
simulated humans with hidden destinations, online distraction and
intention estimators, a finite-horizon planner over a time-expanded
state space, and a closed-loop scenario runner with trace output.
"""

from .grid import (
    Cell,
    GridError,
    GridWorkplace,
    InvalidCellError,
    NoPathError,
    Path,
    astar_path,
    euclidean,
)
from .humans import (
    DesiredVelocity,
    HumanTrack,
    SpeedClass,
    UnknownCandidateError,
    desired_state,
    new_track,
    retarget,
    step_actual,
)
from .perception import (
    DistractionModel,
    EmptyWindowError,
    IntentionEstimate,
    Neighborhood,
    deviation_reward,
    neighborhood_cells,
)
from .petri import (
    Actor,
    ConstructKind,
    Marking,
    NotEnabledError,
    PetriError,
    PetriNet,
    UnknownPlaceError,
    UnknownTransitionError,
    can_fire,
    classify_place,
    cyclic_arcs,
    fire,
    next_stations,
    occupancy_violations,
    out_transitions,
)
from .planner import (
    ACTIONS,
    Action,
    CostField,
    HumanForecast,
    MissingProjectionError,
    PlanResult,
    TimeState,
    TransitionTable,
    build_cost,
    build_transitions,
    dump_layers,
    solve,
)
from .runner import RunTrace, TickRecord, emit_trace, initial_plan, run
from .scenario import (
    HumanSpec,
    PlannerParams,
    Scenario,
    ScenarioError,
    ScenarioParseError,
    ScenarioValidationError,
    load_bundled,
    load_scenario,
    parse_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "ACTIONS",
    "Action",
    "Actor",
    "Cell",
    "ConstructKind",
    "CostField",
    "DesiredVelocity",
    "DistractionModel",
    "EmptyWindowError",
    "GridError",
    "GridWorkplace",
    "HumanForecast",
    "HumanSpec",
    "HumanTrack",
    "IntentionEstimate",
    "InvalidCellError",
    "Marking",
    "MissingProjectionError",
    "Neighborhood",
    "NoPathError",
    "NotEnabledError",
    "Path",
    "PetriError",
    "PetriNet",
    "PlanResult",
    "PlannerParams",
    "RunTrace",
    "Scenario",
    "ScenarioError",
    "ScenarioParseError",
    "ScenarioValidationError",
    "SpeedClass",
    "TickRecord",
    "TimeState",
    "TransitionTable",
    "UnknownCandidateError",
    "UnknownPlaceError",
    "UnknownTransitionError",
    "astar_path",
    "build_cost",
    "build_transitions",
    "can_fire",
    "classify_place",
    "cyclic_arcs",
    "desired_state",
    "deviation_reward",
    "dump_layers",
    "emit_trace",
    "euclidean",
    "fire",
    "initial_plan",
    "load_bundled",
    "load_scenario",
    "neighborhood_cells",
    "new_track",
    "next_stations",
    "occupancy_violations",
    "out_transitions",
    "parse_scenario",
    "retarget",
    "run",
    "solve",
    "step_actual",
]
