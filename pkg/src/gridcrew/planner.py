"""Finite-horizon planner over a time-expanded grid state space.

States are (cell, layer) pairs with layers 1..horizon. The nine actions
move one cell in a compass direction or stay; blocked coordinates clamp
at the grid edge, and the layer index saturates at the horizon so every
state-action pair has exactly one successor. Costs vary per layer from
forecast human positions; backward induction recovers the value table,
the greedy policy, and the first action to execute.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .grid import Cell, GridWorkplace
from .humans import SpeedClass
from .perception import DistractionModel
from .petri import PlaceId


class MissingProjectionError(Exception):
    """A candidate lacks a projected desired state for some layer."""


class Action(Enum):
    """Compass moves plus stay. Declaration order is the deterministic
    tie-break order for argmin and matches trace indices 1..9."""

    E = (1, 1, 0)
    NE = (2, 1, 1)
    N = (3, 0, 1)
    NW = (4, -1, 1)
    W = (5, -1, 0)
    SW = (6, -1, -1)
    S = (7, 0, -1)
    SE = (8, 1, -1)
    O = (9, 0, 0)

    def __init__(self, index: int, dx: int, dy: int) -> None:
        self.index = index
        self.dx = dx
        self.dy = dy

    @classmethod
    def from_index(cls, index: int) -> "Action":
        for a in cls:
            if a.index == index:
                return a
        raise ValueError(f"no action with index {index}")


ACTIONS: tuple[Action, ...] = tuple(Action)


class TimeState(NamedTuple):
    cell: Cell
    tau: int


@dataclass(frozen=True)
class TransitionTable:
    """Deterministic successor function in array form.

    successors[a][i] is the flat cell index reached from flat cell i
    under action ACTIONS[a]; the layer advance is uniform (tau + 1,
    saturating at the horizon).
    """

    n_x: int
    n_y: int
    horizon: int
    successors: np.ndarray

    @property
    def n_cells(self) -> int:
        return self.n_x * self.n_y

    def cell_index(self, cell: Cell) -> int:
        return (cell.y - 1) * self.n_x + (cell.x - 1)

    def index_cell(self, index: int) -> Cell:
        y, x = divmod(index, self.n_x)
        return Cell(x + 1, y + 1)

    def successor(self, state: TimeState, action: Action) -> TimeState:
        cell, tau = state
        if not (1 <= cell.x <= self.n_x and 1 <= cell.y <= self.n_y):
            raise ValueError(f"cell {cell} outside the grid")
        if not (1 <= tau <= self.horizon):
            raise ValueError(f"layer {tau} outside 1..{self.horizon}")
        x = min(max(cell.x + action.dx, 1), self.n_x)
        y = min(max(cell.y + action.dy, 1), self.n_y)
        return TimeState(Cell(x, y), min(tau + 1, self.horizon))


def build_transitions(world: GridWorkplace, horizon: int) -> TransitionTable:
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    nx, ny = world.n_x, world.n_y
    xs = np.tile(np.arange(1, nx + 1), ny)
    ys = np.repeat(np.arange(1, ny + 1), nx)
    succ = np.empty((len(ACTIONS), nx * ny), dtype=np.int64)
    for a_i, action in enumerate(ACTIONS):
        x2 = np.clip(xs + action.dx, 1, nx)
        y2 = np.clip(ys + action.dy, 1, ny)
        succ[a_i] = (y2 - 1) * nx + (x2 - 1)
    succ.setflags(write=False)
    return TransitionTable(nx, ny, horizon, succ)


@dataclass(frozen=True)
class HumanForecast:
    """Planner-facing snapshot of one human at the current tick.

    projections[c][t] is the (desired cell, speed class) the human would
    occupy t+1 steps ahead when bound for candidate c, clamped at the
    path end; intention holds the current posterior over candidates and
    is treated as constant across the horizon.
    """

    human_id: int
    intention: Mapping[PlaceId, float]
    projections: Mapping[PlaceId, tuple[tuple[Cell, SpeedClass], ...]]
    distraction: DistractionModel


@dataclass(frozen=True)
class CostField:
    """Per-layer cell costs: strongly negative at the goal, strongly
    positive on obstacles, distance-to-goal plus weighted expected human
    occupancy elsewhere."""

    n_x: int
    n_y: int
    horizon: int
    goal_cell: Cell
    goal_cost: float
    obstacle_cost: float
    human_weight: float
    values: np.ndarray  # shape (horizon, n_cells)

    def cell_index(self, cell: Cell) -> int:
        return (cell.y - 1) * self.n_x + (cell.x - 1)

    def value(self, state: TimeState) -> float:
        return float(self.values[state.tau - 1, self.cell_index(state.cell)])


def build_cost(
    world: GridWorkplace,
    goal_cell: Cell,
    horizon: int,
    forecasts: Sequence[HumanForecast] = (),
    human_weight: float = 100.0,
    goal_cost: float = -1.0e4,
    obstacle_cost: float = 1.0e4,
) -> CostField:
    """Assemble the layered cost table for one replanning step.

    Every (candidate, layer) pair anchors that candidate's distraction
    distribution at the projected desired cell and adds
    human_weight * intention * mass onto the covered cells. Goal and
    obstacle entries override everything else.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if not world.contains(goal_cell):
        raise ValueError(f"goal cell {goal_cell} outside the grid")
    nx, ny = world.n_x, world.n_y
    n = nx * ny
    xs = np.tile(np.arange(1, nx + 1), ny).astype(float)
    ys = np.repeat(np.arange(1, ny + 1), nx).astype(float)
    base = np.hypot(xs - goal_cell.x, ys - goal_cell.y)
    values = np.repeat(base[np.newaxis, :], horizon, axis=0)

    for fc in forecasts:
        for cand, prob in fc.intention.items():
            proj = fc.projections.get(cand)
            if proj is None or len(proj) < horizon:
                have = 0 if proj is None else len(proj)
                raise MissingProjectionError(
                    f"human {fc.human_id} candidate {cand!r}: "
                    f"{have} projected states for horizon {horizon}"
                )
            if prob == 0.0:
                continue
            for t in range(horizon):
                anchor, speed = proj[t]
                for cell, mass in fc.distraction.masses(fc.human_id, anchor, speed, world):
                    idx = (cell.y - 1) * nx + (cell.x - 1)
                    values[t, idx] += human_weight * prob * mass

    if world.obstacles:
        obs_idx = [(c.y - 1) * nx + (c.x - 1) for c in world.obstacles]
        values[:, obs_idx] = obstacle_cost
    values[:, (goal_cell.y - 1) * nx + (goal_cell.x - 1)] = goal_cost
    values.setflags(write=False)
    return CostField(
        nx, ny, horizon, goal_cell, goal_cost, obstacle_cost, human_weight, values
    )


@dataclass(frozen=True)
class PlanResult:
    """Backward-induction output: value per state, greedy action per
    non-final layer, and the action to execute now (when a start cell
    was supplied)."""

    n_x: int
    n_y: int
    horizon: int
    value: np.ndarray  # (horizon, n_cells)
    policy: np.ndarray  # (horizon - 1, n_cells) indices into ACTIONS
    first_action: Action | None

    def cell_index(self, cell: Cell) -> int:
        return (cell.y - 1) * self.n_x + (cell.x - 1)

    def value_at(self, state: TimeState) -> float:
        return float(self.value[state.tau - 1, self.cell_index(state.cell)])

    def action_at(self, state: TimeState) -> Action:
        if state.tau >= self.horizon:
            raise ValueError(f"no action defined at the final layer {state.tau}")
        return ACTIONS[int(self.policy[state.tau - 1, self.cell_index(state.cell)])]


def solve(
    cost: CostField,
    table: TransitionTable,
    gamma: float = 1.0,
    start: Cell | None = None,
) -> PlanResult:
    """Backward induction over the layered costs.

    V at the final layer is the bare cost; earlier layers add gamma times
    the best successor value. Ties pick the first action in declaration
    order. The first action is read from the start cell at layer 1.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    if (cost.n_x, cost.n_y, cost.horizon) != (table.n_x, table.n_y, table.horizon):
        raise ValueError("cost field and transition table shapes disagree")
    horizon, n = cost.horizon, table.n_cells
    value = np.empty((horizon, n), dtype=float)
    policy = np.empty((max(horizon - 1, 0), n), dtype=np.int8)
    value[horizon - 1] = cost.values[horizon - 1]
    col = np.arange(n)
    for t in range(horizon - 2, -1, -1):
        succ_vals = value[t + 1][table.successors]  # (actions, cells)
        best = np.argmin(succ_vals, axis=0)  # first minimum wins
        value[t] = cost.values[t] + gamma * succ_vals[best, col]
        policy[t] = best
    value.setflags(write=False)
    policy.setflags(write=False)
    first = None
    if start is not None and horizon >= 2:
        first = ACTIONS[int(policy[0, table.cell_index(start)])]
    return PlanResult(cost.n_x, cost.n_y, horizon, value, policy, first)


def dump_layers(
    out_dir: str | os.PathLike,
    cost: CostField | None = None,
    result: PlanResult | None = None,
) -> list[str]:
    """Write one CSV matrix per layer (rows y ascending, columns x
    ascending, 6 significant digits) for plotting heat maps. Returns the
    written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    def _dump(prefix: str, arr: np.ndarray, nx: int, ny: int, horizon: int) -> None:
        for t in range(horizon):
            path = os.path.join(out_dir, f"{prefix}_tau{t + 1:02d}.csv")
            np.savetxt(path, arr[t].reshape(ny, nx), fmt="%.6g", delimiter=",")
            written.append(path)

    if cost is not None:
        _dump("cost", cost.values, cost.n_x, cost.n_y, cost.horizon)
    if result is not None:
        _dump("value", result.value, result.n_x, result.n_y, result.horizon)
    return written
