"""Discretized workplace grid and shortest-path search.

The workplace is a rectangle of unit cells indexed from (1, 1) to
(n_x, n_y). Motion is 8-connected: straight steps cost 1, diagonal steps
cost sqrt(2). Work stations occupy designated cells; stationary obstacles
block cells for humans and UAS alike. The A* search here produces the
desired trajectories that human co-workers follow between stations.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple


class GridError(Exception):
    """Base class for grid failures."""


class InvalidCellError(GridError):
    """A queried cell lies outside the grid or on an obstacle."""


class NoPathError(GridError):
    """Start and goal are not connected."""


class Cell(NamedTuple):
    x: int
    y: int


# Fixed neighbor expansion order (E, NE, N, NW, W, SW, S, SE). Searches and
# samplers iterate neighbors in this order so runs replay identically.
NEIGHBOR_ORDER: tuple[tuple[int, int], ...] = (
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
)

STRAIGHT_COST = 1.0
DIAGONAL_COST = math.sqrt(2.0)


def euclidean(a: Cell, b: Cell) -> float:
    """Euclidean distance between two cells."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def step_cost(a: Cell, b: Cell) -> float:
    """Cost of one 8-connected step: 1 straight, sqrt(2) diagonal."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    if dx > 1 or dy > 1 or (dx == 0 and dy == 0):
        raise ValueError(f"{a} -> {b} is not a single 8-connected step")
    return DIAGONAL_COST if dx == 1 and dy == 1 else STRAIGHT_COST


def path_cost(n_straight: int, n_diagonal: int) -> float:
    """Canonical cost of a path with the given step counts.

    Computing the cost from counts (instead of summing step lengths in
    path order) makes equal-cost paths produce bit-identical floats.
    """
    return n_straight * STRAIGHT_COST + n_diagonal * DIAGONAL_COST


@dataclass(frozen=True)
class GridWorkplace:
    """Rectangular workplace with obstacles and named work stations.

    ``stations`` maps a work-station identifier (the Petri-net place that
    the station realizes) to its cell. ``corner_cutting`` controls whether
    a diagonal step may pass between two orthogonally adjacent obstacles;
    it defaults to permitted.
    """

    n_x: int
    n_y: int
    obstacles: frozenset[Cell] = frozenset()
    stations: Mapping[int | str, Cell] = field(default_factory=dict)
    corner_cutting: bool = True

    def __post_init__(self) -> None:
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.n_x}x{self.n_y}")
        object.__setattr__(
            self, "obstacles", frozenset(Cell(*c) for c in self.obstacles)
        )
        object.__setattr__(
            self, "stations", {p: Cell(*c) for p, c in self.stations.items()}
        )
        for cell in self.obstacles:
            if not self.contains(cell):
                raise ValueError(f"obstacle {cell} outside {self.n_x}x{self.n_y} grid")
        seen: dict[Cell, int | str] = {}
        for place, cell in self.stations.items():
            if not self.contains(cell):
                raise ValueError(f"station {place} at {cell} outside grid")
            if cell in self.obstacles:
                raise ValueError(f"station {place} at {cell} sits on an obstacle")
            if cell in seen:
                raise ValueError(
                    f"stations {seen[cell]} and {place} share cell {cell}"
                )
            seen[cell] = place

    def contains(self, cell: Cell) -> bool:
        return 1 <= cell[0] <= self.n_x and 1 <= cell[1] <= self.n_y

    def passable(self, cell: Cell) -> bool:
        return self.contains(cell) and cell not in self.obstacles

    def station(self, place: int | str) -> Cell:
        try:
            return self.stations[place]
        except KeyError:
            raise InvalidCellError(f"no station for place {place!r}") from None

    def neighbors(self, cell: Cell) -> Iterator[tuple[Cell, float]]:
        """Passable 8-neighbors of ``cell`` with step costs, in fixed order.

        Honors the ``corner_cutting`` flag: when disabled, a diagonal step
        requires both flanking orthogonal cells to be passable.
        """
        x, y = cell
        for dx, dy in NEIGHBOR_ORDER:
            nxt = Cell(x + dx, y + dy)
            if not self.passable(nxt):
                continue
            if dx != 0 and dy != 0:
                if not self.corner_cutting and not (
                    self.passable(Cell(x + dx, y)) and self.passable(Cell(x, y + dy))
                ):
                    continue
                yield nxt, DIAGONAL_COST
            else:
                yield nxt, STRAIGHT_COST


@dataclass(frozen=True)
class Path:
    """An obstacle-free 8-connected path with its canonical cost."""

    cells: tuple[Cell, ...]
    cost: float

    @classmethod
    def from_cells(cls, cells: list[Cell] | tuple[Cell, ...]) -> "Path":
        n_straight = 0
        n_diagonal = 0
        for a, b in zip(cells, cells[1:]):
            if step_cost(a, b) == DIAGONAL_COST:
                n_diagonal += 1
            else:
                n_straight += 1
        return cls(tuple(Cell(*c) for c in cells), path_cost(n_straight, n_diagonal))

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def start(self) -> Cell:
        return self.cells[0]

    @property
    def goal(self) -> Cell:
        return self.cells[-1]

    def cell_at(self, index: int) -> Cell:
        """Cell at ``index``, clamped to the path ends."""
        return self.cells[max(0, min(index, len(self.cells) - 1))]


def astar_path(world: GridWorkplace, start: Cell, goal: Cell) -> Path:
    """Minimum-cost 8-connected obstacle-free path from start to goal.

    Step costs are 1 (straight) and sqrt(2) (diagonal); the heuristic is
    Euclidean distance, which is admissible for these costs. Ties in the
    priority queue break by insertion order and neighbors expand in the
    fixed E..SE order, so results are reproducible across runs.

    Raises InvalidCellError if either endpoint is outside the grid or on
    an obstacle, and NoPathError when the goal is unreachable.
    """
    start = Cell(*start)
    goal = Cell(*goal)
    for name, cell in (("start", start), ("goal", goal)):
        if not world.contains(cell):
            raise InvalidCellError(f"{name} {cell} outside grid")
        if cell in world.obstacles:
            raise InvalidCellError(f"{name} {cell} is an obstacle")
    if start == goal:
        return Path((start,), 0.0)

    counter = 0
    frontier: list[tuple[float, int, Cell]] = [(euclidean(start, goal), counter, start)]
    g_score: dict[Cell, float] = {start: 0.0}
    came_from: dict[Cell, Cell] = {}
    closed: set[Cell] = set()

    while frontier:
        _, _, current = heapq.heappop(frontier)
        if current == goal:
            cells = [current]
            while current in came_from:
                current = came_from[current]
                cells.append(current)
            cells.reverse()
            return Path.from_cells(cells)
        if current in closed:
            continue
        closed.add(current)
        for neighbor, cost in world.neighbors(current):
            tentative = g_score[current] + cost
            if neighbor not in g_score or tentative < g_score[neighbor]:
                g_score[neighbor] = tentative
                came_from[neighbor] = current
                counter += 1
                heapq.heappush(
                    frontier, (tentative + euclidean(neighbor, goal), counter, neighbor)
                )

    raise NoPathError(f"no path from {start} to {goal}")
