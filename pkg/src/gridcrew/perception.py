"""Online estimators for human distraction and destination intention.

Distraction is a per-human, per-speed-class distribution over a rigid
neighborhood of offset cells around the current desired position, learned
from visit counts with Laplace smoothing. Intention is a posterior over
candidate destinations built from a sliding window of exponential
deviation rewards against each candidate's desired trajectory.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .grid import Cell, GridWorkplace, euclidean
from .humans import DesiredVelocity, SpeedClass
from .petri import PlaceId

Offset = tuple[int, int]


class EmptyWindowError(Exception):
    """Intention queried before any observation was recorded."""


@dataclass(frozen=True)
class Neighborhood:
    """Rigid offset set of degree d anchored at a desired position.

    forward mode spans {0..d}^2 minus the center, so only cells east,
    north, or north-east of the anchor carry mass; symmetric mode spans
    {-d..d}^2 minus the center.
    """

    degree: int
    offsets: tuple[Offset, ...]

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        if (0, 0) in self.offsets:
            raise ValueError("offsets must exclude the center cell")

    @classmethod
    def forward(cls, degree: int = 2) -> "Neighborhood":
        offs = tuple(
            (i, j)
            for i in range(degree + 1)
            for j in range(degree + 1)
            if (i, j) != (0, 0)
        )
        return cls(degree, offs)

    @classmethod
    def symmetric(cls, degree: int = 2) -> "Neighborhood":
        offs = tuple(
            (i, j)
            for i in range(-degree, degree + 1)
            for j in range(-degree, degree + 1)
            if (i, j) != (0, 0)
        )
        return cls(degree, offs)

    @classmethod
    def from_mode(cls, mode: str, degree: int = 2) -> "Neighborhood":
        if mode == "forward":
            return cls.forward(degree)
        if mode == "symmetric":
            return cls.symmetric(degree)
        raise ValueError(f"unknown neighborhood mode {mode!r}")

    def in_grid_offsets(self, anchor: Cell, world: GridWorkplace) -> list[Offset]:
        return [
            (i, j)
            for i, j in self.offsets
            if world.contains(Cell(anchor.x + i, anchor.y + j))
        ]


def neighborhood_cells(nb: Neighborhood, anchor: Cell, world: GridWorkplace) -> set[Cell]:
    """Offset cells around the anchor clipped to the grid.

    Obstacle cells are retained: the neighborhood is intersected with the
    workplace extent only, distraction mass may sit on an obstacle.
    """
    return {
        Cell(anchor.x + i, anchor.y + j)
        for i, j in nb.in_grid_offsets(anchor, world)
    }


def deviation_reward(actual: Cell, desired: Cell) -> float:
    """exp(-distance) between actual and desired position, in (0, 1]."""
    return math.exp(-euclidean(actual, desired))


@dataclass
class DistractionModel:
    """Visit-count model of where a human actually is relative to where
    it should be, conditioned on desired speed class."""

    neighborhood: Neighborhood
    pseudo_count: float = 1.0
    counts: dict[tuple[int, SpeedClass, Offset], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.pseudo_count < 0:
            raise ValueError(f"pseudo_count must be >= 0, got {self.pseudo_count}")
        self._offset_set = frozenset(self.neighborhood.offsets)

    def observe(self, human: int, actual: Cell, desired: Cell, v: DesiredVelocity) -> None:
        """Count the actual position's offset from the desired position.

        Offsets outside the neighborhood (the center included) are
        dropped, not clipped.
        """
        off = (actual.x - desired.x, actual.y - desired.y)
        if off in self._offset_set:
            key = (human, v.speed_class, off)
            self.counts[key] = self.counts.get(key, 0.0) + 1.0

    def masses(
        self, human: int, anchor: Cell, speed: SpeedClass, world: GridWorkplace
    ) -> list[tuple[Cell, float]]:
        """Normalized distraction mass per in-grid neighborhood cell.

        Empty when no offset lands inside the grid or all mass is zero.
        """
        offs = self.neighborhood.in_grid_offsets(anchor, world)
        if not offs:
            return []
        raw = [
            self.counts.get((human, speed, off), 0.0) + self.pseudo_count
            for off in offs
        ]
        total = sum(raw)
        if total <= 0.0:
            return []
        return [
            (Cell(anchor.x + i, anchor.y + j), mass / total)
            for (i, j), mass in zip(offs, raw)
        ]

    def distraction(
        self, human: int, cell: Cell, anchor: Cell, speed: SpeedClass, world: GridWorkplace
    ) -> float:
        """Probability that the human sits at ``cell`` given its desired
        position ``anchor`` and speed class. Zero outside the in-grid
        neighborhood."""
        for c, mass in self.masses(human, anchor, speed, world):
            if c == cell:
                return mass
        return 0.0

    def distribution(
        self, human: int, anchor: Cell, speed: SpeedClass, world: GridWorkplace
    ) -> dict[Cell, float]:
        return dict(self.masses(human, anchor, speed, world))


@dataclass
class IntentionEstimate:
    """Sliding-window posterior over a human's candidate destinations."""

    candidates: tuple[PlaceId, ...]
    window_size: int = 10
    window: deque = field(default_factory=deque)

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("at least one candidate required")
        if self.window_size < 1:
            raise ValueError(f"window_size must be >= 1, got {self.window_size}")
        self.window = deque(self.window, maxlen=self.window_size)

    def record(self, k: int, actual: Cell, desired_by_candidate: dict[PlaceId, Cell]) -> None:
        """Append one tick's actual position and per-candidate desired cells."""
        missing = [c for c in self.candidates if c not in desired_by_candidate]
        if missing:
            raise KeyError(f"desired cells missing for candidates {missing}")
        snap = {c: desired_by_candidate[c] for c in self.candidates}
        self.window.append((k, actual, snap))

    def intention(self) -> dict[PlaceId, float]:
        """Posterior: windowed deviation-reward sums normalized over
        candidates. Rewards are strictly positive, so every candidate
        keeps nonzero probability and the total is 1."""
        if not self.window:
            raise EmptyWindowError("no observations recorded yet")
        sums = {
            c: sum(deviation_reward(actual, desired[c]) for _, actual, desired in self.window)
            for c in self.candidates
        }
        total = sum(sums.values())
        return {c: s / total for c, s in sums.items()}
