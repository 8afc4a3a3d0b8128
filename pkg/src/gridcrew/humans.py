"""Simulated human co-workers walking between work stations.

Each human has a hidden true destination drawn from the candidate next
stations of its current origin. A shortest desired trajectory is kept for
every candidate so the estimators can compare the human's actual motion
against all hypotheses, not just the true one. Actual motion follows the
true-destination trajectory with epsilon-greedy noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .grid import Cell, GridWorkplace, Path, astar_path, euclidean
from .petri import Actor, PetriNet, PlaceId, next_stations


class UnknownCandidateError(KeyError):
    """Queried a candidate destination the track does not follow."""


class SpeedClass(Enum):
    STAY = "stay"
    STRAIGHT = "straight"
    DIAGONAL = "diagonal"


@dataclass(frozen=True)
class DesiredVelocity:
    """One desired step: component deltas in {-1, 0, 1}."""

    dx: int
    dy: int

    def __post_init__(self) -> None:
        if self.dx not in (-1, 0, 1) or self.dy not in (-1, 0, 1):
            raise ValueError(f"not a unit step: ({self.dx}, {self.dy})")

    @property
    def speed_class(self) -> SpeedClass:
        if self.dx == 0 and self.dy == 0:
            return SpeedClass.STAY
        if self.dx != 0 and self.dy != 0:
            return SpeedClass.DIAGONAL
        return SpeedClass.STRAIGHT


def _ordered(places: set[PlaceId]) -> tuple[PlaceId, ...]:
    # int and str ids must not interleave in sorted(); group by type first
    return tuple(sorted(places, key=lambda p: (isinstance(p, str), p)))


def _anchor_path(world: GridWorkplace, place: PlaceId) -> Path:
    return Path.from_cells([world.station(place)])


@dataclass
class HumanTrack:
    """Mutable walking state of one simulated human."""

    id: int
    origin: PlaceId
    candidates: tuple[PlaceId, ...]
    true_destination: PlaceId | None
    desired_paths: dict[PlaceId, Path]
    desired_index: dict[PlaceId, int]
    actual_history: list[tuple[int, Cell]]
    scripted: list[PlaceId] = field(default_factory=list)
    stray_limit: int = 5
    stray: dict[PlaceId, int] = field(default_factory=dict)

    @property
    def position(self) -> Cell:
        return self.actual_history[-1][1]

    @property
    def clock(self) -> int:
        return self.actual_history[-1][0]

    @property
    def stationary(self) -> bool:
        return self.true_destination is None

    @property
    def estimation_candidates(self) -> tuple[PlaceId, ...]:
        """Candidates the estimators reason over.

        A human with no next station is treated as a single-hypothesis
        track anchored at its own station, so downstream normalization
        is never over an empty set.
        """
        return self.candidates if self.candidates else (self.origin,)


def _pick_destination(
    track_candidates: tuple[PlaceId, ...],
    scripted: list[PlaceId],
    rng: np.random.Generator,
) -> PlaceId:
    if scripted:
        dest = scripted.pop(0)
        if dest not in track_candidates:
            raise UnknownCandidateError(
                f"scripted destination {dest!r} not among candidates {track_candidates}"
            )
        return dest
    return track_candidates[int(rng.integers(len(track_candidates)))]


def new_track(
    net: PetriNet,
    world: GridWorkplace,
    human_id: int,
    origin: PlaceId,
    rng: np.random.Generator,
    scripted: tuple[PlaceId, ...] = (),
    stray_limit: int = 5,
) -> HumanTrack:
    """Create a track at the origin station with a sampled (or scripted)
    true destination and a desired path per candidate."""
    start = world.station(origin)
    cands = _ordered(next_stations(net, origin, Actor.HUMAN))
    script = list(scripted)
    if cands:
        dest: PlaceId | None = _pick_destination(cands, script, rng)
        paths = {c: astar_path(world, start, world.station(c)) for c in cands}
    else:
        dest = None
        paths = {origin: _anchor_path(world, origin)}
    return HumanTrack(
        id=human_id,
        origin=origin,
        candidates=cands,
        true_destination=dest,
        desired_paths=paths,
        desired_index={c: 0 for c in paths},
        actual_history=[(0, start)],
        scripted=script,
        stray_limit=stray_limit,
        stray={c: 0 for c in paths},
    )


def desired_state(
    track: HumanTrack, candidate: PlaceId, lookahead: int = 0
) -> tuple[Cell, Cell, DesiredVelocity]:
    """Current and next desired cell for one candidate hypothesis.

    ``lookahead`` shifts the progress pointer forward (clamped at the path
    end) so the planner can project desired positions over its horizon.
    Past the end the human desires to stay: next equals current.
    """
    path = track.desired_paths.get(candidate)
    if path is None:
        raise UnknownCandidateError(
            f"candidate {candidate!r} not tracked for human {track.id}"
        )
    last = len(path) - 1
    idx = min(track.desired_index[candidate] + lookahead, last)
    here = path.cell_at(idx)
    nxt = path.cell_at(idx + 1)
    return here, nxt, DesiredVelocity(nxt.x - here.x, nxt.y - here.y)


def _approach(world: GridWorkplace, pos: Cell, target: Cell) -> Cell:
    """One greedy step from pos toward target: the neighbor closest to
    target, staying put when no neighbor strictly improves."""
    if target == pos:
        return pos
    if max(abs(target.x - pos.x), abs(target.y - pos.y)) == 1 and world.passable(target):
        return target
    best = pos
    best_d = euclidean(pos, target)
    for nxt, _ in world.neighbors(pos):
        d = euclidean(nxt, target)
        if d < best_d - 1e-12:
            best = nxt
            best_d = d
    return best


def _advance_progress(track: HumanTrack, new: Cell) -> None:
    """Per-candidate progress bookkeeping after an actual step.

    Progress on a candidate advances only when the actual cell equals
    that candidate's next desired cell. Staying on the current desired
    cell is not straying; anything else is. After stray_limit consecutive
    strayed ticks the pointer re-anchors to the nearest path cell.
    """
    for cand, path in track.desired_paths.items():
        idx = track.desired_index[cand]
        last = len(path) - 1
        if idx < last and new == path.cell_at(idx + 1):
            track.desired_index[cand] = idx + 1
            track.stray[cand] = 0
        elif new == path.cell_at(idx):
            track.stray[cand] = 0
        else:
            track.stray[cand] += 1
            if track.stray[cand] > track.stray_limit:
                cells = path.cells
                track.desired_index[cand] = min(
                    range(len(cells)), key=lambda i: (euclidean(cells[i], new), i)
                )
                track.stray[cand] = 0


def step_actual(
    track: HumanTrack,
    rng: np.random.Generator,
    epsilon: float,
    world: GridWorkplace,
) -> Cell:
    """Advance the human by one tick and return its new actual cell.

    With probability 1 - epsilon the human steps toward the next desired
    cell of its true destination (or back to its station when it has
    none); with probability epsilon it takes a uniformly random step
    among its passable 8-neighbors and staying put.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    pos = track.position
    if track.true_destination is None:
        target = world.station(track.origin)
    else:
        path = track.desired_paths[track.true_destination]
        idx = track.desired_index[track.true_destination]
        target = path.cell_at(idx + 1)
    if epsilon > 0.0 and rng.random() < epsilon:
        options = [nxt for nxt, _ in world.neighbors(pos)]
        options.append(pos)
        new = options[int(rng.integers(len(options)))]
    else:
        new = _approach(world, pos, target)
    track.actual_history.append((track.clock + 1, new))
    _advance_progress(track, new)
    return new


def retarget(
    track: HumanTrack,
    net: PetriNet,
    world: GridWorkplace,
    rng: np.random.Generator,
) -> HumanTrack:
    """Re-plan after arrival: the reached station becomes the new origin.

    Samples (or pops the scripted) next true destination and recomputes a
    desired path per candidate. With no candidates the track becomes
    stationary at the reached station.
    """
    if track.true_destination is None:
        raise ValueError(f"human {track.id} is stationary; nothing to retarget")
    reached = track.true_destination
    station = world.station(reached)
    if track.position != station:
        raise ValueError(
            f"human {track.id} at {track.position} has not reached {reached!r} at {station}"
        )
    track.origin = reached
    cands = _ordered(next_stations(net, reached, Actor.HUMAN))
    track.candidates = cands
    if cands:
        track.true_destination = _pick_destination(cands, track.scripted, rng)
        track.desired_paths = {c: astar_path(world, station, world.station(c)) for c in cands}
    else:
        track.true_destination = None
        track.desired_paths = {reached: _anchor_path(world, reached)}
    track.desired_index = {c: 0 for c in track.desired_paths}
    track.stray = {c: 0 for c in track.desired_paths}
    return track
