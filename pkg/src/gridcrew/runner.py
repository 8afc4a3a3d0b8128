"""Closed-loop simulation: humans walk, estimators update, the planner
replans, the vehicle executes one action per tick.

Tick order: every human steps, observations feed the distraction and
intention estimators, arrived humans retarget (resetting their intention
window), per-candidate desired positions are projected over the horizon,
the layered cost is rebuilt, backward induction runs, and the first
action moves the vehicle. Audits and metrics are recorded after the
moves, on same-tick positions.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Cell, euclidean
from .humans import (
    HumanTrack,
    desired_state,
    new_track,
    retarget,
    step_actual,
)
from .perception import DistractionModel, IntentionEstimate, Neighborhood
from .petri import (
    Actor,
    Marking,
    PetriNet,
    PlaceId,
    can_fire,
    cyclic_arcs,
    fire,
    occupancy_violations,
    out_transitions,
)
from .planner import (
    Action,
    CostField,
    HumanForecast,
    PlanResult,
    TimeState,
    TransitionTable,
    build_cost,
    build_transitions,
    solve,
)
from .scenario import Scenario


@dataclass(frozen=True)
class HumanSnapshot:
    """One human's state as recorded for a tick."""

    human_id: int
    cell: Cell
    desired: dict[PlaceId, Cell]
    intention: dict[PlaceId, float]


@dataclass(frozen=True)
class TickRecord:
    k: int
    uas_cell: Cell  # cell the action was taken from
    action: Action
    uas_next: Cell
    humans: tuple[HumanSnapshot, ...]
    occupancy_ok: bool  # positional station-occupancy audit
    marking_ok: bool  # live net marking audit
    min_human_distance: float | None


@dataclass
class RunTrace:
    records: list[TickRecord]
    reached_goal: bool
    steps: int
    min_distance: float | None
    collision_ticks: int
    obstacle_entries: int
    occupancy_violation_ticks: int
    marking_violation_ticks: int
    human_ids: tuple[int, ...]
    final_cell: Cell
    seed: int
    k_max: int

    @property
    def collided(self) -> bool:
        return self.collision_ticks > 0


def _human_rngs(scn: Scenario) -> list[np.random.Generator]:
    """One generator per human: spawned from the master seed, overridden
    by an explicit per-human seed when the config gives one."""
    children = np.random.SeedSequence(scn.seed).spawn(max(len(scn.humans), 1))
    rngs = []
    for spec, child in zip(scn.humans, children):
        seq = np.random.SeedSequence(spec.seed) if spec.seed is not None else child
        rngs.append(np.random.Generator(np.random.PCG64(seq)))
    return rngs


def _move_transition(
    net: PetriNet, origin: PlaceId, dest: PlaceId, who: Actor
) -> PlaceId | None:
    """The transition carrying a co-worker from origin to dest, if the
    net declares one (cyclic arcs are not moves)."""
    arcs = net.arcs(who)
    cyclic = cyclic_arcs(net)
    for t in sorted(out_transitions(net, origin, who), key=str):
        if (t, dest) in arcs and (t, dest) not in cyclic:
            return t
    return None


def _sync_marking(
    net: PetriNet, marking: Marking, origin: PlaceId, dest: PlaceId, who: Actor
) -> Marking:
    t = _move_transition(net, origin, dest, who)
    if t is not None and can_fire(net, marking, t, who):
        return fire(net, marking, t, who)
    return marking


def _forecasts(
    tracks: list[HumanTrack],
    models: dict[int, DistractionModel],
    estimates: dict[int, IntentionEstimate],
    horizon: int,
) -> list[HumanForecast]:
    out = []
    for tr in tracks:
        projections = {}
        for cand in tr.estimation_candidates:
            steps = []
            for ahead in range(1, horizon + 1):
                cell, _, vel = desired_state(tr, cand, lookahead=ahead)
                steps.append((cell, vel.speed_class))
            projections[cand] = tuple(steps)
        out.append(
            HumanForecast(
                human_id=tr.id,
                intention=estimates[tr.id].intention(),
                projections=projections,
                distraction=models[tr.id],
            )
        )
    return out


def _positional_audit(
    scn: Scenario, uas: Cell, tracks: list[HumanTrack]
) -> bool:
    """Translate positions to station occupancy (a co-worker is at a
    station when within Euclidean distance 1 of its cell) and check the
    shared-station safety cap. True means no violation."""
    tokens_h: dict[PlaceId, int] = {}
    tokens_u: dict[PlaceId, int] = {}
    for place, cell in scn.world.stations.items():
        if euclidean(uas, cell) <= 1.0:
            tokens_u[place] = tokens_u.get(place, 0) + 1
        for tr in tracks:
            if euclidean(tr.position, cell) <= 1.0:
                tokens_h[place] = tokens_h.get(place, 0) + 1
    return not occupancy_violations(Marking(tokens_h, tokens_u))


def _record_estimate(est: IntentionEstimate, track: HumanTrack, time: int) -> None:
    est.record(
        time,
        track.position,
        {c: desired_state(track, c)[0] for c in track.estimation_candidates},
    )


TickHook = Callable[[int, list[HumanForecast], dict[int, DistractionModel]], None]


def run(scn: Scenario, tick_hook: TickHook | None = None) -> RunTrace:
    """Simulate until the vehicle reaches its goal station or the tick
    budget runs out.

    tick_hook, when given, is called once per tick with (k, forecasts,
    distraction models) right before the plan is solved; it exists for
    instrumentation and must not mutate its arguments.
    """
    world, net, params = scn.world, scn.net, scn.planner
    rngs = _human_rngs(scn)
    tracks = [
        new_track(net, world, i + 1, spec.origin, rngs[i], spec.script, spec.stray_limit)
        for i, spec in enumerate(scn.humans)
    ]
    epsilons = {i + 1: spec.epsilon for i, spec in enumerate(scn.humans)}
    rng_by_id = {tr.id: rngs[i] for i, tr in enumerate(tracks)}
    nb = Neighborhood.from_mode(params.neighborhood, params.degree)
    models = {tr.id: DistractionModel(nb, params.pseudo_count) for tr in tracks}
    estimates = {
        tr.id: IntentionEstimate(tr.estimation_candidates, params.window)
        for tr in tracks
    }
    marking = scn.marking.copy()
    table = build_transitions(world, params.horizon)
    uas = world.station(scn.uas_origin)
    goal_cell = world.station(scn.uas_goal)

    records: list[TickRecord] = []
    min_distance = math.inf
    collision_ticks = 0
    obstacle_entries = 0
    occupancy_bad = 0
    marking_bad = 0
    k = 0

    while uas != goal_cell and k < scn.k_max:
        for tr in tracks:
            step_actual(tr, rng_by_id[tr.id], epsilons[tr.id], world)
        for tr in tracks:
            for cand in tr.estimation_candidates:
                anchor, _, vel = desired_state(tr, cand)
                models[tr.id].observe(tr.id, tr.position, anchor, vel)
            _record_estimate(estimates[tr.id], tr, k + 1)
        for tr in tracks:
            dest = tr.true_destination
            if dest is not None and tr.position == world.station(dest):
                marking = _sync_marking(net, marking, tr.origin, dest, Actor.HUMAN)
                retarget(tr, net, world, rng_by_id[tr.id])
                estimates[tr.id] = IntentionEstimate(
                    tr.estimation_candidates, params.window
                )
                _record_estimate(estimates[tr.id], tr, k + 1)

        forecasts = _forecasts(tracks, models, estimates, params.horizon)
        if tick_hook is not None:
            tick_hook(k, forecasts, models)
        cost = build_cost(
            world,
            goal_cell,
            params.horizon,
            forecasts,
            human_weight=params.human_weight,
            goal_cost=params.goal_cost,
            obstacle_cost=params.obstacle_cost,
        )
        plan = solve(cost, table, params.gamma, start=uas)
        action = plan.first_action
        assert action is not None
        uas_next = table.successor(TimeState(uas, 1), action).cell

        if not world.passable(uas_next):
            obstacle_entries += 1
        dists = [euclidean(uas_next, tr.position) for tr in tracks]
        tick_min = min(dists) if dists else None
        if tick_min is not None:
            min_distance = min(min_distance, tick_min)
            if any(uas_next == tr.position for tr in tracks):
                collision_ticks += 1
        occupancy_ok = _positional_audit(scn, uas_next, tracks)
        if not occupancy_ok:
            occupancy_bad += 1
        marking_ok = not occupancy_violations(marking)
        if not marking_ok:
            marking_bad += 1

        snapshots = tuple(
            HumanSnapshot(
                human_id=tr.id,
                cell=tr.position,
                desired={c: desired_state(tr, c)[0] for c in tr.estimation_candidates},
                intention=dict(fc.intention),
            )
            for tr, fc in zip(tracks, forecasts)
        )
        records.append(
            TickRecord(
                k, uas, action, uas_next, snapshots, occupancy_ok, marking_ok, tick_min
            )
        )
        uas = uas_next
        k += 1

    reached = uas == goal_cell
    if reached:
        marking = _sync_marking(net, marking, scn.uas_origin, scn.uas_goal, Actor.UAS)
    return RunTrace(
        records=records,
        reached_goal=reached,
        steps=k,
        min_distance=None if math.isinf(min_distance) else min_distance,
        collision_ticks=collision_ticks,
        obstacle_entries=obstacle_entries,
        occupancy_violation_ticks=occupancy_bad,
        marking_violation_ticks=marking_bad,
        human_ids=tuple(tr.id for tr in tracks),
        final_cell=uas,
        seed=scn.seed,
        k_max=scn.k_max,
    )


def initial_plan(scn: Scenario) -> tuple[CostField, PlanResult]:
    """One cost build and solve at tick 0, before anyone moves.

    Humans sit at their origin stations with fresh estimators, so
    intention is uniform over candidates and distraction is the smoothed
    prior. Used by the plan CLI subcommand and handy for inspection.
    """
    world, params = scn.world, scn.planner
    rngs = _human_rngs(scn)
    tracks = [
        new_track(scn.net, world, i + 1, spec.origin, rngs[i], spec.script, spec.stray_limit)
        for i, spec in enumerate(scn.humans)
    ]
    nb = Neighborhood.from_mode(params.neighborhood, params.degree)
    models = {tr.id: DistractionModel(nb, params.pseudo_count) for tr in tracks}
    estimates = {
        tr.id: IntentionEstimate(tr.estimation_candidates, params.window)
        for tr in tracks
    }
    for tr in tracks:
        _record_estimate(estimates[tr.id], tr, 0)
    forecasts = _forecasts(tracks, models, estimates, params.horizon)
    cost = build_cost(
        world,
        world.station(scn.uas_goal),
        params.horizon,
        forecasts,
        human_weight=params.human_weight,
        goal_cost=params.goal_cost,
        obstacle_cost=params.obstacle_cost,
    )
    table = build_transitions(world, params.horizon)
    plan = solve(cost, table, params.gamma, start=world.station(scn.uas_origin))
    return cost, plan


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def emit_trace(trace: RunTrace, out_dir: str | os.PathLike) -> list[str]:
    """Write the run to CSV/JSON files and return the manifest.

    uas_path.csv has one row per tick with the pre-move cell and the
    action index (1..9 = E, NE, N, NW, W, SW, S, SE, O) plus a final row
    for the last cell with index 0. Per-human path and intention files
    carry post-step positions and the per-candidate posterior; columns
    cover every candidate seen during the run, blank while inactive.
    """
    os.makedirs(out_dir, exist_ok=True)
    manifest: list[str] = []

    def _write(name: str, text: str) -> None:
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        manifest.append(path)

    lines = ["k,x,y,action_index"]
    for rec in trace.records:
        lines.append(f"{rec.k},{rec.uas_cell.x},{rec.uas_cell.y},{rec.action.index}")
    lines.append(f"{trace.steps},{trace.final_cell.x},{trace.final_cell.y},0")
    _write("uas_path.csv", "\n".join(lines) + "\n")

    for hid in trace.human_ids:
        snaps = [
            (rec.k, snap)
            for rec in trace.records
            for snap in rec.humans
            if snap.human_id == hid
        ]
        lines = ["k,x,y"]
        for k, snap in snaps:
            lines.append(f"{k},{snap.cell.x},{snap.cell.y}")
        _write(f"human{hid}_path.csv", "\n".join(lines) + "\n")

        columns: list[PlaceId] = []
        for _, snap in snaps:
            for cand in snap.intention:
                if cand not in columns:
                    columns.append(cand)
        lines = ["k," + ",".join(str(c) for c in columns)]
        for k, snap in snaps:
            cells = [
                _fmt(snap.intention[c]) if c in snap.intention else "" for c in columns
            ]
            lines.append(f"{k}," + ",".join(cells))
        _write(f"human{hid}_intent.csv", "\n".join(lines) + "\n")

    summary = {
        "reached_goal": trace.reached_goal,
        "steps": trace.steps,
        "final_cell": [trace.final_cell.x, trace.final_cell.y],
        "min_distance": trace.min_distance,
        "collision_ticks": trace.collision_ticks,
        "collided": trace.collided,
        "obstacle_entries": trace.obstacle_entries,
        "occupancy_violation_ticks": trace.occupancy_violation_ticks,
        "marking_violation_ticks": trace.marking_violation_ticks,
        "seed": trace.seed,
        "k_max": trace.k_max,
    }
    _write("run_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return manifest
