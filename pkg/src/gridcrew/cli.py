"""Command line interface.

Subcommands: run a scenario, sweep it over many seeds, report the net
structure, or dump one planning step's cost and value layers. The CONFIG
argument is a TOML path, or the name of a bundled scenario such as
"five_humans".
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
from dataclasses import replace

from .petri import Actor, Marking, classify_place, next_stations, occupancy_violations
from .planner import dump_layers
from .runner import emit_trace, initial_plan, run
from .scenario import Scenario, ScenarioError, load_bundled, load_scenario


def _load(config: str) -> Scenario:
    if os.path.exists(config):
        return load_scenario(config)
    if os.sep not in config and not config.endswith(".toml"):
        return load_bundled(config)
    raise ScenarioError(f"config file not found: {config}")


def _cmd_run(args: argparse.Namespace) -> int:
    scn = _load(args.config)
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    trace = run(scn)
    if args.out:
        files = emit_trace(trace, args.out)
        print(f"wrote {len(files)} files to {args.out}")
    dist = "n/a" if trace.min_distance is None else f"{trace.min_distance:.3f}"
    status = "reached goal" if trace.reached_goal else "budget exhausted"
    print(
        f"{status} after {trace.steps} ticks"
        f" (min human distance {dist}, collisions {trace.collision_ticks},"
        f" obstacle entries {trace.obstacle_entries})"
    )
    return 0 if trace.reached_goal else 2


def _cmd_sweep(args: argparse.Namespace) -> int:
    scn = _load(args.config)
    if args.human_weight is not None:
        scn = replace(scn, planner=replace(scn.planner, human_weight=args.human_weight))
    reached = 0
    collided_runs = 0
    distances = []
    for seed in range(args.seeds):
        trace = run(replace(scn, seed=seed))
        reached += trace.reached_goal
        collided_runs += trace.collided
        if trace.min_distance is not None:
            distances.append(trace.min_distance)
        print(
            f"seed {seed}: reached={trace.reached_goal} steps={trace.steps}"
            f" min_dist={'n/a' if trace.min_distance is None else f'{trace.min_distance:.3f}'}"
            f" collided={trace.collided}"
        )
    mean_dist = f"{statistics.mean(distances):.3f}" if distances else "n/a"
    print(
        f"total: {reached}/{args.seeds} reached, {collided_runs} runs with a"
        f" collision, mean min distance {mean_dist}"
    )
    return 0


def _cmd_verify_net(args: argparse.Namespace) -> int:
    scn = _load(args.config)
    net = scn.net
    for place in sorted(net.places, key=str):
        row = []
        for who in (Actor.HUMAN, Actor.UAS):
            kinds = sorted(k.value for k in classify_place(net, place, who))
            nxt = sorted(map(str, next_stations(net, place, who)))
            row.append(f"{who.value}: next={nxt or '[]'} constructs={kinds or '[]'}")
        print(f"place {place}: " + " | ".join(row))
    print("\nshared-station occupancy check (uas count u, human count h):")
    probe = next(iter(sorted(net.places, key=str)))
    for n_u in range(4):
        cells = []
        for n_h in range(4):
            bad = occupancy_violations(Marking({probe: n_h}, {probe: n_u}))
            cells.append(f"u={n_u} h={n_h}: {'VIOLATION' if bad else 'ok'}")
        print("  " + "  ".join(cells))
    return 0


def _cmd_plan(args: argparse.Namespace) -> int:
    scn = _load(args.config)
    cost, plan = initial_plan(scn)
    print(f"first action: {plan.first_action.name if plan.first_action else 'n/a'}")
    if args.tick_dump:
        files = dump_layers(args.tick_dump, cost=cost, result=plan)
        print(f"wrote {len(files)} layer files to {args.tick_dump}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcrew",
        description="Seeded gridworld simulator and planner for a vehicle "
        "working alongside human co-workers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario")
    p_run.add_argument("config", help="TOML path or bundled scenario name")
    p_run.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_run.add_argument("--out", default=None, help="directory for trace files")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario over many seeds")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--seeds", type=int, default=10, help="number of seeds (0..N-1)")
    p_sweep.add_argument(
        "--human-weight", type=float, default=None, help="override the human cost weight"
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_net = sub.add_parser("verify-net", help="report net structure and safety table")
    p_net.add_argument("config")
    p_net.set_defaults(func=_cmd_verify_net)

    p_plan = sub.add_parser("plan", help="solve one planning step and dump layers")
    p_plan.add_argument("config")
    p_plan.add_argument(
        "--tick-dump", default=None, metavar="DIR", help="write cost/value CSV layers"
    )
    p_plan.set_defaults(func=_cmd_plan)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
