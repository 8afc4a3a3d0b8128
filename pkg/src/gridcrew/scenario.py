"""Scenario configuration: parsing, validation, bundled examples.

A scenario file is TOML with sections [world], [net], [[humans]], [uas],
[planner] and top-level k_max / seed. Unknown keys anywhere are rejected
so typos fail loudly instead of silently running defaults.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path as FsPath

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .grid import Cell, GridError, GridWorkplace
from .petri import Actor, Marking, PetriNet, PlaceId, next_stations


class ScenarioError(Exception):
    """Base class for configuration failures."""


class ScenarioParseError(ScenarioError):
    """The file is not valid TOML or a field has the wrong shape."""


class ScenarioValidationError(ScenarioError):
    """The parsed scenario violates a model invariant."""


@dataclass(frozen=True)
class PlannerParams:
    horizon: int = 10
    gamma: float = 1.0
    human_weight: float = 100.0
    goal_cost: float = -1.0e4
    obstacle_cost: float = 1.0e4
    degree: int = 2
    window: int = 10
    pseudo_count: float = 1.0
    neighborhood: str = "forward"

    def __post_init__(self) -> None:
        if self.horizon < 2:
            raise ScenarioValidationError(
                f"planner horizon must be >= 2 to yield a first action, got {self.horizon}"
            )
        if not 0.0 <= self.gamma <= 1.0:
            raise ScenarioValidationError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.degree < 1:
            raise ScenarioValidationError(f"degree must be >= 1, got {self.degree}")
        if self.window < 1:
            raise ScenarioValidationError(f"window must be >= 1, got {self.window}")
        if self.pseudo_count < 0:
            raise ScenarioValidationError(
                f"pseudo_count must be >= 0, got {self.pseudo_count}"
            )
        if self.neighborhood not in ("forward", "symmetric"):
            raise ScenarioValidationError(
                f"neighborhood must be 'forward' or 'symmetric', got {self.neighborhood!r}"
            )


@dataclass(frozen=True)
class HumanSpec:
    origin: PlaceId
    epsilon: float = 0.2
    seed: int | None = None
    script: tuple[PlaceId, ...] = ()
    stray_limit: int = 5

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ScenarioValidationError(
                f"human epsilon must be in [0, 1], got {self.epsilon}"
            )
        if self.stray_limit < 1:
            raise ScenarioValidationError(
                f"stray_limit must be >= 1, got {self.stray_limit}"
            )


@dataclass(frozen=True)
class Scenario:
    world: GridWorkplace
    net: PetriNet
    marking: Marking
    humans: tuple[HumanSpec, ...]
    uas_origin: PlaceId
    uas_goal: PlaceId
    planner: PlannerParams = field(default_factory=PlannerParams)
    k_max: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k_max < 1:
            raise ScenarioValidationError(f"k_max must be >= 1, got {self.k_max}")
        missing = [p for p in self.net.places if p not in self.world.stations]
        if missing:
            raise ScenarioValidationError(
                f"every place needs a station cell; missing for {sorted(map(str, missing))}"
            )
        for layer_name, layer in (("tokens_h", self.marking.tokens_h),
                                  ("tokens_u", self.marking.tokens_u)):
            for p in layer:
                if p not in self.net.places:
                    raise ScenarioValidationError(
                        f"{layer_name} references unknown place {p!r}"
                    )
        for who, place in (("origin", self.uas_origin), ("goal", self.uas_goal)):
            if place not in self.net.places:
                raise ScenarioValidationError(f"uas {who} {place!r} is not a place")
        reachable = next_stations(self.net, self.uas_origin, Actor.UAS)
        if self.uas_goal not in reachable:
            raise ScenarioValidationError(
                f"uas goal {self.uas_goal!r} is not among the next stations "
                f"{sorted(map(str, reachable))} of origin {self.uas_origin!r}"
            )
        for i, h in enumerate(self.humans, start=1):
            if h.origin not in self.net.places:
                raise ScenarioValidationError(
                    f"human {i} origin {h.origin!r} is not a place"
                )
            if h.script:
                cands = next_stations(self.net, h.origin, Actor.HUMAN)
                if not cands:
                    raise ScenarioValidationError(
                        f"human {i} has a scripted destination but origin "
                        f"{h.origin!r} has no next stations"
                    )
                if h.script[0] not in cands:
                    raise ScenarioValidationError(
                        f"human {i} scripted destination {h.script[0]!r} is not "
                        f"among next stations {sorted(map(str, cands))}"
                    )


def _reject_unknown(section: str, table: dict, allowed: set[str]) -> None:
    unknown = [k for k in table if k not in allowed]
    if unknown:
        raise ScenarioValidationError(
            f"unknown key {unknown[0]!r} in {section} (allowed: {sorted(allowed)})"
        )


def _place_id(raw: object, context: str) -> PlaceId:
    """Config identifiers: ints stay ints; digit strings (TOML table keys
    are always strings) become ints; other strings stay strings."""
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise ScenarioParseError(f"{context}: identifier must be int or string, got {raw!r}")
    if isinstance(raw, str) and raw.lstrip("-").isdigit():
        return int(raw)
    return raw


def _cell(raw: object, context: str) -> Cell:
    if (
        not isinstance(raw, (list, tuple))
        or len(raw) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in raw)
    ):
        raise ScenarioParseError(f"{context}: expected [x, y] integer pair, got {raw!r}")
    return Cell(raw[0], raw[1])


def _number(raw: object, context: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ScenarioParseError(f"{context}: expected a number, got {raw!r}")
    return float(raw)


def _integer(raw: object, context: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ScenarioParseError(f"{context}: expected an integer, got {raw!r}")
    return raw


def _parse_world(table: dict) -> GridWorkplace:
    _reject_unknown("[world]", table, {"n_x", "n_y", "obstacles", "stations", "corner_cutting"})
    n_x = _integer(table.get("n_x"), "[world] n_x")
    n_y = _integer(table.get("n_y"), "[world] n_y")
    obstacles = {
        _cell(c, "[world] obstacles") for c in table.get("obstacles", [])
    }
    stations_raw = table.get("stations", {})
    if not isinstance(stations_raw, dict):
        raise ScenarioParseError("[world] stations must be a table of place = [x, y]")
    stations = {
        _place_id(k, "[world] stations"): _cell(v, f"[world] stations.{k}")
        for k, v in stations_raw.items()
    }
    corner = table.get("corner_cutting", True)
    if not isinstance(corner, bool):
        raise ScenarioParseError("[world] corner_cutting must be a boolean")
    try:
        return GridWorkplace(n_x, n_y, frozenset(obstacles), stations, corner)
    except (ValueError, GridError) as exc:
        raise ScenarioValidationError(f"[world]: {exc}") from exc


def _parse_arcs(raw: object, context: str) -> frozenset[tuple]:
    arcs = set()
    if not isinstance(raw, list):
        raise ScenarioParseError(f"{context} must be a list of [src, dst] pairs")
    for pair in raw:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ScenarioParseError(f"{context}: expected [src, dst], got {pair!r}")
        arcs.add((_place_id(pair[0], context), _place_id(pair[1], context)))
    return frozenset(arcs)


def _parse_tokens(raw: object, context: str) -> dict[PlaceId, int]:
    if not isinstance(raw, dict):
        raise ScenarioParseError(f"{context} must be a table of place = count")
    return {
        _place_id(k, context): _integer(v, f"{context}.{k}") for k, v in raw.items()
    }


def _parse_net(table: dict, stations: dict) -> tuple[PetriNet, Marking]:
    _reject_unknown(
        "[net]", table, {"places", "transitions", "arcs_h", "arcs_u", "tokens_h", "tokens_u"}
    )
    if "places" in table:
        places = frozenset(_place_id(p, "[net] places") for p in table["places"])
    else:
        places = frozenset(stations)
    transitions = frozenset(
        _place_id(t, "[net] transitions") for t in table.get("transitions", [])
    )
    try:
        net = PetriNet(
            places,
            transitions,
            _parse_arcs(table.get("arcs_h", []), "[net] arcs_h"),
            _parse_arcs(table.get("arcs_u", []), "[net] arcs_u"),
        )
        marking = Marking(
            _parse_tokens(table.get("tokens_h", {}), "[net] tokens_h"),
            _parse_tokens(table.get("tokens_u", {}), "[net] tokens_u"),
        )
    except ValueError as exc:
        raise ScenarioValidationError(f"[net]: {exc}") from exc
    return net, marking


def _parse_human(table: dict, index: int) -> HumanSpec:
    section = f"[[humans]] #{index}"
    _reject_unknown(section, table, {"origin", "epsilon", "seed", "script", "stray_limit"})
    if "origin" not in table:
        raise ScenarioParseError(f"{section}: origin is required")
    script_raw = table.get("script", [])
    if not isinstance(script_raw, list):
        raise ScenarioParseError(f"{section}: script must be a list of places")
    kwargs = {}
    if "epsilon" in table:
        kwargs["epsilon"] = _number(table["epsilon"], f"{section} epsilon")
    if "seed" in table:
        kwargs["seed"] = _integer(table["seed"], f"{section} seed")
    if "stray_limit" in table:
        kwargs["stray_limit"] = _integer(table["stray_limit"], f"{section} stray_limit")
    return HumanSpec(
        origin=_place_id(table["origin"], f"{section} origin"),
        script=tuple(_place_id(p, f"{section} script") for p in script_raw),
        **kwargs,
    )


def _parse_planner(table: dict) -> PlannerParams:
    _reject_unknown(
        "[planner]",
        table,
        {
            "horizon", "gamma", "human_weight", "goal_cost", "obstacle_cost",
            "degree", "window", "pseudo_count", "neighborhood",
        },
    )
    kwargs: dict = {}
    for key in ("horizon", "degree", "window"):
        if key in table:
            kwargs[key] = _integer(table[key], f"[planner] {key}")
    for key in ("gamma", "human_weight", "goal_cost", "obstacle_cost", "pseudo_count"):
        if key in table:
            kwargs[key] = _number(table[key], f"[planner] {key}")
    if "neighborhood" in table:
        mode = table["neighborhood"]
        if not isinstance(mode, str):
            raise ScenarioParseError("[planner] neighborhood must be a string")
        kwargs["neighborhood"] = mode
    return PlannerParams(**kwargs)


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    """Build a validated Scenario from TOML text."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError(f"{source}: {exc}") from exc
    _reject_unknown(
        "top level", doc, {"k_max", "seed", "world", "net", "humans", "uas", "planner"}
    )
    for required in ("world", "net", "uas"):
        if required not in doc:
            raise ScenarioParseError(f"{source}: missing [{required}] section")
    world = _parse_world(doc["world"])
    net, marking = _parse_net(doc["net"], world.stations)
    humans_raw = doc.get("humans", [])
    if not isinstance(humans_raw, list):
        raise ScenarioParseError(f"{source}: humans must be [[humans]] tables")
    humans = tuple(_parse_human(t, i) for i, t in enumerate(humans_raw, start=1))
    uas_table = doc["uas"]
    _reject_unknown("[uas]", uas_table, {"origin", "goal"})
    for key in ("origin", "goal"):
        if key not in uas_table:
            raise ScenarioParseError(f"[uas]: {key} is required")
    planner = _parse_planner(doc.get("planner", {}))
    kwargs: dict = {}
    if "k_max" in doc:
        kwargs["k_max"] = _integer(doc["k_max"], "k_max")
    if "seed" in doc:
        kwargs["seed"] = _integer(doc["seed"], "seed")
    return Scenario(
        world=world,
        net=net,
        marking=marking,
        humans=humans,
        uas_origin=_place_id(uas_table["origin"], "[uas] origin"),
        uas_goal=_place_id(uas_table["goal"], "[uas] goal"),
        planner=planner,
        **kwargs,
    )


def load_scenario(path: str | FsPath) -> Scenario:
    """Load and validate a scenario TOML file."""
    p = FsPath(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {p}: {exc}") from exc
    return parse_scenario(text, source=str(p))


def bundled_names() -> list[str]:
    """Names of scenario files shipped inside the package."""
    data = importlib.resources.files("gridcrew").joinpath("data")
    return sorted(
        entry.name[: -len(".toml")]
        for entry in data.iterdir()
        if entry.name.endswith(".toml")
    )


def load_bundled(name: str) -> Scenario:
    """Load a scenario shipped with the package, e.g. "five_humans"."""
    resource = importlib.resources.files("gridcrew").joinpath("data", f"{name}.toml")
    try:
        text = resource.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError) as exc:
        raise ScenarioParseError(
            f"no bundled scenario {name!r} (available: {bundled_names()})"
        ) from exc
    return parse_scenario(text, source=f"bundled:{name}")
