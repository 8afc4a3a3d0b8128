"""Petri-net task abstraction for the shared workplace.

Places stand for work stations; transitions move tokens between them.
Human and UAS co-workers have separate arc sets and separate token layers
over the same net, so firing a transition for one class never disturbs
the other class's tokens. All arc weights are 1.

Structural helpers classify each place into the constructs the model
recognizes: cyclic (task progression inside one station), sequential
(a single known next station), conflict (several possible next stations,
i.e. unknown intention), dependency (a transition needing tokens in
several input places), and concurrency (a transition feeding several
output places).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

PlaceId = int | str
TransitionId = int | str
Arc = tuple  # (place, transition) or (transition, place)


class PetriError(Exception):
    """Base class for net failures."""


class UnknownPlaceError(PetriError):
    pass


class UnknownTransitionError(PetriError):
    pass


class NotEnabledError(PetriError):
    """Attempt to fire a transition whose input places lack tokens."""


class Actor(Enum):
    """Which co-worker class an arc set or token layer belongs to."""

    HUMAN = "human"
    UAS = "uas"


class ConstructKind(Enum):
    CYCLIC = "cyclic"
    SEQUENTIAL = "sequential"
    CONFLICT = "conflict"
    DEPENDENCY = "dependency"
    CONCURRENCY = "concurrency"


@dataclass(frozen=True)
class PetriNet:
    """Immutable net structure: places, transitions, and dual arc sets."""

    places: frozenset[PlaceId]
    transitions: frozenset[TransitionId]
    arcs_h: frozenset[Arc] = frozenset()
    arcs_u: frozenset[Arc] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "places", frozenset(self.places))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        object.__setattr__(self, "arcs_h", frozenset(tuple(a) for a in self.arcs_h))
        object.__setattr__(self, "arcs_u", frozenset(tuple(a) for a in self.arcs_u))
        overlap = self.places & self.transitions
        if overlap:
            raise ValueError(f"identifiers used as both place and transition: {overlap}")
        for label, arcs in (("human", self.arcs_h), ("uas", self.arcs_u)):
            for arc in arcs:
                if len(arc) != 2:
                    raise ValueError(f"{label} arc {arc!r} is not a pair")
                src, dst = arc
                p_to_t = src in self.places and dst in self.transitions
                t_to_p = src in self.transitions and dst in self.places
                if not (p_to_t or t_to_p):
                    raise ValueError(
                        f"{label} arc {arc!r} does not join a declared place "
                        "and a declared transition"
                    )

    def arcs(self, who: Actor) -> frozenset[Arc]:
        return self.arcs_h if who is Actor.HUMAN else self.arcs_u

    def weight(self, arc: Arc, who: Actor) -> int:
        """Arc weight; every declared arc has weight 1."""
        if tuple(arc) not in self.arcs(who):
            raise PetriError(f"arc {arc!r} not declared for {who.value}")
        return 1

    @property
    def weight_h(self) -> dict[Arc, int]:
        return {arc: 1 for arc in self.arcs_h}

    @property
    def weight_u(self) -> dict[Arc, int]:
        return {arc: 1 for arc in self.arcs_u}

    def _require_place(self, p: PlaceId) -> None:
        if p not in self.places:
            raise UnknownPlaceError(f"unknown place {p!r}")

    def _require_transition(self, t: TransitionId) -> None:
        if t not in self.transitions:
            raise UnknownTransitionError(f"unknown transition {t!r}")


@dataclass
class Marking:
    """Token counts per place, one layer per co-worker class."""

    tokens_h: dict[PlaceId, int] = field(default_factory=dict)
    tokens_u: dict[PlaceId, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for layer in (self.tokens_h, self.tokens_u):
            for place, count in layer.items():
                if count < 0:
                    raise ValueError(f"negative token count {count} at {place!r}")

    def tokens(self, who: Actor) -> dict[PlaceId, int]:
        return self.tokens_h if who is Actor.HUMAN else self.tokens_u

    def count(self, p: PlaceId, who: Actor) -> int:
        return self.tokens(who).get(p, 0)

    def copy(self) -> "Marking":
        return Marking(dict(self.tokens_h), dict(self.tokens_u))


def out_transitions(net: PetriNet, p: PlaceId, who: Actor) -> set[TransitionId]:
    """Transitions reachable from place ``p`` along the class's arcs."""
    net._require_place(p)
    return {t for (src, t) in net.arcs(who) if src == p}


def cyclic_arcs(net: PetriNet) -> set[Arc]:
    """Arc pairs that run in both directions between one place and one
    transition, modeling task progression inside a single station.

    A pair counts as cyclic if both directions exist anywhere in the net,
    regardless of which co-worker class declares each direction.
    """
    all_arcs = net.arcs_h | net.arcs_u
    cyclic: set[Arc] = set()
    for src, dst in all_arcs:
        if (dst, src) in all_arcs:
            cyclic.add((src, dst))
            cyclic.add((dst, src))
    return cyclic


def next_stations(net: PetriNet, p: PlaceId, who: Actor) -> set[PlaceId]:
    """All possible next stations from ``p`` for the given class.

    Follows each outgoing transition of ``p`` to its output places,
    ignoring cyclic arcs. Empty when the co-worker does not change
    station at ``p``.
    """
    net._require_place(p)
    arcs = net.arcs(who)
    cyclic = cyclic_arcs(net)
    result: set[PlaceId] = set()
    for t in out_transitions(net, p, who):
        for arc in arcs:
            if arc[0] == t and arc not in cyclic:
                result.add(arc[1])
    return result


def classify_place(net: PetriNet, p: PlaceId, who: Actor) -> set[ConstructKind]:
    """Constructs the given place participates in, as seen by ``who``."""
    net._require_place(p)
    kinds: set[ConstructKind] = set()
    arcs = net.arcs(who)
    routes = next_stations(net, p, who)
    if len(routes) > 1:
        kinds.add(ConstructKind.CONFLICT)
    elif len(routes) == 1:
        kinds.add(ConstructKind.SEQUENTIAL)
    cyclic = cyclic_arcs(net)
    if any(p in (arc[0], arc[1]) for arc in cyclic):
        kinds.add(ConstructKind.CYCLIC)
    for t in out_transitions(net, p, who):
        inputs = {src for (src, dst) in arcs if dst == t}
        outputs = {dst for (src, dst) in arcs if src == t}
        if len(inputs) >= 2:
            kinds.add(ConstructKind.DEPENDENCY)
        if len(outputs) >= 2:
            kinds.add(ConstructKind.CONCURRENCY)
    return kinds


def can_fire(net: PetriNet, m: Marking, t: TransitionId, who: Actor) -> bool:
    """True iff every input place of ``t`` holds enough tokens for ``who``."""
    net._require_transition(t)
    tokens = m.tokens(who)
    for src, dst in net.arcs(who):
        if dst == t and tokens.get(src, 0) - 1 < 0:
            return False
    return True


def fire(net: PetriNet, m: Marking, t: TransitionId, who: Actor) -> Marking:
    """Fire ``t`` for ``who``: consume one token per input arc, produce one
    per output arc. Returns a new Marking; the other class's layer is
    carried over untouched.
    """
    if not can_fire(net, m, t, who):
        raise NotEnabledError(f"transition {t!r} not enabled for {who.value}")
    new = m.copy()
    tokens = new.tokens(who)
    for src, dst in net.arcs(who):
        if dst == t:
            tokens[src] = tokens.get(src, 0) - 1
    for src, dst in net.arcs(who):
        if src == t:
            tokens[dst] = tokens.get(dst, 0) + 1
    return new


def occupancy_violations(m: Marking) -> list[PlaceId]:
    """Places where co-worker presence breaks the safety cap.

    A place violates when at least one UAS is present and the combined
    human + UAS count exceeds 2. Humans alone are unconstrained, and the
    same bound caps UAS-only presence at 2.
    """
    places = list(m.tokens_u)
    places += [p for p in m.tokens_h if p not in m.tokens_u]
    violations = []
    for p in places:
        n_u = m.tokens_u.get(p, 0)
        n_h = m.tokens_h.get(p, 0)
        if n_u > 0 and n_u + n_h > 2:
            violations.append(p)
    return violations
