import math

import numpy as np
import pytest

from gridcrew.grid import Cell, GridWorkplace, euclidean
from gridcrew.humans import DesiredVelocity, SpeedClass
from gridcrew.perception import (
    DistractionModel,
    EmptyWindowError,
    IntentionEstimate,
    Neighborhood,
    deviation_reward,
    neighborhood_cells,
)


def world10():
    return GridWorkplace(10, 10, frozenset(), {})


def test_forward_neighborhood_degree_1():
    nb = Neighborhood.forward(1)
    cells = neighborhood_cells(nb, Cell(5, 5), world10())
    assert cells == {Cell(6, 5), Cell(5, 6), Cell(6, 6)}


def test_forward_neighborhood_degree_2_interior():
    nb = Neighborhood.forward(2)
    assert len(nb.offsets) == 8
    cells = neighborhood_cells(nb, Cell(4, 4), world10())
    assert len(cells) == 8
    assert all(c.x >= 4 and c.y >= 4 for c in cells)
    assert Cell(4, 4) not in cells


def test_forward_neighborhood_empty_at_far_corner():
    nb = Neighborhood.forward(2)
    assert neighborhood_cells(nb, Cell(10, 10), world10()) == set()
    assert nb.in_grid_offsets(Cell(10, 10), world10()) == []


def test_symmetric_neighborhood_size():
    for d in (1, 2, 3):
        nb = Neighborhood.symmetric(d)
        assert len(nb.offsets) == (2 * d + 1) ** 2 - 1
        assert (0, 0) not in nb.offsets


def test_neighborhood_mode_parsing():
    assert Neighborhood.from_mode("forward", 2).offsets == Neighborhood.forward(2).offsets
    assert Neighborhood.from_mode("symmetric", 1).offsets == Neighborhood.symmetric(1).offsets
    with pytest.raises(ValueError):
        Neighborhood.from_mode("diagonal", 2)
    with pytest.raises(ValueError):
        Neighborhood.forward(0)


def test_neighborhood_keeps_obstacle_cells():
    world = GridWorkplace(10, 10, frozenset({Cell(6, 6)}), {})
    cells = neighborhood_cells(Neighborhood.forward(1), Cell(5, 5), world)
    assert Cell(6, 6) in cells


def test_observe_counts_offsets():
    model = DistractionModel(Neighborhood.forward(2))
    v = DesiredVelocity(1, 0)
    model.observe(1, Cell(6, 5), Cell(5, 5), v)
    assert model.counts[(1, SpeedClass.STRAIGHT, (1, 0))] == 1.0
    # offset outside the forward window: dropped
    model.observe(1, Cell(4, 5), Cell(5, 5), v)
    assert (1, SpeedClass.STRAIGHT, (-1, 0)) not in model.counts
    # center offset (no distraction) also dropped
    model.observe(1, Cell(5, 5), Cell(5, 5), v)
    assert len(model.counts) == 1
    for _ in range(99):
        model.observe(1, Cell(6, 5), Cell(5, 5), v)
    assert model.counts[(1, SpeedClass.STRAIGHT, (1, 0))] == 100.0


def test_masses_uniform_under_pure_smoothing():
    model = DistractionModel(Neighborhood.forward(2), pseudo_count=1.0)
    masses = model.masses(1, Cell(4, 4), SpeedClass.STRAIGHT, world10())
    assert len(masses) == 8
    for _, m in masses:
        assert m == pytest.approx(1.0 / 8.0, abs=1e-15)


def test_masses_track_observed_frequencies():
    model = DistractionModel(Neighborhood.forward(1), pseudo_count=0.0)
    v = DesiredVelocity(1, 0)
    anchor = Cell(5, 5)
    for _ in range(2):
        model.observe(1, Cell(6, 5), anchor, v)
    model.observe(1, Cell(5, 6), anchor, v)
    model.observe(1, Cell(6, 6), anchor, v)
    dist = model.distribution(1, anchor, SpeedClass.STRAIGHT, world10())
    assert dist[Cell(6, 5)] == pytest.approx(0.5, abs=1e-15)
    assert dist[Cell(5, 6)] == pytest.approx(0.25, abs=1e-15)
    assert dist[Cell(6, 6)] == pytest.approx(0.25, abs=1e-15)


def test_masses_empty_when_nothing_observed_and_no_smoothing():
    model = DistractionModel(Neighborhood.forward(2), pseudo_count=0.0)
    assert model.masses(1, Cell(4, 4), SpeedClass.STAY, world10()) == []


def test_masses_normalize_at_boundaries():
    model = DistractionModel(Neighborhood.symmetric(2))
    model.observe(1, Cell(2, 1), Cell(1, 1), DesiredVelocity(0, 0))
    for anchor in (Cell(1, 1), Cell(10, 10), Cell(1, 5), Cell(5, 5)):
        masses = model.masses(1, anchor, SpeedClass.STAY, world10())
        assert sum(m for _, m in masses) == pytest.approx(1.0, abs=1e-12)
        for c, _ in masses:
            assert world10().contains(c)


def test_distraction_point_queries():
    model = DistractionModel(Neighborhood.forward(1), pseudo_count=1.0)
    p = model.distraction(1, Cell(6, 5), Cell(5, 5), SpeedClass.STRAIGHT, world10())
    assert p == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert model.distraction(1, Cell(4, 5), Cell(5, 5), SpeedClass.STRAIGHT, world10()) == 0.0


def test_speed_classes_are_separate_distributions():
    model = DistractionModel(Neighborhood.forward(1), pseudo_count=1.0)
    anchor = Cell(5, 5)
    for _ in range(50):
        model.observe(1, Cell(6, 5), anchor, DesiredVelocity(1, 0))
    straight = model.distribution(1, anchor, SpeedClass.STRAIGHT, world10())
    stay = model.distribution(1, anchor, SpeedClass.STAY, world10())
    assert straight[Cell(6, 5)] > 0.9
    for m in stay.values():
        assert m == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_humans_are_separate_distributions():
    model = DistractionModel(Neighborhood.forward(1), pseudo_count=1.0)
    anchor = Cell(5, 5)
    for _ in range(50):
        model.observe(1, Cell(6, 5), anchor, DesiredVelocity(1, 0))
    other = model.distribution(2, anchor, SpeedClass.STRAIGHT, world10())
    for m in other.values():
        assert m == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_deviation_reward_values():
    assert deviation_reward(Cell(3, 3), Cell(3, 3)) == 1.0
    assert deviation_reward(Cell(3, 3), Cell(4, 3)) == pytest.approx(math.exp(-1), abs=1e-15)
    assert deviation_reward(Cell(0, 0), Cell(10, 0)) == pytest.approx(math.exp(-10), abs=1e-18)
    d1 = deviation_reward(Cell(1, 1), Cell(2, 2))
    d2 = deviation_reward(Cell(1, 1), Cell(3, 3))
    assert 0.0 < d2 < d1 <= 1.0


def test_intention_uniform_when_candidates_coincide():
    est = IntentionEstimate(candidates=(1, 2))
    for k in range(5):
        est.record(k, Cell(3, 3), {1: Cell(4, 4), 2: Cell(4, 4)})
    post = est.intention()
    assert post[1] == pytest.approx(0.5, abs=1e-15)
    assert post[2] == pytest.approx(0.5, abs=1e-15)


def test_intention_matches_direct_formula():
    rng = np.random.default_rng(21)
    for _ in range(20):
        cands = ("a", "b", "c")
        est = IntentionEstimate(candidates=cands, window_size=10)
        records = []
        for k in range(int(rng.integers(1, 15))):
            actual = Cell(int(rng.integers(1, 20)), int(rng.integers(1, 20)))
            desired = {
                c: Cell(int(rng.integers(1, 20)), int(rng.integers(1, 20)))
                for c in cands
            }
            est.record(k, actual, desired)
            records.append((actual, desired))
        live = records[-10:]
        sums = {
            c: sum(math.exp(-euclidean(a, d[c])) for a, d in live) for c in cands
        }
        total = sum(sums.values())
        post = est.intention()
        assert sum(post.values()) == pytest.approx(1.0, abs=1e-12)
        for c in cands:
            assert post[c] == pytest.approx(sums[c] / total, abs=1e-12)


def test_intention_window_trims_oldest():
    est = IntentionEstimate(candidates=(1, 2), window_size=3)
    # old records favor candidate 1, new ones favor candidate 2
    for k in range(5):
        est.record(k, Cell(1, 1), {1: Cell(1, 1), 2: Cell(9, 9)})
    for k in range(5, 8):
        est.record(k, Cell(9, 9), {1: Cell(1, 1), 2: Cell(9, 9)})
    assert len(est.window) == 3
    post = est.intention()
    assert post[2] > 0.99


def test_intention_requires_observations():
    est = IntentionEstimate(candidates=(1,))
    with pytest.raises(EmptyWindowError):
        est.intention()
    with pytest.raises(KeyError):
        est.record(0, Cell(1, 1), {})
    with pytest.raises(ValueError):
        IntentionEstimate(candidates=())


def test_intention_is_label_invariant():
    geometry = [
        (Cell(2, 2), Cell(2, 3), Cell(5, 5)),
        (Cell(2, 3), Cell(2, 4), Cell(5, 5)),
        (Cell(3, 3), Cell(2, 5), Cell(5, 5)),
    ]
    inted = IntentionEstimate(candidates=(10, 20))
    named = IntentionEstimate(candidates=("left", "right"))
    for k, (actual, d1, d2) in enumerate(geometry):
        inted.record(k, actual, {10: d1, 20: d2})
        named.record(k, actual, {"left": d1, "right": d2})
    a = inted.intention()
    b = named.intention()
    assert a[10] == b["left"]
    assert a[20] == b["right"]
