
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abiot_sim.errors import NegotiationTimeout, OverPartitionError
from abiot_sim.field_model import build_field
from abiot_sim.swarm import (CellAssignment, message_pairs, negotiate, partition_field,
                             perturb, validate_partition)


def field(w, h, cell=0.5):
    return build_field({"width_m": w, "length_m": h, "cell_size_m": cell})


def test_single_agent_gets_field():
    f = field(30, 30)
    (a,) = partition_field(f, 1)
    assert a.cell == (0.0, 0.0, 30.0, 30.0) and a.neighbors == ()


def test_quadrants():
    cells = partition_field(field(20, 20), 4)
    assert sorted(a.cell for a in cells) == sorted([(0, 0, 10, 10), (10, 0, 20, 10),
                                                     (0, 10, 10, 20), (10, 10, 20, 20)])
    assert all(len(a.neighbors) == 2 for a in cells)


def test_three_in_a_row():
    cells = partition_field(field(30, 10), 3)
    assert [a.cell for a in cells] == [(0, 0, 10, 10), (10, 0, 20, 10), (20, 0, 30, 10)]
    assert [len(a.neighbors) for a in cells] == [1, 2, 1]


def test_over_partition():
    with pytest.raises(OverPartitionError):
        partition_field(field(1, 1), 5)
    # a prime count forces one row of five; four cells per axis cannot hold it
    with pytest.raises(OverPartitionError):
        partition_field(field(4, 4, 1.0), 5)
    assert len(partition_field(field(5, 4, 1.0), 5)) == 5


def test_consistent_input_is_fixed_point():
    cells = partition_field(field(20, 20), 4)
    res = negotiate(cells, 10, field(20, 20))
    assert res.rounds == 1 and res.changes == 0
    assert res.assignments == cells


def test_two_agents_disputed_strip_lower_id_keeps_it():
    f = field(20, 10)
    a0 = CellAssignment(0, (0.0, 0.0, 11.0, 10.0), (1,))
    a1 = CellAssignment(1, (10.0, 0.0, 20.0, 10.0), (0,))
    assert validate_partition([a0, a1], f).overlap_area_m2 == pytest.approx(10.0)
    res = negotiate([a0, a1], 10, f)
    assert res.assignments[0].cell == (0.0, 0.0, 11.0, 10.0)
    assert res.assignments[1].cell == (11.0, 0.0, 20.0, 10.0)
    assert validate_partition(res.assignments, f).ok
    # round 1 resolves, round 2 confirms nothing changes
    assert res.rounds == 2 and res.changes == 1


def test_gap_filled_by_lower_id():
    f = field(20, 10)
    cells = perturb(partition_field(f, 2), 1, "w", -1.0)
    assert validate_partition(cells, f).gap_area_m2 == pytest.approx(10.0)
    res = negotiate(cells, 10, f)
    assert res.assignments[0].cell == (0.0, 0.0, 11.0, 10.0)
    assert validate_partition(res.assignments, f).ok


def test_two_by_two_trace_neighbor_pairs_only():
    res = negotiate(partition_field(field(20, 20), 4), 10)
    pairs = message_pairs(res.trace)
    assert len(pairs) == 4
    assert frozenset((0, 3)) not in pairs and frozenset((1, 2)) not in pairs


def test_validate_examples():
    f = field(20, 20)
    quads = partition_field(f, 4)
    rep = validate_partition(quads, f)
    assert (rep.overlap_area_m2, rep.gap_area_m2, rep.ok) == (0.0, 0.0, True)
    rep = validate_partition(quads[1:], f)
    assert rep.gap_area_m2 == pytest.approx(quads[0].area) and not rep.ok
    f2 = field(19, 10)
    rep = validate_partition([CellAssignment(0, (0, 0, 10, 10)), CellAssignment(1, (9, 0, 19, 10))], f2)
    assert rep.overlap_area_m2 == pytest.approx(10.0) and rep.gap_area_m2 == 0.0


def test_timeout_carries_state():
    f = field(20, 10)
    cells = perturb(partition_field(f, 2), 1, "w", 1.0)
    with pytest.raises(NegotiationTimeout) as err:
        negotiate(cells, 1, f)
    assert err.value.assignments and err.value.trace


def test_round_trip_dict():
    a = CellAssignment(3, (0.0, 1.0, 2.0, 3.0), (1, 2))
    assert CellAssignment.from_dict(a.to_dict()) == a
    with pytest.raises(ValueError):
        CellAssignment.from_dict({"agent_id": 0, "cell": [0, 0, 0, 1]})


def _brute(cells, f):
    xs, ys = f.cell_centers()
    counts = np.zeros((f.ny, f.nx), dtype=int)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            counts[i, j] = sum(1 for a in cells if a.cell[0] <= x < a.cell[2] and a.cell[1] <= y < a.cell[3])
    return counts


@settings(max_examples=20, deadline=None)
@given(st.integers(9, 30), st.integers(9, 30), st.integers(1, 9), st.data())
def test_partition_then_negotiate_is_clean(w, h, n, data):
    f = field(w, h, 1.0)
    cells = partition_field(f, n)
    if n > 1:
        victim = data.draw(st.sampled_from([a for a in cells if a.neighbors]))
        side = data.draw(st.sampled_from(["e", "w", "n", "s"]))
        cells = perturb(cells, victim.agent_id, side, data.draw(st.sampled_from([-1.0, 1.0])))
    res = negotiate(cells, 10, f)
    rep = validate_partition(res.assignments, f)
    assert rep.ok
    assert (_brute(res.assignments, f) == 1).all()
    nbrs = {a.agent_id: set(a.neighbors) for a in cells}
    assert all(m.to in nbrs[m.sender] for m in res.trace)
