import numpy as np
import pytest
from hypothesis import given, strategies as st

from abiot_sim.errors import ConfigError, UndefinedMetricError
from abiot_sim.field_model import (PestPopulation, PestSpecies, build_field, effectiveness,
                                   pests_at, seed_pests)


def test_constant_crop_expands_to_uniform_grid():
    f = build_field({"width_m": 30, "length_m": 30, "cell_size_m": 0.5, "crop_height_m": 1.0})
    assert f.shape_xy == (60, 60)
    assert np.all(f.crop_height_m == 1.0)


def test_rectangular_grid_dimensions():
    f = build_field({"width_m": 20, "length_m": 10, "cell_size_m": 0.5})
    assert f.shape_xy == (40, 20)
    assert f.crop_height_m.shape == (20, 40)


@pytest.mark.parametrize("key,value", [("width_m", -1), ("length_m", 0), ("cell_size_m", 0)])
def test_non_positive_dimension_rejected(key, value):
    conf = {"width_m": 10, "length_m": 10, "cell_size_m": 0.5, key: value}
    with pytest.raises(ConfigError) as err:
        build_field(conf)
    assert err.value.key == f"field.{key}"


def test_grid_shape_mismatch_rejected():
    with pytest.raises(ConfigError, match="shape"):
        build_field({"width_m": 2, "length_m": 1, "cell_size_m": 0.5, "crop_height_m": [[1, 1], [1, 1]]})


def test_explicit_grid_and_negative_crop():
    grid = [[0.5, 1.0, 1.5, 2.0], [0.0, 0.1, 0.2, 0.3]]
    f = build_field({"width_m": 2, "length_m": 1, "cell_size_m": 0.5, "crop_height_m": grid})
    assert f.max_crop_height() == 2.0
    with pytest.raises(ConfigError):
        build_field({"width_m": 2, "length_m": 1, "cell_size_m": 0.5,
                     "crop_height_m": [[0, 0, 0, -1], [0, 0, 0, 0]]})


def test_launch_point_must_be_on_boundary():
    build_field({"width_m": 10, "length_m": 10, "launch_point": [5, 0]})
    with pytest.raises(ConfigError) as err:
        build_field({"width_m": 10, "length_m": 10, "launch_point": [5, 5]})
    assert err.value.key == "field.launch_point"


def test_species_invariants():
    with pytest.raises(ConfigError):
        PestSpecies(band_lo_hz=50_000, band_hi_hz=40_000)
    with pytest.raises(ConfigError):
        PestSpecies(base_susceptibility=1.5)
    with pytest.raises(ConfigError):
        PestSpecies(habituation_days=0)


def test_seed_pests_empty(field):
    pop = seed_pests(field, PestSpecies(), 0, 1)
    assert len(pop) == 0


def test_seed_pests_deterministic_and_inside(field):
    a = seed_pests(field, PestSpecies(), 200, 7)
    b = seed_pests(field, PestSpecies(), 200, 7)
    assert np.array_equal(a.positions, b.positions)
    assert len(a) == 200 and a.present.all() and np.all(a.habituation == 0)
    assert np.all((a.positions >= 0) & (a.positions <= (field.width_m, field.length_m)))
    c = seed_pests(field, PestSpecies(), 200, 8)
    assert not np.array_equal(a.positions, c.positions)


def test_pests_at_rejects_outside(field):
    with pytest.raises(ConfigError):
        pests_at(field, PestSpecies(), [[31, 1]])


def _pop(n_present, n_total=None):
    n_total = n_total or max(n_present, 1)
    present = np.zeros(n_total, dtype=bool)
    present[:n_present] = True
    return PestPopulation(PestSpecies(), np.zeros((n_total, 2)), present)


def test_effectiveness_examples():
    assert effectiveness(_pop(200), _pop(27, 200)) == pytest.approx(0.865)
    assert effectiveness(_pop(200), _pop(200)) == 0.0
    assert effectiveness(_pop(100), _pop(0, 100)) == 1.0


def test_effectiveness_undefined_without_pests():
    with pytest.raises(UndefinedMetricError):
        effectiveness(_pop(0, 5), _pop(0, 5))
    with pytest.raises(ValueError):
        effectiveness(_pop(5), _pop(3, 6))


@given(st.integers(1, 300), st.data())
def test_effectiveness_bounded(n0, data):
    n1 = data.draw(st.integers(0, n0))
    e = effectiveness(_pop(n0), _pop(n1, n0))
    assert 0.0 <= e <= 1.0
    assert (e == 0.0) == (n1 == n0)


def test_habituation_range_checked():
    with pytest.raises(ValueError):
        PestPopulation(PestSpecies(), np.zeros((1, 2)), [True], [1.5])
