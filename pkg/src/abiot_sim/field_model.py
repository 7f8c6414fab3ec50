"""Field geometry, pest populations and the removal-count effectiveness metric."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigError, UndefinedMetricError

_EPS = 1e-9


@dataclass(frozen=True)
class FieldSpec:
    """Rectangular field; x runs along ``width_m``, y along ``length_m``.

    ``crop_height_m`` has shape ``(ny, nx)``: row index is the y cell.
    """

    width_m: float
    length_m: float
    cell_size_m: float
    crop_height_m: np.ndarray
    launch_point: tuple[float, float] = (0.0, 0.0)

    @property
    def nx(self) -> int:
        return self.crop_height_m.shape[1]

    @property
    def ny(self) -> int:
        return self.crop_height_m.shape[0]

    @property
    def shape_xy(self) -> tuple[int, int]:
        return self.nx, self.ny

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (0.0, 0.0, self.width_m, self.length_m)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (xs, ys) 1-D arrays of cell-center coordinates."""
        xs = (np.arange(self.nx) + 0.5) * self.cell_size_m
        ys = (np.arange(self.ny) + 0.5) * self.cell_size_m
        return xs, ys

    def contains(self, x: float, y: float) -> bool:
        return -_EPS <= x <= self.width_m + _EPS and -_EPS <= y <= self.length_m + _EPS

    def max_crop_height(self, region=None) -> float:
        """Tallest crop inside ``region`` (x0, y0, x1, y1), or the whole field."""
        if region is None:
            return float(self.crop_height_m.max())
        x0, y0, x1, y1 = region
        xs, ys = self.cell_centers()
        cols = (xs >= x0 - _EPS) & (xs <= x1 + _EPS)
        rows = (ys >= y0 - _EPS) & (ys <= y1 + _EPS)
        sub = self.crop_height_m[np.ix_(rows, cols)]
        if sub.size == 0:
            # region thinner than a cell: fall back to the cell under its center
            cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
            i = min(int(cy / self.cell_size_m), self.ny - 1)
            j = min(int(cx / self.cell_size_m), self.nx - 1)
            return float(self.crop_height_m[i, j])
        return float(sub.max())


def _grid_count(extent: float, cell: float) -> int:
    return max(1, math.ceil(extent / cell - 1e-9))


def build_field(config: dict) -> FieldSpec:
    """Validate the ``field`` config section and build a FieldSpec.

    ``crop_height_m`` may be a scalar (expanded to a uniform grid) or a nested
    list of shape (ny, nx).
    """
    def num(key, default=None):
        value = config.get(key, default)
        if value is None:
            raise ConfigError("missing value", f"field.{key}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", f"field.{key}")
        return float(value)

    width = num("width_m")
    length = num("length_m")
    cell = num("cell_size_m", 0.5)
    if width <= 0:
        raise ConfigError(f"must be positive, got {width}", "field.width_m")
    if length <= 0:
        raise ConfigError(f"must be positive, got {length}", "field.length_m")
    if not 0 < cell <= min(width, length):
        raise ConfigError(
            f"must be in (0, {min(width, length)}], got {cell}", "field.cell_size_m")

    nx, ny = _grid_count(width, cell), _grid_count(length, cell)
    crop = config.get("crop_height_m", 0.0)
    if isinstance(crop, (int, float)) and not isinstance(crop, bool):
        grid = np.full((ny, nx), float(crop))
    else:
        try:
            grid = np.asarray(crop, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "field.crop_height_m") from None
        if grid.shape != (ny, nx):
            raise ConfigError(
                f"grid shape {grid.shape} does not match field grid {(ny, nx)}",
                "field.crop_height_m")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ConfigError("crop heights must be finite and >= 0", "field.crop_height_m")

    lp = config.get("launch_point", (0.0, 0.0))
    try:
        lx, ly = (float(v) for v in lp)
    except (TypeError, ValueError):
        raise ConfigError(f"expected [x, y], got {lp!r}", "field.launch_point") from None
    inside = -_EPS <= lx <= width + _EPS and -_EPS <= ly <= length + _EPS
    on_edge = min(abs(lx), abs(lx - width), abs(ly), abs(ly - length)) <= 1e-6
    if not (inside and on_edge):
        raise ConfigError(
            f"({lx}, {ly}) is not on the field boundary", "field.launch_point")

    grid.setflags(write=False)
    return FieldSpec(width, length, cell, grid, (lx, ly))


@dataclass(frozen=True)
class PestSpecies:
    name: str = "generic_insect"
    band_lo_hz: float = 20_000.0
    band_hi_hz: float = 65_000.0
    base_susceptibility: float = 0.9
    habituation_days: float = 10.0
    rf_susceptible: bool = True

    def __post_init__(self):
        if not 0 < self.band_lo_hz < self.band_hi_hz:
            raise ConfigError("need 0 < band_lo_hz < band_hi_hz", "species.band_lo_hz")
        if not 0 <= self.base_susceptibility <= 1:
            raise ConfigError("must be in [0, 1]", "species.base_susceptibility")
        if self.habituation_days <= 0:
            raise ConfigError("must be positive", "species.habituation_days")

    def in_band(self, freq_hz: float) -> bool:
        return self.band_lo_hz <= freq_hz <= self.band_hi_hz


@dataclass
class PestPopulation:
    """Static point pests stored column-wise.

    ``positions`` is (n, 2); ``present`` and ``habituation`` are length-n arrays.
    """

    species: PestSpecies
    positions: np.ndarray
    present: np.ndarray
    habituation: np.ndarray = dc_field(default=None)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        self.present = np.asarray(self.present, dtype=bool)
        if self.habituation is None:
            self.habituation = np.zeros(len(self.positions))
        self.habituation = np.asarray(self.habituation, dtype=float)
        if not (len(self.present) == len(self.habituation) == len(self.positions)):
            raise ValueError("positions, present and habituation lengths differ")
        if np.any((self.habituation < 0) | (self.habituation > 1)):
            raise ValueError("habituation must lie in [0, 1]")

    def __len__(self):
        return len(self.positions)

    @property
    def n_present(self) -> int:
        return int(self.present.sum())

    def copy(self) -> "PestPopulation":
        return PestPopulation(self.species, self.positions.copy(),
                              self.present.copy(), self.habituation.copy())


def seed_pests(field: FieldSpec, species: PestSpecies, count: int, seed: int) -> PestPopulation:
    """Place ``count`` pests uniformly over the field, all present and unhabituated."""
    if count < 0:
        raise ConfigError(f"must be >= 0, got {count}", "sim.pests.count")
    rng = np.random.default_rng(seed)
    xy = rng.random((count, 2)) * (field.width_m, field.length_m)
    return PestPopulation(species, xy, np.ones(count, dtype=bool))


def pests_at(field: FieldSpec, species: PestSpecies, positions) -> PestPopulation:
    """Population at explicit positions, checked against the field rectangle."""
    xy = np.asarray(positions, dtype=float).reshape(-1, 2)
    for x, y in xy:
        if not field.contains(x, y):
            raise ConfigError(f"pest ({x}, {y}) lies outside the field", "sim.pests.positions")
    return PestPopulation(species, xy, np.ones(len(xy), dtype=bool))


def effectiveness(before: PestPopulation, after: PestPopulation) -> float:
    """Fraction of initially present pests that are gone afterwards."""
    if len(before) != len(after):
        raise ValueError("before and after populations differ in size")
    n0 = before.n_present
    if n0 == 0:
        raise UndefinedMetricError("no pests present before the run")
    return (n0 - after.n_present) / n0
