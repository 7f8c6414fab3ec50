"""Spiral-inward coverage paths, retrace laps and coverage diagnostics.

Tracks lie on a lattice anchored at the launch corner: lines at 0, s, 2s, ...
measured from that corner, stopping short of the far boundary. Ring ``r``
spans lattice indices ``r .. n-1-r`` on both axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .errors import DegenerateRegionError
from .field_model import FieldSpec

CORNERS = ("sw", "se", "ne", "nw")
DENSITY_SPACING = {"dense": 2.0, "sparse": 4.0}
DEFAULT_LAPS = 6


@dataclass(frozen=True)
class Ring:
    """One concentric ring in lattice indices (u along x-from-corner, v along y)."""

    lo_u: int
    hi_u: int
    lo_v: int
    hi_v: int


@dataclass
class PathPlan:
    region: tuple[float, float, float, float]
    spacing_m: float
    laps: int
    waypoints: list = dc_field(default_factory=list)
    lap_waypoints: list = dc_field(default_factory=list)

    @property
    def launch_corner(self):
        return self.waypoints[0]

    def length_m(self) -> float:
        return path_length(self.waypoints)


def _lattice_count(extent: float, spacing: float) -> int:
    return max(1, math.ceil(extent / spacing - 1e-9))


def corner_point(region, corner: str):
    x0, y0, x1, y1 = region
    return {"sw": (x0, y0), "se": (x1, y0), "ne": (x1, y1), "nw": (x0, y1)}[corner]


def nearest_corner(region, point) -> str:
    px, py = point
    return min(CORNERS, key=lambda c: (math.dist(corner_point(region, c), (px, py)),
                                       CORNERS.index(c)))


def _check(region, spacing_m):
    x0, y0, x1, y1 = region
    w, h = x1 - x0, y1 - y0
    if w <= 0 or h <= 0:
        raise DegenerateRegionError(f"region {region} has no area")
    if spacing_m <= 0:
        raise DegenerateRegionError(f"spacing must be positive, got {spacing_m}")
    if spacing_m > min(w, h) + 1e-9:
        raise DegenerateRegionError(
            f"spacing {spacing_m} exceeds the region's smaller side {min(w, h)}")
    return w, h


def spiral_rings(region, spacing_m: float) -> list[Ring]:
    w, h = _check(region, spacing_m)
    nu, nv = _lattice_count(w, spacing_m), _lattice_count(h, spacing_m)
    rings = []
    r = 0
    while r <= nu - 1 - r and r <= nv - 1 - r:
        rings.append(Ring(r, nu - 1 - r, r, nv - 1 - r))
        r += 1
    return rings


def spiral_inward(region, spacing_m: float, start_corner: str = "sw") -> list[tuple[float, float]]:
    """Waypoints of concentric rectangular rings from the perimeter inward.

    Each ring runs corner -> along x -> along y -> back along x -> down to one
    step above its start, then steps diagonally onto the next ring's corner.
    """
    if start_corner not in CORNERS:
        raise ValueError(f"unknown corner {start_corner!r}")
    rings = spiral_rings(region, spacing_m)
    cx, cy = corner_point(region, start_corner)
    sx = 1.0 if start_corner in ("sw", "nw") else -1.0
    sy = 1.0 if start_corner in ("sw", "se") else -1.0

    idx: list[tuple[int, int]] = []

    def add(u, v):
        if not idx or idx[-1] != (u, v):
            idx.append((u, v))

    for ring in rings:
        a, b, c, d = ring.lo_u, ring.hi_u, ring.lo_v, ring.hi_v
        add(a, c)
        if a == b or c == d:
            add(b, d)
            break
        add(b, c)
        add(b, d)
        add(a, d)
        add(a, c + 1)
    return [(cx + sx * u * spacing_m, cy + sy * v * spacing_m) for u, v in idx]


def full_lap(inward):
    """Inward path followed by its exact retrace back to the start."""
    inward = list(inward)
    if not inward:
        raise ValueError("inward path is empty")
    return inward + inward[-2::-1]


def mission_path(region, spacing_m: float | None = None, laps: int = DEFAULT_LAPS,
                 start_corner: str = "sw", density: str = "dense") -> PathPlan:
    if laps < 1:
        raise ValueError(f"laps must be >= 1, got {laps}")
    if spacing_m is None:
        spacing_m = DENSITY_SPACING[density]
    lap = full_lap(spiral_inward(region, spacing_m, start_corner))
    waypoints = list(lap)
    for _ in range(laps - 1):
        waypoints.extend(lap[1:])
    return PathPlan(tuple(region), spacing_m, laps, waypoints, [list(lap) for _ in range(laps)])


def path_length(waypoints) -> float:
    pts = np.asarray(waypoints, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        return 0.0
    return float(np.hypot(*np.diff(pts, axis=0).T).sum())


def distance_grid(waypoints, field: FieldSpec) -> np.ndarray:
    """Distance from every cell center to the polyline, shape (ny, nx)."""
    xs, ys = field.cell_centers()
    gx, gy = np.meshgrid(xs, ys)
    wp = np.ascontiguousarray(np.asarray(waypoints, dtype=float).reshape(-1, 2))
    d = _kernels.polyline_distance(np.ascontiguousarray(gx.ravel()),
                                   np.ascontiguousarray(gy.ravel()), wp)
    return np.asarray(d).reshape(field.ny, field.nx)


def coverage_map(plan, effect_radius_m: float, field: FieldSpec):
    """(covered fraction, boolean grid): a cell counts when its center is within range of the path.

    ``plan`` may be a PathPlan, a waypoint list, or a list of PathPlans (union).
    """
    if effect_radius_m <= 0:
        raise ValueError("effect radius must be positive")
    plans = plan if isinstance(plan, (list, tuple)) and plan and isinstance(plan[0], PathPlan) else [plan]
    covered = np.zeros((field.ny, field.nx), dtype=bool)
    for p in plans:
        wps = p.waypoints if isinstance(p, PathPlan) else p
        if len(wps) == 0:
            continue
        covered |= distance_grid(wps, field) <= effect_radius_m
    return float(covered.mean()), covered
