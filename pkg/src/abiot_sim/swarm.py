"""Grid partitioning of a field among agents and neighbor-only boundary negotiation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .errors import NegotiationTimeout, OverPartitionError
from .field_model import FieldSpec

_TOL = 1e-9


@dataclass(frozen=True)
class CellAssignment:
    agent_id: int
    cell: tuple[float, float, float, float]  # x0, y0, x1, y1
    neighbors: tuple[int, ...] = ()

    @property
    def area(self) -> float:
        x0, y0, x1, y1 = self.cell
        return (x1 - x0) * (y1 - y0)

    def to_dict(self) -> dict:
        return {"agent_id": self.agent_id, "cell": list(self.cell), "neighbors": list(self.neighbors)}

    @classmethod
    def from_dict(cls, d: dict) -> "CellAssignment":
        x0, y0, x1, y1 = (float(v) for v in d["cell"])
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"agent {d['agent_id']}: degenerate cell {d['cell']}")
        return cls(int(d["agent_id"]), (x0, y0, x1, y1), tuple(int(n) for n in d.get("neighbors", ())))


@dataclass(frozen=True)
class BoundaryMsg:
    sender: int
    to: int
    claimed_edge: tuple[tuple[float, float], tuple[float, float]]
    round: int


@dataclass(frozen=True)
class PartitionReport:
    overlap_area_m2: float
    gap_area_m2: float
    ok: bool

    def to_dict(self) -> dict:
        return {"overlap_area_m2": self.overlap_area_m2, "gap_area_m2": self.gap_area_m2, "ok": self.ok}


@dataclass
class NegotiationResult:
    assignments: list
    trace: list = dc_field(default_factory=list)
    rounds: int = 0
    changes: int = 0


def _grid_shape(n: int, aspect: float) -> tuple[int, int]:
    """(columns, rows) with product n and columns/rows closest to aspect in log space."""
    best = None
    for p in range(1, n + 1):
        if n % p:
            continue
        q = n // p
        score = (abs(math.log(p / q) - math.log(aspect)), -p)
        if best is None or score < best[0]:
            best = (score, (p, q))
    return best[1]


def _snapped_cuts(extent: float, parts: int, cells: int, cell: float) -> list[float]:
    cuts = [0.0]
    for i in range(1, parts):
        cuts.append(min(round(i * cells / parts), cells) * cell)
    cuts.append(extent)
    return cuts


def _side_toward(a, b):
    """Which side of rectangle ``a`` faces rectangle ``b``: 'e', 'w', 'n' or 's'."""
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    y_overlap = min(ay1, by1) - max(ay0, by0)
    x_overlap = min(ax1, bx1) - max(ax0, bx0)
    if y_overlap >= x_overlap:
        return "e" if (bx0 + bx1) > (ax0 + ax1) else "w"
    return "n" if (by0 + by1) > (ay0 + ay1) else "s"


def _shares_edge(a, b) -> bool:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    y_span = min(ay1, by1) - max(ay0, by0)
    x_span = min(ax1, bx1) - max(ax0, bx0)
    vertical = (abs(ax1 - bx0) <= _TOL or abs(bx1 - ax0) <= _TOL) and y_span > _TOL
    horizontal = (abs(ay1 - by0) <= _TOL or abs(by1 - ay0) <= _TOL) and x_span > _TOL
    return vertical or horizontal


def neighbors_of(cells: dict) -> dict:
    return {i: tuple(sorted(j for j in cells if j != i and _shares_edge(cells[i], cells[j])))
            for i in cells}


def partition_field(field: FieldSpec, n_agents: int) -> list[CellAssignment]:
    """Split the field into a p x q grid of near-equal rectangles on cell boundaries."""
    if n_agents < 1:
        raise ValueError(f"n_agents must be >= 1, got {n_agents}")
    p, q = _grid_shape(n_agents, field.width_m / field.length_m)
    if p > field.nx or q > field.ny:
        raise OverPartitionError(
            f"{n_agents} agents as {p}x{q} exceeds the {field.nx}x{field.ny} cell grid")
    xs = _snapped_cuts(field.width_m, p, field.nx, field.cell_size_m)
    ys = _snapped_cuts(field.length_m, q, field.ny, field.cell_size_m)
    cells = {}
    for row in range(q):
        for col in range(p):
            cells[row * p + col] = (xs[col], ys[row], xs[col + 1], ys[row + 1])
    nbrs = neighbors_of(cells)
    return [CellAssignment(i, cells[i], nbrs[i]) for i in sorted(cells)]


def _edge_segment(rect, side):
    x0, y0, x1, y1 = rect
    return {"e": ((x1, y0), (x1, y1)), "w": ((x0, y0), (x0, y1)),
            "n": ((x0, y1), (x1, y1)), "s": ((x0, y0), (x1, y0))}[side]


def _edge_coord(edge, side) -> float:
    (ax, ay), _ = edge
    return ax if side in ("e", "w") else ay


_OPPOSITE = {"e": "w", "w": "e", "n": "s", "s": "n"}
_SIDE_INDEX = {"w": 0, "s": 1, "e": 2, "n": 3}


def _agent_round(me: CellAssignment, sides: dict, inbox: list, bounds):
    """Pure per-agent handler: returns the updated rectangle for this round.

    Lower agent id keeps a disputed strip: on overlap the higher id retracts,
    on a gap the lower id extends. Sides without a neighbor snap to the field edge.
    """
    rect = list(me.cell)
    for msg in inbox:
        side = sides[msg.sender]
        theirs = _edge_coord(msg.claimed_edge, _OPPOSITE[side])
        mine = rect[_SIDE_INDEX[side]]
        if abs(theirs - mine) <= _TOL:
            continue
        outward = side in ("e", "n")
        # overlap: my edge pokes past theirs into their territory
        overlap = (mine > theirs) if outward else (mine < theirs)
        if overlap and msg.sender < me.agent_id:
            rect[_SIDE_INDEX[side]] = theirs
        elif not overlap and me.agent_id < msg.sender:
            rect[_SIDE_INDEX[side]] = theirs
    if bounds is not None:
        for side, k in _SIDE_INDEX.items():
            if side not in sides.values():
                rect[k] = bounds[k]
    return tuple(rect)


def negotiate(assignments, max_rounds: int = 10, field: FieldSpec | None = None) -> NegotiationResult:
    """Synchronous neighbor-to-neighbor boundary rounds until nothing changes.

    Every agent sends its facing edge to each listed neighbor; messages never
    go anywhere else. Raises NegotiationTimeout if the last allowed round still
    changed a claim.
    """
    current = {a.agent_id: a for a in assignments}
    bounds = None if field is None else (0.0, 0.0, field.width_m, field.length_m)
    # facing sides fixed from the initial layout
    sides = {i: {j: _side_toward(a.cell, current[j].cell) for j in a.neighbors if j in current}
             for i, a in current.items()}
    trace: list[BoundaryMsg] = []
    total_changes = 0
    for rnd in range(1, max_rounds + 1):
        inboxes = {i: [] for i in current}
        for i in sorted(current):
            for j in sorted(sides[i]):
                msg = BoundaryMsg(i, j, _edge_segment(current[i].cell, sides[i][j]), rnd)
                trace.append(msg)
                inboxes[j].append(msg)
        changes = 0
        updated = {}
        for i in sorted(current):
            rect = _agent_round(current[i], sides[i], inboxes[i], bounds)
            if any(abs(u - v) > _TOL for u, v in zip(rect, current[i].cell)):
                changes += 1
            updated[i] = replace(current[i], cell=rect)
        current = updated
        total_changes += changes
        if changes == 0:
            return NegotiationResult([current[i] for i in sorted(current)], trace, rnd, total_changes)
    final = [current[i] for i in sorted(current)]
    raise NegotiationTimeout(f"boundaries still changing after {max_rounds} rounds",
                             final, trace)


def validate_partition(assignments, field: FieldSpec) -> PartitionReport:
    """Count field cells claimed by two or more agents (overlap) or by none (gap)."""
    xs, ys = field.cell_centers()
    gx, gy = np.meshgrid(xs, ys)
    counts = np.zeros(gx.shape, dtype=int)
    for a in assignments:
        x0, y0, x1, y1 = a.cell
        counts += (gx >= x0) & (gx < x1) & (gy >= y0) & (gy < y1)
    cell_area = field.cell_size_m ** 2
    overlap = float((counts >= 2).sum() * cell_area)
    gap = float((counts == 0).sum() * cell_area)
    return PartitionReport(overlap, gap, overlap == 0 and gap == 0)


def message_pairs(trace) -> set:
    return {frozenset((m.sender, m.to)) for m in trace}


def perturb(assignments, agent_id: int, side: str, offset_m: float):
    """Test hook: push one side of an agent's cell outward by ``offset_m`` (negative retracts)."""
    out = []
    for a in assignments:
        if a.agent_id == agent_id:
            rect = list(a.cell)
            k = _SIDE_INDEX[side]
            rect[k] += offset_m if side in ("e", "n") else -offset_m
            a = replace(a, cell=tuple(rect))
        out.append(a)
    return out
