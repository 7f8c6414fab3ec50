"""Deterministic discrete-time engine: fly the missions, expose the field, remove pests."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import _kernels
from .acoustics import ExposureField, habituation_gain
from .config import RunConfig
from .errors import ConfigError, DegenerateRegionError, NegotiationTimeout, PartitionRefused
from .field_model import PestPopulation, pests_at, seed_pests
from .flight import EventKind, Mode, Route, cruise_altitude, extend_beacon, fly_mission
from .path_planner import PathPlan, corner_point, coverage_map, mission_path, nearest_corner
from .swarm import negotiate, partition_field, perturb, validate_partition

# rows of uniform draws generated per kernel call; bounds memory, not results
_CHUNK_STEPS = 1024
_REMOVAL_STREAM = 1


@dataclass
class AgentPlan:
    agent_id: int
    region: tuple[float, float, float, float]
    home: tuple[float, float]
    start_corner: str
    cruise_z: float

    def plan(self, spacing_m: float, laps: int) -> PathPlan:
        return mission_path(self.region, spacing_m, laps, self.start_corner)

    def route(self, spacing_m: float, laps: int) -> Route:
        plan = self.plan(spacing_m, laps)
        lap_len = len(plan.lap_waypoints[0])
        ends = frozenset((j + 1) * (lap_len - 1) for j in range(laps)) if lap_len > 1 \
            else frozenset(range(laps))
        return Route(self.home, plan.waypoints, self.cruise_z, ends)


@dataclass
class DayFlight:
    agent_xy: np.ndarray      # (steps, agents, 2)
    emitting: np.ndarray      # (steps, agents) uint8
    events: list
    finals: dict              # agent_id -> final AgentState
    energy_used_j: float

    @property
    def steps(self) -> int:
        return self.agent_xy.shape[0]


@dataclass
class Metrics:
    effectiveness: float
    coverage: float
    energy_used_j: float
    laps_completed: int
    per_day_effectiveness: list
    present_before: int = 0
    present_after: int = 0

    FIELDS = ("effectiveness", "coverage", "energy_used_j", "laps_completed",
              "present_before", "present_after", "per_day_effectiveness")

    def row(self) -> dict:
        return {
            "effectiveness": f"{self.effectiveness:.6f}",
            "coverage": f"{self.coverage:.6f}",
            "energy_used_j": f"{self.energy_used_j:.3f}",
            "laps_completed": str(self.laps_completed),
            "present_before": str(self.present_before),
            "present_after": str(self.present_after),
            "per_day_effectiveness": ";".join(f"{v:.6f}" for v in self.per_day_effectiveness),
        }


@dataclass
class RunResult:
    metrics: Metrics
    events: list
    exposure: ExposureField | None
    pests_before: PestPopulation
    pests_after: PestPopulation
    agents: list
    partition_report: object = None
    removed_step: np.ndarray | None = None
    flights: list = dc_field(default_factory=list)


def agent_plans(cfg: RunConfig):
    """Per-agent regions and homes; coordinated mode gates on a clean partition."""
    field = cfg.field
    report = None
    if cfg.sim["mode"] == "standalone":
        region = tuple(cfg.path["region"]) if cfg.path["region"] else field.bounds
        home = field.launch_point
        corner = cfg.path["start_corner"] or nearest_corner(region, home)
        regions = [(0, region, home, corner)]
    else:
        assignments = partition_field(field, int(cfg.sim["n_agents"]))
        for p in cfg.swarm["perturbations"]:
            assignments = perturb(assignments, int(p["agent_id"]), p["side"], float(p["offset_m"]))
        if cfg.swarm["negotiate"]:
            try:
                assignments = negotiate(assignments, cfg.swarm["max_rounds"], field).assignments
            except NegotiationTimeout as exc:
                raise PartitionRefused(validate_partition(exc.assignments, field),
                                       "negotiation did not settle") from exc
        report = validate_partition(assignments, field)
        if not report.ok:
            raise PartitionRefused(report)
        regions = []
        for a in assignments:
            corner = nearest_corner(a.cell, field.launch_point)
            regions.append((a.agent_id, a.cell, corner_point(a.cell, corner), corner))
    plans = []
    for agent_id, region, home, corner in regions:
        z = cruise_altitude(field.max_crop_height(region))
        plans.append(AgentPlan(agent_id, tuple(float(v) for v in region), tuple(home), corner, z))
    try:
        for a in plans:
            a.plan(cfg.spacing_m, 1)
    except DegenerateRegionError as exc:
        raise ConfigError(str(exc), "path.spacing_m") from None
    return plans, report


def fly_day(cfg: RunConfig, agents, laps: int, day: int = 0) -> DayFlight:
    """Fly every agent's mission for one day in lockstep."""
    dt = float(cfg.sim["dt_s"])
    traces = []
    for a in agents:
        traces.append(fly_mission(a.route(cfg.spacing_m, laps), cfg.tricopter, dt,
                                  beacon_steps=cfg.sim["beacon_steps"], agent_id=a.agent_id, day=day))
    steps = max((t.steps for t in traces), default=0)
    for a, t in zip(agents, traces):
        extend_beacon(t, steps, dt, a.agent_id, day)
    if traces:
        agent_xy = np.ascontiguousarray(np.stack([t.positions[:, :2] for t in traces], axis=1))
        emitting = np.ascontiguousarray(np.stack([t.emitting for t in traces], axis=1).astype(np.uint8))
    else:
        agent_xy = np.zeros((0, 0, 2))
        emitting = np.zeros((0, 0), dtype=np.uint8)
    events = sorted((e for t in traces for e in t.events), key=lambda e: (e.time_s, e.agent_id))
    finals = {a.agent_id: t.final for a, t in zip(agents, traces)}
    return DayFlight(agent_xy, emitting, events, finals, sum(t.energy_used_j for t in traces))


def hazard_coefficients(cfg: RunConfig, pests: PestPopulation, k: float) -> np.ndarray:
    """Per-pest hazard per step at saturating intensity: k * susceptibility * band * gain * dt."""
    sp = cfg.species
    rf = bool(cfg.sim["rf_on"]) and cfg.emitter.rf_enabled
    band = 1.0 if sp.in_band(cfg.emitter.frequency_hz) else 0.0
    gain = habituation_gain(sp, rf, pests.habituation)
    return np.ascontiguousarray(k * sp.base_susceptibility * band * gain * float(cfg.sim["dt_s"]))


def removal_pass(cfg: RunConfig, pests: PestPopulation, flight: DayFlight, *, k: float,
                 i_ref: float, seed: int, day: int):
    """Per-step Bernoulli removal over one day's flight. Mutates ``pests.present``.

    Returns (exposed mask, removed_step array with -1 for survivors).
    """
    n = len(pests)
    present = np.ascontiguousarray(pests.present.astype(np.uint8))
    exposed = np.zeros(n, dtype=np.uint8)
    removed_step = np.full(n, -1, dtype=np.int64)
    if n and flight.steps:
        coef = hazard_coefficients(cfg, pests, k)
        xy = np.ascontiguousarray(pests.positions)
        rng = np.random.default_rng([seed, _REMOVAL_STREAM, day])
        em = cfg.emitter
        min_dist = cfg.field.cell_size_m / 2.0
        for start in range(0, flight.steps, _CHUNK_STEPS):
            if not present.any():
                break
            stop = min(start + _CHUNK_STEPS, flight.steps)
            u = rng.random((stop - start, n))
            _kernels.removal_sweep(xy, present, exposed, removed_step, coef,
                                   flight.agent_xy[start:stop], flight.emitting[start:stop], u,
                                   em.acoustic_power_w, em.effective_range_m, min_dist,
                                   i_ref, start)
    pests.present = present.astype(bool)
    return exposed.astype(bool), removed_step


def seed_population(cfg: RunConfig, agents, seed: int | None = None) -> PestPopulation:
    """Initial pests per the ``sim.pests`` section."""
    spec = cfg.sim["pests"]
    seed = cfg.sim["seed"] if seed is None else seed
    if spec["positions"] is not None:
        return pests_at(cfg.field, cfg.species, spec["positions"])
    if spec["placement"] == "uniform":
        return seed_pests(cfg.field, cfg.species, spec["count"], seed)
    return seed_pests_near_path(cfg, agents, spec["count"], seed)


def seed_pests_near_path(cfg: RunConfig, agents, count: int, seed: int) -> PestPopulation:
    """Uniform pests restricted to cells within emitter range of some agent's path."""
    field = cfg.field
    radius = cfg.emitter.effective_range_m
    laps = [a.plan(cfg.spacing_m, 1).waypoints for a in agents]
    rng = np.random.default_rng(seed)
    kept = []
    have = 0
    for _ in range(1000):
        if have >= count:
            break
        batch = rng.random((max(count, 64), 2)) * (field.width_m, field.length_m)
        px, py = np.ascontiguousarray(batch[:, 0]), np.ascontiguousarray(batch[:, 1])
        ok = np.zeros(len(batch), dtype=bool)
        for wps in laps:
            ok |= _kernels.polyline_distance(px, py, np.ascontiguousarray(np.asarray(wps, float))) <= radius
        kept.append(batch[ok])
        have += int(ok.sum())
    else:
        raise ConfigError("could not place pests within range of the path", "sim.pests.placement")
    xy = np.concatenate(kept)[:count] if kept else np.zeros((0, 2))
    return PestPopulation(cfg.species, xy, np.ones(len(xy), dtype=bool))


def run(cfg: RunConfig, pests: PestPopulation | None = None, *, exposure: bool = True,
        seed: int | None = None) -> RunResult:
    """Simulate ``sim.days`` days. Identical (config, seed) gives identical results."""
    seed = cfg.sim["seed"] if seed is None else seed
    agents, report = agent_plans(cfg)
    if pests is None:
        pests = seed_population(cfg, agents, seed)
    before = pests.copy()
    pests = pests.copy()
    initial_present = pests.present.copy()
    ef = ExposureField(cfg.field) if exposure else None
    dt = float(cfg.sim["dt_s"])
    k, i_ref = cfg.k, cfg.i_ref
    sp = cfg.species

    active = list(agents)
    cache: dict = {}
    events, per_day, flights = [], [], []
    energy = 0.0
    removed_any = np.full(len(pests), -1, dtype=np.int64)
    step_base = 0
    for d in range(int(cfg.sim["days"])):
        day = int(cfg.sim["start_day"]) + d
        laps = cfg.laps_on_day(d)
        key = (laps, tuple(a.agent_id for a in active))
        if key not in cache:
            cache[key] = fly_day(cfg, active, laps, 0)
        flight = cache[key]
        flights.append(flight)
        for e in flight.events:
            events.append(replace(e, day=day))
        energy += flight.energy_used_j
        if ef is not None and flight.steps:
            ef.accumulate_track(flight.agent_xy, flight.emitting, cfg.emitter, dt)

        start_n = pests.n_present
        exposed, removed_step = removal_pass(cfg, pests, flight, k=k, i_ref=i_ref, seed=seed, day=d)
        newly = removed_step >= 0
        removed_any[newly & (removed_any < 0)] = removed_step[newly & (removed_any < 0)] + step_base
        step_base += flight.steps
        per_day.append((start_n - pests.n_present) / start_n if start_n else 0.0)

        pests.habituation = np.where(
            exposed, np.minimum(1.0, pests.habituation + 1.0 / sp.habituation_days), pests.habituation)
        if cfg.sim["repelled_return"]:
            pests.present = initial_present.copy()
        crashed = {i for i, st in flight.finals.items() if st.mode in (Mode.BEACON, Mode.CRASHED)}
        active = [a for a in active if a.agent_id not in crashed]

    n0 = before.n_present
    if cfg.sim["repelled_return"]:
        eff = float(np.mean(per_day)) if per_day else 0.0
    else:
        eff = (n0 - pests.n_present) / n0 if n0 else 0.0
    cov = coverage_map([a.plan(cfg.spacing_m, 1) for a in agents],
                       cfg.emitter.effective_range_m, cfg.field)[0]
    laps_done = sum(1 for e in events if e.kind == EventKind.LAP_COMPLETE)
    metrics = Metrics(eff, cov, energy, laps_done, per_day, n0, pests.n_present)
    return RunResult(metrics, events, ef, before, pests, agents, report, removed_any, flights)


def pest_path_distance(cfg: RunConfig, agents, positions) -> np.ndarray:
    """Distance from each pest to the nearest point of any agent's path."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    best = np.full(len(pos), np.inf)
    for a in agents:
        wps = np.ascontiguousarray(np.asarray(a.plan(cfg.spacing_m, 1).waypoints, float))
        best = np.minimum(best, _kernels.polyline_distance(
            np.ascontiguousarray(pos[:, 0]), np.ascontiguousarray(pos[:, 1]), wps))
    return best


@dataclass(frozen=True)
class BaselineReport:
    effectiveness: float
    band: tuple[float, float] = (0.92, 0.93)

    @property
    def midpoint(self) -> float:
        return (self.band[0] + self.band[1]) / 2

    @property
    def gap(self) -> float:
        """Positive when the run falls short of the pesticide band midpoint."""
        return self.midpoint - self.effectiveness

    @property
    def within_band(self) -> bool:
        return self.band[0] <= self.effectiveness <= self.band[1]

    def to_dict(self) -> dict:
        return {"effectiveness": self.effectiveness, "pesticide_band": list(self.band),
                "band_midpoint": self.midpoint, "gap_to_midpoint": self.gap,
                "within_band": self.within_band}


def compare_baseline(m) -> BaselineReport:
    eff = m.effectiveness if isinstance(m, Metrics) else float(m)
    return BaselineReport(eff)
