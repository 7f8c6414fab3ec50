"""Field-trial reproductions: calibration search, habituation and parameter sweeps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .config import RunConfig
from .errors import CalibrationFailure
from .sim import agent_plans, fly_day, removal_pass, run, seed_population

TARGETS = {"standalone": 0.895, "coordinated": 0.83, "system": 0.865}
TOLERANCE = 0.03
COORDINATED_AGENTS = 4

# log-spaced search grid; the refine pass subdivides around the coarse optimum
K_GRID = tuple(float(f"{v:.6g}") for v in np.geomspace(1e-3, 0.05, 10))
I_REF_GRID = tuple(float(f"{v:.6g}") for v in np.geomspace(1e-4, 1e-1, 10))
_REFINE_STEPS = 3


def scenario_configs(cfg: RunConfig) -> dict:
    """The three reported trial conditions, derived from one base config.

    standalone: one agent, pests within emitter range of its path.
    coordinated: four agents over the same field, same pest rule.
    system: one agent, pests anywhere in the field.
    """
    common = [("sim.days", 1), ("sim.repelled_return", False), ("sim.laps_per_day", None),
              ("sim.pests.positions", None)]
    return {
        "standalone": cfg.with_overrides(common + [("sim.mode", "standalone"),
                                                   ("sim.pests.placement", "near_path")]),
        "coordinated": cfg.with_overrides(common + [("sim.mode", "coordinated"),
                                                    ("sim.n_agents", COORDINATED_AGENTS),
                                                    ("sim.pests.placement", "near_path")]),
        "system": cfg.with_overrides(common + [("sim.mode", "standalone"),
                                               ("sim.pests.placement", "uniform")]),
    }


class Scenario:
    """One trial condition with its flight and per-seed pests precomputed.

    The flight does not depend on the repellence constants or the seed, so a
    calibration candidate only re-runs the removal pass.
    """

    def __init__(self, cfg: RunConfig, seeds):
        self.cfg = cfg
        self.seeds = list(seeds)
        agents, _ = agent_plans(cfg)
        self.flight = fly_day(cfg, agents, cfg.laps_on_day(0), 0)
        self.pests = {s: seed_population(cfg, agents, s) for s in self.seeds}

    def effectiveness(self, k: float, i_ref: float) -> list[float]:
        out = []
        for s in self.seeds:
            pests = self.pests[s].copy()
            n0 = pests.n_present
            removal_pass(self.cfg, pests, self.flight, k=k, i_ref=i_ref, seed=s, day=0)
            out.append((n0 - pests.n_present) / n0)
        return out

    def mean(self, k: float, i_ref: float) -> float:
        return float(np.mean(self.effectiveness(k, i_ref)))


def mean_effectiveness(cfg: RunConfig, seeds) -> float:
    """Mean effectiveness of full runs over ``seeds``."""
    return float(np.mean([run(cfg, seed=s, exposure=False).metrics.effectiveness for s in seeds]))


@dataclass
class CalibrationResult:
    k: float
    i_ref: float
    ok: bool
    means: dict
    targets: dict
    table: list = dc_field(default_factory=list)
    monotone_in_k: bool = True
    unreachable: list = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k, "i_ref": self.i_ref, "ok": self.ok,
            "tolerance": TOLERANCE, "targets": self.targets, "means": self.means,
            "monotone_in_k": self.monotone_in_k, "unreachable_targets": self.unreachable,
            "candidates": self.table,
        }


def calibrate(cfg: RunConfig, targets: dict | None = None, seeds=range(20), *,
              k_grid=K_GRID, i_ref_grid=I_REF_GRID, refine: bool = True,
              raise_on_failure: bool = False) -> CalibrationResult:
    """Grid-search (k, i_ref) to minimise squared error of seed-mean effectiveness.

    ``ok`` requires every targeted mean within TOLERANCE of its target. A
    target of 1.0 can never be met in expectation (every per-step removal
    probability is below 1), so it is reported unreachable even if a
    finite sample happens to remove every pest.
    """
    targets = dict(TARGETS if targets is None else targets)
    for name, value in targets.items():
        if name not in TARGETS:
            raise ValueError(f"unknown calibration target {name!r}")
        if not 0 < value <= 1:
            raise ValueError(f"target {name} must be in (0, 1], got {value}")
    configs = scenario_configs(cfg)
    scenarios = {name: Scenario(configs[name], seeds) for name in targets}
    table: list[dict] = []
    seen: dict = {}
    monotone = True

    def evaluate(k, i_ref):
        key = (round(k, 15), round(i_ref, 15))
        if key not in seen:
            means = {name: sc.mean(k, i_ref) for name, sc in scenarios.items()}
            sse = sum((means[n] - targets[n]) ** 2 for n in targets)
            row = {"k": k, "i_ref": i_ref, **{n: round(means[n], 6) for n in means},
                   "sse": round(sse, 8)}
            table.append(row)
            seen[key] = row
        return seen[key]

    def sweep(ks, irefs):
        nonlocal monotone
        for i_ref in irefs:
            prev = None
            for k in sorted(ks):
                row = evaluate(k, i_ref)
                if prev is not None and any(row[n] < prev[n] for n in targets):
                    monotone = False
                prev = row

    sweep(k_grid, i_ref_grid)
    best = min(table, key=lambda r: (r["sse"], r["k"], r["i_ref"]))
    if refine:
        kg = np.asarray(k_grid)
        ig = np.asarray(i_ref_grid)
        k_step = float(kg[1] / kg[0]) if len(kg) > 1 else 2.0
        i_step = float(ig[1] / ig[0]) if len(ig) > 1 else 2.0
        ks = np.geomspace(best["k"] / k_step, best["k"] * k_step, 2 * _REFINE_STEPS + 1)
        irefs = np.geomspace(best["i_ref"] / i_step, best["i_ref"] * i_step, 2 * _REFINE_STEPS + 1)
        sweep([float(f"{v:.6g}") for v in ks], [float(f"{v:.6g}") for v in irefs])
        best = min(table, key=lambda r: (r["sse"], r["k"], r["i_ref"]))

    means = {n: best[n] for n in targets}
    unreachable = sorted(n for n, v in targets.items() if v >= 1.0)
    ok = not unreachable and all(abs(means[n] - targets[n]) <= TOLERANCE for n in targets)
    result = CalibrationResult(best["k"], best["i_ref"], ok, means, targets, table, monotone,
                               unreachable)
    if not ok and raise_on_failure:
        raise CalibrationFailure(result)
    return result


@dataclass
class HabituationSeries:
    ultrasonic_only: list
    ultrasonic_rf: list

    @staticmethod
    def window_mean(series, first_day: int, last_day: int) -> float:
        """Mean over 1-based days ``first_day..last_day`` inclusive."""
        return float(np.mean(series[first_day - 1:last_day]))


def habituation_experiment(cfg: RunConfig, days: int = 20) -> HabituationSeries:
    """Daily effectiveness with and without RF; repelled pests return overnight.

    Both variants share the seed and the pest field, so only the RF switch differs.
    """
    base = [("sim.days", days), ("sim.repelled_return", True), ("sim.laps_per_day", None)]
    off = run(cfg.with_overrides(base + [("sim.rf_on", False)]), exposure=False)
    on = run(cfg.with_overrides(base + [("sim.rf_on", True), ("emitter.rf_enabled", True)]),
             exposure=False)
    return HabituationSeries(off.metrics.per_day_effectiveness, on.metrics.per_day_effectiveness)


def sweep_threads() -> int:
    value = os.environ.get("ABIOT_SIM_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def parameter_sweep(cfg: RunConfig, parameter: str, values, seeds, threads: int | None = None):
    """One Metrics per (value, seed), ordered by value then seed whatever the thread count."""
    jobs = [(v, s) for v in values for s in seeds]

    def one(job):
        value, seed = job
        c = cfg.with_overrides([(parameter, value), ("sim.seed", seed)])
        return value, seed, run(c, exposure=False).metrics

    threads = threads or sweep_threads()
    if threads == 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, jobs))
