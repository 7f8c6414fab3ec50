"""Time the compiled and pure-Python kernels on a default-sized workload.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from abiot_sim import _kernels, default_config
from abiot_sim.sim import agent_plans, fly_day


def workload():
    cfg = default_config(sim__mode="coordinated", sim__n_agents=4)
    flight = fly_day(cfg, agent_plans(cfg)[0], 6)
    rng = np.random.default_rng(0)
    n = 200
    pests = np.ascontiguousarray(rng.random((n, 2)) * 30.0)
    u = rng.random((flight.steps, n))
    return cfg, flight, pests, u


def cases(mod, cfg, flight, pests, u):
    n = len(pests)
    em = cfg.emitter

    def exposure():
        dose = np.zeros((cfg.field.ny, cfg.field.nx))
        mod.accumulate_exposure(dose, cfg.field.cell_size_m, flight.agent_xy, flight.emitting,
                                em.acoustic_power_w, em.effective_range_m, 0.25, 0.5)

    def removal():
        mod.removal_sweep(pests, np.ones(n, np.uint8), np.zeros(n, np.uint8),
                          np.full(n, -1, np.int64), np.full(n, 1e-3), flight.agent_xy,
                          flight.emitting, u, em.acoustic_power_w, em.effective_range_m,
                          0.25, cfg.i_ref, 0)

    wps = np.ascontiguousarray(np.asarray(agent_plans(cfg)[0][0].plan(2.0, 1).waypoints, float))

    def distance():
        mod.polyline_distance(np.ascontiguousarray(pests[:, 0]), np.ascontiguousarray(pests[:, 1]), wps)

    return {"accumulate_exposure": exposure, "removal_sweep": removal, "polyline_distance": distance}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    data = workload()
    print(f"workload: {data[1].steps} steps x {data[1].agent_xy.shape[1]} agents, {len(data[2])} pests")
    backends = {"python": _kernels.python_backend}
    if _kernels.compiled_backend is not None:
        backends["cython"] = _kernels.compiled_backend
    else:
        print("compiled kernels unavailable; timing the fallback only")
    timings = {}
    for name, mod in backends.items():
        for kernel, fn in cases(mod, *data).items():
            timings[kernel, name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    print(f"{'kernel':<22}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for kernel in ("accumulate_exposure", "removal_sweep", "polyline_distance"):
        py = timings[kernel, "python"]
        cy = timings.get((kernel, "cython"))
        extra = f"{cy:>12.4f}{py / cy:>9.1f}x" if cy else f"{'-':>12}{'-':>10}"
        print(f"{kernel:<22}{py:>12.4f}{extra}")


if __name__ == "__main__":
    main()
