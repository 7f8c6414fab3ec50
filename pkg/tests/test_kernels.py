import os
import subprocess
import sys

import numpy as np
import pytest

from abiot_sim import _kernels


def _track(rng, steps=40, agents=3, size=20.0):
    xy = np.ascontiguousarray(rng.random((steps, agents, 2)) * size)
    em = np.ascontiguousarray((rng.random((steps, agents)) > 0.2).astype(np.uint8))
    return xy, em


def test_accumulate_matches_reference(backend):
    rng = np.random.default_rng(3)
    xy, em = _track(rng)
    cell = 0.5
    dose = np.zeros((40, 40))
    backend.accumulate_exposure(dose, cell, xy, em, 2.0, 15.0, 0.25, 0.5)
    cx = (np.arange(40) + 0.5) * cell
    gx, gy = np.meshgrid(cx, cx)
    want = np.zeros_like(dose)
    for s in range(xy.shape[0]):
        for a in range(xy.shape[1]):
            if em[s, a]:
                d = np.hypot(gx - xy[s, a, 0], gy - xy[s, a, 1])
                want += np.where(d <= 15.0, 2.0 / (4 * np.pi * np.maximum(d, 0.25) ** 2), 0.0) * 0.5
    np.testing.assert_allclose(dose, want, rtol=1e-12)


def test_polyline_distance_matches_reference(backend):
    rng = np.random.default_rng(4)
    px, py = rng.random(200) * 10, rng.random(200) * 10
    wp = np.ascontiguousarray(rng.random((7, 2)) * 10)
    got = backend.polyline_distance(px, py, wp)
    best = np.full(200, np.inf)
    for (ax, ay), (bx, by) in zip(wp[:-1], wp[1:]):
        d = np.array([bx - ax, by - ay])
        t = np.clip(((px - ax) * d[0] + (py - ay) * d[1]) / d.dot(d), 0, 1)
        best = np.minimum(best, np.hypot(px - ax - t * d[0], py - ay - t * d[1]))
    np.testing.assert_allclose(got, best, rtol=1e-12, atol=1e-12)


def _sweep(mod, seed):
    rng = np.random.default_rng(seed)
    xy, em = _track(rng, steps=60)
    n = 150
    pest = np.ascontiguousarray(rng.random((n, 2)) * 20)
    present = np.ones(n, dtype=np.uint8)
    present[::7] = 0
    exposed = np.zeros(n, dtype=np.uint8)
    removed = np.full(n, -1, dtype=np.int64)
    coef = np.ascontiguousarray(rng.random(n) * 0.2)
    u = rng.random((60, n))
    mod.removal_sweep(pest, present, exposed, removed, coef, xy, em, u, 1.0, 6.0, 0.25, 1e-3, 100)
    return present, exposed, removed


@pytest.mark.skipif(_kernels.compiled_backend is None, reason="compiled kernels not built")
@pytest.mark.parametrize("seed", range(5))
def test_removal_backends_agree(seed):
    py = _sweep(_kernels.python_backend, seed)
    cy = _sweep(_kernels.compiled_backend, seed)
    for a, b in zip(py, cy):
        np.testing.assert_array_equal(a, b)
    assert (py[2][py[2] >= 0] >= 100).all()


def test_removal_absent_pests_untouched(backend):
    present, exposed, removed = _sweep(backend, 11)
    assert not present[::7].any()
    assert (removed[::7] == -1).all() and not exposed[::7].any()


def test_pure_python_switch():
    env = dict(os.environ, ABIOT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import abiot_sim; print(abiot_sim.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
