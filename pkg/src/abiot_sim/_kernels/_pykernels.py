"""Pure numpy versions of the hot loops, used when the extension is not built."""

import math

import numpy as np


def _emit(d2, range2, min2, power):
    d2c = np.maximum(d2, min2)
    return np.where(d2 > range2, 0.0, power / (4.0 * math.pi * d2c))


def accumulate_exposure(dose, cell, agent_xy, emitting, power, range_m, min_dist, dt):
    ny, nx = dose.shape
    range2, min2 = range_m * range_m, min_dist * min_dist
    for s in range(agent_xy.shape[0]):
        for a in range(agent_xy.shape[1]):
            if not emitting[s, a]:
                continue
            x, y = agent_xy[s, a]
            j0 = max(int(math.floor((x - range_m) / cell - 0.5)), 0)
            j1 = min(int(math.ceil((x + range_m) / cell - 0.5)), nx - 1)
            i0 = max(int(math.floor((y - range_m) / cell - 0.5)), 0)
            i1 = min(int(math.ceil((y + range_m) / cell - 0.5)), ny - 1)
            if j1 < j0 or i1 < i0:
                continue
            dx = (np.arange(j0, j1 + 1) + 0.5) * cell - x
            dy = (np.arange(i0, i1 + 1) + 0.5) * cell - y
            d2 = dx[None, :] * dx[None, :] + dy[:, None] * dy[:, None]
            dose[i0:i1 + 1, j0:j1 + 1] += _emit(d2, range2, min2, power) * dt


def removal_sweep(pest_xy, present, exposed, removed_step, coef, agent_xy, emitting, u,
                  power, range_m, min_dist, i_ref, step_offset):
    idx = np.flatnonzero(present)
    if idx.size == 0 or agent_xy.shape[0] == 0:
        return 0
    range2, min2 = range_m * range_m, min_dist * min_dist
    px = pest_xy[idx, 0][None, :]
    py = pest_xy[idx, 1][None, :]
    inten = np.zeros((agent_xy.shape[0], idx.size))
    for a in range(agent_xy.shape[1]):
        dx = agent_xy[:, a, 0][:, None] - px
        dy = agent_xy[:, a, 1][:, None] - py
        term = _emit(dx * dx + dy * dy, range2, min2, power)
        inten = inten + np.where(emitting[:, a].astype(bool)[:, None], term, 0.0)
    lit = inten > 0.0
    rate = coef[idx][None, :] * np.minimum(inten / i_ref, 1.0)
    with np.errstate(invalid="ignore"):
        p = -np.expm1(-rate)
    hit = lit & (rate > 0.0) & (u[:, idx] < p)
    exposed[idx[lit.any(axis=0)]] = 1
    gone = hit.any(axis=0)
    first = hit.argmax(axis=0)
    present[idx[gone]] = 0
    removed_step[idx[gone]] = first[gone] + step_offset
    return int(gone.sum())


def polyline_distance(px, py, wp):
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    wp = np.asarray(wp, dtype=float).reshape(-1, 2)
    if len(wp) == 0:
        return np.full(px.shape, np.inf)
    if len(wp) == 1:
        return np.hypot(px - wp[0, 0], py - wp[0, 1])
    best = np.full(px.shape, np.inf)
    for (ax, ay), (bx, by) in zip(wp[:-1], wp[1:]):
        vx, vy = bx - ax, by - ay
        l2 = vx * vx + vy * vy
        if l2 > 0.0:
            t = np.clip(((px - ax) * vx + (py - ay) * vy) / l2, 0.0, 1.0)
        else:
            t = np.zeros_like(px)
        qx = px - (ax + t * vx)
        qy = py - (ay + t * vy)
        best = np.minimum(best, qx * qx + qy * qy)
    return np.sqrt(best)
