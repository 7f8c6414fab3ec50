# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Semantics mirror ``_pykernels`` exactly."""

from libc.math cimport sqrt, expm1, floor, ceil, M_PI

import numpy as np


cdef inline double _emit(double d2, double range2, double min2, double power) noexcept nogil:
    if d2 > range2:
        return 0.0
    if d2 < min2:
        d2 = min2
    return power / (4.0 * M_PI * d2)


def accumulate_exposure(double[:, ::1] dose, double cell, const double[:, :, ::1] agent_xy,
                        const unsigned char[:, ::1] emitting, double power, double range_m,
                        double min_dist, double dt):
    cdef Py_ssize_t n_steps = agent_xy.shape[0], n_agents = agent_xy.shape[1]
    cdef Py_ssize_t ny = dose.shape[0], nx = dose.shape[1]
    cdef Py_ssize_t s, a, i, j, i0, i1, j0, j1
    cdef double x, y, cx, cy, dx, dy
    cdef double range2 = range_m * range_m, min2 = min_dist * min_dist
    with nogil:
        for s in range(n_steps):
            for a in range(n_agents):
                if not emitting[s, a]:
                    continue
                x = agent_xy[s, a, 0]
                y = agent_xy[s, a, 1]
                j0 = <Py_ssize_t>floor((x - range_m) / cell - 0.5)
                j1 = <Py_ssize_t>ceil((x + range_m) / cell - 0.5)
                i0 = <Py_ssize_t>floor((y - range_m) / cell - 0.5)
                i1 = <Py_ssize_t>ceil((y + range_m) / cell - 0.5)
                if j0 < 0: j0 = 0
                if i0 < 0: i0 = 0
                if j1 > nx - 1: j1 = nx - 1
                if i1 > ny - 1: i1 = ny - 1
                for i in range(i0, i1 + 1):
                    cy = (i + 0.5) * cell
                    dy = cy - y
                    for j in range(j0, j1 + 1):
                        cx = (j + 0.5) * cell
                        dx = cx - x
                        dose[i, j] += _emit(dx * dx + dy * dy, range2, min2, power) * dt


def removal_sweep(const double[:, ::1] pest_xy, unsigned char[::1] present,
                  unsigned char[::1] exposed, long long[::1] removed_step,
                  const double[::1] coef, const double[:, :, ::1] agent_xy,
                  const unsigned char[:, ::1] emitting, const double[:, ::1] u,
                  double power, double range_m, double min_dist, double i_ref,
                  long long step_offset):
    cdef Py_ssize_t n_steps = agent_xy.shape[0], n_agents = agent_xy.shape[1]
    cdef Py_ssize_t n = pest_xy.shape[0]
    cdef Py_ssize_t s, a, i
    cdef double px, py, dx, dy, inten, ratio, rate, p
    cdef double range2 = range_m * range_m, min2 = min_dist * min_dist
    cdef long long removed = 0
    with nogil:
        for s in range(n_steps):
            for i in range(n):
                if not present[i]:
                    continue
                px = pest_xy[i, 0]
                py = pest_xy[i, 1]
                inten = 0.0
                for a in range(n_agents):
                    if emitting[s, a]:
                        dx = agent_xy[s, a, 0] - px
                        dy = agent_xy[s, a, 1] - py
                        inten = inten + _emit(dx * dx + dy * dy, range2, min2, power)
                if inten <= 0.0:
                    continue
                exposed[i] = 1
                ratio = inten / i_ref
                if ratio > 1.0:
                    ratio = 1.0
                rate = coef[i] * ratio
                if rate <= 0.0:
                    continue
                p = -expm1(-rate)
                if u[s, i] < p:
                    present[i] = 0
                    removed_step[i] = s + step_offset
                    removed += 1
    return removed


def polyline_distance(const double[::1] px, const double[::1] py, const double[:, ::1] wp):
    cdef Py_ssize_t m = px.shape[0], w = wp.shape[0]
    cdef Py_ssize_t i, k
    cdef double best, d2, ax, ay, bx, by, vx, vy, l2, t, qx, qy
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    if w == 0:
        out.fill(np.inf)
        return out
    with nogil:
        for i in range(m):
            best = -1.0
            for k in range(w):
                ax = wp[k, 0]
                ay = wp[k, 1]
                if k + 1 < w:
                    bx = wp[k + 1, 0]
                    by = wp[k + 1, 1]
                else:
                    if w > 1:
                        break
                    bx = ax
                    by = ay
                vx = bx - ax
                vy = by - ay
                l2 = vx * vx + vy * vy
                if l2 > 0.0:
                    t = ((px[i] - ax) * vx + (py[i] - ay) * vy) / l2
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                else:
                    t = 0.0
                qx = px[i] - (ax + t * vx)
                qy = py[i] - (ay + t * vy)
                d2 = qx * qx + qy * qy
                if best < 0.0 or d2 < best:
                    best = d2
            res[i] = sqrt(best)
    return out
