# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_kernels_py``."""

import numpy as np
from libc.math cimport sqrt, hypot, INFINITY


def shapley_from_values(values, int n):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    if v.shape[0] != size:
        raise ValueError(f"value table must have length 2**{n}")
    cdef double[::1] w = np.empty(max(n, 1))
    cdef int k, kk, j, i
    cdef double acc
    for k in range(n):
        kk = min(k, n - 1 - k)
        acc = 1.0 / n
        for j in range(1, kk + 1):
            acc *= (<double>j) / (n - kk + j - 1)
        w[k] = acc
    out = np.zeros(n)
    cdef double[::1] o = out
    cdef Py_ssize_t mask, bit
    cdef int pc
    cdef unsigned long long m
    for i in range(n):
        bit = (<Py_ssize_t>1) << i
        acc = 0.0
        for mask in range(size):
            if mask & bit:
                continue
            m = <unsigned long long>mask
            pc = 0
            while m:
                m &= m - 1
                pc += 1
            acc += w[pc] * (v[mask | bit] - v[mask])
        o[i] = acc
    return out


def points_in_convex_polygon(points, hull, double tol):
    cdef double[:, ::1] p = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 2))
    cdef double[:, ::1] h = np.ascontiguousarray(np.asarray(hull, dtype=np.float64).reshape(-1, 2))
    cdef Py_ssize_t m = p.shape[0], k = h.shape[0], i, j
    out = np.ones(m, dtype=bool)
    cdef unsigned char[::1] o = out.view(np.uint8)
    cdef double ax, ay, ex, ey, length, cross, L2, t, px, py
    if k == 0:
        out[:] = False
        return out
    if k <= 2:
        ax = h[0, 0]; ay = h[0, 1]
        ex = h[k - 1, 0] - ax; ey = h[k - 1, 1] - ay
        L2 = ex * ex + ey * ey
        for i in range(m):
            t = 0.0
            if L2 > 0.0:
                t = ((p[i, 0] - ax) * ex + (p[i, 1] - ay) * ey) / L2
                t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
            px = ax + t * ex; py = ay + t * ey
            o[i] = hypot(p[i, 0] - px, p[i, 1] - py) <= tol
        return out
    # unit edge directions, so the cross product is a signed distance
    cdef double[:, ::1] e = np.empty((k, 2))
    for j in range(k):
        ex = h[(j + 1) % k, 0] - h[j, 0]
        ey = h[(j + 1) % k, 1] - h[j, 1]
        length = hypot(ex, ey)
        e[j, 0] = ex / length
        e[j, 1] = ey / length
    for i in range(m):
        px = p[i, 0]; py = p[i, 1]
        for j in range(k):
            cross = e[j, 0] * (py - h[j, 1]) - e[j, 1] * (px - h[j, 0])
            if cross < -tol:
                o[i] = 0
                break
    return out


def min_sq_distances(queries, cloud):
    cdef double[:, ::1] q = np.ascontiguousarray(queries, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(cloud, dtype=np.float64)
    if q.shape[1] != c.shape[1]:
        raise ValueError("queries and cloud must be 2-D with equal column counts")
    cdef Py_ssize_t m = q.shape[0], N = c.shape[0], d = q.shape[1], i, j, l
    out = np.empty(m)
    cdef double[::1] o = out
    cdef double best, s, diff
    for i in range(m):
        best = INFINITY
        for j in range(N):
            s = 0.0
            for l in range(d):
                diff = q[i, l] - c[j, l]
                s += diff * diff
                if s >= best:
                    break
            if s < best:
                best = s
        o[i] = best
    return out
