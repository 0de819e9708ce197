"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable, and as the
reference the extension is tested against.
"""

import numpy as np


def shapley_from_values(values, n):
    """Exact Shapley values from a table of coalition values indexed by bitmask.

    ``values[mask]`` is v(S) for the coalition whose members are the set bits
    of ``mask``; the table has length ``2**n``.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    size = 1 << n
    if values.shape != (size,):
        raise ValueError(f"value table must have length 2**{n}")
    masks = np.arange(size, dtype=np.int64)
    popcount = np.zeros(size, dtype=np.int64)
    for i in range(n):
        popcount += (masks >> i) & 1
    weights = np.empty(max(n, 1))
    for k in range(n):
        kk = min(k, n - 1 - k)
        w = 1.0 / n
        for j in range(1, kk + 1):
            w *= j / (n - kk + j - 1)
        weights[k] = w
    out = np.empty(n)
    for i in range(n):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        terms = weights[popcount[without]] * (values[without | bit] - values[without])
        # fixed summation order: ascending mask
        out[i] = np.add.reduce(terms) if terms.size else 0.0
    return out


def points_in_convex_polygon(points, hull, tol):
    """Membership of 2-D ``points`` in the convex polygon ``hull``.

    ``hull`` lists vertices counter-clockwise without repeating the first.
    A point is inside when its signed distance to every edge line is at least
    ``-tol``. Hulls of one or two vertices are treated as a point or segment
    of thickness ``tol``.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    hull = np.asarray(hull, dtype=np.float64).reshape(-1, 2)
    k = hull.shape[0]
    if k == 0:
        return np.zeros(len(pts), dtype=bool)
    if k == 1:
        return np.hypot(*(pts - hull[0]).T) <= tol
    if k == 2:
        a, b = hull
        ab = b - a
        L2 = ab @ ab
        if L2 == 0.0:
            return np.hypot(*(pts - a).T) <= tol
        t = np.clip(((pts - a) @ ab) / L2, 0.0, 1.0)
        proj = a + t[:, None] * ab
        return np.hypot(*(pts - proj).T) <= tol
    inside = np.ones(len(pts), dtype=bool)
    for j in range(k):
        a = hull[j]
        b = hull[(j + 1) % k]
        e = b - a
        length = np.hypot(e[0], e[1])
        cross = e[0] * (pts[:, 1] - a[1]) - e[1] * (pts[:, 0] - a[0])
        inside &= cross / length >= -tol
    return inside


def min_sq_distances(queries, cloud):
    """Squared Euclidean distance from each query row to its nearest cloud row."""
    q = np.asarray(queries, dtype=np.float64)
    c = np.asarray(cloud, dtype=np.float64)
    if q.ndim != 2 or c.ndim != 2 or q.shape[1] != c.shape[1]:
        raise ValueError("queries and cloud must be 2-D with equal column counts")
    out = np.empty(len(q))
    for start in range(0, len(q), 256):
        block = q[start:start + 256]
        d2 = ((block[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)
        out[start:start + 256] = d2.min(axis=1) if len(c) else np.inf
    return out
