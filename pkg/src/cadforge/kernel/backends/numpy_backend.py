"""Vectorized numpy/scipy implementations of the kernel hot loops."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

_STRUCT6 = ndimage.generate_binary_structure(3, 1)

_POINT_CHUNK = 1 << 16


def point_in_loops(points, verts, offsets):
    """Even-odd membership of 2-D points against a set of closed loops.

    points: (M, 2) float64; verts: (K, 2) float64 loop vertices concatenated;
    offsets: (L+1,) int64 loop boundaries. Returns (M,) bool: parity of
    +x ray crossings over all loop edges.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    verts = np.ascontiguousarray(verts, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.int64)
    m = points.shape[0]
    out = np.zeros(m, dtype=bool)
    if m == 0 or len(offsets) < 2:
        return out

    e1 = []
    e2 = []
    for li in range(len(offsets) - 1):
        lo, hi = offsets[li], offsets[li + 1]
        if hi - lo < 3:
            continue
        loop = verts[lo:hi]
        e1.append(loop)
        e2.append(np.roll(loop, -1, axis=0))
    if not e1:
        return out
    a = np.concatenate(e1)
    b = np.concatenate(e2)
    x1, y1 = a[:, 0], a[:, 1]
    x2, y2 = b[:, 0], b[:, 1]
    dy = y2 - y1
    safe_dy = np.where(dy == 0.0, 1.0, dy)

    for lo in range(0, m, _POINT_CHUNK):
        px = points[lo:lo + _POINT_CHUNK, 0][:, None]
        py = points[lo:lo + _POINT_CHUNK, 1][:, None]
        straddle = (y1[None, :] > py) != (y2[None, :] > py)
        xint = x1[None, :] + (py - y1[None, :]) * (x2 - x1)[None, :] / safe_dy[None, :]
        crossing = straddle & (px < xint)
        out[lo:lo + _POINT_CHUNK] = (crossing.sum(axis=1) & 1).astype(bool)
    return out


def count_components6(occ):
    """Number of 6-connected components in a 3-D occupancy grid."""
    occ = np.asarray(occ)
    if not occ.any():
        return 0
    _, num = ndimage.label(occ, structure=_STRUCT6)
    return int(num)


def iso_first_hit(occ, origin, spacing, starts, direction, tmax, step):
    """March rays through an occupancy grid; first-hit parameter per ray.

    starts: (M, 3) ray origins; direction: unit (3,). Returns (M,) float64
    t of the first occupied sample, inf where the ray misses.
    """
    occ = np.asarray(occ, dtype=bool)
    starts = np.asarray(starts, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    origin = np.asarray(origin, dtype=np.float64)
    m = starts.shape[0]
    out = np.full(m, np.inf)
    res = np.array(occ.shape)
    active = np.arange(m)
    pos = starts.copy()
    t = 0.0
    dstep = direction * step
    while t <= tmax and active.size:
        idx = np.floor((pos - origin) / spacing).astype(np.int64)
        valid = np.all((idx >= 0) & (idx < res), axis=1)
        hit = np.zeros(active.size, dtype=bool)
        if valid.any():
            vi = idx[valid]
            hit[valid] = occ[vi[:, 0], vi[:, 1], vi[:, 2]]
        out[active[hit]] = t
        keep = ~hit
        active = active[keep]
        pos = pos[keep] + dstep
        t += step
    return out


def tri_crossings(tris, ys, zs):
    """+X-ray / triangle crossings on a (ys × zs) ray grid.

    tris: (T, 3, 3) float64 triangles. Returns (ray_ids, xs) where
    ray_id = iy * len(zs) + iz and xs is the crossing x coordinate.
    Triangles parallel to the X axis are skipped; edge hits are excluded
    (strict interior rule) and left to the caller's parity recovery.
    """
    tris = np.asarray(tris, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    zs = np.asarray(zs, dtype=np.float64)
    nz = len(zs)
    ray_ids = []
    xs_out = []
    if len(ys) == 0 or nz == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    y0g, z0g = ys[0], zs[0]
    dyg = ys[1] - ys[0] if len(ys) > 1 else 1.0
    dzg = zs[1] - zs[0] if nz > 1 else 1.0

    for tri in tris:
        (x0, y0, z0), (x1, y1, z1), (x2, y2, z2) = tri
        d = (y1 - y0) * (z2 - z0) - (z1 - z0) * (y2 - y0)
        if d == 0.0:
            continue
        ylo, yhi = min(y0, y1, y2), max(y0, y1, y2)
        zlo, zhi = min(z0, z1, z2), max(z0, z1, z2)
        iy0 = max(0, int(np.ceil((ylo - y0g) / dyg)))
        iy1 = min(len(ys) - 1, int(np.floor((yhi - y0g) / dyg)))
        iz0 = max(0, int(np.ceil((zlo - z0g) / dzg)))
        iz1 = min(nz - 1, int(np.floor((zhi - z0g) / dzg)))
        if iy0 > iy1 or iz0 > iz1:
            continue
        py = ys[iy0:iy1 + 1][:, None]
        pz = zs[iz0:iz1 + 1][None, :]
        s = ((py - y0) * (z2 - z0) - (pz - z0) * (y2 - y0)) / d
        t = ((y1 - y0) * (pz - z0) - (z1 - z0) * (py - y0)) / d
        inside = (s > 0.0) & (t > 0.0) & (s + t < 1.0)
        if not inside.any():
            continue
        iy, iz = np.nonzero(inside)
        x = x0 + s[inside] * (x1 - x0) + t[inside] * (x2 - x0)
        ray_ids.append((iy + iy0) * nz + (iz + iz0))
        xs_out.append(x)

    if not ray_ids:
        return np.empty(0, dtype=np.int64), np.empty(0)
    return np.concatenate(ray_ids), np.concatenate(xs_out)
