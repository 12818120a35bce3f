# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the voxel pipeline hot loops.

Mirrors numpy_backend's API; selected automatically at import when built.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def point_in_loops(points, verts, offsets):
    pts = np.ascontiguousarray(points, dtype=np.float64)
    vts = np.ascontiguousarray(verts, dtype=np.float64)
    offs = np.ascontiguousarray(offsets, dtype=np.int64)
    out = np.zeros(pts.shape[0], dtype=np.uint8)
    if pts.shape[0] and len(offs) >= 2:
        _point_in_loops(pts, vts, offs, out)
    return out.astype(bool)


cdef void _point_in_loops(
    double[:, ::1] pts, double[:, ::1] verts, long long[::1] offsets,
    unsigned char[::1] out,
) noexcept nogil:
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t nloops = offsets.shape[0] - 1
    cdef Py_ssize_t i, li, j, lo, hi
    cdef double px, py, x1, y1, x2, y2, xint
    cdef int crossings
    for i in range(m):
        px = pts[i, 0]
        py = pts[i, 1]
        crossings = 0
        for li in range(nloops):
            lo = offsets[li]
            hi = offsets[li + 1]
            if hi - lo < 3:
                continue
            for j in range(lo, hi):
                x1 = verts[j, 0]
                y1 = verts[j, 1]
                if j + 1 < hi:
                    x2 = verts[j + 1, 0]
                    y2 = verts[j + 1, 1]
                else:
                    x2 = verts[lo, 0]
                    y2 = verts[lo, 1]
                if (y1 > py) != (y2 > py):
                    xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
                    if px < xint:
                        crossings += 1
        out[i] = crossings & 1


def count_components6(occ):
    grid = np.ascontiguousarray(occ, dtype=np.uint8)
    if not grid.any():
        return 0
    return _count_components6(grid)


cdef int _count_components6(unsigned char[:, :, ::1] occ):
    cdef Py_ssize_t nx = occ.shape[0], ny = occ.shape[1], nz = occ.shape[2]
    cdef cnp.ndarray[cnp.uint8_t, ndim=3] visited_arr = np.zeros((nx, ny, nz), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] visited = visited_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack_arr = np.empty(nx * ny * nz, dtype=np.int64)
    cdef long long[::1] stack = stack_arr
    cdef Py_ssize_t top, x, y, z, sx, sy, sz
    cdef long long code
    cdef int count = 0
    for sx in range(nx):
        for sy in range(ny):
            for sz in range(nz):
                if not occ[sx, sy, sz] or visited[sx, sy, sz]:
                    continue
                count += 1
                top = 0
                stack[top] = (sx * ny + sy) * nz + sz
                top += 1
                visited[sx, sy, sz] = 1
                while top > 0:
                    top -= 1
                    code = stack[top]
                    z = code % nz
                    y = (code // nz) % ny
                    x = code // (ny * nz)
                    if x > 0 and occ[x - 1, y, z] and not visited[x - 1, y, z]:
                        visited[x - 1, y, z] = 1
                        stack[top] = code - ny * nz; top += 1
                    if x + 1 < nx and occ[x + 1, y, z] and not visited[x + 1, y, z]:
                        visited[x + 1, y, z] = 1
                        stack[top] = code + ny * nz; top += 1
                    if y > 0 and occ[x, y - 1, z] and not visited[x, y - 1, z]:
                        visited[x, y - 1, z] = 1
                        stack[top] = code - nz; top += 1
                    if y + 1 < ny and occ[x, y + 1, z] and not visited[x, y + 1, z]:
                        visited[x, y + 1, z] = 1
                        stack[top] = code + nz; top += 1
                    if z > 0 and occ[x, y, z - 1] and not visited[x, y, z - 1]:
                        visited[x, y, z - 1] = 1
                        stack[top] = code - 1; top += 1
                    if z + 1 < nz and occ[x, y, z + 1] and not visited[x, y, z + 1]:
                        visited[x, y, z + 1] = 1
                        stack[top] = code + 1; top += 1
    return count


def iso_first_hit(occ, origin, spacing, starts, direction, tmax, step):
    grid = np.ascontiguousarray(occ, dtype=np.uint8)
    st = np.ascontiguousarray(starts, dtype=np.float64)
    org = np.ascontiguousarray(origin, dtype=np.float64)
    d = np.ascontiguousarray(direction, dtype=np.float64)
    out = np.full(st.shape[0], np.inf)
    _iso_first_hit(grid, org, float(spacing), st, d, float(tmax), float(step), out)
    return out


cdef void _iso_first_hit(
    unsigned char[:, :, ::1] occ, double[::1] origin, double spacing,
    double[:, ::1] starts, double[::1] direction, double tmax, double step,
    double[::1] out,
) noexcept nogil:
    cdef Py_ssize_t m = starts.shape[0]
    cdef Py_ssize_t nx = occ.shape[0], ny = occ.shape[1], nz = occ.shape[2]
    cdef Py_ssize_t i
    cdef double t, px, py, pz
    cdef double dx = direction[0] * step, dy = direction[1] * step, dz = direction[2] * step
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double inv = 1.0 / spacing
    cdef long ix, iy, iz
    for i in range(m):
        px = starts[i, 0]
        py = starts[i, 1]
        pz = starts[i, 2]
        t = 0.0
        while t <= tmax:
            ix = <long>((px - ox) * inv)
            if 0 <= ix < nx and px >= ox:
                iy = <long>((py - oy) * inv)
                if 0 <= iy < ny and py >= oy:
                    iz = <long>((pz - oz) * inv)
                    if 0 <= iz < nz and pz >= oz:
                        if occ[ix, iy, iz]:
                            out[i] = t
                            break
            px += dx
            py += dy
            pz += dz
            t += step
    return


def tri_crossings(tris, ys, zs):
    tri = np.ascontiguousarray(tris, dtype=np.float64)
    yy = np.ascontiguousarray(ys, dtype=np.float64)
    zz = np.ascontiguousarray(zs, dtype=np.float64)
    if tri.shape[0] == 0 or yy.shape[0] == 0 or zz.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    cap = max(1024, 8 * tri.shape[0])
    ids = np.empty(cap, dtype=np.int64)
    xs = np.empty(cap, dtype=np.float64)
    n = 0
    while True:
        n = _tri_crossings(tri, yy, zz, ids, xs)
        if n >= 0:
            break
        cap *= 2
        ids = np.empty(cap, dtype=np.int64)
        xs = np.empty(cap, dtype=np.float64)
    return ids[:n].copy(), xs[:n].copy()


cdef long long _tri_crossings(
    double[:, :, ::1] tris, double[::1] ys, double[::1] zs,
    long long[::1] out_ids, double[::1] out_xs,
) noexcept nogil:
    cdef Py_ssize_t ntri = tris.shape[0]
    cdef Py_ssize_t ny = ys.shape[0], nz = zs.shape[0]
    cdef Py_ssize_t cap = out_ids.shape[0]
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t ti, iy, iz, iy0, iy1, iz0, iz1
    cdef double x0, y0, z0, x1, y1, z1, x2, y2, z2
    cdef double d, ylo, yhi, zlo, zhi, py, pz, s, t
    cdef double gy0 = ys[0], gz0 = zs[0]
    cdef double dyg = ys[1] - ys[0] if ny > 1 else 1.0
    cdef double dzg = zs[1] - zs[0] if nz > 1 else 1.0
    for ti in range(ntri):
        x0 = tris[ti, 0, 0]; y0 = tris[ti, 0, 1]; z0 = tris[ti, 0, 2]
        x1 = tris[ti, 1, 0]; y1 = tris[ti, 1, 1]; z1 = tris[ti, 1, 2]
        x2 = tris[ti, 2, 0]; y2 = tris[ti, 2, 1]; z2 = tris[ti, 2, 2]
        d = (y1 - y0) * (z2 - z0) - (z1 - z0) * (y2 - y0)
        if d == 0.0:
            continue
        ylo = min3(y0, y1, y2); yhi = max3(y0, y1, y2)
        zlo = min3(z0, z1, z2); zhi = max3(z0, z1, z2)
        iy0 = <Py_ssize_t>((ylo - gy0) / dyg) - 1
        iy1 = <Py_ssize_t>((yhi - gy0) / dyg) + 1
        iz0 = <Py_ssize_t>((zlo - gz0) / dzg) - 1
        iz1 = <Py_ssize_t>((zhi - gz0) / dzg) + 1
        if iy0 < 0: iy0 = 0
        if iz0 < 0: iz0 = 0
        if iy1 >= ny: iy1 = ny - 1
        if iz1 >= nz: iz1 = nz - 1
        for iy in range(iy0, iy1 + 1):
            py = ys[iy]
            if py <= ylo or py >= yhi:
                continue
            for iz in range(iz0, iz1 + 1):
                pz = zs[iz]
                if pz <= zlo or pz >= zhi:
                    continue
                s = ((py - y0) * (z2 - z0) - (pz - z0) * (y2 - y0)) / d
                t = ((y1 - y0) * (pz - z0) - (z1 - z0) * (py - y0)) / d
                if s > 0.0 and t > 0.0 and s + t < 1.0:
                    if count >= cap:
                        return -1
                    out_ids[count] = iy * nz + iz
                    out_xs[count] = x0 + s * (x1 - x0) + t * (x2 - x0)
                    count += 1
    return count


cdef inline double min3(double a, double b, double c) noexcept nogil:
    cdef double m = a
    if b < m: m = b
    if c < m: m = c
    return m


cdef inline double max3(double a, double b, double c) noexcept nogil:
    cdef double m = a
    if b > m: m = b
    if c > m: m = c
    return m
