#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Run after `pip install -e . --no-build-isolation` (which builds the
extension); without it only the numpy column appears.
"""

import time

import numpy as np

from cadforge.kernel.backends import numpy_backend

try:
    from cadforge.kernel.backends import _core
except ImportError:
    _core = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(0)

    n_loops = 24
    verts = []
    offsets = [0]
    for i in range(n_loops):
        ang = np.linspace(0, 2 * np.pi, 14, endpoint=False)
        cx, cy = rng.uniform(-80, 80, 2)
        verts.append(np.stack([cx + 9 * np.cos(ang), cy + 9 * np.sin(ang)], axis=1))
        offsets.append(offsets[-1] + len(ang))
    verts = np.concatenate(verts)
    offsets = np.array(offsets, dtype=np.int64)
    points = rng.uniform(-100, 100, size=(250_000, 2))
    yield "point_in_loops (250k pts, 24 loops)", (points, verts, offsets), "point_in_loops"

    occ = np.zeros((128, 128, 128), dtype=np.uint8)
    for _ in range(40):
        c = rng.integers(10, 118, 3)
        r = rng.integers(4, 12)
        x, y, z = np.ogrid[:128, :128, :128]
        occ |= ((x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2 <= r * r).astype(np.uint8)
    yield "count_components6 (128^3, blobs)", (occ,), "count_components6"

    origin = np.array([-110.0, -110.0, -110.0])
    spacing = 220.0 / 128
    d = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    half = 100 * np.sqrt(3.0)
    us = np.linspace(-half, half, 238)
    grid_u, grid_v = np.meshgrid(us, us)
    right = np.array([1, -1, 0]) / np.sqrt(2.0)
    up = np.array([-1, -1, 2]) / np.sqrt(6.0)
    starts = (grid_u[..., None] * right + grid_v[..., None] * up - half * d).reshape(-1, 3)
    yield "iso_first_hit (238^2 rays)", (occ, origin, spacing, starts, d, 2 * half, spacing / 2), "iso_first_hit"

    theta = rng.uniform(0, np.pi, 4000)
    phi = rng.uniform(0, 2 * np.pi, 4000)
    centers = 50 * np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1
    )
    tris = centers[:, None, :] + rng.normal(0, 2.5, size=(4000, 3, 3))
    ys = np.linspace(-60, 60, 128)
    yield "tri_crossings (4k tris, 128^2 rays)", (tris, ys, ys), "tri_crossings"


def main():
    print(f"{'workload':45s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, args, fn_name in workloads():
        t_np = timeit(getattr(numpy_backend, fn_name), *args)
        if _core is not None:
            t_c = timeit(getattr(_core, fn_name), *args)
            print(f"{name:45s} {t_np * 1e3:9.1f}ms {t_c * 1e3:9.1f}ms {t_np / t_c:7.1f}x")
        else:
            print(f"{name:45s} {t_np * 1e3:9.1f}ms {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
