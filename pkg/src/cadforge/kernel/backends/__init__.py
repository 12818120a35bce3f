"""Kernel hot-loop backends.

The compiled Cython core is preferred when built; the numpy/scipy fallback
is selected automatically when it is missing, or forced via CADFORGE_PURE=1.
Both expose the same four functions:

    point_in_loops(points, verts, offsets) -> bool mask (even-odd parity)
    count_components6(occ)                 -> int
    iso_first_hit(occ, origin, spacing, starts, direction, tmax, step) -> t array
    tri_crossings(tris, ys, zs)            -> (ray_ids, xs)

benchmarks/bench_kernels.py compares the two implementations.
"""

import os

from . import numpy_backend

if os.environ.get("CADFORGE_PURE") == "1":
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        _impl = numpy_backend
        BACKEND = "numpy"

point_in_loops = _impl.point_in_loops
count_components6 = _impl.count_components6
iso_first_hit = _impl.iso_first_hit
tri_crossings = _impl.tri_crossings

__all__ = [
    "BACKEND",
    "count_components6",
    "iso_first_hit",
    "numpy_backend",
    "point_in_loops",
    "tri_crossings",
]
