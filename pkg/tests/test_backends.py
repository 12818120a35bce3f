"""Parity between the compiled kernel core and the numpy fallback."""

import numpy as np
import pytest

from cadforge.kernel.backends import BACKEND, numpy_backend

try:
    from cadforge.kernel.backends import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled core not built")


def loops_fixture():
    rng = np.random.default_rng(3)
    square = np.array([[0, 0], [10, 0], [10, 10], [0, 10]], dtype=float)
    hole = np.array([[3, 3], [7, 3], [7, 7], [3, 7]], dtype=float)
    tri = np.array([[12, 0], [20, 0], [16, 9]], dtype=float)
    verts = np.concatenate([square, hole, tri])
    offsets = np.array([0, 4, 8, 11], dtype=np.int64)
    points = rng.uniform(-2, 22, size=(4000, 2))
    return points, verts, offsets


@needs_core
def test_point_in_loops_parity():
    points, verts, offsets = loops_fixture()
    a = numpy_backend.point_in_loops(points, verts, offsets)
    b = _core.point_in_loops(points, verts, offsets)
    assert np.array_equal(a, b)


@needs_core
def test_count_components_parity():
    rng = np.random.default_rng(5)
    for density in (0.05, 0.3, 0.6):
        occ = (rng.random((24, 24, 24)) < density).astype(np.uint8)
        assert numpy_backend.count_components6(occ) == _core.count_components6(occ)


@needs_core
def test_iso_first_hit_parity():
    rng = np.random.default_rng(7)
    occ = np.zeros((32, 32, 32), dtype=np.uint8)
    occ[8:20, 10:22, 6:18] = 1
    origin = np.array([-16.0, -16.0, -16.0])
    spacing = 1.0
    d = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    starts = rng.uniform(-30, 5, size=(500, 3))
    a = numpy_backend.iso_first_hit(occ, origin, spacing, starts, d, 60.0, 0.5)
    b = _core.iso_first_hit(occ, origin, spacing, starts, d, 60.0, 0.5)
    assert np.allclose(a, b, equal_nan=True)


@needs_core
def test_tri_crossings_parity():
    rng = np.random.default_rng(9)
    tris = rng.uniform(-10, 10, size=(60, 3, 3))
    ys = np.linspace(-9, 9, 25)
    zs = np.linspace(-9, 9, 25)
    ia, xa = numpy_backend.tri_crossings(tris, ys, zs)
    ib, xb = _core.tri_crossings(tris, ys, zs)
    order_a = np.lexsort((xa, ia))
    order_b = np.lexsort((xb, ib))
    assert np.array_equal(ia[order_a], ib[order_b])
    assert np.allclose(xa[order_a], xb[order_b])


def test_selected_backend_reported():
    assert BACKEND in ("compiled", "numpy")
