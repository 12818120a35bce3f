import math

import numpy as np
import pytest

from cadforge.errors import EmptySolidError, EvalError, OpenMeshError
from cadforge.kernel import (
    Aabb,
    Mesh,
    VoxelSolid,
    connected_components,
    edge_manifold,
    evaluate,
    iou_grids,
    read_stl,
    sample_surface,
    to_stl,
    try_evaluate,
    voxelize_mesh,
    write_stl,
)
from cadforge.lang import parse

DOM32 = Aabb.cube(16.0)


def run(src, resolution=64, domain=DOM32):
    return evaluate(parse(src), resolution, domain)


def grid_from_voxels(voxels, resolution=8):
    occ = np.zeros((resolution,) * 3, dtype=bool)
    for v in voxels:
        occ[v] = True
    return VoxelSolid(resolution, (0.0, 0.0, 0.0), 1.0, occ)


def brute_components6(occ):
    """Oracle: BFS flood fill with explicit 6-neighborhood."""
    occ = occ.copy()
    count = 0
    dirs = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    shape = occ.shape
    while occ.any():
        seed = tuple(int(i) for i in np.argwhere(occ)[0])
        stack = [seed]
        occ[seed] = False
        while stack:
            x, y, z = stack.pop()
            for dx, dy, dz in dirs:
                n = (x + dx, y + dy, z + dz)
                if all(0 <= n[i] < shape[i] for i in range(3)) and occ[n]:
                    occ[n] = False
                    stack.append(n)
        count += 1
    return count


# --- evaluate ---

def test_box_volume_analytic():
    solid, report = run("wp1 = box(10, 10, 10)\nresult = wp1\n")
    assert report.success
    assert report.solid_count == 1
    assert abs(report.volume - 1000.0) / 1000.0 < 0.05


def test_disjoint_union_two_components():
    src = "a = box(4, 4, 4, -8, 0, 0)\nb = box(4, 4, 4, 8, 0, 0)\nc = union(a, b)\nresult = c\n"
    _, report = run(src)
    assert report.solid_count == 2
    assert not report.success
    assert report.failure_reason == "multiple-components"


def test_cut_to_empty():
    src = "a = box(10, 10, 10)\nb = box(20, 20, 20)\nc = cut(a, b)\nresult = c\n"
    _, report = run(src)
    assert report.volume == 0.0
    assert not report.success


def test_cylinder_volume():
    solid, report = run("wp1 = cylinder(5, 10)\nresult = wp1\n", resolution=128)
    expected = math.pi * 25.0 * 10.0
    assert abs(report.volume - expected) / expected < 0.05


def test_sphere_volume():
    _, report = run("wp1 = sphere(8)\nresult = wp1\n", resolution=128)
    expected = 4.0 / 3.0 * math.pi * 8.0 ** 3
    assert abs(report.volume - expected) / expected < 0.05


def test_extrude_rect_matches_box():
    a, _ = run('wp1 = workplane("XY")\nwp2 = rect(wp1, 10, 6)\nwp3 = extrude(wp2, 4)\nresult = wp3\n')
    b, _ = run("wp1 = box(10, 6, 4, 0, 0, 2)\nresult = wp1\n")
    assert iou_grids(a, b) == 1.0


def test_extrude_negative_direction():
    a, _ = run('wp1 = workplane("XY")\nwp2 = rect(wp1, 10, 6)\nwp3 = extrude(wp2, -4)\nresult = wp3\n')
    b, _ = run("wp1 = box(10, 6, 4, 0, 0, -2)\nresult = wp1\n")
    assert iou_grids(a, b) == 1.0


def test_annulus_even_odd():
    src = (
        'wp1 = workplane("XY")\n'
        "wp2 = circle(wp1, 10)\n"
        "wp3 = circle(wp2, 5)\n"
        "wp4 = extrude(wp3, 4)\n"
        "result = wp4\n"
    )
    _, report = run(src, resolution=128)
    expected = math.pi * (100.0 - 25.0) * 4.0
    assert abs(report.volume - expected) / expected < 0.05


def test_empty_sketch_extrude_raises():
    src = 'wp1 = workplane("XY")\nwp2 = circle(wp1, 0.01)\nwp3 = extrude(wp2, 4)\nresult = wp3\n'
    with pytest.raises(EvalError):
        run(src, resolution=16)


def test_path_loop_triangle():
    src = (
        'wp1 = workplane("XY")\n'
        "wp2 = move_to(wp1, 0, 0)\n"
        "wp3 = line_to(wp2, 10, 0)\n"
        "wp4 = line_to(wp3, 0, 10)\n"
        "wp5 = close(wp4)\n"
        "wp6 = extrude(wp5, 4)\n"
        "result = wp6\n"
    )
    _, report = run(src, resolution=128)
    expected = 50.0 * 4.0
    assert abs(report.volume - expected) / expected < 0.08


def test_revolve_full_circle_matches_cylinder():
    src = (
        'wp1 = workplane("XZ")\n'
        "wp2 = rect(wp1, 10, 6, 5, 0)\n"
        "wp3 = revolve(wp2, 360, \"Y\")\n"
        "result = wp3\n"
    )
    a, report = run(src, resolution=128)
    assert report.success
    b, _ = run("c = cylinder(10, 6)\nresult = c\n", resolution=128)
    assert iou_grids(a, b) >= 0.98


def test_revolve_half_turn():
    src = (
        'wp1 = workplane("XZ")\n'
        "wp2 = rect(wp1, 10, 6, 5, 0)\n"
        "wp3 = revolve(wp2, 180, \"Y\")\n"
        "result = wp3\n"
    )
    _, report = run(src, resolution=128)
    full = math.pi * 100.0 * 6.0
    assert abs(report.volume - full / 2.0) / (full / 2.0) < 0.08


def test_sweep_diagonal_prism():
    src = (
        'wp1 = workplane("XY")\n'
        "wp2 = rect(wp1, 6, 6)\n"
        "wp3 = sweep(wp2, 4, 0, 8)\n"
        "result = wp3\n"
    )
    _, report = run(src, resolution=128)
    expected = 36.0 * 8.0  # sheared prism keeps base-area x height
    assert abs(report.volume - expected) / expected < 0.06


def test_loft_square_to_square():
    src = (
        'wp1 = workplane("XY")\n'
        "sk1 = rect(wp1, 10, 10)\n"
        'wp2 = workplane("XY", 0, 0, 6)\n'
        "sk2 = rect(wp2, 4, 4)\n"
        "s = loft(sk1, sk2)\n"
        "result = s\n"
    )
    _, report = run(src, resolution=128)
    # Frustum with square cross-sections: V = h/3 * (A1 + A2 + sqrt(A1*A2))
    expected = 6.0 / 3.0 * (100.0 + 16.0 + 40.0)
    assert report.success
    assert abs(report.volume - expected) / expected < 0.06


def test_loft_mismatched_profiles_unsupported():
    src = (
        'wp1 = workplane("XY")\n'
        "sk1 = rect(wp1, 10, 10)\n"
        'wp2 = workplane("XY", 0, 0, 6)\n'
        "sk2 = polygon(wp2, 3, 5)\n"
        "s = loft(sk1, sk2)\n"
        "result = s\n"
    )
    _, report = run(src)
    assert not report.success
    assert report.failure_reason == "kernel-unsupported"
    from cadforge.lang import OpKind

    assert report.unsupported_ops == [OpKind.LOFT]


def test_shell_subset_and_smaller():
    full, _ = run("a = box(10, 10, 10)\nresult = a\n")
    shelled, report = run("a = box(10, 10, 10)\nb = shell(a, 1)\nresult = b\n")
    assert report.volume < full.volume
    assert not (shelled.occupancy & ~full.occupancy).any()


def test_hole_drills_through():
    src = (
        "a = box(10, 10, 10)\n"
        "b = hole(a, 0, 0, -6, 0, 0, 12, 2)\n"
        "result = b\n"
    )
    solid, report = run(src, resolution=128)
    expected = 1000.0 - math.pi * 4.0 * 10.0
    assert abs(report.volume - expected) / expected < 0.05


def test_fillet_is_identity_with_flag():
    from cadforge.lang import OpKind

    plain, _ = run("a = box(10, 10, 10)\nresult = a\n")
    filleted, report = run("a = box(10, 10, 10)\nb = fillet(a, 2)\nresult = b\n")
    assert iou_grids(plain, filleted) == 1.0
    assert report.approximated_ops == [OpKind.FILLET]


def test_boolean_algebra_oracle():
    rng = np.random.default_rng(7)
    blank = VoxelSolid.empty(16, DOM32)
    a = blank.with_occupancy(rng.random((16,) * 3) < 0.3)
    b = blank.with_occupancy(rng.random((16,) * 3) < 0.3)
    assert np.array_equal(a.union(b).occupancy, a.occupancy | b.occupancy)
    assert np.array_equal(a.cut(b).occupancy, a.occupancy & ~b.occupancy)
    assert np.array_equal(a.intersect(b).occupancy, a.occupancy & b.occupancy)


def test_translate_equivariance_voxel_multiple():
    base, _ = run("a = box(8, 8, 8)\nresult = a\n", resolution=64)
    sp = base.spacing
    shifted, _ = run(f"a = box(8, 8, 8)\nb = translate(a, {2 * sp}, {sp}, 0)\nresult = b\n", resolution=64)
    assert np.array_equal(shifted.occupancy, base.shift_voxels((2, 1, 0)).occupancy)


def test_rect_array_count():
    src = (
        'wp1 = workplane("XY")\n'
        "wp2 = rect(wp1, 2, 2, -6, -6)\n"
        "wp3 = rect_array(wp2, 4, 4, 3, 3)\n"
        "wp4 = extrude(wp3, 2)\n"
        "result = wp4\n"
    )
    _, report = run(src, resolution=128)
    expected = 9 * 2.0 * 2.0 * 2.0
    assert abs(report.volume - expected) / expected < 0.1
    assert report.solid_count == 9


def test_polar_array_ring():
    src = (
        'wp1 = workplane("XY")\n'
        "wp2 = circle(wp1, 1.5, 8, 0)\n"
        "wp3 = polar_array(wp2, 6)\n"
        "wp4 = extrude(wp3, 2)\n"
        "result = wp4\n"
    )
    _, report = run(src, resolution=128)
    assert report.solid_count == 6


def test_resolution_bounds():
    with pytest.raises(ValueError):
        run("a = box(4, 4, 4)\nresult = a\n", resolution=8)


def test_try_evaluate_folds_errors():
    solid, report = try_evaluate(
        parse('wp1 = workplane("XY")\nwp2 = rect(wp1, 1, 1)\nwp3 = extrude(wp2, 0.001)\nresult = wp3\n'),
        16,
        DOM32,
    )
    assert solid is None
    assert not report.success
    assert report.failure_reason.startswith("eval-error")


# --- connected components ---

def test_components_empty_and_single():
    assert connected_components(grid_from_voxels([])) == 0
    assert connected_components(grid_from_voxels([(1, 1, 1)])) == 1


def test_corner_touching_voxels_two_components():
    assert connected_components(grid_from_voxels([(1, 1, 1), (2, 2, 2)])) == 2
    assert connected_components(grid_from_voxels([(1, 1, 1), (2, 2, 1)])) == 2
    assert connected_components(grid_from_voxels([(1, 1, 1), (2, 1, 1)])) == 1


def test_components_match_bruteforce():
    rng = np.random.default_rng(11)
    for density in (0.1, 0.3, 0.5):
        occ = rng.random((10, 10, 10)) < density
        solid = VoxelSolid(10, (0, 0, 0), 1.0, occ)
        assert connected_components(solid) == brute_components6(occ)


# --- meshing ---

def test_single_voxel_mesh():
    mesh = to_stl(grid_from_voxels([(2, 2, 2)]))
    assert len(mesh) == 12
    assert edge_manifold(mesh)


def test_bar_mesh_triangle_count():
    mesh = to_stl(grid_from_voxels([(1, 1, 1), (2, 1, 1)]))
    assert len(mesh) == 20  # 10 exposed faces, two triangles each
    assert edge_manifold(mesh)


def test_mesh_empty_raises():
    with pytest.raises(EmptySolidError):
        to_stl(grid_from_voxels([]))


def test_mesh_closed_for_shape():
    solid, _ = run("a = box(6, 8, 10)\nb = sphere(5, 0, 0, 6)\nc = union(a, b)\nresult = c\n", resolution=32)
    assert edge_manifold(to_stl(solid))


def test_stl_round_trip():
    mesh = to_stl(grid_from_voxels([(1, 1, 1), (2, 1, 1)]))
    data = write_stl(mesh)
    back = read_stl(data)
    assert len(back) == len(mesh)
    assert np.allclose(back.triangles, mesh.triangles)
    assert data[80:84] == (20).to_bytes(4, "little")


# --- surface sampling ---

def test_sample_single_triangle_inside():
    tri = np.array([[[0, 0, 0], [1, 0, 0], [0, 1, 0]]], dtype=float)
    pts = sample_surface(Mesh(tri), 1, seed=0)
    p = pts[0]
    assert p[2] == 0.0
    assert p[0] >= 0 and p[1] >= 0 and p[0] + p[1] <= 1.0


def test_sample_area_weighting():
    tris = np.array(
        [
            [[0, 0, 0], [3, 0, 0], [0, 2, 0]],    # area 3
            [[10, 0, 0], [11, 0, 0], [10, 2, 0]], # area 1
        ],
        dtype=float,
    )
    pts = sample_surface(Mesh(tris), 4096, seed=123)
    big = (pts[:, 0] < 5).sum()
    p = 0.75
    sigma = math.sqrt(4096 * p * (1 - p))
    assert abs(big - 4096 * p) < 3 * sigma


def test_sample_deterministic():
    tri = np.array([[[0, 0, 0], [1, 0, 0], [0, 1, 0]]], dtype=float)
    a = sample_surface(Mesh(tri), 64, seed=9)
    b = sample_surface(Mesh(tri), 64, seed=9)
    assert np.array_equal(a, b)


# --- voxelize ---

def test_voxelize_round_trip():
    solid, _ = run("a = box(10, 8, 6)\nb = sphere(4, 0, 0, 5)\nc = union(a, b)\nresult = c\n", resolution=64)
    mesh = to_stl(solid)
    back = voxelize_mesh(mesh, 64, DOM32)
    assert iou_grids(back, solid) >= 0.99


def test_voxelize_empty_mesh():
    from cadforge.errors import EmptyMeshError

    with pytest.raises(EmptyMeshError):
        voxelize_mesh(Mesh(np.zeros((0, 3, 3))), 32, DOM32)


def uv_sphere_mesh(r, n_lat=48, n_lon=96):
    """Analytic UV sphere triangulation (oracle-side helper)."""
    tris = []
    for i in range(n_lat):
        t0 = math.pi * i / n_lat
        t1 = math.pi * (i + 1) / n_lat
        for j in range(n_lon):
            p0 = 2 * math.pi * j / n_lon
            p1 = 2 * math.pi * (j + 1) / n_lon
            a = _sph(r, t0, p0)
            b = _sph(r, t1, p0)
            c = _sph(r, t1, p1)
            d = _sph(r, t0, p1)
            if i > 0:
                tris.append([a, b, d])
            if i < n_lat - 1:
                tris.append([b, c, d])
    return Mesh(np.array(tris))


def _sph(r, theta, phi):
    return [
        r * math.sin(theta) * math.cos(phi),
        r * math.sin(theta) * math.sin(phi),
        r * math.cos(theta),
    ]


def test_voxelize_analytic_sphere():
    mesh = uv_sphere_mesh(50.0)
    solid = voxelize_mesh(mesh, 128, Aabb.cube(64.0))
    expected = 4.0 / 3.0 * math.pi * 50.0 ** 3
    assert abs(solid.volume - expected) / expected < 0.03


def test_voxelize_open_mesh_rejected():
    # A single floating quad has inconsistent parity on every covered ray.
    tris = np.array(
        [
            [[0, -8, -8], [0, 8, -8], [0, 8, 8]],
            [[0, -8, -8], [0, 8, 8], [0, -8, 8]],
        ],
        dtype=float,
    )
    with pytest.raises(OpenMeshError):
        voxelize_mesh(Mesh(tris), 32, DOM32)
