import numpy as np
import pytest

from cadforge.augment import ROTATIONS, rotate_occupancy
from cadforge.errors import CountError, OutOfDomainError
from cadforge.kernel import Aabb, VoxelSolid, evaluate
from cadforge.lang import parse
from cadforge.render import (
    IMAGE_SIZE,
    MIRRORED_VIEWS,
    VIEW_NAMES,
    ViewSpec,
    make_grid,
    read_pgm,
    render_basis_view,
    render_grid,
    render_view,
    render_views,
    write_pgm,
    _BASES,
)

DOM = Aabb.cube(110.0)


def solid_of(src, res=128):
    solid, _ = evaluate(parse(src), res, DOM)
    return solid


def empty_solid(res=64):
    return VoxelSolid.empty(res, DOM)


def test_empty_solid_renders_black():
    for name in VIEW_NAMES:
        img = render_view(empty_solid(), ViewSpec.canonical(name))
        assert img.shape == (IMAGE_SIZE, IMAGE_SIZE)
        assert not img.any()


def test_full_cube_uniform_max_intensity():
    s = solid_of("a = box(200, 200, 200)\nresult = a\n")
    img = render_view(s, ViewSpec.canonical("+Z"))
    assert img.min() == img.max()
    assert img.min() >= 250


def test_foreground_band_and_background_zero():
    s = solid_of("a = box(60, 60, 60)\nresult = a\n")
    img = render_view(s, ViewSpec.canonical("+X"))
    fg = img[img > 0]
    assert fg.size > 0
    assert fg.min() >= 1
    bg = img[img == 0]
    assert bg.size > 0


def test_depth_monotonicity():
    near = solid_of("a = box(40, 40, 10, 0, 0, 80)\nresult = a\n")
    far = solid_of("a = box(40, 40, 10, 0, 0, -80)\nresult = a\n")
    img_near = render_view(near, ViewSpec.canonical("+Z"))
    img_far = render_view(far, ViewSpec.canonical("+Z"))
    assert img_near.max() > img_far.max()


def test_mirror_flag_set_exactly_for_specified_views():
    for name in VIEW_NAMES:
        spec = ViewSpec.canonical(name)
        assert spec.mirrored == (name in MIRRORED_VIEWS)


def test_mirror_involution():
    s = solid_of("a = box(60, 40, 20, 10, 5, 0)\nresult = a\n", res=64)
    spec = ViewSpec.canonical("+X")
    img = render_view(s, spec)
    unmirrored = render_view(s, ViewSpec("+X", False))
    assert np.array_equal(np.fliplr(img), unmirrored)
    assert np.array_equal(np.fliplr(np.fliplr(img)), img)


def test_out_of_domain_raises():
    s = solid_of("a = box(215, 40, 40)\nresult = a\n", res=128)
    with pytest.raises(OutOfDomainError):
        render_view(s, ViewSpec.canonical("+X"))


def test_grid_layout():
    s = solid_of("a = box(80, 50, 30)\nresult = a\n", res=64)
    views = render_views(s, 8)
    grid = make_grid(views)
    assert grid.shape == (476, 952)
    assert grid[0, 0] == views[0][0, 0]  # +X occupies the top-left cell
    assert np.array_equal(grid[:238, 238:476], views[1])
    assert np.array_equal(grid[238:, 714:], views[7])


def test_seven_view_mode_blanks_iso2():
    s = solid_of("a = box(80, 50, 30)\nresult = a\n", res=64)
    views = render_views(s, 7)
    assert not views[7].any()
    assert views[6].any()
    grid = render_grid(s, 7)
    assert not grid[238:, 714:].any()


def test_grid_count_error():
    with pytest.raises(CountError):
        make_grid([np.zeros((238, 238), dtype=np.uint8)] * 7)


def test_pgm_round_trip_and_exact_bytes():
    img = np.zeros((1, 1), dtype=np.uint8)
    data = write_pgm(img)
    assert data == b"P5\n1 1\n255\n\x00"
    s = solid_of("a = box(80, 50, 30)\nresult = a\n", res=64)
    grid = render_grid(s)
    payload = write_pgm(grid)
    assert len(payload) == len(b"P5\n952 476\n255\n") + 952 * 476
    assert np.array_equal(read_pgm(payload), grid)


def test_render_deterministic():
    s = solid_of("a = box(80, 50, 30)\nb = sphere(20, 0, 0, 25)\nc = union(a, b)\nresult = c\n", res=64)
    assert write_pgm(render_grid(s)) == write_pgm(render_grid(s))


ROT_CASES = [1, 2, 3, 21]  # z-rotations and an upside-down family member


@pytest.mark.parametrize("ridx", ROT_CASES)
def test_rotation_view_equivariance(ridx):
    """Rendering a rotated solid from a canonical view equals rendering the
    original through the inversely-rotated basis, pixel for pixel."""
    s = solid_of("a = box(80, 50, 30, 10, 5, 0)\nb = cylinder(12, 70, \"X\", 0, 0, 20)\nc = union(a, b)\nresult = c\n", res=64)
    rot = ROTATIONS[ridx]
    r = rot.as_array().astype(np.float64)
    rotated = s.with_occupancy(rotate_occupancy(s.occupancy, rot))
    for name in ("+X", "+Z", "-Y"):
        right, up, direction = (np.array(v, dtype=np.float64) for v in _BASES[name])
        img_rotated = render_basis_view(rotated, right, up, direction)
        img_mapped = render_basis_view(s, r.T @ right, r.T @ up, r.T @ direction)
        assert np.array_equal(img_rotated, img_mapped)


def test_intensity_direction_flag():
    s = solid_of("a = box(40, 40, 10, 0, 0, 80)\nresult = a\n", res=64)
    near = render_view(s, ViewSpec("+Z", False), near_bright=True)
    far = render_view(s, ViewSpec("+Z", False), near_bright=False)
    mask = near > 0
    assert np.array_equal(mask, far > 0)
    assert near[mask].max() > far[mask].max()
