import numpy as np
import pytest

from cadforge.augment import (
    ROTATIONS,
    rotate_occupancy,
    rotate_script,
    rotation_table,
    rotational_augment,
    sketch_swap,
)
from cadforge.kernel import Aabb, evaluate, iou_grids, try_evaluate
from cadforge.lang import FrameClass, OpKind, SIGNATURES, emit, parse

DOM = Aabb.cube(110.0)


def test_table_has_24_distinct_det_plus_one():
    mats = [r.as_array() for r in rotation_table()]
    assert len(mats) == 24
    seen = {tuple(m.flatten()) for m in mats}
    assert len(seen) == 24
    for m in mats:
        assert round(float(np.linalg.det(m))) == 1
        assert set(np.unique(m)) <= {-1, 0, 1}
        assert np.array_equal(m @ m.T, np.eye(3, dtype=np.int64))


def test_table_closed_under_composition():
    mats = {tuple(r.as_array().flatten()) for r in ROTATIONS}
    for a in ROTATIONS:
        for b in ROTATIONS:
            prod = tuple((a.as_array() @ b.as_array()).flatten())
            assert prod in mats


def test_index_zero_is_identity():
    assert np.array_equal(ROTATIONS[0].as_array(), np.eye(3, dtype=np.int64))


def test_identity_rotation_is_byte_identical():
    src = 'wp1 = workplane("XY", 3, 4, 5, 30)\nwp2 = rect(wp1, 20, 10)\nwp3 = extrude(wp2, 8)\nwp4 = translate(wp3, 10, 0, 0)\nresult = wp4\n'
    s = parse(src)
    assert emit(rotate_script(s, ROTATIONS[0])) == emit(s)


def test_translate_under_rz90():
    src = "a = box(10, 10, 10)\nb = translate(a, 10, 0, 0)\nresult = b\n"
    rot = ROTATIONS[1]  # Rz(90)
    assert np.array_equal(rot.as_array(), np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]]))
    out = rotate_script(parse(src), rot)
    tr = out.statements[1]
    assert [a.value.value for a in tr.args[1:4]] == [0.0, 10.0, 0.0]


def test_box_dims_permute():
    src = "a = box(10, 20, 30)\nresult = a\n"
    # Rz(0) then Ry(90): maps x->-z, z->x
    rot = next(r for r in ROTATIONS if np.array_equal(r.as_array(), np.array([[0, 0, 1], [0, 1, 0], [-1, 0, 0]])))
    out = rotate_script(parse(src), rot)
    dims = [out.statements[0].args[i].value.value for i in range(3)]
    assert dims == [30.0, 20.0, 10.0]


def test_rotate_axis_sign_flip():
    src = "a = box(30, 20, 10)\nb = rotate(a, \"X\", 30)\nresult = b\n"
    rot = ROTATIONS[1]  # Rz90: X -> Y
    out = rotate_script(parse(src), rot)
    st = out.statements[1]
    assert st.args[1].value == "Y"
    assert st.args[2].value.value == 30.0
    rot180 = ROTATIONS[2]  # Rz180: X -> -X
    out2 = rotate_script(parse(src), rot180)
    st2 = out2.statements[1]
    assert st2.args[1].value == "X"
    assert st2.args[2].value.value == -30.0


def test_local_args_unchanged():
    src = (
        'wp1 = workplane("YZ", 5, 0, 0, 0)\n'
        "wp2 = move_to(wp1, 0, 0)\n"
        "wp3 = line_to(wp2, 20, 0)\n"
        "wp4 = line_to(wp3, 0, 15)\n"
        "wp5 = close(wp4)\n"
        "wp6 = extrude(wp5, 9)\n"
        "result = wp6\n"
    )
    s = parse(src)
    for rot in ROTATIONS[1:6]:
        out = rotate_script(s, rot)
        for a, b in zip(s.statements, out.statements):
            if SIGNATURES[a.op].frame == FrameClass.LOCAL:
                assert a.args == b.args


EQUIV_SCRIPTS = [
    'wp1 = workplane("XY", 10, 5, 0, 0)\nwp2 = rect(wp1, 40, 25)\nwp3 = extrude(wp2, 30)\nresult = wp3\n',
    "a = box(50, 30, 20, 5, 10, 0)\nb = cylinder(10, 60, \"X\", 0, 0, 0)\nc = union(a, b)\nresult = c\n",
    "a = sphere(30, 10, 0, 5)\nb = hole(a, 10, 0, -40, 0, 0, 80, 8)\nresult = b\n",
]


@pytest.mark.parametrize("src", EQUIV_SCRIPTS)
@pytest.mark.parametrize("ridx", [1, 5, 9, 17, 21])
def test_rotation_equivariance(src, ridx):
    s = parse(src)
    rot = ROTATIONS[ridx]
    base, _ = evaluate(s, 128, DOM)
    rotated, _ = evaluate(rotate_script(s, rot), 128, DOM)
    oracle = rotate_occupancy(base.occupancy, rot)
    inter = (rotated.occupancy & oracle).sum()
    union = (rotated.occupancy | oracle).sum()
    assert inter / union >= 0.98


def test_group_property_composition():
    src = EQUIV_SCRIPTS[0]
    s = parse(src)
    r1, r2 = ROTATIONS[5], ROTATIONS[9]
    m21 = r2.as_array() @ r1.as_array()
    r21 = next(r for r in ROTATIONS if np.array_equal(r.as_array(), m21))
    a, _ = evaluate(rotate_script(rotate_script(s, r1), r2), 64, DOM)
    b, _ = evaluate(rotate_script(s, r21), 64, DOM)
    assert iou_grids(a, b) >= 0.98


def test_rotational_augment_deterministic_and_valid():
    corpus = [(f"s{i}", parse(src)) for i, src in enumerate(EQUIV_SCRIPTS)]
    v1, skipped1 = rotational_augment(corpus, seed=42)
    v2, _ = rotational_augment(corpus, seed=42)
    assert len(v1) + len(skipped1) == len(corpus)
    assert [(sid, idx, emit(sc)) for sid, idx, sc in v1] == [
        (sid, idx, emit(sc)) for sid, idx, sc in v2
    ]
    assert all(1 <= idx <= 23 for _, idx, _ in v1)
    for _, _, script in v1:
        _, report = try_evaluate(script, 64, DOM)
        assert report.success


def test_sketch_swap_box_trigger():
    host = "a = box(200, 120, 80)\nb = fillet(a, 5)\nresult = b\n"
    donor = parse(
        'wp1 = workplane("XY")\nwp2 = rect(wp1, 180, 110)\nwp3 = circle(wp2, 30)\nwp4 = extrude(wp3, 70)\nwp5 = translate(wp4, 0, 0, -35)\nresult = wp5\n'
    )
    out = sketch_swap(parse(host), [donor], seed=1)
    assert out is not None
    ops = [s.op for s in out.statements]
    assert OpKind.BOX not in ops
    assert OpKind.FILLET in ops
    _, report = try_evaluate(out, 64, DOM)
    assert report.success


def test_sketch_swap_no_trigger_and_empty_pool():
    sphere_first = "a = sphere(100)\nresult = a\n"
    donor = parse("d = box(100, 100, 100)\nresult = d\n")
    assert sketch_swap(parse(sphere_first), [donor], seed=0) is None
    host = "a = box(200, 120, 80)\nresult = a\n"
    assert sketch_swap(parse(host), [], seed=0) is None


def test_sketch_swap_cylinder_trigger():
    host = "a = cylinder(100, 60, \"Z\")\nb = translate(a, 0, 0, 0)\nresult = b\n"
    donor = parse("d = box(150, 150, 50)\nresult = d\n")
    out = sketch_swap(parse(host), [donor], seed=3)
    assert out is not None
    assert out.statements[0].op == OpKind.BOX


def test_orbit_validity_preserved():
    """Validity status is invariant across the whole rotation orbit."""
    corpus = [
        EQUIV_SCRIPTS[0],
        "a = box(4, 4, 4, -30, 0, 0)\nb = box(4, 4, 4, 30, 0, 0)\nc = union(a, b)\nresult = c\n",
    ]
    for src in corpus:
        s = parse(src)
        _, base_report = try_evaluate(s, 64, DOM)
        for rot in ROTATIONS:
            _, report = try_evaluate(rotate_script(s, rot), 64, DOM)
            assert report.success == base_report.success, rot.index
