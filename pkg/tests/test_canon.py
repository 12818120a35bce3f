import numpy as np
import pytest

from cadforge.canon import (
    CanonConfig,
    LENGTH_LIMIT,
    binarize,
    canonicalize,
    center,
    dedup,
    length_filter,
    normalize_extent,
    truncate_script,
    unify,
)
from cadforge.kernel import Aabb, iou_grids, to_stl, try_evaluate, voxelize_mesh
from cadforge.lang import UnitTag, ast, emit, parse

# Mechanics tests run at a coarse grid with the preservation gate off (the
# gate's distortion draws depend on the measured scale factor and reject
# more at coarse resolutions); fidelity tests use the default resolution.
CFG = CanonConfig(resolution=64, preserve_min=None)
CFG128 = CanonConfig(resolution=128)


def tight_cube_occ(script, cube_center, cube_side, res=128):
    """Rasterize a script over a given cube: its unit-normalized occupancy."""
    half = cube_side / 2.0
    domain = Aabb(
        tuple(c - half for c in cube_center),
        tuple(c + half for c in cube_center),
    )
    solid, report = try_evaluate(script, res, domain)
    assert report.aabb is not None
    return solid


def normalized_pair(pre_script, post_script, rep, res=128, inflate=1.1):
    """Same-shape rasterizations of pre/post canon scripts.

    The post-side frame is the pre-side AABB cube mapped through the exact
    canon similarity, so the oracle adds no frame-measurement noise and the
    residual IoU gap reflects only literal quantization.
    """
    _, pre_rep = try_evaluate(pre_script, res, CFG128.domain)
    c = pre_rep.aabb.center
    side = pre_rep.aabb.longest_side * inflate
    f = rep.scale_factor
    c_post = tuple(
        f * (ci + si) + pi for ci, si, pi in zip(c, rep.center_shift, rep.post_scale_shift)
    )
    pre = tight_cube_occ(pre_script, c, side, res)
    post = tight_cube_occ(post_script, c_post, side * f, res)
    return pre, post


# --- unify ---

def test_unify_renames_in_definition_order():
    src = 'alpha = workplane("XY")\nbeta = rect(alpha, 10, 10)\ngamma = extrude(beta, 5)\nresult = gamma\n'
    u = unify(parse(src))
    assert [s.target for s in u.statements] == ["wp1", "wp2", "wp3"]
    assert u.result_binding == "wp3"


def test_unify_idempotent_and_alpha_equivalence():
    a = 'a = workplane("XY")\nb = rect(a, 10, 10)\nc = extrude(b, 5)\nresult = c\n'
    b = 'x1 = workplane("XY")\nyy = rect(x1, 10, 10)\nzz = extrude(yy, 5)\nresult = zz\n'
    ua, ub = unify(parse(a)), unify(parse(b))
    assert emit(ua) == emit(ub)
    assert emit(unify(ua)) == emit(ua)


def test_unify_inlines_binds():
    src = "r = 12\nwp = workplane(\"XY\")\nsk = circle(wp, r)\nbody = extrude(sk, r)\nresult = body\n"
    u = unify(parse(src))
    assert not u.binds
    assert "12" in emit(u)


# --- center ---

def test_center_corner_box():
    src = "a = box(40, 40, 40, 20, 20, 20)\nresult = a\n"  # spans [0,40]^3
    centered, shift = center(parse(src), CFG128)
    assert np.allclose(shift, (-20, -20, -20), atol=2 * CFG128.spacing)
    _, report = try_evaluate(centered, CFG128.resolution, CFG128.domain)
    assert all(abs(c) <= CFG128.center_tol for c in report.aabb.center)


def test_center_always_injects_translate():
    src = "a = box(10, 10, 10)\nresult = a\n"  # already centered
    centered, shift = center(parse(src), CFG)
    assert shift == (0.0, 0.0, 0.0)
    from cadforge.lang import OpKind

    assert centered.statements[-1].op == OpKind.TRANSLATE


def test_center_invalid_rejected():
    src = "a = box(10, 10, 10, -50, 0, 0)\nb = box(10, 10, 10, 50, 0, 0)\nc = union(a, b)\nresult = c\n"
    out, reason = center(parse(src), CFG)
    assert out is not None  # multiple components still have an AABB; centering applies
    src2 = "a = box(5, 5, 5)\nb = box(20, 20, 20)\nc = cut(a, b)\nresult = c\n"
    out2, reason2 = center(parse(src2), CFG)
    assert out2 is None


# --- normalize ---

def test_normalize_doubles_cube():
    src = "a = box(100, 100, 100)\nresult = a\n"
    out, (f, fallback, reason) = normalize_extent(parse(src), CFG128)
    assert reason is None and not fallback
    assert abs(f - 2.0) < 0.05
    _, report = try_evaluate(out, 128, CFG128.domain)
    assert abs(report.aabb.longest_side - 200.0) <= 2 * CFG128.spacing


def test_normalize_noop_when_on_target():
    src = "a = box(200, 120, 80)\nresult = a\n"
    s = parse(src)
    out, (f, fallback, reason) = normalize_extent(s, CFG128)
    assert f == 1.0
    assert emit(out) == emit(s)


# --- binarize ---

def test_binarize_grid():
    src = (
        'wp1 = workplane("XY", 0, 0, 0, 44.7)\n'
        "wp2 = rect(wp1, 99.999999, 50.0000003)\n"
        "wp3 = extrude(wp2, 0.000000003)\n"
        "result = wp3\n"
    )
    out, rounded = binarize(parse(src))
    wp = out.statements[0]
    assert wp.args[4].value.value == 45.0
    rect = out.statements[1]
    assert rect.args[1].value.value == 100.0
    ext = out.statements[2]
    assert ext.args[1].value.value == 0.0
    assert rounded >= 3


def test_binarize_half_away_from_zero():
    src = "a = box(10.5, 11.5, 10)\nb = translate(a, -2.5, 0, 0)\nresult = b\n"
    out, _ = binarize(parse(src))
    assert out.statements[0].args[0].value.value == 11.0
    assert out.statements[0].args[1].value.value == 12.0
    assert out.statements[1].args[1].value.value == -3.0


def test_binarize_ratio_two_decimals():
    src = "a = box(100, 100, 100)\nb = scale(a, 1.23456)\nresult = b\n"
    out, _ = binarize(parse(src))
    assert out.statements[1].args[1].value.value == 1.23


# --- canonicalize ---

CANON_INPUTS = [
    "a = box(90, 55, 30, 12, -7, 3)\nresult = a\n",
    'w = workplane("XY")\ns = circle(w, 40.3)\nb = extrude(s, 77.7)\nresult = b\n',
    "a = box(120, 80, 40)\nb = cylinder(25, 90, \"Z\", 0, 0, 10)\nc = union(a, b)\nresult = c\n",
    'w = workplane("XZ", 0, 0, 0, 0)\ns = rect(w, 60, 30, 40, 0)\nb = revolve(s, 360, "Y")\nresult = b\n',
]


@pytest.mark.parametrize("src", CANON_INPUTS)
def test_canonicalize_idempotent(src):
    out1, rep1 = canonicalize(parse(src), CFG)
    assert not rep1.rejected, rep1.reject_reason
    text1 = emit(out1)
    out2, rep2 = canonicalize(parse(text1), CFG)
    assert not rep2.rejected, rep2.reject_reason
    assert emit(out2) == text1
    assert rep2.scale_factor == 1.0
    assert rep2.center_shift == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("src", CANON_INPUTS[:2])
def test_canonicalize_geometry_preserved(src):
    from cadforge.canon import preservation_iou

    script = parse(src)
    out, rep = canonicalize(script, CFG128)
    if out is None:
        # Quantization genuinely moved the shape too far; the gate must be
        # the reason, and acceptance would have violated the invariant.
        assert rep.reject_reason == "revalidate: quantization-distortion"
        return
    assert rep.preservation_iou >= 0.99
    # Independent re-measurement of the preservation oracle agrees.
    iou = preservation_iou(parse(src), out, rep, CFG128, res=128)
    assert iou >= 0.99


def test_canonicalize_rejects_distorting_quantization():
    # Thin plate: integer rounding at target scale moves faces by a large
    # fraction of the small dimension, so canon must refuse it.
    src = "a = box(190, 140, 3)\nresult = a\n"
    out, rep = canonicalize(parse(src), CFG128)
    if out is not None:
        assert rep.preservation_iou >= 0.99


def test_canonicalize_integer_lengths():
    out, rep = canonicalize(parse(CANON_INPUTS[1]), CFG)
    for stmt in out.statements:
        for arg in stmt.args:
            if isinstance(arg, ast.NumberArg) and arg.unit == UnitTag.LENGTH:
                assert arg.value.value == round(arg.value.value)
                assert abs(arg.value.value) <= 400


def test_canonicalize_rejects_invalid():
    src = "a = box(5, 5, 5)\nb = box(20, 20, 20)\nc = cut(a, b)\nresult = c\n"
    out, rep = canonicalize(parse(src), CFG)
    assert out is None
    assert rep.rejected


# --- length filter / dedup ---

def make_long_script(n):
    lines = ["base = box(180, 180, 40)"]
    prev = "base"
    for i in range(n):
        lines.append(f"c{i} = cylinder(9, 70, \"Z\", {(i % 12) * 14 - 77}, {(i // 12) * 14 - 77}, 0)")
        lines.append(f"u{i} = union({prev}, c{i})")
        prev = f"u{i}"
    lines.append(f"result = {prev}")
    return "\n".join(lines) + "\n"


def test_length_filter_keeps_short():
    text = emit(unify(parse(CANON_INPUTS[0])))
    res = length_filter([("a", text)], cfg=CFG)
    assert res.kept == [("a", text)]


def test_length_filter_truncates_long():
    canon_in, rep = canonicalize(parse(make_long_script(60)), CFG)
    assert not rep.rejected
    text = emit(canon_in)
    assert len(text) > LENGTH_LIMIT
    res = length_filter([("big", text)], cfg=CFG)
    assert not res.kept
    assert len(res.truncated) + len(res.rejected) == 1
    if res.truncated:
        _, out_text, _ = res.truncated[0]
        assert len(out_text) <= LENGTH_LIMIT
        out, rep2 = try_evaluate(parse(out_text), CFG.resolution, CFG.domain)
        assert rep2.success


def test_truncation_without_solid_prefix():
    stmts = 'wp1 = workplane("XY")\n' + "".join(
        f"wp{i} = rect(wp{i-1}, {i}, {i})\n" for i in range(2, 120)
    )
    script = stmts + "wp120 = extrude(wp119, 5)\nresult = wp120\n"
    parsed = parse(script)
    truncated = truncate_script(parsed, limit=200)
    assert truncated is None


def test_dedup_stable():
    a = 'a = workplane("XY")\nb = rect(a, 10, 10)\nc = extrude(b, 5)\nresult = c\n'
    b = 'x = workplane("XY")\ny = rect(x, 10, 10)\nz = extrude(y, 5)\nresult = z\n'
    ta, tb = emit(unify(parse(a))), emit(unify(parse(b)))
    assert ta == tb
    out = dedup([("a", ta), ("b", tb), ("c", ta + "# nope\n")])
    assert [sid for sid, _ in out] == ["a", "c"]
    assert dedup([]) == []
