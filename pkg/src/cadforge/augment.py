"""Orientation augmentation over the 24 axis-aligned rotations, plus
sketch-diversity swapping of canonical base primitives.

Rotation acts textually: workplane construction arguments and the arguments
of world-frame ops are rewritten through the rotation matrix; ops local to a
workplane frame are untouched. All matrices are integer, so literal rewrites
are exact (sign flips and permutations).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedRewriteError
from .kernel import DEFAULT_DOMAIN, DEFAULT_RESOLUTION, try_evaluate
from .lang import OpKind, SIGNATURES, UnitTag, ValType, ast

_RZ = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]], dtype=np.int64)
_RY90 = np.array([[0, 0, 1], [0, 1, 0], [-1, 0, 0]], dtype=np.int64)


@dataclass(frozen=True)
class Rotation24:
    index: int
    matrix: tuple  # 3x3 integers, row-major

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)


def _mat_tuple(m: np.ndarray) -> tuple:
    return tuple(tuple(int(v) for v in row) for row in m)


def rotation_table():
    """The 24 rotations: Rz^k; Rz^j Ry90 Rz^k; Ry180 Rz^k."""
    rz = [np.linalg.matrix_power(_RZ, k) for k in range(4)]
    ry180 = _RY90 @ _RY90
    mats = []
    for k in range(4):
        mats.append(rz[k])
    for k in range(4):
        for j in range(4):
            mats.append(rz[j] @ _RY90 @ rz[k])
    for k in range(4):
        mats.append(ry180 @ rz[k])
    return [Rotation24(i, _mat_tuple(m)) for i, m in enumerate(mats)]


ROTATIONS = rotation_table()

# Plane-name frames as integer column bases [x y n].
_PLANE_BASES = {
    "XY": ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    "YX": ((0, 1, 0), (1, 0, 0), (0, 0, -1)),
    "YZ": ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
    "ZY": ((0, 0, 1), (0, 1, 0), (-1, 0, 0)),
    "ZX": ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    "XZ": ((1, 0, 0), (0, 0, 1), (0, -1, 0)),
}


def _base_matrix(name: str) -> np.ndarray:
    x, y, n = _PLANE_BASES[name]
    return np.array([x, y, n], dtype=np.int64).T


def _inplane_rot_matrix(normal: np.ndarray, k: int) -> np.ndarray:
    """Rotation by k*90 degrees about an axis-aligned unit normal."""
    c, s = [(1, 0), (0, 1), (-1, 0), (0, -1)][k % 4]
    n = normal
    k_cross = np.array(
        [[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]], dtype=np.int64
    )
    return c * np.eye(3, dtype=np.int64) + s * k_cross + (1 - c) * np.outer(n, n)


# (name, k) -> frame matrix, for decomposing a rotated frame.
_FRAME_LOOKUP = {}
for _name in _PLANE_BASES:
    _b = _base_matrix(_name)
    _n = _b[:, 2]
    for _k in range(4):
        _FRAME_LOOKUP[_mat_tuple(_inplane_rot_matrix(_n, _k) @ _b)] = (_name, 90 * _k)

_AXIS_VEC = {"X": np.array([1, 0, 0]), "Y": np.array([0, 1, 0]), "Z": np.array([0, 0, 1])}
_MIRROR_BY_AXIS = {"Z": "XY", "X": "YZ", "Y": "ZX"}


def _lit(arg: ast.NumberArg) -> float:
    if not isinstance(arg.value, ast.Num):
        raise UnsupportedRewriteError(
            "bound parameter in a rotatable argument position"
        )
    return arg.value.value


def _num_arg(value: float, unit: UnitTag) -> ast.NumberArg:
    if value == 0.0:
        value = 0.0  # normalize -0.0
    return ast.NumberArg(ast.Num(float(value)), unit)


def _rotate_vector(args, idxs, r: np.ndarray):
    """Map the 3 literals at idxs through the rotation; exact for int r."""
    v = np.array([_lit(args[i]) for i in idxs], dtype=np.float64)
    out = r @ v
    for slot, i in enumerate(idxs):
        args[i] = _num_arg(out[slot], args[i].unit)


def _axis_image(axis: str, r: np.ndarray):
    img = r @ _AXIS_VEC[axis]
    for name, vec in _AXIS_VEC.items():
        if np.array_equal(img, vec):
            return name, 1
        if np.array_equal(img, -vec):
            return name, -1
    raise UnsupportedRewriteError(f"axis {axis!r} has no axis-aligned image")


def rotate_script(s: ast.Script, rot: Rotation24) -> ast.Script:
    """Rewrite workplane and world-frame arguments through the rotation."""
    r = rot.as_array()
    statements = []
    for stmt in s.statements:
        args = list(stmt.args)
        op = stmt.op
        if op == OpKind.WORKPLANE:
            name = args[0].value
            frame = _mat_tuple(r @ _base_matrix(name))
            if frame not in _FRAME_LOOKUP:
                raise UnsupportedRewriteError("rotated frame is not axis-aligned")
            new_name, theta_k = _FRAME_LOOKUP[frame]
            args[0] = ast.StrArg(new_name, UnitTag.PLANE)
            _rotate_vector(args, (1, 2, 3), r)
            new_rot = (_lit(args[4]) + theta_k) % 360.0
            args[4] = _num_arg(new_rot, UnitTag.ANGLE)
        elif op == OpKind.BOX:
            dims = np.abs(r) @ np.array([_lit(args[0]), _lit(args[1]), _lit(args[2])])
            for i in range(3):
                args[i] = _num_arg(dims[i], args[i].unit)
            _rotate_vector(args, (3, 4, 5), r)
        elif op == OpKind.CYLINDER:
            axis, _sign = _axis_image(args[2].value, r)
            args[2] = ast.StrArg(axis, UnitTag.AXIS)
            _rotate_vector(args, (3, 4, 5), r)
        elif op == OpKind.SPHERE:
            _rotate_vector(args, (1, 2, 3), r)
        elif op == OpKind.TRANSLATE:
            _rotate_vector(args, (1, 2, 3), r)
        elif op == OpKind.ROTATE:
            axis, sign = _axis_image(args[1].value, r)
            args[1] = ast.StrArg(axis, UnitTag.AXIS)
            args[2] = _num_arg(sign * _lit(args[2]), UnitTag.ANGLE)
        elif op == OpKind.MIRROR:
            normal = {"XY": "Z", "YZ": "X", "ZX": "Y"}[args[1].value]
            axis, _sign = _axis_image(normal, r)
            args[1] = ast.StrArg(_MIRROR_BY_AXIS[axis], UnitTag.PLANE)
        elif op == OpKind.HOLE:
            _rotate_vector(args, (1, 2, 3), r)
            _rotate_vector(args, (4, 5, 6), r)
        statements.append(ast.OpStmt(stmt.target, op, args, stmt.line))
    return ast.Script(statements, s.result_binding, list(s.binds))


def rotate_occupancy(occ: np.ndarray, rot: Rotation24) -> np.ndarray:
    """Voxel-permutation oracle: rotate a grid exactly (domain is a centered
    cube, so index space is closed under the 24 rotations)."""
    r = rot.as_array()
    n = occ.shape[0]
    idx = np.indices(occ.shape).reshape(3, -1)
    # Centered integer coordinates in half-voxel units: 2i + 1 - n.
    c = 2 * idx + 1 - n
    src = r.T @ c  # inverse rotation maps output cells to input cells
    si = ((src + n - 1) // 2).astype(np.int64)
    out = occ[si[0], si[1], si[2]].reshape(occ.shape)
    return out


def rotational_augment(corpus, seed: int):
    """One uniformly drawn non-identity rotation per script.

    corpus: iterable of (id, Script). Returns (variants, skipped) where
    variants are (id, rotation_index, Script).
    """
    rng = np.random.default_rng(seed)
    variants = []
    skipped = []
    for sid, script in corpus:
        idx = int(rng.integers(1, 24))
        try:
            variants.append((sid, idx, rotate_script(script, ROTATIONS[idx])))
        except UnsupportedRewriteError as err:
            skipped.append((sid, str(err)))
    return variants, skipped


def _first_solid_stmt(s: ast.Script):
    for i, stmt in enumerate(s.statements):
        if SIGNATURES[stmt.op].out == ValType.SOLID:
            return i, stmt
    return None, None


def _swap_trigger(stmt: ast.OpStmt, target: float) -> bool:
    if stmt.op == OpKind.BOX:
        dims = [stmt.args[i].value.value for i in range(3)]
        return max(dims) == target
    if stmt.op == OpKind.CYLINDER:
        r = stmt.args[0].value.value
        h = stmt.args[1].value.value
        return 2.0 * r == target or h == target
    return False


def sketch_swap(
    s: ast.Script,
    donors,
    seed: int,
    target: float = 200.0,
    resolution: int = DEFAULT_RESOLUTION,
    domain=DEFAULT_DOMAIN,
):
    """Replace a bound-hitting base primitive with a donor script body.

    Returns the swapped script, or None when the script has no matching
    primitive, the donor pool is empty, or the swap fails validation.
    """
    donors = list(donors)
    if not donors:
        return None
    idx, stmt = _first_solid_stmt(s)
    if stmt is None or not _swap_trigger(stmt, target):
        return None
    rng = np.random.default_rng(seed)
    donor = donors[int(rng.integers(0, len(donors)))]

    rename = {}
    donor_stmts = []
    for dstmt in donor.statements:
        rename[dstmt.target] = f"sw{len(rename) + 1}"
        args = [
            ast.RefArg(rename[a.name]) if isinstance(a, ast.RefArg) else a
            for a in dstmt.args
        ]
        donor_stmts.append(ast.OpStmt(rename[dstmt.target], dstmt.op, args, 0))
    donor_result = rename[donor.result_binding]

    statements = list(s.statements[:idx]) + donor_stmts
    for later in s.statements[idx + 1:]:
        args = [
            ast.RefArg(donor_result)
            if isinstance(a, ast.RefArg) and a.name == stmt.target
            else a
            for a in later.args
        ]
        statements.append(ast.OpStmt(later.target, later.op, args, later.line))
    result = donor_result if s.result_binding == stmt.target else s.result_binding
    swapped = ast.Script(statements, result, [])

    solid, report = try_evaluate(swapped, resolution, domain)
    if solid is None or not report.success:
        return None
    return swapped
