"""Script interpreter: MiniCQ statements to a voxel solid plus a report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import EvalError
from ..lang import OpKind, ast
from .regions import (
    CircleLoop,
    PolarArrayOp,
    PolyLoop,
    RectArrayOp,
    RectLoop,
    Region,
    regular_polygon_vertices,
)
from .voxel import Aabb, DEFAULT_DOMAIN, DEFAULT_RESOLUTION, VoxelSolid, connected_components

_AXIS_VECS = {"X": (1.0, 0.0, 0.0), "Y": (0.0, 1.0, 0.0), "Z": (0.0, 0.0, 1.0)}

# Plane name "AB": local x = +A, local y = +B, normal = A x B.
_PLANE_BASES = {
    "XY": ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    "YX": ((0, 1, 0), (1, 0, 0), (0, 0, -1)),
    "YZ": ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
    "ZY": ((0, 0, 1), (0, 1, 0), (-1, 0, 0)),
    "ZX": ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    "XZ": ((1, 0, 0), (0, 0, 1), (0, -1, 0)),
}

_EXACT_TRIG = {0.0: (1.0, 0.0), 90.0: (0.0, 1.0), 180.0: (-1.0, 0.0), 270.0: (0.0, -1.0)}


def _cos_sin_deg(angle: float):
    key = angle % 360.0
    if key in _EXACT_TRIG:
        return _EXACT_TRIG[key]
    rad = math.radians(angle)
    return math.cos(rad), math.sin(rad)


def plane_frame(name: str, rot_deg: float):
    """Orthonormal (xdir, ydir, normal) for a named plane + in-plane rotation."""
    bx, by, bn = (np.array(v, dtype=np.float64) for v in _PLANE_BASES[name])
    c, s = _cos_sin_deg(rot_deg)
    xdir = c * bx + s * by
    ydir = -s * bx + c * by
    return xdir, ydir, bn


@dataclass(frozen=True)
class PlaneVal:
    origin: tuple
    xdir: tuple
    ydir: tuple
    normal: tuple


@dataclass(frozen=True)
class SketchVal:
    plane: PlaneVal
    region: Region
    path_start: tuple = None
    path_segments: tuple = ()
    path_current: tuple = None


@dataclass(frozen=True)
class SolidVal:
    solid: VoxelSolid


@dataclass
class EvalReport:
    success: bool
    solid_count: int = 0
    volume: float = 0.0
    aabb: Aabb = None
    unsupported_ops: list = field(default_factory=list)
    approximated_ops: list = field(default_factory=list)
    failure_reason: str = None


class _Unsupported(Exception):
    def __init__(self, op: OpKind, why: str):
        self.op = op
        self.why = why
        super().__init__(why)


class _Grid:
    """Shared evaluation grid: axis center coordinates and blank solids."""

    def __init__(self, resolution: int, domain: Aabb):
        self.resolution = resolution
        self.domain = domain
        self.blank = VoxelSolid.empty(resolution, domain)
        self.spacing = self.blank.spacing
        self.origin = np.array(self.blank.origin)
        self.xs = self.blank.axis_centers(0)
        self.ys = self.blank.axis_centers(1)
        self.zs = self.blank.axis_centers(2)
        self.tol = self.spacing / 4.0

    def solid(self, occ) -> VoxelSolid:
        return self.blank.with_occupancy(occ)

    def broadcast_dot(self, vec, origin):
        """(p - origin) . vec over the whole grid, via separable sums."""
        tx = (self.xs - origin[0]) * vec[0]
        ty = (self.ys - origin[1]) * vec[1]
        tz = (self.zs - origin[2]) * vec[2]
        return tx[:, None, None] + ty[None, :, None] + tz[None, None, :]


def _num(arg: ast.NumberArg, binds: dict) -> float:
    v = arg.value
    if isinstance(v, ast.Num):
        return float(v.value)
    if isinstance(v, ast.Neg) and isinstance(v.operand, ast.Num):
        return -float(v.operand.value)
    if isinstance(v, ast.Name):
        return float(binds[v.ident])
    raise EvalError("script argument is not a literal")


def _close_open_path(sk: SketchVal, eager: bool) -> SketchVal:
    if sk.path_start is None:
        return sk
    nseg = len(sk.path_segments)
    if nseg == 0:
        # A bare pen move carries no geometry.
        return SketchVal(sk.plane, sk.region)
    if nseg < 2:
        raise EvalError("path with fewer than 3 vertices cannot close")
    loop = PolyLoop(sk.path_start, sk.path_segments)
    return SketchVal(sk.plane, sk.region.add(loop))


def _as_sketch(val) -> SketchVal:
    if isinstance(val, PlaneVal):
        return SketchVal(val, Region())
    if isinstance(val, SketchVal):
        return val
    raise EvalError("expected a sketch or workplane value")


def _solid_region(sk: SketchVal) -> tuple:
    sk = _close_open_path(sk, eager=True)
    if sk.region.is_trivially_empty():
        raise EvalError("empty sketch cannot produce a solid")
    return sk.plane, sk.region


class _Interp:
    def __init__(self, grid: _Grid):
        self.grid = grid
        self.approximated = []
        self.unsupported = []

    # --- sketch ops ---

    def op_workplane(self, name, ox, oy, oz, rot):
        xdir, ydir, normal = plane_frame(name, rot)
        return PlaneVal((ox, oy, oz), tuple(xdir), tuple(ydir), tuple(normal))

    def op_move_to(self, sk, x, y):
        sk = _as_sketch(sk)
        sk = _close_open_path(sk, eager=False)
        return SketchVal(sk.plane, sk.region, (x, y), (), (x, y))

    def op_line_to(self, sk, x, y):
        if sk.path_start is None:
            raise EvalError("line_to without an open path")
        seg = sk.path_segments + (("line", x, y),)
        return SketchVal(sk.plane, sk.region, sk.path_start, seg, (x, y))

    def op_arc_to(self, sk, mx, my, ex, ey):
        if sk.path_start is None:
            raise EvalError("arc_to without an open path")
        seg = sk.path_segments + (("arc", mx, my, ex, ey),)
        return SketchVal(sk.plane, sk.region, sk.path_start, seg, (ex, ey))

    def op_close(self, sk):
        if sk.path_start is None:
            raise EvalError("close without an open path")
        return _close_open_path(sk, eager=True)

    def _add_loop(self, sk, loop):
        sk = _as_sketch(sk)
        sk = _close_open_path(sk, eager=False)
        return SketchVal(sk.plane, sk.region.add(loop))

    def op_rect(self, sk, w, h, cx, cy):
        if w <= 0 or h <= 0:
            raise EvalError("rect requires positive width and height")
        return self._add_loop(sk, RectLoop(cx, cy, w, h))

    def op_circle(self, sk, r, cx, cy):
        if r <= 0:
            raise EvalError("circle requires positive radius")
        return self._add_loop(sk, CircleLoop(cx, cy, r))

    def op_polygon(self, sk, n, r, cx, cy):
        n = int(round(n))
        if n < 3:
            raise EvalError("polygon requires at least 3 sides")
        if r <= 0:
            raise EvalError("polygon requires positive radius")
        verts = regular_polygon_vertices(n, r, cx, cy)
        segs = tuple(("line", x, y) for x, y in verts[1:])
        return self._add_loop(sk, PolyLoop(verts[0], segs))

    def op_rect_array(self, sk, dx, dy, nx, ny):
        nx, ny = int(round(nx)), int(round(ny))
        if nx < 1 or ny < 1:
            raise EvalError("rect_array counts must be >= 1")
        if nx * ny > 4096:
            raise EvalError("rect_array too large")
        sk = _close_open_path(sk, eager=False)
        if sk.region.is_trivially_empty():
            raise EvalError("rect_array on an empty region")
        return SketchVal(sk.plane, sk.region.add(RectArrayOp(dx, dy, nx, ny)))

    def op_polar_array(self, sk, n, span):
        n = int(round(n))
        if n < 1:
            raise EvalError("polar_array count must be >= 1")
        if n > 4096:
            raise EvalError("polar_array too large")
        sk = _close_open_path(sk, eager=False)
        if sk.region.is_trivially_empty():
            raise EvalError("polar_array on an empty region")
        return SketchVal(sk.plane, sk.region.add(PolarArrayOp(n, span)))

    # --- solidify ops ---

    def _local_frame_arrays(self, plane: PlaneVal):
        g = self.grid
        u = g.broadcast_dot(plane.xdir, plane.origin)
        v = g.broadcast_dot(plane.ydir, plane.origin)
        w = g.broadcast_dot(plane.normal, plane.origin)
        return u, v, w

    def op_extrude(self, sk, dist):
        if dist == 0:
            raise EvalError("extrude distance must be nonzero")
        plane, region = _solid_region(sk)
        g = self.grid
        w = g.broadcast_dot(plane.normal, plane.origin)
        lo, hi = (0.0, dist) if dist > 0 else (dist, 0.0)
        slab = (w >= lo) & (w <= hi)
        idx = np.nonzero(slab)
        if idx[0].size == 0:
            raise EvalError("extrusion slab contains no voxels")
        px = g.xs[idx[0]] - plane.origin[0]
        py = g.ys[idx[1]] - plane.origin[1]
        pz = g.zs[idx[2]] - plane.origin[2]
        u = px * plane.xdir[0] + py * plane.xdir[1] + pz * plane.xdir[2]
        v = px * plane.ydir[0] + py * plane.ydir[1] + pz * plane.ydir[2]
        inside = region.contains(u, v, g.tol)
        if not inside.any():
            raise EvalError("empty sketch extruded")
        occ = np.zeros(slab.shape, dtype=bool)
        occ[idx[0][inside], idx[1][inside], idx[2][inside]] = True
        return SolidVal(g.solid(occ))

    def op_revolve(self, sk, angle, axis):
        if angle == 0:
            raise EvalError("revolve angle must be nonzero")
        plane, region = _solid_region(sk)
        g = self.grid
        u, v, w = self._local_frame_arrays(plane)
        if axis == "X":
            h, a, b = u, v, w          # height along local x; radial plane (v, w)
        else:
            h, a, b = v, u, -w         # about local y: theta from +x toward -z
        rho = np.sqrt(a * a + b * b)
        phi = np.arctan2(b, a)
        span = math.radians(min(abs(angle), 360.0))
        full = abs(angle) >= 360.0
        if angle < 0:
            phi = -phi

        def in_sweep(ang):
            if full:
                return np.ones(ang.shape, dtype=bool)
            return (ang % (2.0 * math.pi)) <= span

        occ = np.zeros(u.shape, dtype=bool)
        for sign in (1.0, -1.0):
            if axis == "X":
                cand = region.contains(h, sign * rho, g.tol)
            else:
                cand = region.contains(sign * rho, h, g.tol)
            ang = phi if sign > 0 else phi - math.pi
            occ |= cand & in_sweep(ang)
        if not occ.any():
            raise EvalError("revolve produced no voxels")
        return SolidVal(g.solid(occ))

    def op_sweep(self, sk, dx, dy, dz):
        if dz == 0:
            raise EvalError("sweep path must leave the sketch plane")
        plane, region = _solid_region(sk)
        g = self.grid
        u, v, w = self._local_frame_arrays(plane)
        t = w / dz
        valid = (t >= 0.0) & (t <= 1.0)
        occ = np.zeros(u.shape, dtype=bool)
        if valid.any():
            iu = u[valid] - t[valid] * dx
            iv = v[valid] - t[valid] * dy
            occ[valid] = region.contains(iu, iv, g.tol)
        if not occ.any():
            raise EvalError("sweep produced no voxels")
        return SolidVal(g.solid(occ))

    def op_loft(self, ska, skb):
        ska = _close_open_path(ska, eager=False)
        skb = _close_open_path(skb, eager=False)
        g = self.grid
        pa = ska.region.single_polygon(g.tol)
        pb = skb.region.single_polygon(g.tol)
        if pa is None or pb is None:
            raise _Unsupported(OpKind.LOFT, "loft requires single polygonal profiles")
        if len(pa) != len(pb):
            raise _Unsupported(OpKind.LOFT, "loft profiles must have equal vertex counts")
        fa, fb = ska.plane, skb.plane
        if not (
            np.allclose(fa.xdir, fb.xdir)
            and np.allclose(fa.ydir, fb.ydir)
            and np.allclose(fa.normal, fb.normal)
        ):
            raise _Unsupported(OpKind.LOFT, "loft workplanes must be parallel")
        pa = _ccw_convex(pa)
        pb = _ccw_convex(pb)
        if pa is None or pb is None:
            raise _Unsupported(OpKind.LOFT, "loft profiles must be convex")
        off = np.array(fb.origin) - np.array(fa.origin)
        ha = float(np.dot(off, fa.normal))
        if abs(ha) < 1e-9:
            raise EvalError("loft workplanes coincide")
        du, dv = float(np.dot(off, fa.xdir)), float(np.dot(off, fa.ydir))
        pb = [(x + du, y + dv) for x, y in pb]

        u, v, w = self._local_frame_arrays(fa)
        t = w / ha
        band = (t >= 0.0) & (t <= 1.0)
        idx = np.nonzero(band)
        if idx[0].size == 0:
            raise EvalError("loft slab contains no voxels")
        tu, tv, tt = u[band], v[band], t[band]
        inside = np.ones(tt.shape, dtype=bool)
        n = len(pa)
        for i in range(n):
            ax0, ay0 = pa[i]
            ax1, ay1 = pa[(i + 1) % n]
            bx0, by0 = pb[i]
            bx1, by1 = pb[(i + 1) % n]
            ex0 = ax0 + tt * (bx0 - ax0)
            ey0 = ay0 + tt * (by0 - ay0)
            ex1 = ax1 + tt * (bx1 - ax1)
            ey1 = ay1 + tt * (by1 - ay1)
            cross = (ex1 - ex0) * (tv - ey0) - (ey1 - ey0) * (tu - ex0)
            inside &= cross >= 0.0
        if not inside.any():
            raise EvalError("loft produced no voxels")
        occ = np.zeros(u.shape, dtype=bool)
        occ[idx[0][inside], idx[1][inside], idx[2][inside]] = True
        return SolidVal(self.grid.solid(occ))

    # --- primitives ---

    def op_box(self, w, d, h, cx, cy, cz):
        if w <= 0 or d <= 0 or h <= 0:
            raise EvalError("box dimensions must be positive")
        g = self.grid
        mx = np.abs(g.xs - cx) <= w / 2.0
        my = np.abs(g.ys - cy) <= d / 2.0
        mz = np.abs(g.zs - cz) <= h / 2.0
        occ = mx[:, None, None] & my[None, :, None] & mz[None, None, :]
        return SolidVal(g.solid(occ))

    def op_cylinder(self, r, h, axis, cx, cy, cz):
        if r <= 0 or h <= 0:
            raise EvalError("cylinder dimensions must be positive")
        g = self.grid
        dx = g.xs - cx
        dy = g.ys - cy
        dz = g.zs - cz
        if axis == "Z":
            disc = (dx * dx)[:, None] + (dy * dy)[None, :] <= r * r
            occ = disc[:, :, None] & (np.abs(dz) <= h / 2.0)[None, None, :]
        elif axis == "Y":
            disc = (dx * dx)[:, None] + (dz * dz)[None, :] <= r * r
            occ = disc[:, None, :] & (np.abs(dy) <= h / 2.0)[None, :, None]
        else:
            disc = (dy * dy)[:, None] + (dz * dz)[None, :] <= r * r
            occ = disc[None, :, :] & (np.abs(dx) <= h / 2.0)[:, None, None]
        return SolidVal(g.solid(occ))

    def op_sphere(self, r, cx, cy, cz):
        if r <= 0:
            raise EvalError("sphere radius must be positive")
        g = self.grid
        dx2 = (g.xs - cx) ** 2
        dy2 = (g.ys - cy) ** 2
        dz2 = (g.zs - cz) ** 2
        occ = dx2[:, None, None] + dy2[None, :, None] + dz2[None, None, :] <= r * r
        return SolidVal(g.solid(occ))

    # --- solid combinators and transforms ---

    def op_union(self, a, b):
        return SolidVal(a.solid.union(b.solid))

    def op_cut(self, a, b):
        return SolidVal(a.solid.cut(b.solid))

    def op_intersect(self, a, b):
        return SolidVal(a.solid.intersect(b.solid))

    def op_translate(self, s, dx, dy, dz):
        sp = s.solid.spacing
        shift = (round(dx / sp), round(dy / sp), round(dz / sp))
        return SolidVal(s.solid.shift_voxels(shift))

    def _resample(self, solid: VoxelSolid, matrix: np.ndarray):
        """occ'(p) = occ(matrix @ p): nearest-voxel gather over the grid."""
        g = self.grid
        qx = g.broadcast_dot(matrix[0], (0.0, 0.0, 0.0))
        qy = g.broadcast_dot(matrix[1], (0.0, 0.0, 0.0))
        qz = g.broadcast_dot(matrix[2], (0.0, 0.0, 0.0))
        ix = np.floor((qx - g.origin[0]) / g.spacing).astype(np.int64)
        iy = np.floor((qy - g.origin[1]) / g.spacing).astype(np.int64)
        iz = np.floor((qz - g.origin[2]) / g.spacing).astype(np.int64)
        r = g.resolution
        valid = (
            (ix >= 0) & (ix < r) & (iy >= 0) & (iy < r) & (iz >= 0) & (iz < r)
        )
        occ = np.zeros((r, r, r), dtype=bool)
        occ[valid] = solid.occupancy[ix[valid], iy[valid], iz[valid]]
        return SolidVal(g.solid(occ))

    def op_rotate(self, s, axis, angle):
        c, sn = _cos_sin_deg(-float(angle))  # inverse map for gathering
        ax = _AXIS_VECS[axis]
        m = _axis_rotation_matrix(ax, c, sn)
        return self._resample(s.solid, m)

    def op_mirror(self, s, plane):
        normal_axis = {"XY": 2, "YZ": 0, "ZX": 1}[plane]
        m = np.eye(3)
        m[normal_axis, normal_axis] = -1.0
        return self._resample(s.solid, m)

    def op_scale(self, s, f):
        if f <= 0:
            raise EvalError("scale factor must be positive")
        return self._resample(s.solid, np.eye(3) / f)

    def op_shell(self, s, t):
        if t <= 0:
            raise EvalError("shell thickness must be positive")
        r = int(round(t / self.grid.spacing))
        eroded = s.solid.erode6(r)
        if r > 0:
            return SolidVal(s.solid.cut(eroded))
        return SolidVal(s.solid.cut(s.solid))

    def op_hole(self, s, px, py, pz, dx, dy, dz, r):
        length = math.sqrt(dx * dx + dy * dy + dz * dz)
        if length < 1e-12:
            raise EvalError("hole direction has zero length")
        if r <= 0:
            raise EvalError("hole radius must be positive")
        g = self.grid
        d = (dx / length, dy / length, dz / length)
        h = g.broadcast_dot(d, (px, py, pz))
        qx2 = ((g.xs - px) ** 2)[:, None, None]
        qy2 = ((g.ys - py) ** 2)[None, :, None]
        qz2 = ((g.zs - pz) ** 2)[None, None, :]
        rho2 = qx2 + qy2 + qz2 - h * h
        drill = (h >= 0.0) & (h <= length) & (rho2 <= r * r)
        return SolidVal(s.solid.with_occupancy(s.solid.occupancy & ~drill))

    def op_fillet(self, s, r):
        self.approximated.append(OpKind.FILLET)
        return SolidVal(s.solid)

    def op_chamfer(self, s, d):
        self.approximated.append(OpKind.CHAMFER)
        return SolidVal(s.solid)


def _ccw_convex(verts):
    """Return vertices in CCW order when strictly convex, else None."""
    n = len(verts)
    if n < 3:
        return None
    area2 = 0.0
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        area2 += x0 * y1 - x1 * y0
    if area2 == 0.0:
        return None
    if area2 < 0.0:
        verts = verts[::-1]
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        x2, y2 = verts[(i + 2) % n]
        if (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0) < -1e-12:
            return None
    return verts


def _axis_rotation_matrix(axis, c, s):
    x, y, z = axis
    if x:
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=np.float64)
    if y:
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=np.float64)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=np.float64)


_SKETCH_FIRST = {
    OpKind.MOVE_TO: "op_move_to", OpKind.LINE_TO: "op_line_to",
    OpKind.ARC_TO: "op_arc_to", OpKind.CLOSE: "op_close",
    OpKind.RECT: "op_rect", OpKind.CIRCLE: "op_circle",
    OpKind.POLYGON: "op_polygon", OpKind.RECT_ARRAY: "op_rect_array",
    OpKind.POLAR_ARRAY: "op_polar_array", OpKind.EXTRUDE: "op_extrude",
    OpKind.REVOLVE: "op_revolve", OpKind.SWEEP: "op_sweep",
}


def evaluate(script, resolution: int = DEFAULT_RESOLUTION, domain: Aabb = DEFAULT_DOMAIN):
    """Evaluate a flat script; returns (VoxelSolid, EvalReport).

    Raises EvalError for runtime failures (empty sketches, bad axes, ...);
    validity violations (component count, empty result, unsupported ops)
    come back in the report with success=False.
    """
    if not (16 <= resolution <= 512):
        raise ValueError("resolution must be within [16, 512]")
    if min(domain.sizes) <= 0:
        raise ValueError("domain must be nonempty")
    grid = _Grid(resolution, domain)
    interp = _Interp(grid)
    env = {}
    binds = {b.target: b.value for b in script.binds}
    env.update(binds)

    try:
        for stmt in script.statements:
            env[stmt.target] = _exec(interp, stmt, env, binds)
    except _Unsupported as unsup:
        report = EvalReport(
            success=False,
            unsupported_ops=[unsup.op],
            approximated_ops=list(dict.fromkeys(interp.approximated)),
            failure_reason="kernel-unsupported",
        )
        return grid.blank, report

    result = env[script.result_binding]
    if not isinstance(result, SolidVal):
        raise EvalError("result temporary is not a solid")
    solid = result.solid
    count = connected_components(solid)
    volume = solid.volume
    success = count == 1 and volume > 0.0
    reason = None
    if volume <= 0.0:
        reason = "empty-result"
    elif count != 1:
        reason = "multiple-components"
    report = EvalReport(
        success=success,
        solid_count=count,
        volume=volume,
        aabb=solid.aabb(),
        unsupported_ops=[],
        approximated_ops=list(dict.fromkeys(interp.approximated)),
        failure_reason=reason,
    )
    return solid, report


def _exec(interp: _Interp, stmt, env, binds):
    op = stmt.op
    vals = []
    for arg in stmt.args:
        if isinstance(arg, ast.RefArg):
            vals.append(env[arg.name])
        elif isinstance(arg, ast.StrArg):
            vals.append(arg.value)
        else:
            vals.append(_num(arg, binds))
    method = getattr(interp, f"op_{op.value}")
    if op in _SKETCH_FIRST and not isinstance(vals[0], (SketchVal, PlaneVal)):
        raise EvalError(f"{op.value} expects a sketch input")
    return method(*vals)


def try_evaluate(script, resolution: int = DEFAULT_RESOLUTION, domain: Aabb = DEFAULT_DOMAIN):
    """evaluate() with runtime failures folded into the report (solid=None)."""
    try:
        return evaluate(script, resolution, domain)
    except EvalError as err:
        return None, EvalReport(success=False, failure_reason=f"eval-error: {err}")
