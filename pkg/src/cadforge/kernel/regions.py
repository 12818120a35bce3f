"""2-D sketch regions as point-membership functions.

A sketch accumulates closed loops (even-odd filling) and array replications.
Membership is evaluated lazily on workplane-local coordinates, so extrude,
revolve, sweep and loft all share one analytic region test. Analytic loop
kinds (rect, circle) use exact comparisons; paths and polygons go through
the crossing-parity backend, with arcs flattened to a chord tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EvalError
from .backends import point_in_loops


@dataclass(frozen=True)
class RectLoop:
    cx: float
    cy: float
    w: float
    h: float


@dataclass(frozen=True)
class CircleLoop:
    cx: float
    cy: float
    r: float


@dataclass(frozen=True)
class PolyLoop:
    """Closed polyline; segments are ('line', x, y) or ('arc', mx, my, ex, ey)."""
    start: tuple
    segments: tuple


@dataclass(frozen=True)
class RectArrayOp:
    dx: float
    dy: float
    nx: int
    ny: int


@dataclass(frozen=True)
class PolarArrayOp:
    n: int
    span_deg: float


def _arc_points(p0, mid, end, tol):
    """Flatten the arc through three points to a vertex chain (excl. p0)."""
    ax, ay = p0
    bx, by = mid
    cx, cy = end
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-12:
        return [end]
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay)
          + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx)
          + (cx * cx + cy * cy) * (bx - ax)) / d
    r = math.hypot(ax - ux, ay - uy)
    if r < 1e-12:
        return [end]
    t0 = math.atan2(ay - uy, ax - ux)
    tm = math.atan2(by - uy, bx - ux)
    t1 = math.atan2(cy - uy, cx - ux)

    def ccw_span(a, b):
        return (b - a) % (2.0 * math.pi)

    if ccw_span(t0, tm) <= ccw_span(t0, t1):
        sweep = ccw_span(t0, t1)
    else:
        sweep = -((t0 - t1) % (2.0 * math.pi))
    tol = min(tol, r)
    step = 2.0 * math.acos(max(-1.0, 1.0 - tol / r))
    nseg = max(2, int(math.ceil(abs(sweep) / max(step, 1e-6))))
    pts = []
    for i in range(1, nseg):
        t = t0 + sweep * i / nseg
        pts.append((ux + r * math.cos(t), uy + r * math.sin(t)))
    pts.append(end)
    return pts


def _poly_vertices(loop: PolyLoop, tol: float):
    verts = [loop.start]
    for seg in loop.segments:
        if seg[0] == "line":
            verts.append((seg[1], seg[2]))
        else:
            verts.extend(_arc_points(verts[-1], (seg[1], seg[2]), (seg[3], seg[4]), tol))
    if len(verts) > 1 and verts[0] == verts[-1]:
        verts.pop()
    return verts


def regular_polygon_vertices(n: int, r: float, cx: float, cy: float):
    return [
        (cx + r * math.cos(2.0 * math.pi * k / n), cy + r * math.sin(2.0 * math.pi * k / n))
        for k in range(n)
    ]


class Region:
    """Ordered element list: loops XOR in, array ops replicate what precedes."""

    __slots__ = ("elements",)

    def __init__(self, elements=()):
        self.elements = tuple(elements)

    def add(self, element) -> "Region":
        return Region(self.elements + (element,))

    def is_trivially_empty(self) -> bool:
        return not any(
            isinstance(e, (RectLoop, CircleLoop, PolyLoop)) for e in self.elements
        )

    def contains(self, u: np.ndarray, v: np.ndarray, tol: float) -> np.ndarray:
        return _membership(self.elements, u, v, tol)

    def single_polygon(self, tol: float):
        """The vertex list when the region is exactly one polygonal loop."""
        if len(self.elements) != 1:
            return None
        el = self.elements[0]
        if isinstance(el, RectLoop):
            w2, h2 = el.w / 2.0, el.h / 2.0
            return [
                (el.cx - w2, el.cy - h2),
                (el.cx + w2, el.cy - h2),
                (el.cx + w2, el.cy + h2),
                (el.cx - w2, el.cy + h2),
            ]
        if isinstance(el, PolyLoop):
            if any(seg[0] == "arc" for seg in el.segments):
                return None
            return _poly_vertices(el, tol)
        return None


def _membership(elements, u, v, tol):
    if not elements:
        return np.zeros(u.shape, dtype=bool)
    last = elements[-1]
    rest = elements[:-1]
    if isinstance(last, RectLoop):
        inside = (np.abs(u - last.cx) <= last.w / 2.0) & (np.abs(v - last.cy) <= last.h / 2.0)
        return _membership(rest, u, v, tol) ^ inside
    if isinstance(last, CircleLoop):
        inside = (u - last.cx) ** 2 + (v - last.cy) ** 2 <= last.r ** 2
        return _membership(rest, u, v, tol) ^ inside
    if isinstance(last, PolyLoop):
        verts = np.asarray(_poly_vertices(last, tol), dtype=np.float64)
        if len(verts) < 3:
            raise EvalError("degenerate loop with fewer than 3 vertices")
        pts = np.stack([u.ravel(), v.ravel()], axis=1)
        offsets = np.array([0, len(verts)], dtype=np.int64)
        inside = point_in_loops(pts, verts, offsets).reshape(u.shape)
        return _membership(rest, u, v, tol) ^ inside
    if isinstance(last, RectArrayOp):
        out = np.zeros(u.shape, dtype=bool)
        for i in range(last.nx):
            for j in range(last.ny):
                out |= _membership(rest, u - i * last.dx, v - j * last.dy, tol)
        return out
    if isinstance(last, PolarArrayOp):
        out = np.zeros(u.shape, dtype=bool)
        span = math.radians(last.span_deg)
        for i in range(last.n):
            theta = span * i / last.n
            c, s = math.cos(theta), math.sin(theta)
            if i == 0:
                out |= _membership(rest, u, v, tol)
            else:
                # Inverse rotation of the sample points.
                out |= _membership(rest, c * u + s * v, -s * u + c * v, tol)
        return out
    raise TypeError(f"unknown region element {last!r}")
