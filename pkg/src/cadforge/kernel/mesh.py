"""Triangle meshes: voxel surface extraction, binary STL I/O, point sampling."""

from __future__ import annotations

import struct

import numpy as np

from ..errors import EmptyMeshError, EmptySolidError
from .voxel import VoxelSolid


class Mesh:
    """Triangle soup; vertices shape (n, 3, 3), per-triangle unit normals (n, 3)."""

    __slots__ = ("triangles", "normals")

    def __init__(self, triangles: np.ndarray, normals: np.ndarray = None):
        triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3)
        if normals is None:
            normals = _face_normals(triangles)
        self.triangles = triangles
        self.normals = np.asarray(normals, dtype=np.float64).reshape(-1, 3)

    def __len__(self):
        return len(self.triangles)

    def areas(self) -> np.ndarray:
        a = self.triangles[:, 1] - self.triangles[:, 0]
        b = self.triangles[:, 2] - self.triangles[:, 0]
        return 0.5 * np.linalg.norm(np.cross(a, b), axis=1)

    def bounds(self):
        pts = self.triangles.reshape(-1, 3)
        return pts.min(axis=0), pts.max(axis=0)

    def transformed(self, scale: float, offset) -> "Mesh":
        return Mesh(self.triangles * scale + np.asarray(offset), self.normals)


def _face_normals(triangles):
    a = triangles[:, 1] - triangles[:, 0]
    b = triangles[:, 2] - triangles[:, 0]
    n = np.cross(a, b)
    norms = np.linalg.norm(n, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return n / norms


# Exposed-face triangulation: per (axis, side) the four cell corners in CCW
# order as seen from outside the voxel.
_FACE_CORNERS = {
    (0, -1): ((0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)),
    (0, +1): ((1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)),
    (1, -1): ((0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)),
    (1, +1): ((0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)),
    (2, -1): ((0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)),
    (2, +1): ((0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)),
}


def to_stl_mesh(v: VoxelSolid) -> Mesh:
    """Exposed voxel faces as a closed triangle mesh (two per face)."""
    if v.is_empty():
        raise EmptySolidError("cannot mesh an empty solid")
    occ = v.occupancy
    tris = []
    origin = np.array(v.origin)
    sp = v.spacing
    for axis, sign in _FACE_CORNERS:
        shifted = np.zeros_like(occ)
        r = occ.shape[axis]
        src = [slice(None)] * 3
        dst = [slice(None)] * 3
        if sign < 0:
            src[axis] = slice(0, r - 1)
            dst[axis] = slice(1, r)
        else:
            src[axis] = slice(1, r)
            dst[axis] = slice(0, r - 1)
        shifted[tuple(dst)] = occ[tuple(src)]
        exposed = occ & ~shifted
        idx = np.stack(np.nonzero(exposed), axis=1)
        if idx.size == 0:
            continue
        corners = np.array(_FACE_CORNERS[(axis, sign)], dtype=np.float64)
        quad = (idx[:, None, :] + corners[None, :, :]) * sp + origin
        tris.append(quad[:, (0, 1, 2), :])
        tris.append(quad[:, (0, 2, 3), :])
    return Mesh(np.concatenate(tris, axis=0))


def write_stl(mesh: Mesh) -> bytes:
    """Binary STL: 80-byte header, uint32 count, little-endian records."""
    n = len(mesh)
    header = b"cadforge voxel surface".ljust(80, b"\0")
    out = bytearray(header)
    out += struct.pack("<I", n)
    normals = mesh.normals.astype("<f4")
    tris = mesh.triangles.astype("<f4")
    record = np.zeros(n, dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    record["n"] = normals
    record["v"] = tris
    out += record.tobytes()
    return bytes(out)


def read_stl(data: bytes) -> Mesh:
    if len(data) < 84:
        raise EmptyMeshError("not a binary STL payload")
    (n,) = struct.unpack_from("<I", data, 80)
    record = np.frombuffer(
        data, dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")],
        count=n, offset=84,
    )
    if n == 0:
        raise EmptyMeshError("STL contains no triangles")
    return Mesh(record["v"].astype(np.float64), record["n"].astype(np.float64))


def sample_surface(mesh: Mesh, n: int, seed: int) -> np.ndarray:
    """Area-weighted uniform surface samples, deterministic for a seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(mesh) == 0:
        raise EmptyMeshError("cannot sample an empty mesh")
    areas = mesh.areas()
    total = areas.sum()
    if total <= 0:
        raise EmptyMeshError("mesh has zero surface area")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, areas / total)
    chosen = np.repeat(np.arange(len(mesh)), counts)
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    tri = mesh.triangles[chosen]
    return (
        tri[:, 0]
        + u[:, None] * (tri[:, 1] - tri[:, 0])
        + v[:, None] * (tri[:, 2] - tri[:, 0])
    )


def edge_manifold(mesh: Mesh, decimals: int = 9) -> bool:
    """True when every undirected edge is shared by exactly two triangles."""
    tris = np.round(mesh.triangles, decimals)
    edges = {}
    for tri in tris:
        for i in range(3):
            a = tuple(tri[i])
            b = tuple(tri[(i + 1) % 3])
            key = (min(a, b), max(a, b))
            edges[key] = edges.get(key, 0) + 1
    return all(c == 2 for c in edges.values())
