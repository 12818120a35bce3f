"""Multi-view depth-as-intensity rendering of voxel solids.

Eight canonical views of the [-100, 100]^3 working cube: six orthographic
axis views plus two isometric ray-cast views, each 238x238 with nearer
surfaces brighter (background 0, foreground >= 1). Views -Z, +Y and +X are
horizontally mirrored. A 2x4 grid concatenates the views for consumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CountError, OutOfDomainError
from .kernel import VoxelSolid
from .kernel.backends import iso_first_hit

IMAGE_SIZE = 238
CUBE_HALF = 100.0
VIEW_NAMES = ("+X", "-X", "+Y", "-Y", "+Z", "-Z", "ISO1", "ISO2")
MIRRORED_VIEWS = frozenset({"-Z", "+Y", "+X"})

_S3 = math.sqrt(3.0)
_S6 = math.sqrt(6.0)
_S2 = math.sqrt(2.0)

# right (image +x), up (image +y), ray direction (into the scene).
_BASES = {
    "+X": ((0, 1, 0), (0, 0, 1), (-1, 0, 0)),
    "-X": ((0, -1, 0), (0, 0, 1), (1, 0, 0)),
    "+Y": ((-1, 0, 0), (0, 0, 1), (0, -1, 0)),
    "-Y": ((1, 0, 0), (0, 0, 1), (0, 1, 0)),
    "+Z": ((1, 0, 0), (0, 1, 0), (0, 0, -1)),
    "-Z": ((-1, 0, 0), (0, 1, 0), (0, 0, 1)),
    "ISO1": (
        (1 / _S2, -1 / _S2, 0),
        (-1 / _S6, -1 / _S6, 2 / _S6),
        (1 / _S3, 1 / _S3, 1 / _S3),
    ),
    "ISO2": (
        (-1 / _S2, 1 / _S2, 0),
        (1 / _S6, 1 / _S6, 2 / _S6),
        (-1 / _S3, -1 / _S3, 1 / _S3),
    ),
}


@dataclass(frozen=True)
class ViewSpec:
    direction: str
    mirrored: bool

    @staticmethod
    def canonical(direction: str) -> "ViewSpec":
        if direction not in VIEW_NAMES:
            raise ValueError(f"unknown view {direction!r}")
        return ViewSpec(direction, direction in MIRRORED_VIEWS)


def _check_domain(solid: VoxelSolid):
    aabb = solid.aabb()
    if aabb is None:
        return
    slack = 2.0 * solid.spacing
    if max(max(aabb.max), -min(aabb.min)) > CUBE_HALF + slack:
        raise OutOfDomainError("solid exceeds the working cube")


def _pixel_axes():
    step = 2.0 * CUBE_HALF / IMAGE_SIZE
    us = -CUBE_HALF + (np.arange(IMAGE_SIZE) + 0.5) * step
    vs = CUBE_HALF - (np.arange(IMAGE_SIZE) + 0.5) * step  # row 0 at the top
    return us, vs


def _ortho_depth(solid: VoxelSolid, right, up, direction) -> np.ndarray:
    d_axis = int(np.nonzero(direction)[0][0])
    d_sign = int(np.sign(direction[d_axis]))
    us, vs = _pixel_axes()
    other = [a for a in range(3) if a != d_axis]
    coords = {}
    for a in other:
        coords[a] = vs[:, None] * up[a] + us[None, :] * right[a]
    res = solid.resolution
    idx = {
        a: np.floor((coords[a] - solid.origin[a]) / solid.spacing).astype(np.int64)
        for a in other
    }
    for a in other:
        idx[a] = np.clip(idx[a], 0, res - 1)
    occ = np.moveaxis(solid.occupancy, d_axis, 2)
    if d_axis == 0:
        occ = occ  # moveaxis leaves (other0, other1, ray)
    cols = occ[idx[other[0]], idx[other[1]], :]
    if d_sign < 0:
        cols = cols[:, :, ::-1]
    hit = cols.any(axis=2)
    first = cols.argmax(axis=2)
    if d_sign < 0:
        centers = solid.origin[d_axis] + (res - 1 - first + 0.5) * solid.spacing
        t = CUBE_HALF - centers
    else:
        centers = solid.origin[d_axis] + (first + 0.5) * solid.spacing
        t = centers + CUBE_HALF
    t = np.clip(t, 0.0, 2.0 * CUBE_HALF)
    return np.where(hit, t, np.inf)


def _iso_depth(solid: VoxelSolid, right, up, direction) -> np.ndarray:
    half = CUBE_HALF * _S3  # circumscribed extent
    step = 2.0 * half / IMAGE_SIZE
    us = -half + (np.arange(IMAGE_SIZE) + 0.5) * step
    vs = half - (np.arange(IMAGE_SIZE) + 0.5) * step
    right = np.asarray(right)
    up = np.asarray(up)
    direction = np.asarray(direction)
    grid_u, grid_v = np.meshgrid(us, vs)
    starts = (
        grid_u[..., None] * right + grid_v[..., None] * up - half * direction
    ).reshape(-1, 3)
    march = solid.spacing / 2.0
    t = iso_first_hit(
        solid.occupancy, np.array(solid.origin), solid.spacing,
        starts, direction, 2.0 * half, march,
    )
    return t.reshape(IMAGE_SIZE, IMAGE_SIZE)


def _intensity(t: np.ndarray, full_depth: float, near_bright: bool) -> np.ndarray:
    img = np.zeros(t.shape, dtype=np.uint8)
    hit = np.isfinite(t)
    frac = t[hit] / full_depth
    if not near_bright:
        frac = 1.0 - frac
    vals = np.round(255.0 * (1.0 - frac))
    img[hit] = np.maximum(1, vals).astype(np.uint8)
    return img


def render_basis_view(solid: VoxelSolid, right, up, direction,
                      near_bright: bool = True) -> np.ndarray:
    """Depth image for an arbitrary orthonormal basis (no mirroring).

    Also the override point for non-canonical camera setups: any
    orthonormal (right, up, direction) triple renders, isometric or not.
    """
    direction = np.asarray(direction, dtype=np.float64)
    axisness = np.abs(direction)
    if np.count_nonzero(axisness > 1e-12) == 1:
        t = _ortho_depth(solid, np.asarray(right), np.asarray(up), direction)
        return _intensity(t, 2.0 * CUBE_HALF, near_bright)
    t = _iso_depth(solid, right, up, direction)
    return _intensity(t, 2.0 * CUBE_HALF * _S3, near_bright)


def render_view(solid: VoxelSolid, spec: ViewSpec, near_bright: bool = True) -> np.ndarray:
    """238x238 uint8 depth image for one canonical view."""
    _check_domain(solid)
    right, up, direction = _BASES[spec.direction]
    img = render_basis_view(solid, right, up, direction, near_bright)
    if spec.mirrored:
        img = np.fliplr(img)
    return img


def render_views(solid: VoxelSolid, views: int = 8, near_bright: bool = True):
    """All eight canonical views; 7-view mode blanks the second isometric."""
    if views not in (7, 8):
        raise ValueError("views must be 7 or 8")
    images = []
    for name in VIEW_NAMES:
        if views == 7 and name == "ISO2":
            images.append(np.zeros((IMAGE_SIZE, IMAGE_SIZE), dtype=np.uint8))
        else:
            images.append(render_view(solid, ViewSpec.canonical(name), near_bright))
    return images


def make_grid(images) -> np.ndarray:
    """2x4 grid: row 1 = +X -X +Y -Y, row 2 = +Z -Z ISO1 ISO2."""
    images = list(images)
    if len(images) != 8:
        raise CountError(f"grid needs 8 views, got {len(images)}")
    for img in images:
        if img.shape != (IMAGE_SIZE, IMAGE_SIZE):
            raise CountError("views must be 238x238")
    top = np.concatenate(images[:4], axis=1)
    bottom = np.concatenate(images[4:], axis=1)
    return np.concatenate([top, bottom], axis=0)


def render_grid(solid: VoxelSolid, views: int = 8, near_bright: bool = True) -> np.ndarray:
    return make_grid(render_views(solid, views, near_bright))


def write_pgm(img: np.ndarray) -> bytes:
    """Binary PGM (P5), maxval 255, byte-exact across platforms."""
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    if not data.startswith(b"P5"):
        raise ValueError("not a binary PGM")
    parts = data.split(b"\n", 3)
    w, h = (int(v) for v in parts[1].split())
    maxval = int(parts[2])
    if maxval != 255:
        raise ValueError("unsupported maxval")
    return np.frombuffer(parts[3], dtype=np.uint8, count=w * h).reshape(h, w)
