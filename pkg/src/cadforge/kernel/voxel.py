"""Voxel occupancy solids: the kernel's solid representation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainMismatchError
from .backends import count_components6


@dataclass(frozen=True)
class Aabb:
    min: tuple
    max: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.min)
        hi = tuple(float(v) for v in self.max)
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("Aabb min must be <= max componentwise")

    @staticmethod
    def cube(half: float) -> "Aabb":
        return Aabb((-half, -half, -half), (half, half, half))

    @property
    def sizes(self):
        return tuple(b - a for a, b in zip(self.min, self.max))

    @property
    def center(self):
        return tuple((a + b) / 2.0 for a, b in zip(self.min, self.max))

    @property
    def longest_side(self) -> float:
        return max(self.sizes)

    def is_cube(self) -> bool:
        s = self.sizes
        return abs(s[0] - s[1]) < 1e-12 and abs(s[1] - s[2]) < 1e-12


DEFAULT_DOMAIN = Aabb.cube(110.0)
DEFAULT_RESOLUTION = 128


class VoxelSolid:
    """Immutable cubic occupancy grid with a physical placement.

    Voxel (i, j, k) covers [origin + i*spacing, origin + (i+1)*spacing) per
    axis; its center sits at origin + (i + 0.5) * spacing.
    """

    __slots__ = ("resolution", "origin", "spacing", "occupancy")

    def __init__(self, resolution: int, origin, spacing: float, occupancy: np.ndarray):
        occupancy = np.asarray(occupancy, dtype=bool)
        if occupancy.shape != (resolution, resolution, resolution):
            raise ValueError("occupancy shape must be resolution^3")
        if spacing <= 0:
            raise ValueError("spacing must be positive")
        self.resolution = int(resolution)
        self.origin = tuple(float(v) for v in origin)
        self.spacing = float(spacing)
        self.occupancy = occupancy
        occupancy.setflags(write=False)

    @staticmethod
    def empty(resolution: int, domain: Aabb) -> "VoxelSolid":
        if not domain.is_cube():
            raise ValueError("evaluation domain must be a cube")
        spacing = domain.sizes[0] / resolution
        occ = np.zeros((resolution,) * 3, dtype=bool)
        return VoxelSolid(resolution, domain.min, spacing, occ)

    def with_occupancy(self, occ: np.ndarray) -> "VoxelSolid":
        return VoxelSolid(self.resolution, self.origin, self.spacing, occ)

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.origin[axis] + (np.arange(self.resolution) + 0.5) * self.spacing

    @property
    def domain(self) -> Aabb:
        side = self.resolution * self.spacing
        return Aabb(self.origin, tuple(o + side for o in self.origin))

    @property
    def count(self) -> int:
        return int(self.occupancy.sum())

    @property
    def volume(self) -> float:
        return self.count * self.spacing ** 3

    def is_empty(self) -> bool:
        return not self.occupancy.any()

    def index_bounds(self):
        """Per-axis (lo, hi) index extents of the set voxels; None if empty.

        Uses axis projections, much cheaper than materializing nonzero
        indices on large grids.
        """
        occ = self.occupancy
        bounds = []
        for axis in range(3):
            other = tuple(a for a in range(3) if a != axis)
            line = occ.any(axis=other)
            if not line.any():
                return None
            lo = int(line.argmax())
            hi = int(len(line) - 1 - line[::-1].argmax())
            bounds.append((lo, hi))
        return bounds

    def aabb(self):
        """Tight voxel-cell bound of the set voxels; None when empty."""
        bounds = self.index_bounds()
        if bounds is None:
            return None
        mins = tuple(self.origin[i] + bounds[i][0] * self.spacing for i in range(3))
        maxs = tuple(self.origin[i] + (bounds[i][1] + 1) * self.spacing for i in range(3))
        return Aabb(mins, maxs)

    def _check_same_grid(self, other: "VoxelSolid"):
        if (
            self.resolution != other.resolution
            or self.origin != other.origin
            or self.spacing != other.spacing
        ):
            raise DomainMismatchError("voxel grids do not share a domain")

    def union(self, other: "VoxelSolid") -> "VoxelSolid":
        self._check_same_grid(other)
        return self.with_occupancy(self.occupancy | other.occupancy)

    def cut(self, other: "VoxelSolid") -> "VoxelSolid":
        self._check_same_grid(other)
        return self.with_occupancy(self.occupancy & ~other.occupancy)

    def intersect(self, other: "VoxelSolid") -> "VoxelSolid":
        self._check_same_grid(other)
        return self.with_occupancy(self.occupancy & other.occupancy)

    def shift_voxels(self, shift) -> "VoxelSolid":
        """Translate by an integer number of voxels; clipped at the domain."""
        occ = self.occupancy
        out = np.zeros_like(occ)
        r = self.resolution
        src = []
        dst = []
        for s in shift:
            s = int(s)
            if abs(s) >= r:
                return self.with_occupancy(out)
            if s >= 0:
                src.append(slice(0, r - s))
                dst.append(slice(s, r))
            else:
                src.append(slice(-s, r))
                dst.append(slice(0, r + s))
        out[tuple(dst)] = occ[tuple(src)]
        return self.with_occupancy(out)

    def erode6(self, iterations: int) -> "VoxelSolid":
        """Iterated erosion with the 6-neighbor cross structuring element."""
        if iterations <= 0:
            return self
        from scipy import ndimage

        occ = ndimage.binary_erosion(
            self.occupancy,
            structure=ndimage.generate_binary_structure(3, 1),
            iterations=iterations,
            border_value=0,
        )
        return self.with_occupancy(occ)


def connected_components(v: VoxelSolid) -> int:
    """6-connectivity component count (0 for an empty grid)."""
    return count_components6(v.occupancy)


def iou_grids(a: VoxelSolid, b: VoxelSolid) -> float:
    """Raw IoU in [0, 1]; 1.0 when both grids are empty."""
    a._check_same_grid(b)
    inter = int((a.occupancy & b.occupancy).sum())
    union = int((a.occupancy | b.occupancy).sum())
    if union == 0:
        return 1.0
    return inter / union
