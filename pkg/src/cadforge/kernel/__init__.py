"""Voxel geometry kernel: evaluation, validity, meshing, voxelization."""

from .backends import BACKEND
from .evaluate import EvalReport, evaluate, plane_frame, try_evaluate
from .mesh import (
    Mesh,
    edge_manifold,
    read_stl,
    sample_surface,
    to_stl_mesh,
    write_stl,
)
from .voxel import (
    Aabb,
    DEFAULT_DOMAIN,
    DEFAULT_RESOLUTION,
    VoxelSolid,
    connected_components,
    iou_grids,
)
from .voxelize import voxelize_mesh


def to_stl(v: VoxelSolid) -> Mesh:
    """Alias for the exposed-face mesher."""
    return to_stl_mesh(v)


__all__ = [
    "Aabb", "BACKEND", "DEFAULT_DOMAIN", "DEFAULT_RESOLUTION", "EvalReport",
    "Mesh", "VoxelSolid", "connected_components", "edge_manifold", "evaluate",
    "iou_grids", "plane_frame", "read_stl", "sample_surface", "to_stl",
    "to_stl_mesh", "try_evaluate", "voxelize_mesh", "write_stl",
]
