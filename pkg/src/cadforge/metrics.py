"""Evaluation metrics: rigid unit normalization, Chamfer distance,
volumetric IoU, invalid rate, median aggregation, and the scalar reward."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateExtentError,
    DomainMismatchError,
    EmptyListError,
    RangeError,
)
from .kernel import Aabb, Mesh, VoxelSolid, sample_surface, voxelize_mesh

UNIT_DOMAIN = Aabb((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
CHAMFER_POINTS = 8192
IOU_RESOLUTION = 64


@dataclass
class MetricReport:
    cd: float = None          # x10^3, squared-distance convention
    iou: float = None         # percent
    valid: bool = False
    notes: list = field(default_factory=list)


def normalize_unit(mesh: Mesh) -> Mesh:
    """Translate the AABB center to (0.5, 0.5, 0.5) and scale the longest
    side to 1 (rigid + uniform scale only)."""
    lo, hi = mesh.bounds()
    side = float((hi - lo).max())
    if side <= 0.0:
        raise DegenerateExtentError("mesh has zero extent")
    center = (lo + hi) / 2.0
    scale = 1.0 / side
    return mesh.transformed(scale, 0.5 - center * scale)


def chamfer(a: Mesh, b: Mesh, n: int = CHAMFER_POINTS, seed: int = 0) -> float:
    """Symmetric mean squared nearest-neighbor distance, scaled by 10^3.

    Both meshes are sampled with the same seed, so chamfer(m, m) is exactly
    zero and the sum form is symmetric under argument swap.
    """
    pa = sample_surface(a, n, seed)
    pb = sample_surface(b, n, seed)
    d_ab = cKDTree(pb).query(pa, k=1)[0]
    d_ba = cKDTree(pa).query(pb, k=1)[0]
    return float((np.mean(d_ab ** 2) + np.mean(d_ba ** 2)) * 1e3)


def chamfer_bruteforce(a: Mesh, b: Mesh, n: int = 256, seed: int = 0) -> float:
    """Quadratic-time oracle for the spatial-index implementation."""
    pa = sample_surface(a, n, seed)
    pb = sample_surface(b, n, seed)
    d2 = ((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2)
    return float((d2.min(axis=1).mean() + d2.min(axis=0).mean()) * 1e3)


def iou(a: VoxelSolid, b: VoxelSolid) -> float:
    """Volumetric IoU as a percentage; 100 when both grids are empty."""
    if (
        a.resolution != b.resolution
        or a.origin != b.origin
        or a.spacing != b.spacing
    ):
        raise DomainMismatchError("grids must share resolution and domain")
    union = int((a.occupancy | b.occupancy).sum())
    if union == 0:
        return 100.0
    inter = int((a.occupancy & b.occupancy).sum())
    return 100.0 * inter / union


def voxelize_unit(mesh: Mesh, resolution: int = IOU_RESOLUTION) -> VoxelSolid:
    """Voxelize a unit-normalized mesh into [0,1]^3."""
    return voxelize_mesh(mesh, resolution, UNIT_DOMAIN)


def invalid_rate(reports) -> float:
    reports = list(reports)
    if not reports:
        raise EmptyListError("no reports")
    failures = sum(1 for r in reports if not r.success)
    return 100.0 * failures / len(reports)


def median_cd(values) -> float:
    """Lower median (even-length lists take the smaller middle value)."""
    values = sorted(values)
    if not values:
        raise EmptyListError("no values")
    return float(values[(len(values) - 1) // 2])


def reward(compiled: bool, iou01: float = None) -> float:
    """Scalar reward: 10 * IoU for compiling code, -10 otherwise."""
    if not compiled:
        return -10.0
    if iou01 is None or not (0.0 <= iou01 <= 1.0):
        raise RangeError("iou01 must lie in [0, 1] when compiled")
    return 10.0 * iou01


def evaluate_pair(
    pred: Mesh = None,
    target: Mesh = None,
    pred_valid: bool = True,
    n_points: int = CHAMFER_POINTS,
    seed: int = 0,
    iou_resolution: int = IOU_RESOLUTION,
    notes=(),
) -> MetricReport:
    """CD + IoU of a prediction against a target, both unit-normalized.

    An invalid prediction (or a missing mesh) yields valid=False with no
    metric values, matching how the invalid rate is counted.
    """
    report = MetricReport(notes=list(notes))
    if not pred_valid or pred is None or len(pred) == 0:
        return report
    a = normalize_unit(pred)
    b = normalize_unit(target)
    report.cd = chamfer(a, b, n_points, seed)
    report.iou = iou(voxelize_unit(a, iou_resolution), voxelize_unit(b, iou_resolution))
    report.valid = True
    return report


def summarize(reports) -> dict:
    """Corpus summary: median CD over valid pairs, mean IoU, invalid rate."""
    reports = list(reports)
    if not reports:
        raise EmptyListError("no reports")
    valid = [r for r in reports if r.valid]
    ir = 100.0 * (len(reports) - len(valid)) / len(reports)
    out = {"ir": ir, "n": len(reports), "n_valid": len(valid)}
    if valid:
        out["median_cd"] = median_cd([r.cd for r in valid])
        out["mean_iou"] = float(np.mean([r.iou for r in valid]))
    else:
        out["median_cd"] = None
        out["mean_iou"] = None
    return out
