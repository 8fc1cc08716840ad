"""Sparse voxel heatmap of registered scene points.

Points are keyed by ``floor(p / voxel_size)``.  A point landing in an occupied
voxel counts as a match: the cell's heat grows by the point's heat and its
mean position is refined.  Points in empty voxels open new cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from cuboidtrack.geometry import Cuboid, GeometryError, Intrinsics, Vec3, backproject_many

__all__ = [
    "HeatCell",
    "HeatmapGrid",
    "update_heatmap",
    "extract_boundaries",
    "merge_frame",
    "DEFAULT_VOXEL_SIZE",
    "DEFAULT_MIN_CELLS",
]

DEFAULT_VOXEL_SIZE = 0.02
DEFAULT_MIN_CELLS = 8

Key = tuple[int, int, int]


@dataclass(frozen=True)
class HeatCell:
    mean_position: Vec3
    heat: float
    sample_count: int


class HeatmapGrid:
    """Hash grid of :class:`HeatCell` keyed by integer voxel coordinates.

    The grid is updated in place; :func:`update_heatmap` and
    :func:`merge_frame` return the same object for chaining.
    """

    def __init__(self, voxel_size: float = DEFAULT_VOXEL_SIZE):
        if not (math.isfinite(voxel_size) and voxel_size > 0):
            raise GeometryError(f"voxel_size must be positive, got {voxel_size}")
        self.voxel_size = float(voxel_size)
        self.cells: dict[Key, HeatCell] = {}

    def __len__(self) -> int:
        return len(self.cells)

    def __repr__(self):
        return f"HeatmapGrid(voxel_size={self.voxel_size}, cells={len(self.cells)})"

    @property
    def total_heat(self) -> float:
        return math.fsum(c.heat for c in self.cells.values())

    def key_of(self, point: Iterable[float]) -> Key:
        s = self.voxel_size
        return tuple(int(math.floor(p / s)) for p in point)

    def add_points(self, points: np.ndarray, heat: float | np.ndarray = 1.0) -> "HeatmapGrid":
        """Insert an (N, 3) array of global-frame points."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        heats = np.broadcast_to(np.asarray(heat, dtype=np.float64), (len(pts),))
        if len(pts) == 0:
            return self
        finite = np.all(np.isfinite(pts), axis=1)
        if not finite.all():
            i = int(np.flatnonzero(~finite)[0])
            raise GeometryError(f"point {i} is not finite: {pts[i].tolist()}")
        if not (np.all(np.isfinite(heats)) and np.all(heats > 0)):
            raise GeometryError("point heat must be positive and finite")

        keys = np.floor(pts / self.voxel_size).astype(np.int64)
        uniq, inv, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inv = inv.reshape(-1)
        n = len(uniq)
        sums = np.stack(
            [np.bincount(inv, weights=pts[:, a], minlength=n) for a in range(3)], axis=1
        )
        heat_sums = np.bincount(inv, weights=heats, minlength=n)

        cells = self.cells
        for key_row, total, count, h in zip(
            uniq.tolist(), sums.tolist(), counts.tolist(), heat_sums.tolist()
        ):
            key = tuple(key_row)
            cell = cells.get(key)
            if cell is None:
                mean = [t / count for t in total]
                cells[key] = HeatCell(self._snap(mean, key), h, count)
            else:
                m = cell.sample_count
                total_count = m + count
                mean = [(m * old + t) / total_count for old, t in zip(cell.mean_position, total)]
                cells[key] = HeatCell(self._snap(mean, key), cell.heat + h, total_count)
        return self

    def _snap(self, mean: list[float], key: Key) -> Vec3:
        # rounding in the mean can push a coordinate across a voxel face
        s = self.voxel_size
        for a in range(3):
            k = key[a]
            m = mean[a]
            while math.floor(m / s) < k:
                m = math.nextafter(m, math.inf)
            while math.floor(m / s) > k:
                m = math.nextafter(m, -math.inf)
            mean[a] = m
        return Vec3(*mean)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Keys (C,3), means (C,3), heats (C,) and counts (C,) in sorted key order."""
        keys = sorted(self.cells)
        if not keys:
            return (np.empty((0, 3), np.int64), np.empty((0, 3)), np.empty(0), np.empty(0, np.int64))
        cells = [self.cells[k] for k in keys]
        return (
            np.array(keys, dtype=np.int64),
            np.array([tuple(c.mean_position) for c in cells]),
            np.array([c.heat for c in cells]),
            np.array([c.sample_count for c in cells], dtype=np.int64),
        )


def update_heatmap(grid: HeatmapGrid, points) -> HeatmapGrid:
    """Accumulate ``(Vec3, heat)`` pairs into ``grid``.

    Arrays are accepted too: ``points`` may be an (N, 3) array, which is
    inserted with unit heat.
    """
    if isinstance(points, np.ndarray):
        return grid.add_points(points)
    points = list(points)
    if not points:
        return grid
    xyz = np.array([tuple(p) for p, _ in points], dtype=np.float64)
    heats = np.array([h for _, h in points], dtype=np.float64)
    return grid.add_points(xyz, heats)


def merge_frame(grid: HeatmapGrid, frame, depth_samples, k: Intrinsics) -> HeatmapGrid:
    """Back-project ``(u, v, z)`` samples through ``k`` and ``frame.pose``."""
    samples = np.asarray(depth_samples, dtype=np.float64).reshape(-1, 3)
    if len(samples) == 0:
        return grid
    try:
        camera_pts = backproject_many(samples, k)
    except GeometryError as exc:
        raise GeometryError(f"frame {frame.frame_index}: {exc}") from exc
    return grid.add_points(frame.pose.apply(camera_pts), 1.0)


_HALF_NEIGHBOURS = np.array(
    [
        (dx, dy, dz)
        for dx in (-1, 0, 1)
        for dy in (-1, 0, 1)
        for dz in (-1, 0, 1)
        if (dx, dy, dz) > (0, 0, 0)
    ],
    dtype=np.int64,
)


def _components(keys: np.ndarray) -> np.ndarray:
    """26-connected component id per voxel key."""
    lo = keys.min(axis=0) - 1
    span = keys.max(axis=0) - lo + 2
    if float(span[0]) * float(span[1]) * float(span[2]) >= 2.0**62:
        raise GeometryError("heatmap extent too large to label")
    shifted = keys - lo
    stride = np.array([span[1] * span[2], span[2], 1], dtype=np.int64)
    codes = shifted @ stride
    order = np.argsort(codes)
    sorted_codes = codes[order]
    src, dst = [], []
    for offset in _HALF_NEIGHBOURS:
        target = codes + offset @ stride
        pos = np.searchsorted(sorted_codes, target)
        pos = np.minimum(pos, len(codes) - 1)
        hit = sorted_codes[pos] == target
        src.append(np.flatnonzero(hit))
        dst.append(order[pos[hit]])
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    n = len(keys)
    graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels


def extract_boundaries(
    grid: HeatmapGrid, min_heat: float, min_cells: int = DEFAULT_MIN_CELLS
) -> list[Cuboid]:
    """Axis-aligned boxes around 26-connected clusters of hot voxels.

    Components with fewer than ``min_cells`` voxels are dropped.  Boxes are
    returned ordered by their smallest voxel key.
    """
    if not min_heat > 0:
        raise ValueError("min_heat must be positive")
    keys = np.array(
        sorted(k for k, c in grid.cells.items() if c.heat >= min_heat), dtype=np.int64
    ).reshape(-1, 3)
    if len(keys) == 0:
        return []
    labels = _components(keys)
    s = grid.voxel_size
    order = np.argsort(labels, kind="stable")
    grouped = keys[order]
    _, starts, sizes = np.unique(labels[order], return_index=True, return_counts=True)
    lo = np.minimum.reduceat(grouped, starts, axis=0)
    hi = np.maximum.reduceat(grouped, starts, axis=0) + 1
    # keys are sorted, so each group's first member is its smallest key
    first_key = grouped[starts]
    boxes = []
    for i in np.lexsort(first_key.T[::-1]):
        if sizes[i] < min_cells:
            continue
        boxes.append(Cuboid(Vec3(*(lo[i] * s)), tuple((hi[i] - lo[i]) * s)))
    return boxes
