"""Interval overlap, box volumes and the two union conventions.

Run: python demos/01_overlap_basics.py
"""

import numpy as np

from cuboidtrack import (
    Cuboid,
    Interval,
    RotationEuler,
    UnionMode,
    Vec3,
    cuboid_intersection_volume,
    cuboid_union_volume,
    gravity_align,
    interval_intersection,
    interval_union,
    iou3d,
    iou_matrix,
)

# Two intervals [0, 10] and [5, 15] share 5 units and span 15.
a, b = Interval(0, 10), Interval(5, 10)
print(f"interval overlap {interval_intersection(a, b)}, union {interval_union(a, b)}")

# Two 2 m cubes offset by 1 m on every axis share a 1 m cube.
A = Cuboid(Vec3(0, 0, 0), (2, 2, 2))
B = Cuboid(Vec3(1, 1, 1), (2, 2, 2))
print(f"intersection volume {cuboid_intersection_volume(A, B)}")

# The default union multiplies per-axis unions (3 * 3 * 3 = 27), which is
# looser than the true union volume 8 + 8 - 1 = 15.
for mode in UnionMode:
    print(f"{mode.value:>20}: union {cuboid_union_volume(A, B, mode):5.1f}  IoU {iou3d(A, B, mode):.4f}")

# Many pairs at once, from (N, 6) arrays of anchors and extents.
boxes = np.array([c.aabb_params for c in (A, B, Cuboid(Vec3(5, 0, 0), (1, 1, 1)))])
print(iou_matrix(boxes, boxes).round(4))

# Rotated proposals are reduced to their axis-aligned hull before matching.
tilted = Cuboid(Vec3(0, 0, 0), (1, 1, 1), RotationEuler(0, 0, 0.7853981633974483))
hull = gravity_align(tilted)
print(f"45 deg yawed unit cube -> hull extents {tuple(round(e, 4) for e in hull.extents)}")
