"""Cuboids, poses and axis-aligned 3D intersection over union.

Boxes are stored as ``[x, y, z, l, w, h, rx, ry, rz]``: the minimum corner,
the extents along x/y/z and an intrinsic Z-Y-X Euler rotation applied about
the box centroid.  IoU is only defined for boxes whose rotation has been
folded into an axis-aligned hull (see :func:`gravity_align`).

Two union conventions are supported:

* ``paper``: product of the three per-axis interval unions.  This is larger
  than the true union volume whenever the boxes are offset on more than one
  axis, so scores come out lower than the usual Jaccard index.
* ``inclusion_exclusion``: ``vol(a) + vol(b) - vol(a & b)``.

The batched helpers (:func:`iou_matrix`, :func:`align_and_transform`) use the
same arithmetic, in the same order, as the scalar functions, so both paths
return bit-identical floats.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GeometryError",
    "UnalignedCuboidError",
    "UnionMode",
    "Vec3",
    "Interval",
    "RotationEuler",
    "Cuboid",
    "Pose",
    "Intrinsics",
    "interval_intersection",
    "interval_union",
    "cuboid_intersection_volume",
    "cuboid_union_volume",
    "iou3d",
    "iou_matrix",
    "rotation_matrix",
    "gravity_align",
    "transform_to_global",
    "align_and_transform",
    "backproject",
    "backproject_many",
]

POSE_TOLERANCE = 1e-6


class GeometryError(ValueError):
    """Raised when a geometric value violates its invariants."""


class UnalignedCuboidError(GeometryError):
    """Raised when an axis-aligned operation receives a rotated cuboid."""


class UnionMode(str, enum.Enum):
    PAPER = "paper"
    INCLUSION_EXCLUSION = "inclusion_exclusion"

    @classmethod
    def parse(cls, value: "str | UnionMode") -> "UnionMode":
        if isinstance(value, cls):
            return value
        if value == "ie":
            return cls.INCLUSION_EXCLUSION
        try:
            return cls(value)
        except ValueError:
            raise GeometryError(
                f"unknown union mode {value!r} (expected 'paper' or 'ie')"
            ) from None


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise GeometryError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True, slots=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        x, y, z = float(self.x), float(self.y), float(self.z)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise GeometryError(f"coordinates must be finite, got {(x, y, z)}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    def __iter__(self):
        yield self.x
        yield self.y
        yield self.z

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True, slots=True)
class Interval:
    start: float
    length: float

    def __post_init__(self):
        object.__setattr__(self, "start", _finite("start", self.start))
        length = _finite("length", self.length)
        if length <= 0:
            raise GeometryError(f"interval length must be positive, got {length}")
        object.__setattr__(self, "length", length)

    @property
    def end(self) -> float:
        return self.start + self.length


@dataclass(frozen=True, slots=True)
class RotationEuler:
    rx: float = 0.0
    ry: float = 0.0
    rz: float = 0.0

    def __post_init__(self):
        for name in ("rx", "ry", "rz"):
            value = _finite(name, getattr(self, name))
            if not -math.pi <= value <= math.pi:
                raise GeometryError(f"{name}={value} outside [-pi, pi]")
            object.__setattr__(self, name, value)

    def __iter__(self):
        yield self.rx
        yield self.ry
        yield self.rz

    @property
    def is_zero(self) -> bool:
        return self.rx == 0.0 and self.ry == 0.0 and self.rz == 0.0


ZERO_ROTATION = RotationEuler()


@dataclass(frozen=True, slots=True)
class Cuboid:
    """Box with minimum corner ``anchor`` and extents ``(l, w, h)``."""

    anchor: Vec3
    extents: tuple[float, float, float]
    rotation: RotationEuler = ZERO_ROTATION

    def __post_init__(self):
        if type(self.anchor) is not Vec3:
            object.__setattr__(self, "anchor", Vec3(*self.anchor))
        if len(self.extents) != 3:
            raise GeometryError("extents must have three components")
        l, w, h = (float(v) for v in self.extents)
        if not (0 < l < math.inf and 0 < w < math.inf and 0 < h < math.inf):
            raise GeometryError(f"extents must be positive and finite, got {(l, w, h)}")
        object.__setattr__(self, "extents", (l, w, h))
        if type(self.rotation) is not RotationEuler:
            object.__setattr__(self, "rotation", RotationEuler(*self.rotation))

    @classmethod
    def from_params(cls, params: Sequence[float]) -> "Cuboid":
        """Build from ``[x, y, z, l, w, h]`` or ``[x, y, z, l, w, h, rx, ry, rz]``."""
        if len(params) == 6:
            return cls(Vec3(*params[:3]), tuple(params[3:6]))
        if len(params) == 9:
            return cls(Vec3(*params[:3]), tuple(params[3:6]), RotationEuler(*params[6:9]))
        raise GeometryError(f"expected 6 or 9 box parameters, got {len(params)}")

    @property
    def params(self) -> tuple[float, ...]:
        return (*self.anchor, *self.extents, *self.rotation)

    @property
    def aabb_params(self) -> tuple[float, ...]:
        return (*self.anchor, *self.extents)

    @property
    def max_corner(self) -> tuple[float, float, float]:
        return tuple(a + e for a, e in zip(self.anchor, self.extents))

    @property
    def center(self) -> np.ndarray:
        return self.anchor.as_array() + 0.5 * np.asarray(self.extents)

    @property
    def volume(self) -> float:
        l, w, h = self.extents
        return l * w * h

    def interval(self, axis: int) -> Interval:
        return Interval(tuple(self.anchor)[axis], self.extents[axis])

    def corners(self) -> np.ndarray:
        """The 8 corners of the unrotated box, shape (8, 3)."""
        return _corners(np.asarray([self.aabb_params]))[0]

    def contains(self, point: Iterable[float]) -> bool:
        return all(
            a <= p <= a + e for p, a, e in zip(point, self.anchor, self.extents)
        )


def _require_aligned(*boxes: Cuboid) -> None:
    for box in boxes:
        if not box.rotation.is_zero:
            raise UnalignedCuboidError(
                "cuboid has a non-zero rotation; call gravity_align first"
            )


def _overlap(s1: float, l1: float, s2: float, l2: float) -> float:
    # min(ends) - max(starts), written relative to the later start so that
    # identical or nested intervals give back the exact inner length
    d = s2 - s1
    ov = min(l1, l2 + d) if d <= 0.0 else min(l2, l1 - d)
    return ov if ov > 0.0 else 0.0


def interval_intersection(a: Interval, b: Interval) -> float:
    """Length of the overlap of two intervals, 0 when they are disjoint."""
    return _overlap(a.start, a.length, b.start, b.length)


def interval_union(a: Interval, b: Interval) -> float:
    return a.length + b.length - interval_intersection(a, b)


def _axis_overlaps(a: Cuboid, b: Cuboid) -> tuple[float, float, float]:
    ax, ay, az = a.anchor
    bx, by, bz = b.anchor
    al, aw, ah = a.extents
    bl, bw, bh = b.extents
    return _overlap(ax, al, bx, bl), _overlap(ay, aw, by, bw), _overlap(az, ah, bz, bh)


def cuboid_intersection_volume(a: Cuboid, b: Cuboid) -> float:
    _require_aligned(a, b)
    ix, iy, iz = _axis_overlaps(a, b)
    return ix * iy * iz


def _union_from_overlaps(a: Cuboid, b: Cuboid, ix, iy, iz, mode: UnionMode) -> float:
    al, aw, ah = a.extents
    bl, bw, bh = b.extents
    if mode is UnionMode.PAPER:
        return (al + bl - ix) * (aw + bw - iy) * (ah + bh - iz)
    return al * aw * ah + bl * bw * bh - ix * iy * iz


def cuboid_union_volume(
    a: Cuboid, b: Cuboid, union_mode: UnionMode | str = UnionMode.PAPER
) -> float:
    _require_aligned(a, b)
    mode = UnionMode.parse(union_mode)
    return _union_from_overlaps(a, b, *_axis_overlaps(a, b), mode)


def iou3d(a: Cuboid, b: Cuboid, union_mode: UnionMode | str = UnionMode.PAPER) -> float:
    """Intersection over union of two axis-aligned cuboids."""
    _require_aligned(a, b)
    mode = UnionMode.parse(union_mode)
    ix, iy, iz = _axis_overlaps(a, b)
    return ix * iy * iz / _union_from_overlaps(a, b, ix, iy, iz, mode)


def iou_matrix(
    boxes_a: np.ndarray, boxes_b: np.ndarray, union_mode: UnionMode | str = UnionMode.PAPER
) -> np.ndarray:
    """Pairwise IoU between two stacks of axis-aligned boxes.

    Args:
        boxes_a: array of shape (N, 6) holding ``[x, y, z, l, w, h]`` rows.
        boxes_b: array of shape (M, 6).
        union_mode: ``paper`` or ``inclusion_exclusion``.

    Returns:
        Array of shape (N, M).
    """
    mode = UnionMode.parse(union_mode)
    a = np.asarray(boxes_a, dtype=np.float64).reshape(-1, 6)[:, None, :]
    b = np.asarray(boxes_b, dtype=np.float64).reshape(-1, 6)[None, :, :]
    sa, la = a[..., :3], a[..., 3:]
    sb, lb = b[..., :3], b[..., 3:]
    d = sb - sa
    ov = np.where(d <= 0.0, np.minimum(la, lb + d), np.minimum(lb, la - d))
    ov = np.maximum(ov, 0.0)
    inter = ov[..., 0] * ov[..., 1] * ov[..., 2]
    if mode is UnionMode.PAPER:
        u = la + lb - ov
        union = u[..., 0] * u[..., 1] * u[..., 2]
    else:
        union = (
            la[..., 0] * la[..., 1] * la[..., 2]
            + lb[..., 0] * lb[..., 1] * lb[..., 2]
            - inter
        )
    return inter / union


def rotation_matrix(rotation: RotationEuler | Sequence[float]) -> np.ndarray:
    """Rotation matrix ``Rz(rz) @ Ry(ry) @ Rx(rx)`` (intrinsic Z-Y-X)."""
    rx, ry, rz = rotation
    cx, sx = math.cos(rx), math.sin(rx)
    cy, sy = math.cos(ry), math.sin(ry)
    cz, sz = math.cos(rz), math.sin(rz)
    return np.array(
        [
            [cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx],
            [sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx],
            [-sy, cy * sx, cy * cx],
        ]
    )


_UNIT_CORNERS = np.array(
    [[i, j, k] for i in (0.0, 1.0) for j in (0.0, 1.0) for k in (0.0, 1.0)]
)


def _corners(boxes6: np.ndarray) -> np.ndarray:
    # (N, 6) -> (N, 8, 3)
    return boxes6[:, None, :3] + _UNIT_CORNERS[None, :, :] * boxes6[:, None, 3:6]


def _rotation_matrices(angles: np.ndarray) -> np.ndarray:
    rx, ry, rz = angles[:, 0], angles[:, 1], angles[:, 2]
    cx, sx = np.cos(rx), np.sin(rx)
    cy, sy = np.cos(ry), np.sin(ry)
    cz, sz = np.cos(rz), np.sin(rz)
    out = np.empty((len(angles), 3, 3))
    out[:, 0, 0] = cz * cy
    out[:, 0, 1] = cz * sy * sx - sz * cx
    out[:, 0, 2] = cz * sy * cx + sz * sx
    out[:, 1, 0] = sz * cy
    out[:, 1, 1] = sz * sy * sx + cz * cx
    out[:, 1, 2] = sz * sy * cx - cz * sx
    out[:, 2, 0] = -sy
    out[:, 2, 1] = cy * sx
    out[:, 2, 2] = cy * cx
    return out


# The hull of a linearly mapped box is computed in closed form: along output
# axis i the corners span sum_j |M_ij| * e_j, and the minimum picks, per input
# axis, whichever end of the box M_ij sends lowest.  This equals the min/max
# over the 8 mapped corners, but is exact for identity, pure translation and
# axis-permuting rotations.


def _gravity_align_rows(params: np.ndarray) -> np.ndarray:
    """(N, 9) box rows -> (N, 6) axis-aligned hulls after rotating about the centroid."""
    out = params[:, :6].copy()
    rotated = np.any(params[:, 6:9] != 0.0, axis=1)
    if rotated.any():
        sub = params[rotated]
        ext = sub[:, 3:6]
        new_ext = _abs_apply(np.abs(_rotation_matrices(sub[:, 6:9])), ext)
        center = sub[:, :3] + 0.5 * ext
        out[rotated] = np.concatenate([center - 0.5 * new_ext, new_ext], axis=1)
    return out


def _abs_apply(mats: np.ndarray, v: np.ndarray) -> np.ndarray:
    # explicit sums rather than matmul/einsum: BLAS kernels vary with the
    # batch size, and the scalar and batched paths must agree bit for bit
    return (
        mats[..., 0] * v[:, 0:1] + mats[..., 1] * v[:, 1:2] + mats[..., 2] * v[:, 2:3]
    )


def _transform_rows(boxes6: np.ndarray, pose: "Pose") -> np.ndarray:
    rot = pose.rotation
    anchor, ext = boxes6[:, :3], boxes6[:, 3:6]
    lo = _abs_apply(rot[None], anchor) + _abs_apply(np.minimum(rot, 0.0)[None], ext)
    return np.concatenate([lo + pose.translation_array, _abs_apply(np.abs(rot)[None], ext)], axis=1)


def _from_row(row: np.ndarray) -> Cuboid:
    return Cuboid(Vec3(row[0], row[1], row[2]), (row[3], row[4], row[5]))


def gravity_align(c: Cuboid) -> Cuboid:
    """Apply the box rotation about its centroid and return the axis-aligned hull."""
    if c.rotation.is_zero:
        return c
    return _from_row(_gravity_align_rows(np.asarray([c.params], dtype=np.float64))[0])


def transform_to_global(c: Cuboid, pose: "Pose") -> Cuboid:
    """Map a camera-frame box through ``R @ x + t``; returns the global hull."""
    _require_aligned(c)
    return _from_row(_transform_rows(np.asarray([c.aabb_params], dtype=np.float64), pose)[0])


def first_invalid_row(rows: np.ndarray) -> int:
    """Index of the first (N, 9) row that is not a valid cuboid, or -1."""
    ok = np.all(np.isfinite(rows), axis=1)
    ok &= np.all(rows[:, 3:6] > 0, axis=1)
    ok &= np.all(np.abs(rows[:, 6:9]) <= math.pi, axis=1)
    bad = np.flatnonzero(~ok)
    return int(bad[0]) if len(bad) else -1


def align_and_transform(params: np.ndarray, pose: "Pose") -> np.ndarray:
    """Batched :func:`gravity_align` followed by :func:`transform_to_global`.

    Takes an (N, 9) array of camera-frame box rows and returns (N, 6)
    axis-aligned global-frame rows.
    """
    params = np.asarray(params, dtype=np.float64).reshape(-1, 9)
    if len(params) == 0:
        return np.empty((0, 6))
    bad = first_invalid_row(params)
    if bad >= 0:
        try:
            Cuboid.from_params(params[bad].tolist())
        except GeometryError as exc:
            raise GeometryError(f"proposal {bad}: {exc}") from None
    return _transform_rows(_gravity_align_rows(params), pose)


def _check_rotation(r: list[list[float]]) -> None:
    # plain floats: numpy call overhead dominates for a single 3x3
    if not all(math.isfinite(v) for row in r for v in row):
        raise GeometryError("pose rotation must be finite")
    for i in range(3):
        for j in range(i, 3):
            dot = r[0][i] * r[0][j] + r[1][i] * r[1][j] + r[2][i] * r[2][j]
            if abs(dot - (1.0 if i == j else 0.0)) > POSE_TOLERANCE:
                raise GeometryError("pose rotation is not orthonormal")
    det = (
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
        - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    )
    if abs(det - 1.0) > POSE_TOLERANCE:
        raise GeometryError("pose rotation has determinant != +1")


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid camera-to-world transform ``x_world = R @ x_cam + t``."""

    rotation: np.ndarray
    translation: Vec3 = field(default_factory=lambda: Vec3(0.0, 0.0, 0.0))

    def __post_init__(self):
        rot = np.array(self.rotation, dtype=np.float64)
        if rot.shape != (3, 3):
            raise GeometryError("pose rotation must be a 3x3 matrix")
        _check_rotation(rot.tolist())
        rot.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        if not isinstance(self.translation, Vec3):
            object.__setattr__(self, "translation", Vec3(*self.translation))
        t = self.translation.as_array()
        t.setflags(write=False)
        object.__setattr__(self, "translation_array", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "Pose":
        m = np.asarray(m, dtype=np.float64)
        return cls(m[:3, :3], Vec3(*m[:3, 3]))

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation_array
        return m

    def compose(self, other: "Pose") -> "Pose":
        """``self ∘ other``: apply ``other`` first, then ``self``."""
        return Pose(
            self.rotation @ other.rotation,
            Vec3(*(self.rotation @ other.translation_array + self.translation_array)),
        )

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt, Vec3(*(-rt @ self.translation_array)))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation_array

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return bool(
            np.array_equal(self.rotation, other.rotation)
            and self.translation == other.translation
        )

    def __hash__(self):
        return hash((self.rotation.tobytes(), self.translation))

    def __repr__(self):
        return f"Pose(rotation={self.rotation.tolist()}, translation={tuple(self.translation)})"


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        for name in ("fx", "fy", "cx", "cy"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.fx <= 0 or self.fy <= 0:
            raise GeometryError("focal lengths must be positive")

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def project(self, point: Iterable[float]) -> tuple[float, float]:
        x, y, z = point
        if z <= 0:
            raise GeometryError("cannot project a point at or behind the camera")
        return self.fx * x / z + self.cx, self.fy * y / z + self.cy


def backproject(u: float, v: float, z: float, k: Intrinsics) -> Vec3:
    """Pixel ``(u, v)`` at depth ``z`` to a camera-frame point."""
    if not z > 0:
        raise GeometryError(f"depth must be positive, got {z}")
    return Vec3((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z)


def backproject_many(samples: np.ndarray, k: Intrinsics) -> np.ndarray:
    """Vectorised :func:`backproject` over an (N, 3) array of ``(u, v, z)``."""
    samples = np.asarray(samples, dtype=np.float64).reshape(-1, 3)
    bad = ~(samples[:, 2] > 0) | ~np.all(np.isfinite(samples), axis=1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise GeometryError(f"depth sample {i} is invalid: {samples[i].tolist()}")
    u, v, z = samples[:, 0], samples[:, 1], samples[:, 2]
    return np.stack([(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z], axis=1)
