import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from cuboidtrack.geometry import (
    Cuboid,
    GeometryError,
    Interval,
    Intrinsics,
    Pose,
    RotationEuler,
    UnalignedCuboidError,
    UnionMode,
    Vec3,
    align_and_transform,
    backproject,
    backproject_many,
    cuboid_intersection_volume,
    cuboid_union_volume,
    gravity_align,
    interval_intersection,
    interval_union,
    iou3d,
    iou_matrix,
    rotation_matrix,
    transform_to_global,
)


def box(x, y, z, l, w, h, rx=0.0, ry=0.0, rz=0.0):
    return Cuboid(Vec3(x, y, z), (l, w, h), RotationEuler(rx, ry, rz))


# -- independent oracles ------------------------------------------------------


def sampled_interval(a, b, step=1e-3):
    """Lengths of a & b and a | b by sampling cell centres on a 1D grid."""
    lo = min(a[0], b[0])
    hi = max(a[0] + a[1], b[0] + b[1])
    xs = lo + (np.arange(int(round((hi - lo) / step))) + 0.5) * step
    in_a = (xs >= a[0]) & (xs <= a[0] + a[1])
    in_b = (xs >= b[0]) & (xs <= b[0] + b[1])
    return (in_a & in_b).sum() * step, (in_a | in_b).sum() * step


def voxel_volumes(a, b, pitch):
    """Dense voxel-centre counting of |a|, |b|, |a & b| in m^3."""
    lo = np.minimum(a[:3], b[:3])
    hi = np.maximum(a[:3] + a[3:], b[:3] + b[3:])
    axes = [lo[i] + (np.arange(int(round((hi[i] - lo[i]) / pitch))) + 0.5) * pitch for i in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([gx, gy, gz], axis=-1)
    in_a = np.all((pts >= a[:3]) & (pts <= a[:3] + a[3:]), axis=-1)
    in_b = np.all((pts >= b[:3]) & (pts <= b[:3] + b[3:]), axis=-1)
    v = pitch**3
    return in_a.sum() * v, in_b.sum() * v, (in_a & in_b).sum() * v


def corner_hull(params, matrix_fn):
    """Axis-aligned hull of the 8 corners after mapping each through matrix_fn."""
    p = np.asarray(params, dtype=float)
    corners = np.array([p[:3] + np.array(c) * p[3:6] for c in itertools.product((0, 1), repeat=3)])
    mapped = np.array([matrix_fn(c) for c in corners])
    lo, hi = mapped.min(axis=0), mapped.max(axis=0)
    return np.concatenate([lo, hi - lo])


def scipy_rot(rx, ry, rz):
    # intrinsic Z, then Y, then X: R = Rz @ Ry @ Rx
    return Rotation.from_euler("ZYX", [rz, ry, rx]).as_matrix()


# -- value types --------------------------------------------------------------


class TestValueTypes:
    def test_vec3_rejects_non_finite(self):
        with pytest.raises(GeometryError):
            Vec3(0.0, math.nan, 0.0)
        with pytest.raises(GeometryError):
            Vec3(math.inf, 0.0, 0.0)

    def test_interval_requires_positive_length(self):
        with pytest.raises(GeometryError):
            Interval(0.0, 0.0)
        with pytest.raises(GeometryError):
            Interval(math.nan, 1.0)

    def test_rotation_range(self):
        RotationEuler(math.pi, -math.pi, 0.0)
        with pytest.raises(GeometryError):
            RotationEuler(3.2, 0.0, 0.0)

    @pytest.mark.parametrize("ext", [(0, 1, 1), (1, -1, 1), (1, 1, math.inf), (1, 1, math.nan)])
    def test_cuboid_rejects_degenerate_extents(self, ext):
        with pytest.raises(GeometryError):
            Cuboid(Vec3(0, 0, 0), ext)

    def test_cuboid_params_round_trip(self):
        c = Cuboid.from_params([1, 2, 3, 4, 5, 6, 0.1, 0.2, 0.3])
        assert c.params == (1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.1, 0.2, 0.3)
        assert Cuboid.from_params(c.params) == c
        with pytest.raises(GeometryError):
            Cuboid.from_params([1, 2, 3])

    def test_cuboid_is_immutable(self):
        c = box(0, 0, 0, 1, 1, 1)
        with pytest.raises(AttributeError):
            c.extents = (2, 2, 2)

    def test_pose_checks_orthonormality(self):
        with pytest.raises(GeometryError):
            Pose(np.diag([1.0, 1.0, 1.1]))
        with pytest.raises(GeometryError):
            Pose(np.diag([1.0, 1.0, -1.0]))  # reflection
        with pytest.raises(GeometryError):
            Pose(np.eye(2))
        Pose(np.eye(3) + 1e-8)  # within tolerance

    def test_pose_rotation_is_read_only(self):
        p = Pose.identity()
        with pytest.raises(ValueError):
            p.rotation[0, 0] = 2.0

    def test_intrinsics_require_positive_focal(self):
        with pytest.raises(GeometryError):
            Intrinsics(0.0, 500.0, 320.0, 240.0)


# -- interval formulas --------------------------------------------------------


class TestIntervals:
    def test_disjoint(self):
        a, b = Interval(0, 10), Interval(20, 5)
        assert interval_intersection(a, b) == 0
        assert interval_union(a, b) == 15

    def test_identical(self):
        a = Interval(0, 10)
        assert interval_intersection(a, a) == 10
        assert interval_union(a, a) == 10

    def test_partial_overlap_matches_sampling_oracle(self):
        inter, union = sampled_interval((0.0, 10.0), (5.0, 10.0))
        assert inter == pytest.approx(5.0, abs=2e-3)
        assert union == pytest.approx(15.0, abs=2e-3)
        a, b = Interval(0, 10), Interval(5, 10)
        assert interval_intersection(a, b) == 5.0
        assert interval_union(a, b) == 15.0

    def test_overlap_is_not_the_span(self):
        # [0,10] and [5,15] overlap by 5; the span would be 15
        assert interval_intersection(Interval(0, 10), Interval(5, 10)) != 15

    @given(
        st.floats(-100, 100), st.floats(0.01, 50), st.floats(-100, 100), st.floats(0.01, 50)
    )
    def test_intersection_bounds(self, s1, l1, s2, l2):
        a, b = Interval(s1, l1), Interval(s2, l2)
        i = interval_intersection(a, b)
        assert 0 <= i <= min(l1, l2) + 1e-9
        assert i == interval_intersection(b, a)
        assert interval_union(a, b) >= max(l1, l2) - 1e-9


# -- volumes and IoU ----------------------------------------------------------

A = box(0, 0, 0, 2, 2, 2)
B = box(1, 1, 1, 2, 2, 2)


class TestVolumes:
    def test_identical_unit_cubes(self):
        u = box(0, 0, 0, 1, 1, 1)
        assert cuboid_intersection_volume(u, u) == 1.0
        assert cuboid_union_volume(u, u) == 1.0
        assert iou3d(u, u) == 1.0

    def test_offset_pair_matches_voxel_oracle(self):
        a = np.array([0, 0, 0, 2, 2, 2], float)
        b = np.array([1, 1, 1, 2, 2, 2], float)
        va, vb, vab = voxel_volumes(a, b, 0.01)
        assert vab == pytest.approx(1.0, rel=1e-6)
        assert va == pytest.approx(8.0, rel=1e-6)
        assert cuboid_intersection_volume(A, B) == 1.0

    def test_default_union_is_product_of_axis_unions(self):
        per_axis = [sampled_interval((0.0, 2.0), (1.0, 2.0))[1] for _ in range(3)]
        assert math.prod(per_axis) == pytest.approx(27.0, rel=1e-6)
        assert cuboid_union_volume(A, B) == 27.0
        assert iou3d(A, B) == pytest.approx(1 / 27, abs=1e-12)

    def test_inclusion_exclusion_union(self):
        assert cuboid_union_volume(A, B, UnionMode.INCLUSION_EXCLUSION) == 15.0
        assert iou3d(A, B, "ie") == pytest.approx(1 / 15, abs=1e-12)

    def test_disjoint_unit_cubes(self):
        a, b = box(0, 0, 0, 1, 1, 1), box(5, 0, 0, 1, 1, 1)
        assert cuboid_intersection_volume(a, b) == 0
        assert cuboid_union_volume(a, b) == 2.0
        assert iou3d(a, b) == 0.0

    def test_rotated_input_is_rejected(self):
        r = box(0, 0, 0, 1, 1, 1, rz=0.1)
        for fn in (cuboid_intersection_volume, cuboid_union_volume, iou3d):
            with pytest.raises(UnalignedCuboidError):
                fn(r, A)

    def test_unknown_union_mode(self):
        with pytest.raises(GeometryError):
            iou3d(A, B, "bogus")


coord = st.floats(-5, 5, allow_nan=False)
extent = st.floats(0.01, 3, allow_nan=False)
aligned_box = st.builds(lambda x, y, z, l, w, h: box(x, y, z, l, w, h), coord, coord, coord, extent, extent, extent)
modes = st.sampled_from(list(UnionMode))
# millimetre lattice: distinct boxes differ by far more than rounding error
mm = st.integers(-5000, 5000).map(lambda i: i / 1000)
mm_ext = st.integers(10, 3000).map(lambda i: i / 1000)
lattice_box = st.builds(lambda x, y, z, l, w, h: box(x, y, z, l, w, h), mm, mm, mm, mm_ext, mm_ext, mm_ext)


def random_boxes(rng, n):
    return np.column_stack([rng.uniform(-2, 2, (n, 3)), rng.uniform(0.05, 3, (n, 3))])


class TestIoUProperties:
    def test_symmetry_10k_pairs(self):
        rng = np.random.default_rng(11)
        a, b = random_boxes(rng, 10_000), random_boxes(rng, 10_000)
        for mode in UnionMode:
            ab = [iou3d(Cuboid.from_params(p), Cuboid.from_params(q), mode) for p, q in zip(a, b)]
            ba = [iou3d(Cuboid.from_params(q), Cuboid.from_params(p), mode) for p, q in zip(a, b)]
            assert ab == ba

    @given(aligned_box, aligned_box, modes)
    def test_symmetry_and_range(self, a, b, mode):
        v = iou3d(a, b, mode)
        assert v == iou3d(b, a, mode)
        assert 0.0 <= v <= 1.0

    @given(lattice_box, lattice_box, modes)
    def test_one_iff_identical(self, a, b, mode):
        assert iou3d(a, a, mode) == 1.0
        if a != b:
            assert iou3d(a, b, mode) < 1.0

    # touching faces (gap 0) can round to a one-ulp overlap either way
    @given(aligned_box, st.integers(0, 2), st.floats(1e-6, 10.0), modes)
    def test_disjoint_on_one_axis_gives_zero(self, a, axis, gap, mode):
        shift = [0.0, 0.0, 0.0]
        shift[axis] = a.extents[axis] + gap
        b = Cuboid(Vec3(*(np.array(tuple(a.anchor)) + shift)), a.extents)
        assert iou3d(a, b, mode) == 0.0

    @given(aligned_box, aligned_box)
    def test_product_union_dominates_true_union(self, a, b):
        paper = cuboid_union_volume(a, b, UnionMode.PAPER)
        ie = cuboid_union_volume(a, b, UnionMode.INCLUSION_EXCLUSION)
        assert paper >= ie * (1 - 1e-12)

    def test_matrix_is_bit_identical_to_scalar(self):
        rng = np.random.default_rng(5)
        a, b = random_boxes(rng, 40), random_boxes(rng, 30)
        for mode in UnionMode:
            m = iou_matrix(a, b, mode)
            assert m.shape == (40, 30)
            for i, j in itertools.product(range(40), range(30)):
                assert m[i, j] == iou3d(Cuboid.from_params(a[i]), Cuboid.from_params(b[j]), mode)


# -- rotation and transforms --------------------------------------------------


class TestGravityAlign:
    def test_zero_rotation_is_identity(self):
        c = box(0.1, 0.2, 0.3, 1, 2, 3)
        assert gravity_align(c) is c

    def test_quarter_turn_of_cube(self):
        g = gravity_align(box(0, 0, 0, 1, 1, 1, rz=math.pi / 2))
        assert np.allclose(g.params, (0, 0, 0, 1, 1, 1, 0, 0, 0), atol=1e-12)

    def test_eighth_turn_matches_corner_oracle(self):
        c = box(0, 0, 0, 2, 1, 1, rz=math.pi / 4)
        centre = c.center
        rot = scipy_rot(0, 0, math.pi / 4)
        oracle = corner_hull(c.aabb_params, lambda p: rot @ (p - centre) + centre)
        assert np.allclose(oracle[3:], (3 / math.sqrt(2), 3 / math.sqrt(2), 1.0), atol=1e-12)
        g = gravity_align(c)
        assert np.allclose(g.extents, (2.1213203435596424, 2.1213203435596424, 1.0), atol=1e-12)
        assert np.allclose(g.aabb_params, oracle, atol=1e-12)
        assert g.rotation.is_zero

    def test_rotation_matrix_matches_scipy(self):
        rng = np.random.default_rng(2)
        for rx, ry, rz in rng.uniform(-math.pi, math.pi, (50, 3)):
            assert np.allclose(rotation_matrix((rx, ry, rz)), scipy_rot(rx, ry, rz), atol=1e-12)

    @given(
        aligned_box,
        st.floats(-math.pi, math.pi),
        st.floats(-math.pi, math.pi),
        st.floats(-math.pi, math.pi),
    )
    def test_matches_corner_oracle(self, c, rx, ry, rz):
        r = Cuboid(c.anchor, c.extents, RotationEuler(rx, ry, rz))
        centre = r.center
        rot = scipy_rot(rx, ry, rz)
        oracle = corner_hull(r.aabb_params, lambda p: rot @ (p - centre) + centre)
        assert np.allclose(gravity_align(r).aabb_params, oracle, atol=1e-9)

    @given(aligned_box, st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
    def test_idempotent(self, c, ry, rz):
        g = gravity_align(Cuboid(c.anchor, c.extents, RotationEuler(0.0, ry, rz)))
        assert gravity_align(g) == g


def axis_rotations():
    """The 24 proper rotations that permute the coordinate axes."""
    out = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            m = np.zeros((3, 3))
            for i, (j, s) in enumerate(zip(perm, signs)):
                m[i, j] = s
            if np.linalg.det(m) > 0:
                out.append(m)
    return out


AXIS_ROTATIONS = axis_rotations()
axis_pose = st.builds(
    lambda k, t: Pose(AXIS_ROTATIONS[k], Vec3(*t)),
    st.integers(0, len(AXIS_ROTATIONS) - 1),
    st.tuples(coord, coord, coord),
)


class TestTransform:
    def test_identity_pose(self):
        c = box(0.1, -0.2, 0.3, 0.7, 0.11, 0.13)
        assert transform_to_global(c, Pose.identity()) == c

    def test_pure_translation(self):
        c = box(0.1, -0.2, 0.3, 0.7, 0.11, 0.13)
        g = transform_to_global(c, Pose(np.eye(3), Vec3(1, 2, 3)))
        assert g.extents == c.extents
        assert np.allclose(tuple(g.anchor), (1.1, 1.8, 3.3), atol=1e-15)

    def test_quarter_turn_about_z(self):
        rz90 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        oracle = corner_hull((1, 0, 0, 1, 1, 1), lambda p: rz90 @ p)
        assert np.allclose(oracle, (-1, 1, 0, 1, 1, 1))
        g = transform_to_global(box(1, 0, 0, 1, 1, 1), Pose(rz90))
        assert g.aabb_params == (-1.0, 1.0, 0.0, 1.0, 1.0, 1.0)

    def test_rejects_rotated_box(self):
        with pytest.raises(UnalignedCuboidError):
            transform_to_global(box(0, 0, 0, 1, 1, 1, rz=0.3), Pose.identity())

    @given(aligned_box, st.floats(-math.pi, math.pi), st.tuples(coord, coord, coord))
    def test_matches_corner_oracle(self, c, angle, t):
        rot = scipy_rot(0.3, -0.2, angle)
        pose = Pose(rot, Vec3(*t))
        oracle = corner_hull(c.aabb_params, lambda p: rot @ p + np.array(t))
        assert np.allclose(transform_to_global(c, pose).aabb_params, oracle, atol=1e-9)

    @given(aligned_box, axis_pose, axis_pose)
    def test_composition(self, c, p1, p2):
        twice = transform_to_global(transform_to_global(c, p1), p2)
        once = transform_to_global(c, p2.compose(p1))
        assert np.allclose(twice.corners(), once.corners(), atol=1e-9)

    def test_batched_path_agrees_with_scalar(self):
        rng = np.random.default_rng(8)
        params = np.column_stack(
            [rng.uniform(-1, 1, (50, 3)), rng.uniform(0.1, 1, (50, 3)), rng.uniform(-3, 3, (50, 3))]
        )
        pose = Pose(scipy_rot(0.1, 0.2, 0.3), Vec3(1, 2, 3))
        batched = align_and_transform(params, pose)
        for row, out in zip(params, batched):
            scalar = transform_to_global(gravity_align(Cuboid.from_params(row)), pose)
            assert np.array_equal(np.array(scalar.aabb_params), out)
        assert align_and_transform(np.empty((0, 9)), pose).shape == (0, 6)


class TestPose:
    @given(axis_pose, axis_pose)
    def test_inverse(self, p, q):
        assert np.allclose(p.compose(p.inverse()).matrix, np.eye(4), atol=1e-12)
        assert np.allclose(p.compose(q).matrix, p.matrix @ q.matrix, atol=1e-12)

    def test_equality_and_hash(self):
        a = Pose(np.eye(3), Vec3(1, 2, 3))
        b = Pose.from_matrix(a.matrix)
        assert a == b and hash(a) == hash(b)


class TestBackprojection:
    K = Intrinsics(500.0, 500.0, 320.0, 320.0)

    def test_optical_axis(self):
        assert backproject(320, 320, 2, self.K) == Vec3(0, 0, 2)

    def test_pinhole_plug_in(self):
        # (820 - 320) * 1 / 500 = 1
        x = (820 - 320) * 1 / 500
        assert x == 1.0
        assert backproject(820, 320, 1, self.K) == Vec3(1, 0, 1)

    @pytest.mark.parametrize("z", [0.0, -1.0, math.nan])
    def test_invalid_depth(self, z):
        with pytest.raises(GeometryError):
            backproject(1, 1, z, self.K)

    def test_many_names_the_bad_sample(self):
        with pytest.raises(GeometryError, match="sample 1"):
            backproject_many(np.array([[1, 1, 1], [1, 1, 0]]), self.K)

    @given(st.floats(-1000, 2000), st.floats(-1000, 2000), st.floats(0.05, 50))
    def test_round_trip(self, u, v, z):
        p = backproject(u, v, z, self.K)
        pu, pv = self.K.project(p)
        assert abs(pu - u) <= 1e-9 and abs(pv - v) <= 1e-9
        assert np.allclose(backproject_many(np.array([[u, v, z]]), self.K)[0], tuple(p), rtol=0, atol=0)
