"""Synthetic scenes with ground truth, a voxel IoU oracle and tracking metrics.

Scenes are static sets of axis-aligned world boxes watched by a moving camera.
Each frame emits one proposal per visible object: the world box expressed in
the camera frame (minimum corner, extents and the Z-Y-X Euler angles of the
camera-to-world rotation's inverse), optionally jittered or dropped.
Occlusion is modelled as the proposal simply not being emitted inside an
occlusion window.

Randomness comes from numpy's PCG64 generator.  Three independent streams
are derived from the scenario seed: ``[seed, 0]`` lays out random objects and
occlusion windows, ``[seed, 1]`` draws proposal noise and dropout, and
``[seed, 2]`` draws depth samples and proposal order.  Noise is drawn for
every (frame, object) slot whether or not the proposal is emitted, so runs
that differ only in ``anchor_sigma`` see the same underlying draws.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from cuboidtrack.geometry import Cuboid, GeometryError, Intrinsics, Pose, RotationEuler, Vec3
from cuboidtrack.heatmap import DEFAULT_VOXEL_SIZE
from cuboidtrack.io import FormatError, FrameObservation, SceneFile, SceneHeader, TrackFile

__all__ = [
    "ScenarioError",
    "Scenario",
    "GroundTruthLabels",
    "Metrics",
    "orbit_trajectory",
    "perimeter_trajectory",
    "static_trajectory",
    "linear_trajectory",
    "random_layout",
    "random_occlusions",
    "make_scenario",
    "load_scenario",
    "generate",
    "voxel_counts",
    "voxel_iou_oracle",
    "euler_zyx",
    "evaluate",
    "write_truth",
    "read_truth",
]

TRUTH_FORMAT = "cuboid-truth"
DEFAULT_INTRINSICS = Intrinsics(525.0, 525.0, 319.5, 239.5)


class ScenarioError(ValueError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"field '{field}': {message}" if field else message)
        self.field = field


@dataclass
class Scenario:
    objects: list[tuple[int, Cuboid]]
    trajectory: list[Pose]
    occlusions: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    anchor_sigma: float = 0.0
    extent_sigma: float = 0.0
    dropout: float = 0.0
    seed: int = 0
    intrinsics: Intrinsics | None = None
    voxel_size: float = DEFAULT_VOXEL_SIZE
    depth_samples_per_object: int = 0
    shuffle: bool = False

    def __post_init__(self):
        ids = [i for i, _ in self.objects]
        if len(set(ids)) != len(ids):
            raise ScenarioError("object ids must be unique", "objects")
        for i, box in self.objects:
            if not box.rotation.is_zero:
                raise ScenarioError(f"object {i} must be axis-aligned", "objects")
        n = len(self.trajectory)
        for obj, windows in self.occlusions.items():
            if obj not in ids:
                raise ScenarioError(f"occlusion for unknown object {obj}", "occlusions")
            for start, end in windows:
                if not 0 <= start <= end < n:
                    raise ScenarioError(f"window [{start}, {end}] outside 0..{n - 1}", "occlusions")
        for name in ("anchor_sigma", "extent_sigma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ScenarioError("must be a non-negative number", name)
        if not 0.0 <= self.dropout < 1.0:
            raise ScenarioError("must be in [0, 1)", "dropout")
        if self.depth_samples_per_object < 0:
            raise ScenarioError("must be non-negative", "depth_samples_per_object")

    @property
    def n_frames(self) -> int:
        return len(self.trajectory)

    def is_occluded(self, obj: int, frame: int) -> bool:
        return any(s <= frame <= e for s, e in self.occlusions.get(obj, ()))


@dataclass
class GroundTruthLabels:
    """True object id of every emitted proposal, frame by frame."""

    frames: list[tuple[int, list[int]]]
    object_ids: list[int]
    occlusions: dict[int, list[tuple[int, int]]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frames)


# ---------------------------------------------------------------------------
# trajectories and layouts


def _look_at(position: np.ndarray, target: np.ndarray) -> Pose:
    # camera axes: x right, y down, z forward
    forward = target - position
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, [0.0, 0.0, 1.0])
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    return Pose(np.column_stack([right, down, forward]), Vec3(*position))


def orbit_trajectory(
    n_frames: int,
    center: Sequence[float] = (0.0, 0.0, 0.1),
    radius: float = 2.0,
    height: float = 1.2,
    sweep: float = 2 * math.pi,
    start_angle: float = 0.0,
) -> list[Pose]:
    """Camera circling ``center`` at ``radius`` and ``height``, looking at it."""
    c = np.asarray(center, dtype=np.float64)
    poses = []
    for i in range(n_frames):
        a = start_angle + sweep * i / max(n_frames, 1)
        pos = c + np.array([radius * math.cos(a), radius * math.sin(a), height])
        poses.append(_look_at(pos, c))
    return poses


def perimeter_trajectory(
    n_frames: int,
    center: Sequence[float] = (0.0, 0.0, 0.1),
    distance: float = 2.0,
    height: float = 0.4,
) -> list[Pose]:
    """Level camera walking the four sides of a square around ``center``.

    The camera always faces the scene along a world axis, so every rotation
    is an exact axis permutation and axis-aligned hulls lose nothing when
    boxes move between camera and world frames.
    """
    c = np.asarray(center, dtype=np.float64)
    normals = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
    poses = []
    for i in range(n_frames):
        progress = 4.0 * i / max(n_frames, 1)
        side = min(int(progress), 3)
        s = 2.0 * (progress - side) - 1.0
        nx, ny = normals[side]
        tx, ty = -ny, nx
        pos = np.array([c[0] + distance * (nx + s * tx), c[1] + distance * (ny + s * ty), height])
        poses.append(_look_at(pos, pos - np.array([nx, ny, 0.0])))
    return poses


def static_trajectory(n_frames: int, pose: Pose | None = None) -> list[Pose]:
    return [pose or Pose.identity()] * n_frames


def linear_trajectory(n_frames: int, start: Sequence[float], end: Sequence[float]) -> list[Pose]:
    """Pure translation from ``start`` to ``end`` with identity orientation."""
    s, e = np.asarray(start, float), np.asarray(end, float)
    steps = max(n_frames - 1, 1)
    return [Pose(np.eye(3), Vec3(*(s + (e - s) * i / steps))) for i in range(n_frames)]


def random_layout(
    count: int,
    rng: np.random.Generator,
    region: Sequence[float] = (-1.0, -1.0, 1.0, 1.0),
    table_height: float = 0.0,
    min_size: float = 0.06,
    max_size: float = 0.3,
    min_gap: float = 0.1,
    max_tries: int = 10_000,
) -> list[tuple[int, Cuboid]]:
    """Non-overlapping boxes resting on a table, ids 1..count."""
    x0, y0, x1, y1 = region
    placed: list[Cuboid] = []
    for _ in range(max_tries):
        if len(placed) == count:
            break
        l, w, h = rng.uniform(min_size, max_size, size=3)
        x = rng.uniform(x0, x1 - l)
        y = rng.uniform(y0, y1 - w)
        box = Cuboid(Vec3(x, y, table_height), (l, w, h))
        clear = all(
            x + l + min_gap <= b.anchor.x
            or b.anchor.x + b.extents[0] + min_gap <= x
            or y + w + min_gap <= b.anchor.y
            or b.anchor.y + b.extents[1] + min_gap <= y
            for b in placed
        )
        if clear:
            placed.append(box)
    if len(placed) < count:
        raise ScenarioError(f"could not place {count} objects in the region", "random_objects")
    return [(i + 1, box) for i, box in enumerate(placed)]


def random_occlusions(
    object_ids: Sequence[int],
    n_frames: int,
    count: int,
    rng: np.random.Generator,
    min_length: int = 10,
    max_length: int = 40,
) -> dict[int, list[tuple[int, int]]]:
    """``count`` windows on distinct objects, each with visible frames on both sides."""
    if count > len(object_ids):
        raise ScenarioError("more occlusion windows than objects", "random_occlusions")
    if n_frames < max_length + 2:
        raise ScenarioError("trajectory too short for the occlusion length", "random_occlusions")
    chosen = rng.choice(np.asarray(object_ids), size=count, replace=False)
    out: dict[int, list[tuple[int, int]]] = {}
    for obj in sorted(int(o) for o in chosen):
        length = int(rng.integers(min_length, max_length + 1))
        start = int(rng.integers(1, n_frames - length))
        out[obj] = [(start, start + length - 1)]
    return out


def make_scenario(
    n_objects: int = 8,
    n_frames: int = 300,
    n_occlusions: int = 3,
    seed: int = 0,
    anchor_sigma: float = 0.0,
    extent_sigma: float = 0.0,
    dropout: float = 0.0,
    trajectory: str = "perimeter",
    region: Sequence[float] = (-1.0, -1.0, 1.0, 1.0),
    **trajectory_kw,
) -> Scenario:
    """Random table-top scenario watched by a camera circling the table.

    ``trajectory`` is ``"perimeter"`` (level camera, axis-aligned headings)
    or ``"orbit"`` (smooth look-at circle, pitched down at the table).
    """
    make_trajectory = {"perimeter": perimeter_trajectory, "orbit": orbit_trajectory}[trajectory]
    layout_rng = np.random.default_rng([seed, 0])
    objects = random_layout(n_objects, layout_rng, region=region)
    occlusions = random_occlusions([i for i, _ in objects], n_frames, n_occlusions, layout_rng)
    return Scenario(
        objects=objects,
        trajectory=make_trajectory(n_frames, **trajectory_kw),
        occlusions=occlusions,
        anchor_sigma=anchor_sigma,
        extent_sigma=extent_sigma,
        dropout=dropout,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# scenario files


def _get(cfg: dict, key: str, kind, default=None, prefix: str = ""):
    name = prefix + key
    if key not in cfg:
        if default is None:
            raise ScenarioError("missing", name)
        return default
    value = cfg[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"expected a number, got {value!r}", name)
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(f"expected an integer, got {value!r}", name)
        return value
    if not isinstance(value, kind):
        raise ScenarioError(f"expected {kind.__name__}, got {value!r}", name)
    return value


def _box(value, name: str) -> Cuboid:
    if not isinstance(value, list) or len(value) != 6:
        raise ScenarioError("expected [x, y, z, l, w, h]", name)
    try:
        return Cuboid.from_params([float(v) for v in value])
    except (GeometryError, TypeError, ValueError) as exc:
        raise ScenarioError(str(exc), name) from None


def _trajectory(cfg: dict, n_frames: int) -> list[Pose]:
    kind = _get(cfg, "kind", str, prefix="trajectory.")
    p = "trajectory."
    if kind == "orbit":
        return orbit_trajectory(
            n_frames,
            center=_get(cfg, "center", list, [0.0, 0.0, 0.1], p),
            radius=_get(cfg, "radius", float, 2.0, p),
            height=_get(cfg, "height", float, 1.2, p),
            sweep=_get(cfg, "sweep", float, 2 * math.pi, p),
            start_angle=_get(cfg, "start_angle", float, 0.0, p),
        )
    if kind == "perimeter":
        return perimeter_trajectory(
            n_frames,
            center=_get(cfg, "center", list, [0.0, 0.0, 0.1], p),
            distance=_get(cfg, "distance", float, 2.0, p),
            height=_get(cfg, "height", float, 0.4, p),
        )
    if kind == "static":
        return static_trajectory(n_frames)
    if kind == "linear":
        return linear_trajectory(n_frames, _get(cfg, "start", list, prefix=p), _get(cfg, "end", list, prefix=p))
    if kind == "explicit":
        poses = []
        for j, rec in enumerate(_get(cfg, "poses", list, prefix=p)):
            try:
                poses.append(Pose(np.array(rec["R"], float).reshape(3, 3), Vec3(*rec["t"])))
            except (GeometryError, KeyError, TypeError, ValueError) as exc:
                raise ScenarioError(str(exc), f"trajectory.poses[{j}]") from None
        if len(poses) != n_frames:
            raise ScenarioError(f"expected {n_frames} poses, got {len(poses)}", "trajectory.poses")
        return poses
    raise ScenarioError(f"unknown trajectory kind {kind!r}", "trajectory.kind")


def scenario_from_dict(cfg: dict, seed: int | None = None) -> Scenario:
    """Build a :class:`Scenario` from its JSON form (see ``docs/FORMAT.md``)."""
    if not isinstance(cfg, dict):
        raise ScenarioError("scenario must be a JSON object")
    seed = _get(cfg, "seed", int, 0) if seed is None else seed
    n_frames = _get(cfg, "frames", int)
    if n_frames < 1:
        raise ScenarioError("must be at least 1", "frames")
    layout_rng = np.random.default_rng([seed, 0])

    if "objects" in cfg:
        objects = []
        for j, rec in enumerate(_get(cfg, "objects", list)):
            if not isinstance(rec, dict):
                raise ScenarioError("expected an object", f"objects[{j}]")
            objects.append((_get(rec, "id", int, prefix=f"objects[{j}]."), _box(rec.get("box"), f"objects[{j}].box")))
    elif "random_objects" in cfg:
        r = _get(cfg, "random_objects", dict)
        p = "random_objects."
        objects = random_layout(
            _get(r, "count", int, prefix=p),
            layout_rng,
            region=_get(r, "region", list, [-1.0, -1.0, 1.0, 1.0], p),
            table_height=_get(r, "table_height", float, 0.0, p),
            min_size=_get(r, "min_size", float, 0.06, p),
            max_size=_get(r, "max_size", float, 0.3, p),
            min_gap=_get(r, "min_gap", float, 0.1, p),
        )
    else:
        raise ScenarioError("missing (need 'objects' or 'random_objects')", "objects")

    trajectory = _trajectory(_get(cfg, "trajectory", dict, {"kind": "perimeter"}), n_frames)

    occlusions: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for j, rec in enumerate(_get(cfg, "occlusions", list, [])):
        name = f"occlusions[{j}]."
        if not isinstance(rec, dict):
            raise ScenarioError("expected an object", f"occlusions[{j}]")
        occlusions[_get(rec, "object", int, prefix=name)].append(
            (_get(rec, "start", int, prefix=name), _get(rec, "end", int, prefix=name))
        )
    if "random_occlusions" in cfg:
        r = _get(cfg, "random_occlusions", dict)
        p = "random_occlusions."
        extra = random_occlusions(
            [i for i, _ in objects],
            n_frames,
            _get(r, "count", int, prefix=p),
            layout_rng,
            _get(r, "min_length", int, 10, p),
            _get(r, "max_length", int, 40, p),
        )
        for obj, windows in extra.items():
            occlusions[obj].extend(windows)

    noise = _get(cfg, "noise", dict, {})
    k = cfg.get("intrinsics")
    intrinsics = None
    if k is not None:
        try:
            intrinsics = Intrinsics(k["fx"], k["fy"], k["cx"], k["cy"])
        except (GeometryError, KeyError, TypeError) as exc:
            raise ScenarioError(str(exc), "intrinsics") from None
    return Scenario(
        objects=objects,
        trajectory=trajectory,
        occlusions=dict(occlusions),
        anchor_sigma=_get(noise, "anchor_sigma", float, 0.0, "noise."),
        extent_sigma=_get(noise, "extent_sigma", float, 0.0, "noise."),
        dropout=_get(noise, "dropout", float, 0.0, "noise."),
        seed=seed,
        intrinsics=intrinsics,
        voxel_size=_get(cfg, "voxel_size", float, DEFAULT_VOXEL_SIZE),
        depth_samples_per_object=_get(cfg, "depth_samples_per_object", int, 0),
        shuffle=_get(cfg, "shuffle", bool, False),
    )


def load_scenario(path, seed: int | None = None) -> Scenario:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return scenario_from_dict(cfg, seed)


# ---------------------------------------------------------------------------
# generation


def euler_zyx(matrix: np.ndarray) -> tuple[float, float, float]:
    """``(rx, ry, rz)`` with ``Rz(rz) @ Ry(ry) @ Rx(rx) == matrix``.

    At gimbal lock (``ry = +-pi/2``) ``rz`` is fixed to 0.
    """
    m = np.asarray(matrix, dtype=np.float64)
    s = -m[2, 0]
    if abs(s) < 1.0 - 1e-12:
        ry = math.asin(s)
        rx = math.atan2(m[2, 1], m[2, 2])
        rz = math.atan2(m[1, 0], m[0, 0])
    elif s > 0:
        ry, rz = math.pi / 2, 0.0
        rx = math.atan2(m[0, 1], m[0, 2])
    else:
        ry, rz = -math.pi / 2, 0.0
        rx = math.atan2(-m[0, 1], -m[0, 2])
    return rx, ry, rz


def _depth_samples(box: Cuboid, pose_inv: Pose, k: Intrinsics, n: int, rng) -> np.ndarray:
    pts = box.anchor.as_array() + rng.random((n, 3)) * np.asarray(box.extents)
    cam = pose_inv.apply(pts)
    cam = cam[cam[:, 2] > 1e-6]
    u = k.fx * cam[:, 0] / cam[:, 2] + k.cx
    v = k.fy * cam[:, 1] / cam[:, 2] + k.cy
    return np.column_stack([u, v, cam[:, 2]])


def generate(scenario: Scenario) -> tuple[SceneFile, GroundTruthLabels]:
    """Emit camera-frame proposals for every frame of ``scenario``."""
    if scenario.objects:
        min_extent = min(min(b.extents) for _, b in scenario.objects)
        if scenario.extent_sigma >= min_extent / 4:
            raise ScenarioError(
                f"extent_sigma {scenario.extent_sigma} must be below min extent / 4 ({min_extent / 4})",
                "noise.extent_sigma",
            )
    n_frames, n_obj = scenario.n_frames, len(scenario.objects)
    noise_rng = np.random.default_rng([scenario.seed, 1])
    normals = noise_rng.standard_normal((n_frames, n_obj, 6))
    drops = noise_rng.random((n_frames, n_obj))
    extra_rng = np.random.default_rng([scenario.seed, 2])

    k = scenario.intrinsics
    if scenario.depth_samples_per_object and k is None:
        k = DEFAULT_INTRINSICS
    frames, truth_frames = [], []
    for i, pose in enumerate(scenario.trajectory):
        inv = pose.inverse()
        euler = RotationEuler(*euler_zyx(inv.rotation))
        proposals, ids, samples = [], [], []
        for j, (obj, box) in enumerate(scenario.objects):
            if scenario.is_occluded(obj, i) or drops[i, j] < scenario.dropout:
                continue
            # anchor of the camera-frame box before jitter; written as
            # R a + t + (R h - h) so an identity pose reproduces it exactly
            true_ext = np.asarray(box.extents)
            half = 0.5 * true_ext
            rot = inv.rotation
            nominal = rot @ box.anchor.as_array() + inv.translation_array + (rot @ half - half)
            ext = np.maximum(true_ext + scenario.extent_sigma * normals[i, j, 3:], 0.25 * true_ext)
            anchor = nominal + (half - 0.5 * ext) + scenario.anchor_sigma * normals[i, j, :3]
            proposals.append(Cuboid(Vec3(*anchor), tuple(ext), euler))
            ids.append(obj)
            if scenario.depth_samples_per_object:
                samples.append(_depth_samples(box, inv, k, scenario.depth_samples_per_object, extra_rng))
        if scenario.shuffle and proposals:
            order = extra_rng.permutation(len(proposals))
            proposals = [proposals[o] for o in order]
            ids = [ids[o] for o in order]
        depth = np.concatenate(samples) if samples else np.empty((0, 3))
        frames.append(FrameObservation(i, pose, tuple(proposals), depth))
        truth_frames.append((i, ids))
    header = SceneHeader(k, scenario.voxel_size, scenario.seed)
    truth = GroundTruthLabels(
        truth_frames,
        [obj for obj, _ in scenario.objects],
        {o: list(w) for o, w in scenario.occlusions.items()},
    )
    return SceneFile(header, frames), truth


# ---------------------------------------------------------------------------
# truth files


def write_truth(path, truth: GroundTruthLabels) -> None:
    head = {
        "type": "header",
        "format": TRUTH_FORMAT,
        "version": 1,
        "objects": list(truth.object_ids),
        "occlusions": {str(o): [list(w) for w in ws] for o, ws in sorted(truth.occlusions.items())},
    }
    dumps = lambda r: json.dumps(r, separators=(",", ":"))  # noqa: E731
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(head) + "\n")
        for idx, ids in truth.frames:
            fh.write(dumps({"type": "frame", "frame_index": idx, "ids": ids}) + "\n")


def read_truth(path) -> GroundTruthLabels:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = [(i, raw) for i, raw in enumerate(fh, start=1) if raw.strip()]
    if not lines:
        raise FormatError("empty file: missing header", path, 1)
    try:
        head = json.loads(lines[0][1])
        if head.get("format") != TRUTH_FORMAT:
            raise FormatError(f"expected format {TRUTH_FORMAT!r}", path, lines[0][0], "format")
        objects = [int(o) for o in head["objects"]]
        occlusions = {int(o): [tuple(w) for w in ws] for o, ws in head.get("occlusions", {}).items()}
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"bad header: {exc}", path, lines[0][0]) from None
    frames = []
    for ln, raw in lines[1:]:
        try:
            rec = json.loads(raw)
            frames.append((int(rec["frame_index"]), [int(i) for i in rec["ids"]]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad frame record: {exc}", path, ln) from None
    return GroundTruthLabels(frames, objects, occlusions)


# ---------------------------------------------------------------------------
# voxel oracle


def _axis_mask(centers: np.ndarray, start: float, length: float) -> np.ndarray:
    return (centers >= start) & (centers <= start + length)


def voxel_counts(a: Cuboid, b: Cuboid, pitch: float, dense: bool = False) -> tuple[int, int, int]:
    """Voxel counts ``(|a|, |b|, |a & b|)`` on a shared grid of ``pitch``.

    The grid spans the joint bounds of both boxes with voxel centres at
    ``lo + (i + 0.5) * pitch``; a voxel belongs to a box when its centre is
    inside it.  Occupancy of an axis-aligned box on this grid is the outer
    product of three per-axis masks, so counts are products of per-axis mask
    sums.  ``dense=True`` builds the full 3D boolean volumes instead (only
    sensible for small grids); both give identical integers.
    """
    if not pitch > 0:
        raise ValueError("pitch must be positive")
    if not (a.rotation.is_zero and b.rotation.is_zero):
        raise GeometryError("voxel oracle needs axis-aligned boxes")
    if pitch > min(min(a.extents), min(b.extents)) / 10:
        raise ValueError(f"pitch {pitch} too coarse for the smallest extent")
    masks_a, masks_b = [], []
    for axis in range(3):
        sa, la = tuple(a.anchor)[axis], a.extents[axis]
        sb, lb = tuple(b.anchor)[axis], b.extents[axis]
        lo = min(sa, sb)
        n = int(math.ceil((max(sa + la, sb + lb) - lo) / pitch))
        centers = lo + (np.arange(n) + 0.5) * pitch
        masks_a.append(_axis_mask(centers, sa, la))
        masks_b.append(_axis_mask(centers, sb, lb))
    if dense:
        vol_a = masks_a[0][:, None, None] & masks_a[1][None, :, None] & masks_a[2][None, None, :]
        vol_b = masks_b[0][:, None, None] & masks_b[1][None, :, None] & masks_b[2][None, None, :]
        return int(vol_a.sum()), int(vol_b.sum()), int((vol_a & vol_b).sum())
    count_a = math.prod(int(m.sum()) for m in masks_a)
    count_b = math.prod(int(m.sum()) for m in masks_b)
    count_ab = math.prod(int((ma & mb).sum()) for ma, mb in zip(masks_a, masks_b))
    return count_a, count_b, count_ab


def voxel_iou_oracle(a: Cuboid, b: Cuboid, pitch: float) -> float:
    """Rasterised Jaccard index ``count(a & b) / count(a | b)``.

    This is the inclusion-exclusion IoU; it does not model the per-axis
    product union.
    """
    ca, cb, cab = voxel_counts(a, b, pitch)
    return cab / (ca + cb - cab)


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class Metrics:
    consistency: float
    id_switches: int
    reid_success: float
    count_error: int
    n_objects: int = 0
    n_windows: int = 0
    labels_issued: int = 0

    def summary_line(self) -> str:
        return (
            f"consistency={self.consistency:.3f} switches={self.id_switches} "
            f"reid={self.reid_success:.3f} count_err={self.count_error}"
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "consistency": round(self.consistency, 9),
                "id_switches": self.id_switches,
                "reid_success": round(self.reid_success, 9),
                "count_error": self.count_error,
                "n_objects": self.n_objects,
                "n_windows": self.n_windows,
                "labels_issued": self.labels_issued,
            },
            separators=(",", ":"),
        )

    def table(self) -> str:
        rows = [
            ("label consistency", f"{self.consistency:.3f}"),
            ("ID switches", str(self.id_switches)),
            ("re-ID success", f"{self.reid_success:.3f} ({self.n_windows} windows)"),
            ("track-count error", f"{self.count_error} ({self.labels_issued} labels, {self.n_objects} objects)"),
        ]
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


class EvaluationError(ValueError):
    pass


def evaluate(tracks: TrackFile, truth: GroundTruthLabels) -> Metrics:
    """Score a track file against ground-truth ids.

    * consistency: share of observed objects that kept a single label.
    * ID switches: observations whose label differs from the object's most
      common label (ties go to the smaller label).
    * re-ID success: share of occlusion windows where the label of the first
      observation after the window equals that of the last one before it.
      Windows without observations on both sides are skipped.
    * count error: ``|labels issued - observed objects|``.
    """
    if len(tracks.frames) != len(truth.frames):
        raise EvaluationError(
            f"frame count mismatch: {len(tracks.frames)} track frames vs {len(truth.frames)} truth frames"
        )
    seen: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for (t_idx, results), (g_idx, ids) in zip(tracks.frames, truth.frames):
        if t_idx != g_idx:
            raise EvaluationError(f"frame index mismatch: {t_idx} vs {g_idx}")
        if len(results) != len(ids):
            raise EvaluationError(f"frame {t_idx}: {len(results)} matches vs {len(ids)} truth ids")
        by_proposal = {r.proposal_index: r.assigned_label for r in results}
        for p, obj in enumerate(ids):
            if p not in by_proposal:
                raise EvaluationError(f"frame {t_idx}: no match for proposal {p}")
            seen[obj].append((t_idx, by_proposal[p]))

    consistent = switches = 0
    for obs in seen.values():
        labels = [lab for _, lab in obs]
        counts = Counter(labels)
        modal = min(counts, key=lambda lab: (-counts[lab], lab))
        switches += sum(1 for lab in labels if lab != modal)
        consistent += len(counts) == 1

    windows = restored = 0
    for obj, ws in truth.occlusions.items():
        obs = seen.get(obj, [])
        for start, end in ws:
            before = [lab for f, lab in obs if f < start]
            after = [lab for f, lab in obs if f > end]
            if before and after:
                windows += 1
                restored += before[-1] == after[0]

    n_objects = len(seen)
    issued = len(tracks.registry)
    return Metrics(
        consistency=consistent / n_objects if n_objects else 1.0,
        id_switches=switches,
        reid_success=restored / windows if windows else 1.0,
        count_error=abs(issued - n_objects),
        n_objects=n_objects,
        n_windows=windows,
        labels_issued=issued,
    )
