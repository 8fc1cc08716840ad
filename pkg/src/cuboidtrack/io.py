"""Line-delimited JSON formats for scenes, tracks and heatmaps, plus PLY export.

Every file starts with a ``header`` record; one record follows per frame (or
per cell for grid files).  Box rows are always the nine numbers
``[x, y, z, l, w, h, rx, ry, rz]``; poses are a row-major 3x3 rotation ``R``
and a translation ``t``.  See ``docs/FORMAT.md`` for the full schema.

Scene and grid files store floats at full precision, so they round-trip
exactly.  Track files round every float to 9 significant digits, which makes
the output stable across platforms and trivially diffable.
"""

from __future__ import annotations

import colorsys
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from cuboidtrack.geometry import Cuboid, GeometryError, Intrinsics, Pose, Vec3, first_invalid_row
from cuboidtrack.heatmap import DEFAULT_VOXEL_SIZE, HeatCell, HeatmapGrid
from cuboidtrack.tracker import MatchResult, ObjectTrack, Registry, TrackerConfig

__all__ = [
    "FormatError",
    "FrameObservation",
    "SceneHeader",
    "SceneFile",
    "SceneReader",
    "TrackFile",
    "TrackWriter",
    "read_scene",
    "write_scene",
    "write_tracks",
    "read_tracks",
    "write_grid",
    "read_grid",
    "export_ply",
    "label_color",
    "convert_pose_proposals",
]

SCENE_FORMAT = "cuboid-scene"
TRACK_FORMAT = "cuboid-tracks"
GRID_FORMAT = "cuboid-grid"
VERSION = 1
GRAY = (128, 128, 128)


class FormatError(ValueError):
    """A file could not be parsed or violates a data invariant."""

    def __init__(self, message: str, path=None, line: int | None = None, field: str | None = None):
        parts = []
        if path is not None:
            parts.append(str(path))
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field '{field}'")
        prefix = ":".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line
        self.field = field


class FrameObservation:
    """One frame: camera pose plus camera-frame proposals.

    ``proposals`` may be a sequence of :class:`Cuboid` or an (N, 9) array of
    box rows; the array form is kept internally and cuboids are built on
    first access.  ``depth_samples`` optionally carries ``(u, v, z)`` pixel
    samples for the heatmap.
    """

    __slots__ = ("frame_index", "pose", "proposal_array", "depth_samples", "_proposals")

    def __init__(self, frame_index: int, pose: Pose, proposals=(), depth_samples=None):
        if isinstance(frame_index, bool) or int(frame_index) != frame_index or frame_index < 0:
            raise ValueError("frame_index must be a non-negative integer")
        self.frame_index = int(frame_index)
        self.pose = pose
        if isinstance(proposals, np.ndarray):
            rows = np.array(proposals, dtype=np.float64).reshape(-1, 9)
            bad = first_invalid_row(rows)
            if bad >= 0:
                Cuboid.from_params(rows[bad].tolist())  # raises with the precise reason
                raise GeometryError(f"proposal {bad} is invalid")
            self._proposals = None
        else:
            self._proposals = tuple(proposals)
            rows = np.array([c.params for c in self._proposals], dtype=np.float64).reshape(-1, 9)
        rows.setflags(write=False)
        self.proposal_array = rows
        samples = np.array(
            np.empty((0, 3)) if depth_samples is None else depth_samples, dtype=np.float64
        ).reshape(-1, 3)
        samples.setflags(write=False)
        self.depth_samples = samples

    @property
    def proposals(self) -> tuple[Cuboid, ...]:
        if self._proposals is None:
            self._proposals = tuple(Cuboid.from_params(r) for r in self.proposal_array.tolist())
        return self._proposals

    def __eq__(self, other):
        if not isinstance(other, FrameObservation):
            return NotImplemented
        return (
            self.frame_index == other.frame_index
            and self.pose == other.pose
            and np.array_equal(self.proposal_array, other.proposal_array)
            and np.array_equal(self.depth_samples, other.depth_samples)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"FrameObservation(frame_index={self.frame_index}, pose={self.pose!r}, "
            f"proposals={len(self.proposal_array)}, depth_samples={len(self.depth_samples)})"
        )


@dataclass(frozen=True)
class SceneHeader:
    intrinsics: Intrinsics | None = None
    voxel_size: float = DEFAULT_VOXEL_SIZE
    seed: int | None = None
    version: int = VERSION


@dataclass
class SceneFile:
    header: SceneHeader
    frames: list[FrameObservation]

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class TrackFile:
    config: dict
    frames: list[tuple[int, list[MatchResult]]]
    registry: Registry


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def _g9(value: float) -> float:
    return float(f"{value:.9g}")


# ---------------------------------------------------------------------------
# scenes


def _pose_record(pose: Pose) -> dict:
    return {"R": [float(v) for v in pose.rotation.reshape(-1)], "t": list(pose.translation)}


def _frame_record(frame: FrameObservation) -> dict:
    rec = {
        "type": "frame",
        "frame_index": frame.frame_index,
        "pose": _pose_record(frame.pose),
        "proposals": frame.proposal_array.tolist(),
    }
    if len(frame.depth_samples):
        rec["depth"] = frame.depth_samples.tolist()
    return rec


def _header_record(header: SceneHeader) -> dict:
    k = header.intrinsics
    return {
        "type": "header",
        "format": SCENE_FORMAT,
        "version": header.version,
        "intrinsics": None if k is None else {"fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy},
        "voxel_size": header.voxel_size,
        "seed": header.seed,
    }


def write_scene(path, scene: SceneFile) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dumps(_header_record(scene.header)) + "\n")
        for frame in scene.frames:
            fh.write(_dumps(_frame_record(frame)) + "\n")


def _numbers(value, n: int, what: str, path, line) -> list[float]:
    if not isinstance(value, list) or len(value) != n:
        raise FormatError(f"expected a list of {n} numbers", path, line, what)
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise FormatError(f"non-numeric entry {v!r}", path, line, what)
        out.append(float(v))
    return out


def _require(rec: dict, key: str, path, line):
    if key not in rec:
        raise FormatError("missing field", path, line, key)
    return rec[key]


def _parse_line(raw: str, path, line) -> dict:
    try:
        rec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", path, line) from None
    if not isinstance(rec, dict):
        raise FormatError("record must be a JSON object", path, line)
    return rec


def _check_header(rec: dict, fmt: str, path, line) -> None:
    if rec.get("type") != "header":
        raise FormatError("first record must be a header", path, line, "type")
    if rec.get("format") != fmt:
        raise FormatError(f"expected format {fmt!r}, got {rec.get('format')!r}", path, line, "format")
    if rec.get("version") != VERSION:
        raise FormatError(f"unsupported version {rec.get('version')!r}", path, line, "version")


def _parse_scene_header(rec: dict, path, line) -> SceneHeader:
    _check_header(rec, SCENE_FORMAT, path, line)
    k = rec.get("intrinsics")
    intrinsics = None
    if k is not None:
        try:
            intrinsics = Intrinsics(*(float(_require(k, f, path, line)) for f in ("fx", "fy", "cx", "cy")))
        except (GeometryError, TypeError) as exc:
            raise FormatError(str(exc), path, line, "intrinsics") from None
    voxel = rec.get("voxel_size", DEFAULT_VOXEL_SIZE)
    if isinstance(voxel, bool) or not isinstance(voxel, (int, float)) or not voxel > 0:
        raise FormatError("voxel_size must be a positive number", path, line, "voxel_size")
    seed = rec.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise FormatError("seed must be an integer or null", path, line, "seed")
    return SceneHeader(intrinsics, float(voxel), seed)


def _is_number(v) -> bool:
    t = type(v)
    return t is float or t is int


def _proposal_rows(props: list, idx: int, path, line) -> np.ndarray:
    if all(type(r) is list and len(r) == 9 and all(map(_is_number, r)) for r in props):
        rows = np.array(props, dtype=np.float64).reshape(-1, 9)
        bad = first_invalid_row(rows)
        if bad < 0:
            return rows
        props = props[bad:bad + 1]
        offset = bad
    else:
        offset = 0
    # slow path, only to locate and describe the problem
    for j, row in enumerate(props, start=offset):
        nums = _numbers(row, 9, f"proposals[{j}]", path, line)
        try:
            Cuboid.from_params(nums)
        except GeometryError as exc:
            raise FormatError(f"frame {idx}, proposal {j}: {exc}", path, line, f"proposals[{j}]") from None
    raise AssertionError("unreachable")  # pragma: no cover


def _parse_frame(rec: dict, path, line) -> FrameObservation:
    if rec.get("type") != "frame":
        raise FormatError(f"unexpected record type {rec.get('type')!r}", path, line, "type")
    idx = _require(rec, "frame_index", path, line)
    if isinstance(idx, bool) or not isinstance(idx, int) or idx < 0:
        raise FormatError("frame_index must be a non-negative integer", path, line, "frame_index")
    pose_rec = _require(rec, "pose", path, line)
    if not isinstance(pose_rec, dict):
        raise FormatError("pose must be an object", path, line, "pose")
    rot = _numbers(_require(pose_rec, "R", path, line), 9, "pose.R", path, line)
    trans = _numbers(_require(pose_rec, "t", path, line), 3, "pose.t", path, line)
    try:
        pose = Pose(np.array(rot).reshape(3, 3), Vec3(*trans))
    except GeometryError as exc:
        raise FormatError(f"frame {idx}: {exc}", path, line, "pose") from None
    props = _require(rec, "proposals", path, line)
    if not isinstance(props, list):
        raise FormatError("proposals must be a list", path, line, "proposals")
    rows = _proposal_rows(props, idx, path, line)
    depth = rec.get("depth", [])
    if not isinstance(depth, list):
        raise FormatError("depth must be a list", path, line, "depth")
    samples = [_numbers(s, 3, f"depth[{j}]", path, line) for j, s in enumerate(depth)]
    for j, (u, v, z) in enumerate(samples):
        if not (math.isfinite(u) and math.isfinite(v) and math.isfinite(z) and z > 0):
            raise FormatError(f"frame {idx}, depth sample {j} is invalid", path, line, f"depth[{j}]")
    return FrameObservation(idx, pose, rows, np.array(samples).reshape(-1, 3))


class SceneReader:
    """Streaming scene reader; frames are parsed one line at a time.

    >>> with SceneReader(path) as reader:          # doctest: +SKIP
    ...     for frame in reader:
    ...         ...
    """

    def __init__(self, path):
        self.path = Path(path)
        self._fh = None
        self.header: SceneHeader | None = None
        self._line = 0

    def __enter__(self) -> "SceneReader":
        self._fh = open(self.path, "r", encoding="utf-8")
        raw = self._next_line()
        if raw is None:
            raise FormatError("empty file: missing header", self.path, 1)
        self.header = _parse_scene_header(_parse_line(raw, self.path, self._line), self.path, self._line)
        return self

    def __exit__(self, *exc):
        self._fh.close()

    def _next_line(self) -> str | None:
        for raw in self._fh:
            self._line += 1
            if raw.strip():
                return raw
        return None

    def __iter__(self) -> Iterator[FrameObservation]:
        last = -1
        while (raw := self._next_line()) is not None:
            rec = _parse_line(raw, self.path, self._line)
            frame = _parse_frame(rec, self.path, self._line)
            if frame.frame_index <= last:
                raise FormatError(
                    f"frame {frame.frame_index}: frame_index not strictly increasing (previous {last})",
                    self.path,
                    self._line,
                    "frame_index",
                )
            last = frame.frame_index
            yield frame


def read_scene(path) -> SceneFile:
    with SceneReader(path) as reader:
        frames = list(reader)
        return SceneFile(reader.header, frames)


# ---------------------------------------------------------------------------
# tracks


def _config_record(cfg: TrackerConfig | dict | None) -> dict:
    if cfg is None:
        return {}
    if isinstance(cfg, dict):
        return dict(cfg)
    return {
        "tau": cfg.tau,
        "union_mode": cfg.union_mode.value,
        "assignment": cfg.assignment.value,
        "fusion_alpha_mode": cfg.fusion_alpha_mode.value,
        "fusion_alpha": cfg.fusion_alpha,
    }


def _track_record(track: ObjectTrack) -> dict:
    return {
        "label": track.label,
        "box": [_g9(v) for v in track.box.params],
        "observation_count": track.observation_count,
        "first_seen": track.first_seen,
        "last_seen": track.last_seen,
        "heat": _g9(track.heat),
    }


class TrackWriter:
    """Streams per-frame match records; the registry is written on close."""

    def __init__(self, path, config: TrackerConfig | dict | None = None):
        self.path = Path(path)
        self.config = _config_record(config)
        self._fh = None

    def __enter__(self) -> "TrackWriter":
        try:
            self._fh = open(self.path, "w", encoding="utf-8", newline="\n")
        except OSError as exc:
            raise OSError(f"{self.path}: {exc.strerror}") from exc
        head = {"type": "header", "format": TRACK_FORMAT, "version": VERSION, "config": self.config}
        self._fh.write(_dumps(head) + "\n")
        return self

    def write_frame(self, frame_index: int, results: Sequence[MatchResult]) -> None:
        matches = [
            {"proposal": r.proposal_index, "label": r.assigned_label, "iou": _g9(r.best_iou), "new": r.is_new}
            for r in results
        ]
        self._fh.write(_dumps({"type": "frame", "frame_index": frame_index, "matches": matches}) + "\n")

    def write_registry(self, registry: Registry) -> None:
        rec = {
            "type": "registry",
            "next_label": registry.next_label,
            "tracks": [_track_record(t) for t in registry.tracks],
        }
        self._fh.write(_dumps(rec) + "\n")

    def __exit__(self, *exc):
        self._fh.close()


def write_tracks(
    path,
    results: Iterable[tuple[int, Sequence[MatchResult]]],
    registry: Registry,
    config: TrackerConfig | dict | None = None,
) -> None:
    """Write ``(frame_index, results)`` pairs and the final registry."""
    with TrackWriter(path, config) as writer:
        for frame_index, frame_results in results:
            writer.write_frame(frame_index, frame_results)
        writer.write_registry(registry)


def _parse_registry(rec: dict, path, line) -> Registry:
    tracks = []
    for j, t in enumerate(_require(rec, "tracks", path, line)):
        fieldname = f"tracks[{j}]"
        try:
            box = Cuboid.from_params(_numbers(t["box"], 9, fieldname + ".box", path, line))
            tracks.append(
                ObjectTrack(
                    int(t["label"]),
                    box,
                    int(t["observation_count"]),
                    int(t["first_seen"]),
                    int(t["last_seen"]),
                    float(t["heat"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(str(exc), path, line, fieldname) from None
    try:
        return Registry(tuple(tracks), int(_require(rec, "next_label", path, line)))
    except (TypeError, ValueError) as exc:
        raise FormatError(str(exc), path, line, "tracks") from None


def read_tracks(path) -> TrackFile:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = [(i, raw) for i, raw in enumerate(fh, start=1) if raw.strip()]
    if not lines:
        raise FormatError("empty file: missing header", path, 1)
    ln, raw = lines[0]
    head = _parse_line(raw, path, ln)
    _check_header(head, TRACK_FORMAT, path, ln)
    frames = []
    registry = None
    last = -1
    for ln, raw in lines[1:]:
        rec = _parse_line(raw, path, ln)
        kind = rec.get("type")
        if registry is not None:
            raise FormatError("records after the registry", path, ln, "type")
        if kind == "frame":
            idx = _require(rec, "frame_index", path, ln)
            if not isinstance(idx, int) or idx <= last:
                raise FormatError("frame_index not strictly increasing", path, ln, "frame_index")
            last = idx
            results = []
            for j, m in enumerate(_require(rec, "matches", path, ln)):
                try:
                    results.append(MatchResult(int(m["proposal"]), int(m["label"]), float(m["iou"]), bool(m["new"])))
                except (KeyError, TypeError, ValueError) as exc:
                    raise FormatError(str(exc), path, ln, f"matches[{j}]") from None
            frames.append((idx, results))
        elif kind == "registry":
            registry = _parse_registry(rec, path, ln)
        else:
            raise FormatError(f"unexpected record type {kind!r}", path, ln, "type")
    if registry is None:
        raise FormatError("missing final registry record", path, ln)
    known = set(registry.labels)
    for idx, results in frames:
        for r in results:
            if r.assigned_label not in known:
                raise FormatError(f"frame {idx}: label {r.assigned_label} not in registry", path, None, "label")
    return TrackFile(head.get("config", {}), frames, registry)


# ---------------------------------------------------------------------------
# heatmap grids


def write_grid(path, grid: HeatmapGrid) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dumps({"type": "header", "format": GRID_FORMAT, "version": VERSION, "voxel_size": grid.voxel_size}) + "\n")
        for key in sorted(grid.cells):
            cell = grid.cells[key]
            rec = {
                "type": "cell",
                "key": list(key),
                "mean": list(cell.mean_position),
                "heat": cell.heat,
                "count": cell.sample_count,
            }
            fh.write(_dumps(rec) + "\n")


def read_grid(path) -> HeatmapGrid:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = [(i, raw) for i, raw in enumerate(fh, start=1) if raw.strip()]
    if not lines:
        raise FormatError("empty file: missing header", path, 1)
    ln, raw = lines[0]
    head = _parse_line(raw, path, ln)
    _check_header(head, GRID_FORMAT, path, ln)
    try:
        grid = HeatmapGrid(float(_require(head, "voxel_size", path, ln)))
    except (GeometryError, TypeError) as exc:
        raise FormatError(str(exc), path, ln, "voxel_size") from None
    for ln, raw in lines[1:]:
        rec = _parse_line(raw, path, ln)
        key = tuple(int(k) for k in _numbers(_require(rec, "key", path, ln), 3, "key", path, ln))
        mean = _numbers(_require(rec, "mean", path, ln), 3, "mean", path, ln)
        heat = rec.get("heat")
        count = rec.get("count")
        if not isinstance(heat, (int, float)) or not heat > 0:
            raise FormatError("heat must be positive", path, ln, "heat")
        if not isinstance(count, int) or count < 1:
            raise FormatError("count must be a positive integer", path, ln, "count")
        if key in grid.cells:
            raise FormatError(f"duplicate cell {key}", path, ln, "key")
        try:
            pos = Vec3(*mean)
        except GeometryError as exc:
            raise FormatError(str(exc), path, ln, "mean") from None
        if grid.key_of(pos) != key:
            raise FormatError(f"mean {mean} does not lie in voxel {key}", path, ln, "mean")
        grid.cells[key] = HeatCell(pos, float(heat), count)
    return grid


# ---------------------------------------------------------------------------
# PLY


def label_color(label: int) -> tuple[int, int, int]:
    """Deterministic, well-spread RGB colour for a track label."""
    hue = (label * 0.618033988749895) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.65, 0.95)
    return round(r * 255), round(g * 255), round(b * 255)


_BOX_EDGES = [
    (0, 1), (0, 2), (0, 4), (1, 3), (1, 5), (2, 3),
    (2, 6), (3, 7), (4, 5), (4, 6), (5, 7), (6, 7),
]


def export_ply(path, grid: HeatmapGrid, registry: Registry) -> None:
    """Write heat cells and track boxes as an ASCII PLY.

    ``vertex`` holds one point per heat cell, coloured by the lowest-labelled
    track whose box contains it (gray otherwise).  Box corners go into a
    separate ``corner`` element so the vertex count always equals the cell
    count; ``edge`` indices refer to ``corner``.
    """
    _, means, _, _ = grid.arrays()
    colors = np.tile(np.array(GRAY, dtype=np.int64), (len(means), 1))
    boxes = registry.boxes
    if len(means) and len(boxes):
        lo, hi = boxes[:, :3], boxes[:, :3] + boxes[:, 3:]
        owner = np.full(len(means), -1)
        for j in range(len(boxes) - 1, -1, -1):
            inside = np.all((means >= lo[j]) & (means <= hi[j]), axis=1)
            owner[inside] = j
        for j in np.unique(owner[owner >= 0]):
            colors[owner == j] = label_color(registry.tracks[j].label)

    corner_lines, edge_lines = [], []
    for j, track in enumerate(registry.tracks):
        rgb = label_color(track.label)
        for c in track.box.corners():
            corner_lines.append("%.9g %.9g %.9g %d %d %d" % (*c, *rgb))
        edge_lines.extend(f"{8 * j + a} {8 * j + b}" for a, b in _BOX_EDGES)

    header = [
        "ply",
        "format ascii 1.0",
        "comment cuboidtrack heatmap export",
        f"element vertex {len(means)}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        f"element corner {len(corner_lines)}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        f"element edge {len(edge_lines)}",
        "property int vertex1",
        "property int vertex2",
        "end_header",
    ]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(header) + "\n")
        for p, c in zip(means.tolist(), colors.tolist()):
            fh.write("%.9g %.9g %.9g %d %d %d\n" % (*p, *c))
        for line in corner_lines + edge_lines:
            fh.write(line + "\n")


# ---------------------------------------------------------------------------
# external pose / proposal dumps


def _read_numeric_rows(path, width: int) -> list[tuple[int, list[float]]]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.replace(",", " ").split()
            if len(parts) != width + 1:
                raise FormatError(f"expected {width + 1} columns, got {len(parts)}", path, ln)
            try:
                idx = int(parts[0])
                values = [float(p) for p in parts[1:]]
            except ValueError as exc:
                raise FormatError(str(exc), path, ln) from None
            rows.append((idx, values))
    return rows


def convert_pose_proposals(
    pose_path,
    proposal_path,
    intrinsics: Intrinsics | None = None,
    voxel_size: float = DEFAULT_VOXEL_SIZE,
) -> SceneFile:
    """Assemble a scene from a pose dump and a proposal dump.

    ``pose_path``: one line per frame, ``frame_index`` followed by the 9
    row-major rotation entries and the 3 translation entries of the
    camera-to-world pose.  ``proposal_path``: one line per proposal,
    ``frame_index`` followed by ``x y z l w h rx ry rz`` in the camera frame.
    Whitespace or commas separate columns; ``#`` starts a comment.
    """
    poses = {}
    for idx, vals in _read_numeric_rows(pose_path, 12):
        if idx in poses:
            raise FormatError(f"duplicate pose for frame {idx}", pose_path)
        try:
            poses[idx] = Pose(np.array(vals[:9]).reshape(3, 3), Vec3(*vals[9:]))
        except GeometryError as exc:
            raise FormatError(f"frame {idx}: {exc}", pose_path) from None
    proposals: dict[int, list[Cuboid]] = {idx: [] for idx in poses}
    for idx, vals in _read_numeric_rows(proposal_path, 9):
        if idx not in poses:
            raise FormatError(f"proposal for frame {idx} has no pose", proposal_path)
        try:
            proposals[idx].append(Cuboid.from_params(vals))
        except GeometryError as exc:
            raise FormatError(f"frame {idx}, proposal {len(proposals[idx])}: {exc}", proposal_path) from None
    frames = [FrameObservation(i, poses[i], tuple(proposals[i])) for i in sorted(poses)]
    return SceneFile(SceneHeader(intrinsics, voxel_size), frames)
