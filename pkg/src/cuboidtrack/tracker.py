"""Object database and match-or-register labelling.

Each frame's proposals are aligned, moved into the global frame and scored
against every stored track by 3D IoU.  A proposal that overlaps a track by at
least ``tau`` inherits its label; anything else opens a new track.  Tracks are
never deleted, so an object that disappears behind another one picks its old
label back up as soon as it is seen again at the same place.

Registries are immutable: every update returns a new :class:`Registry`.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from cuboidtrack.geometry import (
    Cuboid,
    GeometryError,
    UnionMode,
    Vec3,
    _require_aligned,
    align_and_transform,
    iou_matrix,
)

logger = logging.getLogger(__name__)

__all__ = [
    "TrackingError",
    "FusionMode",
    "AssignmentMode",
    "TrackerConfig",
    "ObjectTrack",
    "Registry",
    "MatchResult",
    "best_match",
    "register_new",
    "update_track",
    "assign_labels",
    "process_frame",
    "Tracker",
]


class TrackingError(ValueError):
    """A frame could not be processed; the message names the frame index."""

    def __init__(self, frame_index: int, message: str):
        super().__init__(f"frame {frame_index}: {message}")
        self.frame_index = frame_index


class FusionMode(str, enum.Enum):
    COUNT_WEIGHTED = "count-weighted"
    FIXED = "fixed"


class AssignmentMode(str, enum.Enum):
    GREEDY = "greedy"
    ARGMAX = "argmax"

    @classmethod
    def parse(cls, value: "str | AssignmentMode") -> "AssignmentMode":
        if isinstance(value, cls):
            return value
        aliases = {"greedy-one-to-one": cls.GREEDY, "independent-argmax": cls.ARGMAX}
        return aliases.get(value) or cls(value)


@dataclass(frozen=True)
class TrackerConfig:
    """Tracker settings.

    ``fusion_alpha`` only matters for ``fusion_alpha_mode="fixed"``: the stored
    box moves to ``(1 - alpha) * old + alpha * observed``, so ``1.0`` keeps the
    latest observation and ``0.0`` keeps the first one.
    """

    tau: float = 0.25
    fusion_alpha_mode: FusionMode = FusionMode.COUNT_WEIGHTED
    assignment: AssignmentMode = AssignmentMode.GREEDY
    union_mode: UnionMode = UnionMode.PAPER
    fusion_alpha: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")
        if not 0.0 <= self.fusion_alpha <= 1.0:
            raise ValueError(f"fusion_alpha must be in [0, 1], got {self.fusion_alpha}")
        object.__setattr__(self, "fusion_alpha_mode", FusionMode(self.fusion_alpha_mode))
        object.__setattr__(self, "assignment", AssignmentMode.parse(self.assignment))
        object.__setattr__(self, "union_mode", UnionMode.parse(self.union_mode))


@dataclass(frozen=True)
class ObjectTrack:
    label: int
    box: Cuboid
    observation_count: int = 1
    first_seen: int = 0
    last_seen: int = 0
    heat: float = 1.0

    def __post_init__(self):
        if self.label < 1:
            raise ValueError(f"labels are positive integers, got {self.label}")
        if self.observation_count < 1:
            raise ValueError("observation_count must be at least 1")
        if self.last_seen < self.first_seen:
            raise ValueError("last_seen precedes first_seen")
        if self.heat < 0:
            raise ValueError("heat must be non-negative")
        _require_aligned(self.box)


@dataclass(frozen=True)
class Registry:
    """Ordered, label-sorted collection of tracks plus the next free label."""

    tracks: tuple[ObjectTrack, ...] = ()
    next_label: int = 1
    _boxes: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        tracks = tuple(self.tracks)
        object.__setattr__(self, "tracks", tracks)
        labels = [t.label for t in tracks]
        if any(b <= a for a, b in zip(labels, labels[1:])):
            raise ValueError("track labels must be unique and increasing")
        if labels and self.next_label <= labels[-1]:
            raise ValueError("next_label must exceed every issued label")
        if self.next_label < 1:
            raise ValueError("next_label must be positive")
        if self._boxes is None:
            boxes = np.array([t.box.aabb_params for t in tracks], dtype=np.float64)
            object.__setattr__(self, "_boxes", boxes.reshape(-1, 6))
        self._boxes.setflags(write=False)

    def __len__(self) -> int:
        return len(self.tracks)

    @property
    def labels(self) -> list[int]:
        return [t.label for t in self.tracks]

    @property
    def boxes(self) -> np.ndarray:
        """(M, 6) array of track boxes in label order."""
        return self._boxes

    def get(self, label: int) -> ObjectTrack:
        for track in self.tracks:
            if track.label == label:
                return track
        raise KeyError(label)


@dataclass(frozen=True)
class MatchResult:
    proposal_index: int
    assigned_label: int
    best_iou: float
    is_new: bool


def _iou_aligned(a: Cuboid, b: Cuboid, paper: bool) -> float:
    # same arithmetic as geometry._overlap, inlined with early exits
    ax, ay, az = a.anchor
    al, aw, ah = a.extents
    bx, by, bz = b.anchor
    bl, bw, bh = b.extents
    d = bx - ax
    ix = min(al, bl + d) if d <= 0.0 else min(bl, al - d)
    if ix <= 0.0:
        return 0.0
    d = by - ay
    iy = min(aw, bw + d) if d <= 0.0 else min(bw, aw - d)
    if iy <= 0.0:
        return 0.0
    d = bz - az
    iz = min(ah, bh + d) if d <= 0.0 else min(bh, ah - d)
    if iz <= 0.0:
        return 0.0
    if paper:
        return ix * iy * iz / ((al + bl - ix) * (aw + bw - iy) * (ah + bh - iz))
    return ix * iy * iz / (al * aw * ah + bl * bw * bh - ix * iy * iz)


def best_match(
    proposal: Cuboid, registry: Registry, union_mode: UnionMode | str = UnionMode.PAPER
) -> tuple[int | None, float]:
    """Label of the track with the highest IoU against ``proposal``.

    One pass over the registry.  Ties go to the lower label.  Returns
    ``(None, 0.0)`` when nothing overlaps.
    """
    _require_aligned(proposal)
    paper = UnionMode.parse(union_mode) is UnionMode.PAPER
    best_label, best = None, 0.0
    for track in registry.tracks:
        score = _iou_aligned(proposal, track.box, paper)
        if score > best:
            best_label, best = track.label, score
    return best_label, best


def register_new(registry: Registry, box: Cuboid, frame_index: int) -> tuple[Registry, int]:
    _require_aligned(box)
    label = registry.next_label
    track = ObjectTrack(label, box, 1, frame_index, frame_index, 1.0)
    boxes = np.vstack([registry.boxes, np.asarray(box.aabb_params)[None, :]])
    return Registry(registry.tracks + (track,), label + 1, boxes), label


def _fuse(old: Sequence[float], obs: Sequence[float], n: int, cfg: TrackerConfig) -> list[float]:
    if cfg.fusion_alpha_mode is FusionMode.COUNT_WEIGHTED:
        return [(n * o + x) / (n + 1) for o, x in zip(old, obs)]
    a = cfg.fusion_alpha
    return [(1.0 - a) * o + a * x for o, x in zip(old, obs)]


def update_track(
    track: ObjectTrack,
    observation: Cuboid,
    frame_index: int,
    cfg: TrackerConfig | None = None,
) -> ObjectTrack:
    """Fold a matched observation into a track.

    With the default count-weighted fusion the stored anchor and extents are
    the running mean ``(n * old + obs) / (n + 1)`` of every matched box.
    """
    _require_aligned(observation)
    return _updated(track, observation.aabb_params, frame_index, cfg or TrackerConfig())


def _updated(track: ObjectTrack, obs: Sequence[float], frame_index: int, cfg: TrackerConfig) -> ObjectTrack:
    fused = _fuse(track.box.aabb_params, obs, track.observation_count, cfg)
    return ObjectTrack(
        track.label,
        Cuboid(Vec3(fused[0], fused[1], fused[2]), (fused[3], fused[4], fused[5])),
        track.observation_count + 1,
        track.first_seen,
        frame_index,
        track.heat + 1.0,
    )


def _greedy_pairs(scores: np.ndarray, tau: float) -> list[tuple[int, int]]:
    rows, cols = np.nonzero(scores >= tau)
    if len(rows) == 0:
        return []
    # track columns are in label order, so column index breaks ties by label
    order = np.lexsort((rows, cols, -scores[rows, cols]))
    used_rows, used_cols, pairs = set(), set(), []
    for k in order:
        r, c = int(rows[k]), int(cols[k])
        if r in used_rows or c in used_cols:
            continue
        used_rows.add(r)
        used_cols.add(c)
        pairs.append((r, c))
    return pairs


def assign_labels(
    boxes: np.ndarray | Sequence[Cuboid],
    registry: Registry,
    cfg: TrackerConfig,
    frame_index: int = 0,
) -> tuple[Registry, list[MatchResult]]:
    """Label global-frame, axis-aligned proposal boxes against ``registry``.

    ``boxes`` is either an (N, 6) array or a sequence of aligned cuboids.
    Returns the updated registry and one :class:`MatchResult` per proposal,
    in proposal order.
    """
    if isinstance(boxes, np.ndarray):
        rows = np.asarray(boxes, dtype=np.float64).reshape(-1, 6)
        cuboids = None
    else:
        cuboids = list(boxes)
        for c in cuboids:
            _require_aligned(c)
        rows = np.array([c.aabb_params for c in cuboids], dtype=np.float64).reshape(-1, 6)
    n = len(rows)
    if n == 0:
        return registry, []

    m = len(registry)
    scores = iou_matrix(rows, registry.boxes, cfg.union_mode) if m else np.zeros((n, 0))

    matched: dict[int, int] = {}
    best = np.zeros(n)
    if m:
        if cfg.assignment is AssignmentMode.GREEDY:
            claimed = np.zeros(m, dtype=bool)
            for r, c in _greedy_pairs(scores, cfg.tau):
                matched[r] = c
                best[r] = scores[r, c]
                claimed[c] = True
            free = np.where(claimed[None, :], -np.inf, scores)
            for r in range(n):
                if r not in matched:
                    best[r] = max(float(free[r].max()), 0.0)
        else:
            arg = scores.argmax(axis=1)
            best = scores[np.arange(n), arg]
            for r in range(n):
                if best[r] >= cfg.tau:
                    matched[r] = int(arg[r])

    row_lists = rows.tolist()
    best_list = best.tolist()
    tracks = list(registry.tracks)
    new_boxes = registry.boxes.copy()
    next_label = registry.next_label
    results = []
    appended = []
    for r in range(n):
        if r in matched:
            c = matched[r]
            tracks[c] = _updated(tracks[c], row_lists[r], frame_index, cfg)
            new_boxes[c] = tracks[c].box.aabb_params
            results.append(MatchResult(r, tracks[c].label, best_list[r], False))
        else:
            x, y, z, l, w, h = row_lists[r]
            box = cuboids[r] if cuboids is not None else Cuboid(Vec3(x, y, z), (l, w, h))
            track = ObjectTrack(next_label, box, 1, frame_index, frame_index, 1.0)
            tracks.append(track)
            appended.append(track.box.aabb_params)
            results.append(MatchResult(r, next_label, best_list[r], True))
            next_label += 1
    if appended:
        new_boxes = np.vstack([new_boxes, np.asarray(appended, dtype=np.float64)])
    return Registry(tuple(tracks), next_label, new_boxes), results


def process_frame(frame, registry: Registry, cfg: TrackerConfig) -> tuple[Registry, list[MatchResult]]:
    """Align, register into the global frame and label one frame's proposals.

    ``frame`` is a :class:`cuboidtrack.io.FrameObservation`.  The input
    registry is left untouched.
    """
    try:
        params = frame.proposal_array
        if len(params) == 0:
            return registry, []
        global_rows = align_and_transform(params, frame.pose)
        return assign_labels(global_rows, registry, cfg, frame.frame_index)
    except GeometryError as exc:
        raise TrackingError(frame.frame_index, str(exc)) from exc


class Tracker:
    """Stateful convenience wrapper around :func:`process_frame`."""

    def __init__(self, config: TrackerConfig | None = None, registry: Registry | None = None):
        self.config = config or TrackerConfig()
        self.registry = registry or Registry()

    def update(self, frame) -> list[MatchResult]:
        self.registry, results = process_frame(frame, self.registry, self.config)
        logger.debug(
            "frame %d: %d proposals, %d tracks",
            frame.frame_index,
            len(results),
            len(self.registry),
        )
        return results

    @property
    def tracks(self) -> tuple[ObjectTrack, ...]:
        return self.registry.tracks
