"""Online labelling of static objects from per-frame 3D cuboid proposals."""

from cuboidtrack.geometry import (
    Cuboid,
    GeometryError,
    Intrinsics,
    Interval,
    Pose,
    RotationEuler,
    UnionMode,
    Vec3,
    backproject,
    cuboid_intersection_volume,
    cuboid_union_volume,
    gravity_align,
    interval_intersection,
    interval_union,
    iou3d,
    iou_matrix,
    transform_to_global,
)
from cuboidtrack.heatmap import HeatCell, HeatmapGrid, extract_boundaries, merge_frame, update_heatmap
from cuboidtrack.io import FrameObservation, SceneFile, SceneHeader, read_scene, read_tracks, write_scene, write_tracks
from cuboidtrack.tracker import (
    MatchResult,
    ObjectTrack,
    Registry,
    Tracker,
    TrackerConfig,
    assign_labels,
    best_match,
    process_frame,
    register_new,
    update_track,
)

__all__ = [
    "Cuboid",
    "GeometryError",
    "Intrinsics",
    "Interval",
    "Pose",
    "RotationEuler",
    "UnionMode",
    "Vec3",
    "backproject",
    "cuboid_intersection_volume",
    "cuboid_union_volume",
    "gravity_align",
    "interval_intersection",
    "interval_union",
    "iou3d",
    "iou_matrix",
    "transform_to_global",
    "HeatCell",
    "HeatmapGrid",
    "extract_boundaries",
    "merge_frame",
    "update_heatmap",
    "FrameObservation",
    "SceneFile",
    "SceneHeader",
    "read_scene",
    "read_tracks",
    "write_scene",
    "write_tracks",
    "MatchResult",
    "ObjectTrack",
    "Registry",
    "Tracker",
    "TrackerConfig",
    "assign_labels",
    "best_match",
    "process_frame",
    "register_new",
    "update_track",
]

__version__ = "0.1.0"
