"""``cuboid-track`` command line: synth, track, eval, export, convert.

Exit status is 0 on success, 2 for usage, parse and validation errors and 1
for I/O failures while writing.  Set ``CUBOID_TRACK_LOG`` (e.g. ``DEBUG``)
to change the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from cuboidtrack.geometry import GeometryError, Intrinsics, UnionMode
from cuboidtrack.heatmap import HeatmapGrid, merge_frame
from cuboidtrack.io import (
    FormatError,
    SceneReader,
    TrackWriter,
    convert_pose_proposals,
    export_ply,
    read_grid,
    read_tracks,
    write_grid,
    write_scene,
)
from cuboidtrack.synth import EvaluationError, ScenarioError, evaluate, generate, load_scenario, read_truth, write_truth
from cuboidtrack.tracker import AssignmentMode, Registry, TrackerConfig, TrackingError, process_frame

logger = logging.getLogger("cuboidtrack")

EXIT_OK, EXIT_IO, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _tau(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"tau must be in (0, 1], got {value}")
    return value


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {p}")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cuboid-track", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scene and its ground truth")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("out", help="scene file to write (.scene.jsonl)")
    p.add_argument("--truth", help="ground-truth file (default: next to OUT as .truth.jsonl)")
    p.add_argument("--seed", type=_seed, help="override the scenario seed")

    p = sub.add_parser("track", help="label the proposals of a scene file")
    p.add_argument("scene", help="scene file (.scene.jsonl)")
    p.add_argument("--out", required=True, help="track file to write (.tracks.jsonl)")
    p.add_argument("--tau", type=_tau, default=0.25, help="IoU acceptance threshold (default 0.25)")
    p.add_argument("--union-mode", choices=["paper", "ie"], default="paper")
    p.add_argument("--assignment", choices=["greedy", "argmax"], default="greedy")
    p.add_argument("--fusion", choices=["count-weighted", "fixed"], default="count-weighted")
    p.add_argument("--fusion-alpha", type=float, default=1.0, help="blend factor for --fusion fixed")
    p.add_argument("--voxel", type=_positive, help="heatmap voxel size in meters (default: scene header)")
    p.add_argument("--grid-out", help="write the accumulated heatmap grid here")
    p.add_argument("--quiet", action="store_true", help="suppress per-frame timing lines")

    p = sub.add_parser("eval", help="score a track file against ground truth")
    p.add_argument("tracks")
    p.add_argument("truth")
    p.add_argument("--machine", action="store_true", help="emit one JSON line only")

    p = sub.add_parser("export", help="write tracks and heatmap as ASCII PLY")
    p.add_argument("tracks")
    p.add_argument("grid")
    p.add_argument("out")

    p = sub.add_parser("convert", help="assemble a scene from pose and proposal dumps")
    p.add_argument("poses")
    p.add_argument("proposals")
    p.add_argument("out")
    p.add_argument("--intrinsics", type=float, nargs=4, metavar=("FX", "FY", "CX", "CY"))
    p.add_argument("--voxel", type=_positive, default=0.02)
    return parser


def _truth_path(scene_out: Path) -> Path:
    name = scene_out.name
    if name.endswith(".scene.jsonl"):
        return scene_out.with_name(name[: -len(".scene.jsonl")] + ".truth.jsonl")
    return scene_out.with_name(scene_out.stem + ".truth.jsonl")


def cmd_synth(args) -> int:
    scenario = load_scenario(_existing(args.scenario), seed=args.seed)
    scene, truth = generate(scenario)
    out = Path(args.out)
    truth_out = Path(args.truth) if args.truth else _truth_path(out)
    write_scene(out, scene)
    write_truth(truth_out, truth)
    print(f"wrote {len(scene)} frames to {out} and ground truth to {truth_out}")
    return EXIT_OK


def cmd_track(args) -> int:
    cfg = TrackerConfig(
        tau=args.tau,
        fusion_alpha_mode=args.fusion,
        assignment=AssignmentMode.parse(args.assignment),
        union_mode=UnionMode.parse(args.union_mode),
        fusion_alpha=args.fusion_alpha,
    )
    scene_path = _existing(args.scene)
    err = sys.stderr
    t_start = time.perf_counter()
    with SceneReader(scene_path) as reader:
        voxel = args.voxel or reader.header.voxel_size
        intrinsics: Intrinsics | None = reader.header.intrinsics
        print(
            f"cuboid-track: tau={cfg.tau} union_mode={cfg.union_mode.value} "
            f"assignment={cfg.assignment.value} fusion={cfg.fusion_alpha_mode.value} voxel={voxel}",
            file=err,
        )
        grid = HeatmapGrid(voxel)
        registry = Registry()
        n_frames = 0
        with TrackWriter(args.out, cfg) as writer:
            for frame in reader:
                t0 = time.perf_counter()
                registry, results = process_frame(frame, registry, cfg)
                if len(frame.depth_samples):
                    if intrinsics is None:
                        raise FormatError(f"frame {frame.frame_index}: depth samples but no intrinsics in header")
                    merge_frame(grid, frame, frame.depth_samples, intrinsics)
                dt = time.perf_counter() - t0
                writer.write_frame(frame.frame_index, results)
                n_frames += 1
                if not args.quiet:
                    print(
                        f"frame {frame.frame_index}: {len(results)} proposals, "
                        f"{dt * 1e3:.3f} ms, {len(registry)} tracks",
                        file=err,
                    )
            writer.write_registry(registry)
    if args.grid_out:
        write_grid(args.grid_out, grid)
    total = time.perf_counter() - t_start
    print(f"objects: {len(registry)} (frames: {n_frames}, {total:.3f} s)")
    return EXIT_OK


def cmd_eval(args) -> int:
    tracks = read_tracks(_existing(args.tracks))
    truth = read_truth(_existing(args.truth))
    metrics = evaluate(tracks, truth)
    if args.machine:
        print(metrics.to_json())
    else:
        print(metrics.table())
        print(metrics.summary_line())
    return EXIT_OK


def cmd_export(args) -> int:
    tracks = read_tracks(_existing(args.tracks))
    grid = read_grid(_existing(args.grid))
    export_ply(args.out, grid, tracks.registry)
    print(f"wrote {len(grid)} cells and {len(tracks.registry)} boxes to {args.out}")
    return EXIT_OK


def cmd_convert(args) -> int:
    k = Intrinsics(*args.intrinsics) if args.intrinsics else None
    scene = convert_pose_proposals(_existing(args.poses), _existing(args.proposals), k, args.voxel)
    write_scene(args.out, scene)
    print(f"wrote {len(scene)} frames to {args.out}")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "track": cmd_track,
    "eval": cmd_eval,
    "export": cmd_export,
    "convert": cmd_convert,
}


def main(argv=None) -> int:
    level = os.environ.get("CUBOID_TRACK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse: 2 for usage errors, 0 for --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, FormatError, ScenarioError, EvaluationError, TrackingError, GeometryError, ValueError) as exc:
        print(f"cuboid-track {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cuboid-track {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
