"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (the lines appear in the
terminal summary) or ``python tests/test_acceptance.py``.
"""

import json
import statistics
import sys
import time

import numpy as np
import pytest

from cuboidtrack.cli import main
from cuboidtrack.geometry import (
    Cuboid,
    Interval,
    Pose,
    UnionMode,
    Vec3,
    cuboid_intersection_volume,
    cuboid_union_volume,
    interval_intersection,
    interval_union,
    iou3d,
)
from cuboidtrack.heatmap import HeatmapGrid
from cuboidtrack.io import FrameObservation, SceneFile, TrackFile, write_scene
from cuboidtrack.synth import evaluate, generate, make_scenario, voxel_counts
from cuboidtrack.tracker import ObjectTrack, Registry, Tracker, TrackerConfig, best_match, process_frame

RESULTS: dict[int, str] = {}


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def overlapping_pair(rng):
    # room-scale extents keep the 5 mm raster within 1% of the true volume
    ea = rng.uniform(2.0, 4.0, 3)
    eb = rng.uniform(2.0, 4.0, 3)
    a0 = rng.uniform(-5.0, 5.0, 3)
    overlap = np.array([rng.uniform(1.6, min(x, y)) for x, y in zip(ea, eb)])
    # place b so each axis overlaps a by exactly `overlap`, from either side
    left = rng.random(3) < 0.5
    b0 = np.where(left, a0 - eb + overlap, a0 + ea - overlap)
    nested = rng.random(3) < 0.2
    b0 = np.where(nested & (eb < ea), a0 + rng.uniform(0, 1, 3) * np.maximum(ea - eb, 0), b0)
    return Cuboid(Vec3(*a0), tuple(ea)), Cuboid(Vec3(*b0), tuple(eb))


def test_c1_iou_matches_voxel_oracle():
    pitch = 0.005
    rng = np.random.default_rng(20240101)
    worst_iou = worst_vol = 0.0
    t0 = time.perf_counter()
    for _ in range(1000):
        a, b = overlapping_pair(rng)
        ca, cb, cab = voxel_counts(a, b, pitch)
        oracle_iou = cab / (ca + cb - cab)
        oracle_vol = cab * pitch**3
        worst_iou = max(worst_iou, abs(iou3d(a, b, UnionMode.INCLUSION_EXCLUSION) - oracle_iou))
        worst_vol = max(worst_vol, abs(cuboid_intersection_volume(a, b) - oracle_vol) / oracle_vol)
    elapsed = time.perf_counter() - t0
    report(
        1,
        worst_iou <= 0.02 and worst_vol <= 0.01 and elapsed <= 60,
        f"max |IoU - oracle| = {worst_iou:.2e} (<= 0.02), max vol rel err = {worst_vol:.2e} (<= 0.01), {elapsed:.1f} s",
    )


def test_c2_worked_examples():
    a, b = Cuboid(Vec3(0, 0, 0), (2, 2, 2)), Cuboid(Vec3(1, 1, 1), (2, 2, 2))
    i = interval_intersection(Interval(0, 10), Interval(5, 10))
    u = interval_union(Interval(0, 10), Interval(5, 10))
    vi = cuboid_intersection_volume(a, b)
    vu = cuboid_union_volume(a, b, UnionMode.PAPER)
    iou = iou3d(a, b, UnionMode.PAPER)
    errs = [abs(i - 5), abs(u - 15), abs(vi - 1.0), abs(vu - 27.0), abs(iou - 1 / 27)]
    report(2, max(errs) <= 1e-12, f"interval {i}/{u}, volumes {vi}/{vu}, IoU {iou:.15f}; max err {max(errs):.1e}")


def test_c3_first_frame_labels():
    rng = np.random.default_rng(7)
    m = 25
    boxes = tuple(Cuboid(Vec3(0.5 * k, *rng.uniform(0, 0.1, 2)), tuple(rng.uniform(0.1, 0.3, 3))) for k in range(m))
    frame = FrameObservation(0, Pose.identity(), boxes)
    _, results = process_frame(frame, Registry(), TrackerConfig())
    labels = [r.assigned_label for r in results]
    report(3, labels == list(range(1, m + 1)), f"labels {labels[:3]}...{labels[-1]} for M={m}")


def _run(scenario):
    scene, truth = generate(scenario)
    t = Tracker()
    frames = [(f.frame_index, t.update(f)) for f in scene.frames]
    return evaluate(TrackFile({}, frames, t.registry), truth)


def test_c4_occlusion_reid():
    clean = _run(make_scenario(8, 300, 3, seed=0))
    noisy = [_run(make_scenario(8, 300, 3, seed=s, anchor_sigma=0.01)).reid_success for s in range(20)]
    mean = statistics.fmean(noisy)
    ok = clean.reid_success == 1.0 and clean.id_switches == 0 and clean.count_error == 0 and mean >= 0.95
    report(
        4,
        ok,
        f"noise-free reid={clean.reid_success} switches={clean.id_switches} count_err={clean.count_error} "
        f"({clean.n_windows} windows); sigma=1cm mean reid over 20 seeds = {mean:.3f} (>= 0.95)",
    )


def _registry(m, rng):
    anchors = rng.uniform(-50, 50, (m, 3))
    ext = rng.uniform(0.1, 0.5, (m, 3))
    tracks = tuple(ObjectTrack(k + 1, Cuboid(Vec3(*anchors[k]), tuple(ext[k]))) for k in range(m))
    return Registry(tracks, m + 1)


def test_c5_best_match_is_linear():
    rng = np.random.default_rng(11)
    sizes = [100, 1_000, 10_000, 100_000]
    probe = Cuboid(Vec3(0, 0, 0), (0.3, 0.3, 0.3))
    times = []
    for m in sizes:
        reg = _registry(m, rng)
        repeats = max(5, 200_000 // m)
        samples = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            best_match(probe, reg)
            samples.append(time.perf_counter() - t0)
        times.append(statistics.median(samples))
    x, y = np.log10(sizes), np.log10(times)
    slope, icpt = np.polyfit(x, y, 1)
    r2 = 1 - np.sum((y - (slope * x + icpt)) ** 2) / np.sum((y - y.mean()) ** 2)
    detail = ", ".join(f"M={m}: {t * 1e3:.3f} ms" for m, t in zip(sizes, times))
    report(5, abs(slope - 1) <= 0.15 and r2 >= 0.99, f"slope {slope:.3f} (1 +/- 0.15), R^2 {r2:.4f} (>= 0.99); {detail}")


def test_c6_track_budget(tmp_path):
    scene, _ = generate(make_scenario(50, 1000, 0, seed=1, region=(-3, -3, 3, 3), distance=5.0))
    rng = np.random.default_rng(5)
    frames = []
    for f in scene.frames:
        keep = sorted(rng.choice(len(f.proposals), 10, replace=False))
        frames.append(FrameObservation(f.frame_index, f.pose, tuple(f.proposals[k] for k in keep)))
    path = tmp_path / "perf.scene.jsonl"
    write_scene(path, SceneFile(scene.header, frames))
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        code = main(["track", str(path), "--out", str(tmp_path / "perf.tracks.jsonl"), "--quiet"])
        best = min(best, time.perf_counter() - t0)
        assert code == 0
    report(6, best < 1.0, f"1000 frames x 10 proposals, 50 objects: {best:.3f} s (< 1 s, best of 3)")


def test_c7_heat_conservation():
    rng = np.random.default_rng(3)
    n = 1_000_000
    grid = HeatmapGrid(0.02)
    for chunk in np.array_split(rng.uniform(-1.5, 1.5, (n, 3)), 10):
        grid.add_points(chunk)
    total = grid.total_heat
    count = sum(c.sample_count for c in grid.cells.values())
    bad = sum(1 for k, c in grid.cells.items() if grid.key_of(c.mean_position) != k)
    report(
        7,
        total == n and count == n and bad == 0,
        f"total heat {total!r} for {n} points over {len(grid)} cells; {bad} cells re-key elsewhere",
    )


def _pipeline(d, scenario):
    scene, tracks = d / "run.scene.jsonl", d / "run.tracks.jsonl"
    assert main(["synth", str(scenario), str(scene)]) == 0
    assert main(["track", str(scene), "--out", str(tracks), "--quiet"]) == 0
    return scene, tracks, d / "run.truth.jsonl"


def test_c8_determinism(tmp_path, capsys):
    cfg = {
        "seed": 42,
        "frames": 200,
        "random_objects": {"count": 8},
        "random_occlusions": {"count": 3},
        "noise": {"anchor_sigma": 0.01, "extent_sigma": 0.005, "dropout": 0.05},
    }
    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps(cfg))
    outputs = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        scene, tracks, truth = _pipeline(d, scenario)
        capsys.readouterr()
        assert main(["eval", str(tracks), str(truth), "--machine"]) == 0
        metrics = capsys.readouterr().out
        outputs.append((scene.read_bytes(), tracks.read_bytes(), truth.read_bytes(), metrics))
    same = [x == y for x, y in zip(*outputs)]
    report(8, all(same), f"scene/tracks/truth/metrics identical: {same}; metrics {outputs[0][3].strip()}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", *sys.argv[1:]]))
