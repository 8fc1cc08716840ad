"""Accumulate depth samples into a voxel heatmap, cut it into blobs and write a PLY.

Run: python demos/04_heatmap_and_export.py [out.ply]
"""

import sys

import numpy as np

from cuboidtrack import HeatmapGrid, Tracker, extract_boundaries, merge_frame
from cuboidtrack.io import export_ply
from cuboidtrack.synth import Scenario, generate, perimeter_trajectory, random_layout

objects = random_layout(5, np.random.default_rng(1))
scenario = Scenario(objects, perimeter_trajectory(40), depth_samples_per_object=200)
scene, _ = generate(scenario)
k = scene.header.intrinsics

grid = HeatmapGrid(0.02)
tracker = Tracker()
for frame in scene.frames:
    tracker.update(frame)
    merge_frame(grid, frame, frame.depth_samples, k)

print(f"{len(grid)} occupied voxels, total heat {grid.total_heat:.0f}")
blobs = extract_boundaries(grid, min_heat=2.0)
print(f"{len(blobs)} heat blobs vs {len(tracker.registry)} tracks")
for track in tracker.registry.tracks:
    print(f"  label {track.label}: seen {track.observation_count} times, box {tuple(round(v, 3) for v in track.box.params[:6])}")

out = sys.argv[1] if len(sys.argv) > 1 else "heatmap.ply"
export_ply(out, grid, tracker.registry)
print(f"wrote {out}")
