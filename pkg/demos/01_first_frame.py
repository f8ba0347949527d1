"""Render a single pose of the built-in living room and look at the buffers.

A frame is one color image plus four pixel-aligned ground truths: perspective
depth, orthographic depth, surface normals, and semantic labels.  Everything
below is deterministic: same scene + pose + settings + seed = same bytes.
"""

from pathlib import Path

import numpy as np

from aip import builtin_scene, render_frame, Pose, RenderSettings
from aip.dataset import export_frame

out = Path(__file__).parent / "out" / "first_frame"

scene = builtin_scene("brown_room")
print(f"scene: {scene.name}, {len(scene.objects)} objects, classes: {scene.classes}")

# stand near the back of the room, look slightly down toward the couch
pose = Pose(position=[0.0, 1.6, -1.4], yaw=15.0, pitch=-8.0)

settings = RenderSettings(
    render_scale=1.0,
    shadow_samples=8,      # soft shadows from the window light
    reflection_depth=2,    # TV screen and window glass pick up reflections
    aa_samples=4,
)

frame = render_frame(scene, pose, "day", settings, frame_seed=1234)
print(f"rays traced: {frame.meta['rays_traced']:,}")

paths = export_frame(frame, out, index=0)
for channel, path in paths.items():
    print(f"  {channel:12s} -> {path}")

# depth buffers are 16-bit: 0 = at the camera, 65535 = 10 m (the max range)
meters = frame.depth_persp.astype(np.float64) / 65535.0 * scene.depth_range
print(f"depth range in view: {meters.min():.2f} .. {meters.max():.2f} m")

# labels index into the scene's class list
visible = [scene.classes[i] for i in np.unique(frame.labels)]
print(f"classes in view: {', '.join(visible)}")
